#include "qshuttle/control.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qshuttle/analysis.hpp"

namespace qshuttle::control {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
const qops::Complex kImag(0.0, 1.0);

}  // namespace

// ---------------------------------------------------------------------------
// Pulses
// ---------------------------------------------------------------------------

void PulseSpec::validate() const {
    if (!(f_rabi > 0.0)) throw std::invalid_argument("pulse: f_rabi must be > 0");
    if (duration < 0.0) throw std::invalid_argument("pulse: duration must be >= 0");
    if (steps < 1) throw std::invalid_argument("pulse: steps must be >= 1");
}

qops::Matrix rotating_hamiltonian(double delta_f, double f_rabi, double phi) {
    if (!(f_rabi > 0.0)) throw std::invalid_argument("rotating_hamiltonian: f_rabi must be > 0");
    qops::Matrix h(2, 2);
    h << 0.5 * delta_f, 0.5 * f_rabi * std::exp(kImag * phi),
        0.5 * f_rabi * std::exp(-kImag * phi), -0.5 * delta_f;
    return h;
}

qops::Matrix pulse_propagator(double delta_f, double f_rabi, double phi, double duration) {
    // exp(-i 2 pi H t) for H = (1/2)(fR cos(phi) sx - fR sin(phi) sy + df sz):
    // a rotation by 2 pi Omega t about (fR cos, -fR sin, df)/Omega.
    const double omega = std::hypot(f_rabi, delta_f);
    const double angle = kPi * omega * duration;  // half of 2 pi Omega t
    if (omega == 0.0 || duration == 0.0) return qops::Matrix::Identity(2, 2);
    const double nx = f_rabi * std::cos(phi) / omega;
    const double ny = -f_rabi * std::sin(phi) / omega;
    const double nz = delta_f / omega;
    const double c = std::cos(angle), s = std::sin(angle);
    qops::Matrix u(2, 2);
    u << c - kImag * s * nz, -kImag * s * (nx - kImag * ny),
        -kImag * s * (nx + kImag * ny), c + kImag * s * nz;
    return u;
}

qops::Operator evolve_pulse(const PulseSpec& p) {
    p.validate();
    const double dt = p.duration / p.steps;
    const qops::Matrix step = pulse_propagator(p.delta_f, p.f_rabi, p.phi, dt);
    qops::Matrix u = qops::Matrix::Identity(2, 2);
    for (int k = 0; k < p.steps; ++k) u = step * u;
    return qops::Operator::unitary(std::move(u));
}

double half_pi_time(double f_rabi) {
    if (!(f_rabi > 0.0)) throw std::invalid_argument("half_pi_time: f_rabi must be > 0");
    return 1.0 / (4.0 * f_rabi);
}

qops::Matrix z_rotation(double theta) {
    qops::Matrix u(2, 2);
    u << std::exp(-kImag * (theta / 2.0)), 0, 0, std::exp(kImag * (theta / 2.0));
    return u;
}

qops::Matrix free_phase(double delta_f, double t) {
    // exp(-i 2 pi t (df/2) sz)
    return z_rotation(kTwoPi * delta_f * t);
}

// ---------------------------------------------------------------------------
// Primitives
// ---------------------------------------------------------------------------

const char* primitive_name(Primitive p) {
    switch (p) {
        case Primitive::I: return "I";
        case Primitive::Xp2: return "X/2";
        case Primitive::Xm2: return "-X/2";
        case Primitive::Yp2: return "Y/2";
        case Primitive::Ym2: return "-Y/2";
        case Primitive::X: return "X";
        case Primitive::Y: return "Y";
    }
    return "?";
}

double primitive_phase(Primitive p) {
    // Drive phase selecting the rotation axis (cos(phi), -sin(phi), 0).
    switch (p) {
        case Primitive::I:
        case Primitive::Xp2:
        case Primitive::X: return 0.0;
        case Primitive::Xm2: return kPi;
        case Primitive::Yp2:
        case Primitive::Y: return -kPi / 2.0;
        case Primitive::Ym2: return kPi / 2.0;
    }
    return 0.0;
}

double primitive_angle(Primitive p) {
    switch (p) {
        case Primitive::I: return 0.0;
        case Primitive::Xp2:
        case Primitive::Xm2:
        case Primitive::Yp2:
        case Primitive::Ym2: return kPi / 2.0;
        case Primitive::X:
        case Primitive::Y: return kPi;
    }
    return 0.0;
}

double primitive_duration(Primitive p, double f_rabi) {
    const double t_hp = half_pi_time(f_rabi);
    return p == Primitive::X || p == Primitive::Y ? 2.0 * t_hp : t_hp;
}

qops::Matrix axis_rotation(double phi, double angle) {
    const double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
    qops::Matrix u(2, 2);
    u << c, -kImag * s * std::exp(kImag * phi), -kImag * s * std::exp(-kImag * phi), c;
    return u;
}

const qops::Matrix& primitive_unitary(Primitive p) {
    static const std::array<qops::Matrix, 7> table = [] {
        std::array<qops::Matrix, 7> t;
        for (Primitive q : {Primitive::I, Primitive::Xp2, Primitive::Xm2, Primitive::Yp2,
                            Primitive::Ym2, Primitive::X, Primitive::Y})
            t[static_cast<size_t>(q)] = axis_rotation(primitive_phase(q), primitive_angle(q));
        return t;
    }();
    return table[static_cast<size_t>(p)];
}

PhaseFrame virtual_z(PhaseFrame frame, int qubit, double phase) {
    if (qubit < 0 || qubit > 1) throw std::invalid_argument("virtual_z: qubit must be 0 or 1");
    frame.phase[qubit] = std::remainder(frame.phase[qubit] + phase, kTwoPi);
    return frame;
}

// ---------------------------------------------------------------------------
// Exchange evolution
// ---------------------------------------------------------------------------

void ExchangeSpec::validate() const {
    if (j < 0.0) throw std::invalid_argument("exchange: J must be >= 0");
    if (t_evol < 0.0) throw std::invalid_argument("exchange: t_evol must be >= 0");
}

namespace {

// Diagonal of exp(-i 2 pi t (J/4) szsz) with additional local Rz angles.
qops::Vector exchange_diag(double j, double t, double rz_l, double rz_m) {
    qops::Vector d(4);
    const double zz = kTwoPi * (j / 4.0) * t;
    // Basis order {dd, du, ud, uu}; sz eigenvalue +1 for down (index 0).
    for (int k = 0; k < 4; ++k) {
        const double z_l = (k & 2) ? -1.0 : 1.0;
        const double z_m = (k & 1) ? -1.0 : 1.0;
        const double phase = -(zz * z_l * z_m + 0.5 * rz_l * z_l + 0.5 * rz_m * z_m);
        d[k] = std::exp(kImag * phase);
    }
    return d;
}

qops::Matrix pi_layer(PiAxis axis) {
    const qops::Matrix& u =
        primitive_unitary(axis == PiAxis::x ? Primitive::X : Primitive::Y);
    return qops::tensor(u, u);
}

struct DiagDecomposition {
    double global, a, b, c;  // phase(zl, zm) = global + a zl + b zm + c zl zm
};

DiagDecomposition decompose_diag_phases(const qops::Matrix& u) {
    std::array<double, 4> phi{};
    for (int k = 0; k < 4; ++k) phi[k] = std::arg(u(k, k));
    return {0.25 * (phi[0] + phi[1] + phi[2] + phi[3]),
            0.25 * (phi[0] + phi[1] - phi[2] - phi[3]),
            0.25 * (phi[0] - phi[1] + phi[2] - phi[3]),
            0.25 * (phi[0] - phi[1] - phi[2] + phi[3])};
}

}  // namespace

qops::Operator exchange_evolve(const ExchangeSpec& spec) {
    spec.validate();
    // phi_uncond is defined per half-evolution, so the full t_evol call
    // accrues twice the configured angle.
    qops::Matrix u = exchange_diag(spec.j, spec.t_evol, 2.0 * spec.phi_uncond_l,
                                   2.0 * spec.phi_uncond_m)
                         .asDiagonal();
    return qops::Operator::unitary(std::move(u));
}

double conditional_phase(const qops::Matrix& u) {
    if (u.rows() != 4 || u.cols() != 4)
        throw std::invalid_argument("conditional_phase needs a 4x4 unitary");
    const qops::Complex prod =
        u(0, 0) * u(3, 3) * std::conj(u(1, 1)) * std::conj(u(2, 2));
    return std::arg(prod);
}

qops::Operator dcz_unitary(const ExchangeSpec& spec, PiAxis axis, double static_df_l,
                           double static_df_m) {
    spec.validate();
    const double t_half = spec.t_evol / 2.0;
    // Static detunings act as extra local Rz during each half; the echo
    // removes them along with the symmetric phi_uncond terms.
    const double rz_l = spec.phi_uncond_l + kTwoPi * static_df_l * t_half;
    const double rz_m = spec.phi_uncond_m + kTwoPi * static_df_m * t_half;
    const qops::Matrix half =
        exchange_diag(spec.j, t_half, rz_l, rz_m).asDiagonal();
    const qops::Matrix kick =
        qops::tensor(z_rotation(spec.phi_uncond_l), z_rotation(spec.phi_uncond_m));
    qops::Matrix u = kick * half * pi_layer(axis) * half;
    return qops::Operator::unitary(std::move(u));
}

CzCompensation cz_compensation(const ExchangeSpec& spec, PiAxis axis) {
    // Undo the pi layer, then read the local phases off the diagonal.
    const qops::Matrix m = pi_layer(axis) * dcz_unitary(spec, axis).mat();
    const DiagDecomposition d = decompose_diag_phases(m);
    // Rz(chi) contributes -chi/2 to the local coefficient; CZ needs a = b = -c.
    return {2.0 * (d.a + d.c), 2.0 * (d.b + d.c)};
}

qops::Operator cz_from_dcz(const ExchangeSpec& spec, PiAxis axis) {
    const CzCompensation comp = cz_compensation(spec, axis);
    const qops::Matrix vz =
        qops::tensor(z_rotation(comp.vz_l), z_rotation(comp.vz_m));
    qops::Matrix u = vz * pi_layer(axis) * dcz_unitary(spec, axis).mat();
    qops::Matrix cz = qops::Matrix::Identity(4, 4);
    cz(3, 3) = -1.0;
    if (!qops::phase_equal(u, cz, 1e-9)) {
        std::ostringstream msg;
        msg << "cz_from_dcz: composite is not CZ (conditional phase "
            << conditional_phase(u) / kPi << " pi); check J*t_evol calibration";
        throw std::runtime_error(msg.str());
    }
    return qops::Operator::unitary(std::move(u));
}

// ---------------------------------------------------------------------------
// DCZ phase probes and calibration
// ---------------------------------------------------------------------------

double dcz_probe_phase(const ExchangeSpec& spec, PiAxis axis, int probe_qubit, bool control_up,
                       double probe_resolution) {
    if (probe_qubit < 0 || probe_qubit > 1)
        throw std::invalid_argument("dcz_probe_phase: probe qubit must be 0 or 1");
    if (!(probe_resolution > 0.0) || probe_resolution > kPi)
        throw std::invalid_argument("dcz_probe_phase: resolution must be in (0, pi]");
    const int control_qubit = 1 - probe_qubit;
    const qops::Matrix eye = qops::Matrix::Identity(2, 2);

    auto on = [&](int q, const qops::Matrix& u) {
        return q == 0 ? qops::tensor(u, eye) : qops::tensor(eye, u);
    };

    qops::Vector psi = qops::Vector::Zero(4);
    psi[0] = 1.0;  // |dd>
    if (control_up) psi = on(control_qubit, primitive_unitary(Primitive::X)) * psi;
    psi = on(probe_qubit, primitive_unitary(Primitive::Xp2)) * psi;
    psi = dcz_unitary(spec, axis).mat() * psi;

    const int n_points = std::max(9, static_cast<int>(std::ceil(kTwoPi / probe_resolution)) + 1);
    std::vector<double> phases(n_points), probs(n_points);
    for (int k = 0; k < n_points; ++k) {
        const double phi = kTwoPi * k / (n_points - 1);
        const qops::Vector out = on(probe_qubit, axis_rotation(phi, kPi / 2.0)) * psi;
        double p_up = 0.0;
        for (int idx = 0; idx < 4; ++idx) {
            const bool up = probe_qubit == 0 ? (idx & 2) : (idx & 1);
            if (up) p_up += std::norm(out[idx]);
        }
        phases[k] = phi;
        probs[k] = p_up;
    }
    const analysis::PhaseFit fit = analysis::extract_phase(phases, probs);
    if (fit.amplitude < 0.1)
        throw std::runtime_error("dcz probe: oscillation amplitude below 0.1, fit unreliable");
    return fit.phase;
}

std::array<double, 2> calibrate_unconditional_phases(const ExchangeSpec& spec,
                                                     double probe_resolution) {
    spec.validate();
    ExchangeSpec reference = spec;
    reference.phi_uncond_l = 0.0;
    reference.phi_uncond_m = 0.0;
    std::array<double, 2> result{};
    for (int probe = 0; probe < 2; ++probe) {
        const double down = dcz_probe_phase(spec, PiAxis::x, probe, false, probe_resolution);
        const double up = dcz_probe_phase(spec, PiAxis::x, probe, true, probe_resolution);
        const double down0 = dcz_probe_phase(reference, PiAxis::x, probe, false, probe_resolution);
        const double up0 = dcz_probe_phase(reference, PiAxis::x, probe, true, probe_resolution);
        // Half the sum of the fitted offsets, referenced to the zero-phase
        // probe so the fringe geometry constant drops out.
        const double half_sum = 0.5 * (down + up);
        const double half_sum0 = 0.5 * (down0 + up0);
        result[probe] = std::remainder(half_sum - half_sum0, kTwoPi);
    }
    return result;
}

// ---------------------------------------------------------------------------
// SequenceContext
// ---------------------------------------------------------------------------

SequenceContext::SequenceContext(const device::DeviceConfig& cfg, int n_qubits, ExecOptions opts)
    : cfg_(cfg), opts_(opts), n_qubits_(n_qubits), dim_(n_qubits == 1 ? 2 : 4) {
    if (n_qubits != 1 && n_qubits != 2)
        throw std::invalid_argument("SequenceContext: n_qubits must be 1 or 2");
    cfg.validate();
    if (n_qubits_ == 2) {
        const ExchangeSpec spec{cfg.j_on, cfg.t_evol_cz, cfg.phi_uncond_l, cfg.phi_uncond_m};
        // The two transfer phases cancel through the echo, so the shuttle
        // phase does not enter the compensation.
        cz_comp_ = cz_compensation(spec, PiAxis::y);
        const auto chan = noise::shuttle_transfer_channel(cfg.noise.shuttle);
        for (const qops::Matrix& k : chan.on_qubit(1).ops()) transfer_kraus_.push_back(k);
    } else {
        const auto chan = noise::shuttle_transfer_channel(cfg.noise.shuttle);
        for (const qops::Matrix& k : chan.ops()) transfer_kraus_.push_back(k);
    }
    reset();
}

void SequenceContext::reset() {
    pure_ = true;
    psi_ = qops::Vector::Zero(dim_);
    psi_[0] = 1.0;
    rho_.resize(dim_, dim_);
    tmp_.resize(dim_, dim_);
    frame_ = PhaseFrame{};
    op_state_ = device::OperationState::sparse;
    elapsed_ = 0.0;
    quasistatic_ = {0.0, 0.0};
}

void SequenceContext::begin_shot(RngStream& rng) {
    reset();
    quasistatic_ = noise::sample_quasistatic(cfg_.noise, rng);
}

void SequenceContext::set_quasistatic(double df_l, double df_m) {
    quasistatic_ = {df_l, df_m};
}

void SequenceContext::promote() {
    if (!pure_) return;
    rho_.noalias() = psi_ * psi_.adjoint();
    pure_ = false;
}

void SequenceContext::apply_unitary(const qops::Matrix& u) {
    if (pure_) {
        psi_ = u * psi_;
    } else {
        tmp_.noalias() = u * rho_;
        rho_.noalias() = tmp_ * u.adjoint();
    }
}

void SequenceContext::apply_1q_unitary(int qubit, const qops::Matrix& u2) {
    if (n_qubits_ == 1) {
        apply_unitary(u2);
        return;
    }
    const qops::Matrix eye = qops::Matrix::Identity(2, 2);
    apply_unitary(qubit == 0 ? qops::tensor(u2, eye) : qops::tensor(eye, u2));
}

void SequenceContext::apply_diag(const qops::Vector& d) {
    if (pure_) {
        psi_.array() *= d.array();
    } else {
        rho_.array() *= (d * d.adjoint()).array();
    }
}

void SequenceContext::accrue_idle_phases(double t) {
    if (t <= 0.0) return;
    elapsed_ += t;
    if (quasistatic_[0] == 0.0 && quasistatic_[1] == 0.0) return;
    qops::Vector d(dim_);
    if (n_qubits_ == 1) {
        const double half = kPi * quasistatic_[0] * t;  // 2 pi (df/2) t
        d << std::exp(-kImag * half), std::exp(kImag * half);
    } else {
        const double hl = kPi * quasistatic_[0] * t;
        const double hm = kPi * quasistatic_[1] * t;
        d << std::exp(-kImag * (hl + hm)), std::exp(-kImag * (hl - hm)),
            std::exp(kImag * (hl - hm)), std::exp(kImag * (hl + hm));
    }
    apply_diag(d);
}

void SequenceContext::idle(double t) {
    if (t < 0.0) throw std::invalid_argument("idle: t must be >= 0");
    if (opts_.zero_duration) return;
    accrue_idle_phases(t);
}

void SequenceContext::virtual_z(int qubit, double phase) {
    frame_ = control::virtual_z(frame_, qubit, phase);
}

void SequenceContext::pulse(int qubit, Primitive prim) {
    if (qubit < 0 || qubit >= n_qubits_) throw std::invalid_argument("pulse: bad qubit index");
    const double dur = opts_.zero_duration ? 0.0 : primitive_duration(prim, cfg_.f_rabi);
    if (prim == Primitive::I) {
        idle(dur);
        return;
    }
    const double phi_eff = primitive_phase(prim) + frame_.phase[qubit];
    qops::Matrix u2;
    if (opts_.pulse_level && !opts_.zero_duration) {
        if (opts_.pulse_steps <= 1) {
            u2 = pulse_propagator(quasistatic_[qubit], cfg_.f_rabi, phi_eff, dur);
        } else {
            PulseSpec p{quasistatic_[qubit], cfg_.f_rabi, phi_eff, dur, opts_.pulse_steps};
            u2 = evolve_pulse(p).mat();
        }
    } else {
        u2 = axis_rotation(phi_eff, primitive_angle(prim));
    }
    // The undriven qubit precesses at its quasi-static offset meanwhile.
    if (n_qubits_ == 2 && dur > 0.0) {
        const int other = 1 - qubit;
        const qops::Matrix idle_u = free_phase(quasistatic_[other], dur);
        apply_unitary(qubit == 0 ? qops::tensor(u2, idle_u) : qops::tensor(idle_u, u2));
    } else {
        apply_1q_unitary(qubit, u2);
    }
    elapsed_ += dur;
}

void SequenceContext::exchange(double t) {
    if (n_qubits_ != 2) throw std::logic_error("exchange needs a 2-qubit context");
    if (t < 0.0) throw std::invalid_argument("exchange: t must be >= 0");
    const double j = cfg_.current_j(op_state_);
    const double rz_l = kTwoPi * quasistatic_[0] * t;
    const double rz_m = kTwoPi * quasistatic_[1] * t;
    apply_diag(exchange_diag(j, t, rz_l, rz_m));
    if (op_state_ == device::OperationState::coupled && cfg_.noise.dcz_dephasing_enabled &&
        t > 0.0) {
        dephase_qubit(0, std::exp(-t / cfg_.noise.t2_dcz[0]));
        dephase_qubit(1, std::exp(-t / cfg_.noise.t2_dcz[1]));
    }
    elapsed_ += t;
}

void SequenceContext::shuttle(ShuttleDirection dir) {
    const bool to_coupled = dir == ShuttleDirection::to_coupled;
    if (to_coupled && op_state_ == device::OperationState::coupled)
        throw std::logic_error("shuttle: already in the coupled state");
    if (!to_coupled && op_state_ == device::OperationState::sparse)
        throw std::logic_error("shuttle: already in the sparse state");
    idle(opts_.zero_duration ? 0.0 : cfg_.shuttle_duration);
    if (cfg_.shuttle_phase != 0.0) {
        const qops::Matrix rz = z_rotation(cfg_.shuttle_phase);
        if (n_qubits_ == 2)
            apply_1q_unitary(1, rz);
        else
            apply_unitary(rz);
    }
    if (cfg_.noise.shuttle_noise_enabled) {
        promote();
        tmp_.setZero();
        for (const qops::Matrix& k : transfer_kraus_) tmp_ += k * rho_ * k.adjoint();
        rho_ = 0.5 * (tmp_ + tmp_.adjoint().eval());
    }
    op_state_ = to_coupled ? device::OperationState::coupled : device::OperationState::sparse;
}

void SequenceContext::dephase_qubit(int qubit, double factor) {
    if (factor < 0.0 || factor > 1.0) throw std::invalid_argument("dephase factor outside [0,1]");
    if (factor == 1.0) return;
    promote();
    if (n_qubits_ == 1) {
        rho_(0, 1) *= factor;
        rho_(1, 0) *= factor;
        return;
    }
    const int bit = qubit == 0 ? 2 : 1;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if ((i & bit) != (j & bit)) rho_(i, j) *= factor;
}

void SequenceContext::apply_channel_1q(int qubit, const qops::KrausChannel& chan) {
    promote();
    const qops::KrausChannel expanded =
        (n_qubits_ == 2 && chan.dim() == 2) ? chan.on_qubit(qubit) : chan;
    tmp_.setZero();
    for (const qops::Matrix& k : expanded.ops()) tmp_ += k * rho_ * k.adjoint();
    rho_ = 0.5 * (tmp_ + tmp_.adjoint().eval());
}

void SequenceContext::cz() {
    if (n_qubits_ != 2) throw std::logic_error("cz needs a 2-qubit context");
    const double t_half = cfg_.t_evol_cz / 2.0;
    const PiAxis axis = PiAxis::y;
    shuttle(ShuttleDirection::to_coupled);
    exchange(t_half);
    auto pi_on_both = [&] {
        if (opts_.ideal_dcz_pi || opts_.zero_duration) {
            const qops::Matrix ul = axis_rotation(primitive_phase(Primitive::Y) + frame_.phase[0], kPi);
            const qops::Matrix um = axis_rotation(primitive_phase(Primitive::Y) + frame_.phase[1], kPi);
            apply_unitary(qops::tensor(ul, um));
        } else {
            // Simultaneous physical pi pulses on both qubits.
            const double dur = primitive_duration(Primitive::Y, cfg_.f_rabi);
            const qops::Matrix ul = pulse_propagator(
                quasistatic_[0], cfg_.f_rabi, primitive_phase(Primitive::Y) + frame_.phase[0], dur);
            const qops::Matrix um = pulse_propagator(
                quasistatic_[1], cfg_.f_rabi, primitive_phase(Primitive::Y) + frame_.phase[1], dur);
            apply_unitary(qops::tensor(ul, um));
            elapsed_ += dur;
        }
    };
    pi_on_both();
    exchange(t_half);
    // Net unconditional phase kick of the composite (the echo removes the
    // symmetric in-half contributions).
    apply_diag(qops::tensor(z_rotation(cfg_.phi_uncond_l), z_rotation(cfg_.phi_uncond_m))
                   .diagonal());
    shuttle(ShuttleDirection::to_sparse);
    pi_on_both();
    virtual_z(0, cz_comp_.vz_l);
    virtual_z(1, cz_comp_.vz_m);
}

void SequenceContext::apply(const GateOp& op) {
    std::visit(
        [this](const auto& o) {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, PulseOp>)
                pulse(o.qubit, o.prim);
            else if constexpr (std::is_same_v<T, VirtualZOp>)
                virtual_z(o.qubit, o.phase);
            else if constexpr (std::is_same_v<T, ExchangeOp>)
                exchange(o.t);
            else if constexpr (std::is_same_v<T, ShuttleOp>)
                shuttle(o.direction);
            else
                idle(o.t);
        },
        op);
}

qops::QuantumState SequenceContext::state() const {
    if (pure_) {
        qops::Vector v = psi_ / psi_.norm();
        return qops::QuantumState::pure(std::move(v));
    }
    qops::Matrix r = 0.5 * (rho_ + rho_.adjoint().eval());
    r /= r.trace().real();
    return qops::QuantumState::mixed(std::move(r));
}

std::vector<double> SequenceContext::measure_probabilities() const {
    std::vector<double> probs(dim_);
    for (int i = 0; i < dim_; ++i) {
        const double p = pure_ ? std::norm(psi_[i]) : rho_(i, i).real();
        probs[i] = std::clamp(p, 0.0, 1.0);
    }
    double total = 0.0;
    for (double p : probs) total += p;
    for (double& p : probs) p /= total;
    if (!cfg_.noise.readout_error_enabled) return probs;

    auto flip = [&](int q) {
        const double eu = cfg_.noise.readout[q].eps_up;
        const double ed = cfg_.noise.readout[q].eps_down;
        return std::array<double, 4>{1.0 - ed, eu, ed, 1.0 - eu};  // column-major 2x2
    };
    if (n_qubits_ == 1) {
        const auto m = flip(0);
        return {m[0] * probs[0] + m[2 * 1] * probs[1],
                m[1] * probs[0] + m[3] * probs[1]};
    }
    const auto ml = flip(0);
    const auto mm = flip(1);
    std::vector<double> out(4, 0.0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const int il = i >> 1, im = i & 1, jl = j >> 1, jm = j & 1;
            out[i] += ml[il + 2 * jl] * mm[im + 2 * jm] * probs[j];
        }
    return out;
}

}  // namespace qshuttle::control
