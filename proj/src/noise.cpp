#include "qshuttle/noise.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qshuttle::noise {

namespace {
constexpr double kPi = std::numbers::pi;
}

void NoiseModel::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) {
            std::ostringstream msg;
            msg << "noise." << name << " must be > 0";
            throw std::invalid_argument(msg.str());
        }
    };
    for (int q = 0; q < 2; ++q) {
        positive(t2_star[q], "t2_star");
        positive(t2_echo[q], "t2_echo");
        positive(t2_rabi[q], "t2_rabi");
        positive(t2_dcz[q], "t2_dcz");
        positive(echo_exponent[q], "echo_exponent");
        if (readout[q].eps_up < 0.0 || readout[q].eps_up >= 1.0 ||
            readout[q].eps_down < 0.0 || readout[q].eps_down >= 1.0)
            throw std::invalid_argument("noise.readout_flip must be in [0,1)");
    }
    auto fidelity = [](double v, const char* name) {
        if (!(v > 0.0) || v > 1.0) {
            std::ostringstream msg;
            msg << "noise.shuttle." << name << " must be in (0,1]";
            throw std::invalid_argument(msg.str());
        }
    };
    fidelity(shuttle.f_up, "f_up");
    fidelity(shuttle.f_down, "f_down");
    fidelity(shuttle.f_phase, "f_phase");
}

NoiseModel NoiseModel::disabled() const {
    NoiseModel off = *this;
    off.quasistatic_enabled = false;
    off.dcz_dephasing_enabled = false;
    off.echo_decay_enabled = false;
    off.shuttle_noise_enabled = false;
    off.readout_error_enabled = false;
    return off;
}

double sigma_from_t2star(double t2_star) {
    if (!(t2_star > 0.0)) throw std::invalid_argument("t2_star must be > 0");
    if (std::isinf(t2_star)) return 0.0;
    return std::sqrt(2.0) / (2.0 * kPi * t2_star);
}

std::array<double, 2> sample_quasistatic(const NoiseModel& model, RngStream& rng) {
    std::array<double, 2> df = {0.0, 0.0};
    if (!model.quasistatic_enabled) return df;
    for (int q = 0; q < 2; ++q) df[q] = rng.normal(0.0, sigma_from_t2star(model.t2_star[q]));
    return df;
}

qops::KrausChannel dephasing_channel(double t, double t2) {
    if (t < 0.0) throw std::invalid_argument("dephasing time must be >= 0");
    if (!(t2 > 0.0)) throw std::invalid_argument("t2 must be > 0");
    return dephasing_channel_factor(std::exp(-t / t2));
}

qops::KrausChannel dephasing_channel_factor(double factor) {
    if (factor < 0.0 || factor > 1.0)
        throw std::invalid_argument("dephasing factor must be in [0,1]");
    // rho01 multiplier (1-2p) = factor with phase-flip probability p.
    const double p = 0.5 * (1.0 - factor);
    std::vector<qops::Matrix> kraus;
    kraus.push_back(std::sqrt(1.0 - p) * qops::Matrix::Identity(2, 2));
    kraus.push_back(std::sqrt(p) * qops::pauli_z());
    return qops::KrausChannel::from_ops(std::move(kraus));
}

qops::KrausChannel depolarizing_channel(double p, int dim) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("depolarizing p must be in [0,1]");
    if (dim != 2 && dim != 4) throw std::invalid_argument("depolarizing dim must be 2 or 4");
    // rho -> p rho + (1-p) I/dim as a uniform Pauli mixture.
    const int n_paulis = dim * dim;
    const double w = (1.0 - p) / static_cast<double>(n_paulis);
    std::vector<qops::Matrix> singles = {qops::Matrix::Identity(2, 2), qops::pauli_x(),
                                         qops::pauli_y(), qops::pauli_z()};
    std::vector<qops::Matrix> kraus;
    if (dim == 2) {
        kraus.push_back(std::sqrt(p + w) * singles[0]);
        for (int i = 1; i < 4; ++i) kraus.push_back(std::sqrt(w) * singles[i]);
    } else {
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                const double weight = (i == 0 && j == 0) ? p + w : w;
                if (weight <= 0.0) continue;
                kraus.push_back(std::sqrt(weight) * qops::tensor(singles[i], singles[j]));
            }
    }
    return qops::KrausChannel::from_ops(std::move(kraus));
}

namespace {

qops::KrausChannel cycle_channel_from(double f_up, double f_down, double f_phase) {
    if (f_phase * f_phase > f_up * f_down + 1e-12) {
        std::ostringstream msg;
        msg << "shuttle fidelities violate complete positivity: need f_phase^2 <= f_up*f_down, "
            << "got f_phase^2 = " << f_phase * f_phase << " > " << f_up * f_down;
        throw std::invalid_argument(msg.str());
    }
    // K1 flips down->up with probability 1-f_down, K2 flips up->down with
    // probability 1-f_up. K0/K3 are diagonal; the mixing angle distributes the
    // remaining diagonal weight so the rho01 multiplier is exactly f_phase:
    //   factor = sqrt(f_down f_up) cos(alpha+beta), alpha = beta.
    const double ratio = std::min(1.0, f_phase / std::sqrt(f_up * f_down));
    const double half_angle = 0.5 * std::acos(ratio);
    const double ca = std::cos(half_angle), sa = std::sin(half_angle);
    qops::Matrix k0(2, 2), k1(2, 2), k2(2, 2), k3(2, 2);
    k0 << std::sqrt(f_down) * ca, 0, 0, std::sqrt(f_up) * ca;
    k3 << std::sqrt(f_down) * sa, 0, 0, -std::sqrt(f_up) * sa;
    k1 << 0, 0, std::sqrt(1.0 - f_down), 0;  // |up><down|
    k2 << 0, std::sqrt(1.0 - f_up), 0, 0;    // |down><up|
    return qops::KrausChannel::from_ops({k0, k1, k2, k3});
}

}  // namespace

qops::KrausChannel shuttle_cycle_channel(const ShuttleFidelities& f) {
    return cycle_channel_from(f.f_up, f.f_down, f.f_phase);
}

qops::KrausChannel shuttle_transfer_channel(const ShuttleFidelities& f) {
    return cycle_channel_from(std::sqrt(f.f_up), std::sqrt(f.f_down), std::sqrt(f.f_phase));
}

double shuttle_population_closed_form(const ShuttleFidelities& f, double p_up_0, int n) {
    const double eps_d = 1.0 - f.f_down;  // down -> up per cycle
    const double eps_u = 1.0 - f.f_up;    // up -> down per cycle
    const double lambda = 1.0 - eps_d - eps_u;
    if (eps_d + eps_u == 0.0) return p_up_0;
    const double steady = eps_d / (eps_d + eps_u);
    return steady + (p_up_0 - steady) * std::pow(lambda, n);
}

double readout_flip(double p_ideal, double eps_up, double eps_down) {
    if (p_ideal < 0.0 || p_ideal > 1.0) throw std::invalid_argument("p_ideal outside [0,1]");
    if (eps_up < 0.0 || eps_up >= 1.0 || eps_down < 0.0 || eps_down >= 1.0)
        throw std::invalid_argument("readout flip probabilities outside [0,1)");
    return p_ideal * (1.0 - eps_up) + (1.0 - p_ideal) * eps_down;
}

}  // namespace qshuttle::noise
