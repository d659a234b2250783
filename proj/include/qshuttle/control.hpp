#pragma once

#include <array>
#include <optional>
#include <variant>
#include <vector>

#include "qshuttle/device.hpp"
#include "qshuttle/noise.hpp"
#include "qshuttle/qops.hpp"

namespace qshuttle::control {

// ---------------------------------------------------------------------------
// Resonant pulses (rotating frame)
// ---------------------------------------------------------------------------

struct PulseSpec {
    double delta_f = 0.0;  // drive minus resonance, Hz
    double f_rabi = 0.0;   // Hz
    double phi = 0.0;      // drive phase, rad
    double duration = 0.0; // s
    int steps = 1;         // product-formula step count N

    void validate() const;
};

/// Rotating-frame Hamiltonian in frequency units (the h/2 prefactor is kept
/// symbolic): H = (1/2) [[df, fR e^{i phi}], [fR e^{-i phi}, -df]].
qops::Matrix rotating_hamiltonian(double delta_f, double f_rabi, double phi);

/// Product of N identical step propagators exp(-i 2 pi H dt), dt = duration/N.
qops::Operator evolve_pulse(const PulseSpec& p);

/// Closed-form propagator of the same Hamiltonian over the full duration
/// (equal to evolve_pulse up to rounding; used in hot loops).
qops::Matrix pulse_propagator(double delta_f, double f_rabi, double phi, double duration);

/// Half-pulse time t_hp = 1/(4 fR): duration of a pi/2 rotation.
double half_pi_time(double f_rabi);

/// Rz(theta) = diag(e^{-i theta/2}, e^{i theta/2}).
qops::Matrix z_rotation(double theta);
/// Free evolution at detuning df for time t (rotating frame).
qops::Matrix free_phase(double delta_f, double t);

// ---------------------------------------------------------------------------
// Primitive gate alphabet {I, +-X/2, +-Y/2, X, Y}
// ---------------------------------------------------------------------------

enum class Primitive : uint8_t { I, Xp2, Xm2, Yp2, Ym2, X, Y };

const char* primitive_name(Primitive p);
/// Ideal 2x2 unitary of the primitive.
const qops::Matrix& primitive_unitary(Primitive p);
/// Nominal drive phase of the primitive (axis selection).
double primitive_phase(Primitive p);
/// Rotation angle (0 for I).
double primitive_angle(Primitive p);
/// Nominal duration at the given Rabi frequency (t_hp for I and pi/2, 2 t_hp for pi).
double primitive_duration(Primitive p, double f_rabi);

/// Ideal rotation by `angle` about the equatorial axis selected by drive
/// phase `phi`: exp(-i angle/2 (cos(phi) sx - sin(phi) sy)).
qops::Matrix axis_rotation(double phi, double angle);

// ---------------------------------------------------------------------------
// Virtual-Z phase frames
// ---------------------------------------------------------------------------

/// Per-qubit software phase added to subsequent pulse phases; zero gate time.
struct PhaseFrame {
    std::array<double, 2> phase = {0.0, 0.0};
};

PhaseFrame virtual_z(PhaseFrame frame, int qubit, double phase);

// ---------------------------------------------------------------------------
// Exchange (ZZ) evolution and the DCZ / CZ composites
// ---------------------------------------------------------------------------

struct ExchangeSpec {
    double j = 0.0;             // Hz
    double t_evol = 0.0;        // s
    double phi_uncond_l = 0.0;  // unconditional phase per half-evolution, rad
    double phi_uncond_m = 0.0;

    void validate() const;
};

/// Diagonal unitary over the full t_evol generated by (J/4) sz sz plus local
/// Z terms accruing phi_uncond per half-evolution. Conditional phase
/// magnitude is exactly 2 pi J t_evol.
qops::Operator exchange_evolve(const ExchangeSpec& spec);

/// phi_dd + phi_uu - phi_du - phi_ud of a diagonal unitary, principal value.
double conditional_phase(const qops::Matrix& diag_unitary);

enum class PiAxis { x, y };

/// Ideal DCZ composite: half-evolution, simultaneous pi on both qubits,
/// half-evolution, then the net unconditional-phase kick Rz(phi_uncond) per
/// qubit. Optional static detunings act as free Z evolution during the
/// halves (refocused by the echo). See cz_from_dcz for the CZ construction.
qops::Operator dcz_unitary(const ExchangeSpec& spec, PiAxis axis,
                           double static_df_l = 0.0, double static_df_m = 0.0);

/// Virtual-Z angles that, applied after undoing the pi layer, reduce the DCZ
/// composite to CZ = diag(1,1,1,-1) up to global phase.
struct CzCompensation {
    double vz_l = 0.0;
    double vz_m = 0.0;
};
CzCompensation cz_compensation(const ExchangeSpec& spec, PiAxis axis);

/// CZ built from the DCZ composite, a second pi layer and virtual-Z
/// corrections; equals diag(1,1,1,-1) up to global phase when
/// 2 pi J t_evol = pi.
qops::Operator cz_from_dcz(const ExchangeSpec& spec, PiAxis axis = PiAxis::y);

/// Runs the noiseless Ramsey-style probe circuits (probe qubit in
/// superposition, DCZ with the control prepared down then up, final pi/2
/// phase sweep) against the configured spec and returns each qubit's
/// unconditional phase as half the sum of the two fitted fringe offsets,
/// referenced to the same probe with zero unconditional phases.
std::array<double, 2> calibrate_unconditional_phases(const ExchangeSpec& spec,
                                                     double probe_resolution);

/// Fringe offset of one probe (probe qubit, control preparation down/up).
/// Exposed for the calibration experiments.
double dcz_probe_phase(const ExchangeSpec& spec, PiAxis axis, int probe_qubit, bool control_up,
                       double probe_resolution);

// ---------------------------------------------------------------------------
// Shuttling
// ---------------------------------------------------------------------------

enum class ShuttleDirection { to_coupled, to_sparse };

struct ShuttleSpec {
    ShuttleDirection direction = ShuttleDirection::to_coupled;
    double phase_shift = 0.0;  // deterministic coherent phase per transfer, rad
};

// ---------------------------------------------------------------------------
// Executable gate alphabet
// ---------------------------------------------------------------------------

struct PulseOp {
    int qubit = 0;
    Primitive prim = Primitive::I;
};
struct VirtualZOp {
    int qubit = 0;
    double phase = 0.0;
};
struct ExchangeOp {
    double t = 0.0;  // at the current operation state's J
};
struct ShuttleOp {
    ShuttleDirection direction = ShuttleDirection::to_coupled;
};
struct IdleOp {
    double t = 0.0;
};
using GateOp = std::variant<PulseOp, VirtualZOp, ExchangeOp, ShuttleOp, IdleOp>;

// ---------------------------------------------------------------------------
// Sequence executor
// ---------------------------------------------------------------------------

struct ExecOptions {
    bool pulse_level = true;      // pulses feel the shot's quasi-static detuning
    bool ideal_dcz_pi = true;     // pi layer inside the CZ composite is ideal
    bool zero_duration = false;   // all gates ideal and instantaneous
    int pulse_steps = 1;          // product-formula steps during execution
};

/// One simulation run: owns the mutable (state, phase frame, operation-state
/// flag) triple plus the clock and the shot's quasi-static draws. Not thread
/// safe; make one per worker.
class SequenceContext {
  public:
    SequenceContext(const device::DeviceConfig& cfg, int n_qubits, ExecOptions opts = {});

    /// Reset to |down...down>, zero frames, sparse state; resample the
    /// quasi-static detunings from the stream.
    void begin_shot(RngStream& rng);
    void reset();
    void set_quasistatic(double df_l, double df_m);

    void apply(const GateOp& op);
    void pulse(int qubit, Primitive prim);
    void virtual_z(int qubit, double phase);
    void exchange(double t);
    void shuttle(ShuttleDirection dir);
    void idle(double t);
    /// The full calibrated CZ composite (shuttle in, DCZ, shuttle out,
    /// pi-layer undo, virtual-Z corrections).
    void cz();
    /// Multiply the state's coherences on `qubit` by `factor` (one-shot
    /// phenomenological envelopes).
    void dephase_qubit(int qubit, double factor);
    void apply_channel_1q(int qubit, const qops::KrausChannel& chan);

    qops::QuantumState state() const;  // validated snapshot
    std::vector<double> measure_probabilities() const;  // includes readout flips
    double elapsed() const { return elapsed_; }
    device::OperationState operation_state() const { return op_state_; }
    const PhaseFrame& frame() const { return frame_; }
    const std::array<double, 2>& quasistatic() const { return quasistatic_; }
    bool is_pure() const { return pure_; }

  private:
    void apply_unitary(const qops::Matrix& u);
    void apply_1q_unitary(int qubit, const qops::Matrix& u2);
    void apply_diag(const qops::Vector& d);
    void promote();
    void accrue_idle_phases(double t);

    const device::DeviceConfig& cfg_;
    ExecOptions opts_;
    int n_qubits_;
    int dim_;
    CzCompensation cz_comp_;
    std::vector<qops::Matrix> transfer_kraus_;  // expanded for this dim

    bool pure_ = true;
    qops::Vector psi_;
    qops::Matrix rho_;
    qops::Matrix tmp_;
    PhaseFrame frame_;
    device::OperationState op_state_ = device::OperationState::sparse;
    double elapsed_ = 0.0;
    std::array<double, 2> quasistatic_ = {0.0, 0.0};
};

}  // namespace qshuttle::control
