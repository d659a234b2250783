#pragma once

#include <array>

#include "qshuttle/qops.hpp"
#include "qshuttle/rng.hpp"

namespace qshuttle::noise {

/// Per-cycle shuttle preservation fidelities (one cycle = one back-and-forth
/// transfer of the moving qubit).
struct ShuttleFidelities {
    double f_up = 1.0;     // spin-up polarization, per cycle
    double f_down = 1.0;   // spin-down polarization, per cycle
    double f_phase = 1.0;  // coherence amplitude, per cycle
};

struct ReadoutFlip {
    double eps_up = 0.0;    // P(report down | up)
    double eps_down = 0.0;  // P(report up | down)
};

enum class QuasistaticResample { per_shot, per_sequence };

/// Noise parameters for both qubits, index 0 = Q_L, 1 = Q_M.
struct NoiseModel {
    std::array<double, 2> t2_star = {3e-6, 4e-6};
    std::array<double, 2> t2_echo = {18e-6, 28e-6};
    std::array<double, 2> echo_exponent = {1.1, 1.3};
    std::array<double, 2> t2_rabi = {40e-6, 40e-6};
    std::array<double, 2> t2_dcz = {7e-6, 7e-6};
    ShuttleFidelities shuttle;
    std::array<ReadoutFlip, 2> readout;

    bool quasistatic_enabled = true;
    bool dcz_dephasing_enabled = true;
    bool echo_decay_enabled = true;
    bool shuttle_noise_enabled = true;
    bool readout_error_enabled = true;
    QuasistaticResample resample = QuasistaticResample::per_shot;

    void validate() const;  // throws on out-of-range parameters
    NoiseModel disabled() const;
};

/// Width of the quasi-static frequency distribution reproducing the
/// exp(-(t/T2*)^2) Ramsey envelope: sigma_f = sqrt(2)/(2 pi T2*).
double sigma_from_t2star(double t2_star);

/// One frequency offset per qubit, held fixed for a sequence execution.
std::array<double, 2> sample_quasistatic(const NoiseModel& model, RngStream& rng);

/// Pure dephasing for time t: off-diagonals multiplied by exp(-t/t2).
qops::KrausChannel dephasing_channel(double t, double t2);
/// Pure dephasing with an explicit off-diagonal multiplier in [0,1].
qops::KrausChannel dephasing_channel_factor(double factor);

/// rho -> p rho + (1-p) I/dim.
qops::KrausChannel depolarizing_channel(double p, int dim);

/// Single-qubit channel for one full shuttling cycle: asymmetric relaxation
/// with flip probabilities (1-f_down), (1-f_up) plus pure dephasing tuned so
/// the per-cycle coherence multiplier is exactly f_phase. Complete positivity
/// requires f_phase^2 <= f_up * f_down.
qops::KrausChannel shuttle_cycle_channel(const ShuttleFidelities& f);
/// Channel for a single transfer (half cycle): square-root parameters.
qops::KrausChannel shuttle_transfer_channel(const ShuttleFidelities& f);

/// Exact n-cycle populations of the shuttle channel (Markov chain closed
/// form): returns P(measure up) after n cycles given P(up) = p_up_0 at n=0.
double shuttle_population_closed_form(const ShuttleFidelities& f, double p_up_0, int n);

/// Reported spin-up probability after readout errors.
double readout_flip(double p_ideal, double eps_up, double eps_down);

}  // namespace qshuttle::noise
