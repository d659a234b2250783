#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qshuttle/rng.hpp"

namespace qshuttle::analysis {

enum class Model {
    rb_exp,        // A * p^x
    gaussian,      // A exp(-(x/T)^2) cos(2 pi f x + phase) + c
    stretched_exp, // A exp(-(x/T)^n) + c
    rabi,          // A exp(-x/T) W(x, f) cos(2 pi f x + phase) + c
    cosine_phase,  // A cos(x - phase) + c
};

const char* model_name(Model m);
Model model_from_name(const std::string& name);

struct DecayFit {
    Model model;
    std::map<std::string, double> params;
    std::map<std::string, double> stderrs;
    double residual_norm = 0.0;
    bool converged = false;
};

struct FitOptions {
    int max_iterations = 200;
    double step_tolerance = 1e-10;
    // Fixed T2* entering the Rabi envelope W (not fitted).
    double rabi_t2_star = 0.0;
    // "literal": W = (1 + (x/(f T^2))^2)^(-1/4); "physical": same with
    // f -> pi f, which is what a Gaussian quasi-static detuning average
    // produces. Both registered so the form is switchable without code edits.
    std::string rabi_w_form = "literal";
    // Offset fixed to this value instead of fitted (rb_exp, stretched_exp).
    std::optional<double> fix_offset;
};

/// Damped Gauss-Newton least squares with per-model initialization
/// heuristics. Never throws on non-convergence; check `converged`.
DecayFit fit(Model model, std::span<const double> xs, std::span<const double> ys,
             std::span<const double> weights = {}, const FitOptions& options = {});

double eval_model(const DecayFit& f, double x, const FitOptions& options = {});

/// Pointwise P_target - P_anti, clamped to [-1, 1].
std::vector<double> sequence_fidelity(std::span<const double> p_target,
                                      std::span<const double> p_anti);

/// (1 + p)/2 for one qubit, (1 + 3p)/4 for two.
double clifford_fidelity(double p, int n_qubits);
/// F_p = 1 - (1 - F_C)/1.875.
double primitive_fidelity(double f_clifford_1q);
/// F_gate = (1 + 3 p_int/p_ref)/4; ratio > 1 flagged, value still returned.
double interleaved_fidelity(double p_ref, double p_interleaved, bool* ratio_above_one = nullptr);

struct PhaseFit {
    double phase = 0.0;      // phi0 with amplitude normalized >= 0
    double amplitude = 0.0;
    double offset = 0.0;
    double phase_stderr = 0.0;
};

/// Fit A cos(phi - phi0) + c by linear least squares in (a, b, c).
/// Requires >= 8 points spanning >= 2 pi; amplitude < 0.05 is an error.
PhaseFit extract_phase(std::span<const double> phases, std::span<const double> up_probs);

struct BootstrapResult {
    std::map<std::string, double> stderrs;
    int n_resamples = 0;
    int n_skipped = 0;
    std::vector<double> samples;  // fitted p per resample (rb_exp)
};

/// Resamples sequences with replacement, refits the decay, and reports the
/// standard deviation of each fitted parameter over the resamples.
/// per_sequence_ys[i][k] is sequence i's fidelity at xs[k].
BootstrapResult bootstrap_errors(Model model, std::span<const double> xs,
                                 const std::vector<std::vector<double>>& per_sequence_ys,
                                 int n_resamples, RngStream& rng,
                                 const FitOptions& options = {});

double mean(std::span<const double> v);
double stddev(std::span<const double> v);

}  // namespace qshuttle::analysis
