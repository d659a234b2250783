#include "qshuttle/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qshuttle::analysis {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct ParamInfo {
    const char* name;
    double lo;
    double hi;
};

// Parameter order and box bounds per model.
std::vector<ParamInfo> param_table(Model m, const FitOptions& opt) {
    const bool fit_offset = !opt.fix_offset.has_value();
    switch (m) {
        case Model::rb_exp:
            return {{"A", -10.0, 10.0}, {"p", 1e-9, 1.0}};
        case Model::gaussian: {
            std::vector<ParamInfo> t = {{"A", -10.0, 10.0},
                                        {"T", 1e-300, 1e300},
                                        {"f", 0.0, 1e300},
                                        {"phase", -1e4, 1e4}};
            if (fit_offset) t.push_back({"c", -10.0, 10.0});
            return t;
        }
        case Model::stretched_exp: {
            std::vector<ParamInfo> t = {{"A", -10.0, 10.0}, {"T", 1e-300, 1e300}, {"n", 0.5, 3.0}};
            if (fit_offset) t.push_back({"c", -10.0, 10.0});
            return t;
        }
        case Model::rabi: {
            std::vector<ParamInfo> t = {{"A", -10.0, 10.0},
                                        {"T", 1e-300, 1e300},
                                        {"f", 0.0, 1e300},
                                        {"phase", -1e4, 1e4}};
            if (fit_offset) t.push_back({"c", -10.0, 10.0});
            return t;
        }
        case Model::cosine_phase:
            return {{"A", 0.0, 10.0}, {"phase", -1e4, 1e4}, {"c", -10.0, 10.0}};
    }
    throw std::logic_error("unknown model");
}

double rabi_envelope(double x, double f, double t2_star, const std::string& form) {
    if (t2_star <= 0.0) return 1.0;
    double denom = f * t2_star * t2_star;
    if (form == "physical") denom *= kPi;
    if (denom == 0.0) return 1.0;
    const double u = x / denom;
    return std::pow(1.0 + u * u, -0.25);
}

double eval(Model m, const double* th, double x, const FitOptions& opt) {
    const double c = opt.fix_offset.value_or(0.0);
    switch (m) {
        case Model::rb_exp:
            return th[0] * std::pow(th[1], x) + c;
        case Model::gaussian: {
            const double off = opt.fix_offset ? c : th[4];
            const double arg = x / th[1];
            return th[0] * std::exp(-arg * arg) * std::cos(kTwoPi * th[2] * x + th[3]) + off;
        }
        case Model::stretched_exp: {
            const double off = opt.fix_offset ? c : th[3];
            return th[0] * std::exp(-std::pow(x / th[1], th[2])) + off;
        }
        case Model::rabi: {
            const double off = opt.fix_offset ? c : th[4];
            return th[0] * std::exp(-x / th[1]) * rabi_envelope(x, th[2], opt.rabi_t2_star, opt.rabi_w_form) *
                       std::cos(kTwoPi * th[2] * x + th[3]) +
                   off;
        }
        case Model::cosine_phase:
            return th[0] * std::cos(x - th[1]) + th[2];
    }
    throw std::logic_error("unknown model");
}

// Coarse least-squares periodogram for the oscillation-frequency seed.
double dominant_frequency(std::span<const double> xs, std::span<const double> ys) {
    const size_t n = xs.size();
    const double span = xs.back() - xs.front();
    double min_dx = span;
    for (size_t i = 1; i < n; ++i) min_dx = std::min(min_dx, xs[i] - xs[i - 1]);
    const double f_lo = 0.25 / span;
    const double f_hi = 0.5 / std::max(min_dx, 1e-300);
    const double y0 = mean(ys);
    double best_f = f_lo, best_power = -1.0;
    const int n_grid = 400;
    for (int k = 0; k <= n_grid; ++k) {
        const double f = f_lo * std::pow(f_hi / f_lo, static_cast<double>(k) / n_grid);
        double cc = 0, ss = 0, cs = 0, yc = 0, ysn = 0;
        for (size_t i = 0; i < n; ++i) {
            const double c = std::cos(kTwoPi * f * xs[i]);
            const double s = std::sin(kTwoPi * f * xs[i]);
            const double y = ys[i] - y0;
            cc += c * c;
            ss += s * s;
            cs += c * s;
            yc += y * c;
            ysn += y * s;
        }
        const double det = cc * ss - cs * cs;
        if (std::abs(det) < 1e-12) continue;
        const double a = (yc * ss - ysn * cs) / det;
        const double b = (ysn * cc - yc * cs) / det;
        const double power = a * yc + b * ysn;
        if (power > best_power) {
            best_power = power;
            best_f = f;
        }
    }
    return best_f;
}

std::vector<double> initial_guess(Model m, std::span<const double> xs, std::span<const double> ys,
                                  const FitOptions& opt) {
    const size_t n = xs.size();
    const double base = opt.fix_offset.value_or(0.0);
    switch (m) {
        case Model::rb_exp: {
            // Log-linear regression on the clearly-positive points.
            double ymax = 0.0;
            for (double y : ys) ymax = std::max(ymax, std::abs(y - base));
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            int k = 0;
            for (size_t i = 0; i < n; ++i) {
                const double y = ys[i] - base;
                if (y > 0.02 * ymax && y > 1e-12) {
                    const double ly = std::log(y);
                    sx += xs[i];
                    sy += ly;
                    sxx += xs[i] * xs[i];
                    sxy += xs[i] * ly;
                    ++k;
                }
            }
            double p0 = 0.9, a0 = ys.empty() ? 1.0 : ys[0] - base;
            if (k >= 2) {
                const double det = k * sxx - sx * sx;
                if (std::abs(det) > 1e-12) {
                    const double slope = (k * sxy - sx * sy) / det;
                    const double icept = (sy * sxx - sx * sxy) / det;
                    p0 = std::clamp(std::exp(slope), 1e-6, 0.999999999);
                    a0 = std::exp(icept);
                }
            }
            return {a0, p0};
        }
        case Model::gaussian:
        case Model::rabi: {
            double ymin = ys[0], ymax = ys[0];
            for (double y : ys) {
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
            const double c0 = opt.fix_offset ? base : mean(ys);
            const double a0 = 0.5 * (ymax - ymin);
            const double f0 = dominant_frequency(xs, ys);
            const double t0 = m == Model::gaussian ? 0.5 * (xs.back() - xs.front())
                                                   : (xs.back() - xs.front());
            // Phase seed by linear LS at the seeded frequency.
            double cc = 0, ss = 0, cs = 0, yc = 0, ysn = 0;
            for (size_t i = 0; i < n; ++i) {
                const double c = std::cos(kTwoPi * f0 * xs[i]);
                const double s = std::sin(kTwoPi * f0 * xs[i]);
                const double y = ys[i] - (opt.fix_offset ? base : mean(ys));
                cc += c * c;
                ss += s * s;
                cs += c * s;
                yc += y * c;
                ysn += y * s;
            }
            double ph0 = 0.0;
            const double det = cc * ss - cs * cs;
            if (std::abs(det) > 1e-12) {
                const double a = (yc * ss - ysn * cs) / det;
                const double b = (ysn * cc - yc * cs) / det;
                ph0 = std::atan2(-b, a);
            }
            std::vector<double> th = {std::max(a0, 1e-6), t0, f0, ph0};
            if (!opt.fix_offset) th.push_back(c0);
            return th;
        }
        case Model::stretched_exp: {
            const double c0 = opt.fix_offset ? base : ys[n - 1];
            const double a0 = ys[0] - c0;
            double t0 = xs[n - 1] > 0 ? 0.5 * xs[n - 1] : 1.0;
            const double target = c0 + a0 / std::numbers::e;
            for (size_t i = 1; i < n; ++i) {
                const bool crossed = (a0 > 0) ? (ys[i] <= target) : (ys[i] >= target);
                if (crossed && xs[i] > 0) {
                    t0 = xs[i];
                    break;
                }
            }
            std::vector<double> th = {a0 == 0.0 ? 1.0 : a0, t0, 1.0};
            if (!opt.fix_offset) th.push_back(c0);
            return th;
        }
        case Model::cosine_phase: {
            const PhaseFit pf = extract_phase(xs, ys);
            return {pf.amplitude, pf.phase, pf.offset};
        }
    }
    throw std::logic_error("unknown model");
}

}  // namespace

const char* model_name(Model m) {
    switch (m) {
        case Model::rb_exp: return "rb_exp";
        case Model::gaussian: return "gaussian";
        case Model::stretched_exp: return "stretched_exp";
        case Model::rabi: return "rabi";
        case Model::cosine_phase: return "cosine_phase";
    }
    return "?";
}

Model model_from_name(const std::string& name) {
    for (Model m : {Model::rb_exp, Model::gaussian, Model::stretched_exp, Model::rabi,
                    Model::cosine_phase})
        if (name == model_name(m)) return m;
    throw std::invalid_argument("unknown fit model: " + name);
}

double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double stddev(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

DecayFit fit(Model model, std::span<const double> xs, std::span<const double> ys,
             std::span<const double> weights, const FitOptions& options) {
    const auto info = param_table(model, options);
    const size_t n_params = info.size();
    if (xs.size() != ys.size()) throw std::invalid_argument("fit: xs/ys size mismatch");
    if (xs.size() < n_params + 1)
        throw std::invalid_argument("fit: need at least (param count + 1) points");
    for (size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) throw std::invalid_argument("fit: xs must be strictly increasing");
    if (!weights.empty() && weights.size() != xs.size())
        throw std::invalid_argument("fit: weight size mismatch");
    if (model == Model::rabi && options.rabi_t2_star <= 0.0)
        throw std::invalid_argument("fit: rabi model needs rabi_t2_star > 0");

    const size_t n = xs.size();
    std::vector<double> theta = initial_guess(model, xs, ys, options);
    for (size_t j = 0; j < n_params; ++j) theta[j] = std::clamp(theta[j], info[j].lo, info[j].hi);

    auto weight = [&](size_t i) { return weights.empty() ? 1.0 : weights[i]; };
    auto chi2_of = [&](const std::vector<double>& th) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double r = weight(i) * (eval(model, th.data(), xs[i], options) - ys[i]);
            s += r * r;
        }
        return s;
    };

    Eigen::MatrixXd jac(n, n_params);
    Eigen::VectorXd resid(n);
    double chi2 = chi2_of(theta);
    double lambda = 1e-3;
    bool converged = false;

    for (int iter = 0; iter < options.max_iterations && !converged; ++iter) {
        for (size_t i = 0; i < n; ++i)
            resid(i) = weight(i) * (eval(model, theta.data(), xs[i], options) - ys[i]);
        for (size_t j = 0; j < n_params; ++j) {
            const double h = std::max(1e-7 * std::abs(theta[j]), 1e-12);
            std::vector<double> tp = theta, tm = theta;
            tp[j] = std::min(theta[j] + h, info[j].hi);
            tm[j] = std::max(theta[j] - h, info[j].lo);
            const double dh = tp[j] - tm[j];
            for (size_t i = 0; i < n; ++i) {
                const double fp = eval(model, tp.data(), xs[i], options);
                const double fm = eval(model, tm.data(), xs[i], options);
                jac(i, j) = dh > 0 ? weight(i) * (fp - fm) / dh : 0.0;
            }
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd g = jac.transpose() * resid;

        // Relative gradient convergence test.
        double rel_grad = 0.0;
        for (size_t j = 0; j < n_params; ++j)
            rel_grad = std::max(rel_grad,
                                std::abs(g(j)) * std::max(std::abs(theta[j]), 1.0) /
                                    std::max(chi2, 1e-300));
        if (rel_grad < 1e-9) {
            converged = true;
            break;
        }

        bool stepped = false;
        for (int attempt = 0; attempt < 12 && !stepped; ++attempt) {
            Eigen::MatrixXd damped = jtj;
            for (size_t j = 0; j < n_params; ++j)
                damped(j, j) += lambda * std::max(jtj(j, j), 1e-12);
            const Eigen::VectorXd delta = damped.ldlt().solve(-g);
            std::vector<double> trial = theta;
            double rel_step = 0.0;
            for (size_t j = 0; j < n_params; ++j) {
                trial[j] = std::clamp(theta[j] + delta(j), info[j].lo, info[j].hi);
                rel_step = std::max(rel_step, std::abs(trial[j] - theta[j]) /
                                                  std::max(std::abs(theta[j]), 1.0));
            }
            const double trial_chi2 = chi2_of(trial);
            if (trial_chi2 <= chi2 * (1.0 + 1e-14)) {
                theta = trial;
                const bool tiny = rel_step < options.step_tolerance;
                chi2 = trial_chi2;
                lambda = std::max(lambda / 3.0, 1e-12);
                stepped = true;
                if (tiny) converged = true;
            } else {
                lambda *= 10.0;
            }
        }
        if (!stepped) break;  // damping exhausted; report best-so-far
    }

    DecayFit out;
    out.model = model;
    out.converged = converged;
    out.residual_norm = std::sqrt(chi2);

    // Asymptotic parameter errors from the Jacobian at the solution.
    for (size_t i = 0; i < n; ++i)
        resid(i) = weight(i) * (eval(model, theta.data(), xs[i], options) - ys[i]);
    for (size_t j = 0; j < n_params; ++j) {
        const double h = std::max(1e-7 * std::abs(theta[j]), 1e-12);
        std::vector<double> tp = theta, tm = theta;
        tp[j] = std::min(theta[j] + h, info[j].hi);
        tm[j] = std::max(theta[j] - h, info[j].lo);
        const double dh = tp[j] - tm[j];
        for (size_t i = 0; i < n; ++i)
            jac(i, j) = dh > 0
                            ? weight(i) * (eval(model, tp.data(), xs[i], options) -
                                           eval(model, tm.data(), xs[i], options)) / dh
                            : 0.0;
    }
    Eigen::MatrixXd jtj = jac.transpose() * jac;
    for (size_t j = 0; j < n_params; ++j) jtj(j, j) += 1e-300;
    const Eigen::MatrixXd cov = jtj.inverse();
    const double dof = std::max<double>(1.0, static_cast<double>(n) - static_cast<double>(n_params));
    const double s2 = chi2 / dof;
    for (size_t j = 0; j < n_params; ++j) {
        out.params[info[j].name] = theta[j];
        const double v = cov(j, j) * s2;
        out.stderrs[info[j].name] = v > 0 ? std::sqrt(v) : 0.0;
    }
    if (options.fix_offset) out.params["c"] = *options.fix_offset;
    return out;
}

double eval_model(const DecayFit& f, double x, const FitOptions& options) {
    const auto info = param_table(f.model, options);
    std::vector<double> th;
    th.reserve(info.size());
    for (const auto& p : info) th.push_back(f.params.at(p.name));
    return eval(f.model, th.data(), x, options);
}

std::vector<double> sequence_fidelity(std::span<const double> p_target,
                                      std::span<const double> p_anti) {
    if (p_target.size() != p_anti.size())
        throw std::invalid_argument("sequence_fidelity: length mismatch");
    std::vector<double> out(p_target.size());
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = std::clamp(p_target[i] - p_anti[i], -1.0, 1.0);
    return out;
}

double clifford_fidelity(double p, int n_qubits) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("clifford_fidelity: p outside [0,1]");
    if (n_qubits == 1) return (1.0 + p) / 2.0;
    if (n_qubits == 2) return (1.0 + 3.0 * p) / 4.0;
    throw std::invalid_argument("clifford_fidelity: n_qubits must be 1 or 2");
}

double primitive_fidelity(double f_clifford_1q) {
    if (f_clifford_1q < 0.0 || f_clifford_1q > 1.0)
        throw std::invalid_argument("primitive_fidelity: F outside [0,1]");
    return 1.0 - (1.0 - f_clifford_1q) / 1.875;
}

double interleaved_fidelity(double p_ref, double p_interleaved, bool* ratio_above_one) {
    if (!(p_ref > 0.0)) throw std::invalid_argument("interleaved_fidelity: p_ref must be > 0");
    const double ratio = p_interleaved / p_ref;
    if (ratio_above_one) *ratio_above_one = ratio > 1.0;
    return (1.0 + 3.0 * ratio) / 4.0;
}

PhaseFit extract_phase(std::span<const double> phases, std::span<const double> up_probs) {
    if (phases.size() != up_probs.size())
        throw std::invalid_argument("extract_phase: size mismatch");
    if (phases.size() < 8) throw std::invalid_argument("extract_phase: need >= 8 phase points");
    const auto [mn, mx] = std::minmax_element(phases.begin(), phases.end());
    if (*mx - *mn < kTwoPi - 1e-6)
        throw std::invalid_argument("extract_phase: phases must span >= 2 pi");

    // y = a cos(phi) + b sin(phi) + c, solved exactly.
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    const size_t n = phases.size();
    for (size_t i = 0; i < n; ++i) {
        const Eigen::Vector3d row(std::cos(phases[i]), std::sin(phases[i]), 1.0);
        m += row * row.transpose();
        rhs += row * up_probs[i];
    }
    const Eigen::Vector3d sol = m.ldlt().solve(rhs);
    const double a = sol(0), b = sol(1), c = sol(2);
    const double amp = std::hypot(a, b);
    if (amp < 0.05)
        throw std::runtime_error("extract_phase: oscillation amplitude " + std::to_string(amp) +
                                 " is below 0.05; phase unreliable");
    double chi2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double r = a * std::cos(phases[i]) + b * std::sin(phases[i]) + c - up_probs[i];
        chi2 += r * r;
    }
    const Eigen::Matrix3d cov = m.inverse() * (chi2 / std::max<double>(1.0, n - 3.0));
    // var(phi0) by propagating (a,b) -> atan2(b,a).
    const double inv_amp2 = 1.0 / (amp * amp);
    const double var_phi = inv_amp2 * inv_amp2 *
                           (b * b * cov(0, 0) + a * a * cov(1, 1) - 2.0 * a * b * cov(0, 1));
    PhaseFit out;
    out.phase = std::atan2(b, a);
    out.amplitude = amp;
    out.offset = c;
    out.phase_stderr = var_phi > 0 ? std::sqrt(var_phi) : 0.0;
    return out;
}

BootstrapResult bootstrap_errors(Model model, std::span<const double> xs,
                                 const std::vector<std::vector<double>>& per_sequence_ys,
                                 int n_resamples, RngStream& rng, const FitOptions& options) {
    if (per_sequence_ys.empty()) throw std::invalid_argument("bootstrap: no sequences");
    const size_t n_seq = per_sequence_ys.size();
    const size_t n_x = xs.size();
    for (const auto& row : per_sequence_ys)
        if (row.size() != n_x) throw std::invalid_argument("bootstrap: ragged sequence data");

    BootstrapResult out;
    std::map<std::string, std::vector<double>> collected;
    std::vector<double> curve(n_x);
    std::vector<size_t> pick(n_seq);
    for (int r = 0; r < n_resamples; ++r) {
        bool all_same = true;
        for (size_t i = 0; i < n_seq; ++i) {
            pick[i] = static_cast<size_t>(rng.uniform_below(n_seq));
            if (pick[i] != pick[0]) all_same = false;
        }
        if (all_same && n_seq > 1) {
            ++out.n_skipped;
            continue;
        }
        std::fill(curve.begin(), curve.end(), 0.0);
        for (size_t i = 0; i < n_seq; ++i)
            for (size_t k = 0; k < n_x; ++k) curve[k] += per_sequence_ys[pick[i]][k];
        for (double& v : curve) v /= static_cast<double>(n_seq);
        DecayFit f;
        try {
            f = fit(model, xs, curve, {}, options);
        } catch (const std::exception&) {
            ++out.n_skipped;
            continue;
        }
        if (!f.converged) {
            ++out.n_skipped;
            continue;
        }
        for (const auto& [k, v] : f.params) collected[k].push_back(v);
        if (f.params.count("p")) out.samples.push_back(f.params.at("p"));
        ++out.n_resamples;
    }
    for (const auto& [k, v] : collected) out.stderrs[k] = stddev(v);
    return out;
}

}  // namespace qshuttle::analysis
