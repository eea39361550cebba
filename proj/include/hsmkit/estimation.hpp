#ifndef HSMKIT_ESTIMATION_HPP
#define HSMKIT_ESTIMATION_HPP

/* Shared maximum-likelihood machinery: the G^2 statistic, BIC, a bounded
   particle-swarm minimizer with deterministic restarts and a Nelder-Mead
   polish, and chi-square distribution functions. */

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace hsmkit {

struct OptimizerConfig {
    int swarm_size = 40;
    int iterations = 2000;
    double inertia = 0.729;
    double cognitive = 1.494;
    double social = 1.494;
    int restarts = 10;
    std::uint64_t seed = 0;
    bool polish = true;
    double polish_tolerance = 1e-10;

    void validate() const {
        if (swarm_size < 2) throw ValidationError("OptimizerConfig: swarm_size must be >= 2");
        if (iterations < 1) throw ValidationError("OptimizerConfig: iterations must be >= 1");
        if (restarts < 1) throw ValidationError("OptimizerConfig: restarts must be >= 1");
        if (!(inertia >= 0.0) || inertia >= 1.0)
            throw ValidationError("OptimizerConfig: inertia must lie in [0, 1)");
        if (!(cognitive >= 0.0) || !(social >= 0.0))
            throw ValidationError("OptimizerConfig: acceleration weights must be >= 0");
        if (!(polish_tolerance > 0.0))
            throw ValidationError("OptimizerConfig: polish_tolerance must be > 0");
    }
};

struct FitResult {
    std::vector<double> params;
    double g2 = 0.0;
    double bic = 0.0;
    int n_params = 0;
    long long n_obs = 0;
    long long evaluations = 0;
    std::vector<double> per_restart_g2;
};

/* G^2 = -2 * sum counts * ln(p).  Zero counts contribute nothing;
   predicted cells are floored at 1e-12 so boundary estimates stay finite. */
inline double g_squared_cells(const std::vector<double>& predicted,
                              const std::vector<double>& observed_counts) {
    if (predicted.size() != observed_counts.size())
        throw ValidationError("g_squared: predicted/observed size mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        double n = observed_counts[i];
        if (n <= 0.0) continue;
        double p = predicted[i] < 1e-12 ? 1e-12 : predicted[i];
        total += n * std::log(p);
    }
    return -2.0 * total;
}

inline double g_squared(const std::vector<std::vector<double>>& predicted,
                        const std::vector<std::vector<double>>& observed_counts) {
    if (predicted.size() != observed_counts.size())
        throw ValidationError("g_squared: table count mismatch");
    double total = 0.0;
    for (std::size_t t = 0; t < predicted.size(); ++t)
        total += g_squared_cells(predicted[t], observed_counts[t]);
    return total;
}

inline double bic(double g2, int n_params, long long n_obs) {
    if (n_obs < 1) throw ValidationError("bic: n_obs must be >= 1");
    return g2 + n_params * std::log(static_cast<double>(n_obs));
}

namespace detail {

// Regularized lower incomplete gamma P(a,x): series for x < a+1,
// Lentz continued fraction for the complement otherwise.
inline double gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - gln);
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b; if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c; if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    double q = std::exp(-x + a * std::log(x) - gln) * h;
    return 1.0 - q;
}

}

inline double chi2_cdf(double x, int df) {
    if (df < 1) throw ValidationError("chi2_cdf: df must be positive");
    if (x < 0.0) throw ValidationError("chi2_cdf: x must be nonnegative");
    return detail::gamma_p(0.5 * df, 0.5 * x);
}

// Closed form for even df = 2m: 1 - exp(-x/2) * sum_{k<m} (x/2)^k / k!
// Kept separate as a cross-check on the incomplete-gamma path.
inline double chi2_cdf_even_closed_form(double x, int df) {
    if (df < 2 || df % 2 != 0)
        throw ValidationError("chi2_cdf_even_closed_form: df must be a positive even integer");
    if (x < 0.0) throw ValidationError("chi2_cdf_even_closed_form: x must be nonnegative");
    double half = 0.5 * x, term = 1.0, sum = 1.0;
    for (int k = 1; k < df / 2; ++k) {
        term *= half / k;
        sum += term;
    }
    return 1.0 - std::exp(-half) * sum;
}

inline double chi2_pvalue(double x, int df) { return 1.0 - chi2_cdf(x, df); }

using Objective = std::function<double(const std::vector<double>&)>;

struct MinimizeResult {
    std::vector<double> params;
    double value = std::numeric_limits<double>::infinity();
    long long evaluations = 0;
    std::vector<double> per_restart_values;
};

namespace detail {

inline void clamp_to_box(std::vector<double>& x,
                         const std::vector<double>& lo, const std::vector<double>& hi) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < lo[i]) x[i] = lo[i];
        if (x[i] > hi[i]) x[i] = hi[i];
    }
}

// Standard Nelder-Mead with box clamping; returns best vertex.
inline std::pair<std::vector<double>, double>
nelder_mead(const Objective& f, std::vector<double> x0,
            const std::vector<double>& lo, const std::vector<double>& hi,
            double tol, long long& evals, int max_iter) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> simplex;
    std::vector<double> fx;
    simplex.push_back(x0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> xi = x0;
        double step = 0.05 * (hi[i] - lo[i]);
        if (step == 0.0) step = 1e-4;
        xi[i] += (xi[i] + step <= hi[i]) ? step : -step;
        clamp_to_box(xi, lo, hi);
        simplex.push_back(xi);
    }
    for (auto& v : simplex) { fx.push_back(f(v)); ++evals; }

    auto order = [&]() {
        for (std::size_t i = 1; i < simplex.size(); ++i) {
            auto vx = simplex[i]; double vf = fx[i];
            std::size_t j = i;
            while (j > 0 && fx[j - 1] > vf) {
                simplex[j] = simplex[j - 1]; fx[j] = fx[j - 1]; --j;
            }
            simplex[j] = vx; fx[j] = vf;
        }
    };
    order();

    for (int iter = 0; iter < max_iter; ++iter) {
        if (std::fabs(fx.back() - fx.front()) <= tol) break;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k + 1 < simplex.size(); ++k) centroid[i] += simplex[k][i];
            centroid[i] /= static_cast<double>(n);
        }
        auto make_point = [&](double coef) {
            std::vector<double> p(n);
            for (std::size_t i = 0; i < n; ++i)
                p[i] = centroid[i] + coef * (centroid[i] - simplex.back()[i]);
            clamp_to_box(p, lo, hi);
            return p;
        };

        auto xr = make_point(1.0);
        double fr = f(xr); ++evals;
        if (fr < fx.front()) {
            auto xe = make_point(2.0);
            double fe = f(xe); ++evals;
            if (fe < fr) { simplex.back() = xe; fx.back() = fe; }
            else { simplex.back() = xr; fx.back() = fr; }
        } else if (fr < fx[fx.size() - 2]) {
            simplex.back() = xr; fx.back() = fr;
        } else {
            bool outside = fr < fx.back();
            auto xc = make_point(outside ? 0.5 : -0.5);
            double fc = f(xc); ++evals;
            if (fc < (outside ? fr : fx.back())) {
                simplex.back() = xc; fx.back() = fc;
            } else {
                for (std::size_t k = 1; k < simplex.size(); ++k) {
                    for (std::size_t i = 0; i < n; ++i)
                        simplex[k][i] = simplex[0][i] + 0.5 * (simplex[k][i] - simplex[0][i]);
                    fx[k] = f(simplex[k]); ++evals;
                }
            }
        }
        order();
    }
    return {simplex.front(), fx.front()};
}

}

/* Bounded global minimization: `restarts` independent particle swarms,
   restart r drawing from Rng::substream(config.seed, r), followed by an
   optional Nelder-Mead polish of the overall best.  The objective may
   return +infinity as a penalty; a run where every evaluation is
   infinite raises OptimizationError. */
inline MinimizeResult minimize(const Objective& objective,
                               const std::vector<double>& lower,
                               const std::vector<double>& upper,
                               const OptimizerConfig& config) {
    config.validate();
    if (lower.size() != upper.size() || lower.empty())
        throw ValidationError("minimize: bad bounds");
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (!(lower[i] < upper[i]) || !std::isfinite(lower[i]) || !std::isfinite(upper[i]))
            throw ValidationError("minimize: bounds must be finite with lower < upper");

    const std::size_t dim = lower.size();
    const double inf = std::numeric_limits<double>::infinity();
    MinimizeResult result;
    std::size_t best_restart = 0;

    for (int r = 0; r < config.restarts; ++r) {
        Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(r));

        std::vector<std::vector<double>> pos(config.swarm_size, std::vector<double>(dim));
        std::vector<std::vector<double>> vel(config.swarm_size, std::vector<double>(dim));
        std::vector<std::vector<double>> pbest(config.swarm_size, std::vector<double>(dim));
        std::vector<double> pbest_val(config.swarm_size, inf);
        std::vector<double> gbest;
        double gbest_val = inf;

        for (int p = 0; p < config.swarm_size; ++p) {
            for (std::size_t i = 0; i < dim; ++i) {
                pos[p][i] = rng.uniform(lower[i], upper[i]);
                double span = upper[i] - lower[i];
                vel[p][i] = rng.uniform(-span, span) * 0.1;
            }
            double v = objective(pos[p]); ++result.evaluations;
            pbest[p] = pos[p]; pbest_val[p] = v;
            if (v < gbest_val) { gbest_val = v; gbest = pos[p]; }
        }

        for (int it = 0; it < config.iterations && !gbest.empty(); ++it) {
            for (int p = 0; p < config.swarm_size; ++p) {
                for (std::size_t i = 0; i < dim; ++i) {
                    double r1 = rng.next_double(), r2 = rng.next_double();
                    vel[p][i] = config.inertia * vel[p][i]
                              + config.cognitive * r1 * (pbest[p][i] - pos[p][i])
                              + config.social * r2 * (gbest[i] - pos[p][i]);
                    double span = upper[i] - lower[i];
                    if (vel[p][i] > span) vel[p][i] = span;
                    if (vel[p][i] < -span) vel[p][i] = -span;
                    pos[p][i] += vel[p][i];
                    if (pos[p][i] < lower[i]) { pos[p][i] = lower[i]; vel[p][i] = 0.0; }
                    if (pos[p][i] > upper[i]) { pos[p][i] = upper[i]; vel[p][i] = 0.0; }
                }
                double v = objective(pos[p]); ++result.evaluations;
                if (v < pbest_val[p]) { pbest_val[p] = v; pbest[p] = pos[p]; }
                if (v < gbest_val) { gbest_val = v; gbest = pos[p]; }
            }
        }

        result.per_restart_values.push_back(gbest_val);
        if (gbest_val < result.value) {
            result.value = gbest_val;
            result.params = gbest;
            best_restart = static_cast<std::size_t>(r);
        }
    }

    if (config.polish && std::isfinite(result.value)) {
        // Repeated polish rounds on the overall best: restart the simplex
        // at the incumbent until a round no longer improves past tolerance.
        std::vector<double> x = result.params;
        double fv = result.value;
        for (int round = 0; round < 30; ++round) {
            auto [px, pfv] = detail::nelder_mead(objective, x, lower, upper,
                                                 config.polish_tolerance,
                                                 result.evaluations,
                                                 400 * static_cast<int>(dim));
            if (pfv < fv - config.polish_tolerance) { x = px; fv = pfv; }
            else { if (pfv < fv) { x = px; fv = pfv; } break; }
        }
        if (fv < result.value) {
            result.value = fv;
            result.params = x;
            result.per_restart_values[best_restart] = fv;
        }
    }

    if (!std::isfinite(result.value))
        throw OptimizationError("minimize: objective was infinite at every sampled point");
    return result;
}

}

#endif
