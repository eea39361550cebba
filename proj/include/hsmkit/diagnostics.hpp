#ifndef HSMKIT_DIAGNOSTICS_HPP
#define HSMKIT_DIAGNOSTICS_HPP

/* Consistency diagnostics on raw table collections: the CHSH statistic,
   marginal invariance, order effects, the saturated-vs-joint likelihood
   ratio test, and the chi-square lack-of-fit histogram. */

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "baselines.hpp"
#include "errors.hpp"
#include "estimation.hpp"
#include "tables.hpp"

namespace hsmkit {

struct DetailRow {
    std::string item;
    std::map<std::string, double> values;
};

struct DiagnosticReport {
    std::string kind;     // chsh | marginal_invariance | order_effect | joint_test | lack_of_fit
    std::map<std::string, double> statistics;
    std::string verdict;  // violated | consistent | inconclusive
    std::map<std::string, std::string> labels;  // non-numeric annotations (e.g. coding)
    std::vector<DetailRow> details;
};

enum class ChshCoding { Product, Correlation };

namespace detail {

inline const ContextTable& find_pair_table(const TableCollection& data,
                                           const std::string& a, const std::string& b) {
    const ContextTable* found = nullptr;
    for (const auto& t : data.tables) {
        if (t.context.size() == 2 && t.context[0] == a && t.context[1] == b) {
            if (found) throw ValidationError("chsh: context " + a + "," + b +
                                             " appears in more than one condition");
            found = &t;
        }
    }
    if (!found) throw ValidationError("chsh: no table for context " + a + "," + b);
    if (found->counts.size() != 4)
        throw ValidationError("chsh: context " + a + "," + b + " is not a 2x2 table");
    return *found;
}

inline double pair_expectation(const ContextTable& t, ChshCoding coding) {
    std::vector<double> f = t.relative_frequencies();
    if (coding == ChshCoding::Product) return f[0];
    return f[0] + f[3] - f[1] - f[2];
}

}

/* quadruple = {{A,I},{H,I},{H,U},{A,U}} pattern: two left variables, two
   right variables, all four pairings present; the statistic is
   E(0)+E(1)+E(2)-E(3). */
inline DiagnosticReport chsh_statistic(const TableCollection& data,
                                       const std::vector<std::pair<std::string, std::string>>& quadruple,
                                       ChshCoding coding = ChshCoding::Correlation) {
    data.validate();
    if (quadruple.size() != 4) throw ValidationError("chsh: quadruple must have 4 contexts");
    const auto& q = quadruple;
    std::string a = q[0].first, h = q[1].first, i = q[0].second, u = q[2].second;
    bool pattern_ok = a != h && i != u &&
                      q[1].second == i && q[2].first == h &&
                      q[3].first == a && q[3].second == u;
    if (!pattern_ok)
        throw ValidationError("chsh: quadruple does not match the (AI,HI,HU,AU) pattern");

    DiagnosticReport r;
    r.kind = "chsh";
    r.labels["coding"] = coding == ChshCoding::Product ? "product" : "correlation";
    double stat = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        const ContextTable& t = detail::find_pair_table(data, q[k].first, q[k].second);
        double e = detail::pair_expectation(t, coding);
        stat += (k == 3) ? -e : e;
        r.details.push_back({q[k].first + q[k].second, {{"E", e}}});
    }
    double lo = coding == ChshCoding::Product ? -1.0 : -2.0;
    double hi = 2.0;
    r.statistics["chsh"] = stat;
    r.statistics["bound_lower"] = lo;
    r.statistics["bound_upper"] = hi;
    r.verdict = (stat < lo || stat > hi) ? "violated" : "consistent";
    return r;
}

/* Marginal distribution of `variable` in every context containing it,
   the maximum pairwise total-variation discrepancy, and a likelihood
   ratio test of marginal homogeneity across those contexts. */
inline DiagnosticReport marginal_invariance_report(const TableCollection& data,
                                                   const std::string& variable) {
    data.validate();
    const VariableSpec& var = data.variable(variable);
    const std::size_t m = var.cardinality();

    struct Entry {
        std::string key;
        std::vector<double> marginal_counts;
        double total;
    };
    std::vector<Entry> entries;
    for (const auto& t : data.tables) {
        std::size_t pos = t.context.size();
        for (std::size_t i = 0; i < t.context.size(); ++i)
            if (t.context[i] == variable) pos = i;
        if (pos == t.context.size()) continue;
        Entry e{t.key(), std::vector<double>(m, 0.0), t.total()};
        for (std::size_t cell = 0; cell < t.counts.size(); ++cell)
            e.marginal_counts[data.cell_values(t.context, cell)[pos]] += t.counts[cell];
        entries.push_back(std::move(e));
    }

    DiagnosticReport r;
    r.kind = "marginal_invariance";
    r.labels["variable"] = variable;
    for (const auto& e : entries) {
        DetailRow row{e.key, {}};
        for (std::size_t v = 0; v < m; ++v)
            row.values["p(" + var.values[v] + ")"] = e.marginal_counts[v] / e.total;
        r.details.push_back(std::move(row));
    }

    if (entries.size() < 2) {
        r.statistics["max_discrepancy"] = 0.0;
        r.verdict = "inconclusive";
        return r;
    }

    double max_tv = 0.0;
    for (std::size_t x = 0; x < entries.size(); ++x)
        for (std::size_t y = x + 1; y < entries.size(); ++y) {
            double tv = 0.0;
            for (std::size_t v = 0; v < m; ++v)
                tv += std::fabs(entries[x].marginal_counts[v] / entries[x].total -
                                entries[y].marginal_counts[v] / entries[y].total);
            max_tv = std::max(max_tv, 0.5 * tv);
        }

    // LR homogeneity: pooled marginal vs per-context marginals
    std::vector<double> pooled(m, 0.0);
    double pooled_total = 0.0;
    for (const auto& e : entries) {
        for (std::size_t v = 0; v < m; ++v) pooled[v] += e.marginal_counts[v];
        pooled_total += e.total;
    }
    double g2 = 0.0;
    for (const auto& e : entries)
        for (std::size_t v = 0; v < m; ++v) {
            double n = e.marginal_counts[v];
            if (n <= 0.0) continue;
            double p0 = pooled[v] / pooled_total;
            g2 += 2.0 * n * std::log((n / e.total) / (p0 < 1e-12 ? 1e-12 : p0));
        }
    int df = static_cast<int>((entries.size() - 1) * (m - 1));
    double p = chi2_pvalue(g2 < 0.0 ? 0.0 : g2, df);

    const double alpha = 0.05;
    r.statistics["max_discrepancy"] = max_tv;
    r.statistics["g2"] = g2;
    r.statistics["df"] = df;
    r.statistics["p_value"] = p;
    r.statistics["alpha"] = alpha;
    r.verdict = p < alpha ? "violated" : "consistent";
    return r;
}

/* For every pair of contexts that are order reversals of each other
   (same condition), aligned cellwise differences and a two-sample G^2
   homogeneity test. */
inline DiagnosticReport order_effect_report(const TableCollection& data) {
    data.validate();
    DiagnosticReport r;
    r.kind = "order_effect";

    double total_g2 = 0.0;
    int total_df = 0;
    for (std::size_t x = 0; x < data.tables.size(); ++x) {
        for (std::size_t y = x + 1; y < data.tables.size(); ++y) {
            const ContextTable& ab = data.tables[x];
            const ContextTable& ba = data.tables[y];
            if (ab.condition != ba.condition || ab.context.size() != 2 ||
                ba.context.size() != 2 || ab.context[0] != ba.context[1] ||
                ab.context[1] != ba.context[0])
                continue;

            std::size_t ca = data.variable(ab.context[0]).cardinality();
            std::size_t cb = data.variable(ab.context[1]).cardinality();
            // align cell (i,j) of AB with cell (j,i) of BA
            std::vector<double> n1 = ab.counts, n2(ab.counts.size());
            for (std::size_t i = 0; i < ca; ++i)
                for (std::size_t j = 0; j < cb; ++j)
                    n2[i * cb + j] = ba.counts[j * ca + i];
            double t1 = ab.total(), t2 = ba.total();

            DetailRow row{ab.key() + " vs " + ba.key(), {}};
            double g2 = 0.0;
            for (std::size_t c = 0; c < n1.size(); ++c) {
                double f1 = n1[c] / t1, f2 = n2[c] / t2;
                row.values["diff_" + data.cell_label(ab.context, c)] = f1 - f2;
                double pooled = (n1[c] + n2[c]) / (t1 + t2);
                if (pooled > 0.0) {
                    if (n1[c] > 0.0) g2 += 2.0 * n1[c] * std::log(f1 / pooled);
                    if (n2[c] > 0.0) g2 += 2.0 * n2[c] * std::log(f2 / pooled);
                }
            }
            int df = static_cast<int>(n1.size()) - 1;
            double p = chi2_pvalue(g2 < 0.0 ? 0.0 : g2, df);
            row.values["g2"] = g2;
            row.values["df"] = df;
            row.values["p_value"] = p;
            r.details.push_back(std::move(row));
            total_g2 += g2;
            total_df += df;
        }
    }

    if (r.details.empty()) {
        r.verdict = "inconclusive";
        return r;
    }
    const double alpha = 0.05;
    double p = chi2_pvalue(total_g2 < 0.0 ? 0.0 : total_g2, total_df);
    r.statistics["g2"] = total_g2;
    r.statistics["df"] = total_df;
    r.statistics["p_value"] = p;
    r.statistics["alpha"] = alpha;
    r.verdict = p < alpha ? "violated" : "consistent";
    return r;
}

/* Saturated vs p-way joint likelihood-ratio test. */
inline DiagnosticReport joint_consistency_test(const TableCollection& data,
                                               const OptimizerConfig& config) {
    data.validate();
    auto [sat_model, g2_sat] = saturated_fit(data);
    (void)sat_model;
    FitResult joint = joint_fit(data, config);
    double g2_diff = joint.g2 - g2_sat;
    DfResult df = df_for_design(data, joint.n_params);

    DiagnosticReport r;
    r.kind = "joint_test";
    r.statistics["g2_sat"] = g2_sat;
    r.statistics["g2_joint"] = joint.g2;
    r.statistics["g2_diff"] = g2_diff;
    r.statistics["df"] = df.value;
    if (df.warning) {
        r.labels["warning"] = "saturated parameters do not exceed joint parameters (df = " +
                              std::to_string(df.value) + " <= 0); test is inconclusive";
        r.verdict = "inconclusive";
        return r;
    }
    const double alpha = 0.05;
    double p = chi2_pvalue(g2_diff < 0.0 ? 0.0 : g2_diff, df.value);
    r.statistics["p_value"] = p;
    r.statistics["alpha"] = alpha;
    r.verdict = p < alpha ? "violated" : "consistent";
    return r;
}

/* Observed G^2 differences binned by `cutoffs` against the chi-square
   null; expected bin masses are renormalized to the cutoff range.
   Values outside [first, last] are counted into the edge bins. */
inline DiagnosticReport lack_of_fit_histogram(const std::vector<double>& g2diffs,
                                              const std::vector<double>& cutoffs, int df) {
    if (g2diffs.empty()) throw ValidationError("lack_of_fit_histogram: no statistics supplied");
    if (cutoffs.size() < 3)
        throw ValidationError("lack_of_fit_histogram: need at least 2 bins");
    for (std::size_t i = 1; i < cutoffs.size(); ++i)
        if (!(cutoffs[i - 1] < cutoffs[i]))
            throw ValidationError("lack_of_fit_histogram: cutoffs must ascend");
    for (double g : g2diffs)
        if (g < 0.0) throw ValidationError("lack_of_fit_histogram: negative G^2 difference");

    const std::size_t bins = cutoffs.size() - 1;
    const double n = static_cast<double>(g2diffs.size());

    std::vector<double> observed(bins, 0.0);
    for (double g : g2diffs) {
        std::size_t b = 0;
        while (b + 1 < bins && g >= cutoffs[b + 1]) ++b;
        observed[b] += 1.0;
    }

    double range_lo = chi2_cdf(cutoffs.front() < 0.0 ? 0.0 : cutoffs.front(), df);
    double range_hi = chi2_cdf(cutoffs.back(), df);
    double range = range_hi - range_lo;
    if (range <= 0.0) throw ValidationError("lack_of_fit_histogram: degenerate cutoff range");

    std::vector<double> expected(bins);
    for (std::size_t b = 0; b < bins; ++b)
        expected[b] = n * (chi2_cdf(cutoffs[b + 1], df) - chi2_cdf(cutoffs[b], df)) / range;

    double pearson = 0.0;
    for (std::size_t b = 0; b < bins; ++b)
        pearson += (observed[b] - expected[b]) * (observed[b] - expected[b]) / expected[b];
    int test_df = static_cast<int>(bins) - 1;
    double p = chi2_pvalue(pearson, test_df);

    DiagnosticReport r;
    r.kind = "lack_of_fit";
    for (std::size_t b = 0; b < bins; ++b)
        r.details.push_back({"bin[" + std::to_string(b) + "]",
                             {{"lower", cutoffs[b]},
                              {"upper", cutoffs[b + 1]},
                              {"observed", observed[b]},
                              {"expected", expected[b]}}});
    const double alpha = 0.05;
    r.statistics["pearson"] = pearson;
    r.statistics["df"] = test_df;
    r.statistics["null_df"] = df;
    r.statistics["p_value"] = p;
    r.statistics["alpha"] = alpha;
    r.verdict = p < alpha ? "violated" : "consistent";
    return r;
}

}

#endif
