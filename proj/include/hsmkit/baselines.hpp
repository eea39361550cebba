#ifndef HSMKIT_BASELINES_HPP
#define HSMKIT_BASELINES_HPP

/* Classical comparison models: the saturated model, the p-way joint
   probability model (one latent joint per condition, reproducing every
   table by marginalization), and the specific PSA Bayes net with
   exogenous (I,B) blocks per condition and shared P|I,B and L|I,B
   conditionals. */

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"
#include "estimation.hpp"
#include "tables.hpp"

namespace hsmkit {

struct SaturatedModel {
    // key -> relative-frequency table, key as ContextTable::key()
    std::map<std::string, std::vector<double>> tables;
};

inline std::size_t saturated_param_count(const TableCollection& data) {
    std::size_t n = 0;
    for (const auto& t : data.tables) n += t.counts.size() - 1;
    return n;
}

inline std::pair<SaturatedModel, double> saturated_fit(const TableCollection& data) {
    data.validate();
    if (data.tables.empty()) throw ValidationError("saturated_fit: empty collection");
    SaturatedModel model;
    double g2 = 0.0;
    for (const auto& t : data.tables) {
        if (t.total() < 1.0)
            throw ValidationError("saturated_fit: table " + t.key() + " has total count < 1");
        std::vector<double> freq = t.relative_frequencies();
        g2 += g_squared_cells(freq, t.counts);
        model.tables[t.key()] = std::move(freq);
    }
    return {model, g2};
}

struct JointModel {
    std::vector<VariableSpec> variables;
    std::vector<double> probabilities;  // flat, first variable slowest

    std::size_t cells() const {
        std::size_t n = 1;
        for (const auto& v : variables) n *= v.cardinality();
        return n;
    }

    void validate() const {
        if (probabilities.size() != cells())
            throw ValidationError("JointModel: probability vector length mismatch");
        double s = 0.0;
        for (double p : probabilities) {
            if (p < 0.0) throw ValidationError("JointModel: negative probability");
            s += p;
        }
        if (std::fabs(s - 1.0) > 1e-10)
            throw ValidationError("JointModel: probabilities do not sum to 1");
    }
};

namespace detail {

// For each cell of the requested context, the flat indices of the latent
// joint cells that marginalize into it.
inline std::vector<std::vector<std::size_t>>
marginal_masks(const std::vector<VariableSpec>& variables,
               const std::vector<std::string>& context) {
    std::vector<std::size_t> var_index;
    for (const auto& name : context) {
        bool found = false;
        for (std::size_t i = 0; i < variables.size(); ++i)
            if (variables[i].name == name) { var_index.push_back(i); found = true; break; }
        if (!found) throw ValidationError("joint model: unknown variable '" + name + "'");
    }
    std::vector<std::size_t> card;
    std::size_t total = 1;
    for (const auto& v : variables) { card.push_back(v.cardinality()); total *= v.cardinality(); }
    std::vector<std::size_t> ctx_card;
    std::size_t cells = 1;
    for (std::size_t vi : var_index) { ctx_card.push_back(card[vi]); cells *= card[vi]; }

    std::vector<std::vector<std::size_t>> masks(cells);
    for (std::size_t flat = 0; flat < total; ++flat) {
        // decode full combo, first variable slowest
        std::size_t rem = flat;
        std::vector<std::size_t> combo(variables.size());
        for (std::size_t i = variables.size(); i-- > 0;) {
            combo[i] = rem % card[i];
            rem /= card[i];
        }
        std::size_t cell = 0;
        for (std::size_t k = 0; k < var_index.size(); ++k)
            cell = cell * ctx_card[k] + combo[var_index[k]];
        masks[cell].push_back(flat);
    }
    return masks;
}

}

inline std::vector<double> joint_predict(const JointModel& model,
                                         const std::vector<std::string>& context) {
    model.validate();
    auto masks = detail::marginal_masks(model.variables, context);
    std::vector<double> out(masks.size(), 0.0);
    for (std::size_t c = 0; c < masks.size(); ++c)
        for (std::size_t flat : masks[c]) out[c] += model.probabilities[flat];
    return out;
}

namespace detail {

inline std::vector<double> softmax_block(const std::vector<double>& params,
                                         std::size_t offset, std::size_t cells) {
    // first logit pinned to 0, remaining cells-1 are free
    std::vector<double> z(cells, 0.0);
    double zmax = 0.0;
    for (std::size_t i = 1; i < cells; ++i) {
        z[i] = params[offset + i - 1];
        if (z[i] > zmax) zmax = z[i];
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < cells; ++i) { z[i] = std::exp(z[i] - zmax); sum += z[i]; }
    for (std::size_t i = 0; i < cells; ++i) z[i] /= sum;
    return z;
}

}

/* ML fit of one latent joint distribution per condition; the parameter
   vector concatenates, per condition, the (cells-1) free softmax logits. */
inline FitResult joint_fit(const TableCollection& data, const OptimizerConfig& config) {
    data.validate();
    if (data.tables.empty()) throw ValidationError("joint_fit: empty collection");

    std::size_t cells = 1;
    for (const auto& v : data.variables) cells *= v.cardinality();
    const std::size_t per_condition = cells - 1;
    const std::size_t n_conditions = data.conditions.size();

    std::map<std::string, std::size_t> cond_index;
    for (std::size_t i = 0; i < n_conditions; ++i) cond_index[data.conditions[i]] = i;

    struct TableBinding {
        std::size_t condition;
        const ContextTable* table;
        std::vector<std::vector<std::size_t>> masks;
    };
    std::vector<TableBinding> bindings;
    for (const auto& t : data.tables)
        bindings.push_back({cond_index.at(t.condition), &t,
                            detail::marginal_masks(data.variables, t.context)});

    Objective objective = [&](const std::vector<double>& p) -> double {
        double total = 0.0;
        for (const auto& b : bindings) {
            std::vector<double> joint =
                detail::softmax_block(p, b.condition * per_condition, cells);
            std::vector<double> pred(b.masks.size(), 0.0);
            for (std::size_t c = 0; c < b.masks.size(); ++c)
                for (std::size_t flat : b.masks[c]) pred[c] += joint[flat];
            total += g_squared_cells(pred, b.table->counts);
        }
        return total;
    };

    std::vector<double> lower(per_condition * n_conditions, -20.0);
    std::vector<double> upper(per_condition * n_conditions, 20.0);
    MinimizeResult mr = minimize(objective, lower, upper, config);

    FitResult fit;
    fit.params = mr.params;
    fit.g2 = mr.value;
    fit.n_params = static_cast<int>(per_condition * n_conditions);
    double n_obs = 0.0;
    for (const auto& t : data.tables) n_obs += t.total();
    fit.n_obs = static_cast<long long>(std::llround(n_obs));
    fit.bic = bic(fit.g2, fit.n_params, fit.n_obs);
    fit.evaluations = mr.evaluations;
    fit.per_restart_g2 = mr.per_restart_values;
    return fit;
}

inline JointModel joint_from_fit(const TableCollection& data, const FitResult& fit,
                                 const std::string& condition) {
    std::size_t cells = 1;
    for (const auto& v : data.variables) cells *= v.cardinality();
    std::size_t ci = 0;
    while (ci < data.conditions.size() && data.conditions[ci] != condition) ++ci;
    if (ci == data.conditions.size())
        throw ValidationError("joint_from_fit: unknown condition '" + condition + "'");
    JointModel m;
    m.variables = data.variables;
    m.probabilities = detail::softmax_block(fit.params, ci * (cells - 1), cells);
    return m;
}

/* Two-layer Bayes net for the PSA design.  Exogenous block is
   the joint (I,B) distribution per condition, cells ordered with I
   slowest: (I=0,B=0), (I=0,B=1), (I=1,B=0), (I=1,B=1).  The shared
   conditionals give p(P=yes | I,B) and p(L=yes | I,B) in that same
   block order. */
struct BayesNetPSA {
    std::string p_var = "P", b_var = "B", i_var = "I", l_var = "L";
    std::vector<std::string> conditions;
    std::vector<std::array<double, 4>> exogenous;  // one block per condition
    std::array<double, 4> p_given_ib{};
    std::array<double, 4> l_given_ib{};

    void validate() const {
        if (conditions.size() != exogenous.size())
            throw ValidationError("BayesNetPSA: exogenous block count mismatch");
        for (const auto& block : exogenous) {
            double s = 0.0;
            for (double p : block) {
                if (p < 0.0 || p > 1.0)
                    throw ValidationError("BayesNetPSA: exogenous probability out of [0,1]");
                s += p;
            }
            if (std::fabs(s - 1.0) > 1e-10)
                throw ValidationError("BayesNetPSA: exogenous block does not sum to 1");
        }
        for (double p : p_given_ib)
            if (p < 0.0 || p > 1.0) throw ValidationError("BayesNetPSA: conditional out of [0,1]");
        for (double p : l_given_ib)
            if (p < 0.0 || p > 1.0) throw ValidationError("BayesNetPSA: conditional out of [0,1]");
    }

    static constexpr int free_param_count = 14;  // (4-1)*2 + 4*2

    // implied 16-cell joint over (P,B,I,L), flat index with P slowest
    std::vector<double> implied_joint(const std::string& condition) const {
        std::size_t ci = 0;
        while (ci < conditions.size() && conditions[ci] != condition) ++ci;
        if (ci == conditions.size())
            throw ValidationError("BayesNetPSA: unknown condition '" + condition + "'");
        std::vector<double> joint(16, 0.0);
        for (int p = 0; p < 2; ++p)
            for (int b = 0; b < 2; ++b)
                for (int i = 0; i < 2; ++i)
                    for (int l = 0; l < 2; ++l) {
                        int ib = i * 2 + b;
                        double pp = p == 0 ? p_given_ib[ib] : 1.0 - p_given_ib[ib];
                        double pl = l == 0 ? l_given_ib[ib] : 1.0 - l_given_ib[ib];
                        joint[((p * 2 + b) * 2 + i) * 2 + l] = exogenous[ci][ib] * pp * pl;
                    }
        return joint;
    }
};

inline std::vector<double> bayesnet_predict(const BayesNetPSA& model,
                                            const std::string& condition,
                                            const std::vector<std::string>& context) {
    model.validate();
    std::vector<VariableSpec> vars = {
        {model.p_var, {"yes", "no"}}, {model.b_var, {"yes", "no"}},
        {model.i_var, {"yes", "no"}}, {model.l_var, {"yes", "no"}}};
    JointModel joint{vars, model.implied_joint(condition)};
    return joint_predict(joint, context);
}

namespace detail {
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}

inline BayesNetPSA bayesnet_from_params(const std::vector<std::string>& conditions,
                                        const std::vector<double>& params) {
    // layout: per condition 3 exogenous logits (softmax, first cell pinned),
    // then 4 logits for p(P=yes|I,B), then 4 for p(L=yes|I,B)
    if (params.size() != 3 * conditions.size() + 8)
        throw ValidationError("bayesnet_from_params: wrong parameter count");
    BayesNetPSA m;
    m.conditions = conditions;
    for (std::size_t c = 0; c < conditions.size(); ++c) {
        std::vector<double> block = detail::softmax_block(params, c * 3, 4);
        m.exogenous.push_back({block[0], block[1], block[2], block[3]});
    }
    std::size_t off = 3 * conditions.size();
    for (int k = 0; k < 4; ++k) m.p_given_ib[k] = detail::sigmoid(params[off + k]);
    for (int k = 0; k < 4; ++k) m.l_given_ib[k] = detail::sigmoid(params[off + 4 + k]);
    return m;
}

inline FitResult bayesnet_fit(const TableCollection& data, const OptimizerConfig& config) {
    data.validate();
    if (data.conditions.size() != 2)
        throw ValidationError("bayesnet_fit: the PSA net expects exactly two conditions");
    BayesNetPSA roles;
    for (const auto& v : data.variables) {
        if (v.name != roles.p_var && v.name != roles.b_var && v.name != roles.i_var &&
            v.name != roles.l_var)
            throw ValidationError("bayesnet_fit: variables must be exactly {P,B,I,L}");
        if (v.cardinality() != 2)
            throw ValidationError("bayesnet_fit: variables must be binary");
    }
    if (data.variables.size() != 4)
        throw ValidationError("bayesnet_fit: variables must be exactly {P,B,I,L}");

    const std::size_t n_params = 3 * data.conditions.size() + 8;
    Objective objective = [&](const std::vector<double>& p) -> double {
        BayesNetPSA m = bayesnet_from_params(data.conditions, p);
        double total = 0.0;
        for (const auto& t : data.tables)
            total += g_squared_cells(bayesnet_predict(m, t.condition, t.context), t.counts);
        return total;
    };

    std::vector<double> lower(n_params, -20.0), upper(n_params, 20.0);
    MinimizeResult mr = minimize(objective, lower, upper, config);

    FitResult fit;
    fit.params = mr.params;
    fit.g2 = mr.value;
    fit.n_params = static_cast<int>(n_params);
    double n_obs = 0.0;
    for (const auto& t : data.tables) n_obs += t.total();
    fit.n_obs = static_cast<long long>(std::llround(n_obs));
    fit.bic = bic(fit.g2, fit.n_params, fit.n_obs);
    fit.evaluations = mr.evaluations;
    fit.per_restart_g2 = mr.per_restart_values;
    return fit;
}

struct DfResult {
    int value = 0;
    bool warning = false;  // set when the model is not smaller than saturated
};

inline DfResult df_for_design(const TableCollection& data, int model_params) {
    DfResult r;
    long long sat = 0;
    for (const auto& t : data.tables) sat += static_cast<long long>(t.counts.size()) - 1;
    r.value = static_cast<int>(sat - model_params);
    r.warning = r.value <= 0;
    return r;
}

}

#endif
