#ifndef HSMKIT_TABLES_HPP
#define HSMKIT_TABLES_HPP

/* Observed data: a collection of contingency tables, one per measurement
   context (an ordered list of variables), optionally split by condition.
   Cell order is lexicographic with the FIRST-measured variable slowest
   and value index 0 = first listed label, so a binary pair with labels
   [yes,no] orders its cells YY, YN, NY, NN.

   Counts are stored as nonnegative reals rather than integers: the
   shipped artificial fixture carries model-exact fractional counts, and
   every statistic here is well defined for real weights. */

#include <cctype>
#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"

namespace hsmkit {

struct VariableSpec {
    std::string name;
    std::vector<std::string> values;  // first label = index 0

    std::size_t cardinality() const { return values.size(); }
};

struct ContextTable {
    std::string condition;
    std::vector<std::string> context;  // measurement order
    std::vector<double> counts;        // flat, first-measured slowest

    double total() const {
        double t = 0.0;
        for (double c : counts) t += c;
        return t;
    }

    std::vector<double> relative_frequencies() const {
        double t = total();
        if (t <= 0.0) throw ValidationError("ContextTable: empty table has no frequencies");
        std::vector<double> f = counts;
        for (double& x : f) x /= t;
        return f;
    }

    std::string key() const {
        std::string k = condition + "/";
        for (std::size_t i = 0; i < context.size(); ++i) {
            if (i) k += ",";
            k += context[i];
        }
        return k;
    }
};

struct TableCollection {
    std::vector<VariableSpec> variables;
    std::vector<std::string> conditions{"default"};
    std::vector<ContextTable> tables;

    const VariableSpec& variable(const std::string& name) const {
        for (const auto& v : variables)
            if (v.name == name) return v;
        throw ValidationError("unknown variable '" + name + "'");
    }

    bool has_condition(const std::string& name) const {
        for (const auto& c : conditions)
            if (c == name) return true;
        return false;
    }

    std::size_t cells_in_context(const std::vector<std::string>& context) const {
        std::size_t n = 1;
        for (const auto& name : context) n *= variable(name).cardinality();
        return n;
    }

    // Value indices of each context variable for a flat cell index,
    // first-measured slowest.
    std::vector<std::size_t> cell_values(const std::vector<std::string>& context,
                                         std::size_t cell) const {
        std::vector<std::size_t> card;
        for (const auto& name : context) card.push_back(variable(name).cardinality());
        std::vector<std::size_t> out(context.size());
        for (std::size_t i = context.size(); i-- > 0;) {
            out[i] = cell % card[i];
            cell /= card[i];
        }
        return out;
    }

    std::string cell_label(const std::vector<std::string>& context, std::size_t cell) const {
        auto vals = cell_values(context, cell);
        std::string label;
        for (std::size_t i = 0; i < context.size(); ++i) {
            const std::string& v = variable(context[i]).values[vals[i]];
            label += static_cast<char>(std::toupper(static_cast<unsigned char>(v[0])));
        }
        return label;
    }

    void validate() const {
        if (variables.empty()) throw ValidationError("TableCollection: no variables");
        if (conditions.empty()) throw ValidationError("TableCollection: no conditions");
        for (const auto& v : variables)
            if (v.values.size() < 2)
                throw ValidationError("variable '" + v.name + "' needs at least 2 values");
        for (std::size_t i = 0; i < variables.size(); ++i)
            for (std::size_t j = i + 1; j < variables.size(); ++j)
                if (variables[i].name == variables[j].name)
                    throw ValidationError("duplicate variable name '" + variables[i].name + "'");
        for (std::size_t t = 0; t < tables.size(); ++t) {
            const auto& tab = tables[t];
            if (!has_condition(tab.condition))
                throw ValidationError("table " + std::to_string(t) + " uses unknown condition '" +
                                      tab.condition + "'");
            if (tab.context.empty())
                throw ValidationError("table " + std::to_string(t) + " has an empty context");
            std::size_t expect = cells_in_context(tab.context);
            if (tab.counts.size() != expect)
                throw ValidationError("table " + std::to_string(t) + " (context " + tab.key() +
                                      "): expected " + std::to_string(expect) + " cells, got " +
                                      std::to_string(tab.counts.size()));
            for (double c : tab.counts)
                if (c < 0.0)
                    throw ValidationError("table " + std::to_string(t) + " has a negative count");
        }
    }
};

}

#endif
