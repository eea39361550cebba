#ifndef HSMKIT_MODEL_HPP
#define HSMKIT_MODEL_HPP

/* Declarative HSM model specification and everything derived from it:
   parameter packing/unpacking, projector construction, predicted tables,
   alone-probabilities, transition matrices, simulation, and the ML fit.

   Parameter vector layout:
     for each condition, in order:
       N-1 hyperspherical magnitude angles in [0, pi/2]
       N-1 phases in [0, 2pi]            (complex state field only)
     then rotation blocks, in slot order and variable order within a slot:
       RotatedPlanar: one theta in [-1/2, 1/2]; the rotation angle is pi*theta
       RotatedFull (slot dim d): d-1 diagonal entries (last pinned to 0),
         then one (magnitude, phase) pair per upper off-diagonal, row-major;
         diagonals/magnitudes in [-2pi, 2pi], phases in [0, 2pi]
     when shared_rotations is false the rotation blocks repeat per condition
     (condition-major) instead of appearing once. */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "estimation.hpp"
#include "linalg.hpp"
#include "quantum.hpp"
#include "rng.hpp"
#include "tables.hpp"

namespace hsmkit {

struct SlotSpec {
    std::string reference_variable;
    std::size_t multiplicity = 1;
};

struct FrameSpec {
    enum class Kind { Reference, RotatedFull, RotatedPlanar };
    Kind kind = Kind::Reference;
};

struct VariableAssignment {
    std::size_t slot = 0;
    FrameSpec frame;
};

struct ModelSpec {
    enum class StateField { Real, Complex };

    std::vector<VariableSpec> variables;
    std::vector<SlotSpec> slots;
    std::vector<std::pair<std::string, VariableAssignment>> assignment;
    std::vector<std::string> conditions{"default"};
    bool shared_rotations = true;
    StateField state_field = StateField::Complex;

    const VariableSpec& variable(const std::string& name) const {
        for (const auto& v : variables)
            if (v.name == name) return v;
        throw ValidationError("ModelSpec: unknown variable '" + name + "'");
    }

    const VariableAssignment& assignment_of(const std::string& name) const {
        for (const auto& [n, a] : assignment)
            if (n == name) return a;
        throw ValidationError("ModelSpec: variable '" + name + "' has no slot assignment");
    }

    std::size_t slot_dim(std::size_t s) const {
        const SlotSpec& slot = slots.at(s);
        return variable(slot.reference_variable).cardinality() * slot.multiplicity;
    }

    std::vector<std::size_t> slot_dims() const {
        std::vector<std::size_t> d;
        for (std::size_t s = 0; s < slots.size(); ++s) d.push_back(slot_dim(s));
        return d;
    }

    std::size_t dimension() const {
        std::size_t n = 1;
        for (std::size_t s = 0; s < slots.size(); ++s) n *= slot_dim(s);
        return n;
    }

    bool has_condition(const std::string& c) const {
        for (const auto& x : conditions)
            if (x == c) return true;
        return false;
    }

    // Rotated variables in layout order: slot-major, then variable order.
    std::vector<std::string> rotated_variables() const {
        std::vector<std::string> out;
        for (std::size_t s = 0; s < slots.size(); ++s)
            for (const auto& [name, a] : assignment)
                if (a.slot == s && a.frame.kind != FrameSpec::Kind::Reference)
                    out.push_back(name);
        return out;
    }

    std::size_t rotation_param_count(const std::string& name) const {
        const VariableAssignment& a = assignment_of(name);
        std::size_t d = slot_dim(a.slot);
        if (a.frame.kind == FrameSpec::Kind::RotatedPlanar) return 1;
        if (a.frame.kind == FrameSpec::Kind::RotatedFull) return d * d - 1;
        return 0;
    }

    std::size_t state_param_count() const {
        std::size_t n = dimension();
        return state_field == StateField::Complex ? 2 * (n - 1) : n - 1;
    }

    void validate() const {
        if (variables.empty()) throw ValidationError("ModelSpec: no variables");
        if (slots.empty()) throw ValidationError("ModelSpec: no slots");
        if (conditions.empty()) throw ValidationError("ModelSpec: no conditions");
        for (const auto& v : variables) {
            if (v.values.size() < 2)
                throw ValidationError("ModelSpec: variable '" + v.name + "' needs >= 2 values");
            assignment_of(v.name);
        }
        if (assignment.size() != variables.size())
            throw ValidationError("ModelSpec: assignment does not cover variables exactly once");
        for (std::size_t s = 0; s < slots.size(); ++s) {
            const SlotSpec& slot = slots[s];
            const VariableAssignment& ref = assignment_of(slot.reference_variable);
            if (ref.slot != s || ref.frame.kind != FrameSpec::Kind::Reference)
                throw ValidationError("ModelSpec: slot " + std::to_string(s) +
                                      " reference variable must be assigned to it as Reference");
            for (const auto& [name, a] : assignment) {
                if (a.slot != s) continue;
                if (a.frame.kind == FrameSpec::Kind::Reference && name != slot.reference_variable)
                    throw ValidationError("ModelSpec: slot " + std::to_string(s) +
                                          " has a second Reference variable '" + name + "'");
                if (variable(name).cardinality() * slot.multiplicity != slot_dim(s))
                    throw ValidationError("ModelSpec: variable '" + name +
                                          "' does not fill slot " + std::to_string(s));
                if (a.frame.kind == FrameSpec::Kind::RotatedPlanar && slot_dim(s) != 2)
                    throw ValidationError("ModelSpec: planar rotation needs slot dimension 2");
            }
        }
    }
};

inline std::size_t param_count(const ModelSpec& spec) {
    std::size_t rot = 0;
    for (const auto& name : spec.rotated_variables())
        rot += spec.rotation_param_count(name);
    if (!spec.shared_rotations) rot *= spec.conditions.size();
    return spec.conditions.size() * spec.state_param_count() + rot;
}

inline void parameter_bounds(const ModelSpec& spec,
                             std::vector<double>& lower, std::vector<double>& upper) {
    const double pi = std::numbers::pi;
    lower.clear();
    upper.clear();
    std::size_t n = spec.dimension();
    for (std::size_t c = 0; c < spec.conditions.size(); ++c) {
        for (std::size_t i = 0; i + 1 < n; ++i) { lower.push_back(0.0); upper.push_back(pi / 2); }
        if (spec.state_field == ModelSpec::StateField::Complex)
            for (std::size_t i = 0; i + 1 < n; ++i) { lower.push_back(0.0); upper.push_back(2 * pi); }
    }
    auto push_rotation = [&](const std::string& name) {
        const VariableAssignment& a = spec.assignment_of(name);
        std::size_t d = spec.slot_dim(a.slot);
        if (a.frame.kind == FrameSpec::Kind::RotatedPlanar) {
            lower.push_back(-0.5); upper.push_back(0.5);
            return;
        }
        for (std::size_t i = 0; i + 1 < d; ++i) { lower.push_back(-2 * pi); upper.push_back(2 * pi); }
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) {
                lower.push_back(-2 * pi); upper.push_back(2 * pi);  // magnitude
                lower.push_back(0.0);     upper.push_back(2 * pi);  // phase
            }
    };
    std::size_t repeats = spec.shared_rotations ? 1 : spec.conditions.size();
    for (std::size_t r = 0; r < repeats; ++r)
        for (const auto& name : spec.rotated_variables()) push_rotation(name);
}

namespace detail {

inline std::size_t condition_index(const ModelSpec& spec, const std::string& condition) {
    for (std::size_t i = 0; i < spec.conditions.size(); ++i)
        if (spec.conditions[i] == condition) return i;
    throw ValidationError("ModelSpec: unknown condition '" + condition + "'");
}

// offset of the rotation block for `name` in the flat parameter vector
inline std::size_t rotation_offset(const ModelSpec& spec, const std::string& name,
                                   std::size_t condition_idx) {
    std::size_t off = spec.conditions.size() * spec.state_param_count();
    std::size_t per_condition = 0;
    for (const auto& v : spec.rotated_variables()) per_condition += spec.rotation_param_count(v);
    if (!spec.shared_rotations) off += condition_idx * per_condition;
    for (const auto& v : spec.rotated_variables()) {
        if (v == name) return off;
        off += spec.rotation_param_count(v);
    }
    throw ValidationError("rotation_offset: '" + name + "' is not a rotated variable");
}

}

inline StateVector unpack_state(const ModelSpec& spec, const std::vector<double>& params,
                                const std::string& condition) {
    if (params.size() != param_count(spec))
        throw ValidationError("unpack_state: parameter vector length mismatch");
    std::size_t n = spec.dimension();
    std::size_t c = detail::condition_index(spec, condition);
    std::size_t base = c * spec.state_param_count();

    std::vector<double> mags(n, 1.0);
    double running = 1.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        double a = params[base + k];
        mags[k] = running * std::cos(a);
        running *= std::sin(a);
    }
    mags[n - 1] = running;

    std::vector<Complex> coords(n);
    if (spec.state_field == ModelSpec::StateField::Complex) {
        std::size_t pbase = base + (n - 1);
        coords[0] = Complex(mags[0], 0.0);  // first phase pinned to 0
        for (std::size_t k = 1; k < n; ++k)
            coords[k] = std::polar(mags[k], params[pbase + k - 1]);
    } else {
        for (std::size_t k = 0; k < n; ++k) coords[k] = Complex(mags[k], 0.0);
    }
    return StateVector(ComplexMatrix::column(std::move(coords)));
}

/* Inverse of unpack_state for states with nonnegative magnitudes:
   recovers the magnitude angles (and phases relative to coordinate 0).
   Used by round-trip tests and by model files that give a state rather
   than raw angles. */
inline std::vector<double> pack_state(const ModelSpec& spec, const StateVector& psi) {
    std::size_t n = spec.dimension();
    if (psi.dim() != n) throw ValidationError("pack_state: state dimension mismatch");
    std::vector<double> mags(n), phases(n);
    for (std::size_t k = 0; k < n; ++k) {
        mags[k] = std::abs(psi.coords()(k, 0));
        phases[k] = std::arg(psi.coords()(k, 0));
    }
    std::vector<double> out;
    double running = 1.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        double ratio = running > 1e-300 ? mags[k] / running : 0.0;
        if (ratio > 1.0) ratio = 1.0;
        if (ratio < -1.0) ratio = -1.0;
        double a = std::acos(ratio);
        out.push_back(a);
        running *= std::sin(a);
    }
    if (spec.state_field == ModelSpec::StateField::Complex) {
        const double two_pi = 2.0 * std::numbers::pi;
        for (std::size_t k = 1; k < n; ++k) {
            double ph = phases[k] - phases[0];
            while (ph < 0.0) ph += two_pi;
            while (ph >= two_pi) ph -= two_pi;
            out.push_back(ph);
        }
    }
    return out;
}

inline ComplexMatrix planar_rotation(double theta) {
    const double a = std::numbers::pi * theta;
    ComplexMatrix u(2, 2);
    u(0, 0) = std::cos(a);  u(0, 1) = -std::sin(a);
    u(1, 0) = std::sin(a);  u(1, 1) = std::cos(a);
    return u;
}

inline ComplexMatrix hermitian_from_params(const std::vector<double>& params,
                                           std::size_t offset, std::size_t d) {
    ComplexMatrix h(d, d);
    std::size_t k = offset;
    for (std::size_t i = 0; i + 1 < d; ++i) h(i, i) = params[k++];
    h(d - 1, d - 1) = 0.0;  // last diagonal entry pinned
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            double mag = params[k++];   // may be negative; polar() would reject it
            double phase = params[k++];
            h(i, j) = Complex(mag * std::cos(phase), mag * std::sin(phase));
            h(j, i) = std::conj(h(i, j));
        }
    return h;
}

inline ComplexMatrix rotation_unitary(const ModelSpec& spec, const std::vector<double>& params,
                                      const std::string& name, const std::string& condition) {
    const VariableAssignment& a = spec.assignment_of(name);
    std::size_t c = detail::condition_index(spec, condition);
    std::size_t off = detail::rotation_offset(spec, name, c);
    std::size_t d = spec.slot_dim(a.slot);
    if (a.frame.kind == FrameSpec::Kind::RotatedPlanar)
        return planar_rotation(params[off]);
    if (a.frame.kind == FrameSpec::Kind::RotatedFull)
        return unitary_from_hermitian(hermitian_from_params(params, off, d));
    throw ValidationError("rotation_unitary: '" + name + "' is a reference variable");
}

/* Projector for (variable, value): the indicator over the value's
   eigen-block in its slot (rotated if the frame says so), embedded into
   the full space by Kronecker products with identities. */
inline Projector variable_projector(const ModelSpec& spec, const std::vector<double>& params,
                                    const std::string& name, std::size_t value,
                                    const std::string& condition) {
    const VariableSpec& var = spec.variable(name);
    if (value >= var.cardinality())
        throw ValidationError("variable_projector: value index out of range");
    const VariableAssignment& a = spec.assignment_of(name);
    std::size_t mult = spec.slots[a.slot].multiplicity;
    std::size_t d = spec.slot_dim(a.slot);

    std::set<std::size_t> block;
    for (std::size_t i = 0; i < mult; ++i) block.insert(value * mult + i);
    Projector local = indicator_projector(d, block);
    if (a.frame.kind != FrameSpec::Kind::Reference)
        local = rotate_projector(rotation_unitary(spec, params, name, condition), local);
    return embed_in_slots(local, a.slot, spec.slot_dims());
}

inline std::map<std::pair<std::string, std::size_t>, Projector>
build_projectors(const ModelSpec& spec, const std::vector<double>& params,
                 const std::string& condition) {
    std::map<std::pair<std::string, std::size_t>, Projector> out;
    for (const auto& v : spec.variables)
        for (std::size_t val = 0; val < v.cardinality(); ++val)
            out.emplace(std::make_pair(v.name, val),
                        variable_projector(spec, params, v.name, val, condition));
    return out;
}

inline std::vector<double> predict_context(const ModelSpec& spec,
                                           const std::vector<double>& params,
                                           const std::string& condition,
                                           const std::vector<std::string>& context) {
    if (context.empty()) throw ValidationError("predict_context: empty context");
    StateVector psi = unpack_state(spec, params, condition);

    std::vector<std::vector<Projector>> outcome_projectors;
    std::vector<std::size_t> card;
    for (const auto& name : context) {
        const VariableSpec& var = spec.variable(name);
        card.push_back(var.cardinality());
        std::vector<Projector> per_value;
        for (std::size_t val = 0; val < var.cardinality(); ++val)
            per_value.push_back(variable_projector(spec, params, name, val, condition));
        outcome_projectors.push_back(std::move(per_value));
    }

    std::size_t cells = 1;
    for (std::size_t c : card) cells *= c;
    std::vector<double> out(cells);
    std::vector<std::size_t> idx(context.size(), 0);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        std::size_t rem = cell;
        for (std::size_t i = context.size(); i-- > 0;) {
            idx[i] = rem % card[i];
            rem /= card[i];
        }
        std::vector<Projector> seq;
        for (std::size_t i = 0; i < context.size(); ++i)
            seq.push_back(outcome_projectors[i][idx[i]]);
        out[cell] = sequence_probability(psi, seq);
    }

    double sum = 0.0;
    for (double p : out) sum += p;
    if (std::fabs(sum - 1.0) > 1e-8)
        throw ValidationError("predict_context: cells do not sum to 1");
    return out;
}

inline std::vector<double> alone_probabilities(const ModelSpec& spec,
                                               const std::vector<double>& params,
                                               const std::string& condition,
                                               const std::string& variable) {
    return predict_context(spec, params, condition, {variable});
}

inline std::vector<std::vector<double>> transition_matrix(const ComplexMatrix& u) {
    if (!is_unitary(u, 1e-8))
        throw ValidationError("transition_matrix: input is not unitary");
    std::vector<std::vector<double>> t(u.rows(), std::vector<double>(u.cols()));
    for (std::size_t i = 0; i < u.rows(); ++i)
        for (std::size_t j = 0; j < u.cols(); ++j)
            t[i][j] = std::norm(u(i, j));
    return t;
}

struct DesignRow {
    std::string condition;
    std::vector<std::string> context;
    std::uint64_t n = 0;
};

inline TableCollection simulate_counts(const ModelSpec& spec, const std::vector<double>& params,
                                       const std::vector<DesignRow>& design, std::uint64_t seed) {
    TableCollection out;
    out.variables = spec.variables;
    out.conditions = spec.conditions;
    for (std::size_t row = 0; row < design.size(); ++row) {
        const DesignRow& d = design[row];
        if (d.n < 1) throw ValidationError("simulate_counts: each design row needs n >= 1");
        std::vector<double> probs = predict_context(spec, params, d.condition, d.context);
        Rng rng = Rng::substream(seed, row);
        ContextTable t;
        t.condition = d.condition;
        t.context = d.context;
        t.counts = rng.multinomial(d.n, probs);
        out.tables.push_back(std::move(t));
    }
    out.validate();
    return out;
}

namespace detail {

/* The fit objective with the ModelSpec walk hoisted out.  Name lookups,
   parameter offsets, slot layouts, and the cell walk for every table are
   resolved once; each evaluation rebuilds only the state coordinates and
   the rotated projector matrices, with the same arithmetic as
   predict_context, so the two paths agree to the last bit. */
class HsmObjective {
public:
    HsmObjective(const ModelSpec& spec, const TableCollection& tables)
        : shared_(spec.shared_rotations), dim_(spec.dimension()),
          state_params_(spec.state_param_count()),
          complex_state_(spec.state_field == ModelSpec::StateField::Complex) {
        for (std::size_t d : spec.slot_dims())
            slot_identity_.push_back(ComplexMatrix::identity(d));

        std::vector<std::string> cond_names, var_names;
        for (const auto& t : tables.tables) {
            if (std::find(cond_names.begin(), cond_names.end(), t.condition) == cond_names.end())
                cond_names.push_back(t.condition);
            for (const auto& name : t.context)
                if (std::find(var_names.begin(), var_names.end(), name) == var_names.end())
                    var_names.push_back(name);
        }
        for (const auto& c : cond_names) cond_index_.push_back(condition_index(spec, c));

        const std::size_t variants = shared_ ? 1 : cond_names.size();
        for (const auto& name : var_names) {
            const VariableAssignment& a = spec.assignment_of(name);
            Var v;
            v.slot = a.slot;
            v.kind = a.frame.kind;
            v.card = spec.variable(name).cardinality();
            v.d = spec.slot_dim(a.slot);
            std::size_t mult = spec.slots[a.slot].multiplicity;
            for (std::size_t val = 0; val < v.card; ++val) {
                ComplexMatrix m(v.d, v.d);
                for (std::size_t i = 0; i < mult; ++i)
                    m(val * mult + i, val * mult + i) = 1.0;
                v.indicator.push_back(std::move(m));
            }
            if (v.kind != FrameSpec::Kind::Reference)
                for (std::size_t k = 0; k < variants; ++k)
                    v.offset.push_back(rotation_offset(spec, name, shared_ ? 0 : cond_index_[k]));
            vars_.push_back(std::move(v));
        }

        proj_.resize(variants);
        for (std::size_t k = 0; k < variants; ++k) {
            proj_[k].resize(vars_.size());
            for (std::size_t vi = 0; vi < vars_.size(); ++vi) {
                proj_[k][vi].resize(vars_[vi].card);
                if (vars_[vi].kind == FrameSpec::Kind::Reference)
                    for (std::size_t val = 0; val < vars_[vi].card; ++val)
                        proj_[k][vi][val] = embed(vars_[vi].slot, vars_[vi].indicator[val]);
            }
        }

        for (const auto& t : tables.tables) {
            Table plan;
            plan.cond = static_cast<std::size_t>(
                std::find(cond_names.begin(), cond_names.end(), t.condition) - cond_names.begin());
            for (const auto& name : t.context) {
                std::size_t vpos = static_cast<std::size_t>(
                    std::find(var_names.begin(), var_names.end(), name) - var_names.begin());
                plan.vars.push_back(vpos);
                plan.card.push_back(vars_[vpos].card);
            }
            plan.counts = t.counts;
            plan.cells = 1;
            for (std::size_t c : plan.card) plan.cells *= c;
            tables_.push_back(std::move(plan));
        }

        psi_.assign(cond_names.size(), std::vector<Complex>(dim_));
        scratch_a_.resize(dim_);
        scratch_b_.resize(dim_);
    }

    double operator()(const std::vector<double>& p) {
        for (std::size_t vi = 0; vi < vars_.size(); ++vi) {
            const Var& v = vars_[vi];
            if (v.kind == FrameSpec::Kind::Reference) continue;
            for (std::size_t k = 0; k < proj_.size(); ++k) {
                ComplexMatrix u = v.kind == FrameSpec::Kind::RotatedPlanar
                    ? planar_rotation(p[v.offset[k]])
                    : unitary_from_hermitian(hermitian_from_params(p, v.offset[k], v.d));
                ComplexMatrix ua = adjoint(u);
                for (std::size_t val = 0; val < v.card; ++val)
                    proj_[k][vi][val] = embed(v.slot, matmul(matmul(u, v.indicator[val]), ua));
            }
        }
        for (std::size_t c = 0; c < psi_.size(); ++c) unpack(p, c);

        double total = 0.0;
        for (const Table& t : tables_) {
            const std::size_t variant = shared_ ? 0 : t.cond;
            pred_.assign(t.cells, 0.0);
            idx_.resize(t.vars.size());
            for (std::size_t cell = 0; cell < t.cells; ++cell) {
                std::size_t rem = cell;
                for (std::size_t i = t.vars.size(); i-- > 0;) {
                    idx_[i] = rem % t.card[i];
                    rem /= t.card[i];
                }
                std::vector<Complex>* vin = &scratch_a_;
                std::vector<Complex>* vout = &scratch_b_;
                *vin = psi_[t.cond];
                for (std::size_t i = 0; i < t.vars.size(); ++i) {
                    const ComplexMatrix& m = proj_[variant][t.vars[i]][idx_[i]];
                    for (std::size_t r = 0; r < dim_; ++r) {
                        Complex s(0.0, 0.0);
                        for (std::size_t c = 0; c < dim_; ++c) s += m(r, c) * (*vin)[c];
                        (*vout)[r] = s;
                    }
                    std::swap(vin, vout);
                }
                double n2 = 0.0;
                for (const Complex& z : *vin) n2 += std::norm(z);
                pred_[cell] = clamp_probability(n2);
            }
            double sum = 0.0;
            for (double q : pred_) sum += q;
            if (std::fabs(sum - 1.0) > 1e-8)
                throw ValidationError("fit objective: cells do not sum to 1");
            total += g_squared_cells(pred_, t.counts);
        }
        return total;
    }

private:
    struct Var {
        std::size_t slot = 0;
        FrameSpec::Kind kind = FrameSpec::Kind::Reference;
        std::size_t card = 0;
        std::size_t d = 0;
        std::vector<ComplexMatrix> indicator;  // local d x d, one per value
        std::vector<std::size_t> offset;       // rotation offset per variant
    };
    struct Table {
        std::size_t cond = 0;
        std::vector<std::size_t> vars;
        std::vector<std::size_t> card;
        std::vector<double> counts;
        std::size_t cells = 0;
    };

    ComplexMatrix embed(std::size_t slot, const ComplexMatrix& local) const {
        ComplexMatrix acc = ComplexMatrix::identity(1);
        for (std::size_t s = 0; s < slot_identity_.size(); ++s)
            acc = kron(acc, s == slot ? local : slot_identity_[s]);
        return acc;
    }

    void unpack(const std::vector<double>& p, std::size_t cpos) {
        const std::size_t n = dim_;
        const std::size_t base = cond_index_[cpos] * state_params_;
        std::vector<Complex>& out = psi_[cpos];
        mags_.resize(n);
        double running = 1.0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            double a = p[base + k];
            mags_[k] = running * std::cos(a);
            running *= std::sin(a);
        }
        mags_[n - 1] = running;
        if (complex_state_) {
            std::size_t pbase = base + (n - 1);
            out[0] = Complex(mags_[0], 0.0);
            for (std::size_t k = 1; k < n; ++k) out[k] = std::polar(mags_[k], p[pbase + k - 1]);
        } else {
            for (std::size_t k = 0; k < n; ++k) out[k] = Complex(mags_[k], 0.0);
        }
    }

    bool shared_;
    std::size_t dim_, state_params_;
    bool complex_state_;
    std::vector<ComplexMatrix> slot_identity_;
    std::vector<std::size_t> cond_index_;
    std::vector<Var> vars_;
    std::vector<Table> tables_;
    std::vector<std::vector<std::vector<ComplexMatrix>>> proj_;  // [variant][var][value]
    std::vector<std::vector<Complex>> psi_;
    std::vector<double> mags_, pred_;
    std::vector<std::size_t> idx_;
    std::vector<Complex> scratch_a_, scratch_b_;
};

}

inline FitResult fit_hsm(const ModelSpec& spec, const TableCollection& tables,
                         const OptimizerConfig& config) {
    spec.validate();
    tables.validate();
    for (const auto& t : tables.tables) {
        if (!spec.has_condition(t.condition))
            throw ValidationError("fit_hsm: data condition '" + t.condition +
                                  "' is not in the model");
        for (const auto& v : t.context) spec.variable(v);
    }

    std::vector<double> lower, upper;
    parameter_bounds(spec, lower, upper);

    const double inf = std::numeric_limits<double>::infinity();
    detail::HsmObjective fast(spec, tables);
    Objective objective = [&](const std::vector<double>& p) -> double {
        try {
            double total = fast(p);
            return std::isfinite(total) ? total : inf;
        } catch (const ValidationError&) {
            return inf;
        }
    };

    MinimizeResult mr = minimize(objective, lower, upper, config);

    FitResult fit;
    fit.params = mr.params;
    fit.g2 = mr.value;
    fit.n_params = static_cast<int>(param_count(spec));
    double n_obs = 0.0;
    for (const auto& t : tables.tables) n_obs += t.total();
    fit.n_obs = static_cast<long long>(std::llround(n_obs));
    fit.bic = bic(fit.g2, fit.n_params, fit.n_obs);
    fit.evaluations = mr.evaluations;
    fit.per_restart_g2 = mr.per_restart_values;
    return fit;
}

}

#endif
