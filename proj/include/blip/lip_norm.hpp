#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "blip/measure.hpp"
#include "blip/pseudometric.hpp"
#include "blip/simplex.hpp"

namespace blip {

enum class SolverTag { LpSimplex, ClosedForm2pt, VertexEnum };

inline std::string to_string(SolverTag tag) {
    switch (tag) {
        case SolverTag::LpSimplex: return "lp-simplex";
        case SolverTag::ClosedForm2pt: return "closed-form-2pt";
        case SolverTag::VertexEnum: return "vertex-enum";
    }
    return "?";
}

/// Result of a seminorm evaluation: the value together with the optimal
/// f on supp(m), re-verified feasible and attaining the value.
template <ScalarType S>
struct NormReport {
    S value;
    SampledFunction<S> witness;
    SolverTag solver = SolverTag::LpSimplex;
    bool exact = is_exact_scalar_v<S>;
};

template <ScalarType S>
struct MembershipReport {
    bool ok;
    S max_violation;
};

/// Checks f ∈ r·BLip_b(Δ) on the support: |fᵢ| ≤ r and |fᵢ−fⱼ| ≤ r·Δ(xᵢ,xⱼ),
/// allowing the given slack. Reports the worst violation found.
template <ScalarType S>
MembershipReport<S> blip_membership(const SampledFunction<S>& f, const Pseudometric<S>& delta,
                                    const S& r, const S& tol = S(0)) {
    if (!(r > S(0))) throw PreconditionError("membership radius must be positive");
    S worst(0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        worst = scalar_max(worst, S(scalar_abs(f.values()[i]) - r));
        for (std::size_t j = 0; j < i; ++j) {
            S d = delta(f.support()[i], f.support()[j]);
            if (!scalar_finite(d) || d < S(0))
                throw PreconditionError("pseudometric returned a negative or non-finite value");
            worst = scalar_max(worst, S(scalar_abs(S(f.values()[i] - f.values()[j])) - r * d));
        }
    }
    return {worst <= tol, worst};
}

namespace detail {

template <ScalarType S>
S verification_tol() {
    if constexpr (is_exact_scalar_v<S>) return S(0);
    else return S(1e-9);
}

} // namespace detail

/// ‖m‖_Δ = sup { m(f) : f ∈ BLip_b(Δ) } as the finite program
///   max Σ cᵢfᵢ   s.t.  −1 ≤ fᵢ ≤ 1,  |fᵢ−fⱼ| ≤ Δ(xᵢ,xⱼ),
/// which equals the supremum over the whole class because any feasible
/// assignment extends to the group by the clipped McShane formula.
/// Pair rows with Δ ≥ 2 are dropped; the box bounds imply them.
template <ScalarType S>
NormReport<S> blip_norm(const MolecularMeasure<S>& m, const Pseudometric<S>& delta) {
    const auto& atoms = m.atoms();
    const int n = static_cast<int>(atoms.size());

    if (n == 0)
        return {S(0), SampledFunction<S>({}, {}, S(1)), SolverTag::LpSimplex};
    if (n == 1) {
        const S sign = atoms[0].coeff < S(0) ? S(-1) : S(1);
        return {scalar_abs(atoms[0].coeff),
                SampledFunction<S>({atoms[0].point}, {sign}, S(1)), SolverTag::LpSimplex};
    }

    std::vector<S> objective(n), lo(n, S(-1)), hi(n, S(1));
    for (int i = 0; i < n; ++i) objective[i] = atoms[i].coeff;

    std::vector<RangedRow<S>> rows;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            S d = delta(atoms[i].point, atoms[j].point);
            if (!scalar_finite(d) || d < S(0))
                throw PreconditionError("pseudometric returned a negative or non-finite value");
            if (d < S(2))
                rows.push_back({{{i, S(1)}, {j, S(-1)}}, S(-d), d});
        }
    }

    auto sol = maximize_box_lp<S>(std::move(objective), std::move(lo), std::move(hi), rows);
    SampledFunction<S> witness(m.support(), std::move(sol.x), S(1));

    const S tol = detail::verification_tol<S>();
    auto membership = blip_membership(witness, delta, S(1), tol);
    if (!membership.ok)
        throw InternalError("norm witness failed feasibility re-check (violation " +
                            format_scalar(membership.max_violation) + ")");
    if (scalar_abs(S(integrate(m, witness) - sol.objective)) > tol)
        throw InternalError("norm witness does not attain the reported value");

    return {sol.objective, std::move(witness), SolverTag::LpSimplex};
}

/// ‖c(δ(x)−δ(y))‖_Δ = |c|·min(2, Δ(x,y)).
template <ScalarType S>
S two_point_norm(const S& c, const GroupElement<S>& x, const GroupElement<S>& y,
                 const Pseudometric<S>& delta) {
    detail::require_same_group(x.tag(), y.tag());
    S d = delta(x, y);
    if (!scalar_finite(d) || d < S(0))
        throw PreconditionError("pseudometric returned a negative or non-finite value");
    return scalar_abs(c) * scalar_min(S(2), d);
}

/// Clipped McShane extension: max(−1, min(1, minᵢ (fᵢ + Δ(x, xᵢ)))).
/// Agrees with f on its support and lies in BLip_b(Δ) whenever f is
/// feasible; an empty support extends to 0.
template <ScalarType S>
S mcshane_extend(const SampledFunction<S>& f, const Pseudometric<S>& delta,
                 const GroupElement<S>& x) {
    auto membership = blip_membership(f, delta, S(1), detail::verification_tol<S>());
    if (!membership.ok)
        throw PreconditionError("function is not feasible for the pseudometric (violation " +
                                format_scalar(membership.max_violation) + ")");
    if (f.size() == 0) return S(0);
    S best = f.values()[0] + delta(x, f.support()[0]);
    for (std::size_t i = 1; i < f.size(); ++i)
        best = scalar_min(best, S(f.values()[i] + delta(x, f.support()[i])));
    return scalar_max(S(-1), scalar_min(S(1), best));
}

/// The extension as a reusable callable; feasibility is checked once.
template <ScalarType S>
std::function<S(const GroupElement<S>&)> mcshane_extension(SampledFunction<S> f,
                                                           Pseudometric<S> delta) {
    auto membership = blip_membership(f, delta, S(1), detail::verification_tol<S>());
    if (!membership.ok)
        throw PreconditionError("function is not feasible for the pseudometric (violation " +
                                format_scalar(membership.max_violation) + ")");
    return [f = std::move(f), delta = std::move(delta)](const GroupElement<S>& x) {
        if (f.size() == 0) return S(0);
        S best = f.values()[0] + delta(x, f.support()[0]);
        for (std::size_t i = 1; i < f.size(); ++i)
            best = scalar_min(best, S(f.values()[i] + delta(x, f.support()[i])));
        return scalar_max(S(-1), scalar_min(S(1), best));
    };
}

/// f ↦ f/√‖f‖ with ‖f‖ the sup over the support, and f ↦ f when
/// identically zero. Takes BLip_b(Δ) into BLip_b(2√Δ).
template <ScalarType S>
SampledFunction<S> normalized_sqrt_map(const SampledFunction<S>& f) {
    S sup(0);
    for (const auto& v : f.values()) sup = scalar_max(sup, scalar_abs(v));
    if (sup == S(0)) return f;
    const S root = scalar_sqrt(sup);
    std::vector<S> values;
    values.reserve(f.size());
    S new_sup(0);
    for (const auto& v : f.values()) {
        values.push_back(S(v / root));
        new_sup = scalar_max(new_sup, scalar_abs(values.back()));
    }
    return {f.support(), std::move(values), scalar_max(S(1), new_sup)};
}

namespace detail {

template <ScalarType S>
void require_delta_m_inputs(const MolecularMeasure<S>& m, const Pseudometric<S>& delta) {
    if (m.empty()) throw PreconditionError("delta_m needs a nonempty measure");
    if (!m.nonnegative()) throw PreconditionError("delta_m needs a nonnegative measure");
    if (!delta.right_invariant)
        throw PreconditionError("delta_m needs a right-invariant pseudometric");
}

} // namespace detail

/// Δ_m(y,z) = m(x ↦ Δ(xy,xz)) / ‖m‖ for m ≥ 0. When Δ carries no declared
/// bound ≤ 2 it is truncated at 2 first, which leaves BLip_b(Δ) unchanged.
template <ScalarType S>
S delta_m(const MolecularMeasure<S>& m, const Pseudometric<S>& delta,
          const GroupElement<S>& y, const GroupElement<S>& z) {
    detail::require_delta_m_inputs(m, delta);
    const bool truncate = !(delta.upper_bound && *delta.upper_bound <= 2.0);
    S sum(0);
    for (const auto& a : m.atoms()) {
        S d = delta(multiply(a.point, y), multiply(a.point, z));
        if (truncate) d = scalar_min(S(2), d);
        sum += a.coeff * d;
    }
    return sum / m.total_mass();
}

/// Δ_m packaged as a pseudometric value (right-invariant when Δ is).
template <ScalarType S>
Pseudometric<S> make_delta_m(MolecularMeasure<S> m, Pseudometric<S> delta) {
    detail::require_delta_m_inputs(m, delta);
    const bool truncate = !(delta.upper_bound && *delta.upper_bound <= 2.0);
    std::string desc = "delta_m(" + delta.description + ")";
    std::optional<double> bound = truncate ? std::optional<double>(2.0) : delta.upper_bound;
    return {[m = std::move(m), d = std::move(delta.eval), truncate](
                const GroupElement<S>& y, const GroupElement<S>& z) {
                S sum(0);
                for (const auto& a : m.atoms()) {
                    S v = d(multiply(a.point, y), multiply(a.point, z));
                    if (truncate) v = scalar_min(S(2), v);
                    sum += a.coeff * v;
                }
                return S(sum / m.total_mass());
            },
            true, false, std::move(desc), bound};
}

template <ScalarType S>
nlohmann::ordered_json norm_report_to_json(const NormReport<S>& report) {
    nlohmann::ordered_json witness = nlohmann::ordered_json::array();
    for (const auto& v : report.witness.values()) witness.push_back(detail::scalar_to_json(v));
    return {{"value", detail::scalar_to_json(report.value)},
            {"witness", std::move(witness)},
            {"solver", to_string(report.solver)},
            {"exact", report.exact}};
}

} // namespace blip
