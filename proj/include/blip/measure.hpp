#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "blip/group.hpp"

namespace blip {

template <ScalarType S>
struct Atom {
    GroupElement<S> point;
    S coeff;
};

/// A finite signed combination of point masses over one group, kept in
/// canonical form: atoms sorted by point, points pairwise distinct under
/// exact payload equality, no zero coefficients.
template <ScalarType S>
class MolecularMeasure {
public:
    explicit MolecularMeasure(GroupTag tag) : tag_(tag) {}

    /// Canonicalizes on construction. merge_eps > 0 additionally merges
    /// float points whose coordinates agree within merge_eps (off by
    /// default: tolerance merging corrupts total-variation accounting).
    MolecularMeasure(GroupTag tag, std::vector<Atom<S>> atoms, double merge_eps = 0.0)
        : tag_(tag), atoms_(std::move(atoms)) {
        for (const auto& a : atoms_) {
            detail::require_same_group(a.point.tag(), tag_);
            if (!scalar_finite(a.coeff)) throw PreconditionError("non-finite coefficient");
        }
        std::sort(atoms_.begin(), atoms_.end(), [](const Atom<S>& a, const Atom<S>& b) {
            return compare(a.point, b.point) < 0;
        });
        std::vector<Atom<S>> merged;
        merged.reserve(atoms_.size());
        for (auto& a : atoms_) {
            if (!merged.empty() && same_point(merged.back().point, a.point, merge_eps))
                merged.back().coeff += a.coeff;
            else
                merged.push_back(std::move(a));
        }
        std::erase_if(merged, [](const Atom<S>& a) { return a.coeff == S(0); });
        atoms_ = std::move(merged);
    }

    const GroupTag& tag() const { return tag_; }
    const std::vector<Atom<S>>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }

    S total_variation() const {
        S tv(0);
        for (const auto& a : atoms_) tv += scalar_abs(a.coeff);
        return tv;
    }

    S total_mass() const {
        S m(0);
        for (const auto& a : atoms_) m += a.coeff;
        return m;
    }

    bool nonnegative() const {
        for (const auto& a : atoms_)
            if (a.coeff < S(0)) return false;
        return true;
    }

    std::vector<GroupElement<S>> support() const {
        std::vector<GroupElement<S>> pts;
        pts.reserve(atoms_.size());
        for (const auto& a : atoms_) pts.push_back(a.point);
        return pts;
    }

    friend bool operator==(const MolecularMeasure& a, const MolecularMeasure& b) {
        if (!(a.tag_ == b.tag_) || a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!(a.atoms_[i].point == b.atoms_[i].point) ||
                a.atoms_[i].coeff != b.atoms_[i].coeff)
                return false;
        return true;
    }

private:
    static bool same_point(const GroupElement<S>& a, const GroupElement<S>& b, double eps) {
        if (compare(a, b) == 0) return true;
        if (eps <= 0.0) return false;
        switch (a.tag().kind) {
            case GroupKind::RealLine:
                return to_double(scalar_abs(S(a.scalar() - b.scalar()))) <= eps;
            case GroupKind::RealVector: {
                for (Eigen::Index i = 0; i < a.vector().size(); ++i)
                    if (to_double(scalar_abs(S(a.vector()(i) - b.vector()(i)))) > eps)
                        return false;
                return true;
            }
            case GroupKind::Affine:
                return to_double(scalar_abs(S(a.affine().scale - b.affine().scale))) <= eps &&
                       to_double(scalar_abs(S(a.affine().shift - b.affine().shift))) <= eps;
            case GroupKind::FreeGroup: return false; // words never tolerance-merge
        }
        return false;
    }

    GroupTag tag_;
    std::vector<Atom<S>> atoms_;
};

template <ScalarType S>
MolecularMeasure<S> point_mass(const GroupElement<S>& x) {
    return {x.tag(), {Atom<S>{x, S(1)}}};
}

/// Canonicalized signed combination Σ scaleᵢ·mᵢ.
template <ScalarType S>
MolecularMeasure<S> combine(const std::vector<std::pair<S, MolecularMeasure<S>>>& terms) {
    if (terms.empty()) throw PreconditionError("combine needs at least one term");
    const GroupTag tag = terms.front().second.tag();
    std::vector<Atom<S>> atoms;
    for (const auto& [scale, m] : terms) {
        detail::require_same_group(m.tag(), tag);
        for (const auto& a : m.atoms()) atoms.push_back({a.point, S(scale * a.coeff)});
    }
    return {tag, std::move(atoms)};
}

template <ScalarType S>
MolecularMeasure<S> scale(const S& c, const MolecularMeasure<S>& m) {
    return combine<S>({{c, m}});
}

template <ScalarType S>
MolecularMeasure<S> add(const MolecularMeasure<S>& m, const MolecularMeasure<S>& n) {
    return combine<S>({{S(1), m}, {S(1), n}});
}

/// m⋆n = Σᵢⱼ cᵢdⱼ δ(xᵢ·yⱼ), canonicalized. Bilinear and associative;
/// δ(e) is the two-sided identity.
template <ScalarType S>
MolecularMeasure<S> convolve(const MolecularMeasure<S>& m, const MolecularMeasure<S>& n) {
    detail::require_same_group(m.tag(), n.tag());
    std::vector<Atom<S>> atoms;
    atoms.reserve(m.size() * n.size());
    for (const auto& a : m.atoms())
        for (const auto& b : n.atoms())
            atoms.push_back({multiply(a.point, b.point), S(a.coeff * b.coeff)});
    return {m.tag(), std::move(atoms)};
}

/// Real values of a candidate function on a finite support set.
template <ScalarType S>
class SampledFunction {
public:
    SampledFunction(std::vector<GroupElement<S>> support, std::vector<S> values, S bound = S(1))
        : support_(std::move(support)), values_(std::move(values)), bound_(bound) {
        if (support_.size() != values_.size())
            throw PreconditionError("support and value counts differ");
        for (std::size_t i = 1; i < support_.size(); ++i)
            detail::require_same_group(support_[i].tag(), support_[0].tag());
        if (!(bound_ >= S(0))) throw PreconditionError("bound must be nonnegative");
        for (const auto& v : values_) {
            if (!scalar_finite(v)) throw PreconditionError("non-finite function value");
            if (scalar_abs(v) > bound_)
                throw PreconditionError("function value exceeds the declared bound");
        }
        for (std::size_t i = 1; i < support_.size(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (support_[i] == support_[j])
                    throw PreconditionError("duplicate support point");
    }

    const std::vector<GroupElement<S>>& support() const { return support_; }
    const std::vector<S>& values() const { return values_; }
    const S& bound() const { return bound_; }
    std::size_t size() const { return support_.size(); }

    std::optional<std::size_t> index_of(const GroupElement<S>& x) const {
        for (std::size_t i = 0; i < support_.size(); ++i)
            if (support_[i] == x) return i;
        return std::nullopt;
    }

private:
    std::vector<GroupElement<S>> support_;
    std::vector<S> values_;
    S bound_;
};

/// m(f) = Σ cᵢ·f(xᵢ). Every atom of m must lie in f's support.
template <ScalarType S>
S integrate(const MolecularMeasure<S>& m, const SampledFunction<S>& f) {
    S total(0);
    for (const auto& a : m.atoms()) {
        auto idx = f.index_of(a.point);
        if (!idx)
            throw PreconditionError("support is missing the point " + format_element(a.point));
        total += a.coeff * f.values()[*idx];
    }
    return total;
}

/// The left action n•f(x) = n(y ↦ f(xy)) = Σⱼ dⱼ·f(x·yⱼ); f must be
/// evaluable at every product (use the McShane extension for sampled f).
template <ScalarType S>
S bullet(const MolecularMeasure<S>& n,
         const std::function<S(const GroupElement<S>&)>& f, const GroupElement<S>& x) {
    detail::require_same_group(x.tag(), n.tag());
    S total(0);
    for (const auto& a : n.atoms()) total += a.coeff * f(multiply(x, a.point));
    return total;
}

// --- JSON ---------------------------------------------------------------------
//
// {"group": "<tag>", "atoms": [{"point": <payload>, "coeff": <real>}]}
// with rational payloads as "p/q" strings in exact mode.

template <ScalarType S>
nlohmann::ordered_json measure_to_json(const MolecularMeasure<S>& m) {
    nlohmann::ordered_json atoms = nlohmann::ordered_json::array();
    for (const auto& a : m.atoms()) {
        nlohmann::ordered_json atom;
        atom["point"] = payload_to_json(a.point);
        atom["coeff"] = detail::scalar_to_json(a.coeff);
        atoms.push_back(std::move(atom));
    }
    return {{"group", to_string(m.tag())}, {"atoms", std::move(atoms)}};
}

template <ScalarType S>
MolecularMeasure<S> measure_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("measure: expected a JSON object");
    if (!j.contains("group") || !j["group"].is_string())
        throw ParseError("measure: missing string field \"group\"");
    if (!j.contains("atoms") || !j["atoms"].is_array())
        throw ParseError("measure: missing array field \"atoms\"");
    const GroupTag tag = parse_group(j["group"].get<std::string>());
    std::vector<Atom<S>> atoms;
    for (std::size_t i = 0; i < j["atoms"].size(); ++i) {
        const auto& a = j["atoms"][i];
        if (!a.is_object() || !a.contains("point") || !a.contains("coeff"))
            throw ParseError("measure: atom " + std::to_string(i) +
                             " needs \"point\" and \"coeff\" fields");
        atoms.push_back({payload_from_json<S>(tag, a["point"]),
                         detail::scalar_from_json<S>(a["coeff"])});
    }
    return {tag, std::move(atoms)};
}

template <ScalarType S>
nlohmann::ordered_json sampled_function_to_json(const SampledFunction<S>& f) {
    nlohmann::ordered_json support = nlohmann::ordered_json::array();
    nlohmann::ordered_json values = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < f.size(); ++i) {
        support.push_back(payload_to_json(f.support()[i]));
        values.push_back(detail::scalar_to_json(f.values()[i]));
    }
    return {{"support", std::move(support)},
            {"values", std::move(values)},
            {"bound", detail::scalar_to_json(f.bound())}};
}

template <ScalarType S>
SampledFunction<S> sampled_function_from_json(const GroupTag& tag, const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("support") || !j.contains("values"))
        throw ParseError("function: needs \"support\" and \"values\" arrays");
    std::vector<GroupElement<S>> support;
    std::vector<S> values;
    for (const auto& p : j["support"]) support.push_back(payload_from_json<S>(tag, p));
    for (const auto& v : j["values"]) values.push_back(detail::scalar_from_json<S>(v));
    S bound = j.contains("bound") ? detail::scalar_from_json<S>(j["bound"]) : S(1);
    return {std::move(support), std::move(values), bound};
}

} // namespace blip
