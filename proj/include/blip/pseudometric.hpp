#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "blip/group.hpp"

namespace blip {

/// An evaluable pseudometric with declared invariance flags. The flags are
/// set by the constructing function and validated by sampled tests, never
/// inferred from the evaluator.
template <ScalarType S>
struct Pseudometric {
    std::function<S(const GroupElement<S>&, const GroupElement<S>&)> eval;
    bool right_invariant = false;
    bool bi_invariant = false;
    std::string description;
    std::optional<double> upper_bound; // declared sup, when one is known

    S operator()(const GroupElement<S>& x, const GroupElement<S>& y) const {
        return eval(x, y);
    }
};

/// A group norm N with N(e)=0, N(g)=N(g⁻¹), N(gh) ≤ N(g)+N(h). Used to
/// build right-invariant pseudometrics Δ(x,y) = N(xy⁻¹).
template <ScalarType S>
struct GroupNorm {
    std::function<S(const GroupElement<S>&)> eval;
    bool conjugation_invariant = false;
    std::string description;

    S operator()(const GroupElement<S>& g) const { return eval(g); }
};

// --- concrete metrics -------------------------------------------------------

template <ScalarType S>
Pseudometric<S> euclidean_metric(const GroupTag& tag) {
    if (tag.kind == GroupKind::RealLine) {
        return {[](const GroupElement<S>& x, const GroupElement<S>& y) {
                    return scalar_abs(S(x.scalar() - y.scalar()));
                },
                true, true, "euclidean", std::nullopt};
    }
    if (tag.kind == GroupKind::RealVector) {
        return {[](const GroupElement<S>& x, const GroupElement<S>& y) {
                    VectorPayload<S> d = x.vector() - y.vector();
                    S sq(0);
                    for (Eigen::Index i = 0; i < d.size(); ++i) sq += d(i) * d(i);
                    return scalar_sqrt(sq);
                },
                true, true, "euclidean", std::nullopt};
    }
    throw PreconditionError("euclidean metric needs real or vector(n), got " + to_string(tag));
}

/// Value 2 for distinct points, 0 otherwise; bi-invariant on every group.
template <ScalarType S>
Pseudometric<S> discrete2_metric() {
    return {[](const GroupElement<S>& x, const GroupElement<S>& y) {
                return compare(x, y) == 0 ? S(0) : S(2);
            },
            true, true, "discrete2", 2.0};
}

/// Reduced length of gh⁻¹. Right-invariant; not bi-invariant (conjugation
/// changes word length).
template <ScalarType S>
Pseudometric<S> word_metric(const GroupTag& tag) {
    if (tag.kind != GroupKind::FreeGroup)
        throw PreconditionError("word metric needs free(k), got " + to_string(tag));
    return {[](const GroupElement<S>& x, const GroupElement<S>& y) {
                return S(static_cast<long>(multiply(x, inverse(y)).word().letters.size()));
            },
            true, false, "word", std::nullopt};
}

namespace detail {

/// Hyperbolic distance in the upper half plane, arccosh(1 + |z−w|²/(2·Im z·Im w)),
/// computed as log1p for stability near coinciding points.
inline double half_plane_distance(double re1, double im1, double re2, double im2) {
    const double dx = re1 - re2, dy = im1 - im2;
    const double u = (dx * dx + dy * dy) / (2.0 * im1 * im2);
    return std::log1p(u + std::sqrt(u * (u + 2.0)));
}

} // namespace detail

/// Right-invariant metric on the affine group via g ↦ ι(g⁻¹) into the
/// hyperbolic upper half plane, ι(a,b) = b + i·a. Left-invariance of the
/// half-plane metric under the affine action plus the inversion makes this
/// right-invariant; the property tests sample it rather than assume it.
template <ScalarType S>
Pseudometric<S> affine_hyperbolic_right_metric() {
    if constexpr (is_exact_scalar_v<S>)
        throw ExactUnavailableError("affine-hyp-right has no exact rational evaluation");
    else {
        return {[](const GroupElement<S>& g, const GroupElement<S>& h) {
                    const auto gi = inverse(g).affine();
                    const auto hi = inverse(h).affine();
                    return detail::half_plane_distance(gi.shift, gi.scale, hi.shift, hi.scale);
                },
                true, false, "affine-hyp-right", std::nullopt};
    }
}

template <ScalarType S>
Pseudometric<S> from_group_norm(GroupNorm<S> norm) {
    bool bi = norm.conjugation_invariant;
    std::string desc = "norm(" + norm.description + ")";
    return {[n = std::move(norm)](const GroupElement<S>& x, const GroupElement<S>& y) {
                return n(multiply(x, inverse(y)));
            },
            true, bi, std::move(desc), std::nullopt};
}

// --- transforms (all preserve the invariance flags) ---------------------------

template <ScalarType S>
Pseudometric<S> sqrt_metric(Pseudometric<S> base) {
    std::optional<double> bound;
    if (base.upper_bound) bound = std::sqrt(*base.upper_bound);
    std::string desc = "sqrt(" + base.description + ")";
    return {[b = std::move(base.eval)](const GroupElement<S>& x, const GroupElement<S>& y) {
                return scalar_sqrt(b(x, y));
            },
            base.right_invariant, base.bi_invariant, std::move(desc), bound};
}

template <ScalarType S>
Pseudometric<S> scaled_metric(const S& c, Pseudometric<S> base) {
    if (!(c > S(0))) throw PreconditionError("scale factor must be positive");
    std::optional<double> bound;
    if (base.upper_bound) bound = to_double(c) * *base.upper_bound;
    std::string desc = "scale(" + format_scalar(c) + "," + base.description + ")";
    return {[c, b = std::move(base.eval)](const GroupElement<S>& x, const GroupElement<S>& y) {
                return S(c * b(x, y));
            },
            base.right_invariant, base.bi_invariant, std::move(desc), bound};
}

template <ScalarType S>
Pseudometric<S> truncated_metric(const S& c, Pseudometric<S> base) {
    if (!(c > S(0))) throw PreconditionError("truncation level must be positive");
    double bound = base.upper_bound ? std::min(to_double(c), *base.upper_bound) : to_double(c);
    std::string desc = "trunc(" + format_scalar(c) + "," + base.description + ")";
    return {[c, b = std::move(base.eval)](const GroupElement<S>& x, const GroupElement<S>& y) {
                return scalar_min(c, b(x, y));
            },
            base.right_invariant, base.bi_invariant, std::move(desc), bound};
}

/// Θ(x,y) = Σ_j 2⁻ʲ·min(Θ_j(x,y), 1) over the given finite family, j from 0.
/// Dominates each term and stays a pseudometric whenever the inputs are.
template <ScalarType S>
Pseudometric<S> series_min_metric(std::vector<Pseudometric<S>> family) {
    if (family.empty()) throw PreconditionError("series needs at least one pseudometric");
    bool right = true, bi = true;
    double bound = 0.0;
    std::string desc = "series(";
    for (std::size_t j = 0; j < family.size(); ++j) {
        right = right && family[j].right_invariant;
        bi = bi && family[j].bi_invariant;
        bound += std::min(family[j].upper_bound.value_or(1.0), 1.0) * std::ldexp(1.0, -static_cast<int>(j));
        desc += (j ? ";" : "") + family[j].description;
    }
    desc += ")";
    auto shared = std::make_shared<std::vector<Pseudometric<S>>>(std::move(family));
    return {[shared](const GroupElement<S>& x, const GroupElement<S>& y) {
                S total(0);
                S w(1);
                const S half = S(1) / S(2);
                for (const auto& theta : *shared) {
                    total += w * scalar_min(theta(x, y), S(1));
                    w *= half;
                }
                return total;
            },
            right, bi, std::move(desc), bound};
}

// --- built-in group norms ----------------------------------------------------

template <ScalarType S>
GroupNorm<S> abs_norm(const GroupTag& tag) {
    if (tag.kind != GroupKind::RealLine)
        throw PreconditionError("abs norm needs the real line");
    return {[](const GroupElement<S>& g) { return scalar_abs(g.scalar()); }, true, "abs"};
}

template <ScalarType S>
GroupNorm<S> euclidean_norm(const GroupTag& tag) {
    if (tag.kind != GroupKind::RealVector)
        throw PreconditionError("euclidean norm needs vector(n)");
    return {[](const GroupElement<S>& g) {
                S sq(0);
                for (Eigen::Index i = 0; i < g.vector().size(); ++i)
                    sq += g.vector()(i) * g.vector()(i);
                return scalar_sqrt(sq);
            },
            true, "l2"};
}

template <ScalarType S>
GroupNorm<S> word_length_norm(const GroupTag& tag) {
    if (tag.kind != GroupKind::FreeGroup)
        throw PreconditionError("word-length norm needs free(k)");
    return {[](const GroupElement<S>& g) {
                return S(static_cast<long>(g.word().letters.size()));
            },
            false, "wordlen"};
}

// --- spec strings -------------------------------------------------------------
//
// euclidean | discrete2 | word | affine-hyp-right | sqrt(<spec>)
// | scale(<c>,<spec>) | trunc(<c>,<spec>) | series(<spec>;<spec>;...)

struct PmSpec {
    enum class Kind { Euclidean, Discrete2, Word, AffineHypRight, Sqrt, Scale, Truncate, Series };

    Kind kind = Kind::Euclidean;
    Rational param{0};        // Scale/Truncate factor, kept exact
    std::vector<PmSpec> args; // children for the composite kinds

    static PmSpec parse(std::string_view text);
    std::string str() const;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

/// Splits at top-level occurrences of `sep`, respecting parentheses.
inline std::vector<std::string_view> split_top_level(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '(') ++depth;
        else if (s[i] == ')') --depth;
        else if (s[i] == sep && depth == 0) {
            parts.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    parts.push_back(s.substr(start));
    return parts;
}

} // namespace detail

inline PmSpec PmSpec::parse(std::string_view text) {
    using detail::split_top_level;
    using detail::trim;
    std::string_view s = trim(text);
    auto leaf = [](Kind k) {
        PmSpec spec;
        spec.kind = k;
        return spec;
    };
    if (s == "euclidean") return leaf(Kind::Euclidean);
    if (s == "discrete2") return leaf(Kind::Discrete2);
    if (s == "word") return leaf(Kind::Word);
    if (s == "affine-hyp-right") return leaf(Kind::AffineHypRight);

    auto inner_of = [&](std::string_view name) -> std::optional<std::string_view> {
        if (!s.starts_with(name)) return std::nullopt;
        std::string_view rest = trim(s.substr(name.size()));
        if (rest.size() < 2 || rest.front() != '(' || rest.back() != ')') return std::nullopt;
        return rest.substr(1, rest.size() - 2);
    };

    if (auto inner = inner_of("sqrt")) {
        PmSpec spec = leaf(Kind::Sqrt);
        spec.args.push_back(parse(*inner));
        return spec;
    }
    for (auto [name, kind] : {std::pair{"scale", Kind::Scale}, std::pair{"trunc", Kind::Truncate}}) {
        if (auto inner = inner_of(name)) {
            auto parts = split_top_level(*inner, ',');
            if (parts.size() != 2)
                throw ParseError(std::string(name) + " needs (<c>,<spec>)");
            PmSpec spec = leaf(kind);
            spec.param = parse_rational(trim(parts[0]));
            spec.args.push_back(parse(parts[1]));
            return spec;
        }
    }
    if (auto inner = inner_of("series")) {
        PmSpec spec = leaf(Kind::Series);
        for (auto part : split_top_level(*inner, ';')) spec.args.push_back(parse(part));
        if (spec.args.empty()) throw ParseError("series needs at least one spec");
        return spec;
    }
    throw ParseError("bad pseudometric spec '" + std::string(text) + "'");
}

inline std::string PmSpec::str() const {
    switch (kind) {
        case Kind::Euclidean: return "euclidean";
        case Kind::Discrete2: return "discrete2";
        case Kind::Word: return "word";
        case Kind::AffineHypRight: return "affine-hyp-right";
        case Kind::Sqrt: return "sqrt(" + args[0].str() + ")";
        case Kind::Scale: return "scale(" + format_rational(param) + "," + args[0].str() + ")";
        case Kind::Truncate: return "trunc(" + format_rational(param) + "," + args[0].str() + ")";
        case Kind::Series: {
            std::string s = "series(";
            for (std::size_t i = 0; i < args.size(); ++i) s += (i ? ";" : "") + args[i].str();
            return s + ")";
        }
    }
    return "?";
}

template <ScalarType S>
Pseudometric<S> make_pseudometric(const PmSpec& spec, const GroupTag& tag) {
    using Kind = PmSpec::Kind;
    switch (spec.kind) {
        case Kind::Euclidean: return euclidean_metric<S>(tag);
        case Kind::Discrete2: return discrete2_metric<S>();
        case Kind::Word: return word_metric<S>(tag);
        case Kind::AffineHypRight:
            if (tag.kind != GroupKind::Affine)
                throw PreconditionError("affine-hyp-right needs the affine group");
            return affine_hyperbolic_right_metric<S>();
        case Kind::Sqrt: return sqrt_metric(make_pseudometric<S>(spec.args[0], tag));
        case Kind::Scale:
            return scaled_metric(scalar_from_rational<S>(spec.param),
                                 make_pseudometric<S>(spec.args[0], tag));
        case Kind::Truncate:
            return truncated_metric(scalar_from_rational<S>(spec.param),
                                    make_pseudometric<S>(spec.args[0], tag));
        case Kind::Series: {
            std::vector<Pseudometric<S>> family;
            family.reserve(spec.args.size());
            for (const auto& a : spec.args) family.push_back(make_pseudometric<S>(a, tag));
            return series_min_metric(std::move(family));
        }
    }
    throw InternalError("bad pseudometric spec");
}

template <ScalarType S>
Pseudometric<S> make_pseudometric(std::string_view spec, const GroupTag& tag) {
    return make_pseudometric<S>(PmSpec::parse(spec), tag);
}

// --- conjugation distortion ----------------------------------------------------

/// max over the probes x of Δ(xvx⁻¹, e). Unbounded growth as the probes grow,
/// for arbitrarily small v, is the non-SIN signature.
template <ScalarType S>
S distortion_probe(const Pseudometric<S>& delta, const GroupElement<S>& v,
                   const std::vector<GroupElement<S>>& probes) {
    if (!delta.right_invariant)
        throw PreconditionError("distortion probe needs a right-invariant pseudometric");
    if (probes.empty()) throw PreconditionError("distortion probe needs at least one probe");
    const auto e = identity<S>(v.tag());
    S best(0);
    for (const auto& x : probes) {
        detail::require_same_group(x.tag(), v.tag());
        best = scalar_max(best, delta(conjugate(x, v), e));
    }
    return best;
}

} // namespace blip
