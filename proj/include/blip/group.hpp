#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "blip/scalar.hpp"

#include "json.hpp"

namespace blip {

enum class GroupKind { RealLine, RealVector, Affine, FreeGroup };

/// Identifies one concrete group: (ℝ,+), (ℝⁿ,+), the affine maps
/// t ↦ at+b with a > 0, or the free group on k generators.
struct GroupTag {
    GroupKind kind = GroupKind::RealLine;
    int param = 0; // dimension for RealVector, generator count for FreeGroup

    friend bool operator==(const GroupTag&, const GroupTag&) = default;
};

inline std::string to_string(const GroupTag& tag) {
    switch (tag.kind) {
        case GroupKind::RealLine: return "real";
        case GroupKind::RealVector: return "vector(" + std::to_string(tag.param) + ")";
        case GroupKind::Affine: return "affine";
        case GroupKind::FreeGroup: return "free(" + std::to_string(tag.param) + ")";
    }
    return "?";
}

inline GroupTag parse_group(std::string_view text) {
    if (text == "real") return {GroupKind::RealLine, 0};
    if (text == "affine") return {GroupKind::Affine, 0};
    auto arg_of = [&](std::string_view name) -> std::optional<int> {
        if (!text.starts_with(name) || text.size() < name.size() + 3) return std::nullopt;
        if (text[name.size()] != '(' || !text.ends_with(')')) return std::nullopt;
        int v = 0;
        auto inner = text.substr(name.size() + 1, text.size() - name.size() - 2);
        auto res = std::from_chars(inner.data(), inner.data() + inner.size(), v);
        if (res.ec != std::errc() || res.ptr != inner.data() + inner.size()) return std::nullopt;
        return v;
    };
    if (auto n = arg_of("vector")) {
        if (*n < 1) throw ParseError("vector dimension must be >= 1");
        return {GroupKind::RealVector, *n};
    }
    if (auto k = arg_of("free")) {
        if (*k < 1 || *k > 26) throw ParseError("free group rank must be in 1..26");
        return {GroupKind::FreeGroup, *k};
    }
    throw ParseError("unknown group '" + std::string(text) +
                     "' (expected real, vector(n), affine, free(k))");
}

template <ScalarType S>
using VectorPayload = Eigen::Matrix<S, Eigen::Dynamic, 1>;

/// The map t ↦ scale·t + shift; scale > 0.
template <ScalarType S>
struct AffineMap {
    S scale;
    S shift;
};

/// Reduced word over the free-group generators: entry +i is the i-th
/// generator (1-based), -i its inverse; no adjacent cancelling pair.
struct Word {
    std::vector<int> letters;
};

inline Word reduce_word(std::vector<int> letters) {
    std::vector<int> out;
    out.reserve(letters.size());
    for (int l : letters) {
        if (!out.empty() && out.back() == -l) out.pop_back();
        else out.push_back(l);
    }
    return Word{std::move(out)};
}

template <ScalarType S>
class GroupElement {
public:
    using Payload = std::variant<S, VectorPayload<S>, AffineMap<S>, Word>;

    GroupElement(GroupTag tag, Payload payload)
        : tag_(tag), payload_(std::move(payload)) {
        validate();
    }

    const GroupTag& tag() const { return tag_; }

    const S& scalar() const { return std::get<S>(payload_); }
    const VectorPayload<S>& vector() const { return std::get<VectorPayload<S>>(payload_); }
    const AffineMap<S>& affine() const { return std::get<AffineMap<S>>(payload_); }
    const Word& word() const { return std::get<Word>(payload_); }

private:
    void validate() {
        switch (tag_.kind) {
            case GroupKind::RealLine: {
                auto* x = std::get_if<S>(&payload_);
                if (!x) throw PreconditionError("real-line element needs a scalar payload");
                if (!scalar_finite(*x)) throw PreconditionError("non-finite coordinate");
                *x = normalize_real(*x);
                break;
            }
            case GroupKind::RealVector: {
                auto* v = std::get_if<VectorPayload<S>>(&payload_);
                if (!v || v->size() != tag_.param)
                    throw PreconditionError("vector payload has wrong dimension");
                for (Eigen::Index i = 0; i < v->size(); ++i) {
                    if (!scalar_finite((*v)(i))) throw PreconditionError("non-finite coordinate");
                    (*v)(i) = normalize_real((*v)(i));
                }
                break;
            }
            case GroupKind::Affine: {
                auto* a = std::get_if<AffineMap<S>>(&payload_);
                if (!a) throw PreconditionError("affine element needs an (a,b) payload");
                if (!scalar_finite(a->scale) || !scalar_finite(a->shift))
                    throw PreconditionError("non-finite coordinate");
                if (!(a->scale > S(0))) throw PreconditionError("affine scale must be positive");
                a->scale = normalize_real(a->scale);
                a->shift = normalize_real(a->shift);
                break;
            }
            case GroupKind::FreeGroup: {
                auto* w = std::get_if<Word>(&payload_);
                if (!w) throw PreconditionError("free-group element needs a word payload");
                for (std::size_t i = 0; i < w->letters.size(); ++i) {
                    int l = w->letters[i];
                    if (l == 0 || l > tag_.param || l < -tag_.param)
                        throw PreconditionError("word letter out of range for this rank");
                    if (i + 1 < w->letters.size() && w->letters[i + 1] == -l)
                        throw PreconditionError("word is not reduced");
                }
                break;
            }
        }
    }

    GroupTag tag_;
    Payload payload_;
};

template <ScalarType S>
GroupElement<S> identity(const GroupTag& tag) {
    switch (tag.kind) {
        case GroupKind::RealLine: return {tag, S(0)};
        case GroupKind::RealVector: {
            VectorPayload<S> v(tag.param);
            for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = S(0);
            return {tag, std::move(v)};
        }
        case GroupKind::Affine: return {tag, AffineMap<S>{S(1), S(0)}};
        case GroupKind::FreeGroup: return {tag, Word{}};
    }
    throw InternalError("bad group tag");
}

namespace detail {
inline void require_same_group(const GroupTag& a, const GroupTag& b) {
    if (!(a == b))
        throw PreconditionError("elements belong to different groups (" + to_string(a) +
                                " vs " + to_string(b) + ")");
}
} // namespace detail

template <ScalarType S>
GroupElement<S> multiply(const GroupElement<S>& g, const GroupElement<S>& h) {
    detail::require_same_group(g.tag(), h.tag());
    switch (g.tag().kind) {
        case GroupKind::RealLine: return {g.tag(), S(g.scalar() + h.scalar())};
        case GroupKind::RealVector: {
            VectorPayload<S> v = g.vector() + h.vector();
            return {g.tag(), std::move(v)};
        }
        case GroupKind::Affine: {
            // (a,b)·(c,d) acts as t ↦ a(ct+d)+b
            const auto& x = g.affine();
            const auto& y = h.affine();
            return {g.tag(), AffineMap<S>{S(x.scale * y.scale), S(x.scale * y.shift + x.shift)}};
        }
        case GroupKind::FreeGroup: {
            std::vector<int> cat = g.word().letters;
            cat.insert(cat.end(), h.word().letters.begin(), h.word().letters.end());
            return {g.tag(), reduce_word(std::move(cat))};
        }
    }
    throw InternalError("bad group tag");
}

template <ScalarType S>
GroupElement<S> inverse(const GroupElement<S>& g) {
    switch (g.tag().kind) {
        case GroupKind::RealLine: return {g.tag(), S(-g.scalar())};
        case GroupKind::RealVector: {
            VectorPayload<S> v = -g.vector();
            return {g.tag(), std::move(v)};
        }
        case GroupKind::Affine: {
            const auto& x = g.affine();
            return {g.tag(), AffineMap<S>{S(S(1) / x.scale), S(-x.shift / x.scale)}};
        }
        case GroupKind::FreeGroup: {
            std::vector<int> rev(g.word().letters.rbegin(), g.word().letters.rend());
            for (int& l : rev) l = -l;
            return {g.tag(), Word{std::move(rev)}};
        }
    }
    throw InternalError("bad group tag");
}

template <ScalarType S>
GroupElement<S> conjugate(const GroupElement<S>& x, const GroupElement<S>& v) {
    return multiply(multiply(x, v), inverse(x));
}

namespace detail {
template <ScalarType S>
int compare_scalar(const S& a, const S& b) {
    return a < b ? -1 : (b < a ? 1 : 0);
}
} // namespace detail

/// Strict total order on elements of one group; the canonical atom order of
/// molecular measures. Exact payload comparison, no tolerance.
template <ScalarType S>
int compare(const GroupElement<S>& a, const GroupElement<S>& b) {
    detail::require_same_group(a.tag(), b.tag());
    switch (a.tag().kind) {
        case GroupKind::RealLine: return detail::compare_scalar(a.scalar(), b.scalar());
        case GroupKind::RealVector: {
            for (Eigen::Index i = 0; i < a.vector().size(); ++i)
                if (int c = detail::compare_scalar(a.vector()(i), b.vector()(i))) return c;
            return 0;
        }
        case GroupKind::Affine: {
            if (int c = detail::compare_scalar(a.affine().scale, b.affine().scale)) return c;
            return detail::compare_scalar(a.affine().shift, b.affine().shift);
        }
        case GroupKind::FreeGroup: {
            const auto& u = a.word().letters;
            const auto& v = b.word().letters;
            if (u.size() != v.size()) return u.size() < v.size() ? -1 : 1;
            for (std::size_t i = 0; i < u.size(); ++i)
                if (u[i] != v[i]) return u[i] < v[i] ? -1 : 1;
            return 0;
        }
    }
    throw InternalError("bad group tag");
}

template <ScalarType S>
bool operator==(const GroupElement<S>& a, const GroupElement<S>& b) {
    return a.tag() == b.tag() && compare(a, b) == 0;
}

// --- text forms -----------------------------------------------------------
//
// real:    "1.5" or "3/4"          vector: "1,2.5"
// affine:  "a,b" with a > 0        word:   "abA" ('a'..'z' generators,
//                                           'A'..'Z' their inverses, "e" = identity)

inline std::string word_to_string(const Word& w) {
    if (w.letters.empty()) return "e";
    std::string s;
    for (int l : w.letters) s += static_cast<char>(l > 0 ? 'a' + l - 1 : 'A' - l - 1);
    return s;
}

inline Word word_from_string(std::string_view text, int rank) {
    if (text == "e" || text.empty()) return Word{};
    std::vector<int> letters;
    for (char c : text) {
        int l = 0;
        if (c >= 'a' && c <= 'z') l = c - 'a' + 1;
        else if (c >= 'A' && c <= 'Z') l = -(c - 'A' + 1);
        else throw ParseError(std::string("bad word character '") + c + "'");
        if (l > rank || l < -rank)
            throw ParseError(std::string("letter '") + c + "' exceeds generator count");
        letters.push_back(l);
    }
    return reduce_word(std::move(letters));
}

template <ScalarType S>
std::string format_element(const GroupElement<S>& g) {
    switch (g.tag().kind) {
        case GroupKind::RealLine: return format_scalar(g.scalar());
        case GroupKind::RealVector: {
            std::string s;
            for (Eigen::Index i = 0; i < g.vector().size(); ++i) {
                if (i) s += ',';
                s += format_scalar(g.vector()(i));
            }
            return s;
        }
        case GroupKind::Affine:
            return format_scalar(g.affine().scale) + "," + format_scalar(g.affine().shift);
        case GroupKind::FreeGroup: return word_to_string(g.word());
    }
    throw InternalError("bad group tag");
}

template <ScalarType S>
GroupElement<S> parse_element(const GroupTag& tag, std::string_view text) {
    auto split = [](std::string_view s) {
        std::vector<std::string_view> parts;
        std::size_t pos = 0;
        while (true) {
            auto comma = s.find(',', pos);
            if (comma == std::string_view::npos) {
                parts.push_back(s.substr(pos));
                return parts;
            }
            parts.push_back(s.substr(pos, comma - pos));
            pos = comma + 1;
        }
    };
    switch (tag.kind) {
        case GroupKind::RealLine: return {tag, scalar_from_string<S>(text)};
        case GroupKind::RealVector: {
            auto parts = split(text);
            if (static_cast<int>(parts.size()) != tag.param)
                throw ParseError("expected " + std::to_string(tag.param) + " coordinates");
            VectorPayload<S> v(tag.param);
            for (int i = 0; i < tag.param; ++i) v(i) = scalar_from_string<S>(parts[i]);
            return {tag, std::move(v)};
        }
        case GroupKind::Affine: {
            auto parts = split(text);
            if (parts.size() != 2) throw ParseError("affine element needs two coordinates a,b");
            return {tag, AffineMap<S>{scalar_from_string<S>(parts[0]),
                                      scalar_from_string<S>(parts[1])}};
        }
        case GroupKind::FreeGroup: return {tag, word_from_string(text, tag.param)};
    }
    throw InternalError("bad group tag");
}

// --- JSON payload encoding --------------------------------------------------

namespace detail {

inline nlohmann::ordered_json scalar_to_json(double x) { return x; }
inline nlohmann::ordered_json scalar_to_json(const Rational& x) { return format_rational(x); }

template <ScalarType S>
S scalar_from_json(const nlohmann::json& j) {
    if (j.is_string()) return scalar_from_string<S>(j.get<std::string>());
    if (j.is_number_integer()) return S(j.get<std::int64_t>());
    if (j.is_number_float()) {
        if constexpr (is_exact_scalar_v<S>)
            throw ParseError("exact mode requires integers or \"p/q\" strings, got " + j.dump());
        else
            return j.get<double>();
    }
    throw ParseError("expected a number, got " + j.dump());
}

} // namespace detail

template <ScalarType S>
nlohmann::ordered_json payload_to_json(const GroupElement<S>& g) {
    using detail::scalar_to_json;
    switch (g.tag().kind) {
        case GroupKind::RealLine: return scalar_to_json(g.scalar());
        case GroupKind::RealVector: {
            nlohmann::ordered_json arr = nlohmann::ordered_json::array();
            for (Eigen::Index i = 0; i < g.vector().size(); ++i)
                arr.push_back(scalar_to_json(g.vector()(i)));
            return arr;
        }
        case GroupKind::Affine:
            return nlohmann::ordered_json::array(
                {scalar_to_json(g.affine().scale), scalar_to_json(g.affine().shift)});
        case GroupKind::FreeGroup: return word_to_string(g.word());
    }
    throw InternalError("bad group tag");
}

template <ScalarType S>
GroupElement<S> payload_from_json(const GroupTag& tag, const nlohmann::json& j) {
    switch (tag.kind) {
        case GroupKind::RealLine: return {tag, detail::scalar_from_json<S>(j)};
        case GroupKind::RealVector: {
            if (!j.is_array() || static_cast<int>(j.size()) != tag.param)
                throw ParseError("point: expected an array of " + std::to_string(tag.param) +
                                 " coordinates");
            VectorPayload<S> v(tag.param);
            for (int i = 0; i < tag.param; ++i) v(i) = detail::scalar_from_json<S>(j[i]);
            return {tag, std::move(v)};
        }
        case GroupKind::Affine: {
            if (!j.is_array() || j.size() != 2)
                throw ParseError("point: affine payload must be [a, b]");
            return {tag, AffineMap<S>{detail::scalar_from_json<S>(j[0]),
                                      detail::scalar_from_json<S>(j[1])}};
        }
        case GroupKind::FreeGroup: {
            if (!j.is_string()) throw ParseError("point: word payload must be a string");
            return {tag, word_from_string(j.get<std::string>(), tag.param)};
        }
    }
    throw InternalError("bad group tag");
}

} // namespace blip
