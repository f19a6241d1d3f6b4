#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "blip/lip_norm.hpp"
#include "blip/table.hpp"

namespace blip {

// --- deterministic sampling -----------------------------------------------------
//
// mt19937_64 plus fixed mappings, so identical seeds give identical bytes on
// every platform; std::uniform_real_distribution is implementation-defined
// and deliberately avoided.

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t bits() { return engine_(); }

    double unit() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

    /// uniform in [-scale, scale]
    double symmetric(double scale) { return (2.0 * unit() - 1.0) * scale; }

    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : bits() % n; }

    /// small rational, roughly uniform in [-scale, scale], denominator ≤ 12
    Rational symmetric_rational(double scale) {
        const std::int64_t den = static_cast<std::int64_t>(below(12)) + 1;
        const std::int64_t span = static_cast<std::int64_t>(scale * static_cast<double>(den));
        if (span <= 0) return Rational(0);
        const std::int64_t num = static_cast<std::int64_t>(below(2 * span + 1)) - span;
        return Rational(num, den);
    }

private:
    std::mt19937_64 engine_;
};

namespace detail {

template <ScalarType S>
S random_coordinate(Rng& rng, double scale) {
    if constexpr (is_exact_scalar_v<S>) return rng.symmetric_rational(scale);
    else return rng.symmetric(scale);
}

template <ScalarType S>
S random_positive(Rng& rng, double log_range) {
    if constexpr (is_exact_scalar_v<S>) {
        // ratio of small integers, spread around 1
        const std::int64_t p = static_cast<std::int64_t>(rng.below(4)) + 1;
        const std::int64_t q = static_cast<std::int64_t>(rng.below(4)) + 1;
        return Rational(p, q);
    } else {
        return std::exp(rng.symmetric(log_range));
    }
}

} // namespace detail

template <ScalarType S>
GroupElement<S> random_element(Rng& rng, const GroupTag& tag, double point_scale) {
    switch (tag.kind) {
        case GroupKind::RealLine:
            return {tag, detail::random_coordinate<S>(rng, point_scale)};
        case GroupKind::RealVector: {
            VectorPayload<S> v(tag.param);
            for (int i = 0; i < tag.param; ++i)
                v(i) = detail::random_coordinate<S>(rng, point_scale);
            return {tag, std::move(v)};
        }
        case GroupKind::Affine:
            return {tag, AffineMap<S>{detail::random_positive<S>(rng, 1.2),
                                      detail::random_coordinate<S>(rng, point_scale)}};
        case GroupKind::FreeGroup: {
            const std::size_t len = rng.below(7);
            std::vector<int> letters;
            letters.reserve(len);
            for (std::size_t i = 0; i < len; ++i) {
                const int gen = static_cast<int>(rng.below(static_cast<std::uint64_t>(tag.param))) + 1;
                letters.push_back(rng.below(2) ? gen : -gen);
            }
            return {tag, reduce_word(std::move(letters))};
        }
    }
    throw InternalError("bad group tag");
}

/// Deterministic pseudo-random measure; identical (seed, parameters) give
/// byte-identical serializations. Coefficients are symmetric around zero so
/// signed paths get exercised; canonicalization may merge colliding points.
template <ScalarType S>
MolecularMeasure<S> random_measure(std::uint64_t seed, const GroupTag& tag, int atom_count,
                                   double coeff_scale, double point_scale) {
    if (atom_count < 0) throw PreconditionError("atom count must be nonnegative");
    Rng rng(seed);
    std::vector<Atom<S>> atoms;
    atoms.reserve(static_cast<std::size_t>(atom_count));
    for (int i = 0; i < atom_count; ++i) {
        auto point = random_element<S>(rng, tag, point_scale);
        atoms.push_back({std::move(point), detail::random_coordinate<S>(rng, coeff_scale)});
    }
    return {tag, std::move(atoms)};
}

// --- discontinuity witnesses ------------------------------------------------------

template <ScalarType S>
struct WitnessBudget {
    std::vector<GroupElement<S>> smalls; // candidate v, scanned in order
    std::vector<GroupElement<S>> probes; // candidate x, scanned in order
};

/// Deterministic default search grid: dilation components log-spaced
/// 10⁰..10⁸, translation components log-spaced 10⁻⁸..10⁰ with both signs,
/// short words on free groups. First hit wins.
template <ScalarType S>
WitnessBudget<S> default_budget(const GroupTag& tag) {
    WitnessBudget<S> budget;
    auto pow10 = [](int k) {
        S v(1);
        for (int i = 0; i < (k < 0 ? -k : k); ++i) v = k < 0 ? S(v / S(10)) : S(v * S(10));
        return v;
    };
    switch (tag.kind) {
        case GroupKind::RealLine: {
            budget.smalls.push_back(identity<S>(tag));
            for (int k = -8; k <= 0; ++k) {
                budget.smalls.push_back({tag, pow10(k)});
                budget.smalls.push_back({tag, S(-pow10(k))});
            }
            for (int k = 0; k <= 8; ++k) budget.probes.push_back({tag, pow10(k)});
            break;
        }
        case GroupKind::RealVector: {
            auto axis = [&](const S& value) {
                VectorPayload<S> v(tag.param);
                for (int i = 0; i < tag.param; ++i) v(i) = S(0);
                v(0) = value;
                return GroupElement<S>{tag, std::move(v)};
            };
            budget.smalls.push_back(identity<S>(tag));
            for (int k = -8; k <= 0; ++k) {
                budget.smalls.push_back(axis(pow10(k)));
                budget.smalls.push_back(axis(S(-pow10(k))));
            }
            for (int k = 0; k <= 8; ++k) budget.probes.push_back(axis(pow10(k)));
            break;
        }
        case GroupKind::Affine: {
            budget.smalls.push_back(identity<S>(tag));
            for (int k = -8; k <= 0; ++k) {
                budget.smalls.push_back({tag, AffineMap<S>{S(1), pow10(k)}});
                budget.smalls.push_back({tag, AffineMap<S>{S(1), S(-pow10(k))}});
            }
            for (int k = 0; k <= 8; ++k)
                budget.probes.push_back({tag, AffineMap<S>{pow10(k), S(0)}});
            break;
        }
        case GroupKind::FreeGroup: {
            const int gens = std::min(tag.param, 2);
            std::vector<Word> words{Word{}};
            std::size_t begin = 0;
            for (int len = 1; len <= 3; ++len) {
                std::size_t end = words.size();
                for (std::size_t w = begin; w < end; ++w)
                    for (int g = 1; g <= gens; ++g)
                        for (int sgn : {1, -1}) {
                            std::vector<int> next = words[w].letters;
                            if (!next.empty() && next.back() == -sgn * g) continue;
                            next.push_back(sgn * g);
                            words.push_back(Word{std::move(next)});
                        }
                begin = end;
            }
            for (const auto& w : words) {
                if (w.letters.size() <= 1) budget.smalls.push_back({tag, w});
                if (!w.letters.empty()) budget.probes.push_back({tag, w});
            }
            break;
        }
    }
    return budget;
}

/// Search outcome for one (Δ, ε) pair, with every certified quantity
/// recomputed through the LP rather than trusted from closed forms.
template <ScalarType S>
struct WitnessReport {
    S epsilon{0};
    bool success = false;
    S max_distortion{0};
    std::optional<GroupElement<S>> x, v;
    std::optional<MolecularMeasure<S>> m, n;
    S norm_m_delta{0}, norm_n_delta{0}, norm_conv_theta{0};
};

/// Scans the budget for x, v with Δ(v,e) < ε² and Θ(xv, x) ≥ 1, then builds
/// the pair m = ε·δ(x), n = (δ(v) − δ(e))/ε and certifies
/// ‖m‖_Δ = ε, ‖n‖_Δ < ε, ‖m⋆n‖_Θ ≥ 1 by LP.
template <ScalarType S>
WitnessReport<S> sin_witness(const Pseudometric<S>& delta, const Pseudometric<S>& theta,
                             const S& epsilon, const WitnessBudget<S>& budget) {
    if (!delta.right_invariant || !theta.right_invariant)
        throw PreconditionError("sin_witness needs right-invariant pseudometrics");
    if (!(epsilon > S(0))) throw PreconditionError("epsilon must be positive");
    if (budget.smalls.empty() || budget.probes.empty())
        throw PreconditionError("empty search budget");

    const GroupTag tag = budget.smalls.front().tag();
    const auto e = identity<S>(tag);
    const S eps2 = epsilon * epsilon;
    const S tol = detail::verification_tol<S>();

    WitnessReport<S> report;
    report.epsilon = epsilon;

    for (const auto& v : budget.smalls) {
        const S dv = delta(v, e);
        if (!(dv < eps2)) continue;
        for (const auto& x : budget.probes) {
            const S t = theta(multiply(x, v), x);
            report.max_distortion = scalar_max(report.max_distortion, t);
            if (!(t >= S(1))) continue;

            auto m = scale(epsilon, point_mass(x));
            auto n = combine<S>({{S(S(1) / epsilon), point_mass(v)},
                                 {S(S(-1) / epsilon), point_mass(e)}});
            const S norm_m = blip_norm(m, delta).value;
            const S norm_n = blip_norm(n, delta).value;
            const S norm_conv = blip_norm(convolve(m, n), theta).value;

            if (scalar_abs(S(norm_m - epsilon)) > tol ||
                scalar_abs(S(norm_n - scalar_min(S(2), dv) / epsilon)) > tol ||
                scalar_abs(S(norm_conv - scalar_min(S(2), t))) > tol)
                throw InternalError("witness norms disagree with the closed forms");
            if (!(norm_n < epsilon) || !(norm_conv >= S(1)))
                throw InternalError("witness certification failed");

            report.success = true;
            report.x = x;
            report.v = v;
            report.m = std::move(m);
            report.n = std::move(n);
            report.norm_m_delta = norm_m;
            report.norm_n_delta = norm_n;
            report.norm_conv_theta = norm_conv;
            return report;
        }
    }
    return report;
}

template <ScalarType S>
nlohmann::ordered_json witness_report_to_json(const WitnessReport<S>& r) {
    nlohmann::ordered_json j;
    j["epsilon"] = detail::scalar_to_json(r.epsilon);
    j["success"] = r.success;
    j["max_distortion"] = detail::scalar_to_json(r.max_distortion);
    if (r.success) {
        j["x"] = payload_to_json(*r.x);
        j["v"] = payload_to_json(*r.v);
        j["m"] = measure_to_json(*r.m);
        j["n"] = measure_to_json(*r.n);
        j["norm_m_delta"] = detail::scalar_to_json(r.norm_m_delta);
        j["norm_n_delta"] = detail::scalar_to_json(r.norm_n_delta);
        j["norm_conv_theta"] = detail::scalar_to_json(r.norm_conv_theta);
    } else {
        j["x"] = nullptr;
        j["v"] = nullptr;
        j["m"] = nullptr;
        j["n"] = nullptr;
        j["norm_m_delta"] = nullptr;
        j["norm_n_delta"] = nullptr;
        j["norm_conv_theta"] = nullptr;
    }
    return j;
}

namespace detail {

inline ExperimentTable::Cell scalar_cell(double v) { return v; }
inline ExperimentTable::Cell scalar_cell(const Rational& v) { return v; }

} // namespace detail

/// One sin_witness run per (catalog Δ, ε) pair against the fixed target Θ.
/// On a non-SIN group every cell should find its witness; on a SIN group
/// none should.
template <ScalarType S>
ExperimentTable joint_continuity_scan(const GroupTag& tag, const std::vector<PmSpec>& catalog,
                                      const Pseudometric<S>& theta, const std::vector<S>& eps_list,
                                      const WitnessBudget<S>& budget) {
    if (catalog.empty()) throw PreconditionError("catalog must be nonempty");
    ExperimentTable table;
    table.add_metadata("experiment", "joint-continuity-scan");
    table.add_metadata("group", to_string(tag));
    table.add_metadata("theta", theta.description);
    table.set_columns({"pm", "eps", "success", "norm_m_delta", "norm_n_delta",
                       "norm_conv_theta", "max_distortion"});
    for (const auto& spec : catalog) {
        const auto delta = make_pseudometric<S>(spec, tag);
        for (const auto& eps : eps_list) {
            auto r = sin_witness(delta, theta, eps, budget);
            table.add_row({spec.str(), detail::scalar_cell(eps), r.success,
                           detail::scalar_cell(r.norm_m_delta),
                           detail::scalar_cell(r.norm_n_delta),
                           detail::scalar_cell(r.norm_conv_theta),
                           detail::scalar_cell(r.max_distortion)});
        }
    }
    return table;
}

// --- the running example -----------------------------------------------------------

/// m_j = n_j = j(δ(1/j²) − δ(0)) on the real line with Δ(x,y) = |x−y| and
/// f_j(x) = min(1, |x − 1/j²|): per j the norms ‖m_j‖_Δ, ‖m_j‖_√Δ,
/// ‖m_j⋆n_j‖_Δ and the pairing m_j⋆n_j(f_j), all through the LP.
template <ScalarType S>
ExperimentTable run_example_31(int j_max) {
    if (j_max < 1) throw PreconditionError("j_max must be at least 1");
    const GroupTag tag{GroupKind::RealLine, 0};
    const auto delta = euclidean_metric<S>(tag);
    const auto sqrt_delta = sqrt_metric(delta);

    ExperimentTable table;
    table.add_metadata("experiment", "example31");
    table.add_metadata("group", to_string(tag));
    table.add_metadata("pm", "euclidean");
    table.add_metadata("exact", is_exact_scalar_v<S> ? "true" : "false");
    table.set_columns({"j", "norm_delta", "norm_sqrt_delta", "conv_norm_delta", "pairing"});

    for (int j = 1; j <= j_max; ++j) {
        const S jj = S(j);
        const S step = S(S(1) / S(jj * jj));
        const GroupElement<S> zero{tag, S(0)}, peak{tag, step}, twice{tag, S(step + step)};
        const auto m = combine<S>({{jj, point_mass(peak)}, {S(-jj), point_mass(zero)}});
        const auto conv = convolve(m, m);

        const S one_gap = scalar_min(S(1), step);
        SampledFunction<S> f({zero, peak, twice}, {one_gap, S(0), one_gap}, S(1));

        table.add_row({std::int64_t(j), detail::scalar_cell(blip_norm(m, delta).value),
                       detail::scalar_cell(blip_norm(m, sqrt_delta).value),
                       detail::scalar_cell(blip_norm(conv, delta).value),
                       detail::scalar_cell(integrate(conv, f))});
    }
    return table;
}

// --- the convolution seminorm bound ---------------------------------------------------

struct ConvolutionBoundReport {
    double lhs = 0;            // ‖m⋆n‖_Δ
    double norm_m_sqrt = 0;    // ‖m‖_√Δ
    double norm_n_2sqrt = 0;   // ‖n‖_2√Δ
    double rhs = 0;            // √2·‖m‖_√Δ·‖n‖_2√Δ
    bool holds = false;
};

/// ‖m⋆n‖_Δ ≤ √2·‖m‖_√Δ·‖n‖_2√Δ for bi-invariant Δ. Refuses pseudometrics
/// without the bi-invariance flag; the inequality is unproven otherwise.
inline ConvolutionBoundReport check_lemma_25(const MolecularMeasure<double>& m,
                                             const MolecularMeasure<double>& n,
                                             const Pseudometric<double>& delta) {
    if (!delta.bi_invariant)
        throw PreconditionError("the convolution bound needs a bi-invariant pseudometric");
    ConvolutionBoundReport r;
    r.lhs = blip_norm(convolve(m, n), delta).value;
    const auto sq = sqrt_metric(delta);
    r.norm_m_sqrt = blip_norm(m, sq).value;
    r.norm_n_2sqrt = blip_norm(n, scaled_metric(2.0, sq)).value;
    r.rhs = std::sqrt(2.0) * r.norm_m_sqrt * r.norm_n_2sqrt;
    r.holds = r.lhs <= r.rhs + 1e-9;
    return r;
}

inline nlohmann::ordered_json convolution_bound_to_json(const ConvolutionBoundReport& r) {
    return {{"lhs", r.lhs},
            {"norm_m_sqrt", r.norm_m_sqrt},
            {"norm_n_2sqrt", r.norm_n_2sqrt},
            {"rhs", r.rhs},
            {"holds", r.holds}};
}

// --- separate continuity --------------------------------------------------------------

/// For positive m: tabulates ‖n_k‖ under the derived pseudometric Δ_m and
/// checks the bound ‖m⋆n_k‖_Δ ≤ ‖m‖·‖n_k‖_{Δ_m} on every row.
template <ScalarType S>
ExperimentTable separate_continuity_demo(const MolecularMeasure<S>& m,
                                         const Pseudometric<S>& delta,
                                         const std::vector<MolecularMeasure<S>>& sequence) {
    if (m.empty() || !m.nonnegative())
        throw PreconditionError("the demo needs a nonempty nonnegative measure");
    const auto delta_derived = make_delta_m(m, delta);
    const S tv = m.total_variation();
    const S tol = detail::verification_tol<S>();

    ExperimentTable table;
    table.add_metadata("experiment", "separate-continuity");
    table.add_metadata("group", to_string(m.tag()));
    table.add_metadata("pm", delta.description);
    table.add_metadata("total_variation", format_scalar(tv));
    table.set_columns({"k", "norm_n_delta_m", "conv_norm_delta", "bound", "holds"});

    for (std::size_t k = 0; k < sequence.size(); ++k) {
        detail::require_same_group(sequence[k].tag(), m.tag());
        const S norm_n = blip_norm(sequence[k], delta_derived).value;
        const S conv_norm = blip_norm(convolve(m, sequence[k]), delta).value;
        const S bound = tv * norm_n;
        table.add_row({std::int64_t(k), detail::scalar_cell(norm_n),
                       detail::scalar_cell(conv_norm), detail::scalar_cell(bound),
                       conv_norm <= bound + tol});
    }
    return table;
}

} // namespace blip
