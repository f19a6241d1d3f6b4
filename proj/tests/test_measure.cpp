#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "blip/measure.hpp"

#include "test_support.hpp"

using namespace blip;
using namespace blip::testing;

namespace {

/// canonical atom lists agree: points bit-equal, coefficients within tol
bool measure_close(const MolecularMeasure<double>& a, const MolecularMeasure<double>& b,
                   double tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a.atoms()[i].point == b.atoms()[i].point)) return false;
        if (std::fabs(a.atoms()[i].coeff - b.atoms()[i].coeff) > tol) return false;
    }
    return true;
}

} // namespace

TEST_CASE("point masses and total variation") {
    auto m = point_mass(real(0.0));
    CHECK(m.size() == 1);
    CHECK(m.atoms()[0].coeff == 1.0);
    CHECK(m.total_variation() == 1.0);

    auto ma = point_mass(aff(2, 3));
    CHECK(ma.atoms()[0].point == aff(2, 3));
    CHECK(ma.total_variation() == 1.0);

    CHECK(MolecularMeasure<double>(kReal).empty());
}

TEST_CASE("combine canonicalizes") {
    auto diff = combine<double>({{1.0, point_mass(real(0.25))}, {-1.0, point_mass(real(0.0))}});
    auto scaled = scale(2.0, diff);
    REQUIRE(scaled.size() == 2);
    CHECK(scaled.atoms()[0].point == real(0.0));
    CHECK(scaled.atoms()[0].coeff == -2.0);
    CHECK(scaled.atoms()[1].point == real(0.25));
    CHECK(scaled.atoms()[1].coeff == 2.0);

    auto cancelled = combine<double>({{1.0, point_mass(real(0.0))}, {-1.0, point_mass(real(0.0))}});
    CHECK(cancelled.empty());
    CHECK(cancelled.total_variation() == 0.0);

    // m_j = j(δ(1/j²) − δ(0)) at j = 3, exactly
    const int j = 3;
    auto mj = combine<Rational>({{Rational(j), point_mass(ratline(1, j * j))},
                                 {Rational(-j), point_mass(ratline(0))}});
    REQUIRE(mj.size() == 2);
    CHECK(mj.atoms()[0].point == ratline(0));
    CHECK(mj.atoms()[0].coeff == Rational(-3));
    CHECK(mj.atoms()[1].point == ratline(1, 9));
    CHECK(mj.atoms()[1].coeff == Rational(3));

    CHECK(mj.total_variation() == Rational(6));
    CHECK(mj.total_variation() >= scalar_abs(mj.total_mass()));
    CHECK_THROWS_AS(combine<double>({{1.0, point_mass(real(0))}, {1.0, point_mass(wrd("a"))}}),
                    PreconditionError);
}

TEST_CASE("optional merge tolerance for float payloads") {
    std::vector<Atom<double>> atoms{{real(1.0), 1.0}, {real(1.0 + 1e-12), 2.0}};
    MolecularMeasure<double> strict(kReal, atoms);
    CHECK(strict.size() == 2);
    MolecularMeasure<double> merged(kReal, atoms, 1e-9);
    CHECK(merged.size() == 1);
    CHECK(merged.atoms()[0].coeff == 3.0);
}

TEST_CASE("convolution") {
    CHECK(convolve(point_mass(real(1.0)), point_mass(real(2.0))) == point_mass(real(3.0)));

    // m_j⋆n_j = j²(δ(2/j²) − 2δ(1/j²) + δ(0)) at j = 2
    const int j = 2;
    auto mj = combine<Rational>({{Rational(j), point_mass(ratline(1, j * j))},
                                 {Rational(-j), point_mass(ratline(0))}});
    auto conv = convolve(mj, mj);
    REQUIRE(conv.size() == 3);
    CHECK(conv.atoms()[0].point == ratline(0));
    CHECK(conv.atoms()[0].coeff == Rational(4));
    CHECK(conv.atoms()[1].point == ratline(1, 4));
    CHECK(conv.atoms()[1].coeff == Rational(-8));
    CHECK(conv.atoms()[2].point == ratline(1, 2));
    CHECK(conv.atoms()[2].coeff == Rational(4));

    Rng rng(41);
    for (const auto& tag : {kReal, kAffine, kFree2}) {
        const auto e = point_mass(identity<double>(tag));
        for (int i = 0; i < 100; ++i) {
            auto m = random_measure<double>(rng.bits(), tag, 4, 3.0, 2.0);
            CHECK(convolve(e, m) == m);
            CHECK(convolve(m, e) == m);
        }
    }
}

TEST_CASE("convolution total variation bound") {
    Rng rng(42);
    for (int i = 0; i < 300; ++i) {
        auto m = random_measure<double>(rng.bits(), kReal, 4, 2.0, 3.0);
        auto n = random_measure<double>(rng.bits(), kReal, 4, 2.0, 3.0);
        auto c = convolve(m, n);
        CHECK(to_double(c.total_variation()) <=
              to_double(m.total_variation()) * to_double(n.total_variation()) + 1e-9);
        if (c.size() == m.size() * n.size())
            CHECK(to_double(c.total_variation()) ==
                  doctest::Approx(to_double(m.total_variation()) * to_double(n.total_variation()))
                      .epsilon(1e-12));
    }
}

TEST_CASE("bilinearity and associativity") {
    Rng rng(43);
    // exact, on the rational payloads
    for (int i = 0; i < 300; ++i) {
        auto m1 = random_measure<Rational>(rng.bits(), kReal, 3, 2.0, 2.0);
        auto m2 = random_measure<Rational>(rng.bits(), kReal, 3, 2.0, 2.0);
        auto n = random_measure<Rational>(rng.bits(), kReal, 3, 2.0, 2.0);
        auto p = random_measure<Rational>(rng.bits(), kReal, 3, 2.0, 2.0);
        const Rational alpha = Rational(3, 2), beta = Rational(-2, 3);

        auto lhs = convolve(combine<Rational>({{alpha, m1}, {beta, m2}}), n);
        auto rhs = combine<Rational>({{alpha, convolve(m1, n)}, {beta, convolve(m2, n)}});
        CHECK(lhs == rhs);

        CHECK(convolve(convolve(m1, n), p) == convolve(m1, convolve(n, p)));
    }
    // float associativity: products drift by rounding, so match sorted atom
    // lists within tolerance instead of bitwise
    auto close_after_drift = [](const MolecularMeasure<double>& a,
                                const MolecularMeasure<double>& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const auto& pa = a.atoms()[i].point;
            const auto& pb = b.atoms()[i].point;
            double gap = 0;
            switch (a.tag().kind) {
                case GroupKind::RealLine: gap = std::fabs(pa.scalar() - pb.scalar()); break;
                case GroupKind::Affine:
                    gap = std::max(std::fabs(pa.affine().scale - pb.affine().scale),
                                   std::fabs(pa.affine().shift - pb.affine().shift));
                    break;
                default: gap = (pa == pb) ? 0 : 1;
            }
            if (gap > 1e-9 || std::fabs(a.atoms()[i].coeff - b.atoms()[i].coeff) > 1e-9)
                return false;
        }
        return true;
    };
    for (const auto& tag : {kReal, kAffine, kFree2}) {
        for (int i = 0; i < 100; ++i) {
            auto m = random_measure<double>(rng.bits(), tag, 4, 2.0, 2.0);
            auto n = random_measure<double>(rng.bits(), tag, 4, 2.0, 2.0);
            auto p = random_measure<double>(rng.bits(), tag, 4, 2.0, 2.0);
            CHECK(close_after_drift(convolve(convolve(m, n), p), convolve(m, convolve(n, p))));
        }
    }
    // float payloads: identical products, coefficients within 1e-9
    for (const auto& tag : {kReal, kVec2, kAffine, kFree2}) {
        for (int i = 0; i < 100; ++i) {
            auto m1 = random_measure<double>(rng.bits(), tag, 3, 2.0, 2.0);
            auto m2 = random_measure<double>(rng.bits(), tag, 3, 2.0, 2.0);
            auto n = random_measure<double>(rng.bits(), tag, 3, 2.0, 2.0);
            auto lhs = convolve(combine<double>({{0.5, m1}, {-2.0, m2}}), n);
            auto rhs = combine<double>({{0.5, convolve(m1, n)}, {-2.0, convolve(m2, n)}});
            CHECK(measure_close(lhs, rhs, 1e-9));
        }
    }
}

TEST_CASE("integration") {
    auto x = real(1.5);
    SampledFunction<double> f({x}, {0.7}, 1.0);
    CHECK(integrate(point_mass(x), f) == 0.7);

    CHECK(integrate(MolecularMeasure<double>(kReal), f) == 0.0);

    // m_j⋆n_j paired with f_j(x) = min(1, |x − 1/j²|) gives 2, at j = 2
    const int j = 2;
    auto mj = combine<Rational>({{Rational(j), point_mass(ratline(1, j * j))},
                                 {Rational(-j), point_mass(ratline(0))}});
    auto conv = convolve(mj, mj);
    const Rational step(1, j * j);
    SampledFunction<Rational> fj({ratline(0), ratline(1, 4), ratline(1, 2)},
                                 {step, Rational(0), step}, Rational(1));
    CHECK(integrate(conv, fj) == Rational(2));

    SampledFunction<double> narrow({real(0.0)}, {0.5}, 1.0);
    CHECK_THROWS_AS(integrate(point_mass(real(1.0)), narrow), PreconditionError);
}

TEST_CASE("sampled function validation") {
    CHECK_THROWS_AS(SampledFunction<double>({real(0)}, {1.5}, 1.0), PreconditionError);
    CHECK_THROWS_AS(SampledFunction<double>({real(0), real(0)}, {0.5, 0.5}, 1.0),
                    PreconditionError);
    CHECK_THROWS_AS(SampledFunction<double>({real(0)}, {}, 1.0), PreconditionError);
    SampledFunction<double> wide({real(0)}, {1.5}, 2.0);
    CHECK(wide.bound() == 2.0);
}

TEST_CASE("bullet action") {
    auto f = [](const GroupElement<double>& g) {
        return std::clamp(g.scalar(), -1.0, 1.0);
    };
    auto n1 = point_mass(real(0.75));
    CHECK(bullet<double>(n1, f, real(0.5)) == f(real(1.25)));

    auto n = combine<double>({{1.0, point_mass(real(1.0))}, {-1.0, point_mass(real(0.0))}});
    CHECK(bullet<double>(n, f, real(0.0)) == 1.0);
}

TEST_CASE("Fubini reversal on random molecular instances") {
    Rng rng(44);
    // float mode, several groups, f given by a closed-form Lipschitz recipe
    for (const auto& tag : {kReal, kVec2, kAffine, kFree2}) {
        const auto d = tag.kind == GroupKind::FreeGroup
                           ? discrete2_metric<double>()
                           : (tag.kind == GroupKind::Affine ? affine_hyperbolic_right_metric<double>()
                                                            : euclidean_metric<double>(tag));
        for (int i = 0; i < 100; ++i) {
            auto m = random_measure<double>(rng.bits(), tag, 4, 2.0, 1.5);
            auto n = random_measure<double>(rng.bits(), tag, 4, 2.0, 1.5);
            // f: 1-Lipschitz distance to a random anchor, clipped into [-1,1]
            const auto anchor = random_element<double>(rng, tag, 1.5);
            auto f = [&](const GroupElement<double>& g) {
                return std::min(1.0, to_double(d(g, anchor)));
            };

            auto conv = convolve(m, n);
            std::vector<double> values;
            for (const auto& a : conv.atoms()) values.push_back(f(a.point));
            SampledFunction<double> fs(conv.support(), values, 1.0);
            const double direct = to_double(integrate(conv, fs));

            const double via_bullet =
                [&] {
                    double total = 0;
                    for (const auto& a : m.atoms())
                        total += a.coeff * to_double(bullet<double>(n, f, a.point));
                    return total;
                }();

            double reversed = 0; // n(y ↦ m(x ↦ f(xy)))
            for (const auto& b : n.atoms()) {
                double inner = 0;
                for (const auto& a : m.atoms())
                    inner += a.coeff * f(multiply(a.point, b.point));
                reversed += b.coeff * inner;
            }

            CHECK(std::fabs(direct - via_bullet) <= 1e-9);
            CHECK(std::fabs(direct - reversed) <= 1e-9);
        }
    }
    // exact mode: equality on the nose
    for (int i = 0; i < 200; ++i) {
        auto m = random_measure<Rational>(rng.bits(), kReal, 4, 2.0, 2.0);
        auto n = random_measure<Rational>(rng.bits(), kReal, 4, 2.0, 2.0);
        const auto anchor = random_element<Rational>(rng, kReal, 1.5);
        auto f = [&](const GroupElement<Rational>& g) {
            return scalar_min(Rational(1), scalar_abs(Rational(g.scalar() - anchor.scalar())));
        };
        auto conv = convolve(m, n);
        std::vector<Rational> values;
        for (const auto& a : conv.atoms()) values.push_back(f(a.point));
        SampledFunction<Rational> fs(conv.support(), values, Rational(1));
        const Rational direct = integrate(conv, fs);

        Rational reversed(0);
        for (const auto& b : n.atoms()) {
            Rational inner(0);
            for (const auto& a : m.atoms()) inner += a.coeff * f(multiply(a.point, b.point));
            reversed += b.coeff * inner;
        }
        Rational via_bullet(0);
        for (const auto& a : m.atoms())
            via_bullet += a.coeff * bullet<Rational>(n, f, a.point);

        CHECK(direct == reversed);
        CHECK(direct == via_bullet);
    }
}

TEST_CASE("measure JSON round-trip") {
    Rng rng(45);
    for (const auto& tag : {kReal, kVec2, kAffine, kFree2}) {
        for (int i = 0; i < 50; ++i) {
            auto m = random_measure<double>(rng.bits(), tag, 4, 3.0, 2.0);
            auto j = measure_to_json(m);
            auto back = measure_from_json<double>(nlohmann::json::parse(j.dump()));
            CHECK(back == m); // shortest-repr doubles round-trip bit-exactly
        }
        for (int i = 0; i < 50; ++i) {
            auto m = random_measure<Rational>(rng.bits(), tag, 4, 3.0, 2.0);
            auto j = measure_to_json(m);
            auto back = measure_from_json<Rational>(nlohmann::json::parse(j.dump()));
            CHECK(back == m);
        }
    }
}

TEST_CASE("measure JSON rejects malformed input") {
    CHECK_THROWS_AS(measure_from_json<double>(nlohmann::json::parse("[]")), ParseError);
    CHECK_THROWS_AS(measure_from_json<double>(nlohmann::json::parse("{\"group\":\"real\"}")),
                    ParseError);
    CHECK_THROWS_AS(
        measure_from_json<double>(nlohmann::json::parse(
            R"({"group":"real","atoms":[{"point":1.0}]})")),
        ParseError);
    CHECK_THROWS_AS(
        measure_from_json<double>(nlohmann::json::parse(
            R"({"group":"nowhere","atoms":[]})")),
        ParseError);
    // exact mode refuses bare floats: binary expansion surprises are errors
    CHECK_THROWS_AS(
        measure_from_json<Rational>(nlohmann::json::parse(
            R"({"group":"real","atoms":[{"point":0.1,"coeff":1}]})")),
        ParseError);
    CHECK(measure_from_json<Rational>(nlohmann::json::parse(
              R"({"group":"real","atoms":[{"point":"1/10","coeff":1}]})"))
              .atoms()[0]
              .point.scalar() == Rational(1, 10));
}
