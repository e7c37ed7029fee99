#include <doctest.h>

#include <cmath>
#include <set>

#include "homconj/funcspace.hpp"

using namespace homconj;

namespace {

Gauge sqrt_gauge() { return Gauge::radial(GrowthFn(FnKind::sqrt_plus), Norm::euclidean, 2.0, 0.5, 1.0); }

} // namespace

TEST_CASE("scalar functions") {
    CHECK(ScalarFn(FnKind::identity)(3.0) == 3.0);
    CHECK(ScalarFn(FnKind::sqrt_plus)(4.0) == 3.0);
    CHECK(ScalarFn(FnKind::linear_plus)(4.0) == 5.0);
    CHECK(ScalarFn::by_name("sqrt_plus").kind() == FnKind::sqrt_plus);
    CHECK_THROWS_AS(ScalarFn::by_name("cube"), std::invalid_argument);
    const ScalarFn sq("square", [](double u) { return u * u; });
    CHECK(sq(3.0) == 9.0);
    CHECK(sq.kind() == FnKind::user_closure);
    CHECK_THROWS_AS(CrossConstants(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("validate_scale_pair") {
    SampleScheme scheme;
    SUBCASE("sqrt growth with the 5/4 cross constant passes") {
        const auto rep = validate_scale_pair(GrowthFn(FnKind::sqrt_plus), ScaleFn(FnKind::identity),
                                             CrossConstants(1.0, 1.25), scheme);
        CHECK(rep.passed());
        CHECK(rep.at("cross").worst_slack >= 0.0);
    }
    SUBCASE("linear growth with unit constants passes") {
        const auto rep = validate_scale_pair(GrowthFn(FnKind::linear_plus), ScaleFn(FnKind::identity),
                                             CrossConstants(1.0, 1.0), scheme);
        CHECK(rep.passed());
    }
    SUBCASE("quadratic growth is not subadditive") {
        const GrowthFn sq(ScalarFn("square", [](double u) { return u * u; }));
        const auto rep = validate_scale_pair(sq, ScaleFn(FnKind::identity), CrossConstants(1.0, 1.0), scheme);
        CHECK_FALSE(rep.passed());
        CHECK_FALSE(rep.at("R_subadditive").passed);
        CHECK(rep.at("R_subadditive").worst_slack < 0.0);
    }
    SUBCASE("cross constant too small fails") {
        const auto rep = validate_scale_pair(GrowthFn(FnKind::sqrt_plus), ScaleFn(FnKind::identity),
                                             CrossConstants(1.0, 0.5), scheme);
        CHECK_FALSE(rep.at("cross").passed);
    }
    CHECK_THROWS_AS(ValidationReport{}.at("nope"), std::out_of_range);
}

TEST_CASE("gauge validation") {
    const SampleSet samples(Domain::half_line(), SampleScheme{});
    SUBCASE("sqrt gauge passes") {
        CHECK(validate_gauge(sqrt_gauge(), GrowthFn(FnKind::sqrt_plus), samples).passed());
    }
    SUBCASE("constant gauge violates the lower cone") {
        const Gauge one("one", [](const Point&) { return 1.0; }, 2.0, 0.5, 1.0);
        const auto rep = validate_gauge(one, GrowthFn(FnKind::sqrt_plus), samples);
        CHECK_FALSE(rep.at("G3_cone_lower").passed);
        CHECK(rep.at("G1_lower_bound").passed);
    }
    CHECK_THROWS_AS(Gauge::radial(GrowthFn(FnKind::sqrt_plus), Norm::euclidean, 1.0, 1.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(Gauge::radial(GrowthFn(FnKind::sqrt_plus), Norm::euclidean, 2.0, 0.5, 0.0),
                    std::invalid_argument);
}

TEST_CASE("domains") {
    const Domain h = Domain::half_line();
    CHECK(h.contains(scalar_point(0.0)));
    CHECK_FALSE(h.contains(scalar_point(-1e-12)));
    const Domain open = Domain::half_line(0.0, true);
    CHECK_FALSE(open.contains(scalar_point(0.0)));
    CHECK(open.contains(scalar_point(1e-300)));
    const Domain annulus = Domain::box_minus_ball({{-2, 2}, {-2, 2}}, 1.0);
    CHECK_FALSE(annulus.contains(make_point({0.5, 0.5})));
    CHECK(annulus.contains(make_point({1.5, 0.0})));
    CHECK_THROWS_AS(Domain::whole_space(0), std::invalid_argument);
    CHECK_THROWS_AS(Domain::whole_space(kMaxDim + 1), std::invalid_argument);
    CHECK_THROWS_AS(Domain::box({{1.0, 0.0}}), std::invalid_argument);
    CHECK(norm(make_point({3, -4}), Norm::sup) == 4.0);
    CHECK(norm(make_point({3, -4}), Norm::euclidean) == 5.0);
}

TEST_CASE("sample sets") {
    SampleScheme scheme;
    scheme.grid_points_per_axis = 41;
    scheme.quasirandom_count = 16;
    scheme.geometric_points = 8;
    scheme.seed = 11;
    const SampleSet s(Domain::whole_space(1), scheme);
    REQUIRE(s.levels() == kWindowDoublings + 1);

    SUBCASE("levels are nested shells") {
        for (int j = 1; j < s.levels(); ++j) {
            for (const Point& x : s.level(j)) {
                CHECK(std::abs(x(0)) > s.window_radius(j - 1));
                CHECK(std::abs(x(0)) <= s.window_radius(j));
            }
        }
        for (const Point& x : s.base()) CHECK(std::abs(x(0)) <= s.window_radius(0));
    }
    SUBCASE("exhaustion sets grow and respect their radius") {
        std::size_t prev = 0;
        for (int k = 0; k <= scheme.exhaustion_levels; ++k) {
            const auto K = s.exhaustion(k);
            CHECK(K.size() >= prev);
            prev = K.size();
            for (const Point& x : K) CHECK(std::abs(x(0)) <= std::ldexp(1.0, k));
        }
    }
    SUBCASE("same seed gives identical samples") {
        const SampleSet t(Domain::whole_space(1), scheme);
        const auto a = s.all();
        const auto b = t.all();
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i](0) == b[i](0));
    }
    SUBCASE("half-line samples stay in the domain") {
        const SampleSet h(Domain::half_line(0.0, true), scheme);
        for (const Point& x : h.all()) CHECK(x(0) > 0.0);
    }
    SUBCASE("invalid schemes are rejected") {
        SampleScheme bad;
        bad.window_radius = -1.0;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
        bad = SampleScheme{};
        bad.grid_points_per_axis = 0;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    }
}

TEST_CASE("rng and radical inverse") {
    Rng a(5);
    Rng b(5);
    for (int i = 0; i < 100; ++i) {
        const double u = a.uniform();
        CHECK(u == b.uniform());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK(radical_inverse(1, 2) == 0.5);
    CHECK(radical_inverse(3, 2) == 0.75);
    CHECK(radical_inverse(1, 3) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("growth classification") {
    auto trace = [](std::initializer_list<double> v) {
        std::vector<WindowSample> t;
        double w = 1.0;
        for (double e : v) {
            t.push_back({w, e});
            w *= 2.0;
        }
        return t;
    };
    CHECK(classify_growth(trace({1, 1, 1, 1}), 1.5) == Finiteness::finite);
    CHECK(classify_growth(trace({1, 2, 4, 8}), 1.5) == Finiteness::divergent);
    CHECK(classify_growth(trace({1, 2, 2, 8}), 1.5) == Finiteness::undetermined);
    CHECK(classify_growth(trace({0, 0, 0, 0}), 1.5) == Finiteness::finite);
    CHECK(classify_growth(trace({0, 0, 0, 1}), 1.5) == Finiteness::undetermined);
    CHECK(classify_growth(trace({1e-16, 1e-15, 2e-15, 5e-15}), 1.5, 1e-12) == Finiteness::finite);
    CHECK(classify_growth(trace({1e-16, 1e-15, 2e-15, 5e-15}), 1.5) == Finiteness::divergent);
    CHECK(combine(Finiteness::finite, Finiteness::divergent) == Finiteness::divergent);
    CHECK(combine(Finiteness::finite, Finiteness::undetermined) == Finiteness::undetermined);
    CHECK(combine(Finiteness::finite, Finiteness::finite) == Finiteness::finite);
    SupEstimate e;
    e.value = 3.0;
    e.finiteness = Finiteness::divergent;
    CHECK(std::isinf(e.extended()));
}

TEST_CASE("windowed_sup drops and rejects") {
    SampleScheme scheme;
    scheme.grid_points_per_axis = 11;
    const SampleSet s(Domain::whole_space(1), scheme);
    const auto est = windowed_sup(
        s, [](const Point& x) -> std::optional<double> {
            if (x(0) < 0.0) return std::nullopt;
            return 1.0;
        },
        1.5);
    CHECK(est.value == 1.0);
    CHECK(est.dropped > 0);
    CHECK(est.finiteness == Finiteness::finite);
    CHECK_THROWS_AS(windowed_sup(
                        s, [](const Point&) -> std::optional<double> { return std::nan(""); }, 1.5),
                    EvaluationError);
}
