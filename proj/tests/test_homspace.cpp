#include <doctest.h>

#include <cmath>

#include "homconj/families.hpp"
#include "homconj/homspace.hpp"

using namespace homconj;

namespace {

Gauge sqrt_gauge() { return Gauge::radial(GrowthFn(FnKind::sqrt_plus), Norm::euclidean, 2.0, 0.5, 1.0); }
Gauge linear_gauge(Norm n = Norm::euclidean) { return Gauge::radial(GrowthFn(FnKind::linear_plus), n, 2.0, 0.5, 1.0); }

std::shared_ptr<const SampleSet> line_samples(int grid = 401) {
    SampleScheme s;
    s.grid_points_per_axis = grid;
    return std::make_shared<const SampleSet>(Domain::whole_space(1), s);
}

PremetricContext line_ctx() {
    return PremetricContext(linear_gauge(), ScaleFn(FnKind::identity), CrossConstants(1.0, 1.0), line_samples());
}

Homeo shift(double c) { return translation(scalar_point(c)); }

} // namespace

TEST_CASE("homeo chains") {
    const Homeo f = shift(1.0);
    const Homeo g = pure_linear(Domain::whole_space(1), 2.0);
    const Point x = scalar_point(3.0);

    CHECK(compose(f, g)(x)(0) == 7.0);
    CHECK(compose(g, f)(x)(0) == 8.0);
    CHECK(compose(f, g).inverse(scalar_point(7.0))(0) == 3.0);
    CHECK(invert(g)(x)(0) == 1.5);
    CHECK(power(f, 5)(x)(0) == 8.0);
    CHECK(power(f, -2)(x)(0) == 1.0);
    CHECK(power(f, 0).is_identity_chain());

    const Homeo loop = compose(compose(f, g), compose(invert(g), invert(f)));
    CHECK(loop.chain_length() == 4);
    CHECK(loop.reduced().is_identity_chain());
    CHECK(compose(f, invert(f)).reduced().is_identity_chain());

    const Homeo id(Domain::whole_space(1));
    CHECK(id(x)(0) == 3.0);
    CHECK(id.label() == "id");

    const Homeo h = pure_linear(Domain::half_line(), 0.5);
    CHECK_THROWS_AS(compose(f, h), DomainMismatch);
}

TEST_CASE("round trip") {
    const auto samples = line_samples(101);
    const auto cloud = samples->all();
    CHECK(check_round_trip(shift(2.5), cloud, 1e-12).passed);
    const Homeo bad(Domain::whole_space(1), "bad", [](const Point& x) { return Point(2.0 * x); },
                    [](const Point& x) { return Point(x); });
    const RoundTripReport rep = check_round_trip(bad, cloud, 1e-8);
    CHECK_FALSE(rep.passed);
    CHECK(rep.worst_error > 0.1);
    const Homeo escape(Domain::half_line(), "escape", [](const Point& x) { return Point(x.array() - 1.0); },
                       [](const Point& x) { return Point(x.array() + 1.0); });
    const SampleSet h(Domain::half_line(), SampleScheme{});
    const RoundTripReport esc = check_round_trip(escape, h.all(), 1e-8);
    CHECK(esc.range_failures > 0);
    CHECK_FALSE(esc.passed);
}

TEST_CASE("displacement") {
    const auto samples = line_samples();
    const ScaleFn r(FnKind::identity);

    SUBCASE("identity is exactly zero") {
        const auto d = displacement(Homeo(Domain::whole_space(1)), linear_gauge(), r, *samples);
        CHECK(d.value == 0.0);
        CHECK(d.finiteness == Finiteness::finite);
        const auto d2 = displacement(compose(shift(1.0), shift(-1.0)), linear_gauge(), r, *samples);
        CHECK(d2.value == 0.0);
    }
    SUBCASE("logarithmic perturbation is finite") {
        const Perturbation p = log_perturbation(0.5);
        const Homeo f = build_perturbed_linear(Matrix::Identity(1, 1), p);
        const auto d = displacement(f, linear_gauge(), r, *samples);
        CHECK(d.finiteness == Finiteness::finite);
        double dense = 0.0;
        for (int i = 0; i <= 200000; ++i) {
            const double x = 1e-3 * i;
            dense = std::max(dense, 0.5 * std::log1p(x * x) / (x + 1.0));
        }
        CHECK(d.value <= dense + 1e-12);
        CHECK(d.value == doctest::Approx(dense).epsilon(1e-3));
    }
    SUBCASE("contraction against the sqrt gauge diverges") {
        const SampleSet h(Domain::half_line(), SampleScheme{});
        const auto d = displacement(pure_linear(Domain::half_line(), 0.25), sqrt_gauge(), r, h);
        CHECK(d.finiteness == Finiteness::divergent);
        CHECK(std::isinf(d.extended()));
    }
    SUBCASE("translation attains its sup at the origin") {
        const auto d = displacement(shift(1.0), linear_gauge(), r, *samples);
        CHECK(d.value == 1.0);
        CHECK(d.argmax(0) == 0.0);
    }
}

TEST_CASE("premetric") {
    const PremetricContext ctx = line_ctx();
    SUBCASE("rho(f, f) vanishes even when |f| diverges") {
        const SampleSet h(Domain::half_line(), SampleScheme{});
        const Homeo f = pure_linear(Domain::half_line(), 0.25);
        CHECK(displacement(f, sqrt_gauge(), ScaleFn(FnKind::identity), h).finiteness == Finiteness::divergent);
        const auto p = premetric(f, f, sqrt_gauge(), ScaleFn(FnKind::identity), h);
        CHECK(p.rho == 0.0);
        CHECK(p.finiteness == Finiteness::finite);
    }
    SUBCASE("translations") {
        const auto p = premetric(shift(1.0), shift(2.0), ctx);
        CHECK(p.rho == 1.0);
        CHECK(p.left_part.value == 1.0);
        CHECK(p.right_part.value == 1.0);
    }
    SUBCASE("rho(id, g) is the larger of |g| and |g^-1|") {
        const Homeo g = build_perturbed_linear(Matrix::Identity(1, 1), log_perturbation(0.3));
        const auto p = premetric(Homeo(Domain::whole_space(1)), g, ctx);
        const double dg = displacement(g, ctx).value;
        const double dgi = displacement(invert(g), ctx).value;
        CHECK(p.rho == doctest::Approx(std::max(dg, dgi)).epsilon(1e-12));
    }
}

TEST_CASE("Koopman bound constant") {
    const Gauge phi = sqrt_gauge();
    const CrossConstants cross(1.0, 1.25);
    SupEstimate d;
    d.value = 0.0;
    CHECK(koopman_lambda(d, phi, cross) == doctest::Approx(6.5));
    d.value = 1.0;
    CHECK(koopman_lambda(d, phi, cross) == doctest::Approx(8.5));
    d.finiteness = Finiteness::divergent;
    CHECK_THROWS_AS(koopman_lambda(d, phi, cross), DivergentEstimate);
    d.finiteness = Finiteness::undetermined;
    CHECK_THROWS_AS(koopman_lambda(d, phi, cross), DivergentEstimate);
}

TEST_CASE("relaxed triangle") {
    const PremetricContext ctx = line_ctx();
    CHECK(ctx.constant_A() == doctest::Approx(6.0));
    CHECK(ctx.linear_coefficient() == doctest::Approx(6.0));
    CHECK(ctx.product_coefficient() == doctest::Approx(2.0));

    const Homeo f = shift(0.3);
    const Homeo g = shift(-1.1);
    SUBCASE("h = f") {
        const auto rep = check_relaxed_triangle(f, g, f, ctx);
        CHECK(rep.passed);
        CHECK(rep.slack() >= 0.0);
    }
    SUBCASE("translation triple has positive slack") {
        const auto rep = check_relaxed_triangle(f, g, shift(2.0), ctx);
        CHECK(rep.passed);
        CHECK(rep.slack() > 0.0);
    }
    SUBCASE("divergent right side is vacuous") {
        const Homeo cube(Domain::whole_space(1), "cube", [](const Point& x) { return Point(x.array().cube()); },
                         [](const Point& x) { return scalar_point(std::cbrt(x(0))); });
        const auto rep = check_relaxed_triangle(f, g, cube, ctx);
        CHECK(rep.passed);
        CHECK(rep.vacuous);
    }
}

TEST_CASE("group membership") {
    const ScaleFn r(FnKind::identity);
    SUBCASE("Lozi is a member") {
        SampleScheme s;
        s.window_radius = 50.0;
        s.grid_points_per_axis = 61;
        const SampleSet samples(Domain::whole_space(2), s);
        const auto m = group_membership(build_lozi(1.7, 0.5), linear_gauge(), r, samples);
        CHECK(m.verdict == MembershipVerdict::member);
    }
    SUBCASE("contraction is not a member for the sqrt gauge") {
        const SampleSet samples(Domain::half_line(), SampleScheme{});
        const auto m = group_membership(pure_linear(Domain::half_line(), 0.25), sqrt_gauge(), r, samples);
        CHECK(m.verdict == MembershipVerdict::non_member);
    }
    SUBCASE("identity is a member") {
        const auto m = group_membership(Homeo(Domain::whole_space(1)), linear_gauge(), r, *line_samples());
        CHECK(m.verdict == MembershipVerdict::member);
        CHECK(to_string(m.verdict) == "member");
    }
}

TEST_CASE("compact-convergence distance") {
    const auto samples = line_samples();
    const Homeo id(Domain::whole_space(1));
    CHECK(compact_delta(id, shift(1.0), *samples) == doctest::Approx(0.9375));
    CHECK(compact_convergence_distance(id, shift(1.0), *samples) == doctest::Approx(1.875));
    CHECK(compact_convergence_distance(shift(1.0), shift(1.0), *samples) == 0.0);
    CHECK_THROWS_AS(compact_delta(id, Homeo(Domain::half_line()), *samples), DomainMismatch);
}

TEST_CASE("inner ball radius") {
    const PremetricContext ctx = line_ctx();
    CHECK(inner_ball_radius(0.0, 1.0, ctx) == 1.0);
    CHECK(inner_ball_radius(0.1, 1.0, ctx) == doctest::Approx((1.0 - 0.6) / 1.2));
    CHECK_THROWS_AS(inner_ball_radius(0.2, 1.0, ctx), PreconditionError);
}
