#include "homconj/homspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace homconj {

double PremetricEstimate::extended() const {
    return finiteness == Finiteness::divergent ? std::numeric_limits<double>::infinity() : rho;
}

PremetricContext::PremetricContext(Gauge phi_, ScaleFn r_, CrossConstants cross_,
                                   std::shared_ptr<const SampleSet> samples_, Tolerances tol_)
    : phi(std::move(phi_)), r(std::move(r_)), cross(cross_), samples(std::move(samples_)), tol(tol_) {
    if (!samples) throw std::invalid_argument("premetric context needs a sample set");
}

double PremetricContext::product_coefficient() const { return cross.a * phi.beta(); }

double PremetricContext::linear_coefficient() const {
    return cross.b * phi.beta() / phi.m() + phi.beta() / phi.gamma();
}

double PremetricContext::constant_A() const { return std::max(product_coefficient(), linear_coefficient()); }

std::optional<Point> evaluate_in_domain(const Homeo& f, const Point& x) {
    const Domain& dom = f.domain();
    Point y = x;
    for (const Atom& a : f.chain()) {
        y = a.apply(y);
        if (!y.allFinite()) throw EvaluationError(f.label() + " is not finite at " + to_string(x));
        if (!dom.contains(y)) return std::nullopt;
    }
    return y;
}

DisplacementEstimate displacement(const Homeo& f, const Gauge& phi, const ScaleFn& r, const SampleSet& samples,
                                  const Tolerances& tol) {
    if (!(f.domain() == samples.domain())) throw DomainMismatch("sample set and map " + f.label() + " differ in domain");
    const Homeo red = f.reduced();
    const Domain& dom = f.domain();
    if (red.is_identity_chain()) {
        return windowed_sup(samples, [](const Point&) -> std::optional<double> { return 0.0; }, tol.kappa_div);
    }
    return windowed_sup(
        samples,
        [&](const Point& x) -> std::optional<double> {
            const std::optional<Point> y = evaluate_in_domain(red, x);
            if (!y) return std::nullopt;
            return r(dom.norm_of(*y - x)) / phi(x);
        },
        tol.kappa_div, tol.abs);
}

DisplacementEstimate displacement(const Homeo& f, const PremetricContext& ctx) {
    return displacement(f, ctx.phi, ctx.r, *ctx.samples, ctx.tol);
}

PremetricEstimate premetric(const Homeo& f, const Homeo& g, const Gauge& phi, const ScaleFn& r,
                            const SampleSet& samples, const Tolerances& tol) {
    PremetricEstimate est;
    est.left_part = displacement(compose(f, g.inverted()), phi, r, samples, tol);
    est.right_part = displacement(compose(f.inverted(), g), phi, r, samples, tol);
    est.rho = std::max(est.left_part.value, est.right_part.value);
    est.finiteness = combine(est.left_part.finiteness, est.right_part.finiteness);
    return est;
}

PremetricEstimate premetric(const Homeo& f, const Homeo& g, const PremetricContext& ctx) {
    return premetric(f, g, ctx.phi, ctx.r, *ctx.samples, ctx.tol);
}

double koopman_lambda(const DisplacementEstimate& f_disp, const Gauge& phi, const CrossConstants& cross) {
    if (f_disp.finiteness != Finiteness::finite) {
        throw DivergentEstimate("Lambda(f) needs a finite displacement, got " + std::string(to_string(f_disp.finiteness)));
    }
    return cross.a * phi.beta() * f_disp.value + cross.b * phi.beta() / phi.m() + phi.beta() / phi.gamma();
}

InequalityReport check_relaxed_triangle(const Homeo& f, const Homeo& g, const Homeo& h,
                                        const PremetricContext& ctx) {
    const PremetricEstimate fg = premetric(f, g, ctx);
    const PremetricEstimate fh = premetric(f, h, ctx);
    const PremetricEstimate hg = premetric(h, g, ctx);

    InequalityReport rep;
    rep.name = "relaxed_triangle";
    rep.tau = ctx.tol.tri;
    rep.lhs = fg.rho;
    rep.rhs = ctx.product_coefficient() * fh.rho * hg.rho + ctx.linear_coefficient() * fh.rho + hg.rho;
    rep.vacuous = fh.finiteness == Finiteness::divergent || hg.finiteness == Finiteness::divergent;
    if (rep.vacuous) {
        rep.passed = true;
    } else if (fg.finiteness == Finiteness::divergent) {
        rep.passed = false;
    } else {
        rep.passed = rep.slack() >= 0.0;
    }
    if (!rep.passed) {
        std::ostringstream os;
        os << "f=" << f.label() << " g=" << g.label() << " h=" << h.label() << " at " << to_string(fg.left_part.argmax);
        rep.witness = os.str();
    }
    return rep;
}

std::string_view to_string(MembershipVerdict v) {
    switch (v) {
    case MembershipVerdict::member: return "member";
    case MembershipVerdict::non_member: return "non_member";
    case MembershipVerdict::undetermined: return "undetermined";
    }
    return "unknown";
}

MembershipReport group_membership(const Homeo& f, const Gauge& phi, const ScaleFn& r, const SampleSet& samples,
                                  const Tolerances& tol) {
    MembershipReport rep;
    rep.forward = displacement(f, phi, r, samples, tol);
    rep.inverse = displacement(f.inverted(), phi, r, samples, tol);
    switch (combine(rep.forward.finiteness, rep.inverse.finiteness)) {
    case Finiteness::finite: rep.verdict = MembershipVerdict::member; break;
    case Finiteness::divergent: rep.verdict = MembershipVerdict::non_member; break;
    case Finiteness::undetermined: rep.verdict = MembershipVerdict::undetermined; break;
    }
    return rep;
}

namespace {

double one_sided_delta(const Homeo& f, const Homeo& g, const SampleSet& samples) {
    const Homeo fr = f.reduced();
    const Homeo gr = g.reduced();
    const Domain& dom = samples.domain();
    double total = 0.0;
    const int kmax = samples.scheme().exhaustion_levels;
    for (int k = 0; k <= kmax; ++k) {
        double dk = 0.0;
        for (const Point& x : samples.exhaustion(k)) {
            const Point a = fr.forward(x);
            const Point b = gr.forward(x);
            if (!a.allFinite() || !b.allFinite()) throw EvaluationError("non-finite image at " + to_string(x));
            dk = std::max(dk, dom.norm_of(a - b));
        }
        total += std::ldexp(1.0, -k) * dk / (1.0 + dk);
    }
    return total;
}

} // namespace

double compact_delta(const Homeo& f, const Homeo& g, const SampleSet& samples) {
    if (!(f.domain() == g.domain())) throw DomainMismatch("compact distance between maps on different domains");
    return one_sided_delta(f, g, samples);
}

double compact_convergence_distance(const Homeo& f, const Homeo& g, const SampleSet& samples) {
    return compact_delta(f, g, samples) + compact_delta(f.inverted(), g.inverted(), samples);
}

double inner_ball_radius(double rho_fg, double alpha_star, const PremetricContext& ctx) {
    const double c = ctx.linear_coefficient();
    if (!(alpha_star > 0.0) || !(rho_fg >= 0.0) || !(rho_fg < alpha_star / c)) {
        throw PreconditionError("inner ball needs 0 <= rho(f,g) < alpha*/c");
    }
    return (alpha_star - c * rho_fg) / (1.0 + ctx.product_coefficient() * rho_fg);
}

} // namespace homconj
