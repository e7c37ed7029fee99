#include "homconj/conjugacy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace homconj {

Homeo conjugacy_operator(const Homeo& f, const Homeo& g, const Homeo& h) {
    return compose(f, compose(h, g.inverted()));
}

Homeo conjugacy_operator_inverse(const Homeo& f, const Homeo& g, const Homeo& h) {
    return compose(f.inverted(), compose(h, g));
}

Homeo conjugacy_iterate(const Homeo& f, const Homeo& g, const Homeo& h0, int n) {
    Homeo h = h0;
    for (int i = 0; i < std::abs(n); ++i) h = n > 0 ? conjugacy_operator(f, g, h) : conjugacy_operator_inverse(f, g, h);
    return h;
}

double GateConstants::threshold() const { return std::min(1.0, 1.0 / A); }

bool GateConstants::passes() const { return delta_finiteness == Finiteness::finite && delta < threshold(); }

GateConstants GateConstants::from(const Gauge& phi, const CrossConstants& cross, double delta, double alpha) {
    if (!(alpha > 1.0)) throw PreconditionError("contraction factor needs alpha > 1");
    GateConstants gc;
    gc.a = cross.a;
    gc.b = cross.b;
    gc.beta = phi.beta();
    gc.gamma = phi.gamma();
    gc.m = phi.m();
    gc.A = std::max(gc.a * gc.beta, gc.b * gc.beta / gc.m + gc.beta / gc.gamma);
    gc.delta = delta;
    gc.C = 1.0 / alpha;
    return gc;
}

InequalityReport contraction_check(const Homeo& f, const Homeo& g, const Homeo& h1, const Homeo& h2, double alpha,
                                   const PremetricContext& ctx) {
    if (!(alpha > 1.0)) throw PreconditionError("contraction check needs alpha > 1");
    const PremetricEstimate after = premetric(conjugacy_operator(f, g, h1), conjugacy_operator(f, g, h2), ctx);
    const PremetricEstimate before = premetric(h1, h2, ctx);
    InequalityReport rep;
    rep.name = "contraction";
    rep.tau = ctx.tol.contr;
    rep.lhs = after.rho;
    rep.rhs = before.rho / alpha;
    rep.vacuous = before.finiteness == Finiteness::divergent;
    if (rep.vacuous) {
        rep.passed = true;
    } else if (after.finiteness == Finiteness::divergent) {
        rep.passed = false;
    } else {
        rep.passed = rep.slack() >= 0.0;
    }
    if (!rep.passed) rep.witness = "h1=" + h1.label() + " h2=" + h2.label() + " at " + to_string(after.left_part.argmax);
    return rep;
}

// ---------------------------------------------------------------------------

namespace {

void check_fk_args(double epsilon, double C) {
    if (!(C > 0.0 && C < 1.0)) throw std::invalid_argument("F_k envelope needs 0 < C < 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("F_k envelope needs epsilon > 0");
}

double a_m_of(int m, double epsilon, double C) { return std::pow(C, m + 1) * (1.0 + 1.0 / epsilon) + C; }

double telescoped_of(int m, double epsilon, double C) {
    const double am = a_m_of(m, epsilon, C);
    if (!(am < 1.0)) return std::numeric_limits<double>::infinity();
    return std::pow(C, m) * (epsilon / (1.0 - am) + 1.0 / (1.0 - C));
}

} // namespace

FkEnvelope fk_envelope(int m, int n, double epsilon, double C, int k_max) {
    check_fk_args(epsilon, C);
    if (k_max < 0) throw std::invalid_argument("F_k envelope needs k_max >= 0");
    FkEnvelope env;
    env.m = m;
    env.n = n;
    env.epsilon = epsilon;
    env.C = C;
    env.F.reserve(static_cast<std::size_t>(k_max) + 1);
    env.F.push_back(epsilon);
    double ck = std::pow(C, m); // C^{m+k-1} at k = 1
    for (int k = 1; k <= k_max; ++k) {
        const double prev = env.F.back();
        env.F.push_back(ck * prev + ck + prev);
        ck *= C;
    }
    env.a_m = a_m_of(m, epsilon, C);
    env.telescoped = telescoped_of(m, epsilon, C);
    return env;
}

int FkThresholds::n_star() const { return std::max({N1, N2, N3}); }

FkThresholds fk_thresholds(double epsilon, double C, double delta) {
    check_fk_args(epsilon, C);
    if (!(delta >= 0.0)) throw std::invalid_argument("F_k thresholds need delta >= 0");
    constexpr int kLimit = 1'000'000;
    FkThresholds t;
    while (!(std::pow(C, t.N1) * delta < epsilon)) {
        if (++t.N1 > kLimit) throw std::logic_error("N1 not found");
    }
    while (!(a_m_of(t.N2, epsilon, C) < 1.0)) {
        if (++t.N2 > kLimit) throw std::logic_error("N2 not found");
    }
    t.N3 = t.N2;
    while (!(telescoped_of(t.N3, epsilon, C) <= epsilon)) {
        if (++t.N3 > kLimit) throw std::logic_error("N3 not found");
    }
    return t;
}

// ---------------------------------------------------------------------------

BoundReport negative_iterates_bound(const Homeo& f, const Homeo& g, const Homeo& h0, const std::vector<Point>& K,
                                    int n_bnd, const Tolerances& tol) {
    if (n_bnd < 0) throw std::invalid_argument("boundedness range must be nonnegative");
    if (K.empty()) throw PreconditionError("boundedness check needs a nonempty compact sample");
    const Norm nm = f.domain().norm();
    BoundReport rep;
    rep.per_n.assign(static_cast<std::size_t>(2 * n_bnd + 1), 0.0);
    auto sup_on_K = [&](const Homeo& h) {
        const Homeo hr = h.reduced();
        double s = 0.0;
        for (const Point& x : K) {
            const double v = norm(hr.forward(x), nm);
            if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
            s = std::max(s, v);
        }
        return s;
    };
    Homeo up = h0;
    Homeo down = h0;
    rep.per_n[static_cast<std::size_t>(n_bnd)] = sup_on_K(h0);
    for (int n = 1; n <= n_bnd; ++n) {
        up = conjugacy_operator(f, g, up);
        down = conjugacy_operator_inverse(f, g, down);
        rep.per_n[static_cast<std::size_t>(n_bnd + n)] = sup_on_K(up);
        rep.per_n[static_cast<std::size_t>(n_bnd - n)] = sup_on_K(down);
    }
    rep.bound = *std::max_element(rep.per_n.begin(), rep.per_n.end());
    double half = 0.0;
    for (int n = -n_bnd / 2; n <= n_bnd / 2; ++n) half = std::max(half, rep.per_n[static_cast<std::size_t>(n_bnd + n)]);
    if (!std::isfinite(rep.bound)) {
        rep.flagged = true;
        rep.reason = "non-finite iterate on the compact";
    } else if (rep.bound > tol.kappa_div * half && rep.bound > half + tol.abs) {
        rep.flagged = true;
        std::ostringstream os;
        os << "sup over |n| <= " << n_bnd << " is " << rep.bound << ", more than kappa times the sup " << half
           << " over |n| <= " << n_bnd / 2;
        rep.reason = os.str();
    }
    return rep;
}

double conjugacy_residual(const Homeo& f, const Homeo& g, const Homeo& h, const Gauge& phi, const ScaleFn& r,
                          const SampleSet& samples) {
    const Homeo fh = compose(f, h).reduced();
    const Homeo hg = compose(h, g).reduced();
    const Homeo gr = g.reduced();
    const Domain& dom = samples.domain();
    double worst = 0.0;
    for (int j = 0; j < samples.levels(); ++j) {
        for (const Point& x : samples.level(j)) {
            const std::optional<Point> a = evaluate_in_domain(fh, x);
            const std::optional<Point> b = evaluate_in_domain(hg, x);
            const std::optional<Point> gx = evaluate_in_domain(gr, x);
            if (!a || !b || !gx) continue;
            const double v = r(dom.norm_of(*a - *b)) / phi(*gx);
            if (!std::isfinite(v)) throw EvaluationError("non-finite conjugacy residual at " + to_string(x));
            worst = std::max(worst, v);
        }
    }
    return worst;
}

std::string_view to_string(PicardVerdict v) {
    switch (v) {
    case PicardVerdict::converged: return "converged";
    case PicardVerdict::gate_failed: return "gate_failed";
    case PicardVerdict::budget_exhausted: return "budget_exhausted";
    case PicardVerdict::unbounded_on_compacts: return "unbounded_on_compacts";
    }
    return "unknown";
}

namespace {

double sup_norm_on(const Homeo& h, const std::vector<Point>& K, Norm nm) {
    const Homeo hr = h.reduced();
    double s = 0.0;
    for (const Point& x : K) s = std::max(s, norm(hr.forward(x), nm));
    return s;
}

} // namespace

ConjugacyResult picard_solve(const Homeo& f, const Homeo& g, const Homeo& h0, const PremetricContext& ctx,
                             const PicardOptions& opts) {
    if (!(f.domain() == g.domain()) || !(f.domain() == h0.domain())) {
        throw DomainMismatch("picard_solve needs f, g and h0 on one domain");
    }
    if (opts.n_max < 1) throw std::invalid_argument("picard_solve needs n_max >= 1");
    const SampleSet& samples = *ctx.samples;
    const double tol_conj = ctx.tol.conj;
    ConjugacyResult res{.h = h0,
                        .trace = {},
                        .gates = {},
                        .eigen = std::nullopt,
                        .bound_K0 = std::nullopt,
                        .bound_Kmax = std::nullopt,
                        .failed_gate = {},
                        .gate_margin = 0.0,
                        .final_residual = 0.0,
                        .membership_h0 = std::nullopt,
                        .membership = std::nullopt,
                        .warnings = {}};
    IterationTrace& trace = res.trace;

    // Gate: P_alpha.
    try {
        res.eigen = check_P_alpha(f, g, ctx.phi, ctx.r, opts.alpha, samples, ctx.tol);
    } catch (const DivergentEstimate& e) {
        res.warnings.emplace_back(e.what());
    }
    if (!res.eigen || !res.eigen->satisfied) {
        trace.verdict = PicardVerdict::gate_failed;
        res.failed_gate = "P_alpha";
        res.gate_margin = res.eigen ? -std::min(res.eigen->min_slack_f, res.eigen->min_slack_g)
                                    : std::numeric_limits<double>::infinity();
        res.gates = GateConstants::from(ctx.phi, ctx.cross, 0.0, opts.alpha);
        return res;
    }

    // Gate (i): delta = rho(L(h0), h0) < min(1, 1/A).
    const PremetricEstimate d0 = premetric(conjugacy_operator(f, g, h0), h0, ctx);
    res.gates = GateConstants::from(ctx.phi, ctx.cross, d0.rho, opts.alpha);
    res.gates.delta_finiteness = d0.finiteness;
    if (!res.gates.passes()) {
        trace.verdict = PicardVerdict::gate_failed;
        res.failed_gate = "delta";
        res.gate_margin = d0.finiteness == Finiteness::divergent ? std::numeric_limits<double>::infinity()
                                                                 : d0.rho - res.gates.threshold();
        return res;
    }

    // Gate (ii): boundedness of {L^n(h0)} on K_0.
    const std::vector<Point> K0 = samples.exhaustion(0);
    res.bound_K0 = negative_iterates_bound(f, g, h0, K0, opts.n_bnd, ctx.tol);
    if (res.bound_K0->flagged) {
        trace.verdict = PicardVerdict::unbounded_on_compacts;
        res.failed_gate = "boundedness";
        res.gate_margin = res.bound_K0->bound;
        return res;
    }

    const Norm nm = f.domain().norm();
    std::vector<Homeo> iterates{h0};
    Homeo h_neg = h0;
    bool converged = false;
    for (int n = 0; n < opts.n_max; ++n) {
        const Homeo& h = iterates.back();
        Homeo next = conjugacy_operator(f, g, h);
        const PremetricEstimate inc = premetric(next, h, ctx);

        TraceStep step;
        step.n = n;
        step.rho_increment = inc.rho;
        step.increment_finiteness = inc.finiteness;
        step.conj_residual = conjugacy_residual(f, g, h, ctx.phi, ctx.r, samples);
        if (n > 0) h_neg = conjugacy_operator_inverse(f, g, h_neg);
        step.compact_bound = std::max(sup_norm_on(h, K0, nm), sup_norm_on(h_neg, K0, nm));
        step.fk_envelope = std::numeric_limits<double>::quiet_NaN();
        if (!trace.envelope_anchor && inc.finiteness == Finiteness::finite && inc.rho < 1.0 && inc.rho > 0.0) {
            trace.envelope_anchor = n;
            trace.envelope_epsilon = inc.rho;
        }
        trace.steps.push_back(step);

        if (inc.finiteness != Finiteness::divergent && inc.rho < tol_conj && step.conj_residual < tol_conj) {
            converged = true;
            break;
        }
        iterates.push_back(std::move(next));
    }
    res.h = iterates.back();
    res.final_residual = trace.steps.back().conj_residual;
    trace.verdict = converged ? PicardVerdict::converged : PicardVerdict::budget_exhausted;

    // F_k envelope column and the observed-vs-envelope checks.
    if (trace.envelope_anchor) {
        const int n0 = *trace.envelope_anchor;
        const double eps = trace.envelope_epsilon;
        const double C = res.gates.C;
        const int last = static_cast<int>(trace.steps.size()) - 1;
        const FkEnvelope anchor_env = fk_envelope(n0 + 1, n0, eps, C, std::max(0, last - n0));
        for (int n = n0; n <= last; ++n) {
            trace.steps[static_cast<std::size_t>(n)].fk_envelope = anchor_env.F[static_cast<std::size_t>(n - n0)];
        }
        if (opts.check_envelope) {
            const int top = static_cast<int>(iterates.size()) - 1;
            for (int n = n0; n < top; ++n) {
                if (!(trace.steps[static_cast<std::size_t>(n)].rho_increment <= eps)) continue;
                const FkEnvelope env = fk_envelope(n + 1, n, eps, C, top - n - 1);
                for (int k = 0; n + k + 1 <= top; ++k) {
                    EnvelopeCheck chk;
                    chk.n = n;
                    chk.k = k;
                    chk.observed = k == 0 ? trace.steps[static_cast<std::size_t>(n)].rho_increment
                                          : premetric(iterates[static_cast<std::size_t>(n + k + 1)],
                                                      iterates[static_cast<std::size_t>(n)], ctx)
                                                .rho;
                    chk.envelope = env.F[static_cast<std::size_t>(k)];
                    chk.passed = chk.observed <= chk.envelope + ctx.tol.env;
                    trace.envelope_ok = trace.envelope_ok && chk.passed;
                    trace.envelope_checks.push_back(chk);
                }
            }
        }
    }

    if (converged) {
        const int kmax = samples.scheme().exhaustion_levels;
        res.bound_Kmax = negative_iterates_bound(f, g, h0, samples.exhaustion(kmax), opts.n_bnd, ctx.tol);
        if (res.bound_Kmax->flagged) res.warnings.push_back("boundedness on the outer compact: " + res.bound_Kmax->reason);
    }
    res.membership_h0 = group_membership(h0, ctx.phi, ctx.r, samples, ctx.tol);
    res.membership = group_membership(res.h, ctx.phi, ctx.r, samples, ctx.tol);
    if (res.membership_h0->verdict == MembershipVerdict::member &&
        res.membership->verdict != MembershipVerdict::member) {
        res.warnings.emplace_back("an iterate is a group member but the limit is not classified as one");
    }
    return res;
}

} // namespace homconj
