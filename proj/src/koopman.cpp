#include "homconj/koopman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "homconj/homspace.hpp"

namespace homconj {

double RLipschitzEstimate::extended() const {
    return finiteness == Finiteness::divergent ? std::numeric_limits<double>::infinity() : value;
}

namespace {

struct Imaged {
    Point x;
    Point fx;
};

std::vector<Imaged> image_cloud(const Homeo& f, const std::vector<Point>& cloud) {
    std::vector<Imaged> out;
    out.reserve(cloud.size());
    for (const Point& x : cloud) {
        if (auto y = evaluate_in_domain(f, x)) out.push_back({x, *y});
    }
    return out;
}

} // namespace

RLipschitzEstimate r_lipschitz(const Homeo& f, const ScaleFn& r, const SampleSet& samples, const Tolerances& tol,
                               const LipschitzOptions& opts) {
    const Homeo red = f.reduced();
    const Domain& dom = samples.domain();
    RLipschitzEstimate est;
    double best = 0.0;
    bool have = false;

    auto observe = [&](const Point& x, const Point& fx, const Point& y, const Point& fy) {
        const double den = r(dom.norm_of(x - y));
        if (!(den > 0.0)) return;
        const double v = r(dom.norm_of(fx - fy)) / den;
        if (!std::isfinite(v)) throw EvaluationError("non-finite Lipschitz ratio at " + to_string(x));
        ++est.pair_count;
        if (!have || v > best) {
            best = v;
            est.witness_x = x;
            est.witness_y = y;
            have = true;
        }
    };

    for (int j = 0; j < samples.levels(); ++j) {
        const double w = samples.window_radius(j);
        const std::vector<Imaged> pts = image_cloud(red, samples.level(j));
        const std::size_t n = pts.size();
        const std::size_t total = n < 2 ? 0 : n * (n - 1) / 2;
        Rng rng(samples.scheme().seed ^ (0xa5a5a5a5ULL + static_cast<std::uint64_t>(j)));

        if (total <= opts.max_pairs) {
            for (std::size_t a = 0; a < n; ++a) {
                for (std::size_t b = a + 1; b < n; ++b) observe(pts[a].x, pts[a].fx, pts[b].x, pts[b].fx);
            }
        } else {
            // Index-neighbour pairs plus uniformly random pairs, half the cap each.
            const std::size_t stride = std::max<std::size_t>(1, opts.max_pairs / (2 * n));
            for (std::size_t a = 0; a < n; ++a) {
                for (std::size_t s = 1; s <= stride && a + s < n; ++s) observe(pts[a].x, pts[a].fx, pts[a + s].x, pts[a + s].fx);
            }
            for (std::size_t k = 0; k < opts.max_pairs / 2; ++k) {
                const std::size_t a = static_cast<std::size_t>(rng.next() % n);
                const std::size_t b = static_cast<std::size_t>(rng.next() % n);
                if (a != b) observe(pts[a].x, pts[a].fx, pts[b].x, pts[b].fx);
            }
        }

        // Close pairs: the ratio's sup is often approached as y -> x.
        const int d = dom.dim();
        for (const Imaged& p : pts) {
            for (std::size_t k = 0; k < opts.close_pairs_per_point; ++k) {
                Point u(d);
                for (int i = 0; i < d; ++i) u(i) = rng.uniform(-1.0, 1.0);
                const double un = dom.norm_of(u);
                if (un == 0.0) continue;
                const double t = w * std::pow(10.0, -rng.uniform(3.0, 8.0));
                const Point y = p.x + u * (t / un);
                if (!dom.contains(y) || dom.norm_of(y) > w) continue;
                if (auto fy = evaluate_in_domain(red, y)) observe(p.x, p.fx, y, *fy);
            }
        }
        est.window_trace.push_back({w, best});
    }
    est.value = best;
    est.finiteness = classify_growth(est.window_trace, tol.kappa_div, tol.abs);
    return est;
}

EigenReport check_eigen_inequalities(const Homeo& f, const Homeo& g, const Gauge& phi, double alpha, double lambda_f,
                                     double lambda_g, const SampleSet& samples, const Tolerances& tol) {
    EigenReport rep;
    rep.alpha = alpha;
    rep.lambda_f = lambda_f;
    rep.lambda_g = lambda_g;
    const Homeo fr = f.reduced();
    const Homeo gr = g.reduced();
    bool have_f = false;
    bool have_g = false;
    Point worst_f;
    Point worst_g;
    for (int j = 0; j < samples.levels(); ++j) {
        for (const Point& x : samples.level(j)) {
            const double px = phi(x);
            if (auto y = evaluate_in_domain(fr, x)) {
                const double s = phi(*y) - alpha * lambda_f * px;
                if (!have_f || s < rep.min_slack_f) {
                    rep.min_slack_f = s;
                    worst_f = x;
                    have_f = true;
                }
            } else {
                ++rep.dropped;
            }
            if (auto y = evaluate_in_domain(gr, x)) {
                const double s = phi(*y) - alpha * lambda_g * px;
                if (!have_g || s < rep.min_slack_g) {
                    rep.min_slack_g = s;
                    worst_g = x;
                    have_g = true;
                }
            } else {
                ++rep.dropped;
            }
        }
    }
    rep.worst_point = rep.min_slack_f <= rep.min_slack_g ? worst_f : worst_g;
    rep.satisfied = have_f && have_g && rep.min_slack_f >= -tol.abs && rep.min_slack_g >= -tol.abs;
    return rep;
}

EigenReport check_P_alpha(const Homeo& f, const Homeo& g, const Gauge& phi, const ScaleFn& r, double alpha,
                          const SampleSet& samples, const Tolerances& tol) {
    if (!(alpha > 1.0)) throw PreconditionError("P_alpha needs alpha > 1");
    const RLipschitzEstimate lf = r_lipschitz(f, r, samples, tol);
    const RLipschitzEstimate lg = r_lipschitz(g, r, samples, tol);
    if (lf.finiteness != Finiteness::finite) throw DivergentEstimate("lambda_r(" + f.label() + ") is not finite");
    if (lg.finiteness != Finiteness::finite) throw DivergentEstimate("lambda_r(" + g.label() + ") is not finite");
    return check_eigen_inequalities(f, g, phi, alpha, lf.value, lg.value, samples, tol);
}

std::string_view to_string(KoenigsStatus s) {
    switch (s) {
    case KoenigsStatus::converged: return "converged";
    case KoenigsStatus::diverged: return "diverged";
    case KoenigsStatus::budget_exhausted: return "budget_exhausted";
    }
    return "unknown";
}

KoenigsResult koenigs_eigenfunction(const Homeo& f, const Point& fixed_point, double multiplier, int n_max,
                                    const SampleSet& samples, const Tolerances& tol, int level) {
    if (!(multiplier > 0.0 && multiplier < 1.0)) throw PreconditionError("Koenigs multiplier must lie in (0, 1)");
    if (n_max < 1) throw PreconditionError("Koenigs needs n_max >= 1");
    const Domain& dom = samples.domain();
    const Homeo fr = f.reduced();
    const std::vector<Point> K = samples.exhaustion(level);
    if (K.empty()) throw PreconditionError("Koenigs compact has no samples");

    // y holds f^n(x); psi_n(x) = (y - x*) / multiplier^n.
    std::vector<Point> y = K;
    std::vector<Point> psi(K.size());
    double psi0 = 0.0;
    for (std::size_t i = 0; i < K.size(); ++i) {
        psi[i] = K[i] - fixed_point;
        psi0 = std::max(psi0, dom.norm_of(psi[i]));
    }
    const double blowup = 1e12 * std::max(1.0, psi0);

    KoenigsResult res;
    double scale = 1.0;
    for (int n = 1; n <= n_max; ++n) {
        scale *= multiplier;
        double inc = 0.0;
        double big = 0.0;
        for (std::size_t i = 0; i < K.size(); ++i) {
            y[i] = fr.forward(y[i]);
            if (!y[i].allFinite()) throw EvaluationError("Koenigs orbit is not finite from " + to_string(K[i]));
            Point next = (y[i] - fixed_point) / scale;
            inc = std::max(inc, dom.norm_of(next - psi[i]));
            big = std::max(big, dom.norm_of(next));
            psi[i] = std::move(next);
        }
        res.iterations = n;
        res.increment = inc;
        if (!(big <= blowup)) {
            res.status = KoenigsStatus::diverged;
            break;
        }
        if (inc < tol.koenigs) {
            res.status = KoenigsStatus::converged;
            break;
        }
    }

    const int n_final = res.iterations;
    const double lam_n = std::pow(multiplier, n_final);
    res.psi = [fr, fixed_point, lam_n, n_final](const Point& x) {
        Point z = x;
        for (int k = 0; k < n_final; ++k) z = fr.forward(z);
        return Point((z - fixed_point) / lam_n);
    };

    if (res.status == KoenigsStatus::converged) {
        double resid = 0.0;
        for (const Point& x : K) resid = std::max(resid, dom.norm_of(res.psi(fr.forward(x)) - multiplier * res.psi(x)));
        res.residual = resid;

        const int top = samples.scheme().exhaustion_levels;
        if (top >= 1) {
            auto sup_psi = [&](int k) {
                double s = 0.0;
                for (const Point& x : samples.exhaustion(k)) s = std::max(s, dom.norm_of(res.psi(x)));
                return s;
            };
            const double inner = sup_psi(top - 1);
            const double outer = sup_psi(top);
            if (inner > 0.0 && outer > 0.0) res.growth_exponent = std::log2(outer / inner);
        }
    } else {
        res.residual = std::numeric_limits<double>::infinity();
    }
    return res;
}

ResidualReport abel_check(const Homeo& f, const std::function<double(const Point&)>& varphi,
                          const std::vector<Point>& cloud) {
    ResidualReport rep;
    const Homeo fr = f.reduced();
    bool have = false;
    for (const Point& x : cloud) {
        const std::optional<Point> y = evaluate_in_domain(fr, x);
        if (!y) {
            ++rep.dropped;
            continue;
        }
        const double v = std::abs(varphi(*y) - varphi(x) - 1.0);
        if (!std::isfinite(v)) throw EvaluationError("Abel residual is not finite at " + to_string(x));
        ++rep.evaluated;
        if (!have || v > rep.sup_residual) {
            rep.sup_residual = v;
            rep.worst_point = x;
            have = true;
        }
    }
    return rep;
}

ResidualReport abel_check(const Homeo& f, const std::function<double(const Point&)>& varphi,
                          const SampleSet& samples) {
    return abel_check(f, varphi, samples.all());
}

FunctionalReport schroeder_functional_check(const Homeo& f, const SampleSet& samples) {
    const Domain& dom = samples.domain();
    if (dom.contains(Point::Zero(dom.dim()))) throw PreconditionError("Schroeder functional needs 0 outside the domain");
    FunctionalReport rep;
    const Homeo fr = f.reduced();
    bool have = false;
    for (int j = 0; j < samples.levels(); ++j) {
        for (const Point& x : samples.level(j)) {
            const std::optional<Point> y = evaluate_in_domain(fr, x);
            if (!y) continue;
            const double v = std::log(dom.norm_of(x)) - std::log(dom.norm_of(*y));
            if (!have || v < rep.m) {
                rep.m = v;
                rep.worst_point = x;
                have = true;
            }
        }
    }
    if (!have) throw PreconditionError("no sample has its image inside the domain");
    rep.positive = rep.m > 0.0;
    return rep;
}

namespace {

double cloud_distance(const std::vector<Point>& a, const std::vector<Point>& b, Norm norm) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point& p : a) {
        for (const Point& q : b) best = std::min(best, homconj::norm(p - q, norm));
    }
    return best;
}

} // namespace

WanderingReport wandering_check(const Homeo& f, const std::vector<Point>& K, double covering_radius, double lipschitz,
                                int nu, int n_max) {
    if (K.empty()) throw PreconditionError("wandering check needs a nonempty compact sample");
    if (nu < 1 || n_max < 1) throw PreconditionError("wandering check needs nu >= 1 and n_max >= 1");
    if (!(covering_radius >= 0.0) || !(lipschitz > 0.0)) {
        throw PreconditionError("wandering check needs a nonnegative covering radius and a positive Lipschitz bound");
    }
    const Homeo fr = f.reduced();
    const Norm nm = f.domain().norm();
    std::vector<std::vector<Point>> orbit{K};
    for (int n = 1; n <= n_max; ++n) {
        std::vector<Point> next;
        next.reserve(K.size());
        for (const Point& x : orbit.back()) next.push_back(fr.forward(x));
        orbit.push_back(std::move(next));
    }
    WanderingReport rep;
    rep.covering_radius = covering_radius;
    rep.lipschitz = lipschitz;
    rep.min_margin = std::numeric_limits<double>::infinity();
    rep.note = "separation certified only up to the covering radius propagated by the Lipschitz bound";
    for (int n = 1; n <= n_max && rep.wandering; ++n) {
        for (int m = 0; m + nu <= n; ++m) {
            const double radius = covering_radius * (std::pow(lipschitz, n) + std::pow(lipschitz, m));
            const double margin = cloud_distance(orbit[static_cast<std::size_t>(n)], orbit[static_cast<std::size_t>(m)], nm) - radius;
            rep.min_margin = std::min(rep.min_margin, margin);
            if (!(margin > 0.0)) {
                rep.wandering = false;
                rep.collision_n = n;
                rep.collision_m = m;
                break;
            }
        }
    }
    return rep;
}

ObstructionReport periodic_obstruction(const Homeo& f, double alpha, double lambda_f, const Point& orbit_start, int p,
                                       const Tolerances& tol) {
    if (p < 1) throw PreconditionError("period must be positive");
    const Homeo fr = f.reduced();
    const Domain& dom = f.domain();
    Point y = orbit_start;
    for (int k = 0; k < p; ++k) y = fr.forward(y);
    ObstructionReport rep;
    rep.period = p;
    rep.closure_error = dom.norm_of(y - orbit_start);
    if (!(rep.closure_error <= tol.inv * (1.0 + dom.norm_of(orbit_start)))) {
        std::ostringstream os;
        os << "orbit from " << to_string(orbit_start) << " does not close after " << p << " steps";
        throw PreconditionError(os.str());
    }
    rep.value = std::pow(alpha * lambda_f, p);
    rep.obstruction = rep.value > 1.0;
    return rep;
}

void assert_eigen_periodic_exclusion(const EigenReport& eig, const ObstructionReport& obs) {
    if (eig.satisfied && obs.obstruction) {
        throw PreconditionError("P_alpha reported satisfied although a periodic orbit forbids every eigenfunction");
    }
}

} // namespace homconj
