#include "homconj/funcspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace homconj {

std::string to_string(const Point& p) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (i) os << ", ";
        os << p(i);
    }
    os << ')';
    return os.str();
}

std::string_view to_string(FnKind kind) {
    switch (kind) {
    case FnKind::identity: return "identity";
    case FnKind::sqrt_plus: return "sqrt_plus";
    case FnKind::linear_plus: return "linear_plus";
    case FnKind::user_closure: return "user_closure";
    }
    return "?";
}

ScalarFn::ScalarFn(FnKind kind) : kind_(kind), name_(homconj::to_string(kind)) {
    if (kind == FnKind::user_closure) throw std::invalid_argument("user_closure needs a function");
}

ScalarFn::ScalarFn(std::string name, std::function<double(double)> fn)
    : kind_(FnKind::user_closure), name_(std::move(name)), fn_(std::move(fn)) {
    if (!fn_) throw std::invalid_argument("empty closure for scalar function " + name_);
}

ScalarFn ScalarFn::by_name(std::string_view name) {
    if (name == "identity") return ScalarFn(FnKind::identity);
    if (name == "sqrt_plus") return ScalarFn(FnKind::sqrt_plus);
    if (name == "linear_plus") return ScalarFn(FnKind::linear_plus);
    throw std::invalid_argument("unknown function kind '" + std::string(name) + "'");
}

CrossConstants::CrossConstants(double a_, double b_) : a(a_), b(b_) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("cross constants a and b must be positive");
}

// ---------------------------------------------------------------------------

Domain::Domain(Region region, std::vector<Interval> bounds, Norm norm, double excluded_radius, bool open_lower)
    : region_(region), bounds_(std::move(bounds)), norm_(norm), excluded_radius_(excluded_radius),
      open_lower_(open_lower) {
    if (bounds_.empty() || static_cast<int>(bounds_.size()) > kMaxDim) {
        throw std::invalid_argument("domain dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    }
    for (const Interval& iv : bounds_) {
        if (std::isnan(iv.lo) || std::isnan(iv.hi) || !(iv.lo <= iv.hi)) {
            throw std::invalid_argument("domain bounds must satisfy lo <= hi");
        }
    }
    if (region_ == Region::half_line && bounds_.size() != 1) {
        throw std::invalid_argument("half_line domains are one-dimensional");
    }
    if (region_ == Region::box_minus_ball && !(excluded_radius_ > 0.0)) {
        throw std::invalid_argument("box_minus_ball needs a positive radius");
    }
}

Domain Domain::box(std::vector<Interval> bounds, Norm norm) {
    return Domain(Region::box, std::move(bounds), norm, 0.0, false);
}

Domain Domain::whole_space(int dim, Norm norm) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return box(std::vector<Interval>(static_cast<std::size_t>(dim), Interval{-inf, inf}), norm);
}

Domain Domain::half_line(double lo, bool open_lower) {
    return Domain(Region::half_line, {Interval{lo, std::numeric_limits<double>::infinity()}}, Norm::euclidean, 0.0,
                  open_lower);
}

Domain Domain::box_minus_ball(std::vector<Interval> bounds, double radius, Norm norm) {
    return Domain(Region::box_minus_ball, std::move(bounds), norm, radius, false);
}

bool Domain::contains(const Point& x) const {
    if (x.size() != dim()) return false;
    for (int i = 0; i < dim(); ++i) {
        const Interval& iv = bounds_[static_cast<std::size_t>(i)];
        if (!(x(i) >= iv.lo && x(i) <= iv.hi)) return false;
    }
    if (region_ == Region::half_line && open_lower_ && x(0) == bounds_[0].lo) return false;
    if (region_ == Region::box_minus_ball && norm_of(x) <= excluded_radius_) return false;
    return true;
}

// ---------------------------------------------------------------------------

Gauge::Gauge(std::string name, std::function<double(const Point&)> eval, double beta, double gamma, double m)
    : name_(std::move(name)), eval_(std::move(eval)), beta_(beta), gamma_(gamma), m_(m) {
    if (!eval_) throw std::invalid_argument("gauge needs an evaluator");
    if (!(gamma_ > 0.0) || !(beta_ > gamma_)) throw std::invalid_argument("gauge constants need beta > gamma > 0");
    if (!(m_ > 0.0)) throw std::invalid_argument("gauge lower bound m must be positive");
}

Gauge Gauge::radial(const GrowthFn& growth, Norm norm, double beta, double gamma, double m) {
    return Gauge(growth.name() + "(|x|)", [growth, norm](const Point& x) { return growth(homconj::norm(x, norm)); },
                 beta, gamma, m);
}

// ---------------------------------------------------------------------------

std::string_view to_string(Finiteness f) {
    switch (f) {
    case Finiteness::finite: return "finite";
    case Finiteness::divergent: return "divergent";
    case Finiteness::undetermined: return "undetermined";
    }
    return "?";
}

double SupEstimate::extended() const {
    return finiteness == Finiteness::divergent ? std::numeric_limits<double>::infinity() : value;
}

Finiteness classify_growth(const std::vector<WindowSample>& trace, double kappa, double floor) {
    if (trace.empty()) return Finiteness::undetermined;
    const double first = trace.front().estimate;
    const double last = trace.back().estimate;
    if (last <= floor) return Finiteness::finite;
    if (first == 0.0) return Finiteness::undetermined;
    if (last <= kappa * first) return Finiteness::finite;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        if (!(trace[i].estimate > trace[i - 1].estimate)) return Finiteness::undetermined;
    }
    return Finiteness::divergent;
}

Finiteness combine(Finiteness a, Finiteness b) {
    if (a == Finiteness::divergent || b == Finiteness::divergent) return Finiteness::divergent;
    if (a == Finiteness::undetermined || b == Finiteness::undetermined) return Finiteness::undetermined;
    return Finiteness::finite;
}

// ---------------------------------------------------------------------------

bool ValidationReport::passed() const {
    return std::all_of(conditions.begin(), conditions.end(), [](const ConditionResult& c) { return c.passed; });
}

const ConditionResult& ValidationReport::at(std::string_view name) const {
    for (const ConditionResult& c : conditions) {
        if (c.name == name) return c;
    }
    throw std::out_of_range("no condition named " + std::string(name));
}

namespace {

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

/// Running minimum of a slack with its witness.
struct SlackTracker {
    ConditionResult result;
    bool first = true;

    explicit SlackTracker(std::string name) { result.name = std::move(name); }

    template <class WitnessFn>
    void observe(double slack, WitnessFn&& witness) {
        if (first || slack < result.worst_slack) {
            result.worst_slack = slack;
            result.witness = witness();
            first = false;
        }
    }

    ConditionResult finish(double tau) {
        result.passed = result.worst_slack >= -tau;
        return result;
    }
};

struct ScalarSamples {
    std::vector<double> sorted;                       // includes 0
    std::vector<std::pair<double, double>> pairs;     // u + v <= W
};

ScalarSamples scalar_samples(const SampleScheme& scheme) {
    ScalarSamples s;
    const double w = scheme.window_radius;
    const int n = std::max(3, scheme.grid_points_per_axis);
    for (int i = 0; i < n; ++i) s.sorted.push_back(w * (static_cast<double>(i) / static_cast<double>(n - 1)));
    if (scheme.geometric_points > 1) {
        const double q = std::pow(1e-9, 1.0 / static_cast<double>(scheme.geometric_points - 1));
        double u = w;
        for (int i = 0; i < scheme.geometric_points; ++i, u *= q) s.sorted.push_back(u);
    }
    Rng rng(scheme.seed ^ 0x5ca1ab1eULL);
    const int extra = std::max(256, scheme.quasirandom_count);
    for (int i = 0; i < extra; ++i) s.sorted.push_back(rng.uniform(0.0, w));
    std::sort(s.sorted.begin(), s.sorted.end());
    s.sorted.erase(std::unique(s.sorted.begin(), s.sorted.end()), s.sorted.end());

    // Odd pair grid so that W/2 is a node.
    int m = std::min(n, 129);
    if (m % 2 == 0) --m;
    std::vector<double> coarse;
    for (int i = 0; i < m; ++i) coarse.push_back(w * (static_cast<double>(i) / static_cast<double>(m - 1)));
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        for (std::size_t j = i; j < coarse.size(); ++j) {
            if (coarse[i] + coarse[j] <= w) s.pairs.emplace_back(coarse[i], coarse[j]);
        }
    }
    for (int i = 0; i < 4096; ++i) {
        // Half the random pairs on a log scale so small arguments are exercised.
        double u = rng.uniform(0.0, w / 2);
        double v = rng.uniform(0.0, w / 2);
        if (i % 2) {
            u = w / 2 * std::pow(10.0, -9.0 * rng.uniform());
            v = w / 2 * std::pow(10.0, -9.0 * rng.uniform());
        }
        s.pairs.emplace_back(u, v);
    }
    return s;
}

template <class Fn>
ConditionResult check_subadditive(std::string name, const Fn& fn, const ScalarSamples& s, double tau) {
    SlackTracker t(std::move(name));
    for (auto [u, v] : s.pairs) {
        const double slack = fn(u) + fn(v) - fn(u + v);
        t.observe(slack, [&] { return "u=" + fmt_double(u) + " v=" + fmt_double(v); });
    }
    return t.finish(tau);
}

} // namespace

ValidationReport validate_scale_pair(const GrowthFn& growth, const ScaleFn& scale, const CrossConstants& cross,
                                     const SampleScheme& scheme, const Tolerances& tol) {
    scheme.validate();
    const ScalarSamples s = scalar_samples(scheme);
    ValidationReport report;

    {
        SlackTracker t("r_zero");
        t.observe(-std::abs(scale(0.0)), [] { return std::string("u=0"); });
        report.conditions.push_back(t.finish(tol.abs));
    }
    {
        SlackTracker t("r_positive");
        for (double u : s.sorted) {
            if (u > 0.0) t.observe(scale(u), [&] { return "u=" + fmt_double(u); });
        }
        ConditionResult c = t.result;
        c.passed = c.worst_slack > 0.0;
        report.conditions.push_back(c);
    }
    {
        SlackTracker t("r_nondecreasing");
        for (std::size_t i = 1; i < s.sorted.size(); ++i) {
            const double u = s.sorted[i - 1];
            const double v = s.sorted[i];
            t.observe(scale(v) - scale(u), [&] { return "u=" + fmt_double(u) + " v=" + fmt_double(v); });
        }
        report.conditions.push_back(t.finish(tol.abs));
    }
    report.conditions.push_back(check_subadditive("r_subadditive", scale, s, tol.abs));
    {
        SlackTracker t("R_positive");
        for (double u : s.sorted) t.observe(growth(u), [&] { return "u=" + fmt_double(u); });
        ConditionResult c = t.result;
        c.passed = c.worst_slack > 0.0;
        report.conditions.push_back(c);
    }
    report.conditions.push_back(check_subadditive("R_subadditive", growth, s, tol.abs));
    {
        SlackTracker t("cross");
        for (double u : s.sorted) {
            t.observe(cross.a * scale(u) + cross.b - growth(u), [&] { return "u=" + fmt_double(u); });
        }
        report.conditions.push_back(t.finish(tol.abs));
    }
    return report;
}

ValidationReport validate_gauge(const Gauge& phi, const GrowthFn& growth, const SampleSet& samples,
                                const Tolerances& tol) {
    const Domain& dom = samples.domain();
    SlackTracker g1("G1_lower_bound");
    SlackTracker g3_lo("G3_cone_lower");
    SlackTracker g3_hi("G3_cone_upper");
    std::vector<double> shell_min;

    for (int j = 0; j < samples.levels(); ++j) {
        const double wj = samples.window_radius(j);
        double smin = std::numeric_limits<double>::infinity();
        for (const Point& x : samples.level(j)) {
            const double v = phi(x);
            const double rn = growth(dom.norm_of(x));
            auto wit = [&] { return "x=" + to_string(x); };
            g1.observe(v - phi.m(), wit);
            g3_lo.observe(v - phi.gamma() * rn, wit);
            g3_hi.observe(phi.beta() * rn - v, wit);
            if (dom.norm_of(x) >= 0.5 * wj) smin = std::min(smin, v);
        }
        shell_min.push_back(smin);
    }

    ValidationReport report;
    report.conditions.push_back(g1.finish(tol.abs));
    report.conditions.push_back(g3_lo.finish(tol.abs));
    report.conditions.push_back(g3_hi.finish(tol.abs));

    ConditionResult g2;
    g2.name = "G2_coercivity";
    g2.worst_slack = std::numeric_limits<double>::infinity();
    std::ostringstream wit;
    wit.precision(6);
    wit << "shell minima:";
    for (std::size_t j = 0; j < shell_min.size(); ++j) {
        wit << ' ' << shell_min[j];
        if (j > 0) g2.worst_slack = std::min(g2.worst_slack, shell_min[j] - shell_min[j - 1]);
    }
    if (shell_min.size() < 2) g2.worst_slack = 0.0;
    g2.passed = std::isfinite(g2.worst_slack) && g2.worst_slack > 0.0;
    g2.witness = wit.str();
    report.conditions.push_back(g2);
    return report;
}

} // namespace homconj
