#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "homconj/point.hpp"

namespace homconj {

// ---------------------------------------------------------------------------
// Scalar functions R (growth) and r (scale)
// ---------------------------------------------------------------------------

enum class FnKind { identity, sqrt_plus, linear_plus, user_closure };

std::string_view to_string(FnKind kind);

/// A map from [0, inf) to the reals, either one of the named built-ins or a
/// user closure. Built-ins are evaluated without type erasure.
class ScalarFn {
public:
    explicit ScalarFn(FnKind kind);
    ScalarFn(std::string name, std::function<double(double)> fn);

    /// "identity", "sqrt_plus" (u -> sqrt(u) + 1), "linear_plus" (u -> u + 1).
    static ScalarFn by_name(std::string_view name);

    double operator()(double u) const {
        switch (kind_) {
        case FnKind::identity: return u;
        case FnKind::sqrt_plus: return std::sqrt(u) + 1.0;
        case FnKind::linear_plus: return u + 1.0;
        case FnKind::user_closure: break;
        }
        return fn_(u);
    }

    FnKind kind() const { return kind_; }
    const std::string& name() const { return name_; }

private:
    FnKind kind_;
    std::string name_;
    std::function<double(double)> fn_;
};

/// Strongly typed wrapper so R and r cannot be swapped by accident.
template <class Tag>
class TaggedFn {
public:
    explicit TaggedFn(ScalarFn fn) : fn_(std::move(fn)) {}
    explicit TaggedFn(FnKind kind) : fn_(kind) {}
    static TaggedFn by_name(std::string_view name) { return TaggedFn(ScalarFn::by_name(name)); }

    double operator()(double u) const { return fn_(u); }
    FnKind kind() const { return fn_.kind(); }
    const std::string& name() const { return fn_.name(); }

private:
    ScalarFn fn_;
};

struct ScaleTag {};
struct GrowthTag {};

/// r: nondecreasing, subadditive, r(u) = 0 iff u = 0.
using ScaleFn = TaggedFn<ScaleTag>;
/// R: continuous, subadditive, strictly positive.
using GrowthFn = TaggedFn<GrowthTag>;

/// Constants (a, b) of the cross condition R(u) <= a r(u) + b.
struct CrossConstants {
    double a;
    double b;

    CrossConstants(double a_, double b_);
};

// ---------------------------------------------------------------------------
// Domain F and the gauge Phi
// ---------------------------------------------------------------------------

enum class Region { box, half_line, box_minus_ball };

struct Interval {
    double lo;
    double hi;
    bool operator==(const Interval&) const = default;
};

/// The non-compact set F inside E = R^dim.
class Domain {
public:
    /// Product of intervals; infinite bounds allowed.
    static Domain box(std::vector<Interval> bounds, Norm norm = Norm::euclidean);
    static Domain whole_space(int dim, Norm norm = Norm::euclidean);
    /// [lo, inf), or (lo, inf) when open_lower is set. Only valid in dimension 1.
    static Domain half_line(double lo = 0.0, bool open_lower = false);
    /// Box with the closed ball of the given radius around the origin removed.
    static Domain box_minus_ball(std::vector<Interval> bounds, double radius, Norm norm = Norm::euclidean);

    bool contains(const Point& x) const;

    int dim() const { return static_cast<int>(bounds_.size()); }
    Region region() const { return region_; }
    const std::vector<Interval>& bounds() const { return bounds_; }
    Norm norm() const { return norm_; }
    double excluded_radius() const { return excluded_radius_; }
    bool open_lower() const { return open_lower_; }

    double norm_of(const Point& x) const { return homconj::norm(x, norm_); }

    bool operator==(const Domain&) const = default;

private:
    Domain(Region region, std::vector<Interval> bounds, Norm norm, double excluded_radius, bool open_lower);

    Region region_;
    std::vector<Interval> bounds_;
    Norm norm_;
    double excluded_radius_ = 0.0;
    bool open_lower_ = false;
};

/// Phi in E_F^R, with its cone constants (beta, gamma) and lower bound m.
class Gauge {
public:
    Gauge(std::string name, std::function<double(const Point&)> eval, double beta, double gamma, double m);

    /// Phi(x) = R(||x||).
    static Gauge radial(const GrowthFn& growth, Norm norm, double beta, double gamma, double m);

    double operator()(const Point& x) const { return eval_(x); }

    double beta() const { return beta_; }
    double gamma() const { return gamma_; }
    double m() const { return m_; }
    const std::string& name() const { return name_; }

private:
    std::string name_;
    std::function<double(const Point&)> eval_;
    double beta_;
    double gamma_;
    double m_;
};

// ---------------------------------------------------------------------------
// Tolerances
// ---------------------------------------------------------------------------

struct Tolerances {
    double abs = 1e-12;       ///< slack for every pointwise inequality
    double rel = 1e-9;        ///< relative tolerance for equality checks
    double inv = 1e-8;        ///< round trip ||f^-1(f(x)) - x|| <= inv (1 + ||x||)
    double kappa_div = 1.5;   ///< window-doubling growth factor that flags divergence
    double tri = 1e-9;        ///< relaxed triangle inequality
    double contr = 1e-9;      ///< contraction inequality
    double env = 1e-9;        ///< observed increments vs F_k envelope
    double conj = 1e-8;       ///< Picard stopping tolerance
    double koenigs = 1e-10;   ///< Koenigs increment tolerance
};

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Parameters of the finite subset of F over which suprema are estimated.
struct SampleScheme {
    double window_radius = 100.0;
    int grid_points_per_axis = 401;
    int quasirandom_count = 0;
    /// Radially log-spaced points from the window radius down to 1e-9 of it;
    /// resolves structure that contracts toward the origin.
    int geometric_points = 0;
    int exhaustion_levels = 3;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const SampleScheme&) const = default;
};

/// Number of window doublings used by the divergence rule.
inline constexpr int kWindowDoublings = 3;

/// Sample clouds for the windows W, 2W, 4W, 8W. Level 0 covers the base
/// window; level j > 0 holds the shell W 2^(j-1) < ||x|| <= W 2^j of a cloud
/// built for window W 2^j. Suprema take the running max over levels, so the
/// estimate at window W 2^j is the sup over the union of levels 0..j.
class SampleSet {
public:
    SampleSet(Domain domain, SampleScheme scheme);

    const Domain& domain() const { return domain_; }
    const SampleScheme& scheme() const { return scheme_; }

    int levels() const { return static_cast<int>(levels_.size()); }
    double window_radius(int level) const;
    /// Points new at level j (the whole base window for j = 0).
    const std::vector<Point>& level(int j) const { return levels_.at(static_cast<std::size_t>(j)); }
    /// Cloud for the base window W.
    const std::vector<Point>& base() const { return levels_.front(); }
    /// Every point of every level.
    std::vector<Point> all() const;

    /// K_k = (base window) intersected with ball(0, 2^k), 0 <= k <= exhaustion_levels.
    std::vector<Point> exhaustion(int k) const;

private:
    Domain domain_;
    SampleScheme scheme_;
    std::vector<std::vector<Point>> levels_;
};

/// Deterministic 64-bit generator shared by every seeded routine. The
/// conversion to doubles is explicit so sample sets match bit-for-bit
/// across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    std::uint64_t next();
    double uniform();                     ///< [0, 1)
    double uniform(double lo, double hi); ///< [lo, hi)

private:
    std::uint64_t state_;
};

/// Radical inverse of i in the given base (Halton coordinate).
double radical_inverse(std::uint64_t i, unsigned base);

// ---------------------------------------------------------------------------
// Windowed suprema
// ---------------------------------------------------------------------------

enum class Finiteness { finite, divergent, undetermined };

std::string_view to_string(Finiteness f);

struct WindowSample {
    double window;
    double estimate;
};

/// Windowed estimate of a supremum over F. `value` is always a lower bound of
/// the true supremum; `finiteness` records the window-doubling verdict.
struct SupEstimate {
    double value = 0.0;
    Point argmax;
    Finiteness finiteness = Finiteness::finite;
    std::vector<WindowSample> window_trace;
    std::size_t dropped = 0;
    std::size_t evaluated = 0;

    /// value, or +inf when the estimate is classified divergent.
    double extended() const;
};

/// Classifies a nondecreasing window trace: divergent when the last estimate
/// exceeds kappa times the first and the trace grows at every doubling.
/// Traces whose last estimate stays within `floor` are finite (round-off noise).
Finiteness classify_growth(const std::vector<WindowSample>& trace, double kappa, double floor = 0.0);

/// Combines the finiteness of two estimates under max().
Finiteness combine(Finiteness a, Finiteness b);

/// Runs `ratio` over every level of the sample set. `ratio` returns
/// std::nullopt for points that must be dropped (range containment failure).
template <class Ratio>
SupEstimate windowed_sup(const SampleSet& samples, Ratio&& ratio, double kappa, double floor = 0.0) {
    SupEstimate est;
    double best = 0.0;
    bool have = false;
    for (int j = 0; j < samples.levels(); ++j) {
        for (const Point& x : samples.level(j)) {
            std::optional<double> v = ratio(x);
            if (!v) {
                ++est.dropped;
                continue;
            }
            if (!std::isfinite(*v)) {
                throw EvaluationError("non-finite value at sample " + to_string(x));
            }
            ++est.evaluated;
            if (!have || *v > best) {
                best = *v;
                est.argmax = x;
                have = true;
            }
        }
        est.window_trace.push_back({samples.window_radius(j), best});
    }
    est.value = best;
    if (!have && samples.levels() > 0 && !samples.base().empty()) est.argmax = samples.base().front();
    est.finiteness = classify_growth(est.window_trace, kappa, floor);
    return est;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ConditionResult {
    std::string name;
    bool passed = true;
    /// Smallest observed (rhs - lhs); negative values are violations.
    double worst_slack = 0.0;
    std::string witness;

    double violation() const { return worst_slack < 0.0 ? -worst_slack : 0.0; }
};

struct ValidationReport {
    std::vector<ConditionResult> conditions;

    bool passed() const;
    /// Throws std::out_of_range for unknown names.
    const ConditionResult& at(std::string_view name) const;
};

/// Checks positivity, monotonicity and subadditivity of r and R, and the cross
/// condition, on scalar samples u in [0, W]. Failures are reported, not thrown.
ValidationReport validate_scale_pair(const GrowthFn& growth, const ScaleFn& scale, const CrossConstants& cross,
                                     const SampleScheme& scheme, const Tolerances& tol = {});

/// Checks G1 (lower bound m) and G3 (cone) pointwise on every level; G2 is a
/// coercivity diagnostic comparing minima over the outer shell of each window.
ValidationReport validate_gauge(const Gauge& phi, const GrowthFn& growth, const SampleSet& samples,
                                const Tolerances& tol = {});

} // namespace homconj
