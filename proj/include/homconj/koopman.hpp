#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "homconj/funcspace.hpp"
#include "homconj/homeo.hpp"

namespace homconj {

struct RLipschitzEstimate {
    double value = 0.0;
    Point witness_x;
    Point witness_y;
    std::size_t pair_count = 0;
    Finiteness finiteness = Finiteness::finite;
    std::vector<WindowSample> window_trace;

    double extended() const;
};

struct LipschitzOptions {
    std::size_t max_pairs = 1'000'000; ///< cap on exhaustive pairs per window level
    std::size_t close_pairs_per_point = 2; ///< seeded pairs at small separations
};

/// lambda_r(f) = sup over sampled x != y of r(||f(x) - f(y)||) / r(||x - y||).
RLipschitzEstimate r_lipschitz(const Homeo& f, const ScaleFn& r, const SampleSet& samples, const Tolerances& tol = {},
                               const LipschitzOptions& opts = {});

struct EigenReport {
    double alpha = 0.0;
    double lambda_f = 0.0;
    double lambda_g = 0.0;
    double min_slack_f = 0.0; ///< min of Phi(f(x)) - alpha lambda_f Phi(x)
    double min_slack_g = 0.0;
    bool satisfied = false;
    Point worst_point;
    std::size_t dropped = 0;
};

/// Pointwise check of Phi o f >= alpha lambda_f Phi and Phi o g >= alpha lambda_g Phi
/// with the given Lipschitz constants.
EigenReport check_eigen_inequalities(const Homeo& f, const Homeo& g, const Gauge& phi, double alpha, double lambda_f,
                                     double lambda_g, const SampleSet& samples, const Tolerances& tol = {});

/// P_alpha with lambda_r(f), lambda_r(g) estimated on the same samples. Throws
/// DivergentEstimate when either constant is not finite, PreconditionError when alpha <= 1.
EigenReport check_P_alpha(const Homeo& f, const Homeo& g, const Gauge& phi, const ScaleFn& r, double alpha,
                          const SampleSet& samples, const Tolerances& tol = {});

enum class KoenigsStatus { converged, diverged, budget_exhausted };
std::string_view to_string(KoenigsStatus s);

struct KoenigsResult {
    KoenigsStatus status = KoenigsStatus::budget_exhausted;
    int iterations = 0;
    double increment = 0.0;   ///< last sup ||Psi_{n+1} - Psi_n|| on the compact
    double residual = 0.0;    ///< sup ||Psi(f(x)) - lambda Psi(x)|| on the compact
    double growth_exponent = 0.0; ///< log2 ratio of sup ||Psi|| over the two outermost exhaustion sets
    std::function<Point(const Point&)> psi;
};

/// Koenigs limit Psi_n(x) = (f^n(x) - x*) / lambda^n on the exhaustion set K_level.
KoenigsResult koenigs_eigenfunction(const Homeo& f, const Point& fixed_point, double multiplier, int n_max,
                                    const SampleSet& samples, const Tolerances& tol = {}, int level = 0);

struct ResidualReport {
    double sup_residual = 0.0;
    Point worst_point;
    std::size_t evaluated = 0;
    std::size_t dropped = 0;
};

/// sup over samples of |phi(f(x)) - phi(x) - 1|.
ResidualReport abel_check(const Homeo& f, const std::function<double(const Point&)>& varphi, const SampleSet& samples);
ResidualReport abel_check(const Homeo& f, const std::function<double(const Point&)>& varphi,
                          const std::vector<Point>& cloud);

struct FunctionalReport {
    double m = 0.0; ///< largest m with -log||f(x)|| >= -log||x|| + m on the samples
    Point worst_point;
    bool positive = false;
};

/// Requires 0 outside the domain; throws PreconditionError otherwise.
FunctionalReport schroeder_functional_check(const Homeo& f, const SampleSet& samples);

struct WanderingReport {
    bool wandering = true;
    int collision_n = -1;
    int collision_m = -1;
    double min_margin = 0.0; ///< min over checked (n, m) of distance minus propagated radius
    double covering_radius = 0.0;
    double lipschitz = 0.0;
    std::string note;
};

/// Point-cloud test of f^n(K) and f^m(K) being disjoint for 0 <= m < n <= n_max,
/// n - m >= nu. K is a sample of a compact with the given covering radius;
/// the image clouds are inflated by radius * lipschitz^n.
WanderingReport wandering_check(const Homeo& f, const std::vector<Point>& K, double covering_radius, double lipschitz,
                                int nu, int n_max);

struct ObstructionReport {
    bool obstruction = false;
    double value = 0.0; ///< (alpha lambda)^p
    int period = 0;
    double closure_error = 0.0;
};

/// Verifies that x has period p, then reports an obstruction when (alpha lambda)^p > 1.
ObstructionReport periodic_obstruction(const Homeo& f, double alpha, double lambda_f, const Point& orbit_start, int p,
                                       const Tolerances& tol = {});

/// A satisfied P_alpha and a periodic obstruction are mutually exclusive; throws
/// PreconditionError if both are reported.
void assert_eigen_periodic_exclusion(const EigenReport& eig, const ObstructionReport& obs);

} // namespace homconj
