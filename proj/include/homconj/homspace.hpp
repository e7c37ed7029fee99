#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "homconj/funcspace.hpp"
#include "homconj/homeo.hpp"

namespace homconj {

/// Windowed estimate of |f|_{Phi,r} = sup r(||f(x) - x||) / Phi(x).
using DisplacementEstimate = SupEstimate;

struct PremetricEstimate {
    double rho = 0.0;
    DisplacementEstimate left_part;  ///< |f o g^-1|
    DisplacementEstimate right_part; ///< |f^-1 o g|
    Finiteness finiteness = Finiteness::finite;

    double extended() const;
};

/// Everything the premetric needs besides the maps: Phi, r, the cross
/// constants, the sample set and the tolerances. Shared by value; the sample
/// set is held through a shared pointer so copies are cheap.
struct PremetricContext {
    Gauge phi;
    ScaleFn r;
    CrossConstants cross;
    std::shared_ptr<const SampleSet> samples;
    Tolerances tol;

    PremetricContext(Gauge phi_, ScaleFn r_, CrossConstants cross_, std::shared_ptr<const SampleSet> samples_,
                     Tolerances tol_ = {});

    /// A = max(a beta, b beta / m + beta / gamma).
    double constant_A() const;
    /// b beta / m + beta / gamma.
    double linear_coefficient() const;
    /// a beta.
    double product_coefficient() const;
};

/// Evaluates the freely reduced chain of f at x, atom by atom. Returns nullopt
/// as soon as an intermediate image leaves the domain; throws EvaluationError
/// on non-finite coordinates.
std::optional<Point> evaluate_in_domain(const Homeo& f, const Point& x);

DisplacementEstimate displacement(const Homeo& f, const Gauge& phi, const ScaleFn& r, const SampleSet& samples,
                                  const Tolerances& tol = {});
DisplacementEstimate displacement(const Homeo& f, const PremetricContext& ctx);

PremetricEstimate premetric(const Homeo& f, const Homeo& g, const Gauge& phi, const ScaleFn& r,
                            const SampleSet& samples, const Tolerances& tol = {});
PremetricEstimate premetric(const Homeo& f, const Homeo& g, const PremetricContext& ctx);

/// Lambda(f) = a beta |f| + b beta / m + beta / gamma. Throws DivergentEstimate
/// unless the displacement is classified finite.
double koopman_lambda(const DisplacementEstimate& f_disp, const Gauge& phi, const CrossConstants& cross);

/// Outcome of checking lhs <= rhs + tau on estimates.
struct InequalityReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double tau = 0.0;
    bool passed = true;
    /// True when the right side is an unbounded estimate, so the check holds trivially.
    bool vacuous = false;
    std::string witness;

    double slack() const { return rhs + tau - lhs; }
};

/// rho(f,g) <= a beta rho(f,h) rho(h,g) + (b beta/m + beta/gamma) rho(f,h) + rho(h,g) + tau_tri.
InequalityReport check_relaxed_triangle(const Homeo& f, const Homeo& g, const Homeo& h, const PremetricContext& ctx);

enum class MembershipVerdict { member, non_member, undetermined };
std::string_view to_string(MembershipVerdict v);

struct MembershipReport {
    MembershipVerdict verdict = MembershipVerdict::undetermined;
    DisplacementEstimate forward;  ///< |f|
    DisplacementEstimate inverse;  ///< |f^-1|
};

MembershipReport group_membership(const Homeo& f, const Gauge& phi, const ScaleFn& r, const SampleSet& samples,
                                  const Tolerances& tol = {});

/// One-sided sum: sum over k <= k_max of 2^-k d_k / (1 + d_k), d_k = max over K_k of ||f(x) - g(x)||.
double compact_delta(const Homeo& f, const Homeo& g, const SampleSet& samples);
/// Delta(f,g) = delta(f,g) + delta(f^-1, g^-1), truncated at the exhaustion depth of the scheme.
double compact_convergence_distance(const Homeo& f, const Homeo& g, const SampleSet& samples);

/// Radius alpha such that B(g, alpha) lies inside B(f, alpha_star):
/// alpha = (alpha_star - c rho) / (1 + a beta rho), with c the linear coefficient.
/// Throws PreconditionError unless rho < alpha_star / c.
double inner_ball_radius(double rho_fg, double alpha_star, const PremetricContext& ctx);

} // namespace homconj
