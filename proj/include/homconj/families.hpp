#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "homconj/funcspace.hpp"
#include "homconj/homeo.hpp"

namespace homconj {

enum class BumpShape { smooth_cutoff };

/// Quintic smoothstep bump: height * s(1 - |x - center| / halfwidth) with
/// s(t) = 6t^5 - 15t^4 + 10t^3, supported on [center - halfwidth, center + halfwidth].
struct BumpSpec {
    double center = 0.0;
    double halfwidth = 1.0;
    double height = 0.0;
    BumpShape shape = BumpShape::smooth_cutoff;

    double operator()(double x) const;
    double derivative(double x) const;
    /// Largest |derivative| = 1.875 height / halfwidth.
    double max_slope() const;
    double support_lo() const { return center - halfwidth; }
    double support_hi() const { return center + halfwidth; }
};

/// Quintic smoothstep on [0, 1], clamped outside.
double smoothstep5(double t);
/// Its derivative; peaks at 1.875 for t = 1/2.
double smoothstep5_derivative(double t);

/// Increasing homeomorphism of a 1D domain whose inverse is found by bisection
/// on [lo, hi] and is the identity-scaled closed form `outside_inverse` elsewhere.
Homeo monotone_1d(Domain domain, std::string name, std::function<double(double)> forward,
                  std::function<double(double)> outside_inverse, double lo, double hi);

struct Section42 {
    double eta = 0.0;
    double epsilon = 0.0;   ///< picked with sqrt(eta)/eta > 1 + epsilon
    double epsilon2 = 0.0;  ///< sqrt(eta)/(eta + epsilon2) > 1 + epsilon, epsilon2 < eta
    double alpha = 0.0;     ///< 1 + epsilon
    double A = 0.0;         ///< recomputed max(a beta, b beta / m + beta / gamma)
    double A_reference = 2.25;
    double lipschitz_g = 0.0; ///< eta + epsilon2
    BumpSpec bump;
    Domain domain = Domain::half_line();
    Homeo f;
    Homeo g;
    Gauge phi;
    GrowthFn R;
    ScaleFn r;
    CrossConstants cross;
    std::vector<std::string> warnings;
};

/// The worked example on F = [0, inf): f(x) = eta x, g(x) = eta x + phi(x),
/// Phi(x) = R(x) = sqrt(x) + 1, r(x) = x. Throws std::invalid_argument unless 0 < eta < 1.
Section42 build_section42(double eta);

/// (x, y) -> (1 - a|x| + y, b x) with its closed-form inverse. Throws unless b != 0.
Homeo build_lozi(double a, double b, Norm norm = Norm::euclidean);

/// Nonlinear part of T x + phi(x) with a Lipschitz bound.
struct Perturbation {
    std::string name;
    std::function<Point(const Point&)> eval;
    double lipschitz = 0.0;
};

/// 1D perturbation c log(1 + x^2); Lipschitz constant |c|.
Perturbation log_perturbation(double c);
/// direction * bump(||x - center||); Lipschitz constant ||direction|| max_slope.
Perturbation radial_bump(const Point& center, const Point& direction, const BumpSpec& bump, Norm norm);

/// 1 / ||T^-1|| in the operator norm induced by `norm`.
double inverse_norm_bound(const Matrix& T, Norm norm);

struct InverseSolve {
    Point y;
    int iterations = 0;
    double error_bound = 0.0;
};

/// Solves T y + phi(y) = x by y <- T^-1 (x - phi(y)); stops once the a posteriori
/// bound q/(1-q) ||y_{k+1} - y_k|| is below tol (1 + ||y||), or below the rounding
/// floor 64 eps/(1-q) (1 + ||y||) after the steps stall.
InverseSolve perturbed_linear_inverse(const Matrix& T, const Perturbation& phi, const Point& x, double tol, Norm norm,
                                      int max_iter = 1000);

/// f(x) = T x + phi(x) on the whole space. Throws PreconditionError unless
/// Lip(phi) < 1 / ||T^-1||.
Homeo build_perturbed_linear(const Matrix& T, const Perturbation& phi, Norm norm = Norm::euclidean,
                             double inverse_tol = 1e-14);

/// x -> A x on `domain`; A must be invertible and preserve the domain.
Homeo pure_linear(const Domain& domain, const Matrix& A);
/// x -> eta x on a 1D domain.
Homeo pure_linear(const Domain& domain, double eta);
/// x -> x + shift on the whole space.
Homeo translation(const Point& shift, Norm norm = Norm::euclidean);

// ---------------------------------------------------------------------------
// Name + parameter access used by experiment configs
// ---------------------------------------------------------------------------

enum class FamilyKind { section42, lozi, perturbed_linear, pure_linear, translation };

std::string_view to_string(FamilyKind k);
/// Throws std::invalid_argument for unknown names.
FamilyKind family_from_string(std::string_view name);

struct FamilySpec {
    FamilyKind family = FamilyKind::section42;
    std::map<std::string, double> params;
};

struct FamilyParamInfo {
    std::string name;
    double default_value;
    std::string description;
};

struct FamilyInfo {
    FamilyKind kind;
    std::string description;
    std::vector<FamilyParamInfo> params;
};

const std::vector<FamilyInfo>& family_catalog();

/// A built family together with the ingredients needed to measure it.
struct FamilyInstance {
    FamilySpec spec;
    Domain domain = Domain::half_line();
    Homeo f;
    std::optional<Homeo> g;
    Gauge phi;
    GrowthFn R;
    ScaleFn r;
    CrossConstants cross;
    std::optional<double> alpha;
    std::optional<Section42> section42;
    std::map<std::string, std::string> metadata;
    std::vector<std::string> warnings;
};

/// Builds a family; missing parameters take catalog defaults, unknown ones and
/// out-of-range values throw std::invalid_argument.
FamilyInstance make_family(const FamilySpec& spec);

} // namespace homconj
