#include "homconj/families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace homconj {

double smoothstep5(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

double smoothstep5_derivative(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double u = t * (1.0 - t);
    return 30.0 * u * u;
}

double BumpSpec::operator()(double x) const { return height * smoothstep5(1.0 - std::abs(x - center) / halfwidth); }

double BumpSpec::derivative(double x) const {
    const double d = x - center;
    const double sgn = d > 0.0 ? -1.0 : 1.0;
    return height * sgn * smoothstep5_derivative(1.0 - std::abs(d) / halfwidth) / halfwidth;
}

double BumpSpec::max_slope() const { return 1.875 * std::abs(height) / halfwidth; }

Homeo monotone_1d(Domain domain, std::string name, std::function<double(double)> forward,
                  std::function<double(double)> outside_inverse, double lo, double hi) {
    if (domain.dim() != 1) throw std::invalid_argument("monotone_1d needs a 1D domain");
    if (!(lo < hi)) throw std::invalid_argument("monotone_1d needs lo < hi");
    const double ylo = forward(lo);
    const double yhi = forward(hi);
    auto fwd = [forward](const Point& x) { return scalar_point(forward(x(0))); };
    auto inv = [forward, outside_inverse, lo, hi, ylo, yhi](const Point& p) {
        const double y = p(0);
        if (y <= ylo || y >= yhi) return scalar_point(outside_inverse(y));
        double a = lo;
        double b = hi;
        // Bisect until the bracket stops shrinking.
        while (true) {
            const double mid = 0.5 * (a + b);
            if (mid <= a || mid >= b) break;
            if (forward(mid) < y) {
                a = mid;
            } else {
                b = mid;
            }
        }
        return scalar_point(std::abs(forward(a) - y) <= std::abs(forward(b) - y) ? a : b);
    };
    return Homeo(std::move(domain), std::move(name), fwd, inv);
}

Section42 build_section42(double eta) {
    if (!(eta > 0.0 && eta < 1.0)) {
        std::ostringstream os;
        os << "section42 needs eta in (0, 1), got " << eta;
        throw std::invalid_argument(os.str());
    }
    const double beta = 2.0;
    const double gamma = 0.5;
    const double m = 1.0;
    const CrossConstants cross(1.0, 1.25);
    const double A = std::max(cross.a * beta, cross.b * beta / m + beta / gamma);

    const double sq = std::sqrt(eta);
    const double epsilon = 0.5 * (1.0 / sq - 1.0);
    const double epsilon2 = 0.5 * std::min(sq / (1.0 + epsilon) - eta, eta);
    if (!(epsilon > 0.0) || !(epsilon2 > 0.0)) throw std::logic_error("section42 constraints are empty");

    // Height below eta / A keeps the perturbation admissible; width sets the slope to epsilon2.
    const double height = eta * eta / (2.0 * A);
    const double halfwidth = 1.875 * height / epsilon2;
    const BumpSpec bump{1.0 + halfwidth, halfwidth, height, BumpShape::smooth_cutoff};
    if (!(bump.max_slope() <= epsilon2 * (1.0 + 1e-12)) || !(height < eta / A)) {
        throw std::logic_error("section42 bump violates its constraints");
    }

    const Domain dom = Domain::half_line(0.0);
    Homeo f = pure_linear(dom, eta);
    f.set_label("f");
    Homeo g = monotone_1d(
        dom, "g", [eta, bump](double x) { return eta * x + bump(x); }, [eta](double y) { return y / eta; },
        bump.support_lo(), bump.support_hi());

    const GrowthFn R(FnKind::sqrt_plus);
    std::vector<std::string> warnings;
    {
        std::ostringstream os;
        os << "reference value A = 9/4 differs from the recomputed A = max(a beta, b beta/m + beta/gamma) = " << A
           << "; the recomputed value is used";
        warnings.push_back(os.str());
    }
    return Section42{
        .eta = eta,
        .epsilon = epsilon,
        .epsilon2 = epsilon2,
        .alpha = 1.0 + epsilon,
        .A = A,
        .A_reference = 2.25,
        .lipschitz_g = eta + bump.max_slope(),
        .bump = bump,
        .domain = dom,
        .f = std::move(f),
        .g = std::move(g),
        .phi = Gauge::radial(R, Norm::euclidean, beta, gamma, m),
        .R = R,
        .r = ScaleFn(FnKind::identity),
        .cross = cross,
        .warnings = std::move(warnings),
    };
}

Homeo build_lozi(double a, double b, Norm norm) {
    if (b == 0.0 || !std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("Lozi map needs finite a and b != 0");
    auto fwd = [a, b](const Point& p) { return make_point({1.0 - a * std::abs(p(0)) + p(1), b * p(0)}); };
    auto inv = [a, b](const Point& p) {
        return make_point({p(1) / b, -1.0 + p(0) + (a / std::abs(b)) * std::abs(p(1))});
    };
    std::ostringstream os;
    os << "lozi(" << a << "," << b << ")";
    return Homeo(Domain::whole_space(2, norm), os.str(), fwd, inv);
}

Perturbation log_perturbation(double c) {
    return Perturbation{"log", [c](const Point& x) { return scalar_point(c * std::log1p(x(0) * x(0))); }, std::abs(c)};
}

Perturbation radial_bump(const Point& center, const Point& direction, const BumpSpec& bump, Norm norm) {
    if (center.size() != direction.size()) throw std::invalid_argument("radial bump center and direction differ in size");
    BumpSpec b = bump;
    b.center = 0.0;
    const double lip = homconj::norm(direction, norm) * b.max_slope();
    return Perturbation{"radial_bump",
                        [center, direction, b, norm](const Point& x) {
                            return Point(direction * b(homconj::norm(x - center, norm)));
                        },
                        lip};
}

double inverse_norm_bound(const Matrix& T, Norm norm) {
    if (T.rows() != T.cols() || T.rows() == 0) throw std::invalid_argument("T must be square and nonempty");
    if (norm == Norm::euclidean) {
        Eigen::JacobiSVD<Matrix> svd(T);
        return svd.singularValues().minCoeff();
    }
    Eigen::FullPivLU<Matrix> lu(T);
    if (!lu.isInvertible()) return 0.0;
    const Matrix Ti = lu.inverse();
    return 1.0 / Ti.cwiseAbs().rowwise().sum().maxCoeff();
}

namespace {

// T factored once; q = Lip(phi) ||T^-1|| is the contraction factor of the inverse iteration.
struct PerturbedSolver {
    Eigen::PartialPivLU<Matrix> lu;
    Perturbation phi;
    Norm norm;
    double q;

    PerturbedSolver(const Matrix& T, Perturbation p, Norm n)
        : lu(T), phi(std::move(p)), norm(n), q(phi.lipschitz / inverse_norm_bound(T, n)) {
        if (!(q < 1.0)) throw PreconditionError("perturbation Lipschitz constant must be below 1/||T^-1||");
    }

    InverseSolve solve(const Point& x, double tol, int max_iter) const {
        // Once steps stop shrinking, accept at the rounding floor eps/(1-q).
        const double floor_tol = 64.0 * std::numeric_limits<double>::epsilon() / (1.0 - q);
        InverseSolve out;
        out.y = lu.solve(x);
        double best_step = std::numeric_limits<double>::infinity();
        int stalled = 0;
        for (int k = 1; k <= max_iter; ++k) {
            Point next = lu.solve(Point(x - phi.eval(out.y)));
            const double step = homconj::norm(next - out.y, norm);
            out.y = std::move(next);
            out.iterations = k;
            out.error_bound = q / (1.0 - q) * step;
            if (!out.y.allFinite()) throw EvaluationError("inverse iteration diverged at " + to_string(x));
            const double scale = 1.0 + homconj::norm(out.y, norm);
            if (out.error_bound <= tol * scale) return out;
            if (step < best_step) {
                best_step = step;
                stalled = 0;
            } else if (++stalled >= 4 && out.error_bound <= floor_tol * scale) {
                return out;
            }
        }
        throw EvaluationError("inverse iteration did not certify tolerance at " + to_string(x));
    }
};

} // namespace

InverseSolve perturbed_linear_inverse(const Matrix& T, const Perturbation& phi, const Point& x, double tol, Norm norm,
                                      int max_iter) {
    return PerturbedSolver(T, phi, norm).solve(x, tol, max_iter);
}

Homeo build_perturbed_linear(const Matrix& T, const Perturbation& phi, Norm norm, double inverse_tol) {
    const double s = inverse_norm_bound(T, norm);
    if (!(phi.lipschitz < s)) {
        std::ostringstream os;
        os << "Lip(phi) = " << phi.lipschitz << " must be below 1/||T^-1|| = " << s;
        throw PreconditionError(os.str());
    }
    auto solver = std::make_shared<const PerturbedSolver>(T, phi, norm);
    auto fwd = [T, phi](const Point& x) { return Point(T * x + phi.eval(x)); };
    auto inv = [solver, inverse_tol](const Point& x) { return solver->solve(x, inverse_tol, 1000).y; };
    return Homeo(Domain::whole_space(static_cast<int>(T.rows()), norm), "T+" + phi.name, fwd, inv);
}

Homeo pure_linear(const Domain& domain, const Matrix& A) {
    if (A.rows() != domain.dim() || A.cols() != domain.dim()) throw std::invalid_argument("matrix size differs from domain");
    Eigen::FullPivLU<Matrix> lu(A);
    if (!lu.isInvertible()) throw std::invalid_argument("linear map must be invertible");
    const Matrix Ai = lu.inverse();
    return Homeo(domain, "linear", [A](const Point& x) { return Point(A * x); },
                 [Ai](const Point& x) { return Point(Ai * x); });
}

Homeo pure_linear(const Domain& domain, double eta) {
    if (domain.dim() != 1) throw std::invalid_argument("scalar linear map needs a 1D domain");
    if (eta == 0.0 || !std::isfinite(eta)) throw std::invalid_argument("linear slope must be finite and nonzero");
    if (domain.region() == Region::half_line && !(eta > 0.0)) {
        throw std::invalid_argument("linear map of a half-line needs a positive slope");
    }
    std::ostringstream os;
    os << eta << "x";
    return Homeo(domain, os.str(), [eta](const Point& x) { return Point(eta * x); },
                 [eta](const Point& x) { return Point(x / eta); });
}

Homeo translation(const Point& shift, Norm norm) {
    std::ostringstream os;
    os << "x+" << to_string(shift);
    return Homeo(Domain::whole_space(static_cast<int>(shift.size()), norm), os.str(),
                 [shift](const Point& x) { return Point(x + shift); }, [shift](const Point& x) { return Point(x - shift); });
}

// ---------------------------------------------------------------------------

std::string_view to_string(FamilyKind k) {
    switch (k) {
    case FamilyKind::section42: return "section42";
    case FamilyKind::lozi: return "lozi";
    case FamilyKind::perturbed_linear: return "perturbed_linear";
    case FamilyKind::pure_linear: return "pure_linear";
    case FamilyKind::translation: return "translation";
    }
    return "unknown";
}

FamilyKind family_from_string(std::string_view name) {
    for (FamilyKind k : {FamilyKind::section42, FamilyKind::lozi, FamilyKind::perturbed_linear, FamilyKind::pure_linear,
                         FamilyKind::translation}) {
        if (to_string(k) == name) return k;
    }
    throw std::invalid_argument("unknown family '" + std::string(name) + "'");
}

const std::vector<FamilyInfo>& family_catalog() {
    static const std::vector<FamilyInfo> catalog{
        {FamilyKind::section42,
         "f(x) = eta x and g(x) = eta x + bump(x) on [0, inf) with Phi(x) = sqrt(x) + 1, r(x) = x",
         {{"eta", 0.25, "contraction rate, 0 < eta < 1"}}},
        {FamilyKind::lozi,
         "(x, y) -> (1 - a|x| + y, b x) on R^2 with Phi = ||.|| + 1, r(u) = u",
         {{"a", 1.7, "nonlinearity"}, {"b", 0.5, "nonzero contraction"}}},
        {FamilyKind::perturbed_linear,
         "x -> slope x + c log(1 + x^2) on R with Phi = |x| + 1, r(u) = u",
         {{"slope", 1.0, "nonzero linear part"}, {"c", 0.5, "perturbation size, |c| < |slope|"}}},
        {FamilyKind::pure_linear,
         "x -> slope x on R with Phi = |x| + 1, r(u) = u",
         {{"slope", 0.5, "nonzero slope"}}},
        {FamilyKind::translation,
         "x -> x + shift on R with Phi = |x| + 1, r(u) = u",
         {{"shift", 1.0, "translation length"}}},
    };
    return catalog;
}

namespace {

const FamilyInfo& info_for(FamilyKind k) {
    for (const FamilyInfo& i : family_catalog()) {
        if (i.kind == k) return i;
    }
    throw std::logic_error("family missing from catalog");
}

std::map<std::string, double> resolve_params(const FamilySpec& spec) {
    const FamilyInfo& info = info_for(spec.family);
    std::map<std::string, double> out;
    for (const FamilyParamInfo& p : info.params) out[p.name] = p.default_value;
    for (const auto& [name, value] : spec.params) {
        if (!out.count(name)) {
            throw std::invalid_argument("family " + std::string(to_string(spec.family)) + " has no parameter '" + name + "'");
        }
        if (!std::isfinite(value)) throw std::invalid_argument("parameter '" + name + "' must be finite");
        out[name] = value;
    }
    return out;
}

Gauge linear_gauge(Norm norm) { return Gauge::radial(GrowthFn(FnKind::linear_plus), norm, 2.0, 0.5, 1.0); }

// Phi = ||.|| + 1, r(u) = u, R(u) = u + 1 with (a, b) = (1, 1).
FamilyInstance gauged_instance(FamilySpec spec, Domain domain, Homeo f) {
    return FamilyInstance{.spec = std::move(spec),
                          .domain = std::move(domain),
                          .f = std::move(f),
                          .g = std::nullopt,
                          .phi = linear_gauge(Norm::euclidean),
                          .R = GrowthFn(FnKind::linear_plus),
                          .r = ScaleFn(FnKind::identity),
                          .cross = CrossConstants(1.0, 1.0),
                          .alpha = std::nullopt,
                          .section42 = std::nullopt,
                          .metadata = {},
                          .warnings = {}};
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

FamilyInstance make_family(const FamilySpec& spec) {
    const std::map<std::string, double> p = resolve_params(spec);
    FamilySpec resolved{spec.family, p};
    const Domain line = Domain::whole_space(1);

    switch (spec.family) {
    case FamilyKind::section42: {
        Section42 s = build_section42(p.at("eta"));
        FamilyInstance inst{.spec = resolved,
                            .domain = s.domain,
                            .f = s.f,
                            .g = s.g,
                            .phi = s.phi,
                            .R = s.R,
                            .r = s.r,
                            .cross = s.cross,
                            .alpha = s.alpha,
                            .section42 = std::nullopt,
                            .metadata = {},
                            .warnings = s.warnings};
        inst.metadata["bump_shape"] = "quintic_smoothstep";
        inst.metadata["bump_center"] = num(s.bump.center);
        inst.metadata["bump_halfwidth"] = num(s.bump.halfwidth);
        inst.metadata["bump_height"] = num(s.bump.height);
        inst.metadata["epsilon"] = num(s.epsilon);
        inst.metadata["epsilon2"] = num(s.epsilon2);
        inst.section42 = std::move(s);
        return inst;
    }
    case FamilyKind::lozi: {
        const double b = p.at("b");
        if (b == 0.0) throw std::invalid_argument("lozi parameter b must be nonzero");
        return gauged_instance(resolved, Domain::whole_space(2), build_lozi(p.at("a"), b));
    }
    case FamilyKind::perturbed_linear: {
        Matrix T(1, 1);
        T(0, 0) = p.at("slope");
        if (T(0, 0) == 0.0) throw std::invalid_argument("perturbed_linear slope must be nonzero");
        return gauged_instance(resolved, line, build_perturbed_linear(T, log_perturbation(p.at("c"))));
    }
    case FamilyKind::pure_linear:
        return gauged_instance(resolved, line, pure_linear(line, p.at("slope")));
    case FamilyKind::translation:
        return gauged_instance(resolved, line, translation(scalar_point(p.at("shift"))));
    }
    throw std::logic_error("unhandled family");
}

} // namespace homconj
