#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "homconj/homspace.hpp"
#include "homconj/koopman.hpp"

namespace homconj {

/// L_{f,g}(h) = f o h o g^-1.
Homeo conjugacy_operator(const Homeo& f, const Homeo& g, const Homeo& h);
/// L_{f,g}^-1(h) = f^-1 o h o g.
Homeo conjugacy_operator_inverse(const Homeo& f, const Homeo& g, const Homeo& h);
/// L_{f,g}^n(h0) for any integer n.
Homeo conjugacy_iterate(const Homeo& f, const Homeo& g, const Homeo& h0, int n);

struct GateConstants {
    double A = 0.0;
    double delta = 0.0;
    double C = 0.0;
    double a = 0.0;
    double b = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double m = 0.0;
    Finiteness delta_finiteness = Finiteness::finite;

    /// min(1, 1/A).
    double threshold() const;
    bool passes() const;

    /// A recomputed from the gauge and cross constants; C = 1/alpha.
    static GateConstants from(const Gauge& phi, const CrossConstants& cross, double delta, double alpha);
};

/// rho(L h1, L h2) <= rho(h1, h2) / alpha + tau_contr, both estimated on ctx's samples.
InequalityReport contraction_check(const Homeo& f, const Homeo& g, const Homeo& h1, const Homeo& h2, double alpha,
                                   const PremetricContext& ctx);

struct FkEnvelope {
    int m = 0;
    int n = 0;
    double epsilon = 0.0;
    double C = 0.0;
    std::vector<double> F; ///< F_0 .. F_{k_max}
    double a_m = 0.0;      ///< C^{m+1}(1 + 1/epsilon) + C
    /// C^m (epsilon/(1 - a_m) + 1/(1 - C)); infinite when a_m >= 1.
    double telescoped = 0.0;
    /// telescoped + epsilon: upper envelope of every F_k once a_m < 1.
    double upper_bound() const { return telescoped + epsilon; }
};

/// F_k(m, n) = C^{m+k-1} F_{k-1} + C^{m+k-1} + F_{k-1}, F_0 = epsilon.
/// Throws std::invalid_argument unless 0 < C < 1 and epsilon > 0.
FkEnvelope fk_envelope(int m, int n, double epsilon, double C, int k_max);

struct FkThresholds {
    int N1 = 0; ///< first n with C^n delta < epsilon
    int N2 = 0; ///< first m with a_m < 1
    int N3 = 0; ///< first m with C^m (epsilon/(1 - a_m) + 1/(1 - C)) <= epsilon
    /// Every n >= n_star has F_k(n+1, n) <= 2 epsilon for all k.
    int n_star() const;
};

FkThresholds fk_thresholds(double epsilon, double C, double delta = 1.0);

struct BoundReport {
    double bound = 0.0;         ///< max over K and |n| <= N of ||L^n(h0)(x)||
    std::vector<double> per_n;  ///< index i holds the max over K at n = i - N
    bool flagged = false;       ///< growth beyond kappa_div or non-finite values
    std::string reason;
};

/// Two-sided boundedness of {L^n(h0)} on the compact sample K for |n| <= n_bnd.
BoundReport negative_iterates_bound(const Homeo& f, const Homeo& g, const Homeo& h0, const std::vector<Point>& K,
                                    int n_bnd, const Tolerances& tol = {});

/// sup over samples of r(||f(h(x)) - h(g(x))||) / Phi(g(x)).
double conjugacy_residual(const Homeo& f, const Homeo& g, const Homeo& h, const Gauge& phi, const ScaleFn& r,
                          const SampleSet& samples);

enum class PicardVerdict { converged, gate_failed, budget_exhausted, unbounded_on_compacts };
std::string_view to_string(PicardVerdict v);

struct TraceStep {
    int n = 0;
    double rho_increment = 0.0; ///< rho(h_{n+1}, h_n)
    double conj_residual = 0.0; ///< direct residual of h_n
    double compact_bound = 0.0; ///< max over K_0 of ||h_n|| and ||h_{-n}||
    /// F_{n-n0-1}(n0+1, n0) once the envelope is anchored at n0; NaN before.
    double fk_envelope = 0.0;
    Finiteness increment_finiteness = Finiteness::finite;
};

struct EnvelopeCheck {
    int n = 0;
    int k = 0;
    double observed = 0.0; ///< rho(h_{n+k+1}, h_n)
    double envelope = 0.0; ///< F_k(n+1, n)
    bool passed = true;
};

struct IterationTrace {
    std::vector<TraceStep> steps;
    PicardVerdict verdict = PicardVerdict::budget_exhausted;
    std::optional<int> envelope_anchor;   ///< n0
    double envelope_epsilon = 0.0;
    std::vector<EnvelopeCheck> envelope_checks;
    bool envelope_ok = true;
};

struct PicardOptions {
    double alpha = 0.0;
    int n_max = 200;
    int n_bnd = 32;
    /// Compare every recorded rho(h_{n+k+1}, h_n) with the F_k envelope.
    bool check_envelope = true;
};

struct ConjugacyResult {
    Homeo h;
    IterationTrace trace;
    GateConstants gates;
    std::optional<EigenReport> eigen;
    std::optional<BoundReport> bound_K0;
    std::optional<BoundReport> bound_Kmax;
    std::string failed_gate;   ///< "P_alpha", "delta" or "boundedness"
    double gate_margin = 0.0;  ///< how far the failed gate is from passing
    double final_residual = 0.0;
    std::optional<MembershipReport> membership_h0;
    std::optional<MembershipReport> membership;
    std::vector<std::string> warnings;
};

/// Picard iteration h_{n+1} = L_{f,g}(h_n) behind the P_alpha, delta and
/// boundedness gates. Failures are reported through the trace verdict.
ConjugacyResult picard_solve(const Homeo& f, const Homeo& g, const Homeo& h0, const PremetricContext& ctx,
                             const PicardOptions& opts);

} // namespace homconj
