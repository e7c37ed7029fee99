// One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "homconj/conjugacy.hpp"
#include "homconj/experiment.hpp"
#include "homconj/families.hpp"
#include "homconj/homspace.hpp"
#include "homconj/koopman.hpp"

using namespace homconj;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

Gauge linear_gauge() { return Gauge::radial(GrowthFn(FnKind::linear_plus), Norm::euclidean, 2.0, 0.5, 1.0); }
Gauge sqrt_gauge() { return Gauge::radial(GrowthFn(FnKind::sqrt_plus), Norm::euclidean, 2.0, 0.5, 1.0); }

std::shared_ptr<const SampleSet> line_samples(int grid = 401, std::uint64_t seed = 0) {
    SampleScheme s;
    s.grid_points_per_axis = grid;
    s.seed = seed;
    return std::make_shared<const SampleSet>(Domain::whole_space(1), s);
}

/// Seeded homeomorphisms of the line with finite displacement for Phi = |x| + 1.
Homeo random_line_map(Rng& rng) {
    const Domain line = Domain::whole_space(1);
    const int kind = static_cast<int>(rng.next() % 4);
    const Homeo shift = translation(scalar_point(rng.uniform(-3.0, 3.0)));
    switch (kind) {
    case 0: return shift;
    case 1: return pure_linear(line, rng.uniform(0.5, 2.0));
    case 2: return build_perturbed_linear(Matrix::Identity(1, 1), log_perturbation(rng.uniform(-0.9, 0.9)));
    default: return compose(shift, pure_linear(line, rng.uniform(0.5, 2.0)));
    }
}

// ---------------------------------------------------------------------------

struct Section42Run {
    double eta = 0.0;
    ConjugacyResult result;
    double seconds = 0.0;
    bool validations = false;
};

std::vector<Section42Run>& section42_runs() {
    static std::vector<Section42Run> runs = [] {
        std::vector<Section42Run> out;
        for (double eta : {0.1, 0.25, 0.5}) {
            const auto start = std::chrono::steady_clock::now();
            const Section42 s = build_section42(eta);
            SampleScheme scheme;
            scheme.grid_points_per_axis = 4001;
            scheme.geometric_points = 400;
            auto samples = std::make_shared<const SampleSet>(s.domain, scheme);
            const bool valid = validate_scale_pair(s.R, s.r, s.cross, scheme).passed() &&
                               validate_gauge(s.phi, s.R, *samples).passed();
            const PremetricContext ctx(s.phi, s.r, s.cross, samples);
            PicardOptions opts;
            opts.alpha = s.alpha;
            ConjugacyResult res = picard_solve(s.f, s.g, s.g, ctx, opts);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            out.push_back({eta, std::move(res), secs, valid});
        }
        return out;
    }();
    return runs;
}

Outcome criterion1() {
    Outcome o{true, ""};
    for (const Section42Run& r : section42_runs()) {
        const ConjugacyResult& res = r.result;
        const bool eig = res.eigen && res.eigen->satisfied && res.eigen->min_slack_f >= 0.0 &&
                         res.eigen->min_slack_g >= 0.0;
        const bool ok = r.validations && eig && res.trace.verdict == PicardVerdict::converged &&
                        res.final_residual < 1e-6 && res.trace.steps.size() <= 200 && r.seconds < 60.0;
        o.passed = o.passed && ok;
        o.detail += "eta=" + fmt(r.eta) + ": " + std::string(to_string(res.trace.verdict)) + " in " +
                    std::to_string(res.trace.steps.size()) + " steps, residual " + fmt(res.final_residual) + ", " +
                    fmt(r.seconds) + " s; ";
    }
    return o;
}

Outcome criterion2() {
    const auto samples = line_samples();
    const bool id_zero =
        displacement(Homeo(Domain::whole_space(1)), linear_gauge(), ScaleFn(FnKind::identity), *samples).value == 0.0;
    const SampleSet half(Domain::half_line(), SampleScheme{});
    const Homeo f = pure_linear(Domain::half_line(), 0.5);
    const auto disp = displacement(f, sqrt_gauge(), ScaleFn(FnKind::identity), half);
    const auto rho = premetric(f, f, sqrt_gauge(), ScaleFn(FnKind::identity), half);
    const bool ok = id_zero && disp.finiteness == Finiteness::divergent && rho.rho == 0.0;
    return {ok, "|id| = 0: " + std::string(id_zero ? "yes" : "no") + ", |Ax| " + std::string(to_string(disp.finiteness)) +
                    ", rho(Ax, Ax) = " + fmt(rho.rho)};
}

Outcome criterion3() {
    const auto samples = line_samples();
    const Gauge phi = linear_gauge();
    const CrossConstants cross(1.0, 1.0);
    const ScaleFn r(FnKind::identity);
    Rng rng(3);
    const auto cloud = samples->all();
    int members = 0;
    int attempts = 0;
    double worst = std::numeric_limits<double>::infinity();
    while (members < 200 && attempts < 1000) {
        ++attempts;
        const Homeo f = random_line_map(rng);
        const auto d = displacement(f, phi, r, *samples);
        if (d.finiteness != Finiteness::finite) continue;
        ++members;
        const double lambda = koopman_lambda(d, phi, cross);
        for (const Point& x : cloud) worst = std::min(worst, lambda * phi(x) + 1e-12 - phi(f(x)));
    }
    return {members == 200 && worst >= 0.0,
            std::to_string(members) + " members, min slack " + fmt(worst)};
}

Outcome criterion4() {
    const PremetricContext ctx(linear_gauge(), ScaleFn(FnKind::identity), CrossConstants(1.0, 1.0), line_samples(201));
    Rng rng(4);
    int failures = 0;
    int vacuous = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 1000; ++i) {
        const Homeo f = random_line_map(rng);
        const Homeo g = random_line_map(rng);
        const Homeo h = random_line_map(rng);
        const InequalityReport rep = check_relaxed_triangle(f, g, h, ctx);
        if (rep.vacuous) {
            ++vacuous;
            continue;
        }
        const double slack = rep.rhs - rep.lhs;
        worst = std::min(worst, slack);
        if (!(slack >= -1e-9)) ++failures;
    }
    return {failures == 0, "1000 triples, " + std::to_string(vacuous) + " vacuous, min slack " + fmt(worst)};
}

Outcome criterion5() {
    const PremetricContext ctx(linear_gauge(), ScaleFn(FnKind::identity), CrossConstants(1.0, 1.0), line_samples(201));
    Rng rng(5);
    int verified = 0;
    int members_checked = 0;
    const double c = ctx.linear_coefficient();
    int instances = 0;
    int draws = 0;
    while (instances < 200 && draws < 2000) {
        ++draws;
        const Homeo f = random_line_map(rng);
        const double alpha_star = rng.uniform(0.5, 2.0);
        const double target = rng.uniform(0.0, 0.9) * alpha_star / c;
        const Homeo g = compose(translation(scalar_point(target)), f);
        // rho(f, t o f) exceeds |t| when f is not an isometry; redraw those.
        const double rho_fg = premetric(f, g, ctx).rho;
        if (!(rho_fg < alpha_star / c)) continue;
        ++instances;
        const double alpha = inner_ball_radius(rho_fg, alpha_star, ctx);
        bool inside = true;
        int members = 0;
        for (int j = 0; j < 10; ++j) {
            const double t = rng.uniform(-1.0, 1.0) * alpha;
            const Homeo h = j % 2 == 0 ? compose(translation(scalar_point(t)), g)
                                       : compose(g, pure_linear(Domain::whole_space(1), 1.0 + 0.5 * t));
            const auto rho_gh = premetric(g, h, ctx);
            if (rho_gh.finiteness != Finiteness::finite || !(rho_gh.rho < alpha)) continue;
            ++members;
            const auto rho_fh = premetric(f, h, ctx);
            inside = inside && rho_fh.finiteness == Finiteness::finite && rho_fh.rho < alpha_star + 1e-9;
        }
        members_checked += members;
        if (inside && members > 0) ++verified;
    }
    return {instances == 200 && verified == 200,
            std::to_string(verified) + "/" + std::to_string(instances) + " instances (" + std::to_string(draws) +
                " draws), " + std::to_string(members_checked) + " ball members checked"};
}

Outcome criterion6() {
    const Domain line = Domain::whole_space(1);
    const auto samples = line_samples(201);
    const PremetricContext ctx(sqrt_gauge(), ScaleFn(FnKind::identity), CrossConstants(1.0, 1.25), samples);
    Rng rng(6);
    int failures = 0;
    int checked = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 500; ++i) {
        const double ef = rng.uniform(0.1, 0.9);
        const double eg = rng.uniform(0.1, 0.9);
        const Homeo f = pure_linear(line, ef);
        const Homeo g = pure_linear(line, eg);
        const double alpha = std::min(1.0 / std::sqrt(ef), 1.0 / std::sqrt(eg));
        const EigenReport eig = check_P_alpha(f, g, ctx.phi, ctx.r, alpha, *samples, ctx.tol);
        if (!eig.satisfied) {
            ++failures;
            continue;
        }
        const Homeo lin = pure_linear(line, rng.uniform(0.5, 2.0));
        const Homeo h1 = compose(translation(scalar_point(rng.uniform(-3.0, 3.0))), lin);
        const Homeo h2 = compose(translation(scalar_point(rng.uniform(-3.0, 3.0))), lin);
        const InequalityReport rep = contraction_check(f, g, h1, h2, alpha, ctx);
        ++checked;
        worst = std::min(worst, rep.slack());
        if (!rep.passed || rep.vacuous) ++failures;
    }
    return {failures == 0 && checked == 500,
            std::to_string(checked) + " pairs under P_alpha, min slack " + fmt(worst)};
}

Outcome criterion7() {
    bool ok = true;
    double worst_ratio = 0.0;
    for (double eps : {1e-3, 1e-2, 1e-1}) {
        for (double C : {0.3, 0.5, 0.9}) {
            const FkThresholds th = fk_thresholds(eps, C);
            const int n = th.n_star();
            const FkEnvelope env = fk_envelope(n + 1, n, eps, C, 10000);
            for (double F : env.F) {
                ok = ok && F <= env.upper_bound() && F <= 2.0 * eps;
                worst_ratio = std::max(worst_ratio, F / (2.0 * eps));
            }
            // Envelope also holds past the threshold.
            const FkEnvelope later = fk_envelope(n + 6, n + 5, eps, C, 10000);
            for (double F : later.F) ok = ok && F <= later.upper_bound() && F <= 2.0 * eps;
        }
    }
    return {ok, "9 (eps, C) pairs, max F_k / 2eps = " + fmt(worst_ratio)};
}

Outcome criterion8() {
    bool ok = true;
    std::size_t checks = 0;
    for (const Section42Run& r : section42_runs()) {
        if (r.result.trace.verdict != PicardVerdict::converged) continue;
        ok = ok && r.result.trace.envelope_ok && !r.result.trace.envelope_checks.empty();
        for (const EnvelopeCheck& c : r.result.trace.envelope_checks) ok = ok && c.observed <= c.envelope + 1e-9;
        checks += r.result.trace.envelope_checks.size();
    }
    return {ok, std::to_string(checks) + " increment-vs-envelope comparisons"};
}

Outcome criterion9() {
    const double eta = 0.25;
    const SampleSet half(Domain::half_line(), SampleScheme{});
    const auto lin = koenigs_eigenfunction(pure_linear(Domain::half_line(), eta), scalar_point(0.0), eta, 50, half);
    double psi_err = 0.0;
    for (const Point& x : half.exhaustion(0)) psi_err = std::max(psi_err, std::abs(lin.psi(x)(0) - x(0)));

    const Domain open = Domain::half_line(0.0, true);
    const SampleSet os(open, SampleScheme{});
    const auto abel = abel_check(pure_linear(open, eta), [&](const Point& x) { return std::log(x(0)) / std::log(eta); }, os);

    const Section42 s = build_section42(eta);
    SampleScheme scheme;
    scheme.grid_points_per_axis = 4001;
    const SampleSet gs(s.domain, scheme);
    const auto kg = koenigs_eigenfunction(s.g, scalar_point(0.0), eta, 200, gs, {}, scheme.exhaustion_levels);

    const bool ok = lin.status == KoenigsStatus::converged && lin.residual < 1e-12 && psi_err < 1e-12 &&
                    abel.sup_residual < 1e-12 && kg.status == KoenigsStatus::converged && kg.residual < 1e-8;
    return {ok, "linear residual " + fmt(lin.residual) + ", |Psi - x| " + fmt(psi_err) + ", Abel " +
                    fmt(abel.sup_residual) + ", g residual " + fmt(kg.residual)};
}

Outcome criterion10() {
    const Domain open = Domain::half_line(0.0, true);
    const Homeo half = pure_linear(open, 0.5);
    std::vector<Point> K;
    for (int i = 0; i <= 50; ++i) K.push_back(scalar_point(1.0 + 0.01 * i));
    bool wandering = true;
    for (int nu = 1; nu <= 5; ++nu) wandering = wandering && wandering_check(half, K, 0.005, 0.5, nu, 40).wandering;

    // Mutual exclusion on the built-in families at their known fixed points.
    int pairs = 0;
    bool exclusion = true;
    for (double eta : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        const Section42 s = build_section42(eta);
        const SampleSet samples(s.domain, SampleScheme{});
        const EigenReport eig = check_P_alpha(s.f, s.g, s.phi, s.r, s.alpha, samples);
        for (const Homeo* m : {&s.f, &s.g}) {
            const double lam = m == &s.f ? eig.lambda_f : eig.lambda_g;
            const ObstructionReport obs = periodic_obstruction(*m, s.alpha, lam, scalar_point(0.0), 1);
            try {
                assert_eigen_periodic_exclusion(eig, obs);
            } catch (const PreconditionError&) {
                exclusion = false;
            }
            ++pairs;
        }
    }
    return {wandering && exclusion, std::string("x/2 wandering for nu = 1..5: ") + (wandering ? "yes" : "no") + ", " +
                                        std::to_string(pairs) + " exclusion checks " + (exclusion ? "clean" : "violated")};
}

Outcome criterion11() {
    bool ok = true;
    int configs = 0;
    const std::filesystem::path root = std::filesystem::temp_directory_path() / "homconj_acceptance_repro";
    for (const auto& entry : std::filesystem::directory_iterator(HOMCONJ_CONFIG_DIR)) {
        const ExperimentConfig cfg = load_config(entry.path());
        const RunOutcome a = run_experiment(cfg);
        const RunOutcome b = run_experiment(cfg);
        write_artifacts(a, 1.0, root / "a");
        write_artifacts(b, 2.0, root / "b");
        auto strip = [](const std::filesystem::path& p) {
            std::ifstream in(p);
            nlohmann::json j = nlohmann::json::parse(in);
            j.erase("timing");
            return j.dump();
        };
        ok = ok && a.record.dump() == b.record.dump() &&
             strip(root / "a" / "run_record.json") == strip(root / "b" / "run_record.json");
        ++configs;
    }
    std::filesystem::remove_all(root);
    return {ok && configs > 0, std::to_string(configs) + " bundled configs rerun with identical records"};
}

Outcome criterion12() {
    const Section42 s = build_section42(0.25);
    Rng rng(12);
    std::vector<Point> xs;
    for (int i = 0; i < 100; ++i) xs.push_back(scalar_point(rng.uniform(0.0, 10.0)));
    double worst = 0.0;
    for (int n = 0; n <= 10; ++n) {
        const Homeo chain = conjugacy_iterate(s.f, s.g, s.g, n);
        for (const Point& x : xs) {
            // f^n(h0(g^-n(x))) evaluated with explicit loops.
            double y = x(0);
            for (int k = 0; k < n; ++k) y = s.g.inverse(scalar_point(y))(0);
            y = s.g(scalar_point(y))(0);
            for (int k = 0; k < n; ++k) y = s.eta * y;
            worst = std::max(worst, std::abs(chain(x)(0) - y));
        }
    }
    return {worst <= 1e-12, "max pointwise difference " + fmt(worst) + " over n <= 10, 100 points"};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"worked example end to end", criterion1},
        {"separation and premetric identities", criterion2},
        {"Koopman bound on 200 members", criterion3},
        {"relaxed triangle on 1000 triples", criterion4},
        {"ball inside ball on 200 instances", criterion5},
        {"contraction on 500 pairs", criterion6},
        {"F_k recurrence and envelope", criterion7},
        {"observed increments within envelope", criterion8},
        {"functional-equation oracles", criterion9},
        {"wandering and obstruction consistency", criterion10},
        {"reproducibility", criterion11},
        {"oracle equivalence of iterates", criterion12},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.passed) ++failed;
        std::printf("%s %2zu %s: %s\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
