#include "homconj/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "homconj/conjugacy.hpp"
#include "homconj/homspace.hpp"
#include "homconj/koopman.hpp"

#ifndef HOMCONJ_VERSION
#define HOMCONJ_VERSION "0.0.0"
#endif
#ifndef HOMCONJ_GIT_REV
#define HOMCONJ_GIT_REV "unknown"
#endif

namespace homconj {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::validate: return "validate";
    case ExperimentKind::eigen_check: return "eigen_check";
    case ExperimentKind::picard: return "picard";
    case ExperimentKind::lozi_membership: return "lozi_membership";
    case ExperimentKind::koenigs: return "koenigs";
    case ExperimentKind::abel: return "abel";
    case ExperimentKind::wandering: return "wandering";
    case ExperimentKind::fk_sweep: return "fk_sweep";
    }
    return "unknown";
}

ExperimentKind experiment_from_string(std::string_view name) {
    for (ExperimentKind k : {ExperimentKind::validate, ExperimentKind::eigen_check, ExperimentKind::picard,
                             ExperimentKind::lozi_membership, ExperimentKind::koenigs, ExperimentKind::abel,
                             ExperimentKind::wandering, ExperimentKind::fk_sweep}) {
        if (to_string(k) == name) return k;
    }
    throw std::invalid_argument("unknown experiment '" + std::string(name) + "'");
}

ConfigError::ConfigError(std::string where_, const std::string& what)
    : Error(where_ + ": " + what), where(std::move(where_)) {}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    const Tolerances& a = tolerances;
    const Tolerances& b = o.tolerances;
    return schema_version == o.schema_version && experiment == o.experiment && family.family == o.family.family &&
           family.params == o.family.params && sampling == o.sampling && a.abs == b.abs && a.rel == b.rel &&
           a.inv == b.inv && a.kappa_div == b.kappa_div && a.tri == b.tri && a.contr == b.contr && a.env == b.env &&
           a.conj == b.conj && a.koenigs == b.koenigs && parameters == o.parameters && output_dir == o.output_dir;
}

const std::map<std::string, double>& experiment_parameters(ExperimentKind k) {
    static const std::map<ExperimentKind, std::map<std::string, double>> table{
        {ExperimentKind::validate, {}},
        {ExperimentKind::eigen_check, {{"alpha", 0.0}}},
        {ExperimentKind::picard, {{"alpha", 0.0}, {"n_max", 200}, {"n_bnd", 32}, {"h0", 0}, {"check_envelope", 1}}},
        {ExperimentKind::lozi_membership, {}},
        {ExperimentKind::koenigs, {{"multiplier", 0.0}, {"n_max", 200}, {"level", 0}, {"map", 0}}},
        {ExperimentKind::abel, {{"multiplier", 0.0}, {"n_max", 200}, {"level", -1}, {"map", 0}, {"abel_tol", 1e-8}}},
        {ExperimentKind::wandering,
         {{"k_lo", 1.0}, {"k_hi", 1.5}, {"k_points", 51}, {"nu", 1}, {"n_max", 40}, {"lipschitz", 0.0}}},
        {ExperimentKind::fk_sweep, {{"k_max", 10000}, {"delta", 1.0}}},
    };
    return table.at(k);
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace {

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
            throw ConfigError(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
        }
    }
}

const json& require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where, "expected an object");
    return j;
}

double get_number(const json& obj, const std::string& key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where + "." + key, "must be finite");
    return d;
}

int get_int(const json& obj, const std::string& key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError(where + "." + key, "expected an integer");
    return v.get<int>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_string()) throw ConfigError(where.empty() ? key : where + "." + key, "expected a string");
    return v.get<std::string>();
}

std::map<std::string, double> get_number_map(const json& j, const std::string& where) {
    require_object(j, where);
    std::map<std::string, double> out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_number()) throw ConfigError(where + "." + it.key(), "expected a number");
        const double d = it.value().get<double>();
        if (!std::isfinite(d)) throw ConfigError(where + "." + it.key(), "must be finite");
        out[it.key()] = d;
    }
    return out;
}

SampleScheme parse_sampling(const json& j) {
    const std::string where = "sampling";
    require_object(j, where);
    reject_unknown(j,
                   {"window_radius", "grid_points_per_axis", "quasirandom_count", "geometric_points",
                    "exhaustion_levels", "seed"},
                   where);
    SampleScheme s;
    if (j.contains("window_radius")) s.window_radius = get_number(j, "window_radius", where);
    if (j.contains("grid_points_per_axis")) s.grid_points_per_axis = get_int(j, "grid_points_per_axis", where);
    if (j.contains("quasirandom_count")) s.quasirandom_count = get_int(j, "quasirandom_count", where);
    if (j.contains("geometric_points")) s.geometric_points = get_int(j, "geometric_points", where);
    if (j.contains("exhaustion_levels")) s.exhaustion_levels = get_int(j, "exhaustion_levels", where);
    if (j.contains("seed")) {
        const json& v = j.at("seed");
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            throw ConfigError(where + ".seed", "expected a nonnegative integer");
        }
        s.seed = v.get<std::uint64_t>();
    }
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where, e.what());
    }
    return s;
}

Tolerances parse_tolerances(const json& j) {
    const std::string where = "tolerances";
    require_object(j, where);
    reject_unknown(j, {"abs", "rel", "inv", "kappa_div", "tri", "contr", "env", "conj", "koenigs"}, where);
    Tolerances t;
    auto set = [&](const char* key, double& field) {
        if (!j.contains(key)) return;
        field = get_number(j, key, where);
        if (!(field > 0.0)) throw ConfigError(where + "." + key, "must be positive");
    };
    set("abs", t.abs);
    set("rel", t.rel);
    set("inv", t.inv);
    set("kappa_div", t.kappa_div);
    set("tri", t.tri);
    set("contr", t.contr);
    set("env", t.env);
    set("conj", t.conj);
    set("koenigs", t.koenigs);
    if (!(t.kappa_div > 1.0)) throw ConfigError(where + ".kappa_div", "must exceed 1");
    return t;
}

std::string line_col(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

} // namespace

ExperimentConfig parse_config(const json& j) {
    require_object(j, "config");
    reject_unknown(j, {"schema_version", "experiment", "family", "sampling", "tolerances", "parameters", "output_dir"},
                   "");
    ExperimentConfig cfg;
    if (!j.contains("schema_version")) throw ConfigError("schema_version", "missing");
    cfg.schema_version = get_int(j, "schema_version", "config");
    if (cfg.schema_version != kConfigSchemaVersion) {
        throw ConfigError("schema_version", "unsupported version " + std::to_string(cfg.schema_version));
    }
    if (!j.contains("experiment")) throw ConfigError("experiment", "missing");
    try {
        cfg.experiment = experiment_from_string(get_string(j, "experiment", ""));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("experiment", e.what());
    }

    if (!j.contains("family")) throw ConfigError("family", "missing");
    const json& fam = require_object(j.at("family"), "family");
    reject_unknown(fam, {"family", "params"}, "family");
    if (!fam.contains("family")) throw ConfigError("family.family", "missing");
    try {
        cfg.family.family = family_from_string(get_string(fam, "family", "family"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("family.family", e.what());
    }
    if (fam.contains("params")) cfg.family.params = get_number_map(fam.at("params"), "family.params");

    if (j.contains("sampling")) cfg.sampling = parse_sampling(j.at("sampling"));
    if (j.contains("tolerances")) cfg.tolerances = parse_tolerances(j.at("tolerances"));

    const auto& allowed = experiment_parameters(cfg.experiment);
    cfg.parameters = allowed;
    if (j.contains("parameters")) {
        for (const auto& [key, value] : get_number_map(j.at("parameters"), "parameters")) {
            if (!allowed.count(key)) {
                throw ConfigError("parameters." + key,
                                  "not a parameter of experiment " + std::string(to_string(cfg.experiment)));
            }
            cfg.parameters[key] = value;
        }
    }
    if (j.contains("output_dir")) cfg.output_dir = get_string(j, "output_dir", "");
    return cfg;
}

ExperimentConfig parse_config_text(std::string_view text) {
    json j;
    try {
        j = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError(line_col(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
    }
    return parse_config(j);
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open config");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

json config_to_json(const ExperimentConfig& cfg) {
    json params = json::object();
    for (const auto& [k, v] : cfg.family.params) params[k] = v;
    json experiment_params = json::object();
    for (const auto& [k, v] : cfg.parameters) experiment_params[k] = v;
    const Tolerances& t = cfg.tolerances;
    const SampleScheme& s = cfg.sampling;
    return json{
        {"schema_version", cfg.schema_version},
        {"experiment", std::string(to_string(cfg.experiment))},
        {"family", {{"family", std::string(to_string(cfg.family.family))}, {"params", params}}},
        {"sampling",
         {{"window_radius", s.window_radius},
          {"grid_points_per_axis", s.grid_points_per_axis},
          {"quasirandom_count", s.quasirandom_count},
          {"geometric_points", s.geometric_points},
          {"exhaustion_levels", s.exhaustion_levels},
          {"seed", s.seed}}},
        {"tolerances",
         {{"abs", t.abs},
          {"rel", t.rel},
          {"inv", t.inv},
          {"kappa_div", t.kappa_div},
          {"tri", t.tri},
          {"contr", t.contr},
          {"env", t.env},
          {"conj", t.conj},
          {"koenigs", t.koenigs}}},
        {"parameters", experiment_params},
        {"output_dir", cfg.output_dir},
    };
}

// ---------------------------------------------------------------------------
// Running experiments
// ---------------------------------------------------------------------------

namespace {

FamilyInstance build_family(const ExperimentConfig& cfg) {
    try {
        return make_family(cfg.family);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("family.params", e.what());
    } catch (const PreconditionError& e) {
        throw ConfigError("family.params", e.what());
    }
}

std::shared_ptr<const SampleSet> build_samples(const Domain& dom, const SampleScheme& scheme) {
    try {
        return std::make_shared<const SampleSet>(dom, scheme);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("sampling", e.what());
    }
}

double param(const ExperimentConfig& cfg, const std::string& key) { return cfg.parameters.at(key); }

int int_param(const ExperimentConfig& cfg, const std::string& key) {
    const double v = param(cfg, key);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError("parameters." + key, "expected an integer value");
    return static_cast<int>(v);
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json sup_json(const SupEstimate& e) {
    json trace = json::array();
    for (const WindowSample& w : e.window_trace) trace.push_back({w.window, w.estimate});
    return json{{"value", e.value},
                {"finiteness", std::string(to_string(e.finiteness))},
                {"argmax", to_string(e.argmax)},
                {"window_trace", trace},
                {"dropped", e.dropped}};
}

json eigen_json(const EigenReport& r) {
    return json{{"alpha", r.alpha},         {"lambda_f", r.lambda_f},       {"lambda_g", r.lambda_g},
                {"min_slack_f", r.min_slack_f}, {"min_slack_g", r.min_slack_g}, {"satisfied", r.satisfied},
                {"worst_point", to_string(r.worst_point)}};
}

json report_json(const ValidationReport& rep) {
    json out = json::array();
    for (const ConditionResult& c : rep.conditions) {
        out.push_back({{"name", c.name}, {"passed", c.passed}, {"worst_slack", c.worst_slack}, {"witness", c.witness}});
    }
    return out;
}

struct Run {
    const ExperimentConfig& cfg;
    RunOutcome out;
    json details = json::object();
    std::vector<std::string> warnings;

    void result(const std::string& name, double value, bool passed = true) {
        out.results.push_back({name, value, passed});
    }
};

double resolve_alpha(const ExperimentConfig& cfg, const FamilyInstance& inst) {
    const double a = param(cfg, "alpha");
    if (a > 0.0) {
        if (!(a > 1.0)) throw ConfigError("parameters.alpha", "must exceed 1");
        return a;
    }
    if (inst.alpha) return *inst.alpha;
    throw ConfigError("parameters.alpha", "family has no default alpha; set one above 1");
}

double resolve_multiplier(const ExperimentConfig& cfg, const FamilyInstance& inst) {
    double mult = param(cfg, "multiplier");
    if (mult == 0.0) {
        if (inst.spec.family == FamilyKind::section42) mult = inst.spec.params.at("eta");
        else if (inst.spec.family == FamilyKind::pure_linear) mult = std::abs(inst.spec.params.at("slope"));
        else throw ConfigError("parameters.multiplier", "family has no default multiplier");
    }
    if (!(mult > 0.0 && mult < 1.0)) throw ConfigError("parameters.multiplier", "must lie in (0, 1)");
    return mult;
}

const Homeo& pick_map(const ExperimentConfig& cfg, const FamilyInstance& inst) {
    const int which = int_param(cfg, "map");
    if (which == 0) return inst.f;
    if (which == 1 && inst.g) return *inst.g;
    throw ConfigError("parameters.map", "0 selects f; 1 selects g and needs a family with a second map");
}

void run_validate(Run& run, const FamilyInstance& inst, const SampleSet& samples) {
    const ValidationReport sp = validate_scale_pair(inst.R, inst.r, inst.cross, run.cfg.sampling, run.cfg.tolerances);
    const ValidationReport gp = validate_gauge(inst.phi, inst.R, samples, run.cfg.tolerances);
    for (const ConditionResult& c : sp.conditions) run.result("scale." + c.name, c.worst_slack, c.passed);
    for (const ConditionResult& c : gp.conditions) run.result("gauge." + c.name, c.worst_slack, c.passed);
    const std::vector<Point> cloud = samples.all();
    const RoundTripReport rf = check_round_trip(inst.f, cloud, run.cfg.tolerances.inv);
    run.result("round_trip.f", rf.worst_error, rf.passed);
    if (inst.g) {
        const RoundTripReport rg = check_round_trip(*inst.g, cloud, run.cfg.tolerances.inv);
        run.result("round_trip.g", rg.worst_error, rg.passed);
    }
    run.details["scale_pair"] = report_json(sp);
    run.details["gauge"] = report_json(gp);
}

void run_eigen(Run& run, const FamilyInstance& inst, const SampleSet& samples) {
    const double alpha = resolve_alpha(run.cfg, inst);
    const Homeo& g = inst.g ? *inst.g : inst.f;
    const EigenReport rep = check_P_alpha(inst.f, g, inst.phi, inst.r, alpha, samples, run.cfg.tolerances);
    run.result("alpha", alpha);
    run.result("lambda_f", rep.lambda_f);
    run.result("lambda_g", rep.lambda_g);
    run.result("min_slack_f", rep.min_slack_f, rep.min_slack_f >= -run.cfg.tolerances.abs);
    run.result("min_slack_g", rep.min_slack_g, rep.min_slack_g >= -run.cfg.tolerances.abs);
    run.details["eigen"] = eigen_json(rep);
    if (inst.spec.family == FamilyKind::section42 || inst.spec.family == FamilyKind::pure_linear) {
        const ObstructionReport obs =
            periodic_obstruction(inst.f, alpha, rep.lambda_f, Point::Zero(inst.domain.dim()), 1, run.cfg.tolerances);
        assert_eigen_periodic_exclusion(rep, obs);
        run.result("fixed_point_obstruction", obs.value, !obs.obstruction || !rep.satisfied);
        run.details["fixed_point_obstruction"] = {{"value", obs.value}, {"obstruction", obs.obstruction}};
    }
}

void run_picard(Run& run, const FamilyInstance& inst, const std::shared_ptr<const SampleSet>& samples) {
    if (!inst.g) throw ConfigError("family", "picard needs a family with two maps (section42)");
    const double alpha = resolve_alpha(run.cfg, inst);
    const int h0_choice = int_param(run.cfg, "h0");
    if (h0_choice != 0 && h0_choice != 1) throw ConfigError("parameters.h0", "0 starts from g, 1 from the identity");
    const Homeo h0 = h0_choice == 0 ? *inst.g : Homeo(inst.domain);

    PicardOptions opts;
    opts.alpha = alpha;
    opts.n_max = int_param(run.cfg, "n_max");
    opts.n_bnd = int_param(run.cfg, "n_bnd");
    opts.check_envelope = param(run.cfg, "check_envelope") != 0.0;
    if (opts.n_max < 1) throw ConfigError("parameters.n_max", "must be positive");
    if (opts.n_bnd < 0) throw ConfigError("parameters.n_bnd", "must be nonnegative");

    const PremetricContext ctx(inst.phi, inst.r, inst.cross, samples, run.cfg.tolerances);
    const ConjugacyResult res = picard_solve(inst.f, *inst.g, h0, ctx, opts);
    const IterationTrace& tr = res.trace;

    const bool converged = tr.verdict == PicardVerdict::converged;
    run.result("delta", res.gates.delta, res.failed_gate != "delta");
    run.result("A", res.gates.A);
    run.result("gate_threshold", res.gates.threshold());
    if (res.eigen) {
        run.result("min_slack_f", res.eigen->min_slack_f, res.eigen->min_slack_f >= -run.cfg.tolerances.abs);
        run.result("min_slack_g", res.eigen->min_slack_g, res.eigen->min_slack_g >= -run.cfg.tolerances.abs);
    }
    run.result("iterations", static_cast<double>(tr.steps.size()), converged);
    run.result("final_residual", res.final_residual, converged);
    run.result("envelope_checks", static_cast<double>(tr.envelope_checks.size()), tr.envelope_ok);

    for (const TraceStep& s : tr.steps) {
        run.out.trace.push_back({static_cast<double>(s.n), s.rho_increment, s.conj_residual, s.fk_envelope,
                                 s.compact_bound});
    }

    json gates{{"delta", res.gates.delta},
               {"delta_finiteness", std::string(to_string(res.gates.delta_finiteness))},
               {"A", res.gates.A},
               {"threshold", res.gates.threshold()},
               {"C", res.gates.C},
               {"passes", res.gates.passes()},
               {"failed_gate", res.failed_gate},
               {"margin", finite_or_null(res.gate_margin)}};
    if (inst.section42) gates["A_reference"] = inst.section42->A_reference;
    run.details["gates"] = gates;
    run.details["verdict"] = std::string(to_string(tr.verdict));
    if (res.eigen) run.details["eigen"] = eigen_json(*res.eigen);
    if (res.bound_K0) run.details["bound_K0"] = {{"bound", res.bound_K0->bound}, {"flagged", res.bound_K0->flagged}};
    if (res.bound_Kmax) {
        run.details["bound_Kmax"] = {{"bound", res.bound_Kmax->bound}, {"flagged", res.bound_Kmax->flagged}};
    }
    std::size_t env_fail = 0;
    double worst_env = -std::numeric_limits<double>::infinity();
    for (const EnvelopeCheck& c : tr.envelope_checks) {
        env_fail += c.passed ? 0 : 1;
        worst_env = std::max(worst_env, c.observed - c.envelope);
    }
    run.details["envelope"] = {{"anchor", tr.envelope_anchor ? json(*tr.envelope_anchor) : json(nullptr)},
                               {"epsilon", tr.envelope_epsilon},
                               {"checks", tr.envelope_checks.size()},
                               {"failures", env_fail},
                               {"max_excess", finite_or_null(worst_env)}};
    if (res.membership_h0) run.details["membership_h0"] = std::string(to_string(res.membership_h0->verdict));
    if (res.membership) run.details["membership"] = std::string(to_string(res.membership->verdict));
    for (const std::string& w : res.warnings) run.warnings.push_back(w);
    run.out.summary = "picard " + std::string(to_string(tr.verdict)) + " after " + std::to_string(tr.steps.size()) +
                      " steps";
    if (!res.failed_gate.empty()) run.out.summary += " (gate " + res.failed_gate + ")";
}

void run_lozi(Run& run, const FamilyInstance& inst, const SampleSet& samples) {
    const MembershipReport m = group_membership(inst.f, inst.phi, inst.r, samples, run.cfg.tolerances);
    const RLipschitzEstimate lip = r_lipschitz(inst.f, inst.r, samples, run.cfg.tolerances);
    run.result("displacement_f", m.forward.value, m.forward.finiteness == Finiteness::finite);
    run.result("displacement_f_inverse", m.inverse.value, m.inverse.finiteness == Finiteness::finite);
    run.result("lambda_r", lip.value, lip.finiteness == Finiteness::finite);
    run.details["membership"] = std::string(to_string(m.verdict));
    run.details["displacement_f"] = sup_json(m.forward);
    run.details["displacement_f_inverse"] = sup_json(m.inverse);
    run.out.summary = "membership " + std::string(to_string(m.verdict));
}

void run_koenigs(Run& run, const FamilyInstance& inst, const SampleSet& samples) {
    const double mult = resolve_multiplier(run.cfg, inst);
    const Homeo& f = pick_map(run.cfg, inst);
    const int level = int_param(run.cfg, "level");
    if (level < 0 || level > run.cfg.sampling.exhaustion_levels) {
        throw ConfigError("parameters.level", "must lie between 0 and sampling.exhaustion_levels");
    }
    const KoenigsResult k = koenigs_eigenfunction(f, Point::Zero(inst.domain.dim()), mult, int_param(run.cfg, "n_max"),
                                                  samples, run.cfg.tolerances, level);
    const bool ok = k.status == KoenigsStatus::converged;
    run.result("iterations", k.iterations, ok);
    run.result("increment", k.increment, ok);
    run.result("schroeder_residual", finite_or_null(k.residual).is_null() ? -1.0 : k.residual, ok);
    run.result("growth_exponent", k.growth_exponent);
    run.details["status"] = std::string(to_string(k.status));
    run.out.summary = "koenigs " + std::string(to_string(k.status));
}

void run_abel(Run& run, const FamilyInstance& inst, const SampleSet& samples) {
    if (inst.domain.dim() != 1) throw ConfigError("family", "abel needs a 1D family");
    const double mult = resolve_multiplier(run.cfg, inst);
    const Homeo& f = pick_map(run.cfg, inst);
    int level = int_param(run.cfg, "level");
    if (level < 0) level = run.cfg.sampling.exhaustion_levels;
    if (level > run.cfg.sampling.exhaustion_levels) throw ConfigError("parameters.level", "exceeds exhaustion_levels");
    const KoenigsResult k = koenigs_eigenfunction(f, Point::Zero(1), mult, int_param(run.cfg, "n_max"), samples,
                                                  run.cfg.tolerances, level);
    if (k.status != KoenigsStatus::converged) {
        run.result("koenigs_converged", 0.0, false);
        run.out.summary = "abel: Koenigs step " + std::string(to_string(k.status));
        return;
    }
    // Abel solution on the positive part of the compact where Psi converged.
    std::vector<Point> cloud;
    for (const Point& x : samples.exhaustion(level)) {
        if (x(0) > 0.0) cloud.push_back(x);
    }
    const double log_mult = std::log(mult);
    const auto psi = k.psi;
    const ResidualReport rep = abel_check(
        f, [&](const Point& x) { return std::log(psi(x)(0)) / log_mult; }, cloud);
    const double tol = param(run.cfg, "abel_tol");
    run.result("koenigs_iterations", k.iterations);
    run.result("abel_residual", rep.sup_residual, rep.sup_residual < tol);
    run.details["worst_point"] = to_string(rep.worst_point);
    run.out.summary = "abel residual " + std::to_string(rep.sup_residual);
}

void run_wandering(Run& run, const FamilyInstance& inst, const SampleSet& samples) {
    if (inst.domain.dim() != 1) throw ConfigError("family", "wandering needs a 1D family");
    const double lo = param(run.cfg, "k_lo");
    const double hi = param(run.cfg, "k_hi");
    const int count = int_param(run.cfg, "k_points");
    if (!(lo < hi) || count < 2) throw ConfigError("parameters", "wandering needs k_lo < k_hi and k_points >= 2");
    std::vector<Point> K;
    for (int i = 0; i < count; ++i) {
        const Point x = scalar_point(lo + (hi - lo) * static_cast<double>(i) / (count - 1));
        if (!inst.domain.contains(x)) throw ConfigError("parameters.k_lo", "compact leaves the domain");
        K.push_back(x);
    }
    const double radius = 0.5 * (hi - lo) / (count - 1);
    double lip = param(run.cfg, "lipschitz");
    if (lip == 0.0) {
        const RLipschitzEstimate est = r_lipschitz(inst.f, ScaleFn(FnKind::identity), samples, run.cfg.tolerances);
        if (est.finiteness != Finiteness::finite) throw DivergentEstimate("Lipschitz constant of f is not finite");
        lip = est.value;
    }
    const WanderingReport rep = wandering_check(inst.f, K, radius, lip, int_param(run.cfg, "nu"), int_param(run.cfg, "n_max"));
    run.result("min_margin", rep.min_margin, rep.wandering);
    run.result("lipschitz", lip);
    run.details["wandering"] = rep.wandering;
    run.details["collision"] = {rep.collision_n, rep.collision_m};
    run.details["note"] = rep.note;
    run.out.summary = rep.wandering ? "wandering up to n_max"
                                    : "collision at (" + std::to_string(rep.collision_n) + ", " +
                                          std::to_string(rep.collision_m) + ")";
}

void run_fk_sweep(Run& run) {
    const int k_max = int_param(run.cfg, "k_max");
    const double delta = param(run.cfg, "delta");
    if (k_max < 1) throw ConfigError("parameters.k_max", "must be positive");
    json rows = json::array();
    for (double eps : {1e-3, 1e-2, 1e-1}) {
        for (double C : {0.3, 0.5, 0.9}) {
            const FkThresholds th = fk_thresholds(eps, C, delta);
            const int n = th.n_star();
            const FkEnvelope env = fk_envelope(n + 1, n, eps, C, k_max);
            const double maxF = *std::max_element(env.F.begin(), env.F.end());
            const bool below = maxF <= 2.0 * eps;
            const bool enveloped = maxF <= env.upper_bound();
            std::ostringstream name;
            name << "eps=" << eps << ",C=" << C;
            run.result(name.str() + ":max_F", maxF, below && enveloped);
            rows.push_back({{"epsilon", eps},
                            {"C", C},
                            {"N1", th.N1},
                            {"N2", th.N2},
                            {"N3", th.N3},
                            {"n_star", n},
                            {"max_F", maxF},
                            {"two_epsilon", 2.0 * eps},
                            {"upper_bound", env.upper_bound()}});
        }
    }
    run.details["sweep"] = rows;
}

} // namespace

void check_config(const ExperimentConfig& cfg) {
    const FamilyInstance inst = build_family(cfg);
    build_samples(inst.domain, cfg.sampling);
    for (const auto& [key, value] : cfg.parameters) {
        if (!experiment_parameters(cfg.experiment).count(key)) throw ConfigError("parameters." + key, "unknown");
        (void)value;
    }
}

RunOutcome run_experiment(const ExperimentConfig& cfg) {
    Run run{cfg, {}, json::object(), {}};
    const FamilyInstance inst = build_family(cfg);
    const auto samples = build_samples(inst.domain, cfg.sampling);
    for (const std::string& w : inst.warnings) run.warnings.push_back(w);

    switch (cfg.experiment) {
    case ExperimentKind::validate: run_validate(run, inst, *samples); break;
    case ExperimentKind::eigen_check: run_eigen(run, inst, *samples); break;
    case ExperimentKind::picard: run_picard(run, inst, samples); break;
    case ExperimentKind::lozi_membership: run_lozi(run, inst, *samples); break;
    case ExperimentKind::koenigs: run_koenigs(run, inst, *samples); break;
    case ExperimentKind::abel: run_abel(run, inst, *samples); break;
    case ExperimentKind::wandering: run_wandering(run, inst, *samples); break;
    case ExperimentKind::fk_sweep: run_fk_sweep(run); break;
    }

    RunOutcome& out = run.out;
    out.passed = std::all_of(out.results.begin(), out.results.end(), [](const ResultRow& r) { return r.passed; });
    out.exit_code = out.passed ? 0 : 2;
    if (out.summary.empty()) out.summary = std::string(to_string(cfg.experiment)) + (out.passed ? " passed" : " failed");

    json results = json::object();
    for (const ResultRow& r : out.results) results[r.name] = {{"value", finite_or_null(r.value)}, {"passed", r.passed}};
    json trace = json::array();
    for (const auto& row : out.trace) {
        json jr = json::array();
        for (double v : row) jr.push_back(finite_or_null(v));
        trace.push_back(jr);
    }
    json metadata = json::object();
    for (const auto& [k, v] : inst.metadata) metadata[k] = v;
    metadata["domain_dim"] = inst.domain.dim();
    metadata["sample_points"] = samples->all().size();

    out.record = json{{"schema_version", kConfigSchemaVersion},
                      {"tool", {{"name", "homconj"}, {"version", HOMCONJ_VERSION}, {"git", HOMCONJ_GIT_REV}}},
                      {"config", config_to_json(cfg)},
                      {"verdict", {{"passed", out.passed}, {"exit_code", out.exit_code}, {"summary", out.summary}}},
                      {"results", results},
                      {"details", run.details},
                      {"trace_columns", {"n", "rho_increment", "conj_residual", "fk_envelope", "compact_bound"}},
                      {"trace", trace},
                      {"metadata", metadata},
                      {"warnings", run.warnings}};
    return out;
}

fs::path resolve_output_dir(const ExperimentConfig& cfg) {
    fs::path dir = cfg.output_dir.empty()
                       ? fs::path(std::string(to_string(cfg.experiment)) + "-" + std::string(to_string(cfg.family.family)))
                       : fs::path(cfg.output_dir);
    if (dir.is_absolute()) return dir;
    const char* root = std::getenv(std::string(kOutputRootEnv).c_str());
    return fs::path(root && *root ? root : "runs") / dir;
}

namespace {

std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

} // namespace

void write_artifacts(const RunOutcome& outcome, double wall_seconds, const fs::path& dir) {
    fs::create_directories(dir);
    json record = outcome.record;
    record["timing"] = {{"wall_seconds", wall_seconds}};
    write_text(dir / "run_record.json", record.dump(2) + "\n");

    std::ostringstream results;
    results << "name,value,passed\n";
    for (const ResultRow& r : outcome.results) {
        results << '"' << r.name << '"' << ',' << csv_number(r.value) << ',' << (r.passed ? "true" : "false") << '\n';
    }
    write_text(dir / "results.csv", results.str());

    std::ostringstream trace;
    trace << "n,rho_increment,conj_residual,fk_envelope,compact_bound\n";
    for (const auto& row : outcome.trace) {
        for (std::size_t i = 0; i < row.size(); ++i) trace << (i ? "," : "") << csv_number(row[i]);
        trace << '\n';
    }
    write_text(dir / "trace.csv", trace.str());
}

std::string report_run(const fs::path& dir) {
    const fs::path path = dir / "run_record.json";
    if (!fs::exists(path)) throw Error("no run_record.json in " + dir.string());
    std::ifstream in(path);
    json rec;
    try {
        rec = json::parse(in);
    } catch (const json::exception& e) {
        throw Error("unreadable run record " + path.string() + ": " + e.what());
    }
    std::ostringstream os;
    os.precision(6);
    const json& cfg = rec.at("config");
    const json& verdict = rec.at("verdict");
    os << "experiment: " << cfg.at("experiment").get<std::string>() << " (family "
       << cfg.at("family").at("family").get<std::string>() << ")\n";
    os << "verdict:    " << (verdict.at("passed").get<bool>() ? "PASS" : "FAIL") << " (exit "
       << verdict.at("exit_code").get<int>() << ") " << verdict.at("summary").get<std::string>() << "\n";

    const json& details = rec.at("details");
    if (details.contains("gates")) {
        const json& g = details.at("gates");
        os << "gates:      delta = " << g.at("delta") << ", A = " << g.at("A") << ", min(1, 1/A) = " << g.at("threshold");
        if (g.contains("A_reference")) os << " (reference A = " << g.at("A_reference") << ")";
        os << "\n";
        if (!g.at("failed_gate").get<std::string>().empty()) {
            os << "failed gate: " << g.at("failed_gate").get<std::string>() << " (margin " << g.at("margin") << ")\n";
        }
    }
    if (details.contains("eigen")) {
        const json& e = details.at("eigen");
        os << "P_alpha:    alpha = " << e.at("alpha") << ", slack_f = " << e.at("min_slack_f")
           << ", slack_g = " << e.at("min_slack_g") << ", satisfied = " << e.at("satisfied") << "\n";
    }
    const json& trace = rec.at("trace");
    if (!trace.empty()) {
        os << "residual curve (n: conj_residual):\n";
        for (const json& row : trace) os << "  " << static_cast<long>(row.at(0).get<double>()) << ": " << row.at(2) << "\n";
        os << "final residual: " << trace.back().at(2) << "\n";
    }
    if (details.contains("membership_h0")) os << "membership h0: " << details.at("membership_h0").get<std::string>() << "\n";
    if (details.contains("membership")) os << "membership:  " << details.at("membership").get<std::string>() << "\n";
    const json& results = rec.at("results");
    if (!results.empty()) {
        os << "results:\n";
        for (auto it = results.begin(); it != results.end(); ++it) {
            os << "  " << it.key() << " = " << it.value().at("value") << (it.value().at("passed").get<bool>() ? "" : "  [FAIL]")
               << "\n";
        }
    }
    for (const json& w : rec.at("warnings")) os << "warning: " << w.get<std::string>() << "\n";
    return os.str();
}

std::string describe_families() {
    std::ostringstream os;
    for (const FamilyInfo& info : family_catalog()) {
        os << to_string(info.kind) << ": " << info.description << "\n";
        for (const FamilyParamInfo& p : info.params) {
            os << "    " << p.name << " (default " << p.default_value << "): " << p.description << "\n";
        }
    }
    return os.str();
}

} // namespace homconj
