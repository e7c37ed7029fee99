#include <chrono>
#include <iostream>

#include <CLI11.hpp>

#include "homconj/experiment.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_override) {
    homconj::ExperimentConfig cfg = homconj::load_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    homconj::check_config(cfg);
    const auto start = std::chrono::steady_clock::now();
    const homconj::RunOutcome outcome = homconj::run_experiment(cfg);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto dir = homconj::resolve_output_dir(cfg);
    homconj::write_artifacts(outcome, wall, dir);
    std::cout << (outcome.passed ? "PASS" : "FAIL") << ": " << outcome.summary << "\n";
    std::cout << "artifacts: " << dir.string() << "\n";
    return outcome.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conjugacy experiments for homeomorphism groups with gauge premetrics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    auto* run = app.add_subcommand("run", "Run an experiment and write its artifacts");
    run->add_option("config", config_path, "JSON config file")->required();
    run->add_option("-o,--output-dir", out_dir, "Override the config's output directory");

    std::string check_path;
    auto* validate = app.add_subcommand("validate", "Check a config without running it");
    validate->add_option("config", check_path, "JSON config file")->required();

    std::string report_dir;
    auto* report = app.add_subcommand("report", "Summarise a run directory");
    report->add_option("dir", report_dir, "Run directory")->required();

    auto* list = app.add_subcommand("list-families", "List map families and their parameters");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*run) return cmd_run(config_path, out_dir);
        if (*validate) {
            homconj::check_config(homconj::load_config(check_path));
            std::cout << "config ok\n";
            return 0;
        }
        if (*report) {
            std::cout << homconj::report_run(report_dir);
            return 0;
        }
        if (*list) {
            std::cout << homconj::describe_families();
            return 0;
        }
    } catch (const homconj::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
