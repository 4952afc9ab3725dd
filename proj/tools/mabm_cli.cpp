// Command-line front end: mabm <subcommand> [options]

#include <cstdint>
#include <iostream>
#include <limits>
#include <string>

#include "CLI11.hpp"
#include "mabm/commands.hpp"

namespace {

std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fundamentalist/chartist market simulator with herding and intermittency tools"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(mabm::kToolVersion));

    mabm::RunManifest manifest;
    std::int64_t steps = std::numeric_limits<std::int64_t>::min();

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", manifest.config_path, "Config file (key = value)");
        sub->add_option("--seed", manifest.seed, "Master seed")->capture_default_str();
        sub->add_option("--steps", steps, "Number of steps");
        sub->add_option("--out", manifest.out_dir, "Output directory")->capture_default_str();
    };

    auto* herding = app.add_subcommand("herding", "Herding chain trajectory and switching summary");
    common(herding);
    herding->add_option("--every", manifest.every, "Write every k-th state")->capture_default_str();

    auto* stationary = app.add_subcommand("stationary", "Stationary densities and simulated histogram");
    common(stationary);

    auto* simulate = app.add_subcommand("simulate", "Full market time series");
    common(simulate);

    auto* soi = app.add_subcommand("soi", "Active-population trajectories from several N(0)");
    common(soi);
    soi->add_option("--n0", manifest.n0_values, "Initial active counts")->delimiter(',');
    soi->add_option("--jobs", manifest.jobs, "Parallel runs")->capture_default_str();

    auto* stats = app.add_subcommand("stats", "Stylized-facts report for a price or return CSV");
    common(stats);
    stats->add_option("--input", manifest.input_path, "CSV with a return or price column")->required();
    stats->add_option("--max-lag", manifest.max_lag, "Largest ACF lag")->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "Grid over one config key");
    common(sweep);
    sweep->add_option("--param", manifest.param, "Config key to vary")->required();
    sweep->add_option("--values", manifest.values, "Comma-separated values")->delimiter(',')->required();
    sweep->add_option("--replicates", manifest.replicates, "Seeds per value")->capture_default_str();
    sweep->add_option("--jobs", manifest.jobs, "Parallel cells")->capture_default_str();
    sweep->add_option("--mode", manifest.sweep_mode, "herding or simulate")->capture_default_str();
    sweep->add_option("--every", manifest.every, "Write every k-th state")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "mabm: error: usage: " << one_line(e.what()) << '\n';
        return 2;
    }

    if (herding->parsed()) manifest.subcommand = mabm::Subcommand::Herding;
    if (stationary->parsed()) manifest.subcommand = mabm::Subcommand::Stationary;
    if (simulate->parsed()) manifest.subcommand = mabm::Subcommand::Simulate;
    if (soi->parsed()) manifest.subcommand = mabm::Subcommand::Soi;
    if (stats->parsed()) manifest.subcommand = mabm::Subcommand::Stats;
    if (sweep->parsed()) manifest.subcommand = mabm::Subcommand::Sweep;
    if (steps != std::numeric_limits<std::int64_t>::min()) manifest.steps = steps;

    try {
        for (const auto& path : mabm::run_subcommand(manifest)) std::cout << path << '\n';
    } catch (const std::invalid_argument& e) {
        std::cerr << "mabm: error: invalid: " << one_line(e.what()) << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "mabm: error: runtime: " << one_line(e.what()) << '\n';
        return 1;
    }
    return 0;
}
