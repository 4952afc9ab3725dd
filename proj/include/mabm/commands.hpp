#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mabm/config.hpp"

namespace mabm {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class Subcommand { Herding, Stationary, Simulate, Soi, Stats, Sweep };

std::string_view to_string(Subcommand s);

/// Everything one invocation needs. Relative paths resolve against the
/// working directory.
struct RunManifest {
    Subcommand subcommand = Subcommand::Simulate;
    std::string config_path;  ///< empty: all defaults
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::optional<std::int64_t> steps;  ///< empty: per-subcommand default

    std::int64_t every = 1;               ///< trajectory thinning
    std::vector<int> n0_values;           ///< soi; empty: 5000,3000,500,100,50
    std::string input_path;               ///< stats
    std::size_t max_lag = 50;             ///< stats
    std::string param;                    ///< sweep
    std::vector<std::string> values;      ///< sweep
    std::string sweep_mode = "herding";   ///< sweep: herding or simulate
    int replicates = 1;                   ///< sweep
    int jobs = 1;                         ///< sweep
};

std::int64_t default_steps(Subcommand s);

/// Runs one subcommand and writes its artifacts into out_dir. Returns the
/// paths written. Throws on any failure.
std::vector<std::string> run_subcommand(const RunManifest& manifest);

/// Comment header shared by every artifact.
std::string artifact_header(const RunManifest& manifest, const Config& config,
                            std::string_view extra = {});

/// Config document from a file, or empty if no path is given.
ConfigDocument load_document(const std::string& path);

}  // namespace mabm
