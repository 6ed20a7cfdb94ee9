#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "glr/operators.hpp"
#include "glr/solvers.hpp"

namespace glr {

/// How to build the sensing operator of a run.
struct OperatorSpec {
    OperatorKind kind = OperatorKind::Cacti;
    int height = 64;
    int width = 64;
    /// Frames (CACTI) or spectral bands (MSFA); Fourier is always 1.
    int channels = 4;
    /// Bernoulli mask seed (CACTI).
    std::uint64_t mask_seed = 11;
    /// Number of radial lines (Fourier).
    int radial_lines = 30;
    MsfaPattern pattern = MsfaPattern::Periodic4x4;
    /// Tile text for MsfaPattern::CustomTile, same format as a tile file.
    std::optional<std::string> tile;
    std::optional<std::string> tile_file;
    /// Precomputed masks (H x W x N tensor file) instead of generated ones.
    std::optional<std::string> mask_file;
};

struct RunPaths {
    std::optional<std::string> measurement;
    std::optional<std::string> reference;
    std::optional<std::string> output;
    std::optional<std::string> report;
    std::optional<std::string> trace;
};

/// A JSON document with three optional sections, "solver", "operator" and
/// "paths". Absent keys keep their defaults; unknown keys are errors.
struct RunConfig {
    SolverConfig solver;
    OperatorSpec op;
    RunPaths paths;
};

/// Throws ConfigError on malformed JSON, unknown keys or wrong value types.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
/// Every field written out, so parse(serialize(c)) reproduces c exactly.
std::string serialize_run_config(const RunConfig& cfg, int indent = 2);

std::unique_ptr<SensingOperator> make_operator(const OperatorSpec& spec);

} // namespace glr
