#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "agmn/bp.hpp"
#include "agmn/oracle.hpp"
#include "agmn/potentials.hpp"
#include "agmn/synth.hpp"
#include "agmn/tensor_io.hpp"

// Subcommands of the `agmn` tool. Each returns the process exit code:
// 0 success, 1 runtime or data error, 2 usage error.
namespace agmn::cli {

inline constexpr int kOk = 0;
inline constexpr int kDataError = 1;
inline constexpr int kUsageError = 2;

struct SynthArgs {
    int n = 0;
    synth::CorruptionConfig corruption;
    std::filesystem::path out_dir;
    DType dtype = DType::f32;
    int jobs = 1;
};
int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err);

struct InferArgs {
    // Single sample.
    std::filesystem::path unary;
    std::filesystem::path kernels;
    std::filesystem::path out_marginals;
    std::filesystem::path out_predictions;
    // Batch over a synth manifest; writes per-sample outputs and a new manifest into out_dir.
    std::filesystem::path manifest;
    std::filesystem::path out_dir;

    std::filesystem::path graph;  // default hand tree when empty
    bool unary_only = false;
    bool shared_kernels = false;
    ConvPath conv = ConvPath::direct;
    DType dtype = DType::f64;
    int jobs = 1;
};
int cmd_infer(const InferArgs& args, std::ostream& out, std::ostream& err);

struct EvalArgs {
    std::filesystem::path manifest;  // entries need "predictions"
    std::vector<std::filesystem::path> predictions;
    std::vector<std::filesystem::path> ground_truth;
    std::vector<double> norm_lens;   // defaults to each ground truth's bbox_side
    std::vector<double> sigmas;      // defaults to 0.01..0.10
    std::filesystem::path out_json;
    std::filesystem::path out_csv;
    std::string label = "predictions";
};
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);

/// Engine under test in `check`; run_bp unless a test substitutes a fault.
using MarginalEngine = std::function<TensorStack(const PotentialSet&)>;

struct CheckArgs {
    int nodes = 3;
    int grid = 5;
    int kernel = 3;
    int trials = 100;
    std::uint64_t seed = 1;
    double tolerance = 1e-9;
    std::uint64_t budget = oracle::EnumerationBudget{}.max_configs;
};
int cmd_check(const CheckArgs& args, std::ostream& out, std::ostream& err, const MarginalEngine& engine = {});

struct TargetsArgs {
    std::filesystem::path keypoints;
    std::filesystem::path graph;
    int grid = synth::kGridSize;
    int kernel = synth::kKernelSize;
    double sigma = 1.0;
    std::filesystem::path out_unary;
    std::filesystem::path out_kernels;
    DType dtype = DType::f64;
};
int cmd_targets(const TargetsArgs& args, std::ostream& out, std::ostream& err);

struct ExperimentArgs {
    int n = 200;
    synth::CorruptionConfig corruption;
    ConvPath conv = ConvPath::fft;
    std::vector<double> sigmas;
    std::filesystem::path out_csv;
    int jobs = 1;
};
int cmd_experiment(const ExperimentArgs& args, std::ostream& out, std::ostream& err);

// Predictions JSON: {"mode": "bp" | "unary-only", "points": [[x, y], ...],
// "cells": [[row, col], ...], "max_marginal": [...]}.
std::string predictions_to_json(const BeliefResult& result, bool unary_only);
KeypointSet read_prediction_points(const std::filesystem::path& path);

/// Parses argv and dispatches to a subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace agmn::cli
