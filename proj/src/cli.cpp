#include "agmn/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "agmn/error.hpp"
#include "agmn/metrics.hpp"
#include "agmn/parallel.hpp"
#include "agmn/random.hpp"

namespace agmn::cli {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error(Errc::io, "cannot open " + path.string() + " for writing");
    out << text;
    if (text.empty() || text.back() != '\n') out << '\n';
    if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

TreeGraph load_graph(const std::filesystem::path& path) {
    return path.empty() ? default_hand_tree() : read_graph(path);
}

void print_curve_table(std::ostream& out, std::span<const std::string> labels, std::span<const PckCurve> curves) {
    out << std::left << std::setw(12) << "sigma";
    for (double s : curves[0].sigmas) out << std::right << std::setw(8) << std::fixed << std::setprecision(2) << s;
    out << '\n';
    for (std::size_t i = 0; i < curves.size(); ++i) {
        out << std::left << std::setw(12) << labels[i];
        for (double v : curves[i].values) out << std::right << std::setw(8) << std::setprecision(2) << 100.0 * v;
        out << '\n';
    }
    out.unsetf(std::ios::floatfield);
}

BeliefResult infer_one(const InferArgs& args, const TreeGraph& graph, const std::filesystem::path& unary_path,
                       const std::filesystem::path& kernels_path) {
    const TensorStack unary = read_tensor(unary_path);
    if (args.unary_only) return infer_unary_only(unary);
    InferOptions options;
    options.shared_kernels = args.shared_kernels;
    options.conv = args.conv;
    return infer(unary, read_tensor(kernels_path), graph, options);
}

}  // namespace

std::string predictions_to_json(const BeliefResult& result, bool unary_only) {
    nlohmann::json j;
    j["mode"] = unary_only ? "unary-only" : "bp";
    j["points"] = nlohmann::json::array();
    j["cells"] = nlohmann::json::array();
    for (const auto& c : result.predictions) {
        j["points"].push_back({c.col, c.row});
        j["cells"].push_back({c.row, c.col});
    }
    j["max_marginal"] = result.max_marginal;
    return j.dump(2);
}

KeypointSet read_prediction_points(const std::filesystem::path& path) {
    // Predictions share the keypoints layout ("points"); the extra fields are ignored.
    try {
        return keypoints_from_json(read_text(path));
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.detail());
    }
}

int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err) {
    if (args.n < 0) {
        err << "synth: --n must be >= 0\n";
        return kUsageError;
    }
    try {
        synth::validate(args.corruption);
    } catch (const Error& e) {
        err << "synth: " << e.detail() << '\n';
        return kUsageError;
    }
    const auto manifest = synth::generate_dataset(args.n, args.corruption, args.out_dir, args.dtype, args.jobs);
    out << manifest.string() << '\n';
    return kOk;
}

int cmd_infer(const InferArgs& args, std::ostream& out, std::ostream& err) {
    const bool batch = !args.manifest.empty();
    if (batch && args.out_dir.empty()) {
        err << "infer: --manifest requires --out-dir\n";
        return kUsageError;
    }
    if (!batch && (args.unary.empty() || args.out_marginals.empty() || args.out_predictions.empty() ||
                   (!args.unary_only && args.kernels.empty()))) {
        err << "infer: need --unary, --kernels (unless --unary-only), --out-marginals and --out-predictions\n";
        return kUsageError;
    }
    const TreeGraph graph = load_graph(args.graph);

    if (!batch) {
        const BeliefResult result = infer_one(args, graph, args.unary, args.kernels);
        write_tensor(result.marginals, args.out_marginals, args.dtype);
        write_text(args.out_predictions, predictions_to_json(result, args.unary_only));
        out << "wrote " << args.out_marginals.string() << " (" << result.marginals.channels() << "x"
            << result.marginals.rows() << "x" << result.marginals.cols() << ", " << result.messages_computed
            << " messages)\n";
        return kOk;
    }

    synth::Manifest manifest = synth::read_manifest(args.manifest);
    std::filesystem::create_directories(args.out_dir);
    const std::string suffix = args.unary_only ? "unary" : "bp";
    parallel_for(static_cast<int>(manifest.samples.size()), args.jobs, [&](int i) {
        auto& entry = manifest.samples[static_cast<std::size_t>(i)];
        const BeliefResult result = infer_one(args, graph, entry.unary, entry.kernels);
        const std::string stem = entry.unary.stem().string();
        const auto marginals = args.out_dir / (stem + "_" + suffix + "_marginals.agt");
        const auto predictions = args.out_dir / (stem + "_" + suffix + "_pred.json");
        write_tensor(result.marginals, marginals, args.dtype);
        write_text(predictions, predictions_to_json(result, args.unary_only));
        entry.predictions = predictions;
    });
    const auto path = args.out_dir / "manifest.json";
    synth::write_manifest(manifest, path);
    out << path.string() << '\n';
    return kOk;
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
    std::vector<KeypointSet> preds;
    std::vector<KeypointSet> gts;
    std::vector<double> norms;
    if (!args.manifest.empty()) {
        for (const auto& e : synth::read_manifest(args.manifest).samples) {
            if (!e.predictions) {
                err << "eval: manifest entry for " << e.keypoints.string() << " has no predictions\n";
                return kDataError;
            }
            preds.push_back(read_prediction_points(*e.predictions));
            gts.push_back(read_keypoints(e.keypoints));
            norms.push_back(e.norm_len);
        }
    } else {
        if (args.predictions.size() != args.ground_truth.size()) {
            err << "eval: " << args.predictions.size() << " prediction files but " << args.ground_truth.size()
                << " ground-truth files\n";
            return kDataError;
        }
        if (!args.norm_lens.empty() && args.norm_lens.size() != args.ground_truth.size()) {
            err << "eval: --norm-len needs one value per sample\n";
            return kUsageError;
        }
        for (std::size_t i = 0; i < args.predictions.size(); ++i) {
            preds.push_back(read_prediction_points(args.predictions[i]));
            gts.push_back(read_keypoints(args.ground_truth[i]));
            if (!args.norm_lens.empty()) {
                norms.push_back(args.norm_lens[i]);
            } else if (gts.back().bbox_side) {
                norms.push_back(*gts.back().bbox_side);
            } else {
                err << "eval: " << args.ground_truth[i].string() << " has no bbox_side; pass --norm-len\n";
                return kUsageError;
            }
        }
    }
    if (preds.empty()) {
        err << "eval: no samples\n";
        return kDataError;
    }

    const std::vector<double> sigmas = args.sigmas.empty() ? default_pck_sigmas() : args.sigmas;
    const PckCurve curve = pck(preds, gts, norms, sigmas);
    const std::string labels[] = {args.label};
    const PckCurve curves[] = {curve};
    print_curve_table(out, labels, curves);
    if (!args.out_json.empty()) write_text(args.out_json, pck_report_json(curve));
    if (!args.out_csv.empty()) write_text(args.out_csv, pck_report_csv(labels, curves));
    return kOk;
}

int cmd_check(const CheckArgs& args, std::ostream& out, std::ostream& err, const MarginalEngine& engine) {
    if (args.nodes < 1 || args.grid < 1 || args.kernel < 1 || args.kernel % 2 == 0 || args.trials < 0) {
        err << "check: need nodes >= 1, grid >= 1, odd kernel >= 1, trials >= 0\n";
        return kUsageError;
    }
    const MarginalEngine run = engine ? engine : [](const PotentialSet& p) { return run_bp(p).marginals; };
    const oracle::EnumerationBudget budget{args.budget};

    double worst = 0.0;
    for (int t = 0; t < args.trials; ++t) {
        const std::uint64_t seed = mix_seed(args.seed, static_cast<std::uint64_t>(t));
        const PotentialSet p = oracle::random_potentials(seed, args.nodes, args.grid, args.kernel);
        const std::uint64_t needed = oracle::joint_config_count(p);
        if (needed > budget.max_configs) {
            err << "check: refusing, enumeration needs " << needed << " configurations (budget "
                << budget.max_configs << ")\n";
            return kUsageError;
        }
        const TensorStack expected = oracle::exact_marginals_bruteforce(p, budget);
        const TensorStack actual = run(p);
        double trial_worst = 0.0;
        for (std::size_t i = 0; i < expected.values().size(); ++i) {
            const double a = actual.values()[i];
            const double b = expected.values()[i];
            const double scale = std::max(std::abs(a), std::abs(b));
            const double rel = scale > 0.0 ? std::abs(a - b) / scale : 0.0;
            trial_worst = std::max(trial_worst, std::isnan(rel) ? INFINITY : rel);
        }
        worst = std::max(worst, trial_worst);
        if (!(trial_worst <= args.tolerance)) {
            out << "FAIL trial " << t << " seed " << seed << ": max relative deviation " << trial_worst << '\n';
            return kDataError;
        }
    }
    out << "ok: " << args.trials << " trials, max relative deviation " << worst << '\n';
    return kOk;
}

int cmd_targets(const TargetsArgs& args, std::ostream& out, std::ostream& err) {
    if (args.grid < 1 || args.kernel < 1 || args.kernel % 2 == 0 || !(args.sigma > 0.0)) {
        err << "targets: need grid >= 1, odd kernel >= 1, sigma > 0\n";
        return kUsageError;
    }
    const KeypointSet kp = read_keypoints(args.keypoints);
    const TreeGraph graph = load_graph(args.graph);
    if (kp.size() != static_cast<std::size_t>(graph.num_nodes)) {
        err << "targets: " << kp.size() << " keypoints for a " << graph.num_nodes << "-node graph\n";
        return kDataError;
    }
    std::vector<std::string> warnings;
    const TensorStack s_star = make_unary_targets(kp, args.grid, args.grid, args.sigma);
    const TensorStack q_star = make_kernel_targets(kp, build_schedule(graph), args.kernel, args.sigma, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    write_tensor(s_star, args.out_unary, args.dtype);
    write_tensor(q_star, args.out_kernels, args.dtype);
    out << "wrote " << args.out_unary.string() << " and " << args.out_kernels.string() << '\n';
    return kOk;
}

int cmd_experiment(const ExperimentArgs& args, std::ostream& out, std::ostream& err) {
    if (args.n < 1) {
        err << "experiment: --n must be >= 1\n";
        return kUsageError;
    }
    try {
        synth::validate(args.corruption);
    } catch (const Error& e) {
        err << "experiment: " << e.detail() << '\n';
        return kUsageError;
    }
    const std::vector<double> sigmas = args.sigmas.empty() ? default_pck_sigmas() : args.sigmas;
    const auto result = synth::run_experiment(args.n, args.corruption, args.conv, sigmas, args.jobs);
    const std::string labels[] = {"unary-only", "bp-oracle"};
    const PckCurve curves[] = {result.unary_only, result.bp};
    print_curve_table(out, labels, curves);
    if (!args.out_csv.empty()) write_text(args.out_csv, pck_report_csv(labels, curves));
    return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tree-structured graphical-model inference for 2D hand keypoints", "agmn"};
    app.set_version_flag("--version", AGMN_VERSION);
    app.require_subcommand(1);

    const std::map<std::string, ConvPath> conv_map{{"direct", ConvPath::direct}, {"fft", ConvPath::fft}};
    const std::map<std::string, DType> dtype_map{{"f32", DType::f32}, {"f64", DType::f64}};

    auto add_corruption = [](CLI::App* sub, synth::CorruptionConfig& c) {
        sub->add_option("--seed", c.seed, "Dataset seed");
        sub->add_option("--occlusion", c.occluded_fraction, "Fraction of keypoints occluded")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--distractors", c.distractor_peaks, "Distractor peaks per occluded keypoint")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--noise", c.noise_amplitude, "Uniform noise amplitude")->check(CLI::NonNegativeNumber);
        sub->add_option("--peak-sigma", c.peak_sigma, "Gaussian peak sigma")->check(CLI::PositiveNumber);
    };

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
    synth_cmd->add_option("--n", synth_args.n, "Number of samples")->required()->check(CLI::NonNegativeNumber);
    add_corruption(synth_cmd, synth_args.corruption);
    synth_cmd->add_option("--out", synth_args.out_dir, "Output directory")->required();
    synth_cmd->add_option("--dtype", synth_args.dtype, "Stored precision")
        ->transform(CLI::CheckedTransformer(dtype_map, CLI::ignore_case));
    synth_cmd->add_option("--jobs", synth_args.jobs, "Worker threads")->check(CLI::PositiveNumber);

    InferArgs infer_args;
    auto* infer_cmd = app.add_subcommand("infer", "Run inference on unary maps and kernels");
    infer_cmd->add_option("--unary", infer_args.unary, "Unary AGT1 file (n x H x W)");
    infer_cmd->add_option("--kernels", infer_args.kernels, "Kernel AGT1 file (2|E| x K x K)");
    infer_cmd->add_option("--graph", infer_args.graph, "Graph JSON (default: 21-keypoint hand tree)");
    infer_cmd->add_option("--out-marginals", infer_args.out_marginals, "Marginals AGT1 output");
    infer_cmd->add_option("--out-pred", infer_args.out_predictions, "Predictions JSON output");
    infer_cmd->add_option("--manifest", infer_args.manifest, "Synth manifest for batch mode");
    infer_cmd->add_option("--out-dir", infer_args.out_dir, "Batch output directory");
    infer_cmd->add_flag("--unary-only", infer_args.unary_only, "Skip message passing (baseline)");
    infer_cmd->add_flag("--shared-kernels", infer_args.shared_kernels, "Kernel file holds one channel per edge");
    infer_cmd->add_option("--conv", infer_args.conv, "Convolution path")
        ->transform(CLI::CheckedTransformer(conv_map, CLI::ignore_case));
    infer_cmd->add_option("--dtype", infer_args.dtype, "Marginals precision")
        ->transform(CLI::CheckedTransformer(dtype_map, CLI::ignore_case));
    infer_cmd->add_option("--jobs", infer_args.jobs, "Worker threads (batch mode)")->check(CLI::PositiveNumber);

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "PCK evaluation");
    eval_cmd->add_option("--manifest", eval_args.manifest, "Manifest written by infer --manifest");
    eval_cmd->add_option("--pred", eval_args.predictions, "Prediction JSON files");
    eval_cmd->add_option("--gt", eval_args.ground_truth, "Ground-truth keypoint JSON files");
    eval_cmd->add_option("--norm-len", eval_args.norm_lens, "Normalization length per sample")
        ->check(CLI::PositiveNumber);
    eval_cmd->add_option("--sigmas", eval_args.sigmas, "PCK thresholds (default 0.01..0.10)")
        ->check(CLI::NonNegativeNumber)->delimiter(',');
    eval_cmd->add_option("--out", eval_args.out_json, "Report JSON");
    eval_cmd->add_option("--csv", eval_args.out_csv, "Report CSV");
    eval_cmd->add_option("--label", eval_args.label, "Row label in tables");

    CheckArgs check_args;
    auto* check_cmd = app.add_subcommand("check", "Compare BP marginals with brute-force enumeration");
    check_cmd->add_option("--nodes", check_args.nodes, "Tree size")->check(CLI::PositiveNumber);
    check_cmd->add_option("--grid", check_args.grid, "Grid side")->check(CLI::PositiveNumber);
    check_cmd->add_option("--kernel", check_args.kernel, "Kernel side (odd)")->check(CLI::PositiveNumber);
    check_cmd->add_option("--trials", check_args.trials, "Number of seeded trials")->check(CLI::NonNegativeNumber);
    check_cmd->add_option("--seed", check_args.seed, "Base seed");
    check_cmd->add_option("--tolerance", check_args.tolerance, "Relative tolerance per cell");
    check_cmd->add_option("--budget", check_args.budget, "Maximum joint configurations");

    TargetsArgs targets_args;
    auto* targets_cmd = app.add_subcommand("targets", "Ground-truth score maps and kernels from keypoints");
    targets_cmd->add_option("--keypoints", targets_args.keypoints, "Keypoints JSON")->required();
    targets_cmd->add_option("--graph", targets_args.graph, "Graph JSON (default: hand tree)");
    targets_cmd->add_option("--grid", targets_args.grid, "Score map side");
    targets_cmd->add_option("--kernel", targets_args.kernel, "Kernel side (odd)");
    targets_cmd->add_option("--sigma", targets_args.sigma, "Gaussian sigma");
    targets_cmd->add_option("--out-unary", targets_args.out_unary, "Score map targets AGT1")->required();
    targets_cmd->add_option("--out-kernels", targets_args.out_kernels, "Kernel targets AGT1")->required();
    targets_cmd->add_option("--dtype", targets_args.dtype, "Stored precision")
        ->transform(CLI::CheckedTransformer(dtype_map, CLI::ignore_case));

    ExperimentArgs exp_args;
    exp_args.corruption = {0.2, 2, 0.05, 1.0, 42};
    auto* exp_cmd = app.add_subcommand("experiment", "In-memory occlusion experiment with ground-truth kernels");
    exp_cmd->add_option("--n", exp_args.n, "Number of samples")->check(CLI::PositiveNumber);
    add_corruption(exp_cmd, exp_args.corruption);
    exp_cmd->add_option("--conv", exp_args.conv, "Convolution path")
        ->transform(CLI::CheckedTransformer(conv_map, CLI::ignore_case));
    exp_cmd->add_option("--sigmas", exp_args.sigmas, "PCK thresholds")->delimiter(',');
    exp_cmd->add_option("--csv", exp_args.out_csv, "Table CSV");
    exp_cmd->add_option("--jobs", exp_args.jobs, "Worker threads")->check(CLI::PositiveNumber);

    std::filesystem::path graph_out;
    auto* graph_cmd = app.add_subcommand("graph", "Write the default hand tree as graph JSON");
    graph_cmd->add_option("--out", graph_out, "Output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (*synth_cmd) return cmd_synth(synth_args, out, err);
        if (*infer_cmd) return cmd_infer(infer_args, out, err);
        if (*eval_cmd) return cmd_eval(eval_args, out, err);
        if (*check_cmd) return cmd_check(check_args, out, err);
        if (*targets_cmd) return cmd_targets(targets_args, out, err);
        if (*exp_cmd) return cmd_experiment(exp_args, out, err);
        if (*graph_cmd) {
            write_graph(default_hand_tree(), graph_out);
            return kOk;
        }
    } catch (const Error& e) {
        err << "agmn: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        err << "agmn: " << e.what() << '\n';
        return kDataError;
    }
    return kUsageError;
}

}  // namespace agmn::cli
