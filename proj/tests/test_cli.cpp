#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "agmn/cli.hpp"
#include "agmn/error.hpp"
#include "test_support.hpp"

using namespace agmn;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "agmn");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

nlohmann::json load_json(const std::filesystem::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("usage errors exit 2") {
    CHECK(run({}).code == cli::kUsageError);
    CHECK(run({"synth", "--n", "-1", "--out", "x"}).code == cli::kUsageError);
    CHECK(run({"synth", "--n", "3"}).code == cli::kUsageError);
    CHECK(run({"bogus"}).code == cli::kUsageError);
    CHECK(run({"infer", "--conv", "slow"}).code == cli::kUsageError);
    CHECK(run({"--help"}).code == cli::kOk);
    CHECK(run({"--version"}).code == cli::kOk);
}

TEST_CASE("synth, infer, eval end to end") {
    test::TempDir dir("cli");
    const auto data = (dir / "data").string();
    Run r = run({"synth", "--n", "4", "--seed", "3", "--out", data});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("manifest.json") != std::string::npos);
    const auto manifest = (dir / "data" / "manifest.json").string();
    CHECK(load_json(manifest)["samples"].size() == 4);

    // Rerun is byte-identical.
    REQUIRE(run({"synth", "--n", "4", "--seed", "3", "--out", (dir / "again").string()}).code == 0);
    CHECK(slurp(manifest) == slurp(dir / "again" / "manifest.json"));
    CHECK(slurp(dir / "data" / "sample_00003_unary.agt") == slurp(dir / "again" / "sample_00003_unary.agt"));

    // Single-sample mode.
    const auto marg = (dir / "m.agt").string();
    const auto pred = (dir / "p.json").string();
    r = run({"infer", "--unary", (dir / "data" / "sample_00000_unary.agt").string(), "--kernels",
             (dir / "data" / "sample_00000_kernels.agt").string(), "--out-marginals", marg, "--out-pred", pred});
    REQUIRE(r.code == 0);
    const TensorStack m = read_tensor(marg);
    CHECK(m.channels() == 21);
    CHECK(m.rows() == 46);
    CHECK(m.cols() == 46);
    const auto pj = load_json(pred);
    CHECK(pj["mode"] == "bp");
    CHECK(pj["cells"].size() == 21);
    CHECK(pj["max_marginal"].size() == 21);

    // Batch mode, BP and baseline.
    const auto bp_dir = (dir / "bp").string();
    const auto un_dir = (dir / "un").string();
    REQUIRE(run({"infer", "--manifest", manifest, "--out-dir", bp_dir}).code == 0);
    REQUIRE(run({"infer", "--manifest", manifest, "--out-dir", un_dir, "--unary-only", "--conv", "fft"}).code == 0);

    for (const auto& which : {bp_dir, un_dir}) {
        const auto report = (dir / "report.json").string();
        r = run({"eval", "--manifest", which + "/manifest.json", "--sigmas", "0.01", "--out", report});
        REQUIRE(r.code == 0);
        const auto j = load_json(report);
        CHECK(j["sigmas"].size() == 1);
        CHECK(j["pck"][0] == 1.0);
    }

    // Default sigma grid and CSV output.
    const auto csv = (dir / "t.csv").string();
    REQUIRE(run({"eval", "--manifest", bp_dir + "/manifest.json", "--csv", csv, "--label", "AGMN"}).code == 0);
    const std::string table = slurp(csv);
    CHECK(table.rfind("sigma,0.01,0.02,0.03,0.04,0.05,0.06,0.07,0.08,0.09,0.1\n", 0) == 0);
    CHECK(table.find("AGMN,100,100") != std::string::npos);

    // Explicit pred/gt lists.
    const auto gt = (dir / "data" / "sample_00000_keypoints.json").string();
    const auto report = (dir / "r2.json").string();
    REQUIRE(run({"eval", "--pred", gt, "--gt", gt, "--out", report}).code == 0);
    for (const auto& v : load_json(report)["pck"]) CHECK(v == 1.0);
    CHECK(load_json(report)["pck"].size() == 10);
    CHECK(run({"eval", "--pred", gt, gt, "--gt", gt}).code == cli::kDataError);
}

TEST_CASE("infer data errors exit 1") {
    test::TempDir dir("cli_err");
    const auto unary = (dir / "u.agt").string();
    write_tensor(TensorStack(21, 46, 46, 1.0), unary);
    Run r = run({"infer", "--unary", unary, "--kernels", (dir / "missing.agt").string(), "--out-marginals",
                 (dir / "m.agt").string(), "--out-pred", (dir / "p.json").string()});
    CHECK(r.code == cli::kDataError);
    CHECK(r.err.find("missing.agt") != std::string::npos);

    const auto kernels = (dir / "k.agt").string();
    write_tensor(TensorStack(39, 45, 45, 1.0), kernels);
    r = run({"infer", "--unary", unary, "--kernels", kernels, "--out-marginals", (dir / "m.agt").string(),
             "--out-pred", (dir / "p.json").string()});
    CHECK(r.code == cli::kDataError);
    CHECK(r.err.find("expected 40") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "m.agt"));

    // Shared layout accepts 20 channels.
    const auto shared = (dir / "s.agt").string();
    write_tensor(TensorStack(20, 5, 5, 1.0), shared);
    CHECK(run({"infer", "--unary", unary, "--kernels", shared, "--shared-kernels", "--out-marginals",
               (dir / "m.agt").string(), "--out-pred", (dir / "p.json").string()})
              .code == 0);
}

TEST_CASE("targets") {
    test::TempDir dir("cli_targets");
    const auto kp = (dir / "kp.json").string();
    write_keypoints(synth::sample_pose(1), kp);
    const auto u = (dir / "u.agt").string();
    const auto k = (dir / "k.agt").string();
    REQUIRE(run({"targets", "--keypoints", kp, "--out-unary", u, "--out-kernels", k}).code == 0);
    const TensorStack su = read_tensor(u);
    const TensorStack sk = read_tensor(k);
    CHECK((su.channels() == 21 && su.rows() == 46 && su.cols() == 46));
    CHECK((sk.channels() == 40 && sk.rows() == 45 && sk.cols() == 45));
    CHECK(su == make_unary_targets(synth::sample_pose(1), 46, 46, 1.0));

    std::ofstream(dir / "empty.json") << R"({"points": []})";
    CHECK(run({"targets", "--keypoints", (dir / "empty.json").string(), "--out-unary", u, "--out-kernels", k}).code ==
          cli::kDataError);
}

TEST_CASE("check subcommand") {
    Run r = run({"check", "--nodes", "3", "--grid", "5", "--kernel", "3", "--trials", "100", "--seed", "1"});
    CHECK(r.code == 0);
    CHECK(r.out.find("ok: 100 trials") != std::string::npos);

    r = run({"check", "--nodes", "21", "--grid", "46"});
    CHECK(r.code == cli::kUsageError);
    CHECK(r.err.find("configurations") != std::string::npos);

    // Negative controls: faulty engines must be caught.
    std::ostringstream out;
    std::ostringstream err;
    cli::CheckArgs args;
    args.trials = 10;
    auto unreflected = [](const PotentialSet& p) {
        PotentialSet q = p;
        for (auto [a, b] : p.graph.edges) {
            q.kernels.set_channel(p.schedule.channel_of(b, a), p.kernels.channel(p.schedule.channel_of(a, b)));
        }
        return run_bp(q).marginals;
    };
    CHECK(cli::cmd_check(args, out, err, unreflected) == cli::kDataError);
    CHECK(out.str().find("FAIL trial 0 seed") != std::string::npos);
    auto unary_only = [](const PotentialSet& p) { return infer_unary_only(p.unary).marginals; };
    CHECK(cli::cmd_check(args, out, err, unary_only) == cli::kDataError);
}

TEST_CASE("graph and experiment subcommands") {
    test::TempDir dir("cli_graph");
    const auto g = (dir / "g.json").string();
    REQUIRE(run({"graph", "--out", g}).code == 0);
    CHECK(read_graph(g).edges == default_hand_tree().edges);

    const auto csv = (dir / "e.csv").string();
    Run r = run({"experiment", "--n", "4", "--occlusion", "0", "--distractors", "0", "--noise", "0", "--sigmas",
                 "0.01", "--csv", csv});
    REQUIRE(r.code == 0);
    CHECK(slurp(csv).find("bp-oracle,100") != std::string::npos);
}
