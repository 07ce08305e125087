#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "contourlab/cli.hpp"
#include "contourlab/digest.hpp"
#include "contourlab/error.hpp"
#include "contourlab/evaluate.hpp"
#include "contourlab/png_io.hpp"
#include "contourlab/variant.hpp"
#include "test_util.hpp"

using namespace contourlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "contourlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string cli_exec(const std::string& args) { return std::string("exec:'") + CONTOURLAB_CLI + "' " + args; }

}  // namespace

TEST_CASE("help lists subcommands and flag defaults") {
  const auto top = run({"--help"});
  CHECK(top.code == 0);
  for (const char* sub : {"generate", "eval", "heatmap", "search-mirc", "threshold", "serve", "report"})
    CHECK_MESSAGE(top.out.find(sub) != std::string::npos, sub);
  const auto gen = run({"generate", "--help"});
  CHECK(gen.code == 0);
  CHECK(gen.out.find("--seed") != std::string::npos);
  CHECK(gen.out.find("train=14000,val=5600,test=5600") != std::string::npos);
  const auto serve = run({"serve", "--help"});
  CHECK(serve.out.find("8080") != std::string::npos);
  CHECK(serve.out.find("1200") != std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"generate", "--out", "x", "--bogus"}).code == kExitUsage);
  CHECK(run({"generate", "--out", "x", "--variant", "v99"}).code == kExitUsage);
  CHECK(run({"generate"}).code == kExitUsage);
}

TEST_CASE("missing files exit with 3") {
  const auto dir = scratch_dir("cli_io");
  CHECK(run({"eval", "--classifier", "builtin:constant", "--manifest", "/nonexistent/m.jsonl", "--out",
             dir.string()})
            .code == kExitIo);
  CHECK(run({"report", "--eval", "/nonexistent.csv", "--out", dir.string()}).code == kExitIo);
}

TEST_CASE("generate is reproducible") {
  const auto dir = scratch_dir("cli_gen");
  const auto a = run({"generate", "--variant", "v5", "--seed", "3", "--splits", "test=20", "--out",
                      (dir / "a").string(), "--jobs", "1"});
  REQUIRE(a.code == 0);
  const auto b = run({"generate", "--variant", "v5", "--seed", "3", "--splits", "test=20", "--out",
                      (dir / "b").string(), "--jobs", "3"});
  REQUIRE(b.code == 0);
  const auto ma = slurp(dir / "a" / "v5" / "manifest.jsonl");
  CHECK(ma == slurp(dir / "b" / "v5" / "manifest.jsonl"));
  const auto header = json::parse(ma.substr(0, ma.find('\n')));
  CHECK(header.dump().find("config_hash") != std::string::npos);
  for (const auto& f : fs::recursive_directory_iterator(dir / "a")) {
    if (f.path().extension() != ".png") continue;
    const auto rel = fs::relative(f.path(), dir / "a");
    CHECK(sha256_file(f.path().string()) == sha256_file((dir / "b" / rel).string()));
  }
}

TEST_CASE("eval, report and threshold") {
  const auto dir = scratch_dir("cli_eval");
  REQUIRE(run({"generate", "--variant", "v4", "--seed", "1", "--splits", "test=40", "--out", dir.string()}).code == 0);
  const auto ev = run({"eval", "--classifier", "builtin:endpoint", "--manifest",
                       (dir / "v4" / "manifest.jsonl").string(), "--out", (dir / "eval").string()});
  REQUIRE(ev.code == 0);
  const auto csv = slurp(dir / "eval" / "eval.csv");
  CHECK(csv.rfind("# contourlab", 0) == 0);
  CHECK(csv.find("seed=") != std::string::npos);
  const auto rows = parse_eval_csv(csv);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].variant_id == "v4");
  CHECK(rows[0].n == 20);

  const auto rep = run({"report", "--eval", (dir / "eval" / "eval.csv").string(), "--out", (dir / "rep").string()});
  REQUIRE(rep.code == 0);
  const auto bars = json::parse(slurp(dir / "rep" / "bars.json"));
  CHECK(bars["bars"][0]["accuracy"].get<double>() == rows[0].accuracy);
  CHECK(bars.contains("header"));
  const auto bars_csv = slurp(dir / "rep" / "bars.csv");
  CHECK(bars_csv.find("v4,") != std::string::npos);

  std::ofstream(dir / "logits.csv") << "logit,label\n-2,0\n-1,0\n1,1\n3,1\n";
  const auto th = run({"threshold", "--logits", (dir / "logits.csv").string(), "--out", (dir / "th").string()});
  REQUIRE(th.code == 0);
  const auto tj = json::parse(slurp(dir / "th" / "threshold.json"));
  CHECK(tj["accuracy"] == 1.0);
  CHECK(tj["n"] == 4);
  std::ofstream(dir / "bad.csv") << "1,7\n";
  CHECK(run({"threshold", "--logits", (dir / "bad.csv").string(), "--out", (dir / "th").string()}).code ==
        kExitUsage);
}

TEST_CASE("unreachable classifier exits with 4") {
  const auto dir = scratch_dir("cli_proto");
  REQUIRE(run({"generate", "--variant", "v4", "--seed", "1", "--splits", "test=8", "--out", dir.string()}).code == 0);
  const auto r = run({"eval", "--classifier", "unix:/nonexistent/sock", "--manifest",
                      (dir / "v4" / "manifest.jsonl").string(), "--out", (dir / "eval").string()});
  CHECK(r.code == kExitProtocol);
  const auto h = run({"heatmap", "--classifier", "tcp:127.0.0.1:1", "--image",
                      (dir / "v4" / "test" / "20000000_open.png").string(), "--out", (dir / "hm").string()});
  CHECK(h.code == kExitProtocol);
}

TEST_CASE("heatmap writes maps and patches") {
  const auto dir = scratch_dir("cli_heatmap");
  REQUIRE(run({"generate", "--variant", "v4", "--seed", "2", "--splits", "test=2", "--out", dir.string()}).code == 0);
  std::string open_png;
  for (const auto& f : fs::recursive_directory_iterator(dir))
    if (f.path().string().find("_open.png") != std::string::npos) open_png = f.path().string();
  REQUIRE(!open_png.empty());
  const auto r = run({"heatmap", "--classifier", "builtin:endpoint", "--image", open_png, "--out",
                      (dir / "hm").string(), "--k", "2", "--sign", "positive"});
  REQUIRE(r.code == 0);
  CHECK(read_png((dir / "hm" / "heatmap.png").string()).channels == 3);
  const auto patches = json::parse(slurp(dir / "hm" / "patches.json"));
  CHECK(patches.dump().find("rect") != std::string::npos);
  CHECK(run({"heatmap", "--classifier", "builtin:constant", "--image", open_png, "--out", (dir / "hm2").string()})
            .code == kExitUsage);
}

TEST_CASE("search-mirc on named stimuli") {
  const auto dir = scratch_dir("cli_mirc");
  fs::create_directories(dir / "img");
  write_png((dir / "img" / "fly.png").string(), Canvas(64, 64, 1, 200));
  const auto r = run({"search-mirc", "--classifier", cli_exec("serve-classifier --builtin constant --class-count 1000"),
                      "--images", (dir / "img").string(), "--out", (dir / "report.json").string()});
  REQUIRE(r.code == 0);
  const auto rep = json::parse(slurp(dir / "report.json"));
  CHECK(rep["results"].size() == 1);
  CHECK(rep["results"][0]["has_mirc"] == false);
  CHECK(rep["stats"]["fraction_with_mirc"] == 0.0);
  CHECK(rep["stats"]["gap_mean"].is_null());

  write_png((dir / "img" / "unicorn.png").string(), Canvas(64, 64, 1, 200));
  const auto bad = run({"search-mirc", "--classifier", cli_exec("serve-classifier --builtin constant --class-count 1000"),
                        "--images", (dir / "img").string(), "--out", (dir / "out").string()});
  CHECK(bad.code == kExitUsage);
  CHECK(fs::exists(dir / "out" / "report.json"));
}

TEST_CASE("catalog output matches the shipped config") {
  const auto r = run({"catalog"});
  REQUIRE(r.code == 0);
  CHECK(r.out == slurp(fs::path(CONTOURLAB_SOURCE_DIR) / "config" / "variants.ini"));
}

TEST_CASE("exit codes map from error types") {
  CHECK(exit_code_for(UsageError("x")) == kExitUsage);
  CHECK(exit_code_for(IoError("x")) == kExitIo);
  CHECK(exit_code_for(ProtocolError("x")) == kExitProtocol);
  CHECK(exit_code_for(ConstraintError("x")) == kExitConstraint);
  CHECK(exit_code_for(fs::filesystem_error("x", std::error_code())) == kExitIo);
}
