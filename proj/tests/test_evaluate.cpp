#include "doctest.h"

#include <cmath>

#include "contourlab/endpoint_detector.hpp"
#include "contourlab/error.hpp"
#include "contourlab/evaluate.hpp"
#include "test_util.hpp"

using namespace contourlab;

namespace {

std::string build(const std::string& name, const std::string& variant, const std::string& splits) {
  BuildOptions o;
  o.master_seed = 77;
  o.variant = find_variant(variant);
  o.splits = parse_splits(splits);
  o.out_dir = scratch_dir(name).string();
  o.jobs = 2;
  return build_dataset(o).manifest_path;
}

ScoredEntry scored(std::uint64_t pair, int label, double logit) {
  ScoredEntry s;
  s.entry.pair_id = pair;
  s.entry.label = label;
  s.entry.member = label ? Member::Closed : Member::Open;
  s.logit = logit;
  return s;
}

}  // namespace

TEST_CASE("closed logit orientation") {
  ClassifierInfo bin;
  bin.class_count = 1;
  const Scores s{{2.0}};
  CHECK(closed_logit(bin, s, {1}) == 2.0);
  bin.positive_label = 0;
  CHECK(closed_logit(bin, s, {1}) == -2.0);
  ClassifierInfo multi;
  multi.class_count = 2;
  CHECK(closed_logit(multi, Scores{{0.0, 1.5}}, {1}) == doctest::Approx(1.5));
}

TEST_CASE("threshold is fitted on even pairs and measured on odd pairs") {
  std::vector<ScoredEntry> s;
  // calibration separates at 0; test pairs are shifted so half end up wrong
  for (std::uint64_t p = 0; p < 20; p += 2) {
    s.push_back(scored(p, 1, 1.0));
    s.push_back(scored(p, 0, -1.0));
  }
  for (std::uint64_t p = 1; p < 20; p += 2) {
    s.push_back(scored(p, 1, p < 10 ? 1.0 : -3.0));
    s.push_back(scored(p, 0, -1.0));
  }
  const auto r = evaluate_scores("x", s);
  CHECK(r.calibration_n == 20);
  CHECK(r.n == 20);
  CHECK(r.accuracy == 0.75);
  CHECK(std::abs(r.threshold) < 1.0);

  std::vector<ScoredEntry> only_even{scored(0, 1, 1.0), scored(0, 0, -1.0)};
  CHECK_THROWS_AS(evaluate_scores("x", only_even), ConstraintError);
}

TEST_CASE("constant classifier scores chance") {
  const auto path = build("eval_const", "iid", "test=40");
  ConstantClassifier c;
  const auto r = evaluate_manifest(c, path, {});
  CHECK(r.variant_id == "iid");
  CHECK(r.n == 20);
  CHECK(r.accuracy == 0.5);
}

TEST_CASE("endpoint detector separates no-flanker stimuli") {
  const auto path = build("eval_ep", "v4", "test=40");
  EndpointDetector d;
  EvalOptions o;
  o.jobs = 2;
  const auto r = evaluate_manifest(d, path, o);
  CHECK(r.accuracy >= 0.95);
}

TEST_CASE("failing variants keep their row") {
  const auto good = build("eval_rows", "v4", "test=20");
  ConstantClassifier c;
  const auto rows = evaluate_variants(c, {good, "/nonexistent/manifest.jsonl"}, {});
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[0].error);
  CHECK(rows[1].error);
  CHECK(std::isnan(rows[1].accuracy));
  CHECK_FALSE(rows[1].protocol_error);

  const auto csv = format_eval_csv(rows, {"contourlab 0.1.0 eval"});
  CHECK(csv.rfind("# contourlab", 0) == 0);
  CHECK(csv.find("# error /nonexistent") != std::string::npos);
  const auto back = parse_eval_csv(csv);
  REQUIRE(back.size() == 2);
  CHECK(back[0].variant_id == rows[0].variant_id);
  CHECK(back[0].n == rows[0].n);
  CHECK(back[0].accuracy == rows[0].accuracy);
  CHECK(back[0].threshold == rows[0].threshold);
  CHECK(std::isnan(back[1].accuracy));
}

TEST_CASE("CSV round trip keeps full precision") {
  VariantEval r;
  r.variant_id = "v7";
  r.n = 2800;
  r.accuracy = 0.1 + 0.2;
  r.threshold = -20.041234567891234;
  const auto back = parse_eval_csv(format_eval_csv({r}, {}));
  CHECK(back[0].accuracy == r.accuracy);
  CHECK(back[0].threshold == r.threshold);
  CHECK_THROWS_AS(parse_eval_csv("a,b\n1,2\n"), UsageError);
}

TEST_CASE("multi-class closed classes are validated") {
  const auto path = build("eval_classes", "v4", "test=20");
  ConstantClassifier c(5);
  EvalOptions o;
  o.closed_classes = {7};
  const auto rows = evaluate_variants(c, {path}, o);
  CHECK(rows[0].error);
}
