#include "doctest.h"

#include <cmath>

#include "contourlab/class_map.hpp"
#include "contourlab/error.hpp"
#include "contourlab/logits.hpp"
#include "contourlab/mirc.hpp"
#include "contourlab/rng.hpp"
#include "mirc_synthetic.hpp"

using namespace contourlab;

namespace {

SearchConfig raw_config() {
  SearchConfig c;
  c.preprocess = false;
  return c;
}

// Binary classifier that looks at pixels: a dark disc fully inside the crop
// (no dark pixel on the border) and at least `min_side` pixels sent.
class DiscDetector : public Classifier {
 public:
  explicit DiscDetector(int min_side) : min_side_(min_side) {
    info_.name = "disc";
    info_.scores = true;
    info_.class_count = 1;
    info_.thread_safe = true;
  }
  const ClassifierInfo& info() const override { return info_; }

 protected:
  Scores do_classify(const Canvas& img) override {
    bool any = false, border = false;
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        if (img.at(x, y) < 128) {
          any = true;
          border |= x == 0 || y == 0 || x == img.width - 1 || y == img.height - 1;
        }
    const double p = any && !border && img.width >= min_side_ ? 0.9 : 0.2;
    return {{logit_of_prob(p).value}};
  }

 private:
  ClassifierInfo info_;
  int min_side_;
};

Canvas disc_image(int side, double cx, double cy, double r) {
  Canvas c(side, side, 1, 255);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x)
      if ((x + 0.5 - cx) * (x + 0.5 - cx) + (y + 0.5 - cy) * (y + 0.5 - cy) <= r * r) c.at(x, y) = 0;
  return c;
}

}  // namespace

TEST_CASE("rule names") {
  CHECK(parse_descendant_rule("ullman4") == DescendantRule::Ullman4);
  CHECK(to_string(parse_class_rule("separate")) == "separate");
  CHECK_THROWS_AS(parse_descendant_rule("all"), UsageError);
}

TEST_CASE("config validation") {
  auto c = raw_config();
  c.shrink = 1.0;
  CHECK_THROWS_AS(check_config(c), UsageError);
  c = raw_config();
  c.threshold = 0.0;
  CHECK_THROWS_AS(check_config(c), UsageError);
  c = SearchConfig{};
  c.resize = 200;
  CHECK_THROWS_AS(check_config(c), UsageError);
}

TEST_CASE("ullman4 children of a 224-px node") {
  const auto cfg = raw_config();
  const auto kids = children(root_node(224, cfg), cfg);
  REQUIRE(kids.size() == 5);
  CHECK(kids[0].rect == CropRect{0, 0, 179, 179});
  CHECK(kids[1].rect == CropRect{45, 0, 179, 179});
  CHECK(kids[2].rect == CropRect{0, 45, 179, 179});
  CHECK(kids[3].rect == CropRect{45, 45, 179, 179});
  CHECK(kids[4].resolution_child);
  CHECK(kids[4].rect == CropRect{0, 0, 224, 224});
  CHECK(kids[4].scale == doctest::Approx(0.8));
  CHECK(kids[4].effective_size == doctest::Approx(179.2));
  for (const auto& k : kids) CHECK(k.depth == 1);
}

TEST_CASE("stride1 children of a 100-px node") {
  auto cfg = raw_config();
  cfg.descendants = DescendantRule::Stride1;
  const auto kids = children(root_node(100, cfg), cfg);
  REQUIRE(kids.size() == 441 + 1);
  CHECK(kids[1].rect == CropRect{1, 0, 80, 80});
  CHECK(kids[21].rect == CropRect{0, 1, 80, 80});
  CHECK(kids.back().resolution_child);
}

TEST_CASE("children below the minimum patch are upsampled and flagged") {
  const auto cfg = raw_config();
  const auto kids = children(root_node(40, cfg), cfg);
  const Canvas img(40, 40, 1, 90);
  for (const auto& k : kids) {
    CHECK(k.floor_clamped);
    CHECK(sent_side(k, cfg) == 33);
    CHECK(node_image(img, k, cfg).width == 33);
  }
  CHECK(kids[0].rect.w == 32);
}

TEST_CASE("step classifier gap is 0.9 - 0.2") {
  synthetic::Disc d{70, 130, 15, 5};
  synthetic::CoverageEvaluator eval(d, 224, true);
  const auto r = search(eval, 224, raw_config());
  REQUIRE(r.has_mirc);
  CHECK(r.mirc->prob == 0.9);
  CHECK(*recognition_gap(r) == 0.9 - 0.2);
  CHECK(*r.gap_conservative == 0.7);
  CHECK(*r.gap_worst_child == 0.7);
  CHECK(audit(eval, r, raw_config()).ok);
}

TEST_CASE("below-threshold image has no MIRC") {
  synthetic::Disc d{10, 10, 40, 5};  // never fully inside
  synthetic::CoverageEvaluator eval(d, 224, true);
  const auto r = search(eval, 224, raw_config());
  CHECK_FALSE(r.has_mirc);
  CHECK_FALSE(recognition_gap(r));
  CHECK(r.evaluations == 1);
  CHECK(audit(eval, r, raw_config()).ok);
}

TEST_CASE("greedy search equals the independent reference") {
  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    synthetic::Disc d;
    d.r = rng.uniform(6, 40);
    d.cx = rng.uniform(d.r, 224 - d.r);
    d.cy = rng.uniform(d.r, 224 - d.r);
    d.min_visible = rng.uniform(2, 8);
    synthetic::CoverageEvaluator eval(d, 224);
    const auto r = search(eval, 224, raw_config());
    const auto ref = synthetic::reference_greedy(d, 224);
    REQUIRE(r.has_mirc == ref.has_mirc);
    if (!r.has_mirc) continue;
    CHECK(r.mirc->rect == CropRect{ref.mirc.x, ref.mirc.y, ref.mirc.w, ref.mirc.w});
    CHECK(r.mirc->scale == ref.mirc.scale);
    CHECK(*r.gap_conservative == ref.mirc.prob - ref.best_child);
    CHECK(*r.gap_worst_child == ref.mirc.prob - ref.worst_child);
  }
}

TEST_CASE("pixel-based step classifier through the classifier evaluator") {
  const Canvas img = disc_image(224, 150, 60, 12);
  DiscDetector det(60);
  const auto results = search_image(det, img, {0}, raw_config(), "disc");
  REQUIRE(results.size() == 1);
  const auto& r = results[0];
  REQUIRE(r.has_mirc);
  CHECK(r.image == "disc");
  CHECK(*r.gap_conservative == doctest::Approx(0.7).epsilon(1e-12));
  for (const auto& k : r.sub_mircs) CHECK(k.prob == doctest::Approx(0.2));
}

TEST_CASE("gap of the worked example") {
  SearchResult r;
  r.has_mirc = true;
  CropNode m;
  m.prob = 0.9999;
  r.mirc = m;
  CropNode a, b;
  a.prob = 0.0002;
  b.prob = 0.0;
  r.sub_mircs = {a, b};
  r.gap_conservative = m.prob - a.prob;
  r.gap_worst_child = m.prob - b.prob;
  CHECK(*recognition_gap(r) == doctest::Approx(0.9997).epsilon(1e-15));
}

TEST_CASE("aggregate statistics") {
  // tests/oracles/stats.py: gaps 0.9997, 0.7, 0.85
  std::vector<SearchResult> rs(4);
  const double gaps[] = {0.9997, 0.7, 0.85};
  for (int i = 0; i < 3; ++i) {
    rs[i].has_mirc = true;
    CropNode m;
    m.effective_size = 40.0 + 10 * i;
    rs[i].mirc = m;
    rs[i].gap_conservative = gaps[i];
  }
  const auto s = aggregate_stats(rs);
  CHECK(s.images == 4);
  CHECK(s.with_mirc == 3);
  CHECK(s.fraction == 0.75);
  CHECK(*s.gap_mean == doctest::Approx(0.8499).epsilon(1e-14));
  CHECK(*s.gap_sd == doctest::Approx(0.14985002502502298).epsilon(1e-12));
  CHECK(*s.size_mean == 50.0);

  std::vector<SearchResult> one(rs.begin(), rs.begin() + 1);
  CHECK_FALSE(aggregate_stats(one).gap_sd);
  std::vector<SearchResult> none(2);
  const auto z = aggregate_stats(none);
  CHECK(z.fraction == 0.0);
  CHECK_FALSE(z.gap_mean);
  CHECK_THROWS_AS(aggregate_stats({}), UsageError);

  const auto j = to_json(s);
  CHECK(j["with_mirc"] == 3);
  CHECK(j.contains("gap_sd"));
}

TEST_CASE("audit flags tampered results") {
  synthetic::Disc d{100, 100, 20, 4};
  synthetic::CoverageEvaluator eval(d, 224);
  auto r = search(eval, 224, raw_config());
  REQUIRE(r.has_mirc);
  CHECK(audit(eval, r, raw_config()).ok);
  auto bad = r;
  bad.sub_mircs[0] = *bad.mirc;
  CHECK_FALSE(audit(eval, bad, raw_config()).ok);
  bad = r;
  bad.gap_conservative = *bad.gap_worst_child + 0.1;
  CHECK_FALSE(audit(eval, bad, raw_config()).ok);
}

TEST_CASE("max_depth guard stops a search that never ends") {
  // always recognized: every child stays above threshold
  class Always : public CropEvaluator {
   public:
    void evaluate(std::vector<CropNode>& nodes) override {
      for (auto& n : nodes) {
        n.prob = 0.99;
        n.logit = logit_of_prob(0.99).value;
      }
    }
  } always;
  auto cfg = raw_config();
  cfg.max_depth = 5;
  const auto r = search(always, 224, cfg);
  CHECK_FALSE(r.has_mirc);
  CHECK(r.depth_limit);
  CHECK(r.error);
  CHECK(r.path.size() == 6);
}

TEST_CASE("classifier failure leaves a partial result") {
  class Failing : public CropEvaluator {
   public:
    void evaluate(std::vector<CropNode>& nodes) override {
      if (++calls > 2) throw ProtocolError("connection lost");
      for (auto& n : nodes) n.prob = 0.9, n.logit = 2.0;
    }
    int calls = 0;
  } failing;
  const auto r = search(failing, 224, raw_config());
  CHECK_FALSE(r.has_mirc);
  CHECK_FALSE(r.depth_limit);
  REQUIRE(r.error);
  CHECK(r.error->find("connection lost") != std::string::npos);
  CHECK(r.path.size() == 2);
}

TEST_CASE("separate rule searches once per class") {
  ConstantClassifier c(10, 0.0);
  const Canvas img(256, 256, 1, 118);
  auto cfg = SearchConfig{};
  cfg.class_rule = ClassRule::Separate;
  const auto rs = search_image(c, img, {2, 5, 7}, cfg);
  REQUIRE(rs.size() == 3);
  CHECK(rs[1].class_set == std::vector<int>{5});
  for (const auto& r : rs) CHECK_FALSE(r.has_mirc);  // p = 0.1 everywhere

  cfg.class_rule = ClassRule::Joint;
  CHECK(search_image(c, img, {2, 5, 7}, cfg).size() == 1);
  const auto bad = search_image(c, img, {11}, cfg);
  CHECK(bad[0].error);
}

TEST_CASE("stride1 takes the best child at every step") {
  synthetic::Disc d{32, 30, 8, 3};
  synthetic::CoverageEvaluator eval(d, 64);
  auto cfg = raw_config();
  cfg.descendants = DescendantRule::Stride1;
  const auto r = search(eval, 64, cfg);
  REQUIRE(r.has_mirc);
  for (std::size_t i = 0; i + 1 < r.path.size(); ++i) {
    auto kids = children(r.path[i], cfg);
    eval.evaluate(kids);
    for (const auto& k : kids)
      if (k.prob >= 0.5) CHECK(k.logit <= r.path[i + 1].logit);
  }
  CHECK(audit(eval, r, cfg).ok);
}

TEST_CASE("preprocessing resizes and center-crops") {
  const Canvas img(300, 200, 1, 50);
  const auto p = preprocess(img, SearchConfig{});
  CHECK(p.width == 224);
  CHECK(p.height == 224);
  CHECK_THROWS_AS(preprocess(img, raw_config()), UsageError);
}

TEST_CASE("shipped class map covers the nine stimuli") {
  const auto m = load_class_map(std::string(CONTOURLAB_SOURCE_DIR) + "/config/ullman_class_map.json");
  CHECK(m.class_count == 1000);
  CHECK(m.stimuli.size() == 9);
  for (const char* name : {"fly", "ship", "eagle", "glasses", "bike", "suit", "plane", "horse", "car"}) {
    const auto* e = m.find(name);
    REQUIRE_MESSAGE(e, name);
    CHECK(!e->indices().empty());
    for (int k : e->indices()) CHECK((k >= 0 && k < 1000));
  }
  CHECK(m.find("fly")->indices() == std::vector<int>{308});
  CHECK(m.find("dog") == nullptr);
  CHECK_THROWS(parse_class_map(nlohmann::json{{"schema_version", 1}}));
}
