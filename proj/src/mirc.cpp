#include "contourlab/mirc.hpp"

#include <algorithm>
#include <cmath>

#include "contourlab/error.hpp"
#include "contourlab/logits.hpp"

namespace contourlab {

using nlohmann::json;

std::string_view to_string(DescendantRule r) { return r == DescendantRule::Ullman4 ? "ullman4" : "stride1"; }
std::string_view to_string(ClassRule r) { return r == ClassRule::Joint ? "joint" : "separate"; }

DescendantRule parse_descendant_rule(std::string_view s) {
  if (s == "ullman4") return DescendantRule::Ullman4;
  if (s == "stride1") return DescendantRule::Stride1;
  throw UsageError("descendant rule must be ullman4 or stride1");
}

ClassRule parse_class_rule(std::string_view s) {
  if (s == "joint") return ClassRule::Joint;
  if (s == "separate") return ClassRule::Separate;
  throw UsageError("class rule must be joint or separate");
}

void check_config(const SearchConfig& cfg) {
  if (!(cfg.shrink > 0.0 && cfg.shrink < 1.0)) throw UsageError("shrink factor must lie in (0, 1)");
  if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0)) throw UsageError("recognition threshold must lie in (0, 1)");
  if (cfg.min_patch < 1) throw UsageError("min_patch must be positive");
  if (cfg.max_depth < 1) throw UsageError("max_depth must be positive");
  if (cfg.preprocess && (cfg.crop < 1 || cfg.resize < cfg.crop)) throw UsageError("bad preprocessing sizes");
}

CropNode root_node(int side, const SearchConfig& cfg) {
  CropNode n;
  n.rect = {0, 0, side, side};
  n.effective_size = side;
  n.floor_clamped = side < cfg.min_patch;
  return n;
}

std::vector<CropNode> children(const CropNode& node, const SearchConfig& cfg) {
  std::vector<CropNode> out;
  const int side = static_cast<int>(std::floor(cfg.shrink * node.rect.w));
  auto crop_child = [&](int x, int y) {
    CropNode c;
    c.rect = {x, y, side, side};
    c.scale = node.scale;
    c.effective_size = side * node.scale;
    c.depth = node.depth + 1;
    c.floor_clamped = c.effective_size < cfg.min_patch;
    out.push_back(c);
  };
  if (side >= 1) {
    const CropRect& r = node.rect;
    if (cfg.descendants == DescendantRule::Ullman4) {
      crop_child(r.x, r.y);
      crop_child(r.x + r.w - side, r.y);
      crop_child(r.x, r.y + r.h - side);
      crop_child(r.x + r.w - side, r.y + r.h - side);
    } else {
      for (int dy = 0; dy <= r.h - side; ++dy)
        for (int dx = 0; dx <= r.w - side; ++dx) crop_child(r.x + dx, r.y + dy);
    }
  }
  CropNode res;
  res.rect = node.rect;
  res.scale = node.scale * cfg.shrink;
  res.effective_size = node.rect.w * res.scale;
  res.depth = node.depth + 1;
  res.floor_clamped = res.effective_size < cfg.min_patch;
  res.resolution_child = true;
  out.push_back(res);
  return out;
}

int sent_side(const CropNode& node, const SearchConfig& cfg) {
  const int side = std::max(1, static_cast<int>(std::lround(node.effective_size)));
  return std::max(side, cfg.min_patch);
}

Canvas node_image(const Canvas& image, const CropNode& node, const SearchConfig& cfg) {
  Canvas c = crop(image, node.rect.x, node.rect.y, node.rect.w, node.rect.h);
  const int native = std::max(1, static_cast<int>(std::lround(node.effective_size)));
  if (native != c.width) c = resize_bilinear(c, native, native);
  if (native < cfg.min_patch) c = resize_bilinear(c, cfg.min_patch, cfg.min_patch);
  return c;
}

ClassifierEvaluator::ClassifierEvaluator(Classifier& c, Canvas image, std::vector<int> class_set, SearchConfig cfg)
    : classifier_(c), image_(std::move(image)), class_set_(std::move(class_set)), cfg_(cfg) {
  if (classifier_.info().class_count == 1) {
    if (class_set_ != std::vector<int>{0}) throw UsageError("a binary classifier only knows class set {0}");
  } else {
    check_class_set(class_set_, classifier_.info().class_count);
  }
}

void ClassifierEvaluator::evaluate(std::vector<CropNode>& nodes) {
  std::vector<Canvas> images;
  images.reserve(nodes.size());
  for (const auto& n : nodes) images.push_back(node_image(image_, n, cfg_));
  const auto scores = classifier_.classify_batch(images, cfg_.jobs);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const ClassSetScore s = score_class_set(classifier_.info(), scores[i], class_set_);
    nodes[i].prob = s.probability;
    nodes[i].logit = s.logit;
  }
}

SearchResult search(CropEvaluator& eval, int side, const SearchConfig& cfg) {
  check_config(cfg);
  SearchResult r;
  std::vector<CropNode> batch{root_node(side, cfg)};
  try {
    eval.evaluate(batch);
    r.evaluations = 1;
    CropNode node = batch[0];
    r.path.push_back(node);
    if (node.prob < cfg.threshold) return r;
    for (;;) {
      if (node.depth >= cfg.max_depth) {
        r.error = "max_depth " + std::to_string(cfg.max_depth) + " reached without a MIRC";
        r.depth_limit = true;
        return r;
      }
      std::vector<CropNode> kids = children(node, cfg);
      eval.evaluate(kids);
      r.evaluations += kids.size();
      std::size_t best = kids.size();
      for (std::size_t i = 0; i < kids.size(); ++i)
        if (kids[i].prob >= cfg.threshold && (best == kids.size() || kids[i].logit > kids[best].logit)) best = i;
      if (best == kids.size()) {
        r.has_mirc = true;
        r.mirc = node;
        double hi = 0.0, lo = 1.0;
        for (const auto& k : kids) {
          hi = std::max(hi, k.prob);
          lo = std::min(lo, k.prob);
        }
        r.sub_mircs = std::move(kids);
        r.gap_conservative = node.prob - hi;
        r.gap_worst_child = node.prob - lo;
        return r;
      }
      node = kids[best];
      r.path.push_back(node);
    }
  } catch (const Error& e) {
    r.has_mirc = false;
    r.mirc.reset();
    r.sub_mircs.clear();
    r.gap_conservative.reset();
    r.gap_worst_child.reset();
    r.error = e.what();
    return r;
  }
}

Canvas preprocess(const Canvas& image, const SearchConfig& cfg) {
  if (cfg.preprocess) return resize_center_crop(image, cfg.resize, cfg.crop);
  if (image.width != image.height) throw UsageError("search without preprocessing needs a square image");
  return image;
}

std::vector<SearchResult> search_image(Classifier& c, const Canvas& image, const std::vector<int>& class_set,
                                       const SearchConfig& cfg, const std::string& label) {
  const Canvas input = preprocess(image, cfg);
  std::vector<std::vector<int>> sets;
  if (cfg.class_rule == ClassRule::Joint) {
    sets.push_back(class_set);
  } else {
    for (int k : class_set) sets.push_back({k});
  }
  std::vector<SearchResult> out;
  for (const auto& set : sets) {
    SearchResult r;
    try {
      ClassifierEvaluator eval(c, input, set, cfg);
      r = search(eval, input.width, cfg);
    } catch (const Error& e) {
      r.error = e.what();
    }
    r.image = label;
    r.class_set = set;
    out.push_back(std::move(r));
  }
  return out;
}

std::optional<double> recognition_gap(const SearchResult& r) {
  if (!r.has_mirc) return std::nullopt;
  return r.gap_conservative;
}

AuditReport audit(CropEvaluator& eval, const SearchResult& r, const SearchConfig& cfg) {
  AuditReport report;
  auto fail = [&](std::string why) {
    report.ok = false;
    report.problems.push_back(std::move(why));
  };
  if (!r.has_mirc) {
    if (r.mirc || !r.sub_mircs.empty() || r.gap_conservative) fail("result without MIRC carries MIRC data");
    return report;
  }
  if (!r.mirc || r.sub_mircs.empty() || !r.gap_conservative || !r.gap_worst_child) {
    fail("incomplete MIRC result");
    return report;
  }
  std::vector<CropNode> nodes{*r.mirc};
  nodes.insert(nodes.end(), r.sub_mircs.begin(), r.sub_mircs.end());
  eval.evaluate(nodes);
  if (nodes[0].prob < cfg.threshold) fail("MIRC re-evaluates below threshold");
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (nodes[i].prob >= cfg.threshold) fail("sub-MIRC " + std::to_string(i - 1) + " re-evaluates at or above threshold");
  if (*r.gap_conservative > *r.gap_worst_child) fail("conservative gap exceeds worst-child gap");
  if (!(*r.gap_conservative > 0.0 && *r.gap_conservative <= 1.0)) fail("gap outside (0, 1]");
  return report;
}

namespace {

void mean_sd(const std::vector<double>& v, std::optional<double>& mean, std::optional<double>& sd) {
  if (v.empty()) return;
  double s = 0.0;
  for (double x : v) s += x;
  mean = s / v.size();
  if (v.size() < 2) return;
  double ss = 0.0;
  for (double x : v) ss += (x - *mean) * (x - *mean);
  sd = std::sqrt(ss / (v.size() - 1));
}

}  // namespace

AggregateStats aggregate_stats(const std::vector<SearchResult>& results) {
  if (results.empty()) throw UsageError("no search results to aggregate");
  AggregateStats s;
  s.images = results.size();
  std::vector<double> gaps;
  for (const auto& r : results) {
    if (!r.has_mirc) continue;
    ++s.with_mirc;
    gaps.push_back(*r.gap_conservative);
    s.mirc_sizes.push_back(r.mirc->effective_size);
  }
  s.fraction = static_cast<double>(s.with_mirc) / static_cast<double>(s.images);
  mean_sd(gaps, s.gap_mean, s.gap_sd);
  mean_sd(s.mirc_sizes, s.size_mean, s.size_sd);
  return s;
}

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json to_json(const CropNode& n) {
  return json{{"rect", {n.rect.x, n.rect.y, n.rect.w, n.rect.h}},
              {"scale", n.scale},
              {"effective_size", n.effective_size},
              {"depth", n.depth},
              {"prob", n.prob},
              {"logit", n.logit},
              {"floor_clamped", n.floor_clamped},
              {"resolution_child", n.resolution_child}};
}

json to_json(const SearchResult& r) {
  json subs = json::array(), path = json::array();
  for (const auto& n : r.sub_mircs) subs.push_back(to_json(n));
  for (const auto& n : r.path) path.push_back(to_json(n));
  return json{{"image", r.image},
              {"class_set", r.class_set},
              {"has_mirc", r.has_mirc},
              {"mirc", r.mirc ? to_json(*r.mirc) : json(nullptr)},
              {"sub_mircs", subs},
              {"gap_conservative", optional_json(r.gap_conservative)},
              {"gap_worst_child", optional_json(r.gap_worst_child)},
              {"path", path},
              {"evaluations", r.evaluations},
              {"depth_limit", r.depth_limit},
              {"error", r.error ? json(*r.error) : json(nullptr)}};
}

json to_json(const AggregateStats& s) {
  return json{{"images", s.images},
              {"with_mirc", s.with_mirc},
              {"fraction_with_mirc", s.fraction},
              {"gap_mean", optional_json(s.gap_mean)},
              {"gap_sd", optional_json(s.gap_sd)},
              {"mirc_sizes", s.mirc_sizes},
              {"mirc_size_mean", optional_json(s.size_mean)},
              {"mirc_size_sd", optional_json(s.size_sd)}};
}

}  // namespace contourlab
