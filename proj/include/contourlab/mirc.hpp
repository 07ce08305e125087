#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "contourlab/canvas.hpp"
#include "contourlab/classifier.hpp"

namespace contourlab {

enum class DescendantRule { Ullman4, Stride1 };
enum class ClassRule { Joint, Separate };

std::string_view to_string(DescendantRule r);
std::string_view to_string(ClassRule r);
DescendantRule parse_descendant_rule(std::string_view s);
ClassRule parse_class_rule(std::string_view s);

struct SearchConfig {
  DescendantRule descendants = DescendantRule::Ullman4;
  ClassRule class_rule = ClassRule::Joint;
  double threshold = 0.5;
  double shrink = 0.8;
  int min_patch = 33;
  /// Resize to `resize` x `resize` and crop the central `crop` square first.
  bool preprocess = true;
  int resize = 256;
  int crop = 224;
  int max_depth = 32;
  int jobs = 1;
};

void check_config(const SearchConfig& cfg);

struct CropRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  friend bool operator==(const CropRect&, const CropRect&) = default;
};

struct CropNode {
  CropRect rect;
  /// Cumulative resolution factor.
  double scale = 1.0;
  /// rect.w * scale.
  double effective_size = 0.0;
  int depth = 0;
  double prob = 0.0;
  double logit = 0.0;
  /// Would be sent below min_patch pixels; upsampled to min_patch instead.
  bool floor_clamped = false;
  bool resolution_child = false;
};

CropNode root_node(int side, const SearchConfig& cfg);

/// Ullman4: the four corner crops of side floor(shrink * side) (TL, TR, BL, BR).
/// Stride1: every crop of that side at each 1-px offset, row-major.
/// Both end with the same-rect child at shrink times the resolution.
std::vector<CropNode> children(const CropNode& node, const SearchConfig& cfg);

/// Pixel side of the image sent for a node: round(effective_size), at least
/// min_patch.
int sent_side(const CropNode& node, const SearchConfig& cfg);
Canvas node_image(const Canvas& image, const CropNode& node, const SearchConfig& cfg);

/// Fills prob and logit for a batch of nodes.
class CropEvaluator {
 public:
  virtual ~CropEvaluator() = default;
  virtual void evaluate(std::vector<CropNode>& nodes) = 0;
};

/// Evaluates crops of one (already preprocessed) image with a classifier.
class ClassifierEvaluator : public CropEvaluator {
 public:
  ClassifierEvaluator(Classifier& c, Canvas image, std::vector<int> class_set, SearchConfig cfg);
  void evaluate(std::vector<CropNode>& nodes) override;

 private:
  Classifier& classifier_;
  Canvas image_;
  std::vector<int> class_set_;
  SearchConfig cfg_;
};

struct SearchResult {
  std::string image;
  std::vector<int> class_set;
  bool has_mirc = false;
  std::optional<CropNode> mirc;
  std::vector<CropNode> sub_mircs;
  /// p(MIRC) minus the best sub-MIRC.
  std::optional<double> gap_conservative;
  /// p(MIRC) minus the worst sub-MIRC.
  std::optional<double> gap_worst_child;
  std::vector<CropNode> path;
  std::optional<std::string> error;
  /// The error is the max_depth guard rather than a classifier failure.
  bool depth_limit = false;
  std::size_t evaluations = 0;
};

/// Greedy descent from the full `side` x `side` image.
SearchResult search(CropEvaluator& eval, int side, const SearchConfig& cfg);

Canvas preprocess(const Canvas& image, const SearchConfig& cfg);

/// One result for the joint rule, one per class for the separate rule.
/// Classifier failures are reported in the results' error fields.
std::vector<SearchResult> search_image(Classifier& c, const Canvas& image, const std::vector<int>& class_set,
                                       const SearchConfig& cfg, const std::string& label = {});

std::optional<double> recognition_gap(const SearchResult& r);

struct AuditReport {
  bool ok = true;
  std::vector<std::string> problems;
};

/// Re-evaluates the MIRC and its sub-MIRCs and checks the definition.
AuditReport audit(CropEvaluator& eval, const SearchResult& r, const SearchConfig& cfg);

struct AggregateStats {
  std::size_t images = 0;
  std::size_t with_mirc = 0;
  double fraction = 0.0;
  std::optional<double> gap_mean;
  /// Sample standard deviation; absent with fewer than two MIRCs.
  std::optional<double> gap_sd;
  std::vector<double> mirc_sizes;
  std::optional<double> size_mean;
  std::optional<double> size_sd;
};

AggregateStats aggregate_stats(const std::vector<SearchResult>& results);

nlohmann::json to_json(const CropNode& n);
nlohmann::json to_json(const SearchResult& r);
nlohmann::json to_json(const AggregateStats& s);

}  // namespace contourlab
