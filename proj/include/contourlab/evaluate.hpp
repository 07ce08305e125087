#pragma once

#include <optional>
#include <string>
#include <vector>

#include "contourlab/classifier.hpp"
#include "contourlab/dataset.hpp"

namespace contourlab {

struct EvalOptions {
  /// Entries of this split are evaluated.
  Split split = Split::Test;
  /// Multi-class classifiers: classes whose pooled probability means "closed".
  std::vector<int> closed_classes{1};
  int jobs = 1;
};

/// Logit oriented so that larger means "closed" (label 1).
double closed_logit(const ClassifierInfo& info, const Scores& s, const std::vector<int>& closed_classes);

struct ScoredEntry {
  ManifestEntry entry;
  double logit = 0.0;
};

std::vector<ScoredEntry> score_manifest(Classifier& c, const Manifest& m, const EvalOptions& opts);

struct VariantEval {
  std::string variant_id;
  /// Images the accuracy is measured on (the odd pair ids).
  std::size_t n = 0;
  double accuracy = 0.0;
  double threshold = 0.0;
  std::size_t calibration_n = 0;
  std::optional<std::string> error;
  bool protocol_error = false;
  bool io_error = false;
};

/// The threshold is fitted on images with even pair ids and accuracy is
/// measured on the odd ones.
VariantEval evaluate_scores(const std::string& variant_id, const std::vector<ScoredEntry>& scores);

VariantEval evaluate_manifest(Classifier& c, const std::string& manifest_path, const EvalOptions& opts);

/// One row per manifest; a failing variant gets an error marker and the rest still run.
std::vector<VariantEval> evaluate_variants(Classifier& c, const std::vector<std::string>& manifest_paths,
                                           const EvalOptions& opts);

/// `variant_id,n,accuracy,threshold` with `# `-prefixed comment lines first.
std::string format_eval_csv(const std::vector<VariantEval>& rows, const std::vector<std::string>& comments);
std::vector<VariantEval> parse_eval_csv(const std::string& text);

}  // namespace contourlab
