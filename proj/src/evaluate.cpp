#include "contourlab/evaluate.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "contourlab/error.hpp"
#include "contourlab/logits.hpp"
#include "contourlab/png_io.hpp"
#include "contourlab/threshold.hpp"

namespace contourlab {

double closed_logit(const ClassifierInfo& info, const Scores& s, const std::vector<int>& closed_classes) {
  if (info.class_count == 1) return info.positive_label.value_or(1) == 1 ? s.z.at(0) : -s.z.at(0);
  return joint_class_logit(s.z, closed_classes);
}

std::vector<ScoredEntry> score_manifest(Classifier& c, const Manifest& m, const EvalOptions& opts) {
  if (c.info().class_count > 1) check_class_set(opts.closed_classes, c.info().class_count);
  std::vector<ScoredEntry> out;
  for (const auto& e : m.entries)
    if (e.split == opts.split) out.push_back({e, 0.0});
  constexpr std::size_t kChunk = 256;
  for (std::size_t begin = 0; begin < out.size(); begin += kChunk) {
    const std::size_t end = std::min(out.size(), begin + kChunk);
    std::vector<Canvas> images;
    for (std::size_t i = begin; i < end; ++i) images.push_back(read_png(m.image_file(out[i].entry)));
    const auto scores = c.classify_batch(images, opts.jobs);
    for (std::size_t i = begin; i < end; ++i)
      out[i].logit = closed_logit(c.info(), scores[i - begin], opts.closed_classes);
  }
  return out;
}

VariantEval evaluate_scores(const std::string& variant_id, const std::vector<ScoredEntry>& scores) {
  VariantEval r;
  r.variant_id = variant_id;
  std::vector<double> cal_logits, test_logits;
  std::vector<int> cal_labels, test_labels;
  for (const auto& s : scores) {
    const bool calibration = s.entry.pair_id % 2 == 0;
    (calibration ? cal_logits : test_logits).push_back(s.logit);
    (calibration ? cal_labels : test_labels).push_back(s.entry.label);
  }
  r.calibration_n = cal_logits.size();
  r.n = test_logits.size();
  if (cal_logits.empty() || test_logits.empty())
    throw ConstraintError(variant_id + ": need images with both even and odd pair ids");
  const ThresholdResult t = optimize_threshold(cal_logits, cal_labels);
  r.threshold = t.threshold;
  r.accuracy = accuracy_at(test_logits, test_labels, t.threshold);
  return r;
}

VariantEval evaluate_manifest(Classifier& c, const std::string& manifest_path, const EvalOptions& opts) {
  const Manifest m = read_manifest(manifest_path);
  return evaluate_scores(m.header.variant_id, score_manifest(c, m, opts));
}

std::vector<VariantEval> evaluate_variants(Classifier& c, const std::vector<std::string>& manifest_paths,
                                           const EvalOptions& opts) {
  std::vector<VariantEval> rows;
  for (const auto& path : manifest_paths) {
    try {
      rows.push_back(evaluate_manifest(c, path, opts));
    } catch (const Error& e) {
      VariantEval failed;
      failed.variant_id = path;
      try {
        failed.variant_id = read_manifest(path, false).header.variant_id;
      } catch (const Error&) {
      }
      failed.accuracy = std::numeric_limits<double>::quiet_NaN();
      failed.threshold = std::numeric_limits<double>::quiet_NaN();
      failed.error = e.what();
      failed.protocol_error = dynamic_cast<const ProtocolError*>(&e) != nullptr;
      failed.io_error = dynamic_cast<const IoError*>(&e) != nullptr;
      rows.push_back(failed);
    }
  }
  return rows;
}

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw UsageError("bad number '" + s + "' in CSV");
  return v;
}

}  // namespace

std::string format_eval_csv(const std::vector<VariantEval>& rows, const std::vector<std::string>& comments) {
  std::ostringstream out;
  for (const auto& c : comments) out << "# " << c << "\n";
  for (const auto& r : rows)
    if (r.error) out << "# error " << r.variant_id << ": " << *r.error << "\n";
  out << "variant_id,n,accuracy,threshold\n";
  for (const auto& r : rows)
    out << r.variant_id << "," << r.n << "," << format_double(r.accuracy) << "," << format_double(r.threshold)
        << "\n";
  return out.str();
}

std::vector<VariantEval> parse_eval_csv(const std::string& text) {
  std::istringstream in(text);
  std::vector<VariantEval> rows;
  bool header = false;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "variant_id,n,accuracy,threshold") throw UsageError("not an evaluation CSV: " + line);
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
    if (cells.size() != 4) throw UsageError("malformed CSV row: " + line);
    VariantEval r;
    r.variant_id = cells[0];
    r.n = static_cast<std::size_t>(parse_double(cells[1]));
    r.accuracy = parse_double(cells[2]);
    r.threshold = parse_double(cells[3]);
    rows.push_back(r);
  }
  if (!header) throw UsageError("evaluation CSV has no header row");
  return rows;
}

}  // namespace contourlab
