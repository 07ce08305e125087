// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
// Environment:
//   CONTOURLAB_ACCEPT_SPLITS  splits for the determinism check (default: the
//                             full train=14000,val=5600,test=5600)
//   CONTOURLAB_CLASSIFIER     classifier spec for the integration check
//   CONTOURLAB_ULLMAN_DIR     directory with the nine stimulus PNGs

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "contourlab/cli.hpp"
#include "contourlab/contour_gen.hpp"
#include "contourlab/dataset.hpp"
#include "contourlab/digest.hpp"
#include "contourlab/endpoint_detector.hpp"
#include "contourlab/logits.hpp"
#include "contourlab/mirc.hpp"
#include "contourlab/png_io.hpp"
#include "contourlab/raster.hpp"
#include "contourlab/rng.hpp"
#include "contourlab/threshold.hpp"
#include "mirc_synthetic.hpp"

using namespace contourlab;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kPi = std::numbers::pi;

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int run_cli_args(std::vector<std::string> args) {
  args.insert(args.begin(), "contourlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// ---------------------------------------------------------------------------

void geometry_suite() {
  const auto t0 = Clock::now();
  std::size_t stimuli = 0, violations = 0, gap_bad = 0, count_bad = 0;
  std::string first;
  for (const char* id : {"iid", "v4", "v5", "v6"}) {
    const auto& cfg = find_variant(id);
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      const auto pair = generate_pair(seed, cfg, seed);
      for (const auto* g : {&pair.open, &pair.closed}) {
        ++stimuli;
        const auto v = validate_geometry(*g, cfg);
        violations += v.size();
        if (!v.empty() && first.empty()) first = std::string(id) + ": " + v[0].rule + " " + v[0].detail;
      }
      const double gap = distance(pair.open.main_open.points.front(), pair.open.main_open.points.back());
      gap_bad += !(gap >= 20.0 - 1e-9 && gap <= 50.0 + 1e-9);
      const auto n = pair.open.flankers.size();
      if (cfg.flanker_kind == FlankerKind::None) count_bad += n != 0;
      else count_bad += !(n >= 10 && n <= 25);
    }
  }
  const double secs = seconds_since(t0);
  report("geometry", violations == 0 && gap_bad == 0 && count_bad == 0 && secs < 60.0,
         fmt("%zu stimuli (iid, v4, v5, v6 x 1000 seeds), %zu violations, %zu gaps outside [20,50], "
             "%zu flanker counts outside [10,25] (0 for v4), %.1f s (limit 60)%s",
             stimuli, violations, gap_bad, count_bad, secs, first.empty() ? "" : ("; first: " + first).c_str()));
}

void pair_invariant() {
  std::size_t failed = 0, pairs = 0;
  const auto& cat = variant_catalog();
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto& cfg = cat[i % cat.size()];
    const auto pair = generate_pair(4242, cfg, i);
    ++pairs;
    failed += pair.open.flankers != pair.closed.flankers || !validate_pair(pair).empty();
  }
  report("pair-invariant", failed == 0, fmt("%zu pairs over all 16 configurations, %zu failures", pairs, failed));
}

void determinism(const fs::path& tmp) {
  const char* env = std::getenv("CONTOURLAB_ACCEPT_SPLITS");
  const std::string splits = env ? env : "train=14000,val=5600,test=5600";
  const auto t0 = Clock::now();
  fs::remove_all(tmp / "det");
  const auto a = tmp / "det" / "jobs1", b = tmp / "det" / "jobs8";
  const int ca = run_cli_args({"generate", "--variant", "iid", "--seed", "2025", "--splits", splits, "--jobs", "1",
                               "--out", a.string()});
  const int cb = run_cli_args({"generate", "--variant", "iid", "--seed", "2025", "--splits", splits, "--jobs", "8",
                               "--out", b.string()});
  bool same = ca == 0 && cb == 0;
  const std::string ma = slurp(a / "iid" / "manifest.jsonl");
  same = same && !ma.empty() && ma == slurp(b / "iid" / "manifest.jsonl");
  std::size_t files = 0, differing = 0;
  if (same) {
    for (const auto& f : fs::recursive_directory_iterator(a)) {
      if (f.path().extension() != ".png") continue;
      ++files;
      differing += sha256_file(f.path().string()) != sha256_file((b / fs::relative(f.path(), a)).string());
    }
  }
  report("determinism", same && differing == 0 && files > 0,
         fmt("splits %s: manifests %s, %zu PNGs compared, %zu differ (--jobs 1 vs --jobs 8), %.0f s", splits.c_str(),
             same ? "identical" : "DIFFER", files, differing, seconds_since(t0)));
  fs::remove_all(tmp / "det");
}

void curvy_contour() {
  // frozen mpmath values from tests/oracles/curvy.py
  CurvyParams p;
  p.amplitude1 = 20.5;
  p.frequency1 = 3;
  p.phase1 = 0.7;
  p.amplitude2 = -12.25;
  p.frequency2 = 5;
  p.phase2 = 2.1;
  p.base_radius = 60;
  p.center = {128, 128};
  struct Ref {
    double phi, x, y;
  };
  const Ref refs[] = {{0.0, 216.472065075954871, 128.0},
                      {kPi / 7, 174.56508635651154764, 150.42456371187670143},
                      {2.5, 74.489614308651119745, 167.97345124527817715},
                      {5 * kPi / 3, 154.36861299976539692, 82.328222559285148258}};
  double worst = 0.0;
  for (const auto& r : refs) {
    const auto q = curvy_point(p, r.phi);
    worst = std::max({worst, std::abs(q.x - r.x), std::abs(q.y - r.y)});
  }
  // every vertex of sampled contours against the formula in long double
  double worst_vertex = 0.0, worst_sweep = 0.0, worst_dash = 0.0;
  for (const char* id : {"v1", "v2", "v3", "v7", "v8", "v15"}) {
    const auto& cfg = find_variant(id);
    for (std::uint64_t i = 0; i < 20; ++i) {
      const auto g = generate_pair(7, cfg, i).open;
      if (!g.curvy) continue;
      const auto& c = *g.curvy;
      const auto closed = closed_curvy(c, cfg.curvy_samples);
      for (std::size_t j = 0; j + 1 < closed.points.size(); ++j) {
        const long double phi = static_cast<long double>(j) * 2 * std::numbers::pi_v<long double> / cfg.curvy_samples;
        const long double r = c.amplitude1 * std::sin(c.frequency1 * (phi + c.phase1)) +
                              c.amplitude2 * std::sin(c.frequency2 * (phi + c.phase2)) + c.base_radius;
        worst_vertex = std::max({worst_vertex, static_cast<double>(std::abs(closed.points[j].x - (c.center.x + r * std::cos(phi)))),
                                 static_cast<double>(std::abs(closed.points[j].y - (c.center.y + r * std::sin(phi))))});
      }
      auto sweep = [&](const Polyline& l) {
        double s = 0.0;
        for (std::size_t j = 0; j + 1 < l.points.size(); ++j) {
          const double a0 = std::atan2(l.points[j].y - c.center.y, l.points[j].x - c.center.x);
          const double a1 = std::atan2(l.points[j + 1].y - c.center.y, l.points[j + 1].x - c.center.x);
          s += std::remainder(a1 - a0, 2 * kPi);
        }
        return s;
      };
      worst_sweep = std::max(worst_sweep, std::abs(sweep(open_curvy(c, cfg.curvy_open_angle, cfg.curvy_samples)) - 5 * kPi / 3));
      double shown = 0.0;
      for (const auto& arc : dash_contour(c, 20, kPi / 20, cfg.curvy_samples)) shown += sweep(arc);
      worst_dash = std::max(worst_dash, std::abs((2 * kPi - shown) - kPi));
    }
  }
  report("curvy-contour", worst < 1e-9 && worst_vertex < 1e-9 && worst_sweep < 1e-9 && worst_dash < 1e-9,
         fmt("reference points max err %.2e, sampled vertices max err %.2e, open sweep err %.2e, "
             "dash removed-phase err %.2e (tolerance 1e-9)",
             worst, worst_vertex, worst_sweep, worst_dash));
}

void logit_suite() {
  const bool half = logit_of_prob(0.5).value == 0.0;
  double round_trip = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    const double p = 1e-9 + (1 - 2e-9) * i / 100000.0;
    round_trip = std::max(round_trip, std::abs(sigmoid(logit_of_prob(p).value) - p));
  }
  Rng rng(1000);
  double joint = 0.0;
  std::vector<double> z(1000);
  for (int t = 0; t < 10000; ++t) {
    for (auto& v : z) v = rng.uniform(-30, 30);
    const int k = 1 + static_cast<int>(rng.uniform_int(0, 4));
    std::vector<int> set;
    for (int j = 0; j < k; ++j) set.push_back(static_cast<int>(rng.uniform_int(0, 199)) * 5 + j);
    const double p = class_set_probability(z, set);
    joint = std::max(joint, std::abs(joint_class_logit(z, set) - logit_of_prob(p).value));
  }
  double uniform = 0.0;
  const std::vector<double> flat(1000, 1.25);
  for (int k = 1; k < 1000; k += 37) {
    std::vector<int> set;
    for (int j = 0; j < k; ++j) set.push_back(j);
    uniform = std::max(uniform, std::abs(joint_class_logit(flat, set) - std::log(static_cast<double>(k) / (1000 - k))));
  }
  report("logit-suite", half && round_trip < 1e-12 && joint < 1e-9 && uniform < 1e-12,
         fmt("logit(0.5)=%s, round-trip max err %.2e (<1e-12), joint vs pooled over 10000 vectors max err %.2e (<1e-9), "
             "uniform log(k/(N-k)) max err %.2e (<1e-12)",
             half ? "0" : "nonzero", round_trip, joint, uniform));
}

void threshold_suite() {
  Rng rng(77);
  int within = 0;
  double worst_shortfall = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = 50 + static_cast<int>(rng.uniform_int(0, 450));
    const double shift = rng.uniform(-1.0, 3.0);
    const double spread = rng.uniform(0.2, 3.0);
    std::vector<double> z;
    std::vector<int> y;
    for (int i = 0; i < n; ++i) {
      const int label = rng.uniform() < 0.5;
      z.push_back(spread * (rng.uniform() + rng.uniform() - 1.0) + (label ? shift : 0.0));
      y.push_back(label);
    }
    std::vector<double> s = z;
    std::sort(s.begin(), s.end());
    double best = accuracy_at(z, y, s.front() - 1), best_t = s.front() - 1;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      const double m = (s[i] + s[i + 1]) / 2;
      const double a = accuracy_at(z, y, m);
      if (a > best) best = a, best_t = m;
    }
    if (accuracy_at(z, y, s.back()) > best) best = accuracy_at(z, y, s.back()), best_t = s.back();
    const auto grid = threshold_candidates(z);
    const double step = grid[1] - grid[0];
    std::size_t near = 0;
    for (double v : z) near += std::abs(v - best_t) <= step;
    const auto r = optimize_threshold(z, y);
    const double allowed = static_cast<double>(near) / n;
    worst_shortfall = std::max(worst_shortfall, best - r.accuracy);
    within += r.accuracy <= best + 1e-12 && r.accuracy >= best - allowed - 1e-12;
  }
  std::vector<double> z;
  std::vector<int> y;
  for (int i = 0; i < 400; ++i) {
    z.push_back(i % 2 ? rng.uniform(0.01, 5) : rng.uniform(-5, -0.01));
    y.push_back(i % 2);
  }
  const double separable = optimize_threshold(z, y).accuracy;
  report("threshold", within == 100 && separable == 1.0,
         fmt("%d/100 datasets within one grid step of the exhaustive optimum (max shortfall %.4f), separable accuracy %.3f",
             within, worst_shortfall, separable));
}

struct MircRun {
  std::size_t results = 0, audited_ok = 0, gap_order_ok = 0;
};

void mirc_oracle(MircRun& audit_stats) {
  SearchConfig cfg;
  cfg.preprocess = false;
  Rng rng(314);
  int equal = 0, with_mirc = 0;
  double slowest = 0.0;
  auto audit_one = [&](CropEvaluator& eval, const SearchResult& r) {
    ++audit_stats.results;
    audit_stats.audited_ok += audit(eval, r, cfg).ok;
    audit_stats.gap_order_ok += !r.has_mirc || *r.gap_conservative <= *r.gap_worst_child;
  };
  for (int t = 0; t < 50; ++t) {
    synthetic::Disc d;
    d.r = rng.uniform(5, 45);
    d.cx = rng.uniform(d.r, 224 - d.r);
    d.cy = rng.uniform(d.r, 224 - d.r);
    d.min_visible = rng.uniform(2, 10);
    synthetic::CoverageEvaluator eval(d, 224);
    const auto t0 = Clock::now();
    const auto r = search(eval, 224, cfg);
    slowest = std::max(slowest, seconds_since(t0));
    const auto ref = synthetic::reference_greedy(d, 224);
    bool same = r.has_mirc == ref.has_mirc;
    if (same && r.has_mirc) {
      ++with_mirc;
      same = r.mirc->rect == CropRect{ref.mirc.x, ref.mirc.y, ref.mirc.w, ref.mirc.w} &&
             r.mirc->scale == ref.mirc.scale && *r.gap_conservative == ref.mirc.prob - ref.best_child &&
             *r.gap_worst_child == ref.mirc.prob - ref.worst_child;
    }
    equal += same;
    audit_one(eval, r);
  }
  int step_exact = 0;
  for (int t = 0; t < 10; ++t) {
    synthetic::Disc d;
    d.r = rng.uniform(8, 30);
    d.cx = rng.uniform(d.r, 224 - d.r);
    d.cy = rng.uniform(d.r, 224 - d.r);
    d.min_visible = rng.uniform(2, 6);
    synthetic::CoverageEvaluator eval(d, 224, true);
    const auto t0 = Clock::now();
    const auto r = search(eval, 224, cfg);
    slowest = std::max(slowest, seconds_since(t0));
    step_exact += r.has_mirc && *recognition_gap(r) == 0.9 - 0.2 && 0.9 - 0.2 == 0.7;
    audit_one(eval, r);
  }
  // stride1 runs feed the audit too
  SearchConfig s1 = cfg;
  s1.descendants = DescendantRule::Stride1;
  for (int t = 0; t < 10; ++t) {
    synthetic::Disc d;
    d.r = rng.uniform(4, 12);
    d.cx = rng.uniform(d.r, 64 - d.r);
    d.cy = rng.uniform(d.r, 64 - d.r);
    d.min_visible = rng.uniform(2, 4);
    synthetic::CoverageEvaluator eval(d, 64);
    const auto r = search(eval, 64, s1);
    ++audit_stats.results;
    audit_stats.audited_ok += audit(eval, r, s1).ok;
    audit_stats.gap_order_ok += !r.has_mirc || *r.gap_conservative <= *r.gap_worst_child;
  }
  report("mirc-oracle", equal == 50 && step_exact == 10 && slowest < 1.0,
         fmt("%d/50 configurations identical to the brute-force greedy reference (%d with a MIRC), "
             "step-classifier gap exactly 0.7 in %d/10, slowest search %.4f s (limit 1)",
             equal, with_mirc, step_exact, slowest));
}

void mirc_audit(const MircRun& s) {
  report("mirc-audit", s.results > 0 && s.audited_ok == s.results && s.gap_order_ok == s.results,
         fmt("%zu/%zu results re-evaluate with MIRC >= 0.5 and all sub-MIRCs < 0.5; conservative <= worst-child gap "
             "in %zu/%zu",
             s.audited_ok, s.results, s.gap_order_ok, s.results));
}

// Thresholds fixed after tests/oracles/endpoints.py (scikit-image skeleton)
// on the same data (v4, seed 2024, 100 test pairs): accuracy 1.00, open
// member with more positive patches in 100/100 pairs.
void endpoint_detector() {
  const auto& cfg = find_variant("v4");
  EndpointDetector det;
  std::vector<double> z;
  std::vector<int> y;
  int more = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const auto pair = generate_pair(2024, cfg, split_index_base(Split::Test) + i);
    int positive[2] = {0, 0};
    for (const auto* g : {&pair.open, &pair.closed}) {
      const auto img = render(*g, cfg);
      const auto grid = det.patch_logits(img);
      const int closed = g->member == Member::Closed;
      for (double v : grid.values) positive[closed] += v > 0;
      z.push_back(-grid.sum());  // positive logits mean open
      y.push_back(closed);
    }
    more += positive[0] > positive[1];
  }
  const auto t = optimize_threshold(z, y);
  report("endpoint-detector", t.accuracy >= 0.95 && more >= 95,
         fmt("100 no-flanker pairs: accuracy %.3f (>= 0.95), open > closed positive patches in %d/100 pairs (>= 95)",
             t.accuracy, more));
}

void integration(const fs::path& tmp) {
  const char* spec = std::getenv("CONTOURLAB_CLASSIFIER");
  const char* images = std::getenv("CONTOURLAB_ULLMAN_DIR");
  std::string classifier, dir;
  std::string mode;
  if (spec && images) {
    classifier = spec;
    dir = images;
    mode = "external classifier " + classifier;
  } else {
    // no model supplied: exercise the pipeline and schema with a constant 1000-class server
    classifier = std::string("exec:'") + CONTOURLAB_CLI + "' serve-classifier --builtin constant --class-count 1000";
    fs::remove_all(tmp / "ullman");
    fs::create_directories(tmp / "ullman");
    for (const char* n : {"fly", "ship", "eagle", "glasses", "bike", "suit", "plane", "horse", "car"})
      write_png((tmp / "ullman" / (std::string(n) + ".png")).string(), Canvas(224, 224, 3, 180));
    dir = (tmp / "ullman").string();
    mode = "no external classifier supplied, schema checked with a constant stand-in";
  }
  const auto out = tmp / "ullman_report.json";
  const int code = run_cli_args({"search-mirc", "--classifier", classifier, "--images", dir, "--out", out.string()});
  bool ok = code == 0 || code == kExitProtocol;
  std::string why;
  try {
    const auto j = nlohmann::json::parse(slurp(out));
    const auto& st = j.at("stats");
    for (const char* k : {"images", "with_mirc", "fraction_with_mirc", "gap_mean", "gap_sd", "mirc_sizes"})
      if (!st.contains(k)) ok = false, why += std::string(" missing stats.") + k;
    if (j.at("results").size() != 9) ok = false, why += " expected 9 results";
    for (const auto& r : j.at("results"))
      for (const char* k : {"image", "class_set", "has_mirc", "mirc", "sub_mircs", "gap_conservative"})
        if (!r.contains(k)) ok = false, why += std::string(" missing result.") + k;
    why = fmt("%s; %zu images, fraction with MIRC %.3f%s", mode.c_str(), st.value("images", std::size_t{0}),
              st.value("fraction_with_mirc", 0.0), why.c_str());
  } catch (const std::exception& e) {
    ok = false;
    why = mode + "; report unreadable: " + e.what();
  }
  report("integration-schema", ok, why);
}

}  // namespace

int main() {
  const fs::path tmp = fs::path(CONTOURLAB_TEST_TMP) / "acceptance";
  fs::create_directories(tmp);
  geometry_suite();
  pair_invariant();
  curvy_contour();
  logit_suite();
  threshold_suite();
  MircRun audit_stats;
  mirc_oracle(audit_stats);
  mirc_audit(audit_stats);
  endpoint_detector();
  integration(tmp);
  determinism(tmp);
  std::printf("%s: %d failing\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
