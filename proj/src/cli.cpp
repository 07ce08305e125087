#include "contourlab/cli.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "contourlab/class_map.hpp"
#include "contourlab/dataset.hpp"
#include "contourlab/digest.hpp"
#include "contourlab/endpoint_detector.hpp"
#include "contourlab/error.hpp"
#include "contourlab/evaluate.hpp"
#include "contourlab/heatmap.hpp"
#include "contourlab/mirc.hpp"
#include "contourlab/parallel.hpp"
#include "contourlab/png_io.hpp"
#include "contourlab/protocol.hpp"
#include "contourlab/threshold.hpp"
#include "contourlab/variant.hpp"
#include "contourlab/xp_server.hpp"

namespace contourlab {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return kExitUsage;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kExitIo;
  if (dynamic_cast<const ProtocolError*>(&e)) return kExitProtocol;
  if (dynamic_cast<const ConstraintError*>(&e)) return kExitConstraint;
  return 1;
}

namespace {

json repro_header(const std::string& command, std::optional<std::uint64_t> seed, const std::string& config_hash) {
  json h{{"tool", "contourlab"}, {"version", kVersion}, {"command", command}, {"config_hash", config_hash}};
  h["seed"] = seed ? json(*seed) : json(nullptr);
  return h;
}

std::string header_comment(const json& h) {
  std::ostringstream s;
  s << h["tool"].get<std::string>() << " " << h["version"].get<std::string>() << " " << h["command"].get<std::string>()
    << " seed=" << (h["seed"].is_null() ? std::string("none") : h["seed"].dump())
    << " config_hash=" << h["config_hash"].get<std::string>();
  return s.str();
}

std::vector<VariantConfig> load_catalog(const std::string& path) {
  return path.empty() ? variant_catalog() : load_catalog_file(path);
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::istringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad class id '" + item + "'");
    }
  }
  return out;
}

fs::path ensure_dir(const std::string& dir) {
  fs::create_directories(dir);
  return fs::path(dir);
}

// ---- generate ---------------------------------------------------------------

struct GenerateArgs {
  std::string variant = "iid";
  std::uint64_t seed = 0;
  std::string out;
  std::string splits = "train=14000,val=5600,test=5600";
  int jobs = default_jobs();
  std::string catalog;
  std::string backgrounds;
  double contrast = 0.0;
  int margin = 0;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const auto catalog = load_catalog(a.catalog);
  std::vector<VariantConfig> selected;
  if (a.variant == "all") selected = catalog;
  else selected.push_back(find_variant(catalog, a.variant));
  std::vector<std::string> backgrounds;
  if (!a.backgrounds.empty()) {
    if (!fs::is_directory(a.backgrounds)) throw IoError("no background directory " + a.backgrounds);
    for (const auto& f : fs::directory_iterator(a.backgrounds))
      if (f.path().extension() == ".png") backgrounds.push_back(f.path().string());
    std::sort(backgrounds.begin(), backgrounds.end());
    if (backgrounds.empty()) throw IoError("no PNG backgrounds in " + a.backgrounds);
  }
  for (const auto& v : selected) {
    BuildOptions opts;
    opts.master_seed = a.seed;
    opts.variant = v;
    opts.splits = parse_splits(a.splits);
    opts.out_dir = a.out;
    opts.jobs = a.jobs;
    opts.backgrounds = backgrounds;
    opts.contrast = a.contrast;
    opts.margin = a.margin;
    const BuildResult r = build_dataset(opts);
    out << "# " << header_comment(repro_header("generate", a.seed, r.header.config_hash)) << "\n";
    out << v.id << ": " << r.entries.size() << " images -> " << r.manifest_path << "\n";
  }
  return kExitOk;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string classifier = "builtin:endpoint";
  std::vector<std::string> manifests;
  std::string out;
  std::string split = "test";
  std::string closed_classes = "1";
  int jobs = default_jobs();
  double timeout = 30.0;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  auto classifier = open_classifier(a.classifier, a.timeout);
  EvalOptions opts;
  opts.split = parse_split(a.split);
  opts.closed_classes = parse_int_list(a.closed_classes);
  opts.jobs = a.jobs;
  const auto rows = evaluate_variants(*classifier, a.manifests, opts);

  std::string hashes = a.classifier + "|" + a.split + "|" + a.closed_classes;
  std::optional<std::uint64_t> seed;
  for (const auto& path : a.manifests) {
    try {
      const Manifest m = read_manifest(path, false);
      hashes += "|" + m.header.variant_id + ":" + m.header.config_hash;
      if (!seed) seed = m.header.master_seed;
    } catch (const Error&) {
      hashes += "|" + path + ":unreadable";
    }
  }
  const json header = repro_header("eval", seed, sha256_hex(hashes));
  const std::string csv = format_eval_csv(rows, {header_comment(header), "classifier=" + a.classifier});
  const fs::path dir = ensure_dir(a.out);
  write_file_atomic((dir / "eval.csv").string(), csv);
  out << csv;
  for (const auto& r : rows) {
    if (!r.error) continue;
    if (r.protocol_error) return kExitProtocol;
    return r.io_error ? kExitIo : kExitConstraint;
  }
  return kExitOk;
}

// ---- heatmap ----------------------------------------------------------------

struct HeatmapArgs {
  std::string classifier = "builtin:endpoint";
  std::string image;
  std::string out;
  int k = 5;
  std::string sign = "absolute";
  double alpha = 0.5;
  double timeout = 30.0;
};

int cmd_heatmap(const HeatmapArgs& a, std::ostream& out) {
  ExtremeSign sign;
  if (a.sign == "absolute") sign = ExtremeSign::Absolute;
  else if (a.sign == "positive") sign = ExtremeSign::Positive;
  else if (a.sign == "negative") sign = ExtremeSign::Negative;
  else throw UsageError("--sign must be absolute, positive or negative");
  auto classifier = open_classifier(a.classifier, a.timeout);
  const Canvas image = read_png(a.image);
  const PatchLogitGrid grid = classifier->patch_logits(image);
  const ExtremePatches top = top_extreme_patches(grid, a.k, sign);

  const fs::path dir = ensure_dir(a.out);
  write_png((dir / "heatmap.png").string(), heatmap(grid, image.width, image.height));
  write_png((dir / "overlay.png").string(), heatmap_overlay(grid, image, a.alpha));
  json patches = json::array();
  for (const auto& p : top.patches)
    patches.push_back({{"row", p.row},
                       {"col", p.col},
                       {"rect", {p.rect.x, p.rect.y, p.rect.w, p.rect.h}},
                       {"logit", p.value}});
  const json report{{"header", repro_header("heatmap", std::nullopt,
                                            sha256_hex(a.classifier + "|" + sha256_file(a.image)))},
                    {"image", a.image},
                    {"classifier", a.classifier},
                    {"image_logit", grid.sum()},
                    {"grid", grid_to_json(grid)},
                    {"sign", a.sign},
                    {"k", a.k},
                    {"extreme_patches", patches},
                    {"fewer_than_k", top.fewer_than_requested}};
  write_file_atomic((dir / "patches.json").string(), report.dump(2) + "\n");
  out << "image logit " << grid.sum() << ", " << top.patches.size() << " extreme patches"
      << (top.fewer_than_requested ? " (fewer than requested)" : "") << " -> " << dir.string() << "\n";
  return kExitOk;
}

// ---- search-mirc ------------------------------------------------------------

struct MircArgs {
  std::string classifier;
  std::string images;
  std::string classes = std::string(CONTOURLAB_SOURCE_DIR) + "/config/ullman_class_map.json";
  std::string class_set;
  std::string descendants = "ullman4";
  std::string class_rule = "joint";
  std::string out;
  double threshold = 0.5;
  int max_depth = 32;
  bool no_preprocess = false;
  int jobs = default_jobs();
  double timeout = 30.0;
};

struct MircJob {
  std::string label;
  std::string path;
  std::vector<int> class_set;
  std::string error;
};

int cmd_search_mirc(const MircArgs& a, std::ostream& out) {
  SearchConfig cfg;
  cfg.descendants = parse_descendant_rule(a.descendants);
  cfg.class_rule = parse_class_rule(a.class_rule);
  cfg.threshold = a.threshold;
  cfg.max_depth = a.max_depth;
  cfg.preprocess = !a.no_preprocess;
  cfg.jobs = 1;
  check_config(cfg);
  const std::vector<int> fixed_set = parse_int_list(a.class_set);

  std::vector<MircJob> jobs;
  if (fs::is_directory(a.images)) {
    std::optional<ClassMap> map;
    if (fixed_set.empty()) map = load_class_map(a.classes);
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(a.images))
      if (f.path().extension() == ".png") files.push_back(f.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      MircJob j{f.stem().string(), f.string(), fixed_set, {}};
      if (map) {
        const ClassMapEntry* e = map->find(j.label);
        if (e) j.class_set = e->indices();
        else j.error = "no class-map entry named '" + j.label + "'";
      }
      jobs.push_back(std::move(j));
    }
  } else if (fs::is_regular_file(a.images)) {
    if (fixed_set.empty()) throw UsageError("images from a manifest need --class-set");
    const Manifest m = read_manifest(a.images);
    for (const auto& e : m.entries) jobs.push_back({e.image_path, m.image_file(e), fixed_set, {}});
  } else {
    throw IoError("no image directory or manifest at " + a.images);
  }
  if (jobs.empty()) throw UsageError("no PNG images found in " + a.images);

  auto classifier = open_classifier(a.classifier, a.timeout);
  std::vector<std::vector<SearchResult>> per_job(jobs.size());
  parallel_for(jobs.size(), classifier->info().thread_safe ? a.jobs : 1, [&](std::size_t i) {
    const MircJob& j = jobs[i];
    if (!j.error.empty()) {
      SearchResult r;
      r.image = j.label;
      r.error = j.error;
      per_job[i].push_back(r);
      return;
    }
    per_job[i] = search_image(*classifier, read_png(j.path), j.class_set, cfg, j.label);
  });

  std::vector<SearchResult> results;
  for (auto& list : per_job)
    for (auto& r : list) results.push_back(std::move(r));

  json rows = json::array();
  bool protocol_failure = false, unmapped = false;
  for (const auto& r : results) {
    rows.push_back(to_json(r));
    if (r.error && r.class_set.empty()) unmapped = true;
    else if (r.error && !r.depth_limit) protocol_failure = true;
  }
  json stats;
  if (cfg.class_rule == ClassRule::Joint) {
    stats = to_json(aggregate_stats(results));
  } else {
    std::map<int, std::vector<SearchResult>> by_class;
    for (const auto& r : results)
      if (!r.class_set.empty()) by_class[r.class_set[0]].push_back(r);
    stats = json::object();
    for (const auto& [k, list] : by_class) stats[std::to_string(k)] = to_json(aggregate_stats(list));
  }
  const std::string config_text = std::string(to_string(cfg.descendants)) + "|" + std::string(to_string(cfg.class_rule)) +
                                  "|" + std::to_string(cfg.threshold) + "|" + std::to_string(cfg.max_depth) + "|" +
                                  (cfg.preprocess ? "pre" : "raw") + "|" + a.classifier + "|" + a.class_set +
                                  (fixed_set.empty() && fs::is_directory(a.images) ? "|" + sha256_file(a.classes) : "");
  const json report{{"header", repro_header("search-mirc", std::nullopt, sha256_hex(config_text))},
                    {"classifier", a.classifier},
                    {"descendants", to_string(cfg.descendants)},
                    {"class_rule", to_string(cfg.class_rule)},
                    {"threshold", cfg.threshold},
                    {"results", rows},
                    {"stats", stats}};
  fs::path target = a.out;
  if (target.extension() != ".json") target = ensure_dir(a.out) / "report.json";
  else if (target.has_parent_path()) fs::create_directories(target.parent_path());
  write_file_atomic(target.string(), report.dump(2) + "\n");
  out << results.size() << " searches -> " << target.string() << "\n";
  if (protocol_failure) {
    for (const auto& r : results)
      if (r.error && !r.depth_limit && !r.class_set.empty()) out << r.image << ": " << *r.error << "\n";
    return kExitProtocol;
  }
  if (unmapped) {
    for (const auto& r : results)
      if (r.error && r.class_set.empty()) out << r.image << ": " << *r.error << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

// ---- threshold --------------------------------------------------------------

struct ThresholdArgs {
  std::string input;
  std::string out;
};

int cmd_threshold(const ThresholdArgs& a, std::ostream& out) {
  std::ifstream in(a.input);
  if (!in) throw IoError("cannot open " + a.input);
  std::vector<double> logits;
  std::vector<int> labels;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.rfind("logit", 0) == 0) continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("no comma");
      logits.push_back(std::stod(line.substr(0, comma)));
      const int label = std::stoi(line.substr(comma + 1));
      if (label != 0 && label != 1) throw std::invalid_argument("label");
      labels.push_back(label);
    } catch (const std::exception&) {
      throw UsageError(a.input + ":" + std::to_string(line_no) + ": expected 'logit,label' with label 0 or 1");
    }
  }
  const ThresholdResult t = optimize_threshold(logits, labels);
  const json report{{"header", repro_header("threshold", std::nullopt, sha256_file(a.input))},
                    {"n", logits.size()},
                    {"threshold", t.threshold},
                    {"accuracy", t.accuracy},
                    {"degenerate", t.degenerate},
                    {"constant_prediction", t.constant_prediction}};
  const fs::path dir = ensure_dir(a.out);
  write_file_atomic((dir / "threshold.json").string(), report.dump(2) + "\n");
  out << "threshold " << t.threshold << " accuracy " << t.accuracy << "\n";
  return kExitOk;
}

// ---- serve ------------------------------------------------------------------

std::atomic<HttpServer*> g_http_server{nullptr};

void stop_http(int) {
  if (HttpServer* s = g_http_server.load()) s->stop();
}

struct ServeArgs {
  std::string config;
  std::string manifest;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string out = "xp-logs";
  std::uint64_t seed = 0;
  SessionConfig session;
};

int cmd_serve(const ServeArgs& a, const CLI::App& sub, std::ostream& out) {
  ServeFile file;
  file.host = a.host;
  file.port = a.port;
  file.service.manifest_path = a.manifest;
  file.service.log_dir = a.out;
  file.service.seed = a.seed;
  file.service.session = a.session;
  if (!a.config.empty()) {
    ServeFile from_file = load_serve_file(a.config, file);
    // flags given on the command line win over the file
    auto given = [&](const char* name) { return sub.count(name) > 0; };
    if (!given("--manifest")) file.service.manifest_path = from_file.service.manifest_path;
    if (!given("--host")) file.host = from_file.host;
    if (!given("--port")) file.port = from_file.port;
    if (!given("--out")) file.service.log_dir = from_file.service.log_dir;
    if (!given("--seed")) file.service.seed = from_file.service.seed;
    if (!given("--practice-trials")) file.service.session.practice_trials = from_file.service.session.practice_trials;
    if (!given("--blocks")) file.service.session.blocks = from_file.service.session.blocks;
    if (!given("--trials-per-block")) file.service.session.trials_per_block = from_file.service.session.trials_per_block;
    if (!given("--stim-ms")) file.service.session.timing.stim_ms = from_file.service.session.timing.stim_ms;
    if (!given("--isi-ms")) file.service.session.timing.isi_ms = from_file.service.session.timing.isi_ms;
    if (!given("--response-window-ms"))
      file.service.session.timing.response_window_ms = from_file.service.session.timing.response_window_ms;
    if (!given("--iti-ms")) file.service.session.timing.iti_ms = from_file.service.session.timing.iti_ms;
    if (!given("--frame-tolerance")) file.service.session.frame_tolerance = from_file.service.session.frame_tolerance;
  }
  if (file.service.manifest_path.empty()) throw UsageError("serve needs --manifest");
  ExperimentService service(file.service);
  HttpServer server(service);
  const int port = server.bind(file.host, file.port);
  out << "# " << header_comment(repro_header("serve", file.service.seed, sha256_file(file.service.manifest_path)))
      << "\n";
  for (const auto& o : timing_overrides(file.service.session.timing)) out << "# timing override " << o << "\n";
  out << "listening on http://" << file.host << ":" << port << "\n" << std::flush;
  g_http_server = &server;
  std::signal(SIGINT, stop_http);
  std::signal(SIGTERM, stop_http);
  server.listen();
  g_http_server = nullptr;
  return kExitOk;
}

// ---- report -----------------------------------------------------------------

struct ReportArgs {
  std::string eval;
  std::string out;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  std::ifstream in(a.eval);
  if (!in) throw IoError("cannot open " + a.eval);
  std::stringstream text;
  text << in.rdbuf();
  const auto rows = parse_eval_csv(text.str());
  const json header = repro_header("report", std::nullopt, sha256_hex(text.str()));
  std::ostringstream csv;
  csv << "# " << header_comment(header) << "\n# source " << a.eval << "\n";
  csv << "variant_id,accuracy\n";
  json bars = json::array();
  for (const auto& r : rows) {
    // keep the CSV's own text so the values are identical
    std::string acc = std::isnan(r.accuracy) ? "nan" : "";
    if (acc.empty()) {
      char buf[64];
      acc.assign(buf, std::to_chars(buf, buf + sizeof buf, r.accuracy).ptr);
    }
    csv << r.variant_id << "," << acc << "\n";
    bars.push_back({{"variant_id", r.variant_id},
                    {"accuracy", std::isnan(r.accuracy) ? json(nullptr) : json(r.accuracy)},
                    {"n", r.n},
                    {"threshold", std::isnan(r.threshold) ? json(nullptr) : json(r.threshold)}});
  }
  const fs::path dir = ensure_dir(a.out);
  write_file_atomic((dir / "bars.csv").string(), csv.str());
  write_file_atomic((dir / "bars.json").string(), json{{"header", header}, {"bars", bars}}.dump(2) + "\n");
  out << rows.size() << " bars -> " << (dir / "bars.csv").string() << "\n";
  return kExitOk;
}

// ---- serve-classifier -------------------------------------------------------

struct ServeClassifierArgs {
  std::string builtin = "endpoint";
  std::string listen;
  int class_count = 1;
};

int cmd_serve_classifier(const ServeClassifierArgs& a, std::ostream& out) {
  std::unique_ptr<Classifier> c;
  if (a.builtin == "endpoint") c = std::make_unique<EndpointDetector>();
  else if (a.builtin == "constant") c = std::make_unique<ConstantClassifier>(a.class_count);
  else throw UsageError("--builtin must be endpoint or constant");
  if (a.listen.empty()) {
    out.flush();
    serve_protocol(*c, STDIN_FILENO, STDOUT_FILENO);
    return kExitOk;
  }
  static std::atomic<bool> stop{false};
  std::signal(SIGINT, [](int) { stop = true; });
  std::signal(SIGTERM, [](int) { stop = true; });
  serve_socket(*c, a.listen, stop, [&](int port) {
    out << "serving " << c->info().name << " on " << a.listen;
    if (port) out << " (port " << port << ")";
    out << "\n" << std::flush;
  });
  return kExitOk;
}

// ---- catalog ----------------------------------------------------------------

struct CatalogArgs {
  std::string out;
  std::string catalog;
};

int cmd_catalog(const CatalogArgs& a, std::ostream& out) {
  const auto catalog = load_catalog(a.catalog);
  std::ostringstream ini;
  write_catalog(ini, catalog);
  if (a.out.empty()) {
    out << ini.str();
  } else {
    const fs::path dir = ensure_dir(a.out);
    write_file_atomic((dir / "variants.ini").string(), ini.str());
    out << catalog.size() << " variants -> " << (dir / "variants.ini").string() << "\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"contourlab: contour-closure stimuli, classifier evaluation, MIRC search and 2-IFC experiments"};
  app.set_version_flag("--version", std::string(kVersion));
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Render a stimulus dataset and its manifest");
  g->add_option("--variant", gen.variant, "Variant id (iid, v1..v15) or 'all'");
  g->add_option("--seed", gen.seed, "Master seed");
  g->add_option("--out", gen.out, "Output directory")->required();
  g->add_option("--splits", gen.splits, "Images per split, e.g. train=100,test=40");
  g->add_option("--jobs", gen.jobs, "Worker threads")->check(CLI::PositiveNumber);
  g->add_option("--catalog", gen.catalog, "Variant catalog INI (built-in catalog if empty)");
  g->add_option("--backgrounds", gen.backgrounds, "Directory of PNG backgrounds to blend in");
  g->add_option("--contrast", gen.contrast, "Background contrast in [0, 1]")->check(CLI::Range(0.0, 1.0));
  g->add_option("--margin", gen.margin, "White border in pixels")->check(CLI::NonNegativeNumber);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Per-variant accuracy of a classifier (CSV)");
  e->add_option("--classifier", ev.classifier, "builtin:endpoint|builtin:constant|exec:<cmd>|tcp:<host>:<port>|unix:<path>");
  e->add_option("--manifest", ev.manifests, "Manifest path (repeatable)")->required();
  e->add_option("--out", ev.out, "Output directory for eval.csv")->required();
  e->add_option("--split", ev.split, "Split to evaluate");
  e->add_option("--closed-classes", ev.closed_classes, "Multi-class classifiers: class ids meaning 'closed'");
  e->add_option("--jobs", ev.jobs, "Worker threads")->check(CLI::PositiveNumber);
  e->add_option("--timeout", ev.timeout, "Per-request timeout in seconds");

  HeatmapArgs hm;
  auto* h = app.add_subcommand("heatmap", "Patch-logit heatmap and most extreme patches of one image");
  h->add_option("--classifier", hm.classifier, "Classifier spec with patch-logit support");
  h->add_option("--image", hm.image, "Input PNG")->required();
  h->add_option("--out", hm.out, "Output directory")->required();
  h->add_option("--k", hm.k, "Number of extreme patches")->check(CLI::PositiveNumber);
  h->add_option("--sign", hm.sign, "absolute, positive or negative");
  h->add_option("--alpha", hm.alpha, "Overlay opacity")->check(CLI::Range(0.0, 1.0));
  h->add_option("--timeout", hm.timeout, "Per-request timeout in seconds");

  MircArgs mi;
  auto* m = app.add_subcommand("search-mirc", "Greedy MIRC search and recognition gaps");
  m->add_option("--classifier", mi.classifier, "Classifier spec")->required();
  m->add_option("--images", mi.images, "Directory of PNGs named after class-map stimuli, or a manifest")->required();
  m->add_option("--classes", mi.classes, "Class map JSON");
  m->add_option("--class-set", mi.class_set, "Comma-separated class ids used for every image instead of the map");
  m->add_option("--descendants", mi.descendants, "ullman4 or stride1");
  m->add_option("--class-rule", mi.class_rule, "joint or separate");
  m->add_option("--out", mi.out, "Report path (*.json) or directory")->required();
  m->add_option("--threshold", mi.threshold, "Recognition threshold");
  m->add_option("--max-depth", mi.max_depth, "Depth guard")->check(CLI::PositiveNumber);
  m->add_flag("--no-preprocess", mi.no_preprocess, "Skip resize-256 / center-crop-224");
  m->add_option("--jobs", mi.jobs, "Parallel searches")->check(CLI::PositiveNumber);
  m->add_option("--timeout", mi.timeout, "Per-request timeout in seconds");

  ThresholdArgs th;
  auto* t = app.add_subcommand("threshold", "Optimize a decision threshold from 'logit,label' rows");
  t->add_option("--logits", th.input, "CSV of logit,label rows")->required();
  t->add_option("--out", th.out, "Output directory")->required();

  ServeArgs sv;
  auto* s = app.add_subcommand("serve", "Run the 2-IFC experiment server");
  s->add_option("--config", sv.config, "Key = value config file");
  s->add_option("--manifest", sv.manifest, "Stimulus manifest");
  s->add_option("--host", sv.host, "Bind address");
  s->add_option("--port", sv.port, "Port (0 picks a free one)");
  s->add_option("--out", sv.out, "Directory for session logs");
  s->add_option("--seed", sv.seed, "Seed for trial shuffles");
  s->add_option("--practice-trials", sv.session.practice_trials, "Practice trials on first exposure to a line color");
  s->add_option("--blocks", sv.session.blocks, "Main blocks");
  s->add_option("--trials-per-block", sv.session.trials_per_block, "Trials per main block");
  s->add_option("--stim-ms", sv.session.timing.stim_ms, "Stimulus duration");
  s->add_option("--isi-ms", sv.session.timing.isi_ms, "Inter-stimulus interval");
  s->add_option("--response-window-ms", sv.session.timing.response_window_ms, "Response window");
  s->add_option("--iti-ms", sv.session.timing.iti_ms, "Inter-trial interval");
  s->add_option("--frame-tolerance", sv.session.frame_tolerance, "Timing audit tolerance in frames");

  ReportArgs rp;
  auto* r = app.add_subcommand("report", "Bar-chart data from an eval CSV");
  r->add_option("--eval", rp.eval, "eval.csv")->required();
  r->add_option("--out", rp.out, "Output directory")->required();

  ServeClassifierArgs sc;
  auto* c = app.add_subcommand("serve-classifier", "Serve a built-in classifier over the wire protocol");
  c->add_option("--builtin", sc.builtin, "endpoint or constant");
  c->add_option("--listen", sc.listen, "tcp:<host>:<port> or unix:<path>; stdin/stdout if empty");
  c->add_option("--class-count", sc.class_count, "Classes of the constant classifier")->check(CLI::PositiveNumber);

  CatalogArgs ca;
  auto* k = app.add_subcommand("catalog", "Write the variant catalog as INI");
  k->add_option("--out", ca.out, "Output directory (stdout if empty)");
  k->add_option("--catalog", ca.catalog, "Catalog INI to normalize instead of the built-in one");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& pe) {
    err << "error: " << pe.what() << "\n";
    for (const auto* sub : app.get_subcommands())
      if (sub->parsed()) {
        err << "run 'contourlab " << sub->get_name() << " --help' for usage\n";
        return kExitUsage;
      }
    err << "run 'contourlab --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (g->parsed()) return cmd_generate(gen, out);
    if (e->parsed()) return cmd_eval(ev, out);
    if (h->parsed()) return cmd_heatmap(hm, out);
    if (m->parsed()) return cmd_search_mirc(mi, out);
    if (t->parsed()) return cmd_threshold(th, out);
    if (s->parsed()) return cmd_serve(sv, *s, out);
    if (r->parsed()) return cmd_report(rp, out);
    if (c->parsed()) return cmd_serve_classifier(sc, out);
    if (k->parsed()) return cmd_catalog(ca, out);
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return exit_code_for(ex);
  }
  return kExitUsage;
}

}  // namespace contourlab
