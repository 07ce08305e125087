#include "contourlab/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "contourlab/error.hpp"
#include "contourlab/parallel.hpp"
#include "contourlab/png_io.hpp"
#include "contourlab/raster.hpp"

namespace contourlab {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw UsageError("unknown split '" + std::string(s) + "'");
}

std::string_view to_string(Member m) { return m == Member::Open ? "open" : "closed"; }

Member parse_member(std::string_view s) {
  if (s == "open") return Member::Open;
  if (s == "closed") return Member::Closed;
  throw ManifestError("unknown member '" + std::string(s) + "'");
}

std::vector<SplitRequest> default_splits() {
  return {{Split::Train, 14'000}, {Split::Val, 5'600}, {Split::Test, 5'600}};
}

std::vector<SplitRequest> parse_splits(std::string_view text) {
  const auto defaults = default_splits();
  std::vector<SplitRequest> out;
  std::istringstream in{std::string(text)};
  for (std::string item; std::getline(in, item, ',');) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    const Split split = parse_split(item.substr(0, eq));
    std::size_t images = 0;
    if (eq == std::string::npos) {
      for (const auto& d : defaults)
        if (d.split == split) images = d.images;
    } else {
      try {
        images = std::stoull(item.substr(eq + 1));
      } catch (const std::exception&) {
        throw UsageError("bad split size in '" + item + "'");
      }
    }
    for (const auto& r : out)
      if (r.split == split) throw UsageError("split '" + std::string(to_string(split)) + "' given twice");
    if (split != Split::Train && images % 2 != 0)
      throw UsageError("val/test image counts must be even (both pair members are used)");
    out.push_back({split, images});
  }
  if (out.empty()) throw UsageError("no splits requested");
  return out;
}

std::uint64_t split_index_base(Split s) {
  switch (s) {
    case Split::Train: return 0;
    case Split::Val: return kMaxSplitPairs;
    case Split::Test: return 2 * kMaxSplitPairs;
  }
  return 0;
}

std::string Manifest::image_file(const ManifestEntry& e) const {
  return (fs::path(base_dir) / e.image_path).string();
}

json to_json(const ManifestEntry& e) {
  return json{{"schema_version", kManifestSchemaVersion},
              {"image_path", e.image_path},
              {"pair_id", e.pair_id},
              {"member", std::string(to_string(e.member))},
              {"label", e.label},
              {"variant_id", e.variant_id},
              {"seed", e.seed},
              {"split", std::string(to_string(e.split))}};
}

ManifestEntry entry_from_json(const json& j) {
  try {
    if (j.at("schema_version").get<int>() != kManifestSchemaVersion)
      throw ManifestError("unsupported manifest schema_version");
    ManifestEntry e;
    e.image_path = j.at("image_path").get<std::string>();
    e.pair_id = j.at("pair_id").get<std::uint64_t>();
    e.member = parse_member(j.at("member").get<std::string>());
    e.label = j.at("label").get<int>();
    e.variant_id = j.at("variant_id").get<std::string>();
    e.seed = j.at("seed").get<std::uint64_t>();
    try {
      e.split = parse_split(j.at("split").get<std::string>());
    } catch (const UsageError& u) {
      throw ManifestError(u.what());
    }
    return e;
  } catch (const json::exception& ex) {
    throw ManifestError(std::string("manifest entry: ") + ex.what());
  }
}

namespace {

json header_json(const ManifestHeader& h) {
  json splits = json::object();
  for (const auto& s : h.splits) splits[std::string(to_string(s.split))] = s.images;
  return json{{"schema_version", kManifestSchemaVersion},
              {"header",
               {{"tool", h.tool},
                {"version", h.version},
                {"master_seed", h.master_seed},
                {"variant_id", h.variant_id},
                {"config_hash", h.config_hash},
                {"splits", splits}}}};
}

ManifestHeader header_from_json(const json& j) {
  try {
    if (j.at("schema_version").get<int>() != kManifestSchemaVersion)
      throw ManifestError("unsupported manifest schema_version");
    const json& h = j.at("header");
    ManifestHeader out;
    out.tool = h.at("tool").get<std::string>();
    out.version = h.at("version").get<std::string>();
    out.master_seed = h.at("master_seed").get<std::uint64_t>();
    out.variant_id = h.at("variant_id").get<std::string>();
    out.config_hash = h.at("config_hash").get<std::string>();
    for (const auto& [name, images] : h.at("splits").items())
      out.splits.push_back({parse_split(name), images.get<std::size_t>()});
    return out;
  } catch (const json::exception& ex) {
    throw ManifestError(std::string("manifest header: ") + ex.what());
  } catch (const UsageError& ex) {
    throw ManifestError(std::string("manifest header: ") + ex.what());
  }
}

std::string image_name(Split split, std::uint64_t pair_id, Member m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%08llu_%s.png", static_cast<unsigned long long>(pair_id),
                m == Member::Open ? "open" : "closed");
  return std::string(to_string(split)) + "/" + buf;
}

}  // namespace

std::string serialize_manifest(const ManifestHeader& header, const std::vector<ManifestEntry>& entries) {
  std::string out = header_json(header).dump() + "\n";
  for (const auto& e : entries) out += to_json(e).dump() + "\n";
  return out;
}

void write_manifest(const std::string& path, const ManifestHeader& header,
                    const std::vector<ManifestEntry>& entries) {
  write_file_atomic(path, serialize_manifest(header, entries));
}

void validate_entries(const std::vector<ManifestEntry>& entries) {
  std::map<std::pair<Split, std::uint64_t>, std::vector<Member>> members;
  std::map<std::uint64_t, Split> split_of;
  for (const auto& e : entries) {
    if (e.label != label_of(e.member))
      throw ManifestError("pair " + std::to_string(e.pair_id) + ": label does not match member");
    auto [it, inserted] = split_of.emplace(e.pair_id, e.split);
    if (!inserted && it->second != e.split)
      throw ManifestError("pair " + std::to_string(e.pair_id) + " appears in more than one split");
    members[{e.split, e.pair_id}].push_back(e.member);
  }
  for (const auto& [key, list] : members) {
    const auto& [split, pair] = key;
    const std::string where = "pair " + std::to_string(pair) + " in " + std::string(to_string(split));
    if (split == Split::Train) {
      if (list.size() != 1) throw ManifestError(where + ": train uses exactly one member per pair");
    } else {
      if (list.size() != 2 || list[0] == list[1])
        throw ManifestError(where + ": val/test need exactly one open and one closed member, found " +
                            std::to_string(list.size()) + " entries");
    }
  }
}

Manifest read_manifest(const std::string& path, bool check_images) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path);
  Manifest m;
  m.base_dir = fs::path(path).parent_path().string();
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& ex) {
      throw ManifestError(path + ":" + std::to_string(line_no) + ": " + ex.what());
    }
    if (!have_header) {
      m.header = header_from_json(j);
      have_header = true;
      continue;
    }
    m.entries.push_back(entry_from_json(j));
  }
  if (!have_header) throw ManifestError("empty manifest: " + path);
  if (m.entries.empty()) throw ManifestError("manifest has a header but no entries: " + path);
  validate_entries(m.entries);
  if (check_images) {
    for (const auto& e : m.entries)
      if (!fs::exists(m.image_file(e))) throw ManifestError("dangling image path: " + e.image_path);
  }
  return m;
}

BuildResult build_dataset(const BuildOptions& options) {
  const VariantConfig& cfg = options.variant;
  struct Task {
    Split split;
    std::uint64_t pair_id;
    bool both;
  };
  std::vector<Task> tasks;
  for (const auto& req : options.splits) {
    const bool both = req.split != Split::Train;
    const std::size_t pairs = both ? req.images / 2 : req.images;
    if (pairs > kMaxSplitPairs) throw UsageError("split too large");
    for (std::size_t i = 0; i < pairs; ++i) tasks.push_back({req.split, split_index_base(req.split) + i, both});
  }

  const fs::path variant_dir = fs::path(options.out_dir) / cfg.id;
  fs::create_directories(variant_dir);
  for (const auto& req : options.splits) fs::create_directories(variant_dir / std::string(to_string(req.split)));

  std::vector<std::vector<ManifestEntry>> per_task(tasks.size());
  parallel_for(tasks.size(), options.jobs, [&](std::size_t t) {
    const Task& task = tasks[t];
    const StimulusPair pair = generate_pair(options.master_seed, cfg, task.pair_id);
    RenderConfig rc;
    rc.margin = options.margin;
    if (!options.backgrounds.empty()) {
      const std::uint64_t pick =
          derive_seed(options.master_seed, cfg.id + "/background", task.pair_id) % options.backgrounds.size();
      rc.background = resize_bilinear(read_png(options.backgrounds[pick]), rc.final_size, rc.final_size);
      rc.contrast = options.contrast;
    }
    std::vector<Member> members;
    if (task.both) {
      members = {Member::Open, Member::Closed};
    } else {
      Rng coin(derive_seed(options.master_seed, cfg.id + "/train-member", task.pair_id));
      members = {coin.coin() ? Member::Open : Member::Closed};
    }
    for (Member m : members) {
      const StimulusGeometry& g = m == Member::Open ? pair.open : pair.closed;
      ManifestEntry e;
      e.image_path = image_name(task.split, task.pair_id, m);
      e.pair_id = task.pair_id;
      e.member = m;
      e.label = label_of(m);
      e.variant_id = cfg.id;
      e.seed = g.seed;
      e.split = task.split;
      write_png((variant_dir / e.image_path).string(), render(g, cfg, rc));
      per_task[t].push_back(std::move(e));
    }
  });

  BuildResult result;
  for (auto& list : per_task)
    for (auto& e : list) result.entries.push_back(std::move(e));
  validate_entries(result.entries);
  result.header.version = kVersion;
  result.header.master_seed = options.master_seed;
  result.header.variant_id = cfg.id;
  result.header.config_hash = config_hash(cfg);
  result.header.splits = options.splits;
  result.manifest_path = (variant_dir / "manifest.jsonl").string();
  write_manifest(result.manifest_path, result.header, result.entries);
  return result;
}

}  // namespace contourlab
