#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "contourlab/contour_gen.hpp"
#include "contourlab/variant.hpp"

namespace contourlab {

enum class Split { Train, Val, Test };

std::string_view to_string(Split s);
Split parse_split(std::string_view s);
std::string_view to_string(Member m);
Member parse_member(std::string_view s);

/// Label convention: 0 = open, 1 = closed.
inline int label_of(Member m) { return m == Member::Closed ? 1 : 0; }

struct SplitRequest {
  Split split = Split::Test;
  /// Number of images. Train uses one member per pair; val and test use both,
  /// so their counts must be even.
  std::size_t images = 0;
};

/// 14,000 train, 5,600 val, 5,600 test images.
std::vector<SplitRequest> default_splits();
/// Parses "train,val,test" or "train=100,test=40" (names alone take default sizes).
std::vector<SplitRequest> parse_splits(std::string_view text);

/// Pair ids of a split start at a fixed base, so splits never share pair ids or seeds.
std::uint64_t split_index_base(Split s);
inline constexpr std::uint64_t kMaxSplitPairs = 10'000'000;

inline constexpr int kManifestSchemaVersion = 1;

struct ManifestEntry {
  /// Relative to the manifest's directory.
  std::string image_path;
  std::uint64_t pair_id = 0;
  Member member = Member::Closed;
  int label = 1;
  std::string variant_id;
  std::uint64_t seed = 0;
  Split split = Split::Test;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct ManifestHeader {
  std::string tool = "contourlab";
  std::string version;
  std::uint64_t master_seed = 0;
  std::string variant_id;
  std::string config_hash;
  std::vector<SplitRequest> splits;
};

struct Manifest {
  ManifestHeader header;
  std::vector<ManifestEntry> entries;
  /// Directory the image paths are relative to.
  std::string base_dir;

  std::string image_file(const ManifestEntry& e) const;
};

nlohmann::json to_json(const ManifestEntry& e);
ManifestEntry entry_from_json(const nlohmann::json& j);

/// JSON-lines: one header line, then one entry per line.
std::string serialize_manifest(const ManifestHeader& header, const std::vector<ManifestEntry>& entries);
void write_manifest(const std::string& path, const ManifestHeader& header,
                    const std::vector<ManifestEntry>& entries);

/// Parses and validates a manifest. Throws ManifestError on schema or
/// invariant violations (including an empty file) and on dangling image
/// paths when `check_images` is set.
Manifest read_manifest(const std::string& path, bool check_images = true);

/// Invariant checks shared by read_manifest and the generator.
void validate_entries(const std::vector<ManifestEntry>& entries);

struct BuildOptions {
  std::uint64_t master_seed = 0;
  VariantConfig variant;
  std::vector<SplitRequest> splits = default_splits();
  std::string out_dir;
  int jobs = 1;
  /// Optional background PNGs blended at `contrast`; chosen per pair by seed.
  std::vector<std::string> backgrounds;
  double contrast = 0.0;
  int margin = 0;
};

struct BuildResult {
  std::string manifest_path;
  ManifestHeader header;
  std::vector<ManifestEntry> entries;
};

/// Renders and writes every image of the requested splits and the manifest
/// `<out>/<variant>/manifest.jsonl`. Output is a pure function of the options
/// (independent of `jobs`).
BuildResult build_dataset(const BuildOptions& options);

}  // namespace contourlab
