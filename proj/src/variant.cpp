#include "contourlab/variant.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

#include "contourlab/digest.hpp"
#include "contourlab/error.hpp"

namespace contourlab {

namespace {

std::vector<VariantConfig> build_catalog() {
  std::vector<VariantConfig> catalog;
  const VariantConfig iid;
  catalog.push_back(iid);

  auto variant = [&](int number, std::string description) {
    VariantConfig v = iid;
    v.id = "v" + std::to_string(number);
    v.number = number;
    v.description = std::move(description);
    return v;
  };
  auto curvy = [&](int number, std::string description, Range diameter) {
    VariantConfig v = variant(number, std::move(description));
    v.main_shape = MainShape::Curvy;
    v.placement = Placement::Center;
    v.curvy_diameter = diameter;
    v.flanker_kind = FlankerKind::None;
    v.flanker_count = {0, 0};
    return v;
  };
  const std::vector<PointPx> quadrant_centers{{64, 64}, {192, 64}, {64, 192}, {192, 192}};

  catalog.push_back(curvy(1, "curvy contour, diameter 100 px", {100, 100}));
  {
    VariantConfig v = curvy(2, "curvy contour with one dashed closed curvy flanker", {50, 50});
    v.placement = Placement::Anchors;
    v.anchors = quadrant_centers;
    v.anchor_max_radius = 59.0;
    v.flanker_kind = FlankerKind::DashedClosedCurvy;
    v.flanker_count = {1, 1};
    catalog.push_back(v);
  }
  catalog.push_back(curvy(3, "curvy contour, diameter 50 px", {50, 50}));
  {
    VariantConfig v = variant(4, "no flankers");
    v.flanker_kind = FlankerKind::None;
    v.flanker_count = {0, 0};
    catalog.push_back(v);
  }
  {
    VariantConfig v = variant(5, "more edges in the main contour");
    v.polygon_edges = {10, 13};
    catalog.push_back(v);
  }
  {
    VariantConfig v = variant(6, "asymmetric two-segment flankers");
    v.asymmetric_flankers = true;
    catalog.push_back(v);
  }
  {
    VariantConfig v = curvy(7, "curvy contour with one to four open curvy flankers", {50, 50});
    v.placement = Placement::Anchors;
    v.anchors = quadrant_centers;
    v.anchors.push_back({128, 128});
    v.anchor_max_radius = 40.0;
    v.flanker_kind = FlankerKind::OpenCurvy;
    v.flanker_count = {1, 4};
    catalog.push_back(v);
  }
  catalog.push_back(curvy(8, "curvy contour, diameter 150 px", {150, 150}));
  {
    VariantConfig v = variant(9, "binarized lines");
    v.binarize = true;
    catalog.push_back(v);
  }
  {
    VariantConfig v = variant(10, "thin lines (1.25 px)");
    v.line_width = 1.25;
    catalog.push_back(v);
  }
  {
    VariantConfig v = variant(11, "white lines");
    v.line_color = LineColor::White;
    catalog.push_back(v);
  }
  {
    VariantConfig v = variant(12, "black-white-black lines (3 x 1.5 px)");
    v.line_color = LineColor::BlackWhiteBlack;
    v.line_width = 4.5;
    catalog.push_back(v);
  }
  {
    VariantConfig v = variant(13, "thick lines (5 px)");
    v.line_width = 5.0;
    catalog.push_back(v);
  }
  {
    VariantConfig v = variant(14, "thicker lines (7.5 px)");
    v.line_width = 7.5;
    catalog.push_back(v);
  }
  {
    VariantConfig v = curvy(15, "dashed curvy contour", {50, 100});
    v.dashed_main = true;
    catalog.push_back(v);
  }
  return catalog;
}

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& key) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ConstraintError("catalog: bad number for '" + key + "': " + s);
  return v;
}

int parse_int(const std::string& s, const std::string& key) {
  int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ConstraintError("catalog: bad integer for '" + key + "': " + s);
  return v;
}

std::pair<std::string, std::string> split_pair(const std::string& s, const std::string& key) {
  auto comma = s.find(',');
  if (comma == std::string::npos) throw ConstraintError("catalog: expected 'lo,hi' for '" + key + "'");
  return {s.substr(0, comma), s.substr(comma + 1)};
}

template <typename E>
E parse_enum(const std::string& s, std::initializer_list<E> values, const std::string& key) {
  for (E v : values)
    if (to_string(v) == s) return v;
  throw ConstraintError("catalog: unknown value for '" + key + "': " + s);
}

boost::property_tree::ptree to_section(const VariantConfig& v) {
  boost::property_tree::ptree t;
  auto put = [&](const std::string& k, const std::string& value) { t.put(k, value); };
  auto range = [&](const std::string& k, Range r) { put(k, fmt_double(r.lo) + "," + fmt_double(r.hi)); };
  auto irange = [&](const std::string& k, IntRange r) {
    put(k, std::to_string(r.lo) + "," + std::to_string(r.hi));
  };
  put("number", std::to_string(v.number));
  put("description", v.description);
  put("main_shape", std::string(to_string(v.main_shape)));
  put("placement", std::string(to_string(v.placement)));
  std::string anchors;
  for (std::size_t i = 0; i < v.anchors.size(); ++i) {
    if (i) anchors += ";";
    anchors += fmt_double(v.anchors[i].x) + "," + fmt_double(v.anchors[i].y);
  }
  put("anchors", anchors);
  put("anchor_max_radius", fmt_double(v.anchor_max_radius));
  irange("polygon_edges", v.polygon_edges);
  range("polygon_radius", v.polygon_radius);
  range("gap_distance", v.gap_distance);
  put("min_corner_edge_distance", fmt_double(v.min_corner_edge_distance));
  range("curvy_diameter", v.curvy_diameter);
  range("curvy_amplitude", v.curvy_amplitude);
  irange("curvy_frequency", v.curvy_frequency);
  put("curvy_open_angle", fmt_double(v.curvy_open_angle));
  put("curvy_samples", std::to_string(v.curvy_samples));
  put("curvy_min_radius", fmt_double(v.curvy_min_radius));
  put("dashed_main", v.dashed_main ? "true" : "false");
  put("dash_count", std::to_string(v.dash_count));
  put("dash_angle", fmt_double(v.dash_angle));
  put("flanker_kind", std::string(to_string(v.flanker_kind)));
  irange("flanker_count", v.flanker_count);
  range("segment_length", v.segment_length);
  put("asymmetric_flankers", v.asymmetric_flankers ? "true" : "false");
  range("short_segment_length", v.short_segment_length);
  put("two_segment_probability", fmt_double(v.two_segment_probability));
  put("min_flanker_angle_deg", fmt_double(v.min_flanker_angle_deg));
  put("min_flanker_center_distance", fmt_double(v.min_flanker_center_distance));
  put("min_flanker_contour_distance", fmt_double(v.min_flanker_contour_distance));
  range("curvy_flanker_diameter", v.curvy_flanker_diameter);
  put("line_width", fmt_double(v.line_width));
  put("line_color", std::string(to_string(v.line_color)));
  put("binarize", v.binarize ? "true" : "false");
  put("binarize_threshold", std::to_string(v.binarize_threshold));
  put("frame_size", std::to_string(v.frame_size));
  put("main_retry_budget", std::to_string(v.main_retry_budget));
  put("flanker_retry_budget", std::to_string(v.flanker_retry_budget));
  return t;
}

VariantConfig from_section(const std::string& id, const boost::property_tree::ptree& t) {
  VariantConfig v;
  v.id = id;
  auto get = [&](const std::string& k) {
    auto child = t.get_optional<std::string>(k);
    if (!child) throw ConstraintError("catalog: section [" + id + "] missing key '" + k + "'");
    return *child;
  };
  auto dbl = [&](const std::string& k) { return parse_double(get(k), k); };
  auto integer = [&](const std::string& k) { return parse_int(get(k), k); };
  auto boolean = [&](const std::string& k) {
    auto s = get(k);
    if (s == "true") return true;
    if (s == "false") return false;
    throw ConstraintError("catalog: bad boolean for '" + k + "': " + s);
  };
  auto range = [&](const std::string& k) {
    auto [lo, hi] = split_pair(get(k), k);
    return Range{parse_double(lo, k), parse_double(hi, k)};
  };
  auto irange = [&](const std::string& k) {
    auto [lo, hi] = split_pair(get(k), k);
    return IntRange{parse_int(lo, k), parse_int(hi, k)};
  };

  v.number = integer("number");
  v.description = get("description");
  v.main_shape = parse_enum(get("main_shape"), {MainShape::Polygon, MainShape::Curvy}, "main_shape");
  v.placement = parse_enum(get("placement"),
                           {Placement::RandomTranslate, Placement::Center, Placement::Anchors},
                           "placement");
  std::string anchors = get("anchors");
  std::istringstream as(anchors);
  for (std::string item; std::getline(as, item, ';');) {
    if (item.empty()) continue;
    auto [x, y] = split_pair(item, "anchors");
    v.anchors.push_back({parse_double(x, "anchors"), parse_double(y, "anchors")});
  }
  v.anchor_max_radius = dbl("anchor_max_radius");
  v.polygon_edges = irange("polygon_edges");
  v.polygon_radius = range("polygon_radius");
  v.gap_distance = range("gap_distance");
  v.min_corner_edge_distance = dbl("min_corner_edge_distance");
  v.curvy_diameter = range("curvy_diameter");
  v.curvy_amplitude = range("curvy_amplitude");
  v.curvy_frequency = irange("curvy_frequency");
  v.curvy_open_angle = dbl("curvy_open_angle");
  v.curvy_samples = integer("curvy_samples");
  v.curvy_min_radius = dbl("curvy_min_radius");
  v.dashed_main = boolean("dashed_main");
  v.dash_count = integer("dash_count");
  v.dash_angle = dbl("dash_angle");
  v.flanker_kind = parse_enum(get("flanker_kind"),
                              {FlankerKind::None, FlankerKind::Lines, FlankerKind::DashedClosedCurvy,
                               FlankerKind::OpenCurvy},
                              "flanker_kind");
  v.flanker_count = irange("flanker_count");
  v.segment_length = range("segment_length");
  v.asymmetric_flankers = boolean("asymmetric_flankers");
  v.short_segment_length = range("short_segment_length");
  v.two_segment_probability = dbl("two_segment_probability");
  v.min_flanker_angle_deg = dbl("min_flanker_angle_deg");
  v.min_flanker_center_distance = dbl("min_flanker_center_distance");
  v.min_flanker_contour_distance = dbl("min_flanker_contour_distance");
  v.curvy_flanker_diameter = range("curvy_flanker_diameter");
  v.line_width = dbl("line_width");
  v.line_color = parse_enum(get("line_color"),
                            {LineColor::Black, LineColor::White, LineColor::BlackWhiteBlack},
                            "line_color");
  v.binarize = boolean("binarize");
  v.binarize_threshold = integer("binarize_threshold");
  v.frame_size = integer("frame_size");
  v.main_retry_budget = integer("main_retry_budget");
  v.flanker_retry_budget = integer("flanker_retry_budget");
  if (v.line_width <= 0) throw ConstraintError("catalog: [" + id + "] line_width must be > 0");
  if (v.frame_size <= 0) throw ConstraintError("catalog: [" + id + "] frame_size must be > 0");
  return v;
}

}  // namespace

const std::vector<VariantConfig>& variant_catalog() {
  static const std::vector<VariantConfig> catalog = build_catalog();
  return catalog;
}

const VariantConfig& find_variant(const std::vector<VariantConfig>& catalog, std::string_view id) {
  std::string key(id);
  if (!key.empty() && key.find_first_not_of("0123456789") == std::string::npos)
    key = key == "0" ? "iid" : "v" + std::to_string(std::stoi(key));
  for (const auto& v : catalog)
    if (v.id == key) return v;
  throw UsageError("unknown variant '" + std::string(id) + "'");
}

const VariantConfig& find_variant(std::string_view id) { return find_variant(variant_catalog(), id); }

void write_catalog(std::ostream& out, const std::vector<VariantConfig>& catalog) {
  boost::property_tree::ptree root;
  boost::property_tree::ptree meta;
  meta.put("schema_version", std::to_string(kCatalogSchemaVersion));
  std::string order;
  for (const auto& v : catalog) order += (order.empty() ? "" : ",") + v.id;
  meta.put("variants", order);
  root.add_child("catalog", meta);
  for (const auto& v : catalog) root.add_child(v.id, to_section(v));
  boost::property_tree::write_ini(out, root);
}

std::vector<VariantConfig> read_catalog(std::istream& in) {
  boost::property_tree::ptree root;
  try {
    boost::property_tree::read_ini(in, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConstraintError(std::string("catalog: ") + e.what());
  }
  auto version = root.get_optional<int>("catalog.schema_version");
  if (!version || *version != kCatalogSchemaVersion)
    throw ConstraintError("catalog: unsupported or missing schema_version");
  auto order = root.get_optional<std::string>("catalog.variants");
  if (!order) throw ConstraintError("catalog: missing variant list");
  std::vector<VariantConfig> catalog;
  std::istringstream ids(*order);
  for (std::string id; std::getline(ids, id, ',');) {
    auto section = root.get_child_optional(id);
    if (!section) throw ConstraintError("catalog: missing section [" + id + "]");
    catalog.push_back(from_section(id, *section));
  }
  return catalog;
}

std::vector<VariantConfig> load_catalog_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open catalog file: " + path);
  return read_catalog(in);
}

std::string config_hash(const VariantConfig& v) {
  std::ostringstream out;
  boost::property_tree::ptree root;
  root.add_child(v.id, to_section(v));
  boost::property_tree::write_ini(out, root);
  return sha256_hex(out.str());
}

std::string_view to_string(MainShape s) {
  return s == MainShape::Polygon ? "polygon" : "curvy";
}

std::string_view to_string(Placement p) {
  switch (p) {
    case Placement::RandomTranslate: return "random";
    case Placement::Center: return "center";
    case Placement::Anchors: return "anchors";
  }
  return "?";
}

std::string_view to_string(FlankerKind k) {
  switch (k) {
    case FlankerKind::None: return "none";
    case FlankerKind::Lines: return "lines";
    case FlankerKind::DashedClosedCurvy: return "dashed_closed_curvy";
    case FlankerKind::OpenCurvy: return "open_curvy";
  }
  return "?";
}

std::string_view to_string(LineColor c) {
  switch (c) {
    case LineColor::Black: return "black";
    case LineColor::White: return "white";
    case LineColor::BlackWhiteBlack: return "black_white_black";
  }
  return "?";
}

}  // namespace contourlab
