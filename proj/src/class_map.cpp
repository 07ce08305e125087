#include "contourlab/class_map.hpp"

#include <fstream>

#include "contourlab/error.hpp"

namespace contourlab {

std::vector<int> ClassMapEntry::indices() const {
  std::vector<int> out;
  for (const auto& c : classes) out.push_back(c.index);
  return out;
}

const ClassMapEntry* ClassMap::find(const std::string& name) const {
  for (const auto& s : stimuli)
    if (s.name == name) return &s;
  return nullptr;
}

ClassMap parse_class_map(const nlohmann::json& j) {
  try {
    ClassMap m;
    m.class_count = j.value("class_count", 1000);
    for (const auto& s : j.at("stimuli")) {
      ClassMapEntry e;
      e.name = s.at("name").get<std::string>();
      for (const auto& c : s.at("classes")) {
        MappedClass mc{c.at("wnid").get<std::string>(), c.value("name", std::string()), c.at("index").get<int>()};
        if (mc.index < 0 || mc.index >= m.class_count)
          throw UsageError("class map: index " + std::to_string(mc.index) + " out of range for " + e.name);
        e.classes.push_back(mc);
      }
      if (e.classes.empty()) throw UsageError("class map: stimulus " + e.name + " has no classes");
      if (m.find(e.name)) throw UsageError("class map: duplicate stimulus " + e.name);
      m.stimuli.push_back(std::move(e));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed class map: ") + e.what());
  }
}

ClassMap load_class_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open class map " + path);
  try {
    return parse_class_map(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("class map " + path + ": " + e.what());
  }
}

}  // namespace contourlab
