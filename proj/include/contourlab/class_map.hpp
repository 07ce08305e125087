#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace contourlab {

struct MappedClass {
  std::string wnid;
  std::string name;
  int index = 0;
};

struct ClassMapEntry {
  std::string name;
  std::vector<MappedClass> classes;

  std::vector<int> indices() const;
};

/// Stimulus name -> ImageNet classes that count as a correct recognition.
struct ClassMap {
  int class_count = 1000;
  std::vector<ClassMapEntry> stimuli;

  /// nullptr when absent.
  const ClassMapEntry* find(const std::string& name) const;
};

ClassMap parse_class_map(const nlohmann::json& j);
ClassMap load_class_map(const std::string& path);

}  // namespace contourlab
