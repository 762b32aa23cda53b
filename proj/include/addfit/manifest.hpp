#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace addfit {

// Record of one CLI run. Output files reference hash() so results can be
// traced back to the exact invocation; the timestamp is excluded from the
// hash so reruns with the same seed produce byte-identical data files.
struct RunManifest {
  std::string command;
  std::string tool_version;
  nlohmann::ordered_json parameters;
  std::vector<std::string> outputs;
  bool degraded = false;
  std::string timestamp;

  std::string hash() const;
  nlohmann::ordered_json to_json() const;
  void write(const std::string& path) const;
};

}  // namespace addfit
