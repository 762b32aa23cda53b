#include "addfit/manifest.hpp"

#include <cstdio>
#include <fstream>

#include "addfit/errors.hpp"

namespace addfit {

namespace {

// FNV-1a 64-bit; identification, not security.
std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::string RunManifest::hash() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["tool_version"] = tool_version;
  j["parameters"] = parameters;
  j["outputs"] = outputs;
  j["degraded"] = degraded;
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["tool_version"] = tool_version;
  j["parameters"] = parameters;
  j["outputs"] = outputs;
  j["degraded"] = degraded;
  j["hash"] = hash();
  j["timestamp"] = timestamp;  // excluded from the hash
  return j;
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write manifest " + path);
  out << to_json().dump(2) << "\n";
}

}  // namespace addfit
