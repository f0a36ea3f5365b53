#pragma once

#include <openssl/evp.h>

#include <chrono>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "isocal/io.hpp"

namespace isocal::cli {

inline constexpr const char* kVersion = "0.1.0";

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 0xF];
  }
  return out;
}

/// What was run, on which inputs and with which settings. The hash covers
/// everything except timings, so reruns with the same inputs hash the same.
class RunManifest {
 public:
  explicit RunManifest(std::string command) : command_(std::move(command)) {}

  void set(const std::string& key, io::ordered_json value) { config_[key] = std::move(value); }

  void add_input(const std::string& role, const std::filesystem::path& path) {
    inputs_[role] = {{"path", path.string()}, {"sha256", sha256_hex(io::read_file(path))}};
  }

  void set_seed(std::uint64_t seed) { seed_ = seed; }

  void start() { t0_ = std::chrono::steady_clock::now(); }
  void lap(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    timings_[name] = std::chrono::duration<double>(now - t0_).count();
  }

  io::ordered_json body() const {
    io::ordered_json j;
    j["tool"] = "isocal";
    j["version"] = kVersion;
    j["command"] = command_;
    j["config"] = config_;
    j["inputs"] = inputs_;
    j["seed"] = seed_;
    return j;
  }

  std::string hash() const { return "sha256:" + sha256_hex(body().dump()); }

  io::ordered_json with_hash() const {
    io::ordered_json j = body();
    j["manifest_hash"] = hash();
    return j;
  }

  io::ordered_json with_timings() const {
    io::ordered_json j = with_hash();
    j["timings_seconds"] = io::ordered_json::object();
    for (const auto& [k, v] : timings_) j["timings_seconds"][k] = v;
    return j;
  }

 private:
  std::string command_;
  io::ordered_json config_ = io::ordered_json::object();
  io::ordered_json inputs_ = io::ordered_json::object();
  std::uint64_t seed_ = 0;
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
  std::map<std::string, double> timings_;
};

}  // namespace isocal::cli
