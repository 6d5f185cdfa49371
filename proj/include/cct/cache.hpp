#pragma once

// Content-addressed response cache: <cache_dir>/<first-2-hex>/<hash>.json
// holding {model_id, prompt, raw_response}. Keys are SHA-256 over
// (model_id NUL prompt). Entries never expire within a run; writes go to a
// temp file and rename into place so concurrent readers always see a
// complete entry. Corrupt entries count as misses.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cct/hash.hpp"

namespace cct {

class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  static std::string key(std::string_view model_id, std::string_view prompt) {
    std::string buf;
    buf.reserve(model_id.size() + prompt.size() + 1);
    buf.append(model_id);
    buf.push_back('\0');
    buf.append(prompt);
    return sha256_hex(buf);
  }

  std::optional<std::string> lookup(std::string_view model_id,
                                    std::string_view prompt) const {
    const std::filesystem::path p = entry_path(key(model_id, prompt));
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      nlohmann::json j = nlohmann::json::parse(ss.str());
      return j.at("raw_response").get<std::string>();
    } catch (const std::exception& e) {
      std::cerr << "warning: corrupt cache entry " << p.string()
                << " treated as miss: " << e.what() << '\n';
      return std::nullopt;
    }
  }

  void store(std::string_view model_id, std::string_view prompt,
             std::string_view raw_response) {
    const std::string k = key(model_id, prompt);
    const std::filesystem::path p = entry_path(k);
    std::filesystem::create_directories(p.parent_path());
    nlohmann::json j{{"model_id", std::string(model_id)},
                     {"prompt", std::string(prompt)},
                     {"raw_response", std::string(raw_response)}};
    const std::filesystem::path tmp =
        p.parent_path() / (k + ".tmp" + std::to_string(tmp_counter_++));
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << j.dump();
      if (!out) throw IoErrorCache("cache write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, p);
  }

  const std::filesystem::path& dir() const { return dir_; }

  struct IoErrorCache : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

 private:
  std::filesystem::path entry_path(const std::string& k) const {
    return dir_ / k.substr(0, 2) / (k + ".json");
  }

  std::filesystem::path dir_;
  mutable std::atomic<std::uint64_t> tmp_counter_{0};
};

}  // namespace cct
