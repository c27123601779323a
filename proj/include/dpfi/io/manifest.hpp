#pragma once

/**
 * @file
 * @brief Output bundle: collects emitted files in memory, then writes them
 * together with manifest.json (config, versions, timings, SHA-256 per file).
 *
 * Requires libcrypto (OpenSSL) for the digests.
 */

#include <openssl/evp.h>

#include <Eigen/Core>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "json.hpp"

#include "dpfi/error.hpp"
#include "dpfi/version.hpp"

namespace dpfi::io {

inline std::string sha256_hex(const std::string& data)
{
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int k = 0; k < len; ++k) {
    std::snprintf(buf, sizeof buf, "%02x", md[k]);
    hex += buf;
  }
  return hex;
}

class Bundle
{
 public:
  void add(const std::string& name, std::string content) { files_[name] = std::move(content); }
  void add_json(const std::string& name, const nlohmann::json& j) { add(name, j.dump(2) + "\n"); }
  void timing(const std::string& phase, double seconds) { timings_[phase] = seconds; }

  const std::map<std::string, std::string>& files() const { return files_; }

  nlohmann::json manifest(const nlohmann::json& config) const
  {
    nlohmann::json files = nlohmann::json::array();
    for (const auto& [name, content] : files_) {
      files.push_back({{"path", name}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
    }
    return {{"config", config},
            {"versions",
             {{"dpfi", version},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"compiler", compiler_id()}}},
            {"timings_seconds", timings_},
            {"files", files}};
  }

  /// Writes every file and then manifest.json into dir (created if needed).
  void write(const std::filesystem::path& dir, const nlohmann::json& config) const
  {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) { throw Error("cannot create output directory " + dir.string() + ": " + ec.message()); }
    auto put = [&](const std::string& name, const std::string& content) {
      std::ofstream out(dir / name, std::ios::binary);
      out << content;
      if (!out) { throw Error("cannot write " + (dir / name).string()); }
    };
    for (const auto& [name, content] : files_) { put(name, content); }
    put("manifest.json", manifest(config).dump(2) + "\n");
  }

 private:
  std::map<std::string, std::string> files_;
  std::map<std::string, double> timings_;
};

}  // namespace dpfi::io
