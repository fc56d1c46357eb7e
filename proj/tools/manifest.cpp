#include "manifest.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "cayley/error.hpp"

namespace cayley::cli {

std::string git_blob_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot hash " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto content = buf.str();
  const auto header = "blob " + std::to_string(content.size()) + std::string(1, '\0');

  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, content.data(), content.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);

  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

std::string iso_timestamp(std::chrono::system_clock::time_point t) {
  const auto secs = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::filesystem::path RunManifest::write() const {
  if (artifacts.empty()) throw DomainError("manifest needs at least one artifact");
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config"] = config;
  j["seed"] = seed;
  j["started"] = iso_timestamp(started);
  j["finished"] = iso_timestamp(finished);
  auto& arts = j["artifacts"] = nlohmann::json::array();
  for (const auto& a : artifacts) arts.push_back(a.string());
  if (!checkpoint.empty()) {
    j["checkpoint"] = checkpoint.string();
    j["checkpoint_hash"] = git_blob_hash(checkpoint);
  }
  auto path = artifacts.front();
  path += ".manifest.json";
  std::ofstream out(path);
  if (!out) throw ResourceError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  return path;
}

}  // namespace cayley::cli
