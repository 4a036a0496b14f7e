#include "evstar/cli.hpp"

#include "evstar/csv.hpp"
#include "evstar/error.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <chrono>
#include <fstream>
#include <memory>

#include "json.hpp"

namespace evstar::cli {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, fmt::format("cannot open '{}' for hashing", path.string()));
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

void write_manifest(const Manifest& m, const std::filesystem::path& path) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["tool"] = "evstar";
  j["version"] = EVSTAR_VERSION;
  j["subcommand"] = m.subcommand;
  j["config"] = m.config_path.string();
  j["config_sha256"] = sha256_file(m.config_path);
  auto digests = [](const std::vector<std::filesystem::path>& files) {
    ordered_json arr = ordered_json::array();
    for (const auto& f : files) arr.push_back({{"path", f.string()}, {"sha256", sha256_file(f)}});
    return arr;
  };
  j["inputs"] = digests(m.inputs);
  j["outputs"] = digests(m.outputs);
  const auto now = std::chrono::system_clock::now();
  const auto us = std::chrono::duration_cast<std::chrono::microseconds>(now.time_since_epoch()).count();
  constexpr std::int64_t kUnixEpochMjd = 40587;
  j["created_utc"] = format_iso8601(UtcInstant(kUnixEpochMjd, static_cast<double>(us) * 1e-6));
  csv::write_atomically(path, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
}

}  // namespace evstar::cli
