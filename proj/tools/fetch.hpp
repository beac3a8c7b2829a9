#ifndef SHUFGDA_TOOLS_FETCH_HPP
#define SHUFGDA_TOOLS_FETCH_HPP

// a9a download for `shufgda fetch-data`. This is the only code that touches
// the network; the library never includes it.

// Eigen must precede httplib: the resolver header it pulls in defines a
// `_res` macro that clashes with Eigen parameter names.
#include "shufgda/data.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace tools {

inline constexpr const char* kA9aUrl =
    "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/a9a";
inline constexpr long kA9aRows = 32561;
inline constexpr long kA9aDim = 123;

struct FetchOptions {
  std::string path = "data/a9a";
  std::string url = kA9aUrl;
  std::string sha256;  // optional expected digest, hex
};

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("SHA-256 computation failed");
  }
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char buf[3];
  for (unsigned int k = 0; k < len; ++k) {
    std::snprintf(buf, sizeof buf, "%02x", digest[k]);
    hex += buf;
  }
  return hex;
}

/// Splits "https://host[:port]/path" into ("https://host[:port]", "/path").
inline std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw std::invalid_argument("URL needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

inline std::string lower(std::string s) {
  for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

/// Downloads, verifies the digest (when given) and the (n, d) shape, then
/// moves the file into place. Returns a process exit code.
inline int fetch_a9a(const FetchOptions& opt) {
  const auto [host, path] = split_url(opt.url);
  httplib::Client client(host);
  client.set_follow_location(true);
  client.set_connection_timeout(20);
  client.set_read_timeout(120);
  std::cout << "downloading " << opt.url << '\n';
  const auto res = client.Get(path);
  if (!res) {
    std::cerr << "error: download failed: " << httplib::to_string(res.error()) << '\n';
    return 1;
  }
  if (res->status != 200) {
    std::cerr << "error: HTTP status " << res->status << '\n';
    return 1;
  }
  const std::string digest = sha256_hex(res->body);
  std::cout << "sha256 " << digest << " (" << res->body.size() << " bytes)\n";
  if (!opt.sha256.empty() && lower(opt.sha256) != digest) {
    std::cerr << "error: checksum mismatch, expected " << opt.sha256 << '\n';
    return 1;
  }

  std::istringstream in(res->body);
  const auto ds = shufgda::parse_libsvm(in, kA9aDim, opt.url);
  if (ds.n() != kA9aRows || ds.d() != kA9aDim) {
    std::cerr << "error: expected " << kA9aRows << " x " << kA9aDim << ", got " << ds.n() << " x "
              << ds.d() << '\n';
    return 1;
  }

  const std::filesystem::path dest(opt.path);
  if (dest.has_parent_path()) std::filesystem::create_directories(dest.parent_path());
  const std::filesystem::path tmp = dest.string() + ".part";
  {
    std::ofstream out(tmp, std::ios::binary);
    out.write(res->body.data(), static_cast<std::streamsize>(res->body.size()));
    if (!out) {
      std::cerr << "error: cannot write " << tmp << '\n';
      return 1;
    }
  }
  std::filesystem::rename(tmp, dest);
  std::cout << "wrote " << dest.string() << " (" << ds.n() << " samples, " << ds.d()
            << " features)\n";
  return 0;
}

}  // namespace tools

#endif  // SHUFGDA_TOOLS_FETCH_HPP
