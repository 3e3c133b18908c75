#include "medcot/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <vector>

#include "medcot/errors.hpp"

namespace medcot {

namespace {

std::string to_hex(const unsigned char* data, std::size_t len) {
  static const char* digits = "0123456789abcdef";
  std::string out(len * 2, '0');
  for (std::size_t i = 0; i < len; ++i) {
    out[2 * i] = digits[data[i] >> 4];
    out[2 * i + 1] = digits[data[i] & 0x0f];
  }
  return out;
}

class Sha256Stream {
 public:
  Sha256Stream() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      throw Error(ErrorClass::Storage, "sha256 init failed");
    }
  }
  ~Sha256Stream() { EVP_MD_CTX_free(ctx_); }

  void update(const void* data, std::size_t len) {
    if (EVP_DigestUpdate(ctx_, data, len) != 1) {
      throw Error(ErrorClass::Storage, "sha256 update failed");
    }
  }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int md_len = 0;
    if (EVP_DigestFinal_ex(ctx_, md.data(), &md_len) != 1) {
      throw Error(ErrorClass::Storage, "sha256 final failed");
    }
    return to_hex(md.data(), md_len);
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256Stream h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorClass::Image, "cannot open file for digest: " + path);
  }
  Sha256Stream h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    std::streamsize got = in.gcount();
    if (got > 0) h.update(buf.data(), static_cast<std::size_t>(got));
  }
  if (in.bad()) {
    throw Error(ErrorClass::Image, "read failed while digesting: " + path);
  }
  return h.hex();
}

std::string base64_encode(std::string_view bytes) {
  static const char* table =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                 (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                 static_cast<unsigned char>(bytes[i + 2]);
    out.push_back(table[(v >> 18) & 0x3f]);
    out.push_back(table[(v >> 12) & 0x3f]);
    out.push_back(table[(v >> 6) & 0x3f]);
    out.push_back(table[v & 0x3f]);
  }
  std::size_t rem = bytes.size() - i;
  if (rem == 1) {
    unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
    out.push_back(table[(v >> 18) & 0x3f]);
    out.push_back(table[(v >> 12) & 0x3f]);
    out.append("==");
  } else if (rem == 2) {
    unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                 (static_cast<unsigned char>(bytes[i + 1]) << 8);
    out.push_back(table[(v >> 18) & 0x3f]);
    out.push_back(table[(v >> 12) & 0x3f]);
    out.push_back(table[(v >> 6) & 0x3f]);
    out.push_back('=');
  }
  return out;
}

}  // namespace medcot
