#include "twistlab/coeff_cache.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "twistlab/errors.hpp"

namespace twistlab::cache {

namespace {

static_assert(std::endian::native == std::endian::little, "cache format assumes a little-endian host");

constexpr std::size_t kMagicLen = 5;
constexpr std::size_t kHashLen = 32;

std::array<unsigned char, kHashLen> sha256(std::span<const unsigned char> bytes) {
  std::array<unsigned char, kHashLen> out{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != kHashLen) {
    throw IntegrityError("sha256: digest failed");
  }
  return out;
}

template <typename T>
void put(std::vector<unsigned char>& buf, const T& v) {
  const auto* p = reinterpret_cast<const unsigned char*>(&v);
  buf.insert(buf.end(), p, p + sizeof(T));
}

std::vector<unsigned char> frame(const char* magic, std::uint64_t N, std::size_t value_size) {
  std::vector<unsigned char> buf;
  buf.reserve(kMagicLen + 8 + N * value_size + kHashLen);
  buf.insert(buf.end(), magic, magic + kMagicLen);
  put(buf, N);
  return buf;
}

void finish_and_write(const std::filesystem::path& path, std::vector<unsigned char>& buf) {
  const auto h = sha256(buf);
  buf.insert(buf.end(), h.begin(), h.end());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DomainError("cache: cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DomainError("cache: write to " + path.string() + " failed");
}

// Reads and authenticates a file; returns N and the value payload.
std::pair<std::uint64_t, std::span<const unsigned char>> open_frame(const std::filesystem::path& path,
                                                                    const char* magic, std::size_t value_size,
                                                                    std::vector<unsigned char>& storage) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cache: cannot open " + path.string());
  storage.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());

  if (storage.size() < kMagicLen) throw CorruptionError("cache: " + path.string() + " is truncated");
  if (std::memcmp(storage.data(), magic, kMagicLen) != 0) {
    throw FormatError("cache: " + path.string() + " does not start with " + magic);
  }
  if (storage.size() < kMagicLen + 8 + kHashLen) throw CorruptionError("cache: " + path.string() + " is truncated");
  std::uint64_t N = 0;
  std::memcpy(&N, storage.data() + kMagicLen, 8);
  const std::size_t expect = kMagicLen + 8 + N * value_size + kHashLen;
  if (N > (storage.size() / value_size) || storage.size() != expect) {
    throw CorruptionError("cache: " + path.string() + " has the wrong length for N = " + std::to_string(N));
  }
  const std::size_t body = storage.size() - kHashLen;
  const auto h = sha256({storage.data(), body});
  if (std::memcmp(h.data(), storage.data() + body, kHashLen) != 0) {
    throw CorruptionError("cache: " + path.string() + " failed its integrity hash");
  }
  return {N, {storage.data() + kMagicLen + 8, N * value_size}};
}

std::vector<unsigned char> lambda_bytes(const mf::LambdaTable& t) {
  auto buf = frame(kLambdaMagic, t.N, 8);
  for (std::uint64_t n = 1; n <= t.N; ++n) put(buf, t.lambda[n]);
  return buf;
}

}  // namespace

std::string sha256_hex(std::span<const unsigned char> bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  const auto h = sha256(bytes);
  std::string s;
  for (unsigned char c : h) {
    s.push_back(kHex[c >> 4]);
    s.push_back(kHex[c & 15]);
  }
  return s;
}

void save_tau(const std::filesystem::path& path, const mf::TauTable& t) {
  auto buf = frame(kTauMagic, t.N, 16);
  for (std::uint64_t n = 1; n <= t.N; ++n) put(buf, t.tau[n]);
  finish_and_write(path, buf);
}

mf::TauTable load_tau(const std::filesystem::path& path) {
  std::vector<unsigned char> storage;
  const auto [N, payload] = open_frame(path, kTauMagic, 16, storage);
  mf::TauTable t;
  t.N = N;
  t.tau.assign(N + 1, 0);
  for (std::uint64_t n = 1; n <= N; ++n) std::memcpy(&t.tau[n], payload.data() + (n - 1) * 16, 16);
  return t;
}

void save_lambda(const std::filesystem::path& path, const mf::LambdaTable& t) {
  auto buf = lambda_bytes(t);
  finish_and_write(path, buf);
}

mf::LambdaTable load_lambda(const std::filesystem::path& path) {
  std::vector<unsigned char> storage;
  const auto [N, payload] = open_frame(path, kLambdaMagic, 8, storage);
  mf::LambdaTable t;
  t.N = N;
  t.lambda.assign(N + 1, 0.0);
  std::memcpy(t.lambda.data() + 1, payload.data(), N * 8);
  return t;
}

std::string table_hash(const mf::LambdaTable& t) { return sha256_hex(lambda_bytes(t)); }

mf::LambdaTable load_or_build_lambda(const std::filesystem::path& dir, std::uint64_t N) {
  if (dir.empty()) return mf::build_lambda_table(N);
  const auto path = dir / ("lambda_" + std::to_string(N) + ".lamf");
  if (std::filesystem::exists(path)) return load_lambda(path);
  auto t = mf::build_lambda_table(N);
  std::filesystem::create_directories(dir);
  save_lambda(path, t);
  return t;
}

}  // namespace twistlab::cache
