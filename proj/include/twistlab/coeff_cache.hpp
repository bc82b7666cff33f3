#pragma once

// On-disk coefficient tables.
//
//   magic (5 bytes, "TAUI1" or "LAMF1")
//   N (8 bytes, little-endian)
//   N values: 16-byte LE two's complement (TAUI1) or 8-byte LE IEEE-754 (LAMF1)
//   SHA-256 of every preceding byte (32 bytes)

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "twistlab/modular_form.hpp"

namespace twistlab::cache {

inline constexpr char kTauMagic[] = "TAUI1";
inline constexpr char kLambdaMagic[] = "LAMF1";

void save_tau(const std::filesystem::path& path, const mf::TauTable& t);
mf::TauTable load_tau(const std::filesystem::path& path);

void save_lambda(const std::filesystem::path& path, const mf::LambdaTable& t);
mf::LambdaTable load_lambda(const std::filesystem::path& path);

std::string sha256_hex(std::span<const unsigned char> bytes);

/// SHA-256 of the LAMF1 serialization; identifies the table in run metadata.
std::string table_hash(const mf::LambdaTable& t);

/// Loads `<dir>/lambda_<N>.lamf` when present, otherwise
/// builds the table and (if dir is non-empty) writes it.
mf::LambdaTable load_or_build_lambda(const std::filesystem::path& dir, std::uint64_t N);

}  // namespace twistlab::cache
