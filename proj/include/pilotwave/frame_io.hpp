#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pilotwave/wavefunction.hpp"

namespace pilotwave {

// 64-bit FNV-1a over raw bytes; stable fingerprint for run artifacts.
inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t hash = kFnvOffset);
std::uint64_t fnv1a_file(const std::filesystem::path& path);

// Frame payload: little-endian interleaved re/im 8-byte floats, row-major,
// axis 0 slowest.  The surrounding manifest carries grid and times.
void write_complex_field(const std::filesystem::path& path, const std::vector<cd>& values);
std::vector<cd> read_complex_field(const std::filesystem::path& path, std::size_t count);

// Real scalar fields (densities, potentials) use the same layout minus the
// imaginary stream.
void write_real_field(const std::filesystem::path& path, const std::vector<double>& values);
std::vector<double> read_real_field(const std::filesystem::path& path, std::size_t count);

}  // namespace pilotwave
