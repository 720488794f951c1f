#include "pilotwave/frame_io.hpp"

#include <bit>
#include <fstream>

#include "pilotwave/errors.hpp"

// The on-disk format is little-endian; this code writes host doubles directly.
static_assert(std::endian::native == std::endian::little,
              "frame files are little-endian; byte swapping is not implemented");

namespace pilotwave {

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t hash) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
        hash ^= p[i];
        hash *= 1099511628211ull;
    }
    return hash;
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::uint64_t hash = kFnvOffset;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        hash = fnv1a(buf, std::size_t(in.gcount()), hash);
    }
    return hash;
}

namespace {

void write_bytes(const std::filesystem::path& path, const void* data, std::size_t bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(static_cast<const char*>(data), std::streamsize(bytes));
    if (!out) throw IoError("short write to " + path.string());
}

void read_bytes(const std::filesystem::path& path, void* data, std::size_t bytes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    in.read(static_cast<char*>(data), std::streamsize(bytes));
    if (std::size_t(in.gcount()) != bytes)
        throw IoError(path.string() + ": expected " + std::to_string(bytes) + " bytes, got " +
                      std::to_string(in.gcount()));
}

}  // namespace

void write_complex_field(const std::filesystem::path& path, const std::vector<cd>& values) {
    write_bytes(path, values.data(), values.size() * sizeof(cd));
}

std::vector<cd> read_complex_field(const std::filesystem::path& path, std::size_t count) {
    std::vector<cd> values(count);
    read_bytes(path, values.data(), count * sizeof(cd));
    return values;
}

void write_real_field(const std::filesystem::path& path, const std::vector<double>& values) {
    write_bytes(path, values.data(), values.size() * sizeof(double));
}

std::vector<double> read_real_field(const std::filesystem::path& path, std::size_t count) {
    std::vector<double> values(count);
    read_bytes(path, values.data(), count * sizeof(double));
    return values;
}

}  // namespace pilotwave
