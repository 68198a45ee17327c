#include "gpwells/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gpwells {
namespace {

constexpr char kMagic[4] = {'G', 'P', 'F', '1'};

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts unsupported");
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get_le(const std::string& in, std::size_t offset) {
  T value;
  std::memcpy(&value, in.data() + offset, sizeof(T));
  return value;
}

}  // namespace

std::string encode_field(const FieldD& u) {
  const int n = u.grid().n;
  std::string out;
  out.reserve(16 + std::size_t(n) * n * 8);
  out.append(kMagic, 4);
  put_le<std::uint32_t>(out, std::uint32_t(n));
  put_le<double>(out, u.grid().L);
  const auto& v = u.values();
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) put_le<double>(out, v(iy, ix));
  return out;
}

FieldD decode_field(const std::string& bytes, Stencil stencil) {
  if (bytes.size() < 16) throw FormatError("field payload shorter than header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad field magic (expected GPF1)");
  const auto n = get_le<std::uint32_t>(bytes, 4);
  const auto L = get_le<double>(bytes, 8);
  if (n < 16 || n > 65536) throw FormatError("field header has implausible n=" + std::to_string(n));
  const std::size_t expected = 16 + std::size_t(n) * n * 8;
  if (bytes.size() != expected)
    throw FormatError("field payload size " + std::to_string(bytes.size()) +
                      " does not match header n=" + std::to_string(n));
  if (!(L > 0) || !std::isfinite(L)) throw FormatError("field header has invalid L");
  FieldD u(Grid(int(n), L, stencil));
  auto& v = u.values();
  std::size_t off = 16;
  for (std::uint32_t iy = 0; iy < n; ++iy)
    for (std::uint32_t ix = 0; ix < n; ++ix, off += 8) v(iy, ix) = get_le<double>(bytes, off);
  return u;
}

void save_field(const std::string& path, const FieldD& u) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path + " for writing");
  const std::string bytes = encode_field(u);
  f.write(bytes.data(), std::streamsize(bytes.size()));
  if (!f) throw FormatError("short write to " + path);
}

FieldD load_field(const std::string& path, Stencil stencil) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_field(ss.str(), stencil);
}

}  // namespace gpwells
