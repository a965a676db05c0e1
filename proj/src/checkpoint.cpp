#include "coldstart/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "coldstart/errors.hpp"

namespace coldstart::ckpt {

namespace {

static_assert(sizeof(double) == 8, "checkpoint format assumes 64-bit doubles");

std::uint64_t to_le_bits(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  if constexpr (std::endian::native == std::endian::big) {
    bits = __builtin_bswap64(bits);
  }
  return bits;
}

double from_le_bits(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) {
    bits = __builtin_bswap64(bits);
  }
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

template <class T>
void write_pod(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

void Checkpoint::add(const std::string& name, std::vector<double> data) {
  arrays.emplace_back(name, std::move(data));
}

const std::vector<double>& Checkpoint::array(const std::string& name) const {
  for (const auto& [n, data] : arrays) {
    if (n == name) return data;
  }
  throw DataError("checkpoint: missing array '" + name + "'");
}

bool Checkpoint::has(const std::string& name) const {
  for (const auto& [n, data] : arrays) {
    if (n == name) return true;
  }
  return false;
}

void Checkpoint::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("checkpoint: cannot open for writing: " + path);
  nlohmann::json header;
  header["meta"] = meta;
  header["arrays"] = nlohmann::json::array();
  for (const auto& [name, data] : arrays) {
    header["arrays"].push_back({{"name", name}, {"count", data.size()}});
  }
  const std::string header_text = header.dump();
  out.write(kMagic, 8);
  write_pod(out, kFormatVersion);
  write_pod(out, static_cast<std::uint64_t>(header_text.size()));
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  for (const auto& [name, data] : arrays) {
    (void)name;
    for (double v : data) write_pod(out, to_le_bits(v));
  }
  if (!out) throw DataError("checkpoint: write failed: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open: " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw DataError("checkpoint: bad magic in " + path);
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kFormatVersion) {
    throw DataError("checkpoint: unsupported format version " + std::to_string(version));
  }
  const auto header_len = read_pod<std::uint64_t>(in);
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw DataError("checkpoint: truncated header in " + path);
  const nlohmann::json header = nlohmann::json::parse(header_text);
  Checkpoint ckpt;
  ckpt.meta = header.at("meta");
  for (const auto& entry : header.at("arrays")) {
    const std::string name = entry.at("name").get<std::string>();
    const auto count = entry.at("count").get<std::uint64_t>();
    std::vector<double> data;
    data.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      data.push_back(from_le_bits(read_pod<std::uint64_t>(in)));
    }
    if (!in) throw DataError("checkpoint: truncated array '" + name + "' in " + path);
    ckpt.arrays.emplace_back(name, std::move(data));
  }
  return ckpt;
}

}  // namespace coldstart::ckpt
