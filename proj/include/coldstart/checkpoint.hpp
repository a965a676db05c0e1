#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace coldstart::ckpt {

/// Container file for parameter sets and trainer state: an 8-byte magic,
/// a u32 format version, a JSON manifest (length-prefixed) describing the
/// named arrays, then the raw float64 arrays in little-endian order.
struct Checkpoint {
  nlohmann::json meta;
  std::vector<std::pair<std::string, std::vector<double>>> arrays;

  void add(const std::string& name, std::vector<double> data);
  const std::vector<double>& array(const std::string& name) const;
  bool has(const std::string& name) const;

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

inline constexpr char kMagic[9] = "CSCKPT01";
inline constexpr std::uint32_t kFormatVersion = 1;

}  // namespace coldstart::ckpt
