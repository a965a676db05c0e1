#pragma once

#include <stdexcept>
#include <string>

namespace coldstart {

/// Bad run configuration or CLI usage. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or inconsistent input data. Maps to exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Tensor/layer shape mismatch.
class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A metric whose preconditions do not hold (zero variance, zero range,
/// constant ranks). Reported explicitly, never silently coerced to 0.
class MetricError : public std::runtime_error {
 public:
  explicit MetricError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite loss/gradients or other unrecoverable training failure.
class TrainError : public std::runtime_error {
 public:
  explicit TrainError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kConfig = 2;
inline constexpr int kData = 3;
inline constexpr int kBudget = 4;
inline constexpr int kInternal = 5;
}  // namespace exit_code

}  // namespace coldstart
