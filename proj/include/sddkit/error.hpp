#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sddkit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data: bad weights, asymmetric or non-dominant matrices,
/// out-of-range parameters.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A matrix row violates diagonal dominance.
class DominanceError : public ValidationError {
 public:
  DominanceError(std::size_t row, double diagonal, double off_sum)
      : ValidationError("diagonal dominance violated at row " +
                        std::to_string(row) + ": A_ii = " +
                        std::to_string(diagonal) + " < sum |A_ij| = " +
                        std::to_string(off_sum)),
        row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// The graph is not connected. Carries the size of every component.
class DisconnectedGraphError : public Error {
 public:
  explicit DisconnectedGraphError(std::vector<std::size_t> component_sizes)
      : Error(make_message(component_sizes)),
        sizes_(std::move(component_sizes)) {}

  const std::vector<std::size_t>& component_sizes() const noexcept {
    return sizes_;
  }

 private:
  static std::string make_message(const std::vector<std::size_t>& sizes) {
    std::string msg = "graph is disconnected: " +
                      std::to_string(sizes.size()) + " components of sizes [";
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      if (i > 0) msg += ", ";
      if (i == 16) {
        msg += "...";
        break;
      }
      msg += std::to_string(sizes[i]);
    }
    return msg + "]";
  }

  std::vector<std::size_t> sizes_;
};

/// Problem exceeds the dense oracle size cap.
class SizeLimitError : public Error {
 public:
  using Error::Error;
};

/// Text input could not be parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Preconditioner chain construction ran out of retries.
class ChainBuildError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value met during an iteration.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace sddkit
