#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>

namespace cpfm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;
using Index = Eigen::Index;

/// Base class for all typed errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingletonDataset : Error { using Error::Error; };
struct DegenerateBandwidth : Error { using Error::Error; };
struct MissingLabels : Error { using Error::Error; };
struct NonpositiveBandwidth : Error { using Error::Error; };
struct EmptyFingerprint : Error { using Error::Error; };
struct IndefiniteGram : Error { using Error::Error; };
struct PrecisionFailure : Error { using Error::Error; };
struct NoStableEpsilon : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct InsufficientNeighbors : Error { using Error::Error; };
struct InsufficientRuns : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };

/// Parse failure with 1-based line/column location.
struct ParseError : Error {
  ParseError(const std::string& msg, int line_, int column_)
      : Error(msg + " (line " + std::to_string(line_) + ", column " +
              std::to_string(column_) + ")"),
        line(line_),
        column(column_) {}
  int line = 0;
  int column = 0;
};

/// A sample collection: real features plus optional integer labels and
/// optional scalar properties (one per sample).
struct Dataset {
  Matrix features;  // n x d_x
  std::optional<IntVector> labels;
  std::optional<Vector> properties;

  Index size() const { return features.rows(); }
  Index dim() const { return features.cols(); }

  void validate() const;
};

/// Symmetric kernel Gram matrix over a dataset.
struct GramMatrix {
  Matrix entries;  // n x n

  Index size() const { return entries.rows(); }
};

}  // namespace cpfm
