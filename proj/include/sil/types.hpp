#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sil {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Raised when a computation produces a non-finite value or a degenerate
// numerical object (singular link, exploded objective).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a rejection sampler runs out of attempts with a usable but
// incomplete result.
class PartialResult : public std::runtime_error {
 public:
  explicit PartialResult(const std::string& what) : std::runtime_error(what) {}
};

inline double relu(double t) { return t > 0.0 ? t : 0.0; }

// phi'(0) = 0.
inline double relu_deriv(double t) { return t > 0.0 ? 1.0 : 0.0; }

// Neumaier compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace sil
