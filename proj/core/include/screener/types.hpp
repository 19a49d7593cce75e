#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace screener {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Random sampling recipe shared by the property checkers.
struct SampleSpec {
  std::size_t count = 1000;
  std::uint64_t seed = 1;
  double radius = 2.0;  // half-width of the sampling box where one is needed
  int min_dim = 1;
  int max_dim = 3;
};

}  // namespace screener
