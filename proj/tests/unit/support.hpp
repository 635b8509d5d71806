#pragma once

#include <chrono>
#include <random>

#include <Eigen/Dense>

#include "snowbranch/spectrum.hpp"

namespace testing {

inline Eigen::VectorXd random_vector(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

// Shared level-3 bases; computing them once keeps each executable fast.
inline const snowbranch::EigenBasis& level3_basis(int modes = 20) {
  if (modes == 50) {
    static const auto b50 = snowbranch::compute_basis(3, 50);
    return b50;
  }
  static const auto b20 = snowbranch::compute_basis(3, 20);
  return b20;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace testing
