#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Dense>

namespace spectra {

// SplitMix64 finalizer, used to derive independent stream keys.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_name(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Deterministic random stream keyed by (seed, family, index). Two streams
/// with different keys never share state, so generation order does not
/// matter.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::string_view family, std::uint64_t index = 0)
      : engine_(mix64(mix64(seed) ^ mix64(hash_name(family)) ^ mix64(index + 0x51ed2701ULL))) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t next() { return engine_(); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
  }

  /// Symmetric matrix (G + G^T)/2 with G standard Gaussian.
  Eigen::MatrixXd symmetric(Eigen::Index n) {
    Eigen::MatrixXd g = normal_matrix(n, n);
    return 0.5 * (g + g.transpose());
  }

  /// Orthonormal n x k matrix from the Q factor of a Gaussian matrix.
  Eigen::MatrixXd orthonormal(Eigen::Index n, Eigen::Index k) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(normal_matrix(n, k));
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
    return q;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace spectra
