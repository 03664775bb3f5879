#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace tubeflow {

// Deterministic random source.  All randomized code in the library draws
// through this class so that a run is reproducible from a single seed.
// fork() derives an independent substream from the *seed*, not from the
// current generator state, so per-trial streams do not depend on how many
// draws happened in between (this is what makes --jobs N reproducible).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t bits() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return (gen_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Uniform integer in [lo, hi], both ends included.
  int uniform_int(int lo, int hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    // Rejection-free: 64-bit multiply-shift keeps bias below 2^-64.
    unsigned __int128 wide = static_cast<unsigned __int128>(gen_()) * span;
    return lo + static_cast<int>(wide >> 64);
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return mag * std::cos(2.0 * M_PI * u2);
  }

  // Uniform sample from the closed ball of given radius around the origin.
  Eigen::VectorXd in_ball(int dim, double radius) {
    Eigen::VectorXd g(dim);
    for (int i = 0; i < dim; ++i) g(i) = normal();
    double n = g.norm();
    if (n < 1e-300) return Eigen::VectorXd::Zero(dim);
    double r = radius * std::pow(uniform(), 1.0 / dim);
    return (r / n) * g;
  }

  // Uniform sample from the probability simplex on m vertices.
  std::vector<double> on_simplex(int m) {
    // Dirichlet(1,...,1) via normalized exponentials.
    std::vector<double> w(m);
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
      double u = uniform();
      while (u <= 0.0) u = uniform();
      w[i] = -std::log(u);
      sum += w[i];
    }
    for (int i = 0; i < m; ++i) w[i] /= sum;
    return w;
  }

  // Independent substream `stream` of this generator's seed.
  Rng fork(std::uint64_t stream) const {
    return Rng(splitmix(seed_ ^ splitmix(stream + 0x9E3779B97F4A7C15ULL)));
  }

 private:
  static std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tubeflow
