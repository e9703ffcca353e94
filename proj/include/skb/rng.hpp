#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace skb {

// Seeded generator behind every stochastic choice in the project. Draws are
// made from the raw mt19937_64 word stream so that sequences depend only on
// the seed, not on standard-library distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform over the inclusive range {lo, ..., hi}.
  int uniform_int(int lo, int hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    const int span = hi - lo + 1;
    int k = static_cast<int>(uniform() * span);
    if (k >= span) k = span - 1;
    return lo + k;
  }

  // k distinct values from {0, ..., n-1} via partial Fisher-Yates.
  std::vector<int> sample_indices(int n, int k) {
    if (k < 0 || k > n) throw std::invalid_argument("sample_indices: k out of range");
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    for (int i = 0; i < k; ++i) std::swap(pool[i], pool[uniform_int(i, n - 1)]);
    pool.resize(k);
    return pool;
  }

  // Uniform point on the (n-1)-simplex (exponential spacings, normalized).
  Eigen::VectorXd uniform_simplex(int n) {
    Eigen::VectorXd p(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double u = uniform();
      while (u <= 0.0) u = uniform();
      p[i] = -std::log(u);
      total += p[i];
    }
    p /= total;
    return p;
  }

  std::string serialize_state() const {
    std::ostringstream out;
    out << engine_;
    return out.str();
  }

  void restore_state(const std::string& text) {
    std::istringstream in(text);
    in >> engine_;
    if (in.fail()) throw std::runtime_error("Rng: malformed engine state");
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace skb
