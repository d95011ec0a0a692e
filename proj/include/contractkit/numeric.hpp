#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>

#include "contractkit/foundation.hpp"

namespace ck {

// Plain summation in index order; compensated above 64 terms.
double stable_sum(const Vec& v);

class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

// Worker count from CONTRACTKIT_THREADS, else hardware concurrency.
std::size_t worker_count();

// Runs body(i) for i in [0, n). Results must be written to slot i by the
// caller so that reductions stay index-ordered.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Independent stream per (seed, index).
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t index);

Vec random_simplex(std::mt19937_64& rng, std::size_t n, double concentration = 1.0);
Mat random_channel(std::mt19937_64& rng, std::size_t nx, std::size_t ny, double concentration = 1.0);

// 1-D maximisation on [a, b] by golden section.
double golden_max(const std::function<double(double)>& f, double a, double b, double tol = 1e-12,
                  double* argmax = nullptr);

// n Chebyshev-spaced nodes strictly inside (0, 1).
std::vector<double> chebyshev_grid(std::size_t n);

// Binary entropy in nats.
double binary_entropy(double p);

}  // namespace ck
