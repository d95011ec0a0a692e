#include "contractkit/numeric.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ck {

double stable_sum(const Vec& v) {
  if (v.size() <= 64) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += v[i];
    return s;
  }
  KahanSum k;
  for (Eigen::Index i = 0; i < v.size(); ++i) k.add(v[i]);
  return k.value();
}

std::size_t worker_count() {
  if (const char* env = std::getenv("CONTRACTKIT_THREADS")) {
    char* end = nullptr;
    long n = std::strtol(env, &end, 10);
    if (end != env && n >= 1) return static_cast<std::size_t>(n);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto run = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

Vec random_simplex(std::mt19937_64& rng, std::size_t n, double concentration) {
  std::gamma_distribution<double> g(concentration, 1.0);
  Vec v(static_cast<Eigen::Index>(n));
  for (;;) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = g(rng);
    double s = v.sum();
    if (s > 0.0) {
      v /= s;
      // Push any residual rounding into the largest entry.
      Eigen::Index imax = 0;
      v.maxCoeff(&imax);
      v[imax] += 1.0 - v.sum();
      if (v[imax] >= 0.0) return v;
    }
  }
}

Mat random_channel(std::mt19937_64& rng, std::size_t nx, std::size_t ny, double concentration) {
  Mat k(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(ny));
  for (Eigen::Index x = 0; x < k.rows(); ++x) k.row(x) = random_simplex(rng, ny, concentration).transpose();
  return k;
}

double golden_max(const std::function<double(double)>& f, double a, double b, double tol, double* argmax) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    }
  }
  double x = fc > fd ? c : d;
  if (argmax) *argmax = x;
  return std::max(fc, fd);
}

std::vector<double> chebyshev_grid(std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) {
    double th = M_PI * (2.0 * static_cast<double>(k) + 1.0) / (2.0 * static_cast<double>(n));
    g[k] = 0.5 * (1.0 - std::cos(th));
  }
  return g;
}

double binary_entropy(double p) {
  auto h = [](double x) { return x > 0.0 ? -x * std::log(x) : 0.0; };
  return h(p) + h(1.0 - p);
}

}  // namespace ck
