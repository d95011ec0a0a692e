#include "contractkit/channel_algebra.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

#include "contractkit/numeric.hpp"

namespace ck {

namespace {

// Renormalise rows so stochasticity survives products to 1e-12.
Mat fix_rows(Mat m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      if (m(r, c) < 0.0) m(r, c) = 0.0;
    m.row(r) /= m.row(r).sum();
  }
  return m;
}

std::vector<std::string> product_labels(const Alphabet& a, const Alphabet& b) {
  if (a.labels.empty() || b.labels.empty()) return {};
  std::vector<std::string> out;
  for (const auto& x : a.labels)
    for (const auto& y : b.labels) out.push_back(x + "," + y);
  return out;
}

Alphabet product_alphabet(const Alphabet& a, const Alphabet& b) {
  return Alphabet(a.size * b.size, product_labels(a, b));
}

}  // namespace

Channel adjoint(const AdmissiblePair& pair) {
  const Mat& k = pair.k.rows();
  const Vec& mu = pair.mu.mass();
  const Vec& out = pair.output_law.mass();
  Mat ks(k.cols(), k.rows());
  for (Eigen::Index y = 0; y < k.cols(); ++y)
    for (Eigen::Index x = 0; x < k.rows(); ++x) ks(y, x) = k(x, y) * mu[x] / out[y];
  return Channel(pair.k.output(), pair.k.input(), fix_rows(ks));
}

Dist apply(const Channel& k, const Dist& mu) {
  if (!(mu.alphabet() == k.input())) throw Error(ErrorCode::AlphabetMismatch, "law and channel input differ");
  Vec out = k.rows().transpose() * mu.mass();
  out /= out.sum();
  return Dist(k.output(), out);
}

Vec apply_fn(const Channel& k, const Vec& f) {
  if (static_cast<std::size_t>(f.size()) != k.outputs())
    throw Error(ErrorCode::AlphabetMismatch, "function length differs from channel output");
  return k.rows() * f;
}

Channel compose(const Channel& a, const Channel& b) {
  if (!(b.output() == a.input())) throw Error(ErrorCode::AlphabetMismatch, "inner alphabets of composition differ");
  return Channel(b.input(), a.output(), fix_rows(b.rows() * a.rows()));
}

Channel tensor(const Channel& a, const Channel& b) {
  Mat k = Eigen::kroneckerProduct(a.rows(), b.rows());
  return Channel(product_alphabet(a.input(), b.input()), product_alphabet(a.output(), b.output()), fix_rows(k));
}

Dist tensor(const Dist& a, const Dist& b) {
  Vec m = Eigen::kroneckerProduct(a.mass(), b.mass());
  m /= m.sum();
  return Dist(product_alphabet(a.alphabet(), b.alphabet()), m);
}

Channel mixture_local(const std::vector<Channel>& channels, const Dist& p) {
  if (channels.empty()) throw Error(ErrorCode::Domain, "no component channels");
  if (p.size() != channels.size()) throw Error(ErrorCode::AlphabetMismatch, "mixture weights and sites differ");
  for (const auto& c : channels)
    if (c.inputs() != c.outputs()) throw Error(ErrorCode::Domain, "local mixture needs square components");
  std::size_t total = 1;
  for (const auto& c : channels) total *= c.inputs();
  auto n = static_cast<Eigen::Index>(total);
  Mat acc = Mat::Zero(n, n);
  for (std::size_t i = 0; i < channels.size(); ++i) {
    Mat term = Mat::Identity(1, 1);
    for (std::size_t j = 0; j < channels.size(); ++j) {
      auto sz = static_cast<Eigen::Index>(channels[j].inputs());
      Mat f = (i == j) ? channels[j].rows() : Mat(Mat::Identity(sz, sz));
      term = Eigen::kroneckerProduct(term, f).eval();
    }
    acc += p[i] * term;
  }
  return Channel(fix_rows(acc));
}

Doeblin doeblin_alpha(const Channel& k) {
  Vec colmin = k.rows().colwise().minCoeff().transpose();
  double a = colmin.sum();
  Doeblin d;
  d.alpha = std::min(a, 1.0);
  if (a > 0.0) {
    Vec base = colmin / a;
    base /= base.sum();
    d.base = Dist(k.output(), base);
  }
  return d;
}

ErasureDecomposition erasure_decomposition(const Channel& k, double alpha) {
  auto d = doeblin_alpha(k);
  if (!d.base || !(alpha > 0.0) || alpha > d.alpha + 1e-15)
    throw Error(ErrorCode::Domain, "α must lie in (0, α*]");
  const Vec& base = d.base->mass();
  auto nx = static_cast<Eigen::Index>(k.inputs());
  auto ny = static_cast<Eigen::Index>(k.outputs());
  Mat e = Mat::Zero(nx, nx + 1);
  for (Eigen::Index x = 0; x < nx; ++x) {
    e(x, x) = 1.0 - alpha;
    e(x, nx) = alpha;
  }
  Mat t(nx + 1, ny);
  for (Eigen::Index x = 0; x < nx; ++x) {
    if (alpha < 1.0) {
      t.row(x) = (k.rows().row(x) - alpha * base.transpose()) / (1.0 - alpha);
    } else {
      t.row(x) = base.transpose();
    }
  }
  t.row(nx) = base.transpose();
  Alphabet ext(static_cast<std::size_t>(nx + 1));
  return {Channel(k.input(), ext, e), Channel(ext, k.output(), fix_rows(t))};
}

ExchangeablePairLaw exchangeable_pair(const AdmissiblePair& pair) {
  Channel ks = adjoint(pair);
  Mat kk = pair.k.rows() * ks.rows();  // (K*K)(x'|x) = Σ_y K(y|x) K*(x'|y)
  Mat joint = pair.mu.mass().asDiagonal() * kk;
  // Symmetrise away rounding; the exact law is symmetric.
  joint = 0.5 * (joint + joint.transpose()).eval();
  joint /= joint.sum();
  return {JointLaw(pair.mu.alphabet(), pair.mu.alphabet(), joint), pair};
}

}  // namespace ck
