#include "contractkit/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "contractkit/divergences.hpp"
#include "contractkit/numeric.hpp"

namespace ck {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Ratios are only trusted once D_Φ(ν‖μ) clears this level; below it the
// cancellation in Σμ Φ(ν/μ) − Φ(1) dominates and the limit value is
// covered by the s² floor anyway.
constexpr double kDivergenceFloor = 1e-8;

// Bregman-style divergence Σ μ [Φ(r) − Φ(1) − Φ′(1)(r − 1)]. Equal to D_Φ
// when ν sums to one, with less cancellation near ν = μ.
double div_stable(const PhiGenerator& phi, const Vec& nu, const Vec& mu) {
  const bool diff = phi.differentiable();
  const double p1 = phi.eval(1.0);
  const double d1 = diff ? phi.deriv1(1.0) : 0.0;
  KahanSum s;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    double r = nu[i] / mu[i];
    s.add(mu[i] * (phi_value(phi, r) - p1 - d1 * (r - 1.0)));
  }
  return s.value();
}

Vec softmax(const Vec& theta) {
  double m = theta.maxCoeff();
  Vec e = (theta.array() - m).exp().matrix();
  return e / e.sum();
}

constexpr double kLogitSpan = 600.0;

void clamp_logits(Vec& theta) {
  double m = theta.maxCoeff();
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = std::max(theta[i], m - kLogitSpan);
}

Vec logits_of(const Vec& nu) {
  Vec t(nu.size());
  double top = std::log(nu.maxCoeff());
  for (Eigen::Index i = 0; i < nu.size(); ++i) t[i] = nu[i] > 0.0 ? std::log(nu[i]) : top - kLogitSpan;
  clamp_logits(t);
  return t;
}

struct RatioObjective {
  const PhiGenerator& phi;
  Vec mu;
  Vec out;
  Mat k;

  RatioObjective(const PhiGenerator& p, const AdmissiblePair& pair)
      : phi(p), mu(pair.mu.mass()), out(pair.output_law.mass()), k(pair.k.rows()) {}

  // Value and gradient in logit coordinates; -inf when the ratio is not
  // resolvable (ν too close to μ).
  double eval(const Vec& theta, Vec* grad) const {
    Vec nu = softmax(theta);
    double d = div_stable(phi, nu, mu);
    if (!(d >= kDivergenceFloor)) {
      if (grad) grad->setZero(theta.size());
      return -kInf;
    }
    Vec nk = k.transpose() * nu;
    double n = div_stable(phi, nk, out);
    double r = n / d;
    if (grad) {
      const double d1 = phi.deriv1(1.0);
      Vec gd(nu.size());
      for (Eigen::Index x = 0; x < nu.size(); ++x) gd[x] = phi.deriv1(nu[x] / mu[x]) - d1;
      Vec hy(nk.size());
      for (Eigen::Index y = 0; y < nk.size(); ++y) hy[y] = phi.deriv1(nk[y] / out[y]) - d1;
      Vec gn = k * hy;
      Vec g = (gn - r * gd) / d;
      // A vanishing coordinate can give 0·∞ for generators with Φ′(0) = −∞.
      for (Eigen::Index x = 0; x < g.size(); ++x)
        if (!std::isfinite(g[x])) g[x] = 0.0;
      double avg = nu.dot(g);
      *grad = nu.cwiseProduct((g.array() - avg).matrix());
    }
    return r;
  }
};

struct LocalResult {
  double value = -kInf;
  Vec theta;
  bool converged = true;
};

// Quasi-Newton ascent in logit space with Armijo backtracking.
LocalResult bfgs_ascent(const RatioObjective& obj, Vec theta, int max_iters, double tol) {
  const Eigen::Index n = theta.size();
  Vec g(n);
  double f = obj.eval(theta, &g);
  LocalResult res;
  res.theta = theta;
  res.value = f;
  if (!std::isfinite(f)) {
    res.converged = true;
    return res;
  }
  Mat h = Mat::Identity(n, n);
  int quiet = 0;
  bool converged = false;
  for (int it = 0; it < max_iters; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < 1e-14) {
      converged = true;
      break;
    }
    Vec dir = h * g;
    double slope = dir.dot(g);
    if (!(slope > 0.0)) {
      h.setIdentity();
      dir = g;
      slope = g.squaredNorm();
    }
    // Keep trial steps moderate in logit space.
    double step = std::min(1.0, 20.0 / std::max(dir.lpNorm<Eigen::Infinity>(), 1e-300));
    Vec trial(n), gt(n);
    double ft = -kInf;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      trial = theta + step * dir;
      clamp_logits(trial);
      ft = obj.eval(trial, &gt);
      if (std::isfinite(ft) && ft >= f + 1e-4 * step * slope) {
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      converged = true;
      break;
    }
    Vec s = trial - theta;
    Vec y = g - gt;  // gradient of −f
    double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm() && sy > 0.0) {
      double rho = 1.0 / sy;
      Mat i = Mat::Identity(n, n);
      h = (i - rho * s * y.transpose()) * h * (i - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    double gain = ft - f;
    theta = trial;
    f = ft;
    g = gt;
    if (gain < tol * std::max(1.0, std::abs(f))) {
      if (++quiet >= 3) {
        converged = true;
        break;
      }
    } else {
      quiet = 0;
    }
  }
  res.value = f;
  res.theta = theta;
  res.converged = converged;
  return res;
}

std::vector<Vec> structured_starts(const AdmissiblePair& pair, const Chi2Result& chi) {
  std::vector<Vec> starts;
  const Vec& mu = pair.mu.mass();
  const auto n = mu.size();
  if (chi.s > 0.0 && chi.input_direction.size() == n) {
    for (double sign : {1.0, -1.0}) {
      Vec dir = sign * chi.input_direction;
      double tmax = kInf;
      for (Eigen::Index i = 0; i < n; ++i)
        if (dir[i] < 0.0) tmax = std::min(tmax, -mu[i] / dir[i]);
      if (!std::isfinite(tmax)) continue;
      Vec nu = mu + 0.5 * tmax * dir;
      starts.push_back(nu);
    }
  }
  for (Eigen::Index x = 0; x < n; ++x) {
    for (double w : {0.5, 0.9, 0.99}) {
      Vec nu = w * mu;
      nu[x] += 1.0 - w;
      starts.push_back(nu);
    }
  }
  return starts;
}

double raw_ratio(const PhiGenerator& phi, const AdmissiblePair& pair, const Vec& nu) {
  double d = div_stable(phi, nu, pair.mu.mass());
  if (!(d >= kDivergenceFloor)) return kNaN;
  Vec nk = pair.k.rows().transpose() * nu;
  return div_stable(phi, nk, pair.output_law.mass()) / d;
}

std::vector<double> default_lambda_grid() { return chebyshev_grid(33); }

}  // namespace

double EtaReport::max_lower() const {
  double m = 0.0;
  for (const auto& b : lower_bounds)
    if (b.applicable) m = std::max(m, b.value);
  return m;
}

double EtaReport::min_upper() const {
  double m = 1.0;
  for (const auto& b : upper_bounds)
    if (b.applicable) m = std::min(m, b.value);
  return m;
}

const BoundEntry* EtaReport::find(const std::string& tag) const {
  for (const auto& b : lower_bounds)
    if (b.tag == tag) return &b;
  for (const auto& b : upper_bounds)
    if (b.tag == tag) return &b;
  return nullptr;
}

double dobrushin(const Channel& k) {
  const Mat& m = k.rows();
  double best = 0.0;
  for (Eigen::Index a = 0; a < m.rows(); ++a)
    for (Eigen::Index b = a + 1; b < m.rows(); ++b)
      best = std::max(best, 1.0 - m.row(a).cwiseMin(m.row(b)).sum());  // 1 − overlap, exact for the BSC
  return std::min(best, 1.0);
}

Chi2Result eta_chi2(const AdmissiblePair& pair) {
  const Vec& mu = pair.mu.mass();
  const Vec& out = pair.output_law.mass();
  const Mat& k = pair.k.rows();
  Mat a(k.rows(), k.cols());
  for (Eigen::Index x = 0; x < k.rows(); ++x)
    for (Eigen::Index y = 0; y < k.cols(); ++y) a(x, y) = std::sqrt(mu[x]) * k(x, y) / std::sqrt(out[y]);
  Chi2Result r;
  r.input_direction = Vec::Zero(mu.size());
  if (std::min(a.rows(), a.cols()) < 2) return r;
  // Project out the known top pair (√μ, √μK) so the answer is the largest
  // remaining singular value, robust to near-degenerate spectra.
  Vec u0 = mu.cwiseSqrt();
  Vec v0 = out.cwiseSqrt();
  Mat b = a - u0 * v0.transpose();
  Eigen::JacobiSVD<Mat> svd(b, Eigen::ComputeFullU);
  double s = svd.singularValues()[0];
  s = std::min(std::max(s, 0.0), 1.0);
  r.s = s;
  r.eta = s * s;
  if (s > 0.0) {
    Vec u = svd.matrixU().col(0);
    u -= u0 * u0.dot(u);
    r.input_direction = u.cwiseProduct(u0);  // μ ⊙ (u/√μ)
  }
  return r;
}

double contraction_ratio(const PhiGenerator& phi, const AdmissiblePair& pair, const Vec& nu) {
  return raw_ratio(phi, pair, nu);
}

double functional_ratio(const PhiGenerator& phi, const AdmissiblePair& pair, const Vec& f) {
  const Vec& mu = pair.mu.mass();
  const Vec& out = pair.output_law.mass();
  const Mat& k = pair.k.rows();
  Vec ksf(out.size());
  for (Eigen::Index y = 0; y < out.size(); ++y) {
    double s = 0.0;
    for (Eigen::Index x = 0; x < mu.size(); ++x) s += k(x, y) * mu[x] * f[x];
    ksf[y] = s / out[y];
  }
  double den = phi_entropy(phi, f, mu);
  if (!(den > 0.0)) return kNaN;
  return phi_entropy(phi, ksf, out) / den;
}

AscentResult eta_ascent(const PhiGenerator& phi, const AdmissiblePair& pair, const EtaOptions& opts) {
  if (!phi.differentiable())
    throw Error(ErrorCode::UnsupportedPhi, phi.name + " is not differentiable; use the Dobrushin coefficient");
  RatioObjective obj(phi, pair);
  const auto n = static_cast<std::size_t>(pair.mu.size());
  auto chi = eta_chi2(pair);
  auto starts = structured_starts(pair, chi);
  std::size_t structured = starts.size();
  std::size_t total = std::max<std::size_t>(structured, static_cast<std::size_t>(std::max(opts.starts, 0)));
  for (std::size_t i = structured; i < total; ++i) {
    auto rng = stream_rng(opts.seed, i);
    starts.push_back(random_simplex(rng, n));
  }
  std::vector<LocalResult> results(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    results[i] = bfgs_ascent(obj, logits_of(starts[i]), opts.max_iters, opts.tol);
  });

  AscentResult best;
  best.value = -kInf;
  bool all_converged = true;
  for (std::size_t i = 0; i < results.size(); ++i) {
    all_converged = all_converged && results[i].converged;
    if (results[i].value > best.value) {
      best.value = results[i].value;
      best.nu = softmax(results[i].theta);
    }
  }
  // Exact vertices and their mixtures toward μ need no ascent.
  for (std::size_t x = 0; x < n; ++x) {
    Vec v = Vec::Zero(static_cast<Eigen::Index>(n));
    v[static_cast<Eigen::Index>(x)] = 1.0;
    double r = raw_ratio(phi, pair, v);
    if (std::isfinite(r) && r > best.value) {
      best.value = r;
      best.nu = v;
    }
  }
  best.converged = all_converged;
  if (!std::isfinite(best.value)) {
    best.value = 0.0;
    best.nu = pair.mu.mass();
  }
  return best;
}

EtaReport eta_numeric(const PhiGenerator& phi, const AdmissiblePair& pair, const EtaOptions& opts) {
  if (phi.name == "tv" || !phi.differentiable())
    throw Error(ErrorCode::UnsupportedPhi, phi.name + ": η is the Dobrushin coefficient; call dobrushin");
  EtaReport rep = eta_bounds(phi, pair, opts);
  auto asc = eta_ascent(phi, pair, opts);
  auto chi = eta_chi2(pair);
  double floor = phi.chi2_floor_applies() ? chi.eta : 0.0;
  rep.estimate = std::clamp(std::max(floor, asc.value), 0.0, 1.0);
  rep.converged = asc.converged;
  if (asc.value > 0.0) {
    Vec nu = asc.nu;
    nu /= nu.sum();
    rep.witness = Dist(pair.mu.alphabet(), nu);
  }
  for (auto& b : rep.lower_bounds) {
    if (b.tag == "witness_ratio") {
      b.value = std::clamp(asc.value, 0.0, 1.0);
      b.applicable = asc.value > 0.0;
      b.reason = b.applicable ? "ratio at the best ascent point" : "no resolvable witness";
    }
  }
  return rep;
}

double eta_lc_sup(const AdmissiblePair& pair, const std::vector<double>& lambda_grid, const EtaOptions& opts) {
  if (lambda_grid.empty()) throw Error(ErrorCode::Domain, "λ grid is empty");
  auto chi = eta_chi2(pair);
  double best = 0.0;
  for (double l : lambda_grid) {
    auto phi = phi_lecam(l);
    auto asc = eta_ascent(phi, pair, opts);
    best = std::max(best, std::max(asc.value, chi.eta));
  }
  return std::min(best, 1.0);
}

double opconv_cap(const AdmissiblePair& pair, const EtaOptions& opts) {
  auto grid = opts.lambda_grid.empty() ? default_lambda_grid() : opts.lambda_grid;
  auto chi = eta_chi2(pair);
  auto value_at = [&](double l) {
    auto asc = eta_ascent(phi_lecam(l), pair, opts);
    return std::max(asc.value, chi.eta);
  };
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = value_at(grid[i]);
  std::size_t bi = 0;
  for (std::size_t i = 1; i < vals.size(); ++i)
    if (vals[i] > vals[bi]) bi = i;
  double best = vals[bi];
  // Refine between the neighbours of the best grid node.
  std::vector<double> sorted(grid);
  std::sort(sorted.begin(), sorted.end());
  auto pos = std::find(sorted.begin(), sorted.end(), grid[bi]) - sorted.begin();
  double lo = pos > 0 ? sorted[static_cast<std::size_t>(pos) - 1] : 0.5 * sorted.front();
  double hi = static_cast<std::size_t>(pos) + 1 < sorted.size() ? sorted[static_cast<std::size_t>(pos) + 1]
                                                                 : 0.5 * (1.0 + sorted.back());
  if (hi > lo) best = std::max(best, golden_max(value_at, lo, hi, 1e-4));
  return std::min(best, 1.0);
}

double pinsker_constant(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::Domain, "c(p) needs p in [0,1]");
  double d = 2.0 * p - 1.0;
  if (std::abs(d) >= 1.0) return 0.0;
  if (std::abs(d) < 1e-6) return 0.25 * (1.0 - d * d / 3.0);
  // log p − log p̄ = 2 atanh(d)
  return d / (4.0 * std::atanh(d));
}

Balance balance_coefficient(const Dist& mu) {
  const std::size_t n = mu.size();
  Balance b;
  b.beta = 1.0;
  if (n <= 20) {
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (mask & (std::uint64_t{1} << i)) s += mu[i];
      if (s >= 0.5 - 1e-15 && s < b.beta) b.beta = s;
    }
    b.beta = std::max(b.beta, 0.5);
    b.exact = true;
    return b;
  }
  std::vector<double> m(mu.mass().data(), mu.mass().data() + n);
  std::sort(m.begin(), m.end(), std::greater<>());
  double s = 0.0;
  for (double v : m) {
    s += v;
    if (s >= 0.5) break;
  }
  b.beta = std::min(std::max(s, 0.5), 1.0);
  b.exact = false;
  return b;
}

double transport_bound(const AdmissiblePair& pair) {
  const Mat& k = pair.k.rows();
  const Vec& out = pair.output_law.mass();
  double c = pinsker_constant(balance_coefficient(pair.mu).beta);
  double s = 0.0;
  for (Eigen::Index y = 0; y < k.cols(); ++y) {
    double delta = k.col(y).maxCoeff() - k.col(y).minCoeff();
    s += delta * delta / out[y];
  }
  return 2.0 * c * s;
}

EtaReport eta_bounds(const PhiGenerator& phi, const AdmissiblePair& pair, const EtaOptions& opts) {
  EtaReport rep;
  rep.phi_name = phi.name;
  auto chi = eta_chi2(pair);
  auto clip = [](double v) { return std::clamp(v, 0.0, 1.0); };

  BoundEntry s2{"s_squared", chi.eta, phi.chi2_floor_applies(), ""};
  s2.reason = s2.applicable ? "C3 generator with positive curvature at 1" : "needs three derivatives and Φ''(1) > 0";
  rep.lower_bounds.push_back(s2);
  rep.lower_bounds.push_back({"witness_ratio", 0.0, false, "bounds-only evaluation"});

  rep.upper_bounds.push_back({"dobrushin", dobrushin(pair.k), true, "holds for every generator"});
  auto db = doeblin_alpha(pair.k);
  rep.upper_bounds.push_back({"doeblin", clip(1.0 - db.alpha), true, "maximal minorisation α*"});

  BoundEntry mc{"maxcorr_ub", 1.0, false, ""};
  if (!phi.deriv2) {
    mc.reason = "needs a second derivative";
  } else if (!phi.finite_at_zero()) {
    mc.reason = "needs finite Φ(0)";
  } else if (!(phi.deriv2(1.0) > 0.0)) {
    mc.reason = "needs strict convexity";
  } else if (!second_derivative_nonincreasing(phi)) {
    mc.reason = "Φ'' is not nonincreasing";
  } else if (!psi_concave(phi)) {
    mc.reason = "Ψ is not concave";
  } else {
    double psi1 = phi.deriv1(1.0) - phi.eval(1.0) + phi.phi_at_zero;
    double mstar = pair.mu.min_mass();
    mc.value = clip(2.0 * psi1 / phi.deriv2(1.0 / mstar) * chi.eta);
    mc.applicable = true;
    mc.reason = "Ψ concave and Φ'' nonincreasing";
  }
  rep.upper_bounds.push_back(mc);

  BoundEntry oc{"opconv_ub", 1.0, false, ""};
  if (!phi.flags.operator_convex) {
    oc.reason = "generator not flagged operator convex";
  } else if (!opts.opconv_cap) {
    oc.reason = "λ sweep disabled";
  } else {
    oc.value = opconv_cap(pair, opts);
    oc.applicable = true;
    oc.reason = "max of s² and the Le Cam sweep";
  }
  rep.upper_bounds.push_back(oc);

  BoundEntry tr{"transport_ub", 1.0, false, ""};
  if (phi.name != "kl") {
    tr.reason = "stated for relative entropy only";
  } else {
    tr.value = clip(transport_bound(pair));
    tr.applicable = true;
    auto bal = balance_coefficient(pair.mu);
    tr.reason = bal.exact ? "trivial-metric transport inequality" : "balance coefficient from greedy prefix";
    if (pair.mu.size() == 2) tr.reason += "; equals the subgaussian bound for binary input";
  }
  rep.upper_bounds.push_back(tr);

  rep.estimate = clip(rep.max_lower());
  return rep;
}

Channel graph_walk_channel(const Graph& g, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::Domain, "ε outside (0,1)");
  if (g.has_self_loops()) throw Error(ErrorCode::Domain, "random-walk graph must not have self-loops");
  if (g.n < 2 || !g.connected()) throw Error(ErrorCode::Disconnected, "graph is not connected");
  auto deg = g.degrees();
  auto nb = g.neighbours();
  auto n = static_cast<Eigen::Index>(g.n);
  Mat k = Mat::Zero(n, n);
  for (std::size_t x = 0; x < g.n; ++x) {
    auto xi = static_cast<Eigen::Index>(x);
    k(xi, xi) = 1.0 - epsilon;
    for (auto y : nb[x]) k(xi, static_cast<Eigen::Index>(y)) = epsilon / static_cast<double>(deg[x]);
  }
  return Channel(k);
}

GraphWalk graph_rw_bound(const Graph& g, double epsilon) {
  Channel k = graph_walk_channel(g, epsilon);
  auto deg = g.degrees();
  auto nb = g.neighbours();
  const double m = static_cast<double>(g.proper_edge_count());
  Vec mu(static_cast<Eigen::Index>(g.n));
  for (std::size_t x = 0; x < g.n; ++x) mu[static_cast<Eigen::Index>(x)] = static_cast<double>(deg[x]) / (2.0 * m);
  mu /= mu.sum();
  Dist mug(mu);
  auto pair = validate_admissible(mug, k);

  const double eb = 1.0 - epsilon;
  double total = 0.0;
  for (std::size_t y = 0; y < g.n; ++y) {
    double d0 = 0.0, d1 = 0.0, d2 = 0.0;
    if (deg[y] + 1 < g.n) {
      for (std::size_t x = 0; x < g.n; ++x)
        if (x != y) d0 = std::max(d0, std::pow(epsilon / static_cast<double>(deg[x]), 2));
    }
    for (auto x : nb[y]) d1 = std::max(d1, std::pow(eb - epsilon / static_cast<double>(deg[x]), 2));
    for (auto x : nb[y])
      for (auto xp : nb[y])
        d2 = std::max(d2, epsilon * epsilon *
                              std::pow(1.0 / static_cast<double>(deg[x]) - 1.0 / static_cast<double>(deg[xp]), 2));
    total += std::max({d0, d1, d2}) / static_cast<double>(deg[y]);
  }
  return {m * total, pair};
}

double comparison_bound(const PhiGenerator& phi, const AdmissiblePair& pair, const AdmissiblePair& ref_pair,
                        double ref_eta) {
  if (!phi.has_kappa()) throw Error(ErrorCode::Domain, phi.name + " is not homogeneous");
  if (!(pair.k.input() == ref_pair.k.input()) || !(pair.k.output() == ref_pair.k.output()))
    throw Error(ErrorCode::Domain, "pairs live on different alphabets");
  const Vec& mu = pair.mu.mass();
  const Vec& rmu = ref_pair.mu.mass();
  const Mat& k = pair.k.rows();
  const Mat& rk = ref_pair.k.rows();
  double big_a = 0.0;
  for (Eigen::Index x = 0; x < k.rows(); ++x)
    for (Eigen::Index y = 0; y < k.cols(); ++y) {
      double num = rmu[x] * rk(x, y);
      double den = mu[x] * k(x, y);
      if (num == 0.0) continue;
      if (den == 0.0) return 1.0;  // A = ∞
      big_a = std::max(big_a, num / den);
    }
  double small_a = kInf;
  for (Eigen::Index x = 0; x < mu.size(); ++x) small_a = std::min(small_a, rmu[x] / mu[x]);
  if (!(small_a > 0.0) || small_a > big_a * (1.0 + 1e-12))
    throw Error(ErrorCode::Domain, "comparison constants violate 0 < a <= A");
  return std::clamp(1.0 - (small_a / big_a) * (1.0 - ref_eta), 0.0, 1.0);
}

TensorizationReport tensorization_check(const PhiGenerator& phi, const std::vector<AdmissiblePair>& pairs,
                                        const std::optional<Dist>& mixture_weights, const EtaOptions& opts) {
  if (!phi.flags.subadditive_class_C || !phi.has_kappa())
    throw Error(ErrorCode::UnsupportedPhi, phi.name + " is not a homogeneous class-C generator");
  if (pairs.empty()) throw Error(ErrorCode::Domain, "no component pairs");
  const bool chi2 = phi.name == "chi2";
  TensorizationReport rep;
  EtaOptions o = opts;
  o.opconv_cap = false;
  for (const auto& p : pairs) {
    double e = chi2 ? eta_chi2(p).eta : eta_numeric(phi, p, o).estimate;
    rep.component_eta.push_back(e);
  }
  rep.component_max = *std::max_element(rep.component_eta.begin(), rep.component_eta.end());
  rep.product_eta_bound = rep.component_max;
  if (chi2) {
    Dist mu = pairs[0].mu;
    Channel k = pairs[0].k;
    for (std::size_t i = 1; i < pairs.size(); ++i) {
      mu = tensor(mu, pairs[i].mu);
      k = tensor(k, pairs[i].k);
    }
    rep.chi2_product_eta = eta_chi2(validate_admissible(mu, k)).eta;
  }
  if (mixture_weights) {
    if (mixture_weights->size() != pairs.size())
      throw Error(ErrorCode::AlphabetMismatch, "mixture weights and pairs differ in count");
    double m = kInf;
    for (std::size_t i = 0; i < pairs.size(); ++i) m = std::min(m, (*mixture_weights)[i] * (1.0 - rep.component_eta[i]));
    rep.mixture_bound = 1.0 - m;
  }
  return rep;
}

double variational_residual(const PhiGenerator& phi, const AdmissiblePair& pair, const Vec& f, double eta) {
  const Vec& mu = pair.mu.mass();
  const Vec& out = pair.output_law.mass();
  const Mat& k = pair.k.rows();
  Vec ksf(out.size());
  for (Eigen::Index y = 0; y < out.size(); ++y) {
    double s = 0.0;
    for (Eigen::Index x = 0; x < mu.size(); ++x) s += k(x, y) * mu[x] * f[x];
    ksf[y] = s / out[y];
  }
  const double d1 = phi.d1(1.0);
  Vec h(out.size());
  for (Eigen::Index y = 0; y < out.size(); ++y) h[y] = phi.d1(ksf[y]);
  Vec lhs = k * h;
  double worst = 0.0;
  for (Eigen::Index x = 0; x < mu.size(); ++x) {
    double l = lhs[x] - d1;
    double r = eta * (phi.d1(f[x]) - d1);
    double v = std::abs(l - r);
    if (std::isnan(v)) v = kInf;
    worst = std::max(worst, v);
  }
  return worst;
}

namespace {

// Ent_Φ[U] = c·E[U(Φ′(U) − Φ′(1))] on random unit-mean U, with one c.
bool entropy_via_derivative(const PhiGenerator& phi) {
  std::mt19937_64 rng(0xe17);
  std::optional<double> c;
  for (int t = 0; t < 8; ++t) {
    Vec p = random_simplex(rng, 4);
    Vec u = random_simplex(rng, 4) * 4.0;
    u /= p.dot(u);
    double ent = phi_entropy(phi, u, p);
    double d1 = phi.d1(1.0);
    double rhs = 0.0;
    for (Eigen::Index i = 0; i < 4; ++i) rhs += p[i] * u[i] * (phi.d1(u[i]) - d1);
    if (!(rhs > 0.0)) return false;
    double ci = ent / rhs;
    if (!c) c = ci;
    else if (std::abs(*c - ci) > 1e-8 * std::abs(*c)) return false;
  }
  return c && *c > 0.0;
}

}  // namespace

ExtremalSolution extremal_solve(const PhiGenerator& phi, const AdmissiblePair& pair, double eta_hint,
                                const EtaOptions& opts) {
  if (!phi.deriv1 || !phi.deriv2 || !phi.deriv3 || !(phi.deriv2(1.0) > 0.0) || !phi.has_kappa())
    throw Error(ErrorCode::UnsupportedPhi, phi.name + " lacks the smoothness or homogeneity the solver needs");
  if (!entropy_via_derivative(phi))
    throw Error(ErrorCode::UnsupportedPhi, phi.name + " fails the entropy-via-derivative identity");
  const Vec& mu = pair.mu.mass();
  const auto n = mu.size();
  auto chi = eta_chi2(pair);
  auto asc = eta_ascent(phi, pair, opts);

  ExtremalSolution sol;
  sol.converged = asc.converged;
  double floor = std::max(chi.eta, 0.0);
  double level = std::max(asc.value, eta_hint);
  if (!(asc.value > floor + 1e-9) || !(level > floor + 1e-9)) {
    sol.trivial = true;
    sol.f = Vec::Ones(n);
    sol.eta = chi.eta;
    sol.residual = variational_residual(phi, pair, sol.f, sol.eta);
    return sol;
  }

  // Newton polish on the reduced logits (first coordinate pinned).
  RatioObjective obj(phi, pair);
  Vec theta = logits_of(asc.nu / asc.nu.sum());
  theta.array() -= theta[0];
  auto reduced_grad = [&](const Vec& t, double* val) {
    Vec g(n);
    double v = obj.eval(t, &g);
    if (val) *val = v;
    return Vec(g.tail(n - 1));
  };
  double val = 0.0;
  Vec g = reduced_grad(theta, &val);
  bool polished = false;
  for (int it = 0; it < 60 && n > 1; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < 1e-13) {
      polished = true;
      break;
    }
    Mat h(n - 1, n - 1);
    const double step = 1e-6;
    for (Eigen::Index j = 0; j < n - 1; ++j) {
      Vec tp = theta, tm = theta;
      tp[j + 1] += step;
      tm[j + 1] -= step;
      h.col(j) = (reduced_grad(tp, nullptr) - reduced_grad(tm, nullptr)) / (2.0 * step);
    }
    h = 0.5 * (h + h.transpose()).eval();
    Vec delta = h.ldlt().solve(-g);
    if (!delta.allFinite()) break;
    double t = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      Vec trial = theta;
      trial.tail(n - 1) += t * delta;
      double tv = 0.0;
      Vec gt = reduced_grad(trial, &tv);
      if (std::isfinite(tv) && (tv >= val - 1e-15 || gt.norm() < g.norm())) {
        theta = trial;
        val = tv;
        g = gt;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  Vec nu = softmax(theta);
  double polished_val = obj.eval(theta, nullptr);
  if (!(polished_val >= asc.value - 1e-12)) {
    nu = asc.nu / asc.nu.sum();
    polished = false;
  }
  sol.f = nu.cwiseQuotient(mu);
  sol.f /= mu.dot(sol.f);
  sol.eta = functional_ratio(phi, pair, sol.f);
  sol.boundary = sol.f.minCoeff() < 1e-10;
  sol.residual = variational_residual(phi, pair, sol.f, sol.eta);
  sol.converged = sol.converged || polished;
  return sol;
}

}  // namespace ck
