#include "contractkit/sobolev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

#include "contractkit/channel_algebra.hpp"
#include "contractkit/numeric.hpp"

namespace ck {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Mat symmetrised(const ReversiblePair& rp) {
  const Vec& mu = rp.mu.mass();
  Vec s = mu.cwiseSqrt();
  Mat a = s.asDiagonal() * rp.m.rows() * s.cwiseInverse().asDiagonal();
  return 0.5 * (a + a.transpose());
}

// Edge weights w(x, x′) = μ(x)M(x′|x), symmetric under reversibility.
Mat edge_weights(const ReversiblePair& rp) {
  Mat w = rp.mu.mass().asDiagonal() * rp.m.rows();
  return 0.5 * (w + w.transpose());
}

}  // namespace

ReversiblePair make_reversible(const Dist& mu, const Channel& m) {
  if (m.inputs() != m.outputs()) throw Error(ErrorCode::Domain, "reversible kernel must be square");
  if (!(mu.alphabet() == m.input())) throw Error(ErrorCode::AlphabetMismatch, "law and kernel alphabets differ");
  if (!mu.strictly_positive()) throw Error(ErrorCode::NotStrictlyPositive, "stationary law must be positive");
  Mat w = mu.mass().asDiagonal() * m.rows();
  double db = (w - w.transpose()).cwiseAbs().maxCoeff();
  if (db > 1e-12) {
    std::ostringstream os;
    os << "detailed balance fails by " << db;
    throw Error(ErrorCode::Domain, os.str());
  }
  Vec stat = m.rows().transpose() * mu.mass();
  if ((stat - mu.mass()).cwiseAbs().maxCoeff() > 1e-12) throw Error(ErrorCode::Domain, "law is not stationary");
  return {mu, m};
}

double mmse_cov(const JointLaw& joint, const Vec& f, const Vec& g) {
  const Mat& p = joint.mass();
  if (f.size() != p.rows() || g.size() != p.rows())
    throw Error(ErrorCode::AlphabetMismatch, "function length differs from X alphabet");
  KahanSum s;
  for (Eigen::Index z = 0; z < p.cols(); ++z) {
    double pz = p.col(z).sum();
    if (pz <= 0.0) continue;
    double mf = p.col(z).dot(f) / pz;
    double mg = p.col(z).dot(g) / pz;
    for (Eigen::Index x = 0; x < p.rows(); ++x) s.add(p(x, z) * (f[x] - mf) * (g[x] - mg));
  }
  return s.value();
}

double dirichlet_form(const ReversiblePair& rp, const Vec& f, const Vec& g) {
  const Vec& mu = rp.mu.mass();
  const Mat& m = rp.m.rows();
  KahanSum s;
  for (Eigen::Index x = 0; x < m.rows(); ++x)
    for (Eigen::Index y = 0; y < m.cols(); ++y) s.add(mu[x] * m(x, y) * (f[x] - f[y]) * (g[x] - g[y]));
  return 0.5 * s.value();
}

PoincareResult poincare_constant(const ReversiblePair& rp) {
  PoincareResult r;
  if (rp.mu.size() < 2) {
    r.lambda_tilde = 1.0;
    r.abs_gap = 1.0;
    return r;
  }
  if (rp.mu.size() == 2) {
    // Spectrum {1, 1 − a − b}.
    double l2 = 1.0 - rp.m(0, 1) - rp.m(1, 0);
    r.lambda_tilde = rp.m(0, 1) + rp.m(1, 0);
    r.abs_gap = 1.0 - std::abs(l2);
    return r;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrised(rp));
  const Vec& ev = es.eigenvalues();  // ascending
  const auto n = ev.size();
  double l2 = ev[n - 2];
  double ln = ev[0];
  r.lambda_tilde = 1.0 - l2;
  r.abs_gap = 1.0 - std::max(std::abs(l2), std::abs(ln));
  return r;
}

namespace {

// r log r − r + 1 at r = 1 + d, without cancellation near d = 0.
double bregman_log(double d) {
  if (std::abs(d) < 1e-3) {
    double d2 = d * d;
    return d2 * (0.5 - d / 6.0 + d2 / 12.0 - d2 * d / 20.0 + d2 * d2 / 30.0);
  }
  return (1.0 + d) * std::log1p(d) - d;
}

struct LsiObjective {
  int p;
  Vec mu;
  Mat w;

  // Ratio and gradient in g = log f coordinates; +inf when Ent vanishes.
  // Differences go through expm1 so near-constant f keeps full relative
  // accuracy: the infimum is often the constant limit itself.
  double eval(const Vec& g, Vec* grad) const {
    const auto n = g.size();
    const double s = p == 2 ? 2.0 : 1.0;  // F = f^s is the entropy argument
    Vec gs = s * (g.array() - g.maxCoeff()).matrix();
    Vec big_f = gs.array().exp().matrix();
    double m = mu.dot(big_f);
    // d_x = F_x/m − 1 = Σ_y μ_y (F_x − F_y)/m
    Vec d(n);
    for (Eigen::Index a = 0; a < n; ++a) {
      double t = 0.0;
      for (Eigen::Index b = 0; b < n; ++b) t += mu[b] * big_f[b] * std::expm1(gs[a] - gs[b]);
      d[a] = t / m;
    }
    double den = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) den += mu[a] * bregman_log(d[a]);
    den *= m;
    if (!(den > 0.0)) {
      if (grad) grad->setZero(n);
      return kInf;
    }
    Vec f = (g.array() - g.maxCoeff()).exp().matrix();
    double num = 0.0;
    Vec dn = Vec::Zero(n), dd = Vec::Zero(n);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) {
        if (a == b || w(a, b) == 0.0) continue;
        double df = f[b] * std::expm1(g[a] - g[b]);  // f_a − f_b
        if (p == 2) {
          num += 0.5 * w(a, b) * df * df;
          dn[a] += 2.0 * w(a, b) * df;
        } else {
          num += 0.125 * w(a, b) * df * (g[a] - g[b]);
          dn[a] += 0.25 * w(a, b) * ((g[a] - g[b]) - std::expm1(g[b] - g[a]));
        }
      }
    for (Eigen::Index a = 0; a < n; ++a)
      dd[a] = p == 2 ? 2.0 * mu[a] * f[a] * std::log1p(d[a]) : mu[a] * std::log1p(d[a]);
    double r = num / den;
    if (grad) {
      Vec gf = (dn - r * dd) / den;
      *grad = gf.cwiseProduct(f);  // chain rule through f = e^g
      (*grad)[0] = 0.0;           // pinned coordinate
    }
    return r;
  }
};

struct LocalMin {
  double value = kInf;
  Vec g;
  bool converged = true;
};

LocalMin bfgs_min(const LsiObjective& obj, Vec g, int max_iters, double tol) {
  const auto n = g.size();
  Vec grad(n);
  double f = obj.eval(g, &grad);
  LocalMin res{f, g, true};
  if (!std::isfinite(f)) return res;
  Mat h = Mat::Identity(n, n);
  int quiet = 0;
  bool converged = false;
  for (int it = 0; it < max_iters; ++it) {
    if (grad.lpNorm<Eigen::Infinity>() < 1e-14) {
      converged = true;
      break;
    }
    Vec dir = -(h * grad);
    double slope = dir.dot(grad);
    if (!(slope < 0.0)) {
      h.setIdentity();
      dir = -grad;
      slope = -grad.squaredNorm();
    }
    double step = std::min(1.0, 10.0 / std::max(dir.lpNorm<Eigen::Infinity>(), 1e-300));
    Vec trial(n), gt(n);
    double ft = kInf;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      trial = g + step * dir;
      trial[0] = 0.0;
      ft = obj.eval(trial, &gt);
      if (std::isfinite(ft) && ft <= f + 1e-4 * step * slope) {
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      converged = true;
      break;
    }
    Vec s = trial - g;
    Vec y = gt - grad;
    double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm() && sy > 0.0) {
      double rho = 1.0 / sy;
      Mat i = Mat::Identity(n, n);
      h = (i - rho * s * y.transpose()) * h * (i - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    double gain = f - ft;
    g = trial;
    f = ft;
    grad = gt;
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
  res.g = g;
  res.converged = converged;
  return res;
}

}  // namespace

LsiResult log_sobolev_constant(const ReversiblePair& rp, int p, const SobolevOptions& opts) {
  if (p != 0 && p != 1 && p != 2) throw Error(ErrorCode::Domain, "log-Sobolev order must be 0, 1 or 2");
  auto pc = poincare_constant(rp);
  LsiResult res;
  const double rho0 = 0.5 * pc.lambda_tilde;
  if (p == 0 || rp.mu.size() < 2) {
    res.value = rho0;
    return res;
  }
  LsiObjective obj{p, rp.mu.mass(), edge_weights(rp)};
  const auto n = static_cast<Eigen::Index>(rp.mu.size());
  std::vector<Vec> starts;
  for (Eigen::Index x = 1; x < n; ++x)
    for (double s : {-4.0, 1.0, 4.0}) {
      Vec g = Vec::Zero(n);
      g[x] = s;
      starts.push_back(g);
    }
  // Single-vertex spikes relative to the pinned coordinate.
  for (double s : {-4.0, 4.0}) {
    Vec g = Vec::Constant(n, s);
    g[0] = 0.0;
    starts.push_back(g);
  }
  for (std::size_t i = starts.size(); i < static_cast<std::size_t>(std::max(opts.starts, 0)); ++i) {
    auto rng = stream_rng(opts.seed, 1000 + i);
    std::normal_distribution<double> nd(0.0, 1.0 + static_cast<double>(i % 4));
    Vec g(n);
    for (Eigen::Index x = 0; x < n; ++x) g[x] = nd(rng);
    g[0] = 0.0;
    starts.push_back(g);
  }
  std::vector<LocalMin> results(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) { results[i] = bfgs_min(obj, starts[i], opts.max_iters, opts.tol); });
  double best = kInf;
  bool conv = true;
  Vec arg;
  for (const auto& r : results) {
    if (r.value < best) {
      best = r.value;
      arg = r.g;
      conv = r.converged;
    }
  }
  // Near-constant functions approach λ̃/2, which is therefore an upper
  // bound on the infimum.
  if (!(best < rho0)) {
    res.value = rho0;
    conv = true;
  } else {
    res.value = best;
    res.minimiser = (arg.array() - arg.maxCoeff()).exp().matrix();
  }
  res.converged = conv;
  return res;
}

double factorization_residual(const ReversiblePair& rp, const Channel& k) {
  auto pair = validate_admissible(rp.mu, k);
  Channel ks = adjoint(pair);
  Mat kk = k.rows() * ks.rows();
  return (kk - rp.m.rows()).cwiseAbs().maxCoeff();
}

namespace {

struct FactorFunctor : Eigen::DenseFunctor<double> {
  Vec mu;
  Mat target;
  Eigen::Index n, m;

  FactorFunctor(const Vec& mu_, const Mat& t, Eigen::Index m_)
      : Eigen::DenseFunctor<double>(static_cast<int>(mu_.size() * m_), static_cast<int>(mu_.size() * mu_.size())),
        mu(mu_),
        target(t),
        n(mu_.size()),
        m(m_) {}

  static Mat rows_of(const Eigen::VectorXd& x, Eigen::Index n, Eigen::Index m) {
    Mat k(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
      Vec t = x.segment(i * m, m);
      Vec e = (t.array() - t.maxCoeff()).exp().matrix();
      k.row(i) = (e / e.sum()).transpose();
    }
    return k;
  }

  int operator()(const InputType& x, ValueType& fvec) const {
    Mat k = rows_of(x, n, m);
    Vec out = k.transpose() * mu;
    Mat kk = Mat::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) {
        double s = 0.0;
        for (Eigen::Index y = 0; y < m; ++y)
          if (out[y] > 0.0) s += k(a, y) * k(b, y) * mu[b] / out[y];
        kk(a, b) = s;
      }
    Mat d = kk - target;
    for (Eigen::Index i = 0; i < n * n; ++i) fvec[i] = d(i / n, i % n);
    return 0;
  }
};

}  // namespace

Factorization factor_through(const ReversiblePair& rp, const std::vector<FactorStrategy>& strategies,
                             std::size_t intermediate_size, std::uint64_t seed) {
  const Vec& mu = rp.mu.mass();
  const auto n = mu.size();
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrised(rp));
  double min_ev = es.eigenvalues().minCoeff();
  // K*K is always positive semidefinite in L²(μ).
  if (min_ev < -1e-12) {
    std::ostringstream os;
    os << "kernel has eigenvalue " << min_ev << " < 0 in L2(mu)";
    throw Error(ErrorCode::NotPsd, os.str());
  }
  std::optional<Factorization> best;
  auto consider = [&](Factorization f) {
    if (!best || f.residual < best->residual) best = f;
    return f.accepted;
  };
  for (auto strat : strategies) {
    if (strat == FactorStrategy::DsbsClosedForm) {
      if (n != 2 || std::abs(mu[0] - 0.5) > 1e-12) continue;
      const Mat& mm = rp.m.rows();
      double eps = mm(0, 1);
      if (std::abs(mm(1, 0) - eps) > 1e-12 || eps > 0.5) continue;
      double delta = 0.5 * (1.0 + std::sqrt(1.0 - 2.0 * eps));
      Channel k = Channel::bsc(delta);
      double r = factorization_residual(rp, k);
      if (consider({k, r, "dsbs_closed_form", r < 1e-9})) return *best;
    } else if (strat == FactorStrategy::SpectralSqrt) {
      Vec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
      Mat root = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
      Vec s = mu.cwiseSqrt();
      Mat k = s.cwiseInverse().asDiagonal() * root * s.asDiagonal();
      if (k.minCoeff() < -1e-12) continue;
      k = k.cwiseMax(0.0);
      for (Eigen::Index r = 0; r < k.rows(); ++r) k.row(r) /= k.row(r).sum();
      Channel kc(rp.mu.alphabet(), rp.mu.alphabet(), k);
      double r = factorization_residual(rp, kc);
      if (consider({kc, r, "spectral_sqrt", r < 1e-9})) return *best;
    } else {
      auto m = static_cast<Eigen::Index>(intermediate_size == 0 ? static_cast<std::size_t>(n) : intermediate_size);
      FactorFunctor fn(mu, rp.m.rows(), m);
      Eigen::NumericalDiff<FactorFunctor> nd(fn);
      for (int start = 0; start < 8; ++start) {
        auto rng = stream_rng(seed, 7000 + static_cast<std::uint64_t>(start));
        std::normal_distribution<double> g(0.0, 1.0);
        Eigen::VectorXd x(n * m);
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = g(rng);
        Eigen::LevenbergMarquardt<Eigen::NumericalDiff<FactorFunctor>> lm(nd);
        lm.setMaxfev(4000);
        lm.setXtol(1e-15);
        lm.setFtol(1e-15);
        lm.minimize(x);
        Mat k = FactorFunctor::rows_of(x, n, m);
        Vec out = k.transpose() * mu;
        if (out.minCoeff() <= 0.0) continue;
        Channel kc(rp.mu.alphabet(), Alphabet(static_cast<std::size_t>(m)), k);
        double r = factorization_residual(rp, kc);
        if (consider({kc, r, "parametric_search", r < 1e-9})) return *best;
      }
    }
  }
  std::ostringstream os;
  os << "no strategy reached residual 1e-9";
  if (best) os << " (best " << best->residual << " via " << best->strategy << ")";
  throw Error(ErrorCode::NoFactorizationFound, os.str());
}

double jensen_gap_residual(const PhiGenerator& phi, const JointLaw& joint, const Vec& f) {
  Vec psi_f(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) psi_f[i] = phi.psi(f[i]);
  double lhs = mmse_cov(joint, f, psi_f);
  double cond = conditional_phi_entropy_mean(phi, joint, f);
  // E[f(X)·Ent_{−Ψ}[f(X)|Y]]
  const Mat& p = joint.mass();
  KahanSum gap;
  for (Eigen::Index z = 0; z < p.cols(); ++z) {
    double pz = p.col(z).sum();
    if (pz <= 0.0) continue;
    double mf = p.col(z).dot(f) / pz;
    double ment = -p.col(z).dot(psi_f) / pz + phi.psi(mf);
    gap.add(p.col(z).dot(f) * ment);
  }
  return lhs - cond - gap.value();
}

double covariance_identity_residual(const PhiGenerator& phi, const Dist& mu, const Vec& f) {
  const Vec& p = mu.mass();
  Vec psi_f(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) psi_f[i] = phi.psi(f[i]);
  double ef = p.dot(f);
  double cov = p.dot(f.cwiseProduct(psi_f)) - ef * p.dot(psi_f);
  double ent = phi_entropy(phi, f, p);
  double ent_neg_psi = -p.dot(psi_f) + phi.psi(ef);
  return cov - ent - ef * ent_neg_psi;
}

BridgeReport sobolev_sdpi_bridge(const ReversiblePair& rp, const Factorization& fact, const PhiGenerator& phi,
                                 const SobolevOptions& sopts, const EtaOptions& eopts) {
  if (!fact.accepted) throw Error(ErrorCode::Domain, "factorization was not accepted");
  auto pair = validate_admissible(rp.mu, fact.k);
  BridgeReport rep;
  rep.lambda_tilde = poincare_constant(rp).lambda_tilde;
  rep.eta_chi2 = eta_chi2(pair).eta;
  EtaOptions eo = eopts;
  eo.opconv_cap = false;
  rep.eta_kl = eta_numeric(phi_kl(), pair, eo).estimate;
  rep.rho1 = log_sobolev_constant(rp, 1, sopts).value;
  rep.rho2 = log_sobolev_constant(rp, 2, sopts).value;

  const double tol = 1e-5;
  const double c = (1.0 - std::log(2.0)) * std::log(2.0) / 2.0;
  auto add = [&](std::string tag, double lhs, double rhs, double t) {
    rep.checks.push_back({std::move(tag), lhs, rhs, lhs <= rhs + t});
  };
  rep.checks.push_back({"poincare_equals_chi2", rep.eta_chi2, 1.0 - rep.lambda_tilde,
                        std::abs(rep.eta_chi2 - (1.0 - rep.lambda_tilde)) <= 1e-8});
  add("logsob1_lower", 1.0 - rep.eta_kl, 4.0 * rep.rho1, tol);
  // The form 4ρ̃₁ ≤ 1 − cη fails for the DSBS once ε > ~0.24, so
  // it is advisory. The argument behind it does give c·4ρ̃₁ ≤ 1 − η.
  add("logsob1_upper", 4.0 * rep.rho1, 1.0 - c * rep.eta_kl, tol);
  rep.checks.back().advisory = true;
  add("logsob1_upper_scaled", c * 4.0 * rep.rho1, 1.0 - rep.eta_kl, tol);
  add("logsob2_upper", rep.eta_kl, 1.0 - rep.rho2, tol);

  auto joint = JointLaw::from_pair(rp.mu, fact.k);
  if (phi.finite_at_zero()) {
    std::mt19937_64 rng(0xb1d9e);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    double worst_gap = 0.0, worst_cov = 0.0;
    for (int t = 0; t < 10; ++t) {
      Vec f(static_cast<Eigen::Index>(rp.mu.size()));
      for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = u(rng);
      worst_gap = std::max(worst_gap, std::abs(jensen_gap_residual(phi, joint, f)));
      worst_cov = std::max(worst_cov, std::abs(covariance_identity_residual(phi, rp.mu, f)));
    }
    rep.checks.push_back({"jensen_gap_identity", worst_gap, 0.0, worst_gap <= 1e-10});
    rep.checks.push_back({"covariance_identity", worst_cov, 0.0, worst_cov <= 1e-10});
  }
  std::string bad;
  for (const auto& ch : rep.checks)
    if (!ch.ok && !ch.advisory) {
      std::ostringstream os;
      os << (bad.empty() ? "" : ", ") << ch.tag << " (" << ch.lhs << " vs " << ch.rhs << ")";
      bad += os.str();
    }
  if (!bad.empty()) throw Error(ErrorCode::BridgeViolation, "failed checks: " + bad);
  return rep;
}

Vec positive_gradient(const ReversiblePair& rp, const Vec& f) {
  const Mat& m = rp.m.rows();
  Vec g(f.size());
  for (Eigen::Index x = 0; x < f.size(); ++x) {
    double s = 0.0;
    for (Eigen::Index y = 0; y < f.size(); ++y) {
      double d = std::max(f[x] - f[y], 0.0);
      s += m(x, y) * d * d;
    }
    g[x] = std::sqrt(s);
  }
  return g;
}

HerbstResult herbst(const ReversiblePair& rp, const std::vector<Factorization>& facts, const Vec& f,
                    const EtaOptions& eopts, double lambda_max, int grid_points) {
  if (facts.empty()) throw Error(ErrorCode::Domain, "no factorizations supplied");
  HerbstResult res;
  EtaOptions eo = eopts;
  eo.opconv_cap = false;
  res.mlsi_c = kInf;
  for (const auto& fa : facts) {
    if (!fa.accepted) throw Error(ErrorCode::Domain, "factorization was not accepted");
    auto pair = validate_admissible(rp.mu, fa.k);
    auto rep = eta_numeric(phi_kl(), pair, eo);
    if (!rep.converged) throw Error(ErrorCode::NonConverged, "η estimate for a factor did not converge");
    double eta = rep.estimate;
    res.mlsi_c = std::min(res.mlsi_c, eta < 1.0 ? 2.0 / (1.0 - eta) : kInf);
  }
  res.grad = positive_gradient(rp, f);
  res.grad_inf_norm = res.grad.lpNorm<Eigen::Infinity>();
  double neg_norm = positive_gradient(rp, -f).lpNorm<Eigen::Infinity>();
  res.subgauss_v = res.mlsi_c * res.grad_inf_norm * res.grad_inf_norm;
  res.subgauss_v_neg = res.mlsi_c * neg_norm * neg_norm;

  const Vec& mu = rp.mu.mass();
  Vec c = f.array() - mu.dot(f);
  double cmax = c.maxCoeff();
  double cmin = c.minCoeff();
  res.worst_slack = kInf;
  for (int i = 0; i < grid_points; ++i) {
    double l = -lambda_max + 2.0 * lambda_max * i / std::max(grid_points - 1, 1);
    // log E exp(λ c), shifted for stability.
    double shift = l >= 0.0 ? l * cmax : l * cmin;
    double s = 0.0;
    for (Eigen::Index x = 0; x < c.size(); ++x) s += mu[x] * std::exp(l * c[x] - shift);
    double lam = shift + std::log(s);
    double v = l >= 0.0 ? res.subgauss_v : res.subgauss_v_neg;
    double slack = v * l * l / 2.0 - lam;
    res.worst_slack = std::min(res.worst_slack, slack);
    if (slack < -1e-12) res.check = false;
  }
  // Exact upper tail at each attainable deviation.
  for (Eigen::Index x = 0; x < c.size(); ++x) {
    double t = c[x];
    if (t <= 0.0) continue;
    double tail = 0.0;
    for (Eigen::Index y = 0; y < c.size(); ++y)
      if (c[y] >= t - 1e-15) tail += mu[y];
    double bound = res.subgauss_v > 0.0 ? std::exp(-t * t / (2.0 * res.subgauss_v)) : 0.0;
    if (tail > bound + 1e-12) res.tail_check = false;
  }
  return res;
}

}  // namespace ck
