#include "contractkit/applications.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "contractkit/channel_algebra.hpp"
#include "contractkit/numeric.hpp"

namespace ck {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

EtaOptions estimate_only(const EtaOptions& opts) {
  EtaOptions o = opts;
  o.opconv_cap = false;
  return o;
}

struct EtaValue {
  double eta = 0.0;
  bool converged = true;
};

EtaValue eta_value(const PhiGenerator& phi, const AdmissiblePair& pair, const EtaOptions& opts) {
  if (phi.name == "chi2") return {eta_chi2(pair).eta, true};
  if (phi.name == "tv") return {dobrushin(pair.k), true};
  auto rep = eta_numeric(phi, pair, estimate_only(opts));
  return {rep.estimate, rep.converged};
}

}  // namespace

// ---- mixing times

double mixing_d_star(const PhiGenerator& phi, const Dist& mu) {
  if (!phi.finite_at_zero()) throw Error(ErrorCode::Domain, phi.name + ": Φ(0) is infinite, D* is unbounded");
  double best = 0.0;
  for (std::size_t x = 0; x < mu.size(); ++x) {
    double m = mu[x];
    if (m <= 0.0) continue;
    best = std::max(best, m * phi(1.0 / m) + (1.0 - m) * phi.phi_at_zero);
  }
  return best;
}

MixingReport mixing_time_bound(const PhiGenerator& phi, const ReversiblePair& rp, double eps, double eta) {
  if (!(eps > 0.0)) throw Error(ErrorCode::Domain, "eps must be positive");
  if (!(eta >= 0.0) || eta >= 1.0) throw Error(ErrorCode::Domain, "eta must lie in [0, 1)");
  MixingReport rep;
  rep.d_star = mixing_d_star(phi, rp.mu);
  if (eps >= rep.d_star) {
    rep.t_bound = 0;
  } else if (eta == 0.0) {
    rep.t_bound = 1;
  } else {
    double t = std::ceil(std::log(rep.d_star / eps) / std::log(1.0 / eta));
    rep.t_bound = static_cast<std::size_t>(std::max(t, 0.0));
    while (rep.d_star * std::pow(eta, static_cast<double>(rep.t_bound)) > eps) ++rep.t_bound;
  }
  const std::size_t horizon = std::min<std::size_t>(rep.t_bound, 100000);
  const Vec& mu = rp.mu.mass();
  const auto n = mu.size();
  Mat power = Mat::Identity(n, n);
  for (std::size_t t = 0; t <= horizon; ++t) {
    if (t > 0) power = power * rp.m.rows();
    double worst = 0.0;
    for (Eigen::Index x = 0; x < n; ++x)
      worst = std::max(worst, phi_divergence_raw(phi, power.row(x).transpose(), mu));
    double env = rep.d_star * std::pow(eta, static_cast<double>(t));
    rep.trajectory.push_back(worst);
    rep.envelope.push_back(env);
    if (worst > (1.0 + 1e-6) * env + 1e-12) rep.dominated = false;
  }
  rep.reached = rep.trajectory.back() <= eps * (1.0 + 1e-9) + 1e-15;
  return rep;
}

// ---- fastest mixing chain

namespace {

struct FmmcProblem {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  Vec mu, smu;
  Eigen::Index n;

  Mat symmetric(const Vec& w) const {
    Mat s = Mat::Identity(n, n);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      auto [i, j] = edges[e];
      double c = w[static_cast<Eigen::Index>(e)];
      auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
      s(a, a) -= c / mu[a];
      s(b, b) -= c / mu[b];
      s(a, b) += c / (smu[a] * smu[b]);
      s(b, a) += c / (smu[a] * smu[b]);
    }
    return s;
  }

  // SLEM² with a subgradient; tied extreme eigenvectors are averaged.
  double eval(const Vec& w, Vec* grad, double* lambda = nullptr, Vec* vec = nullptr) const {
    Mat s = symmetric(w) - smu * smu.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es(s);
    const Vec& ev = es.eigenvalues();
    double slem = std::max(std::abs(ev[0]), std::abs(ev[n - 1]));
    if (lambda) *lambda = std::abs(ev[0]) > std::abs(ev[n - 1]) ? ev[0] : ev[n - 1];
    if (vec) *vec = std::abs(ev[0]) > std::abs(ev[n - 1]) ? es.eigenvectors().col(0) : es.eigenvectors().col(n - 1);
    if (grad) {
      grad->setZero(static_cast<Eigen::Index>(edges.size()));
      int ties = 0;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (std::abs(std::abs(ev[k]) - slem) > 1e-10 || slem == 0.0) continue;
        Vec u = es.eigenvectors().col(k);
        double sign = ev[k] > 0.0 ? -1.0 : 1.0;
        for (std::size_t e = 0; e < edges.size(); ++e) {
          auto [i, j] = edges[e];
          double b = u[static_cast<Eigen::Index>(i)] / smu[static_cast<Eigen::Index>(i)] -
                     u[static_cast<Eigen::Index>(j)] / smu[static_cast<Eigen::Index>(j)];
          (*grad)[static_cast<Eigen::Index>(e)] += sign * b * b;
        }
        ++ties;
      }
      if (ties > 0) *grad *= 2.0 * slem / ties;
    }
    return slem * slem;
  }

  // Index of a violated constraint as a cut vector, or empty when feasible.
  std::optional<Vec> violated(const Vec& w) const {
    const auto m = static_cast<Eigen::Index>(edges.size());
    for (Eigen::Index e = 0; e < m; ++e)
      if (w[e] < 0.0) {
        Vec a = Vec::Zero(m);
        a[e] = -1.0;
        return a;
      }
    Vec load = Vec::Zero(n);
    for (Eigen::Index e = 0; e < m; ++e) {
      load[static_cast<Eigen::Index>(edges[static_cast<std::size_t>(e)].first)] += w[e];
      load[static_cast<Eigen::Index>(edges[static_cast<std::size_t>(e)].second)] += w[e];
    }
    for (Eigen::Index x = 0; x < n; ++x)
      if (load[x] > mu[x]) {
        Vec a = Vec::Zero(m);
        for (Eigen::Index e = 0; e < m; ++e) {
          auto [i, j] = edges[static_cast<std::size_t>(e)];
          if (static_cast<Eigen::Index>(i) == x || static_cast<Eigen::Index>(j) == x) a[e] = 1.0;
        }
        return a;
      }
    return std::nullopt;
  }

  void retract(Vec& w) const {
    w = w.cwiseMax(0.0);
    for (Eigen::Index x = 0; x < n; ++x) {
      double load = 0.0;
      for (std::size_t e = 0; e < edges.size(); ++e)
        if (static_cast<Eigen::Index>(edges[e].first) == x || static_cast<Eigen::Index>(edges[e].second) == x)
          load += w[static_cast<Eigen::Index>(e)];
      if (load > mu[x]) {
        double f = mu[x] / load;
        for (std::size_t e = 0; e < edges.size(); ++e)
          if (static_cast<Eigen::Index>(edges[e].first) == x || static_cast<Eigen::Index>(edges[e].second) == x)
            w[static_cast<Eigen::Index>(e)] *= f;
      }
    }
  }
};

}  // namespace

double fmmc_objective(const Graph& g, const Dist& mu, const Vec& w) {
  FmmcProblem pb;
  for (auto e : g.edges)
    if (e.first != e.second) pb.edges.push_back(e);
  pb.mu = mu.mass();
  pb.smu = pb.mu.cwiseSqrt();
  pb.n = pb.mu.size();
  return pb.eval(w, nullptr);
}

FmmcResult fmmc_solve(const Graph& g, const Dist& mu, const FmmcOptions& opts) {
  if (mu.size() != g.n) throw Error(ErrorCode::AlphabetMismatch, "law size differs from vertex count");
  if (!mu.strictly_positive()) throw Error(ErrorCode::NotStrictlyPositive, "stationary law must be positive");
  if (!g.connected()) throw Error(ErrorCode::Disconnected, "graph is not connected");
  FmmcProblem pb;
  for (auto e : g.edges)
    if (e.first != e.second) pb.edges.push_back(e);
  pb.mu = mu.mass();
  pb.smu = pb.mu.cwiseSqrt();
  pb.n = pb.mu.size();
  const auto m = static_cast<Eigen::Index>(pb.edges.size());

  FmmcResult res;
  Vec best_w = Vec::Zero(m);
  double best = pb.eval(best_w, nullptr);
  auto offer = [&](const Vec& w) {
    if (pb.violated(w)) return;
    double v = pb.eval(w, nullptr);
    if (v < best) {
      best = v;
      best_w = w;
    }
  };

  Vec cap(m);
  for (Eigen::Index e = 0; e < m; ++e) {
    auto [i, j] = pb.edges[static_cast<std::size_t>(e)];
    cap[e] = std::min(pb.mu[static_cast<Eigen::Index>(i)], pb.mu[static_cast<Eigen::Index>(j)]);
  }

  if (m == 1) {
    double arg = 0.0;
    golden_max([&](double t) { return -pb.eval(Vec::Constant(1, t), nullptr); }, 0.0, cap[0], 1e-14, &arg);
    offer(Vec::Constant(1, arg));
    res.history.push_back(best);
    res.iterations = 1;
  } else if (m >= 2) {
    // Projected subgradient with a running average.
    auto deg = g.degrees();
    Vec w(m);
    for (Eigen::Index e = 0; e < m; ++e) {
      auto [i, j] = pb.edges[static_cast<std::size_t>(e)];
      w[e] = 0.5 * std::min(pb.mu[static_cast<Eigen::Index>(i)] / deg[i], pb.mu[static_cast<Eigen::Index>(j)] / deg[j]);
    }
    Vec avg = w;
    offer(w);
    double scale = cap.maxCoeff();
    Vec grad(m);
    for (std::size_t k = 0; k < opts.subgradient_iters; ++k) {
      pb.eval(w, &grad);
      double gn = grad.norm();
      if (gn == 0.0) break;
      w -= (0.2 * scale / std::sqrt(static_cast<double>(k) + 1.0)) * grad / gn;
      pb.retract(w);
      avg += (w - avg) / static_cast<double>(k + 2);
      offer(w);
      offer(avg);
      res.history.push_back(best);
      ++res.iterations;
    }
    // Central-cut ellipsoid polish over the box [0, cap].
    Vec c = 0.5 * cap;
    double r2 = (0.5 * cap).squaredNorm() * 1.0001;
    Mat p = r2 * Mat::Identity(m, m);
    const double md = static_cast<double>(m);
    for (std::size_t k = 0; k < opts.polish_iters; ++k) {
      Vec a;
      bool objective_cut = false;
      if (auto v = pb.violated(c)) {
        a = *v;
      } else {
        offer(c);
        pb.eval(c, &grad);
        a = grad;
        objective_cut = true;
      }
      Vec pa = p * a;
      double q = a.dot(pa);
      if (!(q > 0.0)) break;
      double root = std::sqrt(q);
      if (objective_cut && root < opts.tol) break;
      Vec gt = pa / root;
      c -= gt / (md + 1.0);
      p = (md * md / (md * md - 1.0)) * (p - (2.0 / (md + 1.0)) * gt * gt.transpose());
      p = 0.5 * (p + p.transpose());
      res.history.push_back(best);
      ++res.iterations;
    }
  }

  const auto n = pb.n;
  Mat k = Mat::Zero(n, n);
  for (Eigen::Index e = 0; e < m; ++e) {
    auto [i, j] = pb.edges[static_cast<std::size_t>(e)];
    auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
    k(a, b) = best_w[e] / pb.mu[a];
    k(b, a) = best_w[e] / pb.mu[b];
  }
  for (Eigen::Index x = 0; x < n; ++x) k(x, x) = std::max(0.0, 1.0 - (k.row(x).sum() - k(x, x)));
  for (Eigen::Index x = 0; x < n; ++x) k.row(x) /= k.row(x).sum();
  res.kernel = Channel(mu.alphabet(), mu.alphabet(), k);
  res.value = pb.eval(best_w, nullptr, &res.cert_eigenvalue, &res.cert_vector);
  Mat s = pb.symmetric(best_w) - pb.smu * pb.smu.transpose();
  res.cert_residual = (s * res.cert_vector - res.cert_eigenvalue * res.cert_vector).norm();
  if (res.cert_residual > 1e-8 || std::abs(res.cert_eigenvalue * res.cert_eigenvalue - res.value) > 1e-8)
    throw Error(ErrorCode::NonConverged, "certificate eigenpair does not reproduce the value");
  return res;
}

// ---- Potts model

std::vector<std::size_t> decode_config(std::size_t index, std::size_t q, std::size_t vertices) {
  std::vector<std::size_t> x(vertices);
  for (std::size_t v = vertices; v-- > 0;) {
    x[v] = index % q;
    index /= q;
  }
  return x;
}

namespace {

std::size_t config_count(const GraphModel& gm) {
  if (gm.q < 2) throw Error(ErrorCode::Domain, "q must be at least 2");
  std::size_t total = 1;
  for (std::size_t v = 0; v < gm.graph.n; ++v) {
    total *= gm.q;
    if (total > kDeskLimit) {
      std::ostringstream os;
      os << gm.q << "^" << gm.graph.n << " configurations exceed " << kDeskLimit;
      throw Error(ErrorCode::SizeLimit, os.str());
    }
  }
  return total;
}

std::vector<std::pair<std::size_t, std::size_t>> proper_edges(const Graph& g) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (auto p : g.edges)
    if (p.first != p.second) e.push_back(p);
  return e;
}

double log_weight(const GraphModel& gm, const std::vector<std::size_t>& x,
                  const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  double s = 0.0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto [u, v] = edges[e];
    if (gm.potentials.empty()) {
      if (x[u] == x[v]) s += gm.beta;
    } else {
      double t = gm.potentials[e](static_cast<Eigen::Index>(x[u]), static_cast<Eigen::Index>(x[v]));
      s += t > 0.0 ? std::log(t) : -kInf;
    }
  }
  return s;
}

std::size_t components(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                       std::size_t mask) {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  std::size_t c = n;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (!(mask >> e & 1U)) continue;
    auto a = find(edges[e].first), b = find(edges[e].second);
    if (a != b) {
      parent[a] = b;
      --c;
    }
  }
  return c;
}

}  // namespace

Dist gibbs(const GraphModel& gm) {
  if (gm.graph.has_self_loops()) throw Error(ErrorCode::Domain, "graphical models take no self-loops");
  if (!(gm.beta >= 0.0)) throw Error(ErrorCode::Domain, "beta must be nonnegative");
  auto edges = proper_edges(gm.graph);
  if (!gm.potentials.empty()) {
    if (gm.potentials.size() != edges.size()) throw Error(ErrorCode::Domain, "one potential table per edge");
    for (const auto& t : gm.potentials) {
      auto q = static_cast<Eigen::Index>(gm.q);
      if (t.rows() != q || t.cols() != q) throw Error(ErrorCode::Domain, "potential tables must be q×q");
      if (t.minCoeff() < 0.0 || (t - t.transpose()).cwiseAbs().maxCoeff() > 0.0)
        throw Error(ErrorCode::Domain, "potential tables must be symmetric and nonnegative");
    }
  }
  const std::size_t total = config_count(gm);
  Vec lw(static_cast<Eigen::Index>(total));
  for (std::size_t i = 0; i < total; ++i)
    lw[static_cast<Eigen::Index>(i)] = log_weight(gm, decode_config(i, gm.q, gm.graph.n), edges);
  double top = lw.maxCoeff();
  if (!std::isfinite(top)) throw Error(ErrorCode::Domain, "every configuration has zero weight");
  Vec w = (lw.array() - top).exp().matrix();
  return Dist(w / w.sum());
}

PottsKernels potts_kernels(const GraphModel& gm) {
  if (!gm.potentials.empty()) throw Error(ErrorCode::Domain, "Swendsen-Wang needs the plain Potts interaction");
  auto edges = proper_edges(gm.graph);
  if (edges.size() > 12) {
    std::ostringstream os;
    os << "2^" << edges.size() << " edge subsets exceed " << kDeskLimit;
    throw Error(ErrorCode::SizeLimit, os.str());
  }
  Dist law = gibbs(gm);
  const std::size_t nx = law.size();
  const std::size_t nv = gm.graph.n;
  const std::size_t ny = std::size_t{1} << edges.size();
  const Vec& p = law.mass();

  // Heat bath: uniform site, single-site conditional.
  Mat hb = Mat::Zero(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(nx));
  std::vector<std::size_t> place(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    std::size_t s = 1;
    for (std::size_t u = v + 1; u < nv; ++u) s *= gm.q;
    place[v] = s;
  }
  for (std::size_t i = 0; i < nx; ++i) {
    auto x = decode_config(i, gm.q, nv);
    for (std::size_t v = 0; v < nv; ++v) {
      std::size_t base = i - x[v] * place[v];
      double z = 0.0;
      for (std::size_t c = 0; c < gm.q; ++c) z += p[static_cast<Eigen::Index>(base + c * place[v])];
      for (std::size_t c = 0; c < gm.q; ++c) {
        auto j = static_cast<Eigen::Index>(base + c * place[v]);
        hb(static_cast<Eigen::Index>(i), j) += p[j] / z / static_cast<double>(nv);
      }
    }
  }

  // Edwards-Sokal coupling M(x, A) ∝ (e^β − 1)^{|A|} 1{A ⊂ E(x)}.
  const double r = std::expm1(gm.beta);
  Mat joint = Mat::Zero(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(ny));
  std::vector<std::size_t> agree(nx);
  for (std::size_t i = 0; i < nx; ++i) {
    auto x = decode_config(i, gm.q, nv);
    std::size_t mask = 0;
    for (std::size_t e = 0; e < edges.size(); ++e)
      if (x[edges[e].first] == x[edges[e].second]) mask |= std::size_t{1} << e;
    agree[i] = mask;
  }
  double zsum = 0.0;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t a = agree[i];; a = (a - 1) & agree[i]) {
      double wgt = std::pow(r, static_cast<double>(std::popcount(a)));
      joint(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = wgt;
      zsum += wgt;
      if (a == 0) break;
    }
  }
  joint /= zsum;

  Mat ygx = Mat::Zero(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(ny));
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(nx); ++i) ygx.row(i) = joint.row(i) / joint.row(i).sum();
  Mat xgy = Mat::Zero(static_cast<Eigen::Index>(ny), static_cast<Eigen::Index>(nx));
  for (std::size_t a = 0; a < ny; ++a) {
    double mass = std::pow(static_cast<double>(gm.q), -static_cast<double>(components(nv, edges, a)));
    for (std::size_t i = 0; i < nx; ++i)
      if ((agree[i] & a) == a) xgy(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i)) = mass;
  }

  Alphabet xs(nx), ys(ny);
  PottsKernels k{law,
                 Channel(xs, xs, hb),
                 Channel::identity(1),
                 JointLaw(xs, ys, joint),
                 Channel(xs, ys, ygx),
                 Channel(ys, xs, xgy)};
  k.sw = compose(k.x_given_y, k.y_given_x);
  return k;
}

double sw_bound(std::size_t q, double beta, std::size_t delta, double eta_hb) {
  double d = static_cast<double>(delta);
  double big = std::pow(static_cast<double>(q), 2.0 * d + 1.0) * std::exp(4.0 * beta * d);
  if (!std::isfinite(big)) return 1.0;
  return 1.0 - (1.0 - eta_hb * eta_hb) / (big - eta_hb * eta_hb);
}

double ullrich_bound(std::size_t q, double beta, std::size_t delta, double eta_hb) {
  double d = static_cast<double>(delta);
  double big = std::pow(static_cast<double>(q), 4.0 * d + 2.0) * std::exp(8.0 * beta * d);
  if (!std::isfinite(big)) return 1.0;
  double root = 1.0 - (1.0 - std::sqrt(eta_hb)) / (2.0 * big);
  return root * root;
}

SwHbReport sw_hb_compare(const GraphModel& gm, const PhiGenerator& phi, const EtaOptions& opts) {
  if (!phi.has_kappa()) throw Error(ErrorCode::UnsupportedPhi, phi.name + ": comparison needs the homogeneity condition");
  auto k = potts_kernels(gm);
  SwHbReport rep;
  rep.max_degree = gm.graph.max_degree();
  auto hb = eta_value(phi, validate_admissible(k.gibbs, k.hb), opts);
  auto sw = eta_value(phi, validate_admissible(k.gibbs, k.sw), opts);
  rep.eta_hb = hb.eta;
  rep.eta_sw = sw.eta;
  rep.converged = hb.converged && sw.converged;
  rep.our_bound = sw_bound(gm.q, gm.beta, rep.max_degree, rep.eta_hb);
  rep.sw_within_ours = rep.eta_sw <= rep.our_bound + 1e-6;
  if (phi.name == "chi2") {
    rep.ullrich_bound = ullrich_bound(gm.q, gm.beta, rep.max_degree, rep.eta_hb);
    rep.ours_below_ullrich = rep.our_bound <= *rep.ullrich_bound + 1e-12;
  }
  return rep;
}

// ---- Φ-information contraction

double phi_information_mixture(const PhiGenerator& phi, const Vec& pu, const Mat& x_given_u, const Dist& px) {
  KahanSum s;
  for (Eigen::Index u = 0; u < pu.size(); ++u) {
    if (pu[u] <= 0.0) continue;
    s.add(pu[u] * phi_divergence_raw(phi, x_given_u.row(u).transpose(), px.mass()));
  }
  return s.value();
}

namespace {

// D_Φ(b + δ ‖ b) as Σ b·[Φ(1+d) − Φ(1) − Φ′(1)d], d = δ/b. Σδ = 0 so the
// linear term is free; the bracket is expanded near d = 0.
double divergence_from_offset(const PhiGenerator& phi, const Vec& delta, const Vec& base) {
  const bool kl = phi.name == "kl";
  const double f1 = phi(1.0), g1 = phi.d1(1.0);
  KahanSum s;
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    if (delta[i] == 0.0) continue;
    if (base[i] <= 0.0) {
      Vec one(1), zero = Vec::Zero(1);
      one[0] = delta[i];
      s.add(phi_divergence_raw(phi, one, zero) + phi(1.0));  // 0·Φ(δ/0) limit
      continue;
    }
    double d = delta[i] / base[i];
    double br;
    if (kl) {
      br = (1.0 + d) * std::log1p(d) - d;
      if (std::abs(d) < 1e-3) {
        double d2 = d * d;
        br = d2 * (0.5 - d / 6.0 + d2 / 12.0 - d2 * d / 20.0);
      }
    } else if (std::abs(d) < 1e-4 && phi.deriv2 && phi.deriv3) {
      br = d * d * (phi.d2(1.0) / 2.0 + phi.d3(1.0) * d / 6.0);
    } else {
      br = phi(1.0 + d) - f1 - g1 * d;
    }
    s.add(base[i] * br);
  }
  return s.value();
}

// Σ_u P(u) D_Φ(P_{·|u} ‖ P) with conditionals given as offsets from P.
double mixture_from_offsets(const PhiGenerator& phi, const Vec& pu, const Mat& offsets, const Vec& base) {
  KahanSum s;
  for (Eigen::Index u = 0; u < pu.size(); ++u)
    if (pu[u] > 0.0) s.add(pu[u] * divergence_from_offset(phi, offsets.row(u).transpose(), base));
  return s.value();
}

}  // namespace

InfoSupReport info_contraction_sup(const PhiGenerator& phi, const JointLaw& joint, std::size_t samples,
                                   const std::vector<double>& eps_grid, const EtaOptions& opts) {
  if (!phi.differentiable()) throw Error(ErrorCode::UnsupportedPhi, phi.name + ": needs a differentiable generator");
  Dist px = joint.marginal_x();
  auto pair = validate_admissible(px, joint.z_given_x());
  const Dist& py = pair.output_law;
  const Mat& k = pair.k.rows();
  const Vec& p = px.mass();
  const auto nx = p.size();

  InfoSupReport rep;
  auto eta_rep = eta_numeric(phi, pair, estimate_only(opts));
  rep.eta_reference = eta_rep.estimate;

  // offsets: rows of P_{X|U=u} − P_X, formed without subtraction where possible
  auto ratio = [&](const Vec& pu, const Mat& offsets) {
    double ix = mixture_from_offsets(phi, pu, offsets, p);
    if (!(ix > 1e-14)) return -1.0;
    double iy = mixture_from_offsets(phi, pu, offsets * k, py.mass());
    return iy / ix;
  };
  auto consider = [&](double r, const std::string& src) {
    if (r > rep.sup_estimate) {
      rep.sup_estimate = r;
      rep.best_source = src;
    }
  };

  // ε-construction: U takes weight ε on Q_X and ε̄ on (P_X − εQ_X)/ε̄.
  std::vector<double> grid = eps_grid;
  if (grid.empty()) grid = {1e-4, 1e-3, 1e-2, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 1.0};
  std::vector<std::pair<Vec, std::string>> qs;
  auto mixes = {0.5, 0.9, 0.99, 0.999};
  if (eta_rep.witness) {
    qs.emplace_back(eta_rep.witness->mass(), "witness");
    for (double w : mixes) qs.emplace_back((1.0 - w) * eta_rep.witness->mass() + w * p, "witness_mix");
  }
  for (Eigen::Index x = 0; x < nx; ++x) {
    Vec d = Vec::Zero(nx);
    d[x] = 1.0;
    qs.emplace_back(d, "vertex");
    for (double w : mixes) qs.emplace_back((1.0 - w) * d + w * p, "vertex_mix");
  }
  Vec dir = eta_chi2(pair).input_direction;
  if (dir.norm() > 0.0) {
    double tmax = kInf;
    for (Eigen::Index x = 0; x < nx; ++x)
      if (dir[x] != 0.0) tmax = std::min(tmax, p[x] / std::abs(dir[x]));
    for (double s : {0.01, 0.1, 0.5, 0.9})
      for (double sg : {-1.0, 1.0}) qs.emplace_back(p + sg * s * tmax * dir, "chi2_direction");
  }
  for (auto& [q, src] : qs) {
    q = q.cwiseMax(0.0);
    q /= q.sum();
    double emax = 1.0 - 1e-9;
    for (Eigen::Index x = 0; x < nx; ++x)
      if (q[x] > 0.0) emax = std::min(emax, (p[x] - 1e-9) / q[x]);
    if (!(emax > 0.0)) continue;
    for (double frac : grid) {
      double e = frac * emax;
      if (!(e > 0.0)) continue;
      Vec pu(2);
      pu << e, 1.0 - e;
      Mat off(2, nx);
      off.row(0) = (q - p).transpose();
      off.row(1) = (-(e / (1.0 - e)) * (q - p)).transpose();
      consider(ratio(pu, off), "eps_" + src);
    }
  }

  // Random finite-U conditionals.
  for (std::size_t i = 0; i < samples; ++i) {
    auto rng = stream_rng(opts.seed, 50000 + i);
    std::size_t nu = 2 + i % 3;
    Mat ugx = random_channel(rng, static_cast<std::size_t>(nx), nu, i % 2 ? 0.3 : 1.0);
    Vec pu = ugx.transpose() * p;
    Mat xu(static_cast<Eigen::Index>(nu), nx);
    for (Eigen::Index u = 0; u < static_cast<Eigen::Index>(nu); ++u) {
      if (pu[u] <= 0.0) {
        xu.row(u).setConstant(1.0 / static_cast<double>(nx));
        continue;
      }
      for (Eigen::Index x = 0; x < nx; ++x) xu(u, x) = p[x] * ugx(x, u) / pu[u];
    }
    consider(ratio(pu, xu.rowwise() - p.transpose()), "random_conditional");
  }
  rep.gap = rep.eta_reference - rep.sup_estimate;
  rep.consistent = rep.sup_estimate <= rep.eta_reference + 1e-6;
  return rep;
}

// ---- reconstruction

JointLaw marginal_joint(const GraphModel& gm, const Dist& law, const std::vector<std::size_t>& a,
                        const std::vector<std::size_t>& b) {
  std::size_t na = 1, nb = 1;
  for (std::size_t i = 0; i < a.size(); ++i) na *= gm.q;
  for (std::size_t i = 0; i < b.size(); ++i) nb *= gm.q;
  Mat m = Mat::Zero(static_cast<Eigen::Index>(na), static_cast<Eigen::Index>(nb));
  for (std::size_t i = 0; i < law.size(); ++i) {
    auto x = decode_config(i, gm.q, gm.graph.n);
    std::size_t ia = 0, ib = 0;
    for (auto v : a) ia = ia * gm.q + x[v];
    for (auto v : b) ib = ib * gm.q + x[v];
    m(static_cast<Eigen::Index>(ia), static_cast<Eigen::Index>(ib)) += law[i];
  }
  return JointLaw(m);
}

namespace {

// Restricts a joint law to the support of both marginals.
JointLaw support_of(const JointLaw& j) {
  const Mat& m = j.mass();
  std::vector<Eigen::Index> rows, cols;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    if (m.row(r).sum() > 0.0) rows.push_back(r);
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    if (m.col(c).sum() > 0.0) cols.push_back(c);
  Mat s(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      s(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(rows[r], cols[c]);
  return JointLaw(s / s.sum());
}

AdmissiblePair pair_of(const JointLaw& j) { return validate_admissible(j.marginal_x(), j.z_given_x()); }

// I_Φ(X;X′)/I_Φ(X;X) for the two-stage sampler X → Z → X′.
double sampler_ratio(const PhiGenerator& phi, const JointLaw& j) {
  Dist px = j.marginal_x();
  Mat k = j.z_given_x().rows() * j.x_given_z().rows();
  Mat xx = px.mass().asDiagonal() * k;
  double num = phi_information(phi, JointLaw(xx));
  Mat diag = px.mass().asDiagonal();
  double den = phi_information(phi, JointLaw(diag));
  return den > 0.0 ? num / den : 0.0;
}

void check_sets(const GraphModel& gm, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::Domain, "vertex sets must be nonempty");
  std::vector<bool> in_a(gm.graph.n, false);
  for (auto v : a) {
    if (v >= gm.graph.n) throw Error(ErrorCode::Domain, "vertex out of range");
    in_a[v] = true;
  }
  for (auto v : b) {
    if (v >= gm.graph.n) throw Error(ErrorCode::Domain, "vertex out of range");
    if (in_a[v]) throw Error(ErrorCode::OverlappingSets, "vertex " + std::to_string(v) + " lies in both sets");
  }
}

}  // namespace

ReconstructionReport reconstruction_report(const GraphModel& gm, const std::vector<std::size_t>& a,
                                           const std::vector<std::size_t>& b, const PhiGenerator& phi,
                                           const std::optional<SpatialConstants>& constants,
                                           const EtaOptions& opts) {
  check_sets(gm, a, b);
  if (!phi.differentiable()) throw Error(ErrorCode::UnsupportedPhi, phi.name + ": needs a differentiable generator");
  config_count(gm);
  Dist law = gibbs(gm);
  ReconstructionReport rep;
  JointLaw jab = support_of(marginal_joint(gm, law, a, b));
  rep.info = phi_information(phi, jab);
  rep.info_chi2 = phi_information(phi_chi2(), jab);
  auto pab = pair_of(jab);
  auto pba = pair_of(jab.transposed());
  rep.s_squared = eta_chi2(pab).eta;
  rep.distance = gm.graph.distance(a, b);
  rep.reachable = rep.distance != std::numeric_limits<std::size_t>::max();
  rep.eta_ab = eta_value(phi, pab, opts).eta;
  rep.eta_ba = eta_value(phi, pba, opts).eta;
  rep.product_lower = std::max(sampler_ratio(phi, jab), sampler_ratio(phi, jab.transposed()));
  rep.product_holds = rep.eta_ab * rep.eta_ba >= rep.product_lower - 1e-5;

  if (constants) {
    // Region R = V \ A contains B; its outer boundary sits inside A.
    std::vector<bool> in_a(gm.graph.n, false);
    for (auto v : a) in_a[v] = true;
    auto nb = gm.graph.neighbours();
    for (auto v : a) {
      bool touches = std::any_of(nb[v].begin(), nb[v].end(), [&](std::size_t u) { return !in_a[u]; });
      if (touches) rep.boundary.push_back(v);
    }
    if (!rep.boundary.empty()) {
      JointLaw jdb = support_of(marginal_joint(gm, law, rep.boundary, b));
      auto pdb = pair_of(jdb);
      rep.spatial_eta = eta_value(phi_kl(), pdb, opts).eta;
      double pstar = jdb.marginal_z().min_mass();
      double region = static_cast<double>(gm.graph.n - a.size());
      double d = static_cast<double>(gm.graph.distance(b, rep.boundary));
      rep.spatial_bound = 2.0 * constants->C * constants->C * region * region / pstar * std::exp(-2.0 * constants->c * d);
    }
  }
  return rep;
}

}  // namespace ck
