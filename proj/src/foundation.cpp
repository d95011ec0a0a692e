#include "contractkit/foundation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace ck {

const char* code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::AlphabetMismatch: return "ALPHABET_MISMATCH";
    case ErrorCode::NotStrictlyPositive: return "NOT_STRICTLY_POSITIVE";
    case ErrorCode::DerivativeUnavailable: return "DERIVATIVE_UNAVAILABLE";
    case ErrorCode::Domain: return "DOMAIN";
    case ErrorCode::NonConverged: return "NON_CONVERGED";
    case ErrorCode::UnsupportedPhi: return "UNSUPPORTED_PHI";
    case ErrorCode::Disconnected: return "DISCONNECTED";
    case ErrorCode::NoFactorizationFound: return "NO_FACTORIZATION_FOUND";
    case ErrorCode::NotPsd: return "NOT_PSD";
    case ErrorCode::BridgeViolation: return "BRIDGE_VIOLATION";
    case ErrorCode::SizeLimit: return "SIZE_LIMIT";
    case ErrorCode::OverlappingSets: return "OVERLAPPING_SETS";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::ValidationError: return "VALIDATION_ERROR";
  }
  return "UNKNOWN";
}

Alphabet::Alphabet(std::size_t n, std::vector<std::string> names) : size(n), labels(std::move(names)) {
  if (n < 1) throw Error(ErrorCode::Domain, "alphabet size must be >= 1");
  if (!labels.empty()) {
    if (labels.size() != n) throw Error(ErrorCode::Domain, "label count differs from alphabet size");
    std::set<std::string> seen(labels.begin(), labels.end());
    if (seen.size() != n) throw Error(ErrorCode::Domain, "alphabet labels must be distinct");
  }
}

bool Alphabet::operator==(const Alphabet& o) const {
  if (size != o.size) return false;
  if (!labels.empty() && !o.labels.empty()) return labels == o.labels;
  return true;
}

namespace {

void check_simplex(const Vec& m, const char* what) {
  if (m.size() < 1) throw Error(ErrorCode::Domain, std::string(what) + " is empty");
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (!std::isfinite(m[i]) || m[i] < 0.0) {
      std::ostringstream os;
      os << what << " entry " << i << " is negative or not finite (" << m[i] << ")";
      throw Error(ErrorCode::Domain, os.str());
    }
  }
  double s = m.sum();
  if (std::abs(s - 1.0) > kSimplexTol) {
    std::ostringstream os;
    os.precision(17);
    os << what << " sums to " << s;
    throw Error(ErrorCode::Domain, os.str());
  }
}

}  // namespace

Dist::Dist(Vec mass) : Dist(Alphabet(static_cast<std::size_t>(mass.size())), mass) {}

Dist::Dist(Alphabet alphabet, Vec mass) : alphabet_(std::move(alphabet)), mass_(std::move(mass)) {
  if (static_cast<std::size_t>(mass_.size()) != alphabet_.size)
    throw Error(ErrorCode::AlphabetMismatch, "mass length differs from alphabet size");
  check_simplex(mass_, "distribution");
  strictly_positive_ = mass_.minCoeff() > 0.0;
}

Dist Dist::bern(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::Domain, "Bernoulli parameter outside [0,1]");
  Vec m(2);
  m << 1.0 - p, p;
  return Dist(m);
}

Dist Dist::uniform(std::size_t n) {
  return Dist(Vec::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)));
}

Dist Dist::point(std::size_t n, std::size_t i) {
  Vec m = Vec::Zero(static_cast<Eigen::Index>(n));
  m[static_cast<Eigen::Index>(i)] = 1.0;
  return Dist(m);
}

Channel::Channel(Mat rows)
    : Channel(Alphabet(static_cast<std::size_t>(rows.rows())),
              Alphabet(static_cast<std::size_t>(rows.cols())), rows) {}

Channel::Channel(Alphabet input, Alphabet output, Mat rows)
    : input_(std::move(input)), output_(std::move(output)), rows_(std::move(rows)) {
  if (static_cast<std::size_t>(rows_.rows()) != input_.size ||
      static_cast<std::size_t>(rows_.cols()) != output_.size)
    throw Error(ErrorCode::AlphabetMismatch, "channel matrix shape differs from alphabets");
  for (Eigen::Index x = 0; x < rows_.rows(); ++x) {
    for (Eigen::Index y = 0; y < rows_.cols(); ++y) {
      if (!std::isfinite(rows_(x, y)) || rows_(x, y) < 0.0) {
        std::ostringstream os;
        os << "channel entry (" << x << "," << y << ") is negative or not finite";
        throw Error(ErrorCode::Domain, os.str());
      }
    }
    double s = rows_.row(x).sum();
    if (std::abs(s - 1.0) > kSimplexTol) {
      std::ostringstream os;
      os.precision(17);
      os << "channel row " << x << " sums to " << s;
      throw Error(ErrorCode::Domain, os.str());
    }
  }
}

Channel Channel::bsc(double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw Error(ErrorCode::Domain, "crossover outside [0,1]");
  Mat k(2, 2);
  k << 1.0 - eps, eps, eps, 1.0 - eps;
  return Channel(k);
}

Channel Channel::identity(std::size_t n) {
  auto m = static_cast<Eigen::Index>(n);
  return Channel(Mat::Identity(m, m));
}

Channel Channel::constant(const Dist& out, std::size_t inputs) {
  Mat k(static_cast<Eigen::Index>(inputs), static_cast<Eigen::Index>(out.size()));
  for (Eigen::Index x = 0; x < k.rows(); ++x) k.row(x) = out.mass().transpose();
  return Channel(Alphabet(inputs), out.alphabet(), k);
}

AdmissiblePair validate_admissible(const Dist& mu, const Channel& k) {
  if (!(mu.alphabet() == k.input()))
    throw Error(ErrorCode::AlphabetMismatch, "input law and channel input alphabet differ");
  for (std::size_t x = 0; x < mu.size(); ++x) {
    if (!(mu[x] > 0.0))
      throw Error(ErrorCode::NotStrictlyPositive, "input law vanishes at x=" + std::to_string(x));
  }
  Vec out = k.rows().transpose() * mu.mass();
  for (Eigen::Index y = 0; y < out.size(); ++y) {
    if (!(out[y] > 0.0))
      throw Error(ErrorCode::NotStrictlyPositive, "output law vanishes at y=" + std::to_string(y));
  }
  // The pushforward of a simplex vector through stochastic rows sums to one
  // up to rounding; renormalise so the invariant holds at 1e-12.
  out /= out.sum();
  return AdmissiblePair{mu, k, Dist(k.output(), out)};
}

double PhiGenerator::psi(double u) const {
  if (psi_fn) return psi_fn(u);
  if (u == 0.0) {
    if (!deriv1) throw Error(ErrorCode::DerivativeUnavailable, name + ": Ψ(0) needs Φ'(0)");
    return deriv1(0.0);
  }
  return (eval(u) - phi_at_zero) / u;
}

double PhiGenerator::d1(double u) const {
  if (!deriv1) throw Error(ErrorCode::DerivativeUnavailable, name + ": first derivative");
  return deriv1(u);
}
double PhiGenerator::d2(double u) const {
  if (!deriv2) throw Error(ErrorCode::DerivativeUnavailable, name + ": second derivative");
  return deriv2(u);
}
double PhiGenerator::d3(double u) const {
  if (!deriv3) throw Error(ErrorCode::DerivativeUnavailable, name + ": third derivative");
  return deriv3(u);
}

bool PhiGenerator::finite_at_zero() const { return std::isfinite(phi_at_zero); }

bool PhiGenerator::chi2_floor_applies() const {
  return deriv1 && deriv2 && deriv3 && deriv2(1.0) > 0.0;
}

PhiGenerator phi_kl() {
  PhiGenerator g;
  g.name = "kl";
  g.eval = [](double u) { return u > 0.0 ? u * std::log(u) : 0.0; };
  g.deriv1 = [](double u) { return std::log(u) + 1.0; };
  g.deriv2 = [](double u) { return 1.0 / u; };
  g.deriv3 = [](double u) { return -1.0 / (u * u); };
  g.phi_at_zero = 0.0;
  g.psi_fn = [](double u) { return std::log(u); };
  g.kappa = [](double c) { return c; };
  g.flags = {true, true, true};
  return g;
}

PhiGenerator phi_chi2() {
  PhiGenerator g;
  g.name = "chi2";
  g.eval = [](double u) { return (u - 1.0) * (u - 1.0); };
  g.deriv1 = [](double u) { return 2.0 * (u - 1.0); };
  g.deriv2 = [](double) { return 2.0; };
  g.deriv3 = [](double) { return 0.0; };
  g.phi_at_zero = 1.0;
  g.whole_line = true;
  g.psi_fn = [](double u) { return u - 2.0; };
  g.kappa = [](double c) { return c * c; };
  g.flags = {true, true, true};
  return g;
}

PhiGenerator phi_tv() {
  PhiGenerator g;
  g.name = "tv";
  g.eval = [](double u) { return 0.5 * std::abs(u - 1.0); };
  g.phi_at_zero = 0.5;
  g.flags = {false, false, false};
  return g;
}

PhiGenerator phi_hellinger() {
  PhiGenerator g;
  g.name = "hellinger";
  g.eval = [](double u) {
    double r = std::sqrt(u) - 1.0;
    return r * r;
  };
  g.deriv1 = [](double u) { return 1.0 - 1.0 / std::sqrt(u); };
  g.deriv2 = [](double u) { return 0.5 * std::pow(u, -1.5); };
  g.deriv3 = [](double u) { return -0.75 * std::pow(u, -2.5); };
  g.phi_at_zero = 1.0;
  g.psi_fn = [](double u) { return 1.0 - 2.0 / std::sqrt(u); };
  // Ent[cU] = √c · Ent[U] because the u and constant terms drop out.
  g.kappa = [](double c) { return std::sqrt(c); };
  g.flags = {true, false, true};
  return g;
}

PhiGenerator phi_lecam(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw Error(ErrorCode::Domain, "Le Cam parameter outside (0,1)");
  const double l = lambda, lb = 1.0 - lambda;
  PhiGenerator g;
  std::ostringstream os;
  os.precision(12);
  os << "lecam:" << lambda;
  g.name = os.str();
  g.eval = [l, lb](double u) { return l * lb * (u - 1.0) * (u - 1.0) / (l * u + lb); };
  // With w = λu + λ̄: Φ = (λ̄/λ)(w − 2 + 1/w).
  g.deriv1 = [l, lb](double u) {
    double w = l * u + lb;
    return lb * (1.0 - 1.0 / (w * w));
  };
  g.deriv2 = [l, lb](double u) {
    double w = l * u + lb;
    return 2.0 * l * lb / (w * w * w);
  };
  g.deriv3 = [l, lb](double u) {
    double w = l * u + lb;
    return -6.0 * l * l * lb / (w * w * w * w);
  };
  g.phi_at_zero = l;
  g.flags = {true, false, true};
  return g;
}

PhiGenerator phi_alpha(double p) {
  if (!(p > 1.0 && p <= 2.0)) throw Error(ErrorCode::Domain, "alpha parameter outside (1,2]");
  PhiGenerator g;
  std::ostringstream os;
  os.precision(12);
  os << "alpha:" << p;
  g.name = os.str();
  g.eval = [p](double u) { return (std::pow(u, p) - 1.0) / (p - 1.0); };
  g.deriv1 = [p](double u) { return p * std::pow(u, p - 1.0) / (p - 1.0); };
  g.deriv2 = [p](double u) { return p * std::pow(u, p - 2.0); };
  g.deriv3 = [p](double u) { return p * (p - 2.0) * std::pow(u, p - 3.0); };
  g.phi_at_zero = -1.0 / (p - 1.0);
  g.psi_fn = [p](double u) { return std::pow(u, p - 1.0) / (p - 1.0); };
  g.kappa = [p](double c) { return std::pow(c, p); };
  g.flags = {true, true, true};
  return g;
}

PhiGenerator phi_from_name(const std::string& spec) {
  auto colon = spec.find(':');
  std::string head = spec.substr(0, colon);
  std::transform(head.begin(), head.end(), head.begin(), [](unsigned char c) { return std::tolower(c); });
  auto param = [&]() -> double {
    if (colon == std::string::npos) throw Error(ErrorCode::ValidationError, spec + ": missing parameter");
    std::string rest = spec.substr(colon + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(rest, &used);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ValidationError, spec + ": bad parameter");
    }
    if (used != rest.size()) throw Error(ErrorCode::ValidationError, spec + ": bad parameter");
    return v;
  };
  if (head == "kl") return phi_kl();
  if (head == "chi2") return phi_chi2();
  if (head == "tv") return phi_tv();
  if (head == "hellinger") return phi_hellinger();
  try {
    if (head == "lecam") return phi_lecam(param());
    if (head == "alpha") return phi_alpha(param());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Domain) throw Error(ErrorCode::ValidationError, e.what());
    throw;
  }
  throw Error(ErrorCode::ValidationError, "unknown generator '" + spec + "'");
}

namespace {

std::vector<double> log_grid(std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = std::exp(std::log(1e-3) + (std::log(1e3) - std::log(1e-3)) * static_cast<double>(i) /
                                         static_cast<double>(n - 1));
  return g;
}

double ent(const PhiGenerator& phi, const std::vector<double>& vals, const std::vector<double>& probs) {
  double m = 0.0, e = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    m += probs[i] * vals[i];
    e += probs[i] * phi(vals[i]);
  }
  return e - phi(m);
}

}  // namespace

std::vector<std::string> spot_check(const PhiGenerator& phi) {
  std::vector<std::string> out;
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unif(0.0, 4.0);
  for (int i = 0; i < 100; ++i) {
    double u = unif(rng), v = unif(rng);
    double mid = phi(0.5 * (u + v));
    if (mid > 0.5 * (phi(u) + phi(v)) + 1e-12 * (1.0 + std::abs(mid))) {
      out.push_back(phi.name + ": midpoint convexity fails");
      break;
    }
  }
  if (phi.kappa) {
    std::uniform_real_distribution<double> pos(0.05, 3.0);
    for (int trial = 0; trial < 10 && out.size() < 4; ++trial) {
      std::vector<double> vals(4), probs(4);
      double s = 0.0;
      for (int i = 0; i < 4; ++i) {
        vals[i] = pos(rng);
        probs[i] = pos(rng);
        s += probs[i];
      }
      for (auto& p : probs) p /= s;
      double base = ent(phi, vals, probs);
      for (double c : {0.5, 2.0, 7.0}) {
        std::vector<double> scaled(vals);
        for (auto& x : scaled) x *= c;
        double lhs = ent(phi, scaled, probs);
        double rhs = phi.kappa(c) * base;
        if (std::abs(lhs - rhs) > 1e-10 * (1.0 + std::abs(rhs))) {
          out.push_back(phi.name + ": homogeneity fails at c=" + std::to_string(c));
          trial = 10;
          break;
        }
      }
    }
  }
  if (phi.flags.subadditive_class_C) {
    if (!phi.deriv2) {
      out.push_back(phi.name + ": class C declared without a second derivative");
    } else {
      auto g = log_grid(200);
      for (std::size_t i = 1; i + 1 < g.size(); ++i) {
        double a = g[i - 1], b = g[i + 1];
        double m = 0.5 * (a + b);
        double lhs = 1.0 / phi.deriv2(m);
        double rhs = 0.5 * (1.0 / phi.deriv2(a) + 1.0 / phi.deriv2(b));
        if (lhs < rhs - 1e-9 * (1.0 + std::abs(rhs))) {
          out.push_back(phi.name + ": 1/Φ'' is not concave");
          break;
        }
      }
    }
  }
  if (phi.flags.strictly_convex_at_1 && phi.deriv2 && !(phi.deriv2(1.0) > 0.0))
    out.push_back(phi.name + ": Φ''(1) is not positive");
  return out;
}

PhiGenerator make_generator(std::string name, ScalarFn eval, double phi_at_zero, PhiFlags flags, ScalarFn d1,
                            ScalarFn d2, ScalarFn d3, ScalarFn kappa) {
  PhiGenerator g;
  g.name = std::move(name);
  g.eval = std::move(eval);
  g.deriv1 = std::move(d1);
  g.deriv2 = std::move(d2);
  g.deriv3 = std::move(d3);
  g.phi_at_zero = phi_at_zero;
  g.kappa = std::move(kappa);
  g.flags = flags;
  g.warnings = spot_check(g);
  return g;
}

double phi_eval(const PhiGenerator& phi, double u, PhiOrder order) {
  if (!(u >= 0.0) && !(phi.whole_line && std::isfinite(u))) throw Error(ErrorCode::Domain, "generator evaluated at negative argument");
  switch (order) {
    case PhiOrder::Value: return u == 0.0 ? phi.phi_at_zero : phi.eval(u);
    case PhiOrder::First: return phi.d1(u);
    case PhiOrder::Second: return phi.d2(u);
    case PhiOrder::Psi: return phi.psi(u);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

bool psi_concave(const PhiGenerator& phi) {
  if (!phi.finite_at_zero()) return false;
  auto g = log_grid(400);
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    double a = g[i - 1], b = g[i + 1], m = g[i];
    // Chord test on a non-uniform grid.
    double t = (m - a) / (b - a);
    double chord = (1.0 - t) * phi.psi(a) + t * phi.psi(b);
    if (phi.psi(m) < chord - 1e-10 * (1.0 + std::abs(chord))) return false;
  }
  return true;
}

bool second_derivative_nonincreasing(const PhiGenerator& phi) {
  if (!phi.deriv2) return false;
  auto g = log_grid(400);
  for (std::size_t i = 1; i < g.size(); ++i) {
    double prev = phi.deriv2(g[i - 1]);
    if (phi.deriv2(g[i]) > prev + 1e-12 * (1.0 + std::abs(prev))) return false;
  }
  return true;
}

}  // namespace ck
