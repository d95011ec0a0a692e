#include "contractkit/divergences.hpp"

#include <cmath>

#include "contractkit/numeric.hpp"

namespace ck {

FiniteRandomVariable::FiniteRandomVariable(Vec values, Dist p) : support(std::move(values)), law(std::move(p)) {
  if (static_cast<std::size_t>(support.size()) != law.size())
    throw Error(ErrorCode::AlphabetMismatch, "support and law lengths differ");
  if (!support.allFinite()) throw Error(ErrorCode::Domain, "support values must be finite");
}

double FiniteRandomVariable::mean() const { return stable_sum(support.cwiseProduct(law.mass())); }

double FiniteRandomVariable::variance() const {
  double m = mean();
  Vec d = (support.array() - m).square().matrix();
  return stable_sum(d.cwiseProduct(law.mass()));
}

JointLaw::JointLaw(Mat mass)
    : JointLaw(Alphabet(static_cast<std::size_t>(mass.rows())), Alphabet(static_cast<std::size_t>(mass.cols())),
               mass) {}

JointLaw::JointLaw(Alphabet x, Alphabet z, Mat mass) : x_(std::move(x)), z_(std::move(z)), mass_(std::move(mass)) {
  if (static_cast<std::size_t>(mass_.rows()) != x_.size || static_cast<std::size_t>(mass_.cols()) != z_.size)
    throw Error(ErrorCode::AlphabetMismatch, "joint mass shape differs from alphabets");
  if (!mass_.allFinite() || mass_.minCoeff() < 0.0) throw Error(ErrorCode::Domain, "joint mass has negative entries");
  if (std::abs(mass_.sum() - 1.0) > kSimplexTol) throw Error(ErrorCode::Domain, "joint mass does not sum to 1");
}

JointLaw JointLaw::from_pair(const Dist& mu, const Channel& k) {
  if (!(mu.alphabet() == k.input())) throw Error(ErrorCode::AlphabetMismatch, "law and channel input differ");
  Mat m = mu.mass().asDiagonal() * k.rows();
  return JointLaw(mu.alphabet(), k.output(), m);
}

JointLaw JointLaw::product(const Dist& px, const Dist& pz) {
  return JointLaw(px.alphabet(), pz.alphabet(), px.mass() * pz.mass().transpose());
}

namespace {
Vec renorm(Vec v) {
  v /= v.sum();
  return v;
}
}  // namespace

Dist JointLaw::marginal_x() const { return Dist(x_, renorm(mass_.rowwise().sum())); }
Dist JointLaw::marginal_z() const { return Dist(z_, renorm(mass_.colwise().sum().transpose())); }

Channel JointLaw::z_given_x() const {
  Vec pz = renorm(mass_.colwise().sum().transpose());
  Mat k(mass_.rows(), mass_.cols());
  for (Eigen::Index x = 0; x < mass_.rows(); ++x) {
    double s = mass_.row(x).sum();
    if (s > 0.0)
      k.row(x) = mass_.row(x) / s;
    else
      k.row(x) = pz.transpose();
  }
  return Channel(x_, z_, k);
}

Channel JointLaw::x_given_z() const { return transposed().z_given_x(); }

JointLaw JointLaw::transposed() const { return JointLaw(z_, x_, mass_.transpose()); }

double phi_value(const PhiGenerator& phi, double u) { return u == 0.0 ? phi.phi_at_zero : phi.eval(u); }

double phi_entropy(const PhiGenerator& phi, const Vec& f, const Vec& p) {
  Vec terms(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    if (f[i] < 0.0 && !phi.whole_line) throw Error(ErrorCode::Domain, "Φ-entropy needs nonnegative values");
    terms[i] = p[i] == 0.0 ? 0.0 : p[i] * phi_value(phi, f[i]);
  }
  double m = stable_sum(f.cwiseProduct(p));
  return stable_sum(terms) - phi_value(phi, m);
}

double phi_entropy(const PhiGenerator& phi, const FiniteRandomVariable& u) {
  return phi_entropy(phi, u.support, u.law.mass());
}

double phi_divergence_raw(const PhiGenerator& phi, const Vec& nu, const Vec& mu) {
  Vec terms(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) terms[i] = mu[i] * phi_value(phi, nu[i] / mu[i]);
  return stable_sum(terms) - phi.eval(1.0);
}

double phi_divergence(const PhiGenerator& phi, const Dist& nu, const Dist& mu) {
  if (!(nu.alphabet() == mu.alphabet())) throw Error(ErrorCode::AlphabetMismatch, "divergence alphabets differ");
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (!(mu[i] > 0.0))
      throw Error(ErrorCode::NotStrictlyPositive, "reference law vanishes at index " + std::to_string(i));
  return phi_divergence_raw(phi, nu.mass(), mu.mass());
}

double conditional_phi_entropy_mean(const PhiGenerator& phi, const JointLaw& joint, const Vec& f) {
  const Mat& m = joint.mass();
  if (f.size() != m.rows()) throw Error(ErrorCode::AlphabetMismatch, "function length differs from X alphabet");
  Vec terms = Vec::Zero(m.cols());
  for (Eigen::Index z = 0; z < m.cols(); ++z) {
    double pz = m.col(z).sum();
    if (pz <= 0.0) continue;
    Vec cond = m.col(z) / pz;
    terms[z] = pz * phi_entropy(phi, f, cond);
  }
  return stable_sum(terms);
}

double statistical_information(double lambda, const Dist& nu, const Dist& mu) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorCode::Domain, "λ outside [0,1]");
  if (!(nu.alphabet() == mu.alphabet())) throw Error(ErrorCode::AlphabetMismatch, "alphabets differ");
  Vec d = (lambda * nu.mass() - (1.0 - lambda) * mu.mass()).cwiseAbs();
  double v = 0.5 * stable_sum(d) - 0.5 * std::abs(1.0 - 2.0 * lambda);
  // Exact zero at the endpoints and at ν = μ; rounding can leave -1e-17.
  return v < 0.0 ? 0.0 : v;
}

double phi_information(const PhiGenerator& phi, const JointLaw& joint) {
  Dist px = joint.marginal_x();
  Dist pz = joint.marginal_z();
  for (std::size_t i = 0; i < px.size(); ++i)
    if (!(px[i] > 0.0)) throw Error(ErrorCode::NotStrictlyPositive, "X marginal vanishes at " + std::to_string(i));
  for (std::size_t i = 0; i < pz.size(); ++i)
    if (!(pz[i] > 0.0)) throw Error(ErrorCode::NotStrictlyPositive, "Z marginal vanishes at " + std::to_string(i));
  const Mat& m = joint.mass();
  Vec terms(m.rows());
  for (Eigen::Index x = 0; x < m.rows(); ++x) {
    Vec cond = m.row(x).transpose() / px.mass()[x];
    terms[x] = px.mass()[x] * phi_divergence_raw(phi, cond, pz.mass());
  }
  return stable_sum(terms);
}

}  // namespace ck
