#pragma once

#include "contractkit/foundation.hpp"

namespace ck {

struct FiniteRandomVariable {
  Vec support;
  Dist law;

  FiniteRandomVariable(Vec values, Dist p);
  double mean() const;
  double variance() const;
};

// P(x, z) on a product of two finite alphabets.
class JointLaw {
 public:
  explicit JointLaw(Mat mass);
  JointLaw(Alphabet x, Alphabet z, Mat mass);

  static JointLaw from_pair(const Dist& mu, const Channel& k);  // μ ⊗ K
  static JointLaw product(const Dist& px, const Dist& pz);

  const Alphabet& x_alphabet() const { return x_; }
  const Alphabet& z_alphabet() const { return z_; }
  const Mat& mass() const { return mass_; }

  Dist marginal_x() const;
  Dist marginal_z() const;
  // P_{Z|X}; rows with zero mass get the Z marginal as a placeholder.
  Channel z_given_x() const;
  Channel x_given_z() const;
  JointLaw transposed() const;

 private:
  Alphabet x_;
  Alphabet z_;
  Mat mass_;
};

// Φ evaluated with the stored Φ(0) at the origin.
double phi_value(const PhiGenerator& phi, double u);

double phi_entropy(const PhiGenerator& phi, const FiniteRandomVariable& u);
// Ent_Φ of f under weights p, without building a FiniteRandomVariable.
double phi_entropy(const PhiGenerator& phi, const Vec& f, const Vec& p);

double phi_divergence(const PhiGenerator& phi, const Dist& nu, const Dist& mu);
// Raw vectors; mu must be positive. No validation.
double phi_divergence_raw(const PhiGenerator& phi, const Vec& nu, const Vec& mu);

double conditional_phi_entropy_mean(const PhiGenerator& phi, const JointLaw& joint, const Vec& f);

double statistical_information(double lambda, const Dist& nu, const Dist& mu);

double phi_information(const PhiGenerator& phi, const JointLaw& joint);

}  // namespace ck
