#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "contractkit/error.hpp"

namespace ck {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kSimplexTol = 1e-12;

struct Alphabet {
  std::size_t size = 1;
  std::vector<std::string> labels;

  Alphabet() = default;
  explicit Alphabet(std::size_t n, std::vector<std::string> names = {});

  // Labels only participate when both sides carry them.
  bool operator==(const Alphabet& o) const;
};

class Dist {
 public:
  explicit Dist(Vec mass);
  Dist(Alphabet alphabet, Vec mass);

  static Dist bern(double p);  // P(X = 1) = p
  static Dist uniform(std::size_t n);
  static Dist point(std::size_t n, std::size_t i);

  const Alphabet& alphabet() const { return alphabet_; }
  const Vec& mass() const { return mass_; }
  std::size_t size() const { return alphabet_.size; }
  double operator[](std::size_t i) const { return mass_[static_cast<Eigen::Index>(i)]; }
  bool strictly_positive() const { return strictly_positive_; }
  double min_mass() const { return mass_.minCoeff(); }

 private:
  Alphabet alphabet_;
  Vec mass_;
  bool strictly_positive_ = false;
};

// Row-stochastic matrix K(y|x), one row per input symbol.
class Channel {
 public:
  explicit Channel(Mat rows);
  Channel(Alphabet input, Alphabet output, Mat rows);

  static Channel bsc(double eps);
  static Channel identity(std::size_t n);
  static Channel constant(const Dist& out, std::size_t inputs);

  const Alphabet& input() const { return input_; }
  const Alphabet& output() const { return output_; }
  const Mat& rows() const { return rows_; }
  std::size_t inputs() const { return input_.size; }
  std::size_t outputs() const { return output_.size; }
  double operator()(std::size_t x, std::size_t y) const {
    return rows_(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
  }

 private:
  Alphabet input_;
  Alphabet output_;
  Mat rows_;
};

struct AdmissiblePair {
  Dist mu;
  Channel k;
  Dist output_law;
};

AdmissiblePair validate_admissible(const Dist& mu, const Channel& k);

struct PhiFlags {
  bool operator_convex = false;
  bool subadditive_class_C = false;
  bool strictly_convex_at_1 = false;
};

using ScalarFn = std::function<double(double)>;

struct PhiGenerator {
  std::string name;
  ScalarFn eval;
  ScalarFn deriv1;  // empty when Φ is not differentiable
  ScalarFn deriv2;
  ScalarFn deriv3;
  double phi_at_zero = 0.0;  // may be +inf
  bool whole_line = false;   // Φ defined on all of ℝ (χ²)
  ScalarFn psi_fn;           // optional closed form of (Φ(u) − Φ(0))/u
  ScalarFn kappa;            // Ent_Φ[cU] = κ(c) Ent_Φ[U] when present
  PhiFlags flags;
  std::vector<std::string> warnings;  // failed spot checks on declared flags

  double operator()(double u) const { return eval(u); }
  double psi(double u) const;
  double d1(double u) const;
  double d2(double u) const;
  double d3(double u) const;
  bool differentiable() const { return static_cast<bool>(deriv1); }
  bool has_kappa() const { return static_cast<bool>(kappa); }
  bool finite_at_zero() const;
  // Hypotheses of the s² lower bound: C³ with Φ''(1) > 0.
  bool chi2_floor_applies() const;
};

PhiGenerator phi_kl();
PhiGenerator phi_chi2();
PhiGenerator phi_tv();
PhiGenerator phi_hellinger();
PhiGenerator phi_lecam(double lambda);
PhiGenerator phi_alpha(double p);

// kl, chi2, tv, hellinger, lecam:<λ>, alpha:<p>
PhiGenerator phi_from_name(const std::string& spec);

// User-supplied generator; declared flags are spot-checked and failures
// land in `warnings`.
PhiGenerator make_generator(std::string name, ScalarFn eval, double phi_at_zero, PhiFlags flags,
                            ScalarFn d1 = {}, ScalarFn d2 = {}, ScalarFn d3 = {},
                            ScalarFn kappa = {});

std::vector<std::string> spot_check(const PhiGenerator& phi);

enum class PhiOrder { Value, First, Second, Psi };
double phi_eval(const PhiGenerator& phi, double u, PhiOrder order);

// Grid checks on u in [1e-3, 1e3].
bool psi_concave(const PhiGenerator& phi);
bool second_derivative_nonincreasing(const PhiGenerator& phi);

}  // namespace ck
