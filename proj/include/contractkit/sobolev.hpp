#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "contractkit/contraction.hpp"
#include "contractkit/divergences.hpp"
#include "contractkit/foundation.hpp"

namespace ck {

struct ReversiblePair {
  Dist mu;
  Channel m;
};

// Checks detailed balance and stationarity to 1e-12.
ReversiblePair make_reversible(const Dist& mu, const Channel& m);

struct Factorization {
  Channel k;
  double residual = 0.0;
  std::string strategy;
  bool accepted = false;
};

enum class FactorStrategy { DsbsClosedForm, SpectralSqrt, Parametric };

struct SobolevOptions {
  int starts = 32;
  int max_iters = 500;
  double tol = 1e-9;
  std::uint64_t seed = 0;
};

// E[(f − E[f|Z])(g − E[g|Z])] under the joint law of (X, Z).
double mmse_cov(const JointLaw& joint, const Vec& f, const Vec& g);

// ½ E[(f(X) − f(X′))(g(X) − g(X′))] for X′ ~ M(·|X).
double dirichlet_form(const ReversiblePair& rp, const Vec& f, const Vec& g);

struct PoincareResult {
  double lambda_tilde = 0.0;
  double abs_gap = 0.0;
};

PoincareResult poincare_constant(const ReversiblePair& rp);

struct LsiResult {
  double value = 0.0;
  bool converged = true;
  Vec minimiser;  // empty when the near-constant limit is the answer
};

// p = 0 is exact (λ̃/2); p ∈ {1, 2} is a numeric infimum.
LsiResult log_sobolev_constant(const ReversiblePair& rp, int p, const SobolevOptions& opts = {});

// Residual max |K*K − M| of a candidate channel out of the state space.
double factorization_residual(const ReversiblePair& rp, const Channel& k);

Factorization factor_through(const ReversiblePair& rp,
                             const std::vector<FactorStrategy>& strategies = {FactorStrategy::DsbsClosedForm,
                                                                              FactorStrategy::SpectralSqrt,
                                                                              FactorStrategy::Parametric},
                             std::size_t intermediate_size = 0, std::uint64_t seed = 0);

struct BridgeCheck {
  std::string tag;
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = true;
  bool advisory = false;  // reported, never raises
};

struct BridgeReport {
  double lambda_tilde = 0.0;
  double eta_chi2 = 0.0;
  double eta_kl = 0.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
  std::vector<BridgeCheck> checks;
};

// Throws BRIDGE_VIOLATION when any non-advisory check fails.
BridgeReport sobolev_sdpi_bridge(const ReversiblePair& rp, const Factorization& fact, const PhiGenerator& phi,
                                 const SobolevOptions& sopts = {}, const EtaOptions& eopts = {});

// Ψ-Sobolev pieces used by the bridge and the property tests.
double jensen_gap_residual(const PhiGenerator& phi, const JointLaw& joint, const Vec& f);
double covariance_identity_residual(const PhiGenerator& phi, const Dist& mu, const Vec& f);

// ∇₂⁺f(x) = (Σ M(x′|x)(f(x) − f(x′))₊²)^{1/2}
Vec positive_gradient(const ReversiblePair& rp, const Vec& f);

struct HerbstResult {
  Vec grad;
  double grad_inf_norm = 0.0;
  double mlsi_c = 0.0;
  double subgauss_v = 0.0;      // governs λ ≥ 0
  double subgauss_v_neg = 0.0;  // from ∇₂⁺(−f), governs λ < 0
  bool check = true;            // Λ(λ) ≤ vλ²/2 on the λ grid
  bool tail_check = true;       // P(f − Ef ≥ t) ≤ exp(−t²/2v)
  double worst_slack = 0.0;     // min over grid of vλ²/2 − Λ(λ)
};

HerbstResult herbst(const ReversiblePair& rp, const std::vector<Factorization>& facts, const Vec& f,
                    const EtaOptions& eopts = {}, double lambda_max = 5.0, int grid_points = 201);

}  // namespace ck
