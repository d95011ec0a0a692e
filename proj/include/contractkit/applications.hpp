#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "contractkit/contraction.hpp"
#include "contractkit/divergences.hpp"
#include "contractkit/graph.hpp"
#include "contractkit/sobolev.hpp"

namespace ck {

// ---- mixing times

struct MixingReport {
  std::size_t t_bound = 0;
  double d_star = 0.0;
  // max over starting vertices of D_Φ(δ_x M^t ‖ μ), t = 0..t_bound
  std::vector<double> trajectory;
  std::vector<double> envelope;  // d_star·η^t
  bool dominated = true;
  bool reached = true;  // trajectory[t_bound] ≤ eps
};

double mixing_d_star(const PhiGenerator& phi, const Dist& mu);

MixingReport mixing_time_bound(const PhiGenerator& phi, const ReversiblePair& rp, double eps, double eta);

// ---- fastest mixing chain

struct FmmcResult {
  Channel kernel = Channel::identity(1);
  double value = 0.0;  // squared second-largest |eigenvalue| of the symmetrised kernel
  std::size_t iterations = 0;
  double cert_eigenvalue = 0.0;
  Vec cert_vector;
  double cert_residual = 0.0;
  std::vector<double> history;  // best value after each outer iteration
};

struct FmmcOptions {
  std::size_t subgradient_iters = 400;
  std::size_t polish_iters = 20000;
  double tol = 1e-10;
};

// Self-loops are implicit: the diagonal takes whatever mass the edges leave.
FmmcResult fmmc_solve(const Graph& g, const Dist& mu, const FmmcOptions& opts = {});

// SLEM² of the reversible kernel with edge weights w (w_e = μ(u)K(v|u)).
double fmmc_objective(const Graph& g, const Dist& mu, const Vec& w);

// ---- Potts model

struct GraphModel {
  Graph graph;
  std::size_t q = 2;
  double beta = 0.0;
  // Optional q×q symmetric nonnegative tables, one per edge, replacing
  // exp(β·1{ω = ω′}).
  std::vector<Mat> potentials;
};

constexpr std::size_t kDeskLimit = 4096;

// Configuration index: vertex 0 is the most significant digit.
std::vector<std::size_t> decode_config(std::size_t index, std::size_t q, std::size_t vertices);

Dist gibbs(const GraphModel& gm);

struct PottsKernels {
  Dist gibbs;
  Channel hb;
  Channel sw;
  JointLaw coupling;  // over configurations × edge subsets (bitmask order)
  Channel y_given_x;
  Channel x_given_y;
};

PottsKernels potts_kernels(const GraphModel& gm);

struct SwHbReport {
  std::size_t max_degree = 0;
  double eta_hb = 0.0;
  double eta_sw = 0.0;
  double our_bound = 1.0;
  std::optional<double> ullrich_bound;  // χ² only
  bool sw_within_ours = true;
  bool ours_below_ullrich = true;
  bool converged = true;
};

double sw_bound(std::size_t q, double beta, std::size_t delta, double eta_hb);
double ullrich_bound(std::size_t q, double beta, std::size_t delta, double eta_hb);

SwHbReport sw_hb_compare(const GraphModel& gm, const PhiGenerator& phi, const EtaOptions& opts = {});

// ---- Φ-information contraction

struct InfoSupReport {
  double sup_estimate = 0.0;
  double eta_reference = 0.0;
  double gap = 0.0;  // eta_reference − sup_estimate
  std::string best_source;
  bool consistent = true;  // sup_estimate ≤ eta_reference + 1e-6
};

// I_Φ(U;X) for U with law pu and conditionals rows of x_given_u.
double phi_information_mixture(const PhiGenerator& phi, const Vec& pu, const Mat& x_given_u, const Dist& px);

// eps_grid entries are fractions of the largest admissible ε for each Q_X.
InfoSupReport info_contraction_sup(const PhiGenerator& phi, const JointLaw& joint, std::size_t samples = 200,
                                   const std::vector<double>& eps_grid = {},
                                   const EtaOptions& opts = {});

// ---- reconstruction and correlation decay

struct SpatialConstants {
  double C = 1.0;
  double c = 1.0;
};

struct ReconstructionReport {
  double info = 0.0;       // I_Φ(X_A; X_B)
  double info_chi2 = 0.0;  // I_χ²(X_A; X_B)
  double s_squared = 0.0;  // S²(P_A, P_{B|A})
  std::size_t distance = 0;
  bool reachable = true;
  double eta_ab = 0.0;
  double eta_ba = 0.0;
  double product_lower = 0.0;  // max of the two Gibbs-sampler ratios
  bool product_holds = true;
  std::optional<double> spatial_bound;
  std::optional<double> spatial_eta;  // KL η of P_{B|∂R}, R = V \ A
  std::vector<std::size_t> boundary;
};

JointLaw marginal_joint(const GraphModel& gm, const Dist& gibbs_law, const std::vector<std::size_t>& a,
                        const std::vector<std::size_t>& b);

ReconstructionReport reconstruction_report(const GraphModel& gm, const std::vector<std::size_t>& a,
                                           const std::vector<std::size_t>& b, const PhiGenerator& phi,
                                           const std::optional<SpatialConstants>& constants = std::nullopt,
                                           const EtaOptions& opts = {});

}  // namespace ck
