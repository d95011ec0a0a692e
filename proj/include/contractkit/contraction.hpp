#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "contractkit/channel_algebra.hpp"
#include "contractkit/foundation.hpp"
#include "contractkit/graph.hpp"

namespace ck {

struct EtaOptions {
  int starts = 16;
  int max_iters = 500;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  // Empty means the default 33-point Chebyshev grid.
  std::vector<double> lambda_grid;
  // The operator-convex cap needs a λ sweep of full η estimates; callers
  // that only want the estimate can switch it off.
  bool opconv_cap = true;
};

struct BoundEntry {
  std::string tag;
  double value = 0.0;
  bool applicable = false;
  std::string reason;
};

struct EtaReport {
  std::string phi_name;
  double estimate = 0.0;
  bool converged = true;
  std::optional<Dist> witness;
  std::vector<BoundEntry> lower_bounds;
  std::vector<BoundEntry> upper_bounds;

  double max_lower() const;
  double min_upper() const;  // over applicable entries, 1 if none
  const BoundEntry* find(const std::string& tag) const;
};

struct ExtremalSolution {
  Vec f;
  double eta = 0.0;
  double residual = 0.0;
  bool trivial = false;   // maximiser collapsed to f ≡ 1, η = S²
  bool boundary = false;  // f vanishes somewhere; stationarity is one-sided there
  bool converged = true;
};

struct Chi2Result {
  double eta = 0.0;
  double s = 0.0;
  Vec input_direction;  // zero-mean direction g with νK ratio attaining s²
};

double dobrushin(const Channel& k);

Chi2Result eta_chi2(const AdmissiblePair& pair);

// D_Φ(νK‖μK)/D_Φ(ν‖μ); NaN when ν = μ.
double contraction_ratio(const PhiGenerator& phi, const AdmissiblePair& pair, const Vec& nu);

// Ent_Φ[K*f(Y)] / Ent_Φ[f(X)] for a nonnegative f on the input alphabet.
double functional_ratio(const PhiGenerator& phi, const AdmissiblePair& pair, const Vec& f);

struct AscentResult {
  double value = 0.0;
  Vec nu;
  bool converged = true;
};

// Multi-start ascent of the contraction ratio without the bound ladder.
AscentResult eta_ascent(const PhiGenerator& phi, const AdmissiblePair& pair, const EtaOptions& opts);

EtaReport eta_numeric(const PhiGenerator& phi, const AdmissiblePair& pair, const EtaOptions& opts = {});

double eta_lc_sup(const AdmissiblePair& pair, const std::vector<double>& lambda_grid, const EtaOptions& opts = {});

// max(s², sup over λ of η for Le Cam λ): grid sweep plus golden-section
// refinement around the best node.
double opconv_cap(const AdmissiblePair& pair, const EtaOptions& opts = {});

EtaReport eta_bounds(const PhiGenerator& phi, const AdmissiblePair& pair, const EtaOptions& opts = {});

// c(p) = (p − p̄)/(2(log p − log p̄)), 1/4 at p = 1/2.
double pinsker_constant(double p);

struct Balance {
  double beta = 0.5;
  bool exact = true;
};
Balance balance_coefficient(const Dist& mu);

double transport_bound(const AdmissiblePair& pair);

struct GraphWalk {
  double bound = 0.0;
  AdmissiblePair pair;
};

Channel graph_walk_channel(const Graph& g, double epsilon);
GraphWalk graph_rw_bound(const Graph& g, double epsilon);

double comparison_bound(const PhiGenerator& phi, const AdmissiblePair& pair, const AdmissiblePair& ref_pair,
                        double ref_eta);

struct TensorizationReport {
  std::vector<double> component_eta;
  double component_max = 0.0;
  double product_eta_bound = 0.0;
  std::optional<double> mixture_bound;
  // χ² only: explicit spectral value of the product pair.
  std::optional<double> chi2_product_eta;
};

TensorizationReport tensorization_check(const PhiGenerator& phi, const std::vector<AdmissiblePair>& pairs,
                                        const std::optional<Dist>& mixture_weights = std::nullopt,
                                        const EtaOptions& opts = {});

// Max-abs violation of K(Φ′∘K*f) − Φ′(1) = η(Φ′∘f − Φ′(1)).
double variational_residual(const PhiGenerator& phi, const AdmissiblePair& pair, const Vec& f, double eta);

ExtremalSolution extremal_solve(const PhiGenerator& phi, const AdmissiblePair& pair, double eta_hint,
                                const EtaOptions& opts = {});

}  // namespace ck
