#pragma once

#include <optional>
#include <vector>

#include "contractkit/divergences.hpp"
#include "contractkit/foundation.hpp"

namespace ck {

// Bayes reversal K*(x|y) = K(y|x)μ(x)/μK(y).
Channel adjoint(const AdmissiblePair& pair);

Dist apply(const Channel& k, const Dist& mu);
// (Kf)(x) = Σ_y K(y|x) f(y).
Vec apply_fn(const Channel& k, const Vec& f);

// a ∘ b: first b, then a. Requires b.output == a.input.
Channel compose(const Channel& a, const Channel& b);
// Row-major product alphabet, leftmost factor most significant.
Channel tensor(const Channel& a, const Channel& b);
Dist tensor(const Dist& a, const Dist& b);

// Σ_i p_i (id ⊗ … ⊗ K_i ⊗ … ⊗ id).
Channel mixture_local(const std::vector<Channel>& channels, const Dist& p);

struct Doeblin {
  double alpha = 0.0;
  std::optional<Dist> base;
};

Doeblin doeblin_alpha(const Channel& k);

// K = T ∘ E_α with the erasure symbol appended last in E_α's output.
struct ErasureDecomposition {
  Channel erasure;
  Channel tail;
};
ErasureDecomposition erasure_decomposition(const Channel& k, double alpha);

struct ExchangeablePairLaw {
  JointLaw joint;
  AdmissiblePair source;
};

ExchangeablePairLaw exchangeable_pair(const AdmissiblePair& pair);

}  // namespace ck
