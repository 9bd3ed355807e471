#pragma once

// AR(1)-EGARCH(1,1) standardization:
//   R_t = a0 + a1 R_{t-1} + sigma_t Z_t
//   log sigma_{t+1} = b0 + b1 log sigma_t + b2 Z_t + b3 |Z_t|

#include "dfc/common.hpp"
#include "dfc/optim.hpp"

#include <cstdint>

namespace dfc {

struct EgarchParams {
  double a0 = 0.0, a1 = 0.0;
  double b0 = 0.0, b1 = 0.0, b2 = 0.0, b3 = 0.0;
  void validate() const;
};

struct EgarchFilter {
  Vector z;
  Vector sigma;
  double loglik = 0.0;  // Gaussian quasi-likelihood
};

// sigma_1 starts at exp((b0 + b3 sqrt(2/pi)) / (1 - b1)); R_0 at a0 / (1 - a1).
EgarchFilter egarch_filter(const Vector& returns, const EgarchParams& p);

struct EgarchFit {
  EgarchParams params;
  EgarchFilter filter;
  BfgsResult optim;
};

EgarchFit egarch_fit(const Vector& returns, const BfgsOptions& opt = {});

// Returns generated by the recursion from given standardized innovations.
Vector egarch_returns(const EgarchParams& p, const Vector& z, Vector* sigma = nullptr);

// Simulates with Gaussian innovations.
Vector egarch_simulate(const EgarchParams& p, Index T, std::uint64_t seed, Vector* sigma = nullptr);

}  // namespace dfc
