#pragma once

#include <cstdint>

#include "tsrnn/recurrent.hpp"

namespace tsrnn::testing {

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

// Central finite differences (eps 1e-5) on every parameter of one random
// instance. Linear output uses 1/2 (y_hat - y)^2; exponential output uses
// the noise-variance loss 1/2 (ln s + r2 / s).
GradCheck gradient_check(CellKind cell, OutputActivation activation, std::uint64_t seed,
                         std::size_t units = 4, std::size_t seq_len = 5, std::size_t n_features = 3,
                         bool with_mask = true);

// Max |difference| between lstm_step/gru_step and a scalar evaluation of
// the gate equations on one random instance (random params, input, state).
double lstm_oracle_error(std::uint64_t seed);
double gru_oracle_error(std::uint64_t seed);

}  // namespace tsrnn::testing
