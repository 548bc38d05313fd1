#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tsrnn/features.hpp"
#include "tsrnn/numeric.hpp"

namespace tsrnn {

enum class CellKind { Lstm, Gru };
enum class OutputActivation { Linear, Exponential };

std::string to_string(CellKind kind);
CellKind parse_cell_kind(const std::string& text);

// Gate order inside the parameter layout.
enum class LstmGate : std::size_t { Input = 0, Forget = 1, Output = 2, Candidate = 3 };
enum class GruGate : std::size_t { Update = 0, Reset = 1, Candidate = 2 };

std::size_t gate_count(CellKind kind);

struct ModelShape {
  CellKind cell = CellKind::Lstm;
  OutputActivation activation = OutputActivation::Linear;
  std::size_t n_features = 0;
  std::size_t units = 32;
  std::size_t seq_len = 16;
  double dropout = 0.5;  // drop probability on the input connections

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

// One recurrent layer followed by a single dense output unit.
//
// Parameter layout for G gates (G = 4 for LSTM, 3 for GRU):
//   [0, G)     input weights W_g   (units x n_features)
//   [G, 2G)    recurrent weights U_g (units x units)
//   [2G, 3G)   biases b_g          (units x 1)
//   3G         dense weights       (1 x units)
//   3G + 1     dense bias          (1 x 1)
struct RnnModel {
  ModelShape shape;
  std::vector<Matrix> params;

  std::size_t gates() const { return gate_count(shape.cell); }
  Matrix& w(std::size_t gate) { return params[gate]; }
  const Matrix& w(std::size_t gate) const { return params[gate]; }
  Matrix& u(std::size_t gate) { return params[gates() + gate]; }
  const Matrix& u(std::size_t gate) const { return params[gates() + gate]; }
  Matrix& b(std::size_t gate) { return params[2 * gates() + gate]; }
  const Matrix& b(std::size_t gate) const { return params[2 * gates() + gate]; }
  Matrix& dense_w() { return params[3 * gates()]; }
  const Matrix& dense_w() const { return params[3 * gates()]; }
  double& dense_b() { return params[3 * gates() + 1](0, 0); }
  double dense_b() const { return params[3 * gates() + 1](0, 0); }
};

// All-zero parameters of the right shapes.
RnnModel zero_model(const ModelShape& shape);
// Same shapes as `model`, all zero; used for gradient accumulators.
std::vector<Matrix> zero_like(const std::vector<Matrix>& params);
std::vector<std::string> parameter_names(const ModelShape& shape);

// Glorot-uniform weights, zero biases except the LSTM forget bias (1.0).
RnnModel init_params(Rng& rng, const ModelShape& shape);

struct CellState {
  std::vector<double> h;
  std::vector<double> c;  // LSTM only
};

CellState zero_state(const ModelShape& shape);

struct LstmGates {
  std::vector<double> input, forget, output, candidate;
};

struct GruGates {
  std::vector<double> update, reset, candidate;
};

CellState lstm_step(const RnnModel& model, std::span<const double> x, const CellState& prev,
                    LstmGates* gates = nullptr);
CellState gru_step(const RnnModel& model, std::span<const double> x, const CellState& prev,
                   GruGates* gates = nullptr);

// Everything backward() needs from a forward pass.
struct ForwardCache {
  std::size_t steps = 0;
  std::vector<double> x;      // masked inputs, steps x n_features
  std::vector<double> gates;  // steps x G x units, post-activation
  std::vector<double> c;      // LSTM: steps x units
  std::vector<double> tanh_c; // LSTM: steps x units
  std::vector<double> reset_h;  // GRU: r_t * h_{t-1}, steps x units
  std::vector<double> h;      // steps x units
  double pre_output = 0.0;
  double output = 0.0;
  bool valid = false;
};

// Unrolls the cell from a zero state and applies the dense unit to the final
// hidden state. `mask`, when non-empty, multiplies every input vector of the
// window (inverted dropout: entries are 0 or 1/keep).
double forward(const RnnModel& model, std::span<const double> window,
               std::span<const double> mask = {}, ForwardCache* cache = nullptr);

// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(output).
void backward(const RnnModel& model, const ForwardCache& cache, double d_output,
              std::vector<Matrix>& grads);

// Forward pass for every window of a batch, inference mode.
std::vector<double> predict(const RnnModel& model, const SequenceBatch& batch);

// Checkpoint file: header (magic, cell kind, sizes, dropout, scaler states),
// then every parameter tensor in layout order. All numbers little-endian.
void save_model(const std::filesystem::path& path, const RnnModel& model, const FrameScalers& scalers);
RnnModel load_model(const std::filesystem::path& path, FrameScalers* scalers = nullptr);

}  // namespace tsrnn
