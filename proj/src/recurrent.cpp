#include "tsrnn/recurrent.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "tsrnn/errors.hpp"

namespace tsrnn {

std::string to_string(CellKind kind) { return kind == CellKind::Lstm ? "LSTM" : "GRU"; }

CellKind parse_cell_kind(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::toupper(c); });
  if (t == "LSTM") return CellKind::Lstm;
  if (t == "GRU") return CellKind::Gru;
  throw ConfigError("unknown cell kind '" + text + "' (expected LSTM or GRU)");
}

std::size_t gate_count(CellKind kind) { return kind == CellKind::Lstm ? 4 : 3; }

RnnModel zero_model(const ModelShape& shape) {
  if (shape.n_features == 0 || shape.units == 0 || shape.seq_len == 0) {
    throw ConfigError("model sizes must be positive");
  }
  if (!(shape.dropout >= 0.0 && shape.dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  RnnModel model;
  model.shape = shape;
  const std::size_t g = gate_count(shape.cell);
  for (std::size_t i = 0; i < g; ++i) model.params.emplace_back(shape.units, shape.n_features);
  for (std::size_t i = 0; i < g; ++i) model.params.emplace_back(shape.units, shape.units);
  for (std::size_t i = 0; i < g; ++i) model.params.emplace_back(shape.units, 1);
  model.params.emplace_back(1, shape.units);
  model.params.emplace_back(1, 1);
  return model;
}

std::vector<Matrix> zero_like(const std::vector<Matrix>& params) {
  std::vector<Matrix> out;
  out.reserve(params.size());
  for (const auto& p : params) out.emplace_back(p.rows(), p.cols());
  return out;
}

std::vector<std::string> parameter_names(const ModelShape& shape) {
  static const char* kLstm[] = {"i", "f", "o", "c"};
  static const char* kGru[] = {"z", "r", "h"};
  const std::size_t g = gate_count(shape.cell);
  const char** tags = shape.cell == CellKind::Lstm ? kLstm : kGru;
  std::vector<std::string> names;
  for (const char* prefix : {"W_", "U_", "b_"}) {
    for (std::size_t i = 0; i < g; ++i) names.push_back(std::string(prefix) + tags[i]);
  }
  names.push_back("dense_w");
  names.push_back("dense_b");
  return names;
}

namespace {

void glorot_uniform(Rng& rng, Matrix& m, std::size_t fan_in, std::size_t fan_out) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : m.values()) v = rng.uniform(-limit, limit);
}

}  // namespace

RnnModel init_params(Rng& rng, const ModelShape& shape) {
  RnnModel model = zero_model(shape);
  const std::size_t g = model.gates();
  for (std::size_t i = 0; i < g; ++i) glorot_uniform(rng, model.w(i), shape.n_features, shape.units);
  for (std::size_t i = 0; i < g; ++i) glorot_uniform(rng, model.u(i), shape.units, shape.units);
  glorot_uniform(rng, model.dense_w(), shape.units, 1);
  if (shape.cell == CellKind::Lstm) {
    model.b(static_cast<std::size_t>(LstmGate::Forget)).fill(1.0);
  }
  return model;
}

CellState zero_state(const ModelShape& shape) {
  CellState s;
  s.h.assign(shape.units, 0.0);
  if (shape.cell == CellKind::Lstm) s.c.assign(shape.units, 0.0);
  return s;
}

namespace {

// pre[j] = b[j] + W[j,:] . x + U[j,:] . h
inline double affine(const Matrix& w, const Matrix& u, const Matrix& b, std::size_t j,
                     const double* x, const double* h) {
  double sum = b(j, 0);
  const double* wr = &w(j, 0);
  for (std::size_t k = 0; k < w.cols(); ++k) sum += wr[k] * x[k];
  const double* ur = &u(j, 0);
  for (std::size_t k = 0; k < u.cols(); ++k) sum += ur[k] * h[k];
  return sum;
}

// gates: G x H block (input, forget, output, candidate).
void lstm_kernel(const RnnModel& m, const double* x, const double* h_prev, const double* c_prev,
                 double* gates, double* c, double* tanh_c, double* h) {
  const std::size_t units = m.shape.units;
  double* gi = gates;
  double* gf = gates + units;
  double* go = gates + 2 * units;
  double* gc = gates + 3 * units;
  for (std::size_t j = 0; j < units; ++j) {
    gi[j] = sigmoid(affine(m.w(0), m.u(0), m.b(0), j, x, h_prev));
    gf[j] = sigmoid(affine(m.w(1), m.u(1), m.b(1), j, x, h_prev));
    go[j] = sigmoid(affine(m.w(2), m.u(2), m.b(2), j, x, h_prev));
    gc[j] = std::tanh(affine(m.w(3), m.u(3), m.b(3), j, x, h_prev));
  }
  for (std::size_t j = 0; j < units; ++j) {
    c[j] = gf[j] * c_prev[j] + gi[j] * gc[j];
    tanh_c[j] = std::tanh(c[j]);
    h[j] = go[j] * tanh_c[j];
  }
}

// gates: G x H block (update, reset, candidate).
void gru_kernel(const RnnModel& m, const double* x, const double* h_prev, double* gates,
                double* reset_h, double* h) {
  const std::size_t units = m.shape.units;
  double* gz = gates;
  double* gr = gates + units;
  double* gn = gates + 2 * units;
  for (std::size_t j = 0; j < units; ++j) {
    gz[j] = sigmoid(affine(m.w(0), m.u(0), m.b(0), j, x, h_prev));
    gr[j] = sigmoid(affine(m.w(1), m.u(1), m.b(1), j, x, h_prev));
  }
  for (std::size_t j = 0; j < units; ++j) reset_h[j] = gr[j] * h_prev[j];
  for (std::size_t j = 0; j < units; ++j) {
    gn[j] = std::tanh(affine(m.w(2), m.u(2), m.b(2), j, x, reset_h));
  }
  for (std::size_t j = 0; j < units; ++j) h[j] = gz[j] * h_prev[j] + (1.0 - gz[j]) * gn[j];
}

void check_step_shapes(const RnnModel& model, std::span<const double> x, const CellState& prev) {
  if (x.size() != model.shape.n_features) throw ShapeError("input vector does not match n_features");
  if (prev.h.size() != model.shape.units) throw ShapeError("hidden state does not match units");
  if (model.shape.cell == CellKind::Lstm && prev.c.size() != model.shape.units) {
    throw ShapeError("cell state does not match units");
  }
}

}  // namespace

CellState lstm_step(const RnnModel& model, std::span<const double> x, const CellState& prev,
                    LstmGates* gates) {
  if (model.shape.cell != CellKind::Lstm) throw ShapeError("lstm_step on a non-LSTM model");
  check_step_shapes(model, x, prev);
  const std::size_t units = model.shape.units;
  std::vector<double> g(4 * units);
  std::vector<double> tanh_c(units);
  CellState next = zero_state(model.shape);
  lstm_kernel(model, x.data(), prev.h.data(), prev.c.data(), g.data(), next.c.data(), tanh_c.data(),
              next.h.data());
  if (gates) {
    gates->input.assign(g.begin(), g.begin() + units);
    gates->forget.assign(g.begin() + units, g.begin() + 2 * units);
    gates->output.assign(g.begin() + 2 * units, g.begin() + 3 * units);
    gates->candidate.assign(g.begin() + 3 * units, g.end());
  }
  return next;
}

CellState gru_step(const RnnModel& model, std::span<const double> x, const CellState& prev,
                   GruGates* gates) {
  if (model.shape.cell != CellKind::Gru) throw ShapeError("gru_step on a non-GRU model");
  check_step_shapes(model, x, prev);
  const std::size_t units = model.shape.units;
  std::vector<double> g(3 * units);
  std::vector<double> reset_h(units);
  CellState next = zero_state(model.shape);
  gru_kernel(model, x.data(), prev.h.data(), g.data(), reset_h.data(), next.h.data());
  if (gates) {
    gates->update.assign(g.begin(), g.begin() + units);
    gates->reset.assign(g.begin() + units, g.begin() + 2 * units);
    gates->candidate.assign(g.begin() + 2 * units, g.end());
  }
  return next;
}

double forward(const RnnModel& model, std::span<const double> window, std::span<const double> mask,
               ForwardCache* cache) {
  const ModelShape& s = model.shape;
  const std::size_t steps = s.seq_len;
  const std::size_t nf = s.n_features;
  const std::size_t units = s.units;
  const std::size_t g = model.gates();
  if (window.size() != steps * nf) throw ShapeError("window size does not match seq_len x n_features");
  if (!mask.empty() && mask.size() != nf) throw ShapeError("dropout mask does not match n_features");

  ForwardCache local;
  ForwardCache& fc = cache ? *cache : local;
  fc.steps = steps;
  fc.x.resize(steps * nf);
  fc.gates.resize(steps * g * units);
  fc.h.resize(steps * units);
  if (s.cell == CellKind::Lstm) {
    fc.c.resize(steps * units);
    fc.tanh_c.resize(steps * units);
  } else {
    fc.reset_h.resize(steps * units);
  }

  const std::vector<double> zeros(units, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    double* x = fc.x.data() + t * nf;
    const double* src = window.data() + t * nf;
    if (mask.empty()) {
      std::copy(src, src + nf, x);
    } else {
      for (std::size_t k = 0; k < nf; ++k) x[k] = src[k] * mask[k];
    }
    const double* h_prev = t == 0 ? zeros.data() : fc.h.data() + (t - 1) * units;
    double* gates = fc.gates.data() + t * g * units;
    double* h = fc.h.data() + t * units;
    if (s.cell == CellKind::Lstm) {
      const double* c_prev = t == 0 ? zeros.data() : fc.c.data() + (t - 1) * units;
      lstm_kernel(model, x, h_prev, c_prev, gates, fc.c.data() + t * units,
                  fc.tanh_c.data() + t * units, h);
    } else {
      gru_kernel(model, x, h_prev, gates, fc.reset_h.data() + t * units, h);
    }
  }

  const double* h_last = fc.h.data() + (steps - 1) * units;
  double pre = model.dense_b();
  const double* dw = &model.dense_w()(0, 0);
  for (std::size_t j = 0; j < units; ++j) pre += dw[j] * h_last[j];
  fc.pre_output = pre;
  fc.output = s.activation == OutputActivation::Exponential ? std::exp(pre) : pre;
  fc.valid = true;
  return fc.output;
}

namespace {

// grads[W_g] += da_g x^T ; grads[U_g] += da_g h^T ; grads[b_g] += da_g
void accumulate_gate(std::vector<Matrix>& grads, std::size_t gates, std::size_t gate,
                     const double* da, const double* x, std::size_t nf, const double* h_in,
                     std::size_t units) {
  Matrix& gw = grads[gate];
  Matrix& gu = grads[gates + gate];
  Matrix& gb = grads[2 * gates + gate];
  for (std::size_t j = 0; j < units; ++j) {
    const double d = da[j];
    if (d == 0.0) continue;
    double* wr = &gw(j, 0);
    for (std::size_t k = 0; k < nf; ++k) wr[k] += d * x[k];
    double* ur = &gu(j, 0);
    for (std::size_t k = 0; k < units; ++k) ur[k] += d * h_in[k];
    gb(j, 0) += d;
  }
}

// out[k] += sum_j U(j,k) da[j]
void add_transpose_product(const Matrix& u, const double* da, double* out) {
  for (std::size_t j = 0; j < u.rows(); ++j) {
    const double d = da[j];
    if (d == 0.0) continue;
    const double* ur = &u(j, 0);
    for (std::size_t k = 0; k < u.cols(); ++k) out[k] += ur[k] * d;
  }
}

}  // namespace

void backward(const RnnModel& model, const ForwardCache& cache, double d_output,
              std::vector<Matrix>& grads) {
  if (!cache.valid) throw NumericalError("backward called without a forward cache");
  if (grads.size() != model.params.size()) throw ShapeError("gradient buffer does not match the model");
  const ModelShape& s = model.shape;
  const std::size_t steps = cache.steps;
  const std::size_t nf = s.n_features;
  const std::size_t units = s.units;
  const std::size_t g = model.gates();

  const double d_pre =
      s.activation == OutputActivation::Exponential ? d_output * cache.output : d_output;
  if (d_pre == 0.0) return;

  const double* h_last = cache.h.data() + (steps - 1) * units;
  double* gdw = &grads[3 * g](0, 0);
  for (std::size_t j = 0; j < units; ++j) gdw[j] += d_pre * h_last[j];
  grads[3 * g + 1](0, 0) += d_pre;

  std::vector<double> dh(units);
  for (std::size_t j = 0; j < units; ++j) dh[j] = d_pre * model.dense_w()(0, j);
  std::vector<double> dh_prev(units);
  std::vector<double> da(g * units);
  const std::vector<double> zeros(units, 0.0);

  if (s.cell == CellKind::Lstm) {
    std::vector<double> dc(units, 0.0);
    std::vector<double> dc_prev(units);
    for (std::size_t t = steps; t-- > 0;) {
      const double* gates = cache.gates.data() + t * g * units;
      const double* gi = gates;
      const double* gf = gates + units;
      const double* go = gates + 2 * units;
      const double* gc = gates + 3 * units;
      const double* tanh_c = cache.tanh_c.data() + t * units;
      const double* c_prev = t == 0 ? zeros.data() : cache.c.data() + (t - 1) * units;
      const double* h_prev = t == 0 ? zeros.data() : cache.h.data() + (t - 1) * units;
      const double* x = cache.x.data() + t * nf;
      for (std::size_t j = 0; j < units; ++j) {
        const double d_o = dh[j] * tanh_c[j];
        const double dcj = dc[j] + dh[j] * go[j] * (1.0 - tanh_c[j] * tanh_c[j]);
        const double d_i = dcj * gc[j];
        const double d_c = dcj * gi[j];
        const double d_f = dcj * c_prev[j];
        dc_prev[j] = dcj * gf[j];
        da[j] = d_i * gi[j] * (1.0 - gi[j]);
        da[units + j] = d_f * gf[j] * (1.0 - gf[j]);
        da[2 * units + j] = d_o * go[j] * (1.0 - go[j]);
        da[3 * units + j] = d_c * (1.0 - gc[j] * gc[j]);
      }
      std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
      for (std::size_t gate = 0; gate < g; ++gate) {
        accumulate_gate(grads, g, gate, da.data() + gate * units, x, nf, h_prev, units);
        add_transpose_product(model.u(gate), da.data() + gate * units, dh_prev.data());
      }
      dh.swap(dh_prev);
      dc.swap(dc_prev);
    }
    return;
  }

  std::vector<double> d_reset_h(units);
  for (std::size_t t = steps; t-- > 0;) {
    const double* gates = cache.gates.data() + t * g * units;
    const double* gz = gates;
    const double* gr = gates + units;
    const double* gn = gates + 2 * units;
    const double* h_prev = t == 0 ? zeros.data() : cache.h.data() + (t - 1) * units;
    const double* reset_h = cache.reset_h.data() + t * units;
    const double* x = cache.x.data() + t * nf;
    double* da_z = da.data();
    double* da_r = da.data() + units;
    double* da_n = da.data() + 2 * units;
    for (std::size_t j = 0; j < units; ++j) {
      const double dz = dh[j] * (h_prev[j] - gn[j]);
      const double dn = dh[j] * (1.0 - gz[j]);
      dh_prev[j] = dh[j] * gz[j];
      da_n[j] = dn * (1.0 - gn[j] * gn[j]);
      da_z[j] = dz * gz[j] * (1.0 - gz[j]);
    }
    accumulate_gate(grads, g, static_cast<std::size_t>(GruGate::Candidate), da_n, x, nf, reset_h, units);
    std::fill(d_reset_h.begin(), d_reset_h.end(), 0.0);
    add_transpose_product(model.u(2), da_n, d_reset_h.data());
    for (std::size_t k = 0; k < units; ++k) {
      const double dr = d_reset_h[k] * h_prev[k];
      dh_prev[k] += d_reset_h[k] * gr[k];
      da_r[k] = dr * gr[k] * (1.0 - gr[k]);
    }
    accumulate_gate(grads, g, static_cast<std::size_t>(GruGate::Update), da_z, x, nf, h_prev, units);
    accumulate_gate(grads, g, static_cast<std::size_t>(GruGate::Reset), da_r, x, nf, h_prev, units);
    add_transpose_product(model.u(0), da_z, dh_prev.data());
    add_transpose_product(model.u(1), da_r, dh_prev.data());
    dh.swap(dh_prev);
  }
}

std::vector<double> predict(const RnnModel& model, const SequenceBatch& batch) {
  if (batch.seq_len != model.shape.seq_len || batch.n_features != model.shape.n_features) {
    throw ShapeError("batch shape does not match the model");
  }
  std::vector<double> out(batch.size());
  ForwardCache cache;
  for (std::size_t w = 0; w < batch.size(); ++w) out[w] = forward(model, batch.window(w), {}, &cache);
  return out;
}

}  // namespace tsrnn
