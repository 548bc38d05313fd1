#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <string>

#include "tsrnn/errors.hpp"
#include "tsrnn/recurrent.hpp"

// Layout (all integers unsigned little-endian, reals IEEE-754 binary64 LE):
//   char[8]  "TSRNNCK1"
//   u32      format version (1)
//   u32      cell kind (0 LSTM, 1 GRU)
//   u32      output activation (0 linear, 1 exponential)
//   u64      n_features, units, seq_len
//   f64      dropout
//   scaler block x2 (features, target):
//     u32 kind (0 minmax, 1 standard), u64 count,
//     count x { u64 name length, name bytes, f64 first, f64 second }
//   u64      tensor count
//   per tensor: u64 rows, u64 cols, rows*cols f64 row-major

namespace tsrnn {

namespace {

constexpr char kMagic[8] = {'T', 'S', 'R', 'N', 'N', 'C', 'K', '1'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}
  void u32(std::uint32_t v) { bytes(v, 4); }
  void u64(std::uint64_t v) { bytes(v, 8); }
  void f64(double v) { bytes(std::bit_cast<std::uint64_t>(v), 8); }
  void str(const std::string& s) {
    u64(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  void bytes(std::uint64_t v, int n) {
    char buf[8];
    for (int i = 0; i < n; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out_.write(buf, n);
  }
  std::ofstream& out_;
};

class Reader {
 public:
  Reader(std::ifstream& in, std::string path) : in_(in), path_(std::move(path)) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(bytes(4)); }
  std::uint64_t u64() { return bytes(8); }
  double f64() { return std::bit_cast<double>(bytes(8)); }
  std::string str() {
    const std::uint64_t n = u64();
    if (n > (1u << 20)) fail("implausible string length");
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    if (!in_) fail("truncated file");
    return s;
  }
  [[noreturn]] void fail(const std::string& why) const {
    throw DataError("bad checkpoint " + path_ + ": " + why);
  }

 private:
  std::uint64_t bytes(int n) {
    unsigned char buf[8];
    in_.read(reinterpret_cast<char*>(buf), n);
    if (!in_) fail("truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  std::ifstream& in_;
  std::string path_;
};

void write_scaler(Writer& w, const ScalerState& s) {
  w.u32(s.kind == ScalerKind::MinMax ? 0 : 1);
  w.u64(s.names.size());
  for (std::size_t i = 0; i < s.names.size(); ++i) {
    w.str(s.names[i]);
    w.f64(s.first[i]);
    w.f64(s.second[i]);
  }
}

ScalerState read_scaler(Reader& r) {
  ScalerState s;
  const std::uint32_t kind = r.u32();
  if (kind > 1) r.fail("unknown scaler kind");
  s.kind = kind == 0 ? ScalerKind::MinMax : ScalerKind::Standard;
  const std::uint64_t n = r.u64();
  if (n > 100000) r.fail("implausible scaler size");
  for (std::uint64_t i = 0; i < n; ++i) {
    s.names.push_back(r.str());
    s.first.push_back(r.f64());
    s.second.push_back(r.f64());
  }
  return s;
}

}  // namespace

void save_model(const std::filesystem::path& path, const RnnModel& model, const FrameScalers& scalers) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  Writer w(out);
  out.write(kMagic, sizeof kMagic);
  w.u32(kVersion);
  w.u32(model.shape.cell == CellKind::Lstm ? 0 : 1);
  w.u32(model.shape.activation == OutputActivation::Linear ? 0 : 1);
  w.u64(model.shape.n_features);
  w.u64(model.shape.units);
  w.u64(model.shape.seq_len);
  w.f64(model.shape.dropout);
  write_scaler(w, scalers.features);
  write_scaler(w, scalers.target);
  w.u64(model.params.size());
  for (const auto& p : model.params) {
    w.u64(p.rows());
    w.u64(p.cols());
    for (double v : p.values()) w.f64(v);
  }
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

RnnModel load_model(const std::filesystem::path& path, FrameScalers* scalers) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  Reader r(in, path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || !std::equal(magic, magic + 8, kMagic)) r.fail("missing magic header");
  if (r.u32() != kVersion) r.fail("unsupported format version");
  ModelShape shape;
  const std::uint32_t cell = r.u32();
  const std::uint32_t act = r.u32();
  if (cell > 1 || act > 1) r.fail("unknown cell kind or activation");
  shape.cell = cell == 0 ? CellKind::Lstm : CellKind::Gru;
  shape.activation = act == 0 ? OutputActivation::Linear : OutputActivation::Exponential;
  shape.n_features = r.u64();
  shape.units = r.u64();
  shape.seq_len = r.u64();
  shape.dropout = r.f64();
  FrameScalers s;
  s.features = read_scaler(r);
  s.target = read_scaler(r);
  if (scalers) *scalers = std::move(s);

  RnnModel model = zero_model(shape);
  if (r.u64() != model.params.size()) r.fail("tensor count does not match the cell kind");
  for (auto& p : model.params) {
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    if (rows != p.rows() || cols != p.cols()) r.fail("tensor shape does not match the header");
    for (double& v : p.values()) v = r.f64();
  }
  return model;
}

}  // namespace tsrnn
