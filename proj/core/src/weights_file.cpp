#include "overtake/weights_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include "overtake/error.hpp"

namespace overtake {

namespace {

constexpr char kMagic[8] = {'O', 'V', 'T', 'K', 'W', 'G', 'T', '1'};
constexpr std::uint32_t kMaxDim = 1u << 20;

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte(pos_ + i)) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(byte(pos_ + i)) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }
  void expect_magic() {
    need(sizeof kMagic);
    if (std::memcmp(bytes_.data() + pos_, kMagic, sizeof kMagic) != 0)
      throw FormatError("weights: bad magic bytes");
    pos_ += sizeof kMagic;
  }
  bool at_end() const { return pos_ == end_; }

 private:
  unsigned char byte(std::size_t i) const { return static_cast<unsigned char>(bytes_[i]); }
  void need(std::size_t n) const {
    if (pos_ + n > end_) throw FormatError("weights: truncated file");
  }

  const std::string& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::uint32_t checksum(const char* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(n));
  return static_cast<std::uint32_t>(crc);
}

void write_block(Writer& w, const Mlp& net) {
  w.u32(net.output_activation == Activation::kRelu ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(net.layers.size()));
  for (int d : net.dims()) w.u32(static_cast<std::uint32_t>(d));
  for (const auto& l : net.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.f64(l.weight(r, c));
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) w.f64(l.bias(r));
  }
}

Mlp read_block(Reader& r) {
  Mlp net;
  const auto act = r.u32();
  if (act > 1) throw FormatError("weights: unknown activation tag");
  net.output_activation = act == 1 ? Activation::kRelu : Activation::kIdentity;
  const auto layer_count = r.u32();
  if (layer_count == 0 || layer_count > 64) throw FormatError("weights: implausible layer count");
  std::vector<std::uint32_t> dims(layer_count + 1);
  for (auto& d : dims) {
    d = r.u32();
    if (d == 0 || d > kMaxDim) throw FormatError("weights: implausible layer dimension");
  }
  for (std::uint32_t i = 0; i < layer_count; ++i) {
    DenseLayer l{Eigen::MatrixXd(dims[i + 1], dims[i]), Eigen::VectorXd(dims[i + 1])};
    for (Eigen::Index row = 0; row < l.weight.rows(); ++row)
      for (Eigen::Index col = 0; col < l.weight.cols(); ++col) l.weight(row, col) = r.f64();
    for (Eigen::Index row = 0; row < l.bias.size(); ++row) l.bias(row) = r.f64();
    net.layers.push_back(std::move(l));
  }
  return net;
}

}  // namespace

std::string encode_weights(const QNetwork& net) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kWeightsFormatVersion);
  w.u32(net.is_dueling() ? 2 : 1);
  if (net.is_dueling()) {
    const auto& d = net.dueling();
    w.u32(d.aggregation == DuelingAggregation::kMean ? 1 : 0);
    w.u32(3);
    write_block(w, d.trunk);
    write_block(w, d.value);
    write_block(w, d.advantage);
  } else {
    w.u32(0);
    w.u32(1);
    write_block(w, net.plain());
  }
  const auto crc = checksum(w.bytes().data(), w.bytes().size());
  w.u32(crc);
  return std::move(w.bytes());
}

QNetwork decode_weights(const std::string& bytes) {
  if (bytes.size() < sizeof kMagic + 4 * 5) throw FormatError("weights: file too short");
  const std::size_t body = bytes.size() - 4;
  {
    // The checksum is validated before anything else is interpreted.
    std::uint32_t stored = 0;
    for (int i = 0; i < 4; ++i)
      stored |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[body + i])) << (8 * i);
    if (stored != checksum(bytes.data(), body)) throw FormatError("weights: checksum mismatch");
  }

  Reader r(bytes, body);
  r.expect_magic();
  if (r.u32() != kWeightsFormatVersion) throw FormatError("weights: unsupported format version");
  const auto tag = r.u32();
  const auto agg = r.u32();
  const auto blocks = r.u32();
  if (agg > 1) throw FormatError("weights: unknown aggregation tag");

  QNetwork net;
  if (tag == 1) {
    if (blocks != 1) throw FormatError("weights: dqn file must hold one block");
    net = QNetwork(read_block(r));
  } else if (tag == 2) {
    if (blocks != 3) throw FormatError("weights: ddqn file must hold three blocks");
    DuelingNet d;
    d.aggregation = agg == 1 ? DuelingAggregation::kMean : DuelingAggregation::kMax;
    d.trunk = read_block(r);
    d.value = read_block(r);
    d.advantage = read_block(r);
    if (d.value.input_dim() != d.trunk.output_dim() ||
        d.advantage.input_dim() != d.trunk.output_dim() || d.value.output_dim() != 1)
      throw FormatError("weights: dueling streams do not fit the trunk");
    net = QNetwork(std::move(d));
  } else {
    throw FormatError("weights: unknown algorithm tag");
  }
  if (!r.at_end()) throw FormatError("weights: trailing bytes after the last block");
  return net;
}

void save_weights(const QNetwork& net, const std::filesystem::path& path) {
  const auto bytes = encode_weights(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write weights file '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing weights file '" + path.string() + "'");
}

QNetwork load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read weights file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return decode_weights(buf.str());
  } catch (const FormatError& e) {
    throw FormatError(std::string(e.what()) + " in '" + path.string() + "'");
  }
}

}  // namespace overtake
