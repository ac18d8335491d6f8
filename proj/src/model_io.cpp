#include "circlelab/model_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "circlelab/errors.hpp"

namespace circlelab {

namespace {

constexpr char kMagic[8] = {'C', 'L', 'A', 'B', 'M', 'D', 'L', '1'};
constexpr std::uint32_t kVersion = 1;
// Keeps a corrupt header from driving a huge allocation.
constexpr std::uint32_t kMaxDim = 1u << 20;

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& buf, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

// Sequential little-endian reader over the whole file contents.
struct Reader {
  const unsigned char* p;
  std::size_t remaining;
  const std::string& path;

  void need(std::size_t n) const {
    if (remaining < n) throw IoError("truncated model file '" + path + "'");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    p += 4;
    remaining -= 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    p += 8;
    remaining -= 8;
    return std::bit_cast<double>(bits);
  }
};

void append_matrix(std::string& buf, const Matrix& m) {
  for (double v : m.data) put_f64(buf, v);
}

void read_matrix(Reader& r, Matrix& m) {
  for (auto& v : m.data) v = r.f64();
}

}  // namespace

void save_model(const std::string& path, const ToyModel& model) {
  std::string buf;
  buf.append(kMagic, sizeof kMagic);
  put_u32(buf, kVersion);
  put_u32(buf, static_cast<std::uint32_t>(model.frame_dim));
  put_u32(buf, static_cast<std::uint32_t>(model.hidden_dims.size()));
  for (int w : model.hidden_dims) put_u32(buf, static_cast<std::uint32_t>(w));
  put_u32(buf, static_cast<std::uint32_t>(model.embedding_dim));
  put_u32(buf, static_cast<std::uint32_t>(model.num_classes));
  put_u32(buf, model.activation == Activation::kTanh ? 0u : 1u);
  for (const Matrix& h : model.hidden) append_matrix(buf, h);
  append_matrix(buf, model.embed);
  append_matrix(buf, model.classifier);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

ToyModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string contents((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for '" + path + "'");

  if (contents.size() < sizeof kMagic ||
      std::memcmp(contents.data(), kMagic, sizeof kMagic) != 0)
    throw IoError("'" + path + "' is not a model file (bad magic)");

  Reader r{reinterpret_cast<const unsigned char*>(contents.data()) + sizeof kMagic,
           contents.size() - sizeof kMagic, path};

  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw IoError("unsupported model format version " + std::to_string(version) +
                  " in '" + path + "'");

  const auto dim = [&path](std::uint32_t v, const char* name) -> int {
    if (v < 1 || v > kMaxDim)
      throw IoError("implausible " + std::string(name) + " in '" + path + "'");
    return static_cast<int>(v);
  };

  ToyModel model;
  model.frame_dim = dim(r.u32(), "frame_dim");
  const int num_hidden = dim(r.u32(), "hidden layer count");
  model.hidden_dims.resize(static_cast<std::size_t>(num_hidden));
  for (auto& w : model.hidden_dims) w = dim(r.u32(), "hidden width");
  model.embedding_dim = dim(r.u32(), "embedding_dim");
  model.num_classes = dim(r.u32(), "num_classes");
  if (model.num_classes < 2)
    throw IoError("model in '" + path + "' has fewer than 2 classes");
  const std::uint32_t act = r.u32();
  if (act > 1) throw IoError("unknown activation tag in '" + path + "'");
  model.activation = act == 0 ? Activation::kTanh : Activation::kIdentity;

  int prev = model.frame_dim;
  for (int w : model.hidden_dims) {
    model.hidden.emplace_back(w, prev);
    prev = w;
  }
  model.embed = Matrix(model.embedding_dim, prev);
  model.classifier = Matrix(model.num_classes, model.embedding_dim);

  for (Matrix& h : model.hidden) read_matrix(r, h);
  read_matrix(r, model.embed);
  read_matrix(r, model.classifier);
  if (r.remaining != 0)
    throw IoError("trailing bytes in model file '" + path + "'");
  return model;
}

}  // namespace circlelab
