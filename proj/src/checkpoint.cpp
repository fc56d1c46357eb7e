#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "cayley/error.hpp"
#include "cayley/model.hpp"

namespace cayley {
namespace {

constexpr std::array<char, 4> kMagic = {'C', 'D', 'S', 'M'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint16_t kHasOptimizer = 1;

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::array<char, sizeof(T)> b;
    std::memcpy(b.data(), &v, sizeof(T));
    std::reverse(b.begin(), b.end());
    std::memcpy(&v, b.data(), sizeof(T));
  }
  return v;
}

class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}
  template <typename T>
  void put(T v) {
    v = to_little(v);
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void floats(const float* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) put(data[i]);
  }

 private:
  std::ofstream& out_;
};

class Reader {
 public:
  Reader(std::ifstream& in, std::string name) : in_(in), name_(std::move(name)) {}
  template <typename T>
  T get() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in_) throw FormatError(name_ + ": truncated checkpoint");
    return to_little(v);
  }
  void floats(float* data, std::size_t n) {
    in_.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(float)));
    if (!in_) throw FormatError(name_ + ": truncated checkpoint");
    if constexpr (std::endian::native == std::endian::big) {
      for (std::size_t i = 0; i < n; ++i) data[i] = to_little(data[i]);
    }
  }

 private:
  std::ifstream& in_;
  std::string name_;
};

void write_model(Writer& w, const ModelParameters& m) {
  m.for_each_tensor([&](const char*, const float* d, std::size_t n) { w.floats(d, n); });
}

void read_model(Reader& r, ModelParameters& m) {
  m.for_each_tensor([&](const char*, float* d, std::size_t n) { r.floats(d, n); });
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelParameters& model,
                     const AdamState<float>* optimizer) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write checkpoint " + tmp.string());
    Writer w(out);
    out.write(kMagic.data(), kMagic.size());
    w.put<std::uint16_t>(kVersion);
    w.put<std::uint16_t>(optimizer ? kHasOptimizer : 0);
    const auto& c = model.config;
    for (std::uint32_t dim : {c.input_dim, c.time_embed_dim, c.hidden_dim, c.n_blocks,
                              c.output_dim, c.horizon}) {
      w.put<std::uint32_t>(dim);
    }
    w.put<std::uint64_t>(model.parameter_count());
    write_model(w, model);
    if (optimizer) {
      w.put<std::uint64_t>(optimizer->step);
      w.put<double>(optimizer->options.beta1);
      w.put<double>(optimizer->options.beta2);
      w.put<double>(optimizer->options.epsilon);
      write_model(w, optimizer->m);
      write_model(w, optimizer->v);
    }
    out.flush();
    if (!out) throw FormatError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  const auto name = path.string();
  Reader r(in, name);
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw FormatError(name + ": bad magic (not a CDSM checkpoint)");
  const auto version = r.get<std::uint16_t>();
  if (version != kVersion) {
    throw FormatError(name + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto flags = r.get<std::uint16_t>();
  if (flags & ~kHasOptimizer) throw FormatError(name + ": unknown checkpoint flags");
  ModelConfig c;
  c.input_dim = r.get<std::uint32_t>();
  c.time_embed_dim = r.get<std::uint32_t>();
  c.hidden_dim = r.get<std::uint32_t>();
  c.n_blocks = r.get<std::uint32_t>();
  c.output_dim = r.get<std::uint32_t>();
  c.horizon = r.get<std::uint32_t>();
  constexpr std::uint32_t kMaxDim = 1u << 20;
  if (c.input_dim == 0 || c.hidden_dim == 0 || c.n_blocks == 0 || c.output_dim == 0 ||
      c.input_dim > kMaxDim || c.hidden_dim > 65536 || c.n_blocks > 1024 ||
      c.output_dim > kMaxDim || c.time_embed_dim > 4096 || c.time_embed_dim % 2 != 0) {
    throw FormatError(name + ": implausible model dimensions");
  }
  const auto count = r.get<std::uint64_t>();
  Checkpoint ck{ModelParameters::zeros(c), std::nullopt};
  if (count != ck.model.parameter_count()) {
    throw FormatError(name + ": parameter count does not match header dimensions");
  }
  read_model(r, ck.model);
  if (flags & kHasOptimizer) {
    auto opt = AdamState<float>::for_model(ck.model);
    opt.step = r.get<std::uint64_t>();
    opt.options.beta1 = r.get<double>();
    opt.options.beta2 = r.get<double>();
    opt.options.epsilon = r.get<double>();
    read_model(r, opt.m);
    read_model(r, opt.v);
    ck.optimizer = std::move(opt);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(name + ": trailing bytes after checkpoint payload");
  }
  return ck;
}

}  // namespace cayley
