#include "editnts/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <vector>

#include "editnts/errors.hpp"

namespace editnts {

namespace {

constexpr std::array<char, 8> kMagic = {'E', 'D', 'N', 'T', 'S', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::string& buf, T v) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  auto u = std::bit_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(U); ++i) buf.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  template <typename T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    need(sizeof(U));
    U u = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      u |= static_cast<U>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return std::bit_cast<T>(u);
  }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  std::string_view view(std::size_t from, std::size_t to) const {
    return std::string_view(data_).substr(from, to - from);
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw CheckpointError("checkpoint is truncated");
  }
  std::string data_;
  std::size_t pos_ = 0;
};

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct ManifestEntry {
  std::string name;
  std::uint32_t rows, cols;
};

struct Header {
  std::uint32_t dtype;
  std::string meta;
  std::vector<ManifestEntry> manifest;
};

Header read_header(Reader& r) {
  auto magic = r.bytes(kMagic.size());
  if (std::memcmp(magic.data(), kMagic.data(), kMagic.size()) != 0) {
    throw CheckpointError("not a checkpoint file (bad magic)");
  }
  if (auto v = r.get<std::uint32_t>(); v != kVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(v));
  }
  Header h;
  h.dtype = r.get<std::uint32_t>();
  if (h.dtype != 4 && h.dtype != 8) throw CheckpointError("bad dtype in checkpoint");
  const auto meta_len = r.get<std::uint64_t>();
  if (meta_len > r.remaining()) throw CheckpointError("checkpoint is truncated");
  h.meta = r.bytes(meta_len);
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = r.get<std::uint32_t>();
    if (len > r.remaining()) throw CheckpointError("checkpoint is truncated");
    ManifestEntry e;
    e.name = r.bytes(len);
    e.rows = r.get<std::uint32_t>();
    e.cols = r.get<std::uint32_t>();
    h.manifest.push_back(std::move(e));
  }
  return h;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

template <typename Real>
void save_tensors(const std::filesystem::path& path, const ad::ParameterSet<Real>& params,
                  const std::string& meta_json) {
  std::string buf(kMagic.begin(), kMagic.end());
  put_le<std::uint32_t>(buf, kVersion);
  put_le<std::uint32_t>(buf, sizeof(Real));
  put_le<std::uint64_t>(buf, meta_json.size());
  buf += meta_json;
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(p.name.size()));
    buf += p.name;
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(p.value.rows()));
    put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(p.value.cols()));
  }
  const std::size_t payload_start = buf.size();
  for (const auto& p : params) {
    for (ad::Index i = 0; i < p.value.rows(); ++i) {
      for (ad::Index j = 0; j < p.value.cols(); ++j) put_le<Real>(buf, p.value(i, j));
    }
  }
  put_le<std::uint64_t>(buf, fnv1a(std::string_view(buf).substr(payload_start)));

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint " + tmp.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw CheckpointError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

template <typename Real>
std::string load_tensors(const std::filesystem::path& path, ad::ParameterSet<Real>& params) {
  Reader r(slurp(path));
  Header h = read_header(r);
  if (h.dtype != sizeof(Real)) {
    throw CheckpointError("checkpoint holds " + std::to_string(h.dtype * 8) +
                          "-bit values, model uses " + std::to_string(sizeof(Real) * 8));
  }
  if (h.manifest.size() != params.size()) {
    throw CheckpointError("manifest mismatch: checkpoint has " + std::to_string(h.manifest.size()) +
                          " tensors, model has " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& e = h.manifest[i];
    const auto& p = params.at(i);
    if (e.name != p.name || e.rows != p.value.rows() || e.cols != p.value.cols()) {
      throw CheckpointError("manifest mismatch at tensor " + std::to_string(i) + ": checkpoint " +
                            e.name + " " + std::to_string(e.rows) + "x" + std::to_string(e.cols) +
                            ", model " + p.name + " " + std::to_string(p.value.rows()) + "x" +
                            std::to_string(p.value.cols()));
    }
  }
  const std::size_t payload_start = r.pos();
  std::vector<ad::Mat<Real>> values;
  for (const auto& e : h.manifest) {
    ad::Mat<Real> m(e.rows, e.cols);
    for (std::uint32_t i = 0; i < e.rows; ++i) {
      for (std::uint32_t j = 0; j < e.cols; ++j) m(i, j) = r.get<Real>();
    }
    values.push_back(std::move(m));
  }
  const std::size_t payload_end = r.pos();
  const auto checksum = r.get<std::uint64_t>();
  if (checksum != fnv1a(r.view(payload_start, payload_end))) {
    throw CheckpointError("checkpoint checksum mismatch (corrupt file)");
  }
  if (r.remaining() != 0) throw CheckpointError("trailing bytes after checkpoint payload");
  for (std::size_t i = 0; i < params.size(); ++i) params.at(i).value = std::move(values[i]);
  return h.meta;
}

std::string read_checkpoint_meta(const std::filesystem::path& path) {
  Reader r(slurp(path));
  return read_header(r).meta;
}

std::string model_config_to_json(const ModelConfig& c) {
  nlohmann::json j = {
      {"vocab_size", c.vocab_size},
      {"word_dim", c.word_dim},
      {"pos_dim", c.pos_dim},
      {"pos_size", c.pos_size},
      {"hidden", c.hidden},
      {"proj_dim", c.proj_dim},
      {"bidirectional", c.bidirectional},
      {"edit_prev_hidden_input", c.edit_prev_hidden_input},
      {"dropout", c.dropout},
      {"embed_init", c.embed_init},
  };
  return j.dump();
}

ModelConfig model_config_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ModelConfig c;
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.word_dim = j.at("word_dim").get<std::size_t>();
    c.pos_dim = j.at("pos_dim").get<std::size_t>();
    c.pos_size = j.at("pos_size").get<std::size_t>();
    c.hidden = j.at("hidden").get<std::size_t>();
    c.proj_dim = j.at("proj_dim").get<std::size_t>();
    c.bidirectional = j.at("bidirectional").get<bool>();
    c.edit_prev_hidden_input = j.at("edit_prev_hidden_input").get<bool>();
    c.dropout = j.at("dropout").get<double>();
    c.embed_init = j.at("embed_init").get<double>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad model config: ") + e.what());
  }
}

template <typename Real>
void save_params(const std::filesystem::path& path, const Model<Real>& model,
                 const std::string& extra_meta_json) {
  nlohmann::json meta = nlohmann::json::parse(extra_meta_json);
  meta["model"] = nlohmann::json::parse(model_config_to_json(model.config()));
  save_tensors(path, model.params(), meta.dump());
}

template <typename Real>
void load_params(const std::filesystem::path& path, Model<Real>& model) {
  load_tensors(path, model.params());
}

template <typename Real>
Model<Real> load_model(const std::filesystem::path& path) {
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_checkpoint_meta(path));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint metadata: ") + e.what());
  }
  if (!meta.contains("model")) throw CheckpointError("checkpoint has no model config");
  Model<Real> model(model_config_from_json(meta["model"].dump()), 0);
  load_params(path, model);
  return model;
}

template void save_tensors(const std::filesystem::path&, const ad::ParameterSet<float>&,
                           const std::string&);
template void save_tensors(const std::filesystem::path&, const ad::ParameterSet<double>&,
                           const std::string&);
template std::string load_tensors(const std::filesystem::path&, ad::ParameterSet<float>&);
template std::string load_tensors(const std::filesystem::path&, ad::ParameterSet<double>&);
template void save_params(const std::filesystem::path&, const Model<float>&, const std::string&);
template void save_params(const std::filesystem::path&, const Model<double>&, const std::string&);
template void load_params(const std::filesystem::path&, Model<float>&);
template void load_params(const std::filesystem::path&, Model<double>&);
template Model<float> load_model(const std::filesystem::path&);
template Model<double> load_model(const std::filesystem::path&);

}  // namespace editnts
