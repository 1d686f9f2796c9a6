// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

#include "charrnn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "charrnn/errors.hpp"

namespace charrnn {

namespace {

class Writer {
 public:
  void bytes(const char* p, std::size_t n) { out_.append(p, n); }
  void u32(std::uint32_t v) { put_le(v, 4); }
  void u64(std::uint64_t v) { put_le(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::string take() { return std::move(out_); }

 private:
  void put_le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& data) : data_(data) {}
  void bytes(char* p, std::size_t n) {
    need(n);
    std::memcpy(p, data_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get_le(4)); }
  std::uint64_t u64() { return get_le(8); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t count(std::size_t bytes_each) {
    const std::uint64_t n = u64();
    if (n > (data_.size() - pos_) / bytes_each) throw IoError("checkpoint: length field exceeds file size");
    return static_cast<std::size_t>(n);
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) {
    if (data_.size() - pos_ < n) throw IoError("checkpoint: unexpected end of data");
  }
  std::uint64_t get_le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  const std::string& data_;
  std::size_t pos_ = 0;
};

template <std::floating_point Real>
void write_params(Writer& w, const Parameters<Real>& p) {
  w.u64(p.parameter_count());
  for (const auto& t : p.tensors())
    for (Real v : t.values) {
      if constexpr (sizeof(Real) == 4)
        w.f32(v);
      else
        w.f64(v);
    }
}

template <std::floating_point Real>
Parameters<Real> read_params(Reader& r, const ModelConfig& cfg) {
  Parameters<Real> p = Parameters<Real>::zeros(cfg);
  const std::uint64_t n = r.u64();
  if (n != p.parameter_count())
    throw IoError("checkpoint: parameter count " + std::to_string(n) + " does not match the model (" +
                  std::to_string(p.parameter_count()) + ")");
  for (auto& t : p.tensors())
    for (Real& v : t.values) {
      if constexpr (sizeof(Real) == 4)
        v = r.f32();
      else
        v = r.f64();
    }
  return p;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kCheckpointMagic, sizeof(kCheckpointMagic));
  w.u32(kCheckpointVersion);
  w.u32(ckpt.params.index() == 0 ? 4 : 8);
  w.u64(ckpt.model.vocab_size);
  w.u64(ckpt.model.num_layers);
  w.u64(ckpt.model.hidden_size);
  w.u64(ckpt.model.dense_size);
  w.f64(ckpt.model.leakiness);
  w.u32(static_cast<std::uint32_t>(ckpt.scheme));
  w.u64(ckpt.k1);
  w.u64(ckpt.k2);
  w.u64(ckpt.vocabulary.size());
  for (char32_t ch : ckpt.vocabulary.symbols()) w.u32(static_cast<std::uint32_t>(ch));
  w.u64(ckpt.default_seed.size());
  for (TokenId t : ckpt.default_seed) w.u32(t);
  std::visit([&](const auto& p) { write_params(w, p); }, ckpt.params);
  return w.take();
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) throw IoError("checkpoint: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  const std::uint32_t precision = r.u32();
  if (precision != 4 && precision != 8)
    throw IoError("checkpoint: unsupported precision " + std::to_string(precision));

  Checkpoint ckpt;
  ckpt.model.vocab_size = r.u64();
  ckpt.model.num_layers = r.u64();
  ckpt.model.hidden_size = r.u64();
  ckpt.model.dense_size = r.u64();
  ckpt.model.leakiness = r.f64();
  try {
    ckpt.model.validate();
  } catch (const ConfigError& e) {
    throw IoError(std::string("checkpoint: invalid model config: ") + e.what());
  }
  const std::uint32_t scheme = r.u32();
  if (scheme < 1 || scheme > 4) throw IoError("checkpoint: invalid scheme " + std::to_string(scheme));
  ckpt.scheme = static_cast<SchemeId>(scheme);
  ckpt.k1 = r.u64();
  ckpt.k2 = r.u64();

  std::vector<char32_t> symbols(r.count(4));
  for (char32_t& ch : symbols) ch = static_cast<char32_t>(r.u32());
  try {
    ckpt.vocabulary = Vocabulary(std::move(symbols));
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("checkpoint: ") + e.what());
  }
  if (ckpt.vocabulary.size() != ckpt.model.vocab_size)
    throw IoError("checkpoint: vocabulary size does not match model config");
  ckpt.default_seed.resize(r.count(4));
  for (TokenId& t : ckpt.default_seed) {
    t = r.u32();
    if (t >= ckpt.model.vocab_size) throw IoError("checkpoint: seed token out of range");
  }
  if (precision == 4)
    ckpt.params = read_params<float>(r, ckpt.model);
  else
    ckpt.params = read_params<double>(r, ckpt.model);
  if (!r.done()) throw IoError("checkpoint: trailing bytes");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return deserialize_checkpoint(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace charrnn
