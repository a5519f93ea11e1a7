#include "dualseq/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "dualseq/errors.hpp"

namespace dualseq::nn {

namespace {

class Writer {
 public:
  void u32(std::uint32_t x) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t x) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
  }
  void f64(double x) { u64(std::bit_cast<std::uint64_t>(x)); }
  void bytes(const char* p, std::size_t n) { buf_.append(p, n); }
  const std::string& data() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(std::string data, std::string origin) : buf_(std::move(data)), origin_(std::move(origin)) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(little(4)); }
  std::uint64_t u64() { return little(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string out = buf_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  bool at_end() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) const {
    if (buf_.size() - pos_ < n) throw DataError(fmt::format("{}: truncated checkpoint at byte {}", origin_, pos_));
  }
  std::uint64_t little(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t x = 0;
    for (int i = 0; i < n; ++i) x |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return x;
  }

  std::string buf_;
  std::string origin_;
  std::size_t pos_ = 0;
};

}  // namespace

const ad::Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : blobs)
    if (n == name) return &t;
  return nullptr;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kCheckpointMagic, 4);
  w.u32(ckpt.version);
  w.u64(ckpt.dims.hidden_dim);
  w.u64(ckpt.dims.num_layers);
  w.u64(ckpt.dims.embed_dim);
  w.u64(ckpt.dims.vocab_size);
  w.u64(ckpt.vocab_hash);
  w.u32(ckpt.stage);
  w.u64(ckpt.steps);
  w.u64(ckpt.optimizer_t);
  w.u64(ckpt.blobs.size());
  for (const auto& [name, t] : ckpt.blobs) {
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.u32(static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) w.u64(d);
    for (double x : t.data()) w.f64(x);
  }

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(fmt::format("cannot open {} for writing", tmp.string()));
    out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
    out.flush();
    if (!out) throw DataError(fmt::format("write failed for {}", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError(fmt::format("cannot move checkpoint into {}: {}", path.string(), ec.message()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open checkpoint {}", path.string()));
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(std::move(data), path.string());

  if (r.bytes(4) != std::string(kCheckpointMagic, 4)) throw DataError(path.string() + ": not a DSEQ checkpoint");
  Checkpoint ckpt;
  ckpt.version = r.u32();
  if (ckpt.version != kCheckpointVersion) {
    throw DataError(fmt::format("{}: unsupported checkpoint version {}", path.string(), ckpt.version));
  }
  ckpt.dims.hidden_dim = r.u64();
  ckpt.dims.num_layers = r.u64();
  ckpt.dims.embed_dim = r.u64();
  ckpt.dims.vocab_size = r.u64();
  ckpt.vocab_hash = r.u64();
  ckpt.stage = r.u32();
  ckpt.steps = r.u64();
  ckpt.optimizer_t = r.u64();
  const auto count = r.u64();
  for (std::uint64_t b = 0; b < count; ++b) {
    std::string name = r.bytes(r.u32());
    const auto rank = r.u32();
    if (rank == 0 || rank > 8) throw DataError(fmt::format("{}: blob {} has invalid rank {}", path.string(), name, rank));
    ad::Shape shape(rank);
    std::size_t n = 1;
    for (auto& d : shape) {
      d = r.u64();
      if (d == 0 || d > (std::size_t{1} << 32)) throw DataError(fmt::format("{}: blob {} has invalid shape", path.string(), name));
      n *= d;
    }
    std::vector<double> values(n);
    for (auto& x : values) x = r.f64();
    ckpt.blobs.emplace_back(std::move(name), ad::Tensor(std::move(shape), std::move(values)));
  }
  if (!r.at_end()) throw DataError(path.string() + ": trailing bytes after last blob");
  return ckpt;
}

}  // namespace dualseq::nn
