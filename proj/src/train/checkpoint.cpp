// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "bgan/train/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bgan/errors.hpp"

namespace bgan::train {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'B', 'G', 'A', 'N'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <typename T>
  void pod(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  void str(const std::string& s) {
    pod<std::uint64_t>(s.size());
    bytes(s.data(), s.size());
  }
  void values(const ad::Mat<Real>& m) { bytes(m.data(), static_cast<std::size_t>(m.size()) * sizeof(Real)); }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  Reader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

  template <typename T>
  T pod() {
    T v{};
    raw(&v, sizeof(T));
    return v;
  }
  void raw(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) fail("truncated");
  }
  std::string str() {
    const auto n = pod<std::uint64_t>();
    if (n > (1u << 30)) fail("implausible string length");
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }
  std::uint64_t count() {
    const auto n = pod<std::uint64_t>();
    if (n > (1u << 24)) fail("implausible record count");
    return n;
  }
  void values(ad::Mat<Real>& m) { raw(m.data(), static_cast<std::size_t>(m.size()) * sizeof(Real)); }

  [[noreturn]] void fail(const std::string& what) { throw FormatError(name_ + ": " + what + " checkpoint"); }

 private:
  std::istream& in_;
  std::string name_;
};

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  // write to a sibling file first so an interrupted save never leaves a
  // truncated checkpoint under the final name
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    Writer w(out);
    w.bytes(kMagic, 4);
    w.pod(c.version);
    w.bytes(c.config_hash.data(), 32);
    w.bytes(c.vocab_hash.data(), 32);
    w.pod(c.iteration);

    w.pod<std::uint64_t>(c.params.size());
    for (const auto& [name, p] : c.params) {
      w.str(name);
      w.pod(p.rank);
      if (p.rank == 1) {
        w.pod<std::uint64_t>(static_cast<std::uint64_t>(p.value.size()));
      } else {
        w.pod<std::uint64_t>(static_cast<std::uint64_t>(p.value.rows()));
        w.pod<std::uint64_t>(static_cast<std::uint64_t>(p.value.cols()));
      }
      w.values(p.value);
    }
    w.pod<std::uint64_t>(c.moments.size());
    for (const auto& [name, m] : c.moments) {
      w.str(name);
      w.values(m.m);
      w.values(m.v);
    }
    w.pod<std::uint64_t>(c.steps.size());
    for (const auto& [name, s] : c.steps) {
      w.str(name);
      w.pod(s);
    }
    w.pod<std::uint64_t>(c.states.size());
    for (const auto& [name, s] : c.states) {
      w.str(name);
      w.str(s);
    }
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  Reader r(in, path.string());
  Checkpoint c;
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) r.fail("not a");
  c.version = r.pod<std::uint32_t>();
  if (c.version != kCheckpointVersion) {
    throw FormatError(path.string() + ": checkpoint version " + std::to_string(c.version) + ", expected " +
                      std::to_string(kCheckpointVersion));
  }
  r.raw(c.config_hash.data(), 32);
  r.raw(c.vocab_hash.data(), 32);
  c.iteration = r.pod<std::uint64_t>();

  for (auto n = r.count(); n > 0; --n) {
    std::string name = r.str();
    ParamRecord p;
    p.rank = r.pod<std::uint32_t>();
    std::uint64_t rows = 1;
    std::uint64_t cols = 1;
    if (p.rank == 1) {
      cols = r.pod<std::uint64_t>();
    } else if (p.rank == 2) {
      rows = r.pod<std::uint64_t>();
      cols = r.pod<std::uint64_t>();
    } else {
      r.fail("unsupported rank in");
    }
    if (rows * cols > (1ull << 28)) r.fail("implausible extents in");
    p.value.resize(static_cast<ad::Index>(rows), static_cast<ad::Index>(cols));
    r.values(p.value);
    c.params.emplace(std::move(name), std::move(p));
  }
  for (auto n = r.count(); n > 0; --n) {
    std::string name = r.str();
    auto it = c.params.find(name);
    if (it == c.params.end()) r.fail("moment record without parameter in");
    MomentRecord m;
    m.m.resize(it->second.value.rows(), it->second.value.cols());
    m.v.resize(it->second.value.rows(), it->second.value.cols());
    r.values(m.m);
    r.values(m.v);
    c.moments.emplace(std::move(name), std::move(m));
  }
  for (auto n = r.count(); n > 0; --n) {
    std::string name = r.str();
    c.steps[name] = r.pod<std::uint64_t>();
  }
  for (auto n = r.count(); n > 0; --n) {
    std::string name = r.str();
    c.states[name] = r.str();
  }
  if (in.peek() != std::char_traits<char>::eof()) r.fail("trailing bytes in");
  return c;
}

void export_store(Checkpoint& ckpt, const std::string& prefix, const ad::ParamStore<Real>& store) {
  for (const auto& [path, p] : store) {
    const std::string name = prefix + "/" + path;
    ckpt.params[name] = {static_cast<std::uint32_t>(p.rank), p.value};
    if (p.requires_grad) ckpt.moments[name] = {p.adam_m, p.adam_v};
  }
  ckpt.steps[prefix] = store.step();
}

void import_store(const Checkpoint& ckpt, const std::string& prefix, ad::ParamStore<Real>& store,
                  bool with_optimizer) {
  for (auto& [path, p] : store) {
    const std::string name = prefix + "/" + path;
    auto it = ckpt.params.find(name);
    if (it == ckpt.params.end()) throw FormatError("checkpoint lacks parameter " + name);
    const auto& v = it->second.value;
    if (v.rows() != p.value.rows() || v.cols() != p.value.cols()) {
      throw FormatError("checkpoint parameter " + name + " has shape " + ad::shape_str(v.rows(), v.cols()) +
                        ", model expects " + ad::shape_str(p.value.rows(), p.value.cols()));
    }
    p.value = v;
    if (with_optimizer && p.requires_grad) {
      auto mt = ckpt.moments.find(name);
      if (mt == ckpt.moments.end()) throw FormatError("checkpoint lacks optimizer state for " + name);
      p.adam_m = mt->second.m;
      p.adam_v = mt->second.v;
    }
    if (p.requires_grad) p.grad.setZero();
  }
  if (with_optimizer) {
    auto st = ckpt.steps.find(prefix);
    if (st == ckpt.steps.end()) throw FormatError("checkpoint lacks step counter for " + prefix);
    store.set_step(st->second);
  }
}

}  // namespace bgan::train
