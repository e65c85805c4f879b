// Copyright 2026 The bgan Authors
// SPDX-License-Identifier: Apache-2.0

#include "bgan/train/config.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "bgan/errors.hpp"

namespace bgan::train {

namespace {

using nlohmann::json;

// Reads keys of one JSON object into fields, recording type errors and
// keys nobody asked for.
class Reader {
 public:
  Reader(const json& obj, std::string prefix, std::vector<std::string>& errors)
      : obj_(obj), prefix_(std::move(prefix)), errors_(errors) {}

  ~Reader() {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (seen_.count(it.key()) == 0) errors_.push_back("unknown key '" + prefix_ + it.key() + "'");
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      errors_.push_back("key '" + prefix_ + key + "' has the wrong type (" + it->type_name() + ")");
    }
  }

  void path(const char* key, std::filesystem::path& out) {
    std::string s = out.string();
    get(key, s);
    out = s;
  }

  // Nested object; absent means "keep defaults".
  const json* object(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return nullptr;
    if (!it->is_object()) {
      errors_.push_back("key '" + prefix_ + key + "' must be an object");
      return nullptr;
    }
    return &*it;
  }

 private:
  const json& obj_;
  std::string prefix_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

void read_optimizer(const json* obj, const std::string& prefix, OptimizerConfig& o,
                    std::vector<std::string>& errors) {
  if (obj == nullptr) return;
  Reader r(*obj, prefix, errors);
  r.get("lr", o.lr);
  r.get("beta1", o.beta1);
  r.get("beta2", o.beta2);
  r.get("eps", o.eps);
  r.get("clip", o.clip);
}

json optimizer_json(const OptimizerConfig& o) {
  return {{"lr", o.lr}, {"beta1", o.beta1}, {"beta2", o.beta2}, {"eps", o.eps}, {"clip", o.clip}};
}

json model_json(const TrainConfig& c) {
  return {{"num_merges", c.num_merges},
          {"max_len", c.max_len},
          {"noise", {{"p_drop", c.noise.p_drop}, {"k_shuffle", c.noise.k_shuffle}}},
          {"d_model", c.d_model},
          {"layers", c.layers},
          {"heads", c.heads},
          {"ff_mult", c.ff_mult},
          {"logit_scale", c.logit_scale},
          {"d_z", c.d_z},
          {"gan_blocks", c.gan_blocks},
          {"code_noise", c.code_noise},
          {"power_iterations", c.power_iterations},
          {"ae_optimizer", optimizer_json(c.ae_opt)},
          {"gan_optimizer", optimizer_json(c.gan_opt)},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"phases", {{"ae", c.phase_ae}, {"bt", c.phase_bt}, {"gan", c.phase_gan}}}};
}

}  // namespace

TrainConfig parse_config(const std::string& json_text, std::vector<std::string>& errors) {
  TrainConfig c;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    errors.push_back(std::string("config is not valid JSON: ") + e.what());
    return c;
  }
  if (!doc.is_object()) {
    errors.push_back("config must be a JSON object");
    return c;
  }
  {
    Reader r(doc, "", errors);
    r.path("corpus_l1", c.corpus_l1);
    r.path("corpus_l2", c.corpus_l2);
    r.path("bpe_model", c.bpe_model);
    r.path("vocab", c.vocab);
    r.path("embeddings", c.embeddings);
    r.get("num_merges", c.num_merges);
    r.get("max_len", c.max_len);
    if (const json* n = r.object("noise")) {
      Reader nr(*n, "noise.", errors);
      nr.get("p_drop", c.noise.p_drop);
      nr.get("k_shuffle", c.noise.k_shuffle);
    }
    r.get("d_model", c.d_model);
    r.get("layers", c.layers);
    r.get("heads", c.heads);
    r.get("ff_mult", c.ff_mult);
    r.get("logit_scale", c.logit_scale);
    r.get("d_z", c.d_z);
    r.get("gan_blocks", c.gan_blocks);
    r.get("code_noise", c.code_noise);
    r.get("power_iterations", c.power_iterations);
    read_optimizer(r.object("ae_optimizer"), "ae_optimizer.", c.ae_opt, errors);
    read_optimizer(r.object("gan_optimizer"), "gan_optimizer.", c.gan_opt, errors);
    r.get("batch_size", c.batch_size);
    r.get("seed", c.seed);
    if (const json* p = r.object("phases")) {
      Reader pr(*p, "phases.", errors);
      pr.get("ae", c.phase_ae);
      pr.get("bt", c.phase_bt);
      pr.get("gan", c.phase_gan);
    }
    r.path("out_dir", c.out_dir);
    r.get("total_iterations", c.total_iterations);
    r.get("checkpoint_every", c.checkpoint_every);
    r.get("log_every", c.log_every);
  }
  return c;
}

TrainConfig load_config(const std::filesystem::path& path, std::vector<std::string>& errors) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    errors.push_back("cannot read config " + path.string());
    return {};
  }
  std::stringstream ss;
  ss << in.rdbuf();
  TrainConfig c = parse_config(ss.str(), errors);
  const auto base = path.parent_path();
  for (auto* p : {&c.corpus_l1, &c.corpus_l2, &c.bpe_model, &c.vocab, &c.embeddings, &c.out_dir}) {
    if (!p->empty() && p->is_relative()) *p = std::filesystem::absolute(base / *p).lexically_normal();
  }
  return c;
}

std::vector<std::string> validate(const TrainConfig& c) {
  std::vector<std::string> e;
  auto positive = [&](const char* name, double v) {
    if (!(v > 0)) e.push_back(std::string(name) + " must be positive");
  };
  if (c.corpus_l1.empty()) e.push_back("corpus_l1 is required");
  if (c.corpus_l2.empty()) e.push_back("corpus_l2 is required");
  if (c.num_merges < 0) e.push_back("num_merges must be nonnegative");
  positive("max_len", c.max_len);
  if (!(c.noise.p_drop >= 0 && c.noise.p_drop <= 1)) e.push_back("noise.p_drop must lie in [0, 1]");
  if (c.noise.k_shuffle < 0) e.push_back("noise.k_shuffle must be nonnegative");
  positive("d_model", c.d_model);
  positive("layers", c.layers);
  positive("heads", c.heads);
  if (c.heads > 0 && c.d_model % c.heads != 0) e.push_back("d_model must be divisible by heads");
  positive("ff_mult", c.ff_mult);
  positive("logit_scale", c.logit_scale);
  positive("d_z", c.d_z);
  positive("gan_blocks", c.gan_blocks);
  if (!(c.code_noise >= 0)) e.push_back("code_noise must be nonnegative");
  positive("power_iterations", c.power_iterations);
  for (const auto& [name, o] : {std::pair{"ae_optimizer", c.ae_opt}, std::pair{"gan_optimizer", c.gan_opt}}) {
    if (!(o.lr >= 0)) e.push_back(std::string(name) + ".lr must be nonnegative");
    if (!(o.beta1 >= 0 && o.beta1 < 1)) e.push_back(std::string(name) + ".beta1 must lie in [0, 1)");
    if (!(o.beta2 >= 0 && o.beta2 < 1)) e.push_back(std::string(name) + ".beta2 must lie in [0, 1)");
    if (!(o.eps > 0)) e.push_back(std::string(name) + ".eps must be positive");
    if (!(o.clip >= 0)) e.push_back(std::string(name) + ".clip must be nonnegative");
  }
  positive("batch_size", c.batch_size);
  if (c.out_dir.empty()) e.push_back("out_dir is required");
  if (c.total_iterations < 0) e.push_back("total_iterations must be nonnegative");
  if (c.checkpoint_every < 0) e.push_back("checkpoint_every must be nonnegative");
  if (c.log_every < 0) e.push_back("log_every must be nonnegative");
  return e;
}

std::vector<std::string> check_inputs(const TrainConfig& c) {
  std::vector<std::string> e;
  auto readable = [&](const char* name, const std::filesystem::path& p) {
    if (p.empty()) return;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(p, ec)) {
      e.push_back(std::string(name) + ": no such file " + p.string());
      return;
    }
    std::ifstream in(p);
    if (!in) e.push_back(std::string(name) + ": cannot read " + p.string());
  };
  readable("corpus_l1", c.corpus_l1);
  readable("corpus_l2", c.corpus_l2);
  readable("bpe_model", c.bpe_model);
  readable("vocab", c.vocab);
  readable("embeddings", c.embeddings);
  if (c.bpe_model.empty() != c.vocab.empty()) e.push_back("bpe_model and vocab must be given together");
  return e;
}

std::string to_json(const TrainConfig& c, int indent) {
  json doc = model_json(c);
  doc["corpus_l1"] = c.corpus_l1.string();
  doc["corpus_l2"] = c.corpus_l2.string();
  doc["bpe_model"] = c.bpe_model.string();
  doc["vocab"] = c.vocab.string();
  doc["embeddings"] = c.embeddings.string();
  doc["out_dir"] = c.out_dir.string();
  doc["total_iterations"] = c.total_iterations;
  doc["checkpoint_every"] = c.checkpoint_every;
  doc["log_every"] = c.log_every;
  return doc.dump(indent);
}

Digest sha256(const std::string& bytes) {
  Digest d{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), d.data(), &len, EVP_sha256(), nullptr) != 1 || len != d.size()) {
    throw std::runtime_error("sha256 failed");
  }
  return d;
}

std::string hex(const Digest& d) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (auto b : d) {
    s += digits[b >> 4];
    s += digits[b & 15];
  }
  return s;
}

Digest config_hash(const TrainConfig& c) { return sha256(model_json(c).dump()); }

}  // namespace bgan::train
