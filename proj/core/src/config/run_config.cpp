#include "dualseq/config/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>

#include "dualseq/errors.hpp"

namespace dualseq::config {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw DataError(fmt::format("{}: '{}' is not a valid number", key, v));
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw DataError(fmt::format("{}: '{}' is not true/false", key, v));
}

std::filesystem::path resolve(const std::string& v, const std::filesystem::path& base) {
  std::filesystem::path p(v);
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

std::string join_pcts(const std::vector<double>& pcts) {
  std::string s;
  for (std::size_t i = 0; i < pcts.size(); ++i) s += fmt::format("{}{}", i ? "," : "", pcts[i]);
  return s;
}

struct Key {
  const char* name;
  std::function<void(RunConfig&, const std::string&, const std::filesystem::path&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T, typename Field>
Key number_key(const char* name, Field field) {
  return Key{name,
             [name, field](RunConfig& c, const std::string& v, const std::filesystem::path&) {
               field(c) = parse_number<T>(name, v);
             },
             [field](const RunConfig& c) { return fmt::format("{}", field(const_cast<RunConfig&>(c))); }};
}

template <typename Field>
Key path_key(const char* name, Field field) {
  return Key{name,
             [field](RunConfig& c, const std::string& v, const std::filesystem::path& base) {
               field(c) = resolve(v, base);
             },
             [field](const RunConfig& c) { return field(const_cast<RunConfig&>(c)).string(); }};
}

const std::vector<Key>& keys() {
  using C = RunConfig;
  static const std::vector<Key> kKeys = {
      Key{"seed",
          [](C& c, const std::string& v, const std::filesystem::path&) {
            c.seed = parse_number<std::uint64_t>("seed", v);
            c.noise.seed = c.seed;
          },
          [](const C& c) { return fmt::format("{}", c.seed); }},
      number_key<std::size_t>("hidden_dim", [](C& c) -> auto& { return c.dims.hidden_dim; }),
      number_key<std::size_t>("num_layers", [](C& c) -> auto& { return c.dims.num_layers; }),
      number_key<std::size_t>("embed_dim", [](C& c) -> auto& { return c.dims.embed_dim; }),
      number_key<std::size_t>("vocab_size", [](C& c) -> auto& { return c.dims.vocab_size; }),
      number_key<double>("learning_rate", [](C& c) -> auto& { return c.adam.learning_rate; }),
      number_key<double>("beta1", [](C& c) -> auto& { return c.adam.beta1; }),
      number_key<double>("beta2", [](C& c) -> auto& { return c.adam.beta2; }),
      number_key<double>("epsilon", [](C& c) -> auto& { return c.adam.epsilon; }),
      number_key<double>("clip_threshold", [](C& c) -> auto& { return c.clip_threshold; }),
      number_key<std::size_t>("batch_size", [](C& c) -> auto& { return c.batch_size; }),
      Key{"buckets",
          [](C& c, const std::string& v, const std::filesystem::path&) {
            try {
              c.buckets = data::BucketSpec::parse(v);
            } catch (const ContractError& e) {
              throw DataError(fmt::format("buckets: {}", e.what()));
            }
          },
          [](const C& c) { return c.buckets.to_string(); }},
      number_key<std::uint64_t>("phase1_steps", [](C& c) -> auto& { return c.phase1_steps; }),
      number_key<std::uint64_t>("phase2_steps", [](C& c) -> auto& { return c.phase2_steps; }),
      number_key<std::uint64_t>("finetune_steps", [](C& c) -> auto& { return c.finetune_steps; }),
      Key{"loss_mode",
          [](C& c, const std::string& v, const std::filesystem::path&) {
            if (v == "coherence") c.loss_mode = model::LossMode::CoherenceOnly;
            else if (v == "combined") c.loss_mode = model::LossMode::Combined;
            else throw DataError(fmt::format("loss_mode: '{}' is not coherence or combined", v));
          },
          [](const C& c) { return std::string(c.loss_mode == model::LossMode::Combined ? "combined" : "coherence"); }},
      Key{"asr_init",
          [](C& c, const std::string& v, const std::filesystem::path&) {
            try {
              c.asr_init = model::parse_asr_init(v);
            } catch (const ContractError& e) {
              throw DataError(fmt::format("asr_init: {}", e.what()));
            }
          },
          [](const C& c) { return std::string(model::asr_init_name(c.asr_init)); }},
      number_key<double>("finetune_pct", [](C& c) -> auto& { return c.finetune_pct; }),
      Key{"pcts",
          [](C& c, const std::string& v, const std::filesystem::path&) {
            c.pcts.clear();
            std::istringstream in(v);
            for (std::string item; std::getline(in, item, ',');) c.pcts.push_back(parse_number<double>("pcts", trim(item)));
          },
          [](const C& c) { return join_pcts(c.pcts); }},
      Key{"noise.strip_punctuation",
          [](C& c, const std::string& v, const std::filesystem::path&) {
            c.noise.strip_punctuation = parse_bool("noise.strip_punctuation", v);
          },
          [](const C& c) { return std::string(c.noise.strip_punctuation ? "true" : "false"); }},
      number_key<double>("noise.homophone_rate", [](C& c) -> auto& { return c.noise.homophone_rate; }),
      number_key<double>("noise.substitute_rate", [](C& c) -> auto& { return c.noise.substitute_rate; }),
      number_key<double>("noise.delete_rate", [](C& c) -> auto& { return c.noise.delete_rate; }),
      number_key<double>("noise.insert_rate", [](C& c) -> auto& { return c.noise.insert_rate; }),
      path_key("noise.lexicon", [](C& c) -> auto& { return c.noise.lexicon_path; }),
      number_key<std::size_t>("train_pairs", [](C& c) -> auto& { return c.train_pairs; }),
      number_key<std::size_t>("test_pairs", [](C& c) -> auto& { return c.test_pairs; }),
      path_key("corpus_dir", [](C& c) -> auto& { return c.corpus_dir; }),
      path_key("init_checkpoint", [](C& c) -> auto& { return c.init_checkpoint; }),
      number_key<std::size_t>("threads", [](C& c) -> auto& { return c.threads; }),
  };
  return kKeys;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> kNames = [] {
    std::vector<std::string> n;
    for (const auto& k : keys()) n.emplace_back(k.name);
    return n;
  }();
  return kNames;
}

void RunConfig::set(const std::string& key, const std::string& value, const std::filesystem::path& base) {
  for (const auto& k : keys()) {
    if (key == k.name) {
      k.set(*this, value, base);
      return;
    }
  }
  throw DataError(fmt::format("unknown config key '{}'", key));
}

void RunConfig::validate() const {
  dims.validate();
  buckets.validate();
  noise.validate();
  if (batch_size == 0) throw ContractError("batch_size must be >= 1");
  if (!(clip_threshold > 0.0)) throw ContractError("clip_threshold must be > 0");
  if (!(adam.learning_rate > 0.0)) throw ContractError("learning_rate must be > 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ContractError("beta1 and beta2 must be in [0, 1)");
  }
  if (!(adam.epsilon > 0.0)) throw ContractError("epsilon must be > 0");
  if (!(finetune_pct > 0.0 && finetune_pct <= 100.0)) throw ContractError("finetune_pct must be in (0, 100]");
  for (double p : pcts) {
    if (!(p > 0.0 && p <= 100.0)) throw ContractError(fmt::format("pcts entry {} outside (0, 100]", p));
  }
}

RunConfig RunConfig::parse(std::istream& in, const std::string& origin, const std::filesystem::path& base) {
  RunConfig c;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw DataError(fmt::format("{}:{}: expected key = value", origin, lineno));
    try {
      c.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)), base);
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}:{}: {}", origin, lineno, e.what()));
    }
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open config {}", path.string()));
  return parse(in, path.string(), path.parent_path());
}

std::string RunConfig::to_string() const {
  std::string s;
  for (const auto& k : keys()) s += fmt::format("{} = {}\n", k.name, k.get(*this));
  return s;
}

model::TrainConfig RunConfig::train_config(std::uint64_t steps) const {
  model::TrainConfig t;
  t.steps = steps;
  t.batch_size = batch_size;
  t.adam = adam;
  t.clip_threshold = clip_threshold;
  t.seed = seed;
  t.asr_init = asr_init;
  return t;
}

eval::ExperimentConfig RunConfig::experiment_config() const {
  eval::ExperimentConfig e;
  e.dims = dims;
  e.buckets = buckets;
  e.train = train_config(0);
  e.phase1_steps = phase1_steps;
  e.finetune_steps = finetune_steps;
  e.phase2_steps = phase2_steps;
  e.pcts = pcts;
  e.seed = seed;
  e.threads = threads;
  return e;
}

}  // namespace dualseq::config
