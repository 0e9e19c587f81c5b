#include "scaffold/experiment/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <vector>

#include "scaffold/error.hpp"
#include "tomlplusplus/toml.hpp"

namespace scaffold::experiment {
namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& message) {
  throw Error(Errc::ConfigError, path + ": " + message);
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

// Field schema shared by the reader, the echo writer and the hash.
template <class V>
void describe(V& v, ExperimentConfig& c) {
  v.u64("master_seed", c.master_seed);
  v.path("bank", c.bank, true);
  v.path("output_dir", c.output_dir, false);
  v.integer("workers", c.sim.workers, 0, 4096, false);
  v.section("population", [&] {
    v.integer("history", c.population.history, 1, 1000000);
    v.integer("drl_corpus", c.population.drl_corpus, 1, 1000000);
    v.integer("trial", c.population.trial, 3, 1000000);
  });
  auto& p = c.sim.population;
  v.section("student", [&] {
    v.real("ability_alpha", p.ability_alpha, 1e-6, 1e6);
    v.real("ability_beta", p.ability_beta, 1e-6, 1e6);
    v.real("rule_concentration", p.rule_concentration, 1e-6, 1e6);
    v.real("gain_ps", p.gain_mean.ps, 0.0, 0.3);
    v.real("gain_guided", p.gain_mean.guided, 0.0, 0.3);
    v.real("gain_buggy", p.gain_mean.buggy, 0.0, 0.3);
    v.real("gain_jitter", p.gain_jitter, 0.0, 5.0);
    v.real("slip_min", p.slip_lo, 0.0, 0.499);
    v.real("slip_max", p.slip_hi, 0.0, 0.499);
    v.real("guess_min", p.guess_lo, 0.0, 0.499);
    v.real("guess_max", p.guess_hi, 0.0, 0.499);
    v.real("speed_sigma", p.speed_sigma, 0.0, 5.0);
    v.real("hint_min", p.hint_lo, 0.0, 1.0);
    v.real("hint_max", p.hint_hi, 0.0, 1.0);
  });
  auto& a = c.sim.attempt;
  v.section("attempt", [&] {
    v.real("seconds_per_action", a.seconds_per_action, 1e-3, 1e5);
    v.real("hint_seconds", a.hint_seconds, 0.0, 1e5);
    v.real("duration_sigma", a.duration_sigma, 0.0, 5.0);
    v.real("guided_time_factor", a.guided_time_factor, 1e-3, 10.0);
    v.real("buggy_time_factor", a.buggy_time_factor, 1e-3, 10.0);
    v.real("intro_time_factor", a.intro_time_factor, 1e-3, 10.0);
    v.real("intro_gain", a.intro_gain, 0.0, 0.3);
    v.real("detour_probability", a.detour_probability, 0.0, 1.0);
    v.integer("max_tries", a.max_tries, 1, 100);
  });
  auto& k = c.sim.knowledge;
  v.section("knowledge", [&] {
    v.real("p_init", k.p_init, 1e-9, 1.0 - 1e-9);
    v.real("p_transit", k.p_transit, 1e-9, 1.0 - 1e-9);
    v.real("p_guess", k.p_guess, 1e-9, 1.0 - 1e-9);
    v.real("p_slip", k.p_slip, 1e-9, 1.0 - 1e-9);
  });
  v.section("scoring", [&] {
    v.real("accuracy_weight", c.sim.weights.accuracy, 0.0, 1e6);
    v.real("optimality_weight", c.sim.weights.optimality, 0.0, 1e6);
    v.real("time_weight", c.sim.weights.time, 0.0, 1e6);
    v.integer("calibration_students", c.sim.calibration_students, 2, 1000000);
    v.real("fast_quantile", c.sim.fast_quantile, 0.0, 1.0);
    v.real("slow_quantile", c.sim.slow_quantile, 0.0, 1.0);
  });
  v.section("variants", [&] {
    v.real("guided_fraction", c.sim.guided_fraction, 0.0, 1.0);
    v.integer("buggy_count", c.sim.buggy_count, 1, 100);
  });
  auto& d = c.drl;
  v.section("drl", [&] {
    v.real("learning_rate", d.learning_rate, 1e-9, 1.0);
    v.real("gamma", d.gamma, 0.0, 1.0);
    v.integer("batch_size", d.batch_size, 1, 1000000);
    v.integer("target_sync", d.target_sync_interval, 1, 1000000);
    v.integer("epochs", d.epochs, 1, 1000000);
    v.u64("seed", d.seed);
    v.real("held_out_fraction", d.held_out_fraction, 0.0, 0.9);
    v.int_list("hidden", d.hidden, 1, 4096);
  });
  v.section("report", [&] { v.integer("bootstrap_iterations", c.bootstrap_iterations, 100, 1000000); });
}

class Reader {
 public:
  Reader(const toml::table& root, fs::path base) : base_(std::move(base)) { stack_.push_back({&root, "", {}}); }

  void u64(const char* key, std::uint64_t& out) {
    if (auto n = take(key)) {
      auto v = n->value<std::int64_t>();
      if (!v || !n->is_integer()) config_error(path(key), "expected an integer");
      if (*v < 0) config_error(path(key), "must be non-negative");
      out = static_cast<std::uint64_t>(*v);
    }
  }

  void integer(const char* key, int& out, int lo, int hi, bool = true) {
    if (auto n = take(key)) {
      if (!n->is_integer()) config_error(path(key), "expected an integer");
      const auto v = *n->value<std::int64_t>();
      if (v < lo || v > hi) config_error(path(key), "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      out = static_cast<int>(v);
    }
  }

  void real(const char* key, double& out, double lo, double hi) {
    if (auto n = take(key)) {
      if (!n->is_number()) config_error(path(key), "expected a number");
      const double v = *n->value<double>();
      if (!(v >= lo && v <= hi)) config_error(path(key), "must lie in [" + format_double(lo) + ", " + format_double(hi) + "]");
      out = v;
    }
  }

  void int_list(const char* key, std::vector<int>& out, int lo, int hi) {
    if (auto n = take(key)) {
      const auto* arr = n->as_array();
      if (!arr || arr->empty()) config_error(path(key), "expected a non-empty array of integers");
      std::vector<int> values;
      for (const auto& e : *arr) {
        auto v = e.value<std::int64_t>();
        if (!e.is_integer() || *v < lo || *v > hi) {
          config_error(path(key), "entries must be integers in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        }
        values.push_back(static_cast<int>(*v));
      }
      out = std::move(values);
    }
  }

  void path(const char* key, fs::path& out, bool must_exist) {
    if (auto n = take(key)) {
      if (!n->is_string()) config_error(path(key), "expected a string");
      out = fs::path(*n->value<std::string>());
    }
    if (out.is_relative()) out = base_ / out;
    out = fs::weakly_canonical(out);
    if (must_exist && !fs::is_directory(out)) config_error(path(key), "directory " + out.string() + " does not exist");
  }

  void section(const char* key, const std::function<void()>& body) {
    const toml::table* t = nullptr;
    if (auto n = take(key)) {
      t = n->as_table();
      if (!t) config_error(path(key), "expected a table");
    }
    static const toml::table empty;
    stack_.push_back({t ? t : &empty, path(key), {}});
    body();
    finish();
    stack_.pop_back();
  }

  void finish() {
    const auto& top = stack_.back();
    for (const auto& [k, _] : *top.table) {
      const std::string name(k.str());
      if (!top.seen.count(name)) {
        throw Error(Errc::UnknownField, (top.prefix.empty() ? name : top.prefix + "." + name) + ": unknown field");
      }
    }
  }

 private:
  struct Frame {
    const toml::table* table;
    std::string prefix;
    std::set<std::string> seen;
  };

  std::string path(const char* key) const {
    return stack_.back().prefix.empty() ? std::string(key) : stack_.back().prefix + "." + key;
  }

  const toml::node* take(const char* key) {
    stack_.back().seen.insert(key);
    return stack_.back().table->get(key);
  }

  fs::path base_;
  std::vector<Frame> stack_;
};

class Writer {
 public:
  explicit Writer(bool for_hash) : for_hash_(for_hash) {}

  void u64(const char* key, std::uint64_t v) { line(key, std::to_string(v)); }
  void integer(const char* key, int v, int, int, bool affects_results = true) {
    if (affects_results || !for_hash_) line(key, std::to_string(v));
  }
  void real(const char* key, double v, double, double) { line(key, format_double(v)); }
  void int_list(const char* key, const std::vector<int>& v, int, int) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
    line(key, s + "]");
  }
  void path(const char* key, const fs::path& p, bool) {
    if (!for_hash_) line(key, quote(p.generic_string()));
  }
  void section(const char* key, const std::function<void()>& body) {
    out_ << "\n[" << key << "]\n";
    body();
  }

  std::string str() const { return out_.str(); }

 private:
  void line(const char* key, const std::string& value) { out_ << key << " = " << value << "\n"; }

  bool for_hash_;
  std::ostringstream out_;
};

// Writer takes values; adapt the mutable schema walk to it.
struct ConstWriter {
  Writer& w;
  void u64(const char* k, std::uint64_t& v) { w.u64(k, v); }
  void integer(const char* k, int& v, int lo, int hi, bool affects = true) { w.integer(k, v, lo, hi, affects); }
  void real(const char* k, double& v, double lo, double hi) { w.real(k, v, lo, hi); }
  void int_list(const char* k, std::vector<int>& v, int lo, int hi) { w.int_list(k, v, lo, hi); }
  void path(const char* k, fs::path& p, bool e) { w.path(k, p, e); }
  void section(const char* k, const std::function<void()>& body) { w.section(k, body); }
};

std::string render(const ExperimentConfig& config, bool for_hash) {
  ExperimentConfig copy = config;
  Writer w(for_hash);
  ConstWriter cw{w};
  describe(cw, copy);
  return w.str();
}

void validate(const ExperimentConfig& c) {
  auto wrap = [](const char* section, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      config_error(section, e.what());
    }
  };
  wrap("student", [&] { c.sim.population.validate(); });
  wrap("knowledge", [&] { c.sim.knowledge.validate(); });
  wrap("drl", [&] { c.drl.validate(); });
  if (c.sim.fast_quantile >= c.sim.slow_quantile) config_error("scoring.fast_quantile", "must be below slow_quantile");
  const auto& w = c.sim.weights;
  if (w.accuracy + w.optimality + w.time <= 0.0) config_error("scoring", "weights must not all be zero");
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) { EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr); }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view s) { EVP_DigestUpdate(ctx_, s.data(), s.size()); }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, md, &len);
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 15];
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& other) const {
  return resolved_toml(*this) == resolved_toml(other);
}

fs::path default_bank_dir() { return SCAFFOLD_DEFAULT_BANK_DIR; }

ExperimentConfig parse_config(std::string_view text, const fs::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "line " << e.source().begin.line << ": " << e.description();
    config_error("<toml>", msg.str());
  }
  ExperimentConfig c;
  c.bank = default_bank_dir();
  Reader r(root, fs::absolute(base_dir));
  describe(r, c);
  r.finish();
  c.sim.master_seed = c.master_seed;
  validate(c);
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("<file>", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), fs::absolute(path).parent_path());
}

std::string resolved_toml(const ExperimentConfig& config) { return render(config, false); }

std::string config_hash(const ExperimentConfig& config) {
  Sha256 h;
  h.update(render(config, true));
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(config.bank)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    h.update(f.filename().string());
    h.update(std::string(1, '\0'));
    h.update(ss.str());
  }
  return h.hex().substr(0, 16);
}

fs::path run_directory(const ExperimentConfig& config) {
  fs::path root = config.output_dir;
  if (const char* env = std::getenv(kOutputRootEnv); env && *env) root = env;
  return root / config_hash(config);
}

}  // namespace scaffold::experiment
