#include "toposdf/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <set>
#include <string_view>
#include <vector>

#include "toposdf/errors.hpp"
#include "toposdf/io.hpp"

namespace toposdf {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::size_t to_size(const std::string& key, std::string_view v) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ParameterError("config key '" + key + "': expected a non-negative integer, got '" +
                         std::string(v) + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ParameterError("config key '" + key + "': expected an unsigned integer, got '" +
                         std::string(v) + "'");
  }
  return out;
}

double to_double(const std::string& key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ParameterError("config key '" + key + "': expected a number, got '" + std::string(v) +
                         "'");
  }
  return out;
}

bool to_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ParameterError("config key '" + key + "': expected true or false, got '" +
                       std::string(v) + "'");
}

std::string_view init_name(InitScheme s) { return s == InitScheme::geometric ? "geometric" : "standard"; }

InitScheme init_from(const std::string& key, std::string_view v) {
  if (v == "geometric") return InitScheme::geometric;
  if (v == "standard") return InitScheme::standard;
  throw ParameterError("config key '" + key + "': unknown init scheme '" + std::string(v) + "'");
}

struct Field {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, std::string_view)> set;
};

#define SIZE_FIELD(name, member)                                                         \
  Field {                                                                                \
    name, [](const RunConfig& c) { return std::to_string(c.member); },                   \
        [](RunConfig& c, const std::string& k, std::string_view v) { c.member = to_size(k, v); } \
  }
#define DOUBLE_FIELD(name, member)                                                       \
  Field {                                                                                \
    name, [](const RunConfig& c) { return format_double(c.member); },                    \
        [](RunConfig& c, const std::string& k, std::string_view v) { c.member = to_double(k, v); } \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"input", [](const RunConfig& c) { return c.input; },
       [](RunConfig& c, const std::string&, std::string_view v) { c.input = std::string(v); }},
      {"output", [](const RunConfig& c) { return c.output; },
       [](RunConfig& c, const std::string&, std::string_view v) { c.output = std::string(v); }},
      DOUBLE_FIELD("normalize_half_extent", normalize_half_extent),
      SIZE_FIELD("layer_count", train.arch.layer_count),
      SIZE_FIELD("hidden_width", train.arch.hidden_width),
      SIZE_FIELD("skip_layer", train.arch.skip_layer),
      {"init", [](const RunConfig& c) { return std::string(init_name(c.train.init)); },
       [](RunConfig& c, const std::string& k, std::string_view v) { c.train.init = init_from(k, v); }},
      DOUBLE_FIELD("init_radius", train.init_radius),
      SIZE_FIELD("iterations", train.iterations),
      SIZE_FIELD("batch_points", train.batch_points),
      SIZE_FIELD("batch_queries", train.batch_queries),
      SIZE_FIELD("sigma_k", train.sigma_k),
      {"optimizer", [](const RunConfig& c) { return std::string(to_string(c.train.optimizer)); },
       [](RunConfig& c, const std::string&, std::string_view v) {
         c.train.optimizer = optimizer_from_string(v);
       }},
      DOUBLE_FIELD("base_lr", train.base_lr),
      SIZE_FIELD("warmup_iters", train.warmup_iters),
      DOUBLE_FIELD("sgd_noise_std", train.sgd_noise_std),
      SIZE_FIELD("topo_grid_resolution", train.topo.grid_resolution),
      {"filtration", [](const RunConfig& c) { return std::string(to_string(c.train.topo.filtration)); },
       [](RunConfig& c, const std::string&, std::string_view v) {
         c.train.topo.filtration = filtration_from_string(v);
       }},
      {"partition_rule",
       [](const RunConfig& c) { return std::string(to_string(c.train.topo.partition.rule)); },
       [](RunConfig& c, const std::string&, std::string_view v) {
         c.train.topo.partition.rule = partition_rule_from_string(v);
       }},
      SIZE_FIELD("partition_k", train.topo.partition.k),
      DOUBLE_FIELD("partition_threshold", train.topo.partition.threshold),
      {"include_essential",
       [](const RunConfig& c) { return std::string(c.train.topo.partition.include_essential ? "true" : "false"); },
       [](RunConfig& c, const std::string& k, std::string_view v) {
         c.train.topo.partition.include_essential = to_bool(k, v);
       }},
      {"birth_term_set",
       [](const RunConfig& c) { return std::string(to_string(c.train.topo.birth_term_set)); },
       [](RunConfig& c, const std::string&, std::string_view v) {
         c.train.topo.birth_term_set = birth_term_set_from_string(v);
       }},
      DOUBLE_FIELD("lambda1", train.weights.lambda1),
      DOUBLE_FIELD("lambda2", train.weights.lambda2),
      SIZE_FIELD("curriculum_start_iter", train.weights.curriculum_start_iter),
      SIZE_FIELD("snapshot_every", train.snapshot_every),
      {"seed", [](const RunConfig& c) { return std::to_string(c.train.seed); },
       [](RunConfig& c, const std::string& k, std::string_view v) { c.train.seed = to_u64(k, v); }},
      SIZE_FIELD("threads", threads),
      SIZE_FIELD("mesh_resolution", mesh_resolution),
      DOUBLE_FIELD("mesh_iso", mesh_iso),
      SIZE_FIELD("metric_samples", metrics.samples),
      {"metric_seed", [](const RunConfig& c) { return std::to_string(c.metrics.seed); },
       [](RunConfig& c, const std::string& k, std::string_view v) { c.metrics.seed = to_u64(k, v); }},
      SIZE_FIELD("sfl_grid_resolution", metrics.sfl_grid_resolution),
      SIZE_FIELD("sfl_k", metrics.sfl_k),
  };
  return table;
}

#undef SIZE_FIELD
#undef DOUBLE_FIELD

}  // namespace

void RunConfig::validate() const {
  train.validate();
  if (!(normalize_half_extent > 0.0)) throw ParameterError("normalize_half_extent must be positive");
  if (mesh_resolution < 8) throw ParameterError("mesh_resolution must be at least 8");
  if (metrics.samples == 0) throw ParameterError("metric_samples must be positive");
  if (metrics.sfl_grid_resolution < 2) throw ParameterError("sfl_grid_resolution must be >= 2");
}

RunConfig RunConfig::desk_preset() {
  RunConfig c;
  c.train = TrainConfig::desk_preset();
  c.mesh_resolution = 64;
  return c;
}

RunConfig parse_run_config(const std::string& text) { return parse_run_config(text, RunConfig{}); }

RunConfig parse_run_config(const std::string& text, const RunConfig& base) {
  std::map<std::string, const Field*> by_key;
  for (const auto& f : fields()) by_key.emplace(f.key, &f);

  RunConfig cfg = base;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::string_view rest(text);
  while (!rest.empty()) {
    const std::size_t nl = rest.find('\n');
    std::string_view line = trim(rest.substr(0, nl));
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = by_key.find(key);
    if (it == by_key.end()) {
      throw ParameterError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (!seen.insert(key).second) {
      throw ParameterError("config line " + std::to_string(line_no) + ": key '" + key +
                           "' given twice");
    }
    it->second->set(cfg, key, value);
  }
  if (!seen.contains("curriculum_start_iter")) {
    const std::size_t n = cfg.train.iterations;
    cfg.train.weights.curriculum_start_iter = n > 500 ? n - 500 : 0;
  }
  cfg.validate();
  return cfg;
}

std::string echo_run_config(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(config) + '\n';
  return out;
}

}  // namespace toposdf
