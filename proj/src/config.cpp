#include "evimmd/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "evimmd/csv.hpp"
#include "evimmd/error.hpp"

namespace evimmd {

namespace {

const std::vector<std::string>& top_level_keys() {
  static const std::vector<std::string> keys = {
      "method",         "target",          "N",
      "maxIter",        "L",               "tau_star",
      "a",              "b",               "c",
      "step_size",      "bandwidth",       "lmc_a",
      "lmc_b",          "lmc_c",           "lbfgs_memory",
      "lbfgs_max_inner", "lbfgs_grad_tol", "seed",
      "output_dir",     "metrics_stride",  "reference_samples",
      "eval_bandwidth", "snapshots",       "strict_deterministic",
      "sweep"};
  return keys;
}

const std::vector<std::string>& target_keys() {
  static const std::vector<std::string> keys = {"name", "d", "sigma", "path", "train_size"};
  return keys;
}

const std::vector<std::string>& sweep_keys() {
  static const std::vector<std::string> keys = {"a", "c", "tau_star", "d"};
  return keys;
}

std::string where(const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  if (mark.is_null()) return "";
  return " (line " + std::to_string(mark.line + 1) + ")";
}

void check_keys(const YAML::Node& map, const std::vector<std::string>& known,
                const std::string& prefix) {
  for (const auto& entry : map) {
    const std::string key = entry.first.as<std::string>();
    if (std::find(known.begin(), known.end(), key) != known.end()) continue;
    std::string message = "unknown key" + where(entry.first);
    if (auto hint = suggest_key(key, known)) message += "; did you mean '" + *hint + "'?";
    throw ValidationError(prefix + key, message);
  }
}

std::string scalar(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) throw ValidationError(field, "expected a scalar value" + where(node));
  return node.Scalar();
}

double real_value(const YAML::Node& node, const std::string& field) {
  const std::string text = scalar(node, field);
  std::string_view s(text);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ValidationError(field, "expected a finite number, got '" + text + "'" + where(node));
  }
  return v;
}

// Integers are read through a double so "-5" is reported as out of range
// instead of failing as a type mismatch.
std::size_t count_value(const YAML::Node& node, const std::string& field,
                        std::size_t minimum) {
  const double v = real_value(node, field);
  if (v != std::floor(v)) throw ValidationError(field, "must be an integer" + where(node));
  if (v < static_cast<double>(minimum)) {
    throw ValidationError(field, "must be at least " + std::to_string(minimum) + where(node));
  }
  if (v > 9.0e15) throw ValidationError(field, "is too large" + where(node));
  return static_cast<std::size_t>(v);
}

double positive_value(const YAML::Node& node, const std::string& field) {
  const double v = real_value(node, field);
  if (!(v > 0.0)) throw ValidationError(field, "must be positive" + where(node));
  return v;
}

bool bool_value(const YAML::Node& node, const std::string& field) {
  const std::string text = scalar(node, field);
  if (text == "true" || text == "True" || text == "yes") return true;
  if (text == "false" || text == "False" || text == "no") return false;
  throw ValidationError(field, "expected true or false" + where(node));
}

std::uint64_t seed_value(std::string_view text, const std::string& field) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError(field, "expected a non-negative integer, got '" +
                                     std::string(text) + "'");
  }
  return v;
}

template <class T, class Read>
std::vector<T> list_value(const YAML::Node& node, const std::string& field, Read read) {
  std::vector<T> out;
  if (node.IsScalar()) {
    out.push_back(read(node, field));
    return out;
  }
  if (!node.IsSequence()) throw ValidationError(field, "expected a list" + where(node));
  for (const auto& item : node) out.push_back(read(item, field));
  return out;
}

Method parse_method(const YAML::Node& node) {
  const std::string name = scalar(node, "method");
  for (Method m : {Method::kEviMmd, Method::kExplicitMmd, Method::kEnergyDistance,
                   Method::kSvgd, Method::kLmc}) {
    if (method_name(m) == name) return m;
  }
  throw ValidationError("method", "unknown method '" + name +
                                      "' (expected evi_mmd, explicit_mmd, "
                                      "energy_distance, svgd or lmc)" + where(node));
}

TargetKind parse_target_kind(const YAML::Node& node, const std::string& field) {
  const std::string name = scalar(node, field);
  for (TargetKind t : {TargetKind::kStar, TargetKind::kEight, TargetKind::kWave,
                       TargetKind::kGaussian, TargetKind::kCsv}) {
    if (target_name(t) == name) return t;
  }
  throw ValidationError(field, "unknown target '" + name +
                                   "' (expected star, eight, wave, gaussian or csv)" +
                                   where(node));
}

TargetSpec parse_target(const YAML::Node& node) {
  TargetSpec spec;
  if (node.IsScalar()) {
    spec.kind = parse_target_kind(node, "target");
    return spec;
  }
  if (!node.IsMap()) throw ValidationError("target", "expected a name or a map" + where(node));
  check_keys(node, target_keys(), "target.");
  if (!node["name"]) throw ValidationError("target.name", "is required");
  spec.kind = parse_target_kind(node["name"], "target.name");
  if (node["d"]) spec.dim = count_value(node["d"], "target.d", 1);
  if (node["sigma"]) spec.sigma = positive_value(node["sigma"], "target.sigma");
  if (node["path"]) spec.path = scalar(node["path"], "target.path");
  if (node["train_size"]) {
    spec.train_size = count_value(node["train_size"], "target.train_size", 1);
  }
  return spec;
}

// Dimension of the target as far as it is known before any run.
std::size_t target_dimension(const TargetSpec& spec) {
  switch (spec.kind) {
    case TargetKind::kGaussian:
      return spec.dim;
    case TargetKind::kCsv: {
      std::ifstream in(spec.path);
      if (!in) throw IoError(spec.path, "cannot open for reading");
      std::string header;
      std::getline(in, header);
      std::size_t dims = 0;
      std::size_t pos = 0;
      while ((pos = header.find("dim_", pos)) != std::string::npos) {
        ++dims;
        pos += 4;
      }
      if (dims == 0) throw ParseError(spec.path + ": header has no dim_ columns", 1, 0);
      return dims;
    }
    default:
      return 2;
  }
}

bool density_method(Method m) { return m == Method::kSvgd || m == Method::kLmc; }

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kEviMmd: return "evi_mmd";
    case Method::kExplicitMmd: return "explicit_mmd";
    case Method::kEnergyDistance: return "energy_distance";
    case Method::kSvgd: return "svgd";
    case Method::kLmc: return "lmc";
  }
  return "?";
}

std::string_view target_name(TargetKind t) {
  switch (t) {
    case TargetKind::kStar: return "star";
    case TargetKind::kEight: return "eight";
    case TargetKind::kWave: return "wave";
    case TargetKind::kGaussian: return "gaussian";
    case TargetKind::kCsv: return "csv";
  }
  return "?";
}

std::optional<std::string> suggest_key(std::string_view key,
                                       const std::vector<std::string>& known) {
  auto distance = [](std::string_view s, std::string_view t) {
    std::vector<std::size_t> prev(t.size() + 1), cur(t.size() + 1);
    for (std::size_t j = 0; j <= t.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= s.size(); ++i) {
      cur[0] = i;
      for (std::size_t j = 1; j <= t.size(); ++j) {
        const std::size_t subst = prev[j - 1] + (s[i - 1] == t[j - 1] ? 0 : 1);
        cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
      }
      std::swap(prev, cur);
    }
    return prev[t.size()];
  };
  std::optional<std::string> best;
  std::size_t best_distance = 3;
  for (const std::string& candidate : known) {
    const std::size_t d = distance(key, candidate);
    if (d < best_distance) {
      best_distance = d;
      best = candidate;
    }
  }
  return best;
}

ExperimentConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root.IsMap()) throw ParseError("config must be a key-value map", 1, 1);
  check_keys(root, top_level_keys(), "");

  ExperimentConfig cfg;
  if (!root["method"]) throw ValidationError("method", "is required");
  if (!root["target"]) throw ValidationError("target", "is required");
  cfg.method = parse_method(root["method"]);
  cfg.target = parse_target(root["target"]);

  if (root["N"]) cfg.num_particles = count_value(root["N"], "N", 1);
  if (root["maxIter"]) cfg.max_iter = count_value(root["maxIter"], "maxIter", 1);
  if (root["L"]) cfg.mc_samples = count_value(root["L"], "L", 1);
  if (root["tau_star"] && !(root["tau_star"].IsScalar() && root["tau_star"].Scalar() == "auto")) {
    cfg.tau_star = positive_value(root["tau_star"], "tau_star");
    cfg.tau_star_follows_dim = false;
  } else {
    cfg.tau_star = static_cast<double>(target_dimension(cfg.target));
    cfg.tau_star_follows_dim = true;
  }
  if (root["a"]) {
    const YAML::Node a = root["a"];
    if (a.IsScalar() && a.Scalar() == "auto") {
      cfg.a.reset();
    } else {
      cfg.a = positive_value(a, "a");
    }
  }
  if (root["b"]) cfg.b = positive_value(root["b"], "b");
  if (root["c"]) cfg.c = positive_value(root["c"], "c");

  if (root["step_size"]) {
    cfg.step_size = positive_value(root["step_size"], "step_size");
  } else if (cfg.method == Method::kExplicitMmd) {
    cfg.step_size = cfg.tau_star;
    cfg.step_follows_tau = true;
  }
  if (root["bandwidth"]) cfg.bandwidth = positive_value(root["bandwidth"], "bandwidth");
  if (root["lmc_a"]) cfg.lmc_a = positive_value(root["lmc_a"], "lmc_a");
  if (root["lmc_b"]) cfg.lmc_b = positive_value(root["lmc_b"], "lmc_b");
  if (root["lmc_c"]) cfg.lmc_c = positive_value(root["lmc_c"], "lmc_c");

  if (root["lbfgs_memory"]) {
    cfg.lbfgs_memory = count_value(root["lbfgs_memory"], "lbfgs_memory", 1);
  }
  if (root["lbfgs_max_inner"]) {
    cfg.lbfgs_max_inner = count_value(root["lbfgs_max_inner"], "lbfgs_max_inner", 1);
  }
  if (root["lbfgs_grad_tol"]) {
    cfg.lbfgs_grad_tol = positive_value(root["lbfgs_grad_tol"], "lbfgs_grad_tol");
  }

  if (root["seed"]) cfg.seed = seed_value(scalar(root["seed"], "seed"), "seed");
  if (root["output_dir"]) cfg.output_dir = scalar(root["output_dir"], "output_dir");
  cfg.metrics_stride = density_method(cfg.method) ? 100 : 1;
  if (root["metrics_stride"]) {
    cfg.metrics_stride = count_value(root["metrics_stride"], "metrics_stride", 1);
  }
  if (root["reference_samples"]) {
    cfg.reference_samples = count_value(root["reference_samples"], "reference_samples", 1);
  }
  if (root["eval_bandwidth"]) {
    cfg.eval_bandwidth = positive_value(root["eval_bandwidth"], "eval_bandwidth");
  }
  if (root["snapshots"]) {
    cfg.snapshots = list_value<std::size_t>(
        root["snapshots"], "snapshots",
        [](const YAML::Node& n, const std::string& f) { return count_value(n, f, 0); });
  } else {
    for (std::size_t s : {std::size_t{50}, std::size_t{500}, cfg.max_iter}) {
      if (s <= cfg.max_iter) cfg.snapshots.push_back(s);
    }
  }
  std::sort(cfg.snapshots.begin(), cfg.snapshots.end());
  cfg.snapshots.erase(std::unique(cfg.snapshots.begin(), cfg.snapshots.end()),
                      cfg.snapshots.end());
  if (root["strict_deterministic"]) {
    cfg.strict_deterministic = bool_value(root["strict_deterministic"], "strict_deterministic");
  }

  if (root["sweep"]) {
    const YAML::Node sweep = root["sweep"];
    if (!sweep.IsMap()) throw ValidationError("sweep", "expected a map" + where(sweep));
    check_keys(sweep, sweep_keys(), "sweep.");
    auto reals = [](const YAML::Node& n, const std::string& f) { return positive_value(n, f); };
    auto counts = [](const YAML::Node& n, const std::string& f) { return count_value(n, f, 1); };
    if (sweep["a"]) cfg.sweep.a = list_value<double>(sweep["a"], "sweep.a", reals);
    if (sweep["c"]) cfg.sweep.c = list_value<double>(sweep["c"], "sweep.c", reals);
    if (sweep["tau_star"]) {
      cfg.sweep.tau_star = list_value<double>(sweep["tau_star"], "sweep.tau_star", reals);
    }
    if (sweep["d"]) cfg.sweep.dim = list_value<std::size_t>(sweep["d"], "sweep.d", counts);
  }

  if (const char* env = std::getenv("EVI_MMD_SEED"); env != nullptr && *env != '\0') {
    cfg.seed = seed_value(env, "EVI_MMD_SEED");
  }

  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ":" + std::to_string(e.line()) + ":" +
                         std::to_string(e.column()) + ": " + e.what(),
                     e.line(), e.column());
  }
}

void validate(const ExperimentConfig& cfg) {
  auto require_positive = [](double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(field, "must be positive");
  };
  if (cfg.num_particles < 1) throw ValidationError("N", "must be at least 1");
  if (cfg.max_iter < 1) throw ValidationError("maxIter", "must be at least 1");
  if (cfg.mc_samples < 1) throw ValidationError("L", "must be at least 1");
  require_positive(cfg.tau_star, "tau_star");
  if (cfg.a) require_positive(*cfg.a, "a");
  require_positive(cfg.b, "b");
  require_positive(cfg.c, "c");
  require_positive(cfg.step_size, "step_size");
  require_positive(cfg.bandwidth, "bandwidth");
  require_positive(cfg.lmc_a, "lmc_a");
  require_positive(cfg.lmc_b, "lmc_b");
  require_positive(cfg.lmc_c, "lmc_c");
  require_positive(cfg.lbfgs_grad_tol, "lbfgs_grad_tol");
  require_positive(cfg.eval_bandwidth, "eval_bandwidth");
  if (cfg.lbfgs_memory < 1) throw ValidationError("lbfgs_memory", "must be at least 1");
  if (cfg.lbfgs_max_inner < 1) throw ValidationError("lbfgs_max_inner", "must be at least 1");
  if (cfg.metrics_stride < 1) throw ValidationError("metrics_stride", "must be at least 1");
  if (cfg.reference_samples < 1) {
    throw ValidationError("reference_samples", "must be at least 1");
  }
  for (std::size_t s : cfg.snapshots) {
    if (s > cfg.max_iter) {
      throw ValidationError("snapshots", "iteration " + std::to_string(s) +
                                             " exceeds maxIter");
    }
  }

  const bool uses_auto_a =
      !cfg.a && (cfg.method == Method::kEviMmd || cfg.method == Method::kExplicitMmd);
  if (uses_auto_a && cfg.num_particles < 2) {
    throw ValidationError("N", "automatic a needs at least 2 particles");
  }

  const TargetSpec& t = cfg.target;
  if (t.kind == TargetKind::kGaussian) {
    if (t.dim < 1) throw ValidationError("target.d", "must be at least 1");
    require_positive(t.sigma, "target.sigma");
  }
  if (t.kind == TargetKind::kCsv) {
    if (t.path.empty()) throw ValidationError("target.path", "is required for csv targets");
    if (density_method(cfg.method)) {
      throw ValidationError("method", std::string(method_name(cfg.method)) +
                                          " needs a density and cannot use a csv target");
    }
  }
  // Synthetic targets used through samples draw a training set of train_size.
  const bool generated =
      t.kind != TargetKind::kCsv &&
      (t.kind == TargetKind::kGaussian || cfg.method == Method::kEnergyDistance) &&
      !density_method(cfg.method);
  if (generated && cfg.mc_samples > t.train_size) {
    throw ValidationError("L", "mini-batch size exceeds target.train_size");
  }

  if (!cfg.sweep.dim.empty() && t.kind != TargetKind::kGaussian) {
    throw ValidationError("sweep.d", "dimension sweeps need the gaussian target");
  }
  for (double v : cfg.sweep.a) require_positive(v, "sweep.a");
  for (double v : cfg.sweep.c) require_positive(v, "sweep.c");
  for (double v : cfg.sweep.tau_star) require_positive(v, "sweep.tau_star");
}

std::string dump_config(const ExperimentConfig& cfg) {
  YAML::Emitter out;
  // Shortest text that parses back to the same double.
  auto real = [](double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  auto real_list = [&](const std::vector<double>& values) {
    out << YAML::Flow << YAML::BeginSeq;
    for (double v : values) out << real(v);
    out << YAML::EndSeq;
  };
  auto count_list = [&](const std::vector<std::size_t>& values) {
    out << YAML::Flow << YAML::BeginSeq;
    for (std::size_t v : values) out << v;
    out << YAML::EndSeq;
  };

  out << YAML::BeginMap;
  out << YAML::Key << "method" << YAML::Value << std::string(method_name(cfg.method));
  out << YAML::Key << "target" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << std::string(target_name(cfg.target.kind));
  if (cfg.target.kind == TargetKind::kGaussian) {
    out << YAML::Key << "d" << YAML::Value << cfg.target.dim;
    out << YAML::Key << "sigma" << YAML::Value << real(cfg.target.sigma);
  }
  if (cfg.target.kind == TargetKind::kCsv) {
    out << YAML::Key << "path" << YAML::Value << YAML::DoubleQuoted << cfg.target.path;
  }
  out << YAML::Key << "train_size" << YAML::Value << cfg.target.train_size;
  out << YAML::EndMap;

  out << YAML::Key << "N" << YAML::Value << cfg.num_particles;
  out << YAML::Key << "maxIter" << YAML::Value << cfg.max_iter;
  out << YAML::Key << "L" << YAML::Value << cfg.mc_samples;
  out << YAML::Key << "tau_star" << YAML::Value
      << (cfg.tau_star_follows_dim ? std::string("auto") : real(cfg.tau_star));
  out << YAML::Key << "a" << YAML::Value << (cfg.a ? real(*cfg.a) : std::string("auto"));
  out << YAML::Key << "b" << YAML::Value << real(cfg.b);
  out << YAML::Key << "c" << YAML::Value << real(cfg.c);
  if (!cfg.step_follows_tau) {
    out << YAML::Key << "step_size" << YAML::Value << real(cfg.step_size);
  }
  out << YAML::Key << "bandwidth" << YAML::Value << real(cfg.bandwidth);
  out << YAML::Key << "lmc_a" << YAML::Value << real(cfg.lmc_a);
  out << YAML::Key << "lmc_b" << YAML::Value << real(cfg.lmc_b);
  out << YAML::Key << "lmc_c" << YAML::Value << real(cfg.lmc_c);
  out << YAML::Key << "lbfgs_memory" << YAML::Value << cfg.lbfgs_memory;
  out << YAML::Key << "lbfgs_max_inner" << YAML::Value << cfg.lbfgs_max_inner;
  out << YAML::Key << "lbfgs_grad_tol" << YAML::Value << real(cfg.lbfgs_grad_tol);
  out << YAML::Key << "seed" << YAML::Value << cfg.seed;
  out << YAML::Key << "output_dir" << YAML::Value << YAML::DoubleQuoted << cfg.output_dir;
  out << YAML::Key << "metrics_stride" << YAML::Value << cfg.metrics_stride;
  out << YAML::Key << "reference_samples" << YAML::Value << cfg.reference_samples;
  out << YAML::Key << "eval_bandwidth" << YAML::Value << real(cfg.eval_bandwidth);
  out << YAML::Key << "snapshots" << YAML::Value;
  count_list(cfg.snapshots);
  out << YAML::Key << "strict_deterministic" << YAML::Value << cfg.strict_deterministic;
  if (!cfg.sweep.empty()) {
    out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    if (!cfg.sweep.a.empty()) {
      out << YAML::Key << "a" << YAML::Value;
      real_list(cfg.sweep.a);
    }
    if (!cfg.sweep.c.empty()) {
      out << YAML::Key << "c" << YAML::Value;
      real_list(cfg.sweep.c);
    }
    if (!cfg.sweep.tau_star.empty()) {
      out << YAML::Key << "tau_star" << YAML::Value;
      real_list(cfg.sweep.tau_star);
    }
    if (!cfg.sweep.dim.empty()) {
      out << YAML::Key << "d" << YAML::Value;
      count_list(cfg.sweep.dim);
    }
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace evimmd
