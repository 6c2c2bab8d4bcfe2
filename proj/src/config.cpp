#include "levyhom/config.hpp"
#include "levyhom/integrate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace levyhom {

namespace {

using nlohmann::json;

std::string join_errors(const std::vector<FieldError>& errors) {
  std::ostringstream os;
  os << "invalid configuration:";
  for (const auto& e : errors) os << "\n  " << e.field << ": " << e.constraint;
  return os.str();
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& prefix,
                    std::vector<FieldError>& errors) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key())) errors.push_back({prefix + it.key(), "unknown key"});
}

std::optional<double> get_number(const json& obj, const std::string& key, const std::string& field,
                                 std::vector<FieldError>& errors) {
  if (!obj.contains(key)) return std::nullopt;
  const json& v = obj.at(key);
  if (!v.is_number()) {
    errors.push_back({field, "must be a number"});
    return std::nullopt;
  }
  return v.get<double>();
}

std::vector<double> get_number_list(const json& v, const std::string& field,
                                    std::vector<FieldError>& errors) {
  std::vector<double> out;
  if (!v.is_array()) {
    errors.push_back({field, "must be an array of numbers"});
    return out;
  }
  for (const auto& x : v) {
    if (!x.is_number()) {
      errors.push_back({field, "must contain only numbers"});
      return {};
    }
    out.push_back(x.get<double>());
  }
  return out;
}

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

MarkDistribution parse_marks(const json& m, int dim, const std::string& prefix,
                             std::vector<FieldError>& errors) {
  if (!m.is_object() || !m.contains("type") || !m.at("type").is_string()) {
    errors.push_back({prefix + ".type", "required string: atoms | uniform | pareto"});
    return AtomMarks{};
  }
  const std::string type = m.at("type").get<std::string>();
  if (type == "atoms") {
    reject_unknown(m, {"type", "points", "weights"}, prefix + ".", errors);
    AtomMarks atoms;
    if (!m.contains("points") || !m.at("points").is_array() || m.at("points").empty()) {
      errors.push_back({prefix + ".points", "required nonempty array"});
      return atoms;
    }
    for (const auto& p : m.at("points")) {
      if (p.is_number()) {
        atoms.points.push_back(Vec::Constant(1, p.get<double>()));
      } else {
        const auto v = get_number_list(p, prefix + ".points", errors);
        atoms.points.push_back(to_vec(v));
      }
    }
    if (m.contains("weights")) {
      atoms.weights = get_number_list(m.at("weights"), prefix + ".weights", errors);
    } else {
      atoms.weights.assign(atoms.points.size(), 1.0 / static_cast<double>(atoms.points.size()));
    }
    double total = 0.0;
    for (double w : atoms.weights) total += w;
    if (total > 0.0)
      for (double& w : atoms.weights) w /= total;
    for (const auto& p : atoms.points)
      if (p.size() != dim) errors.push_back({prefix + ".points", "atom dimension must equal measure dim"});
    return atoms;
  }
  if (type == "uniform") {
    reject_unknown(m, {"type", "lower", "upper"}, prefix + ".", errors);
    UniformMarks u;
    u.lower = get_number(m, "lower", prefix + ".lower", errors).value_or(u.lower);
    u.upper = get_number(m, "upper", prefix + ".upper", errors).value_or(u.upper);
    return u;
  }
  if (type == "pareto") {
    reject_unknown(m, {"type", "lower", "upper", "tail_index", "positive_fraction"}, prefix + ".", errors);
    ParetoMarks p;
    p.lower = get_number(m, "lower", prefix + ".lower", errors).value_or(p.lower);
    if (m.contains("upper") && m.at("upper").is_string() && m.at("upper").get<std::string>() == "inf")
      p.upper = std::numeric_limits<double>::infinity();
    else
      p.upper = get_number(m, "upper", prefix + ".upper", errors).value_or(p.upper);
    p.tail_index = get_number(m, "tail_index", prefix + ".tail_index", errors).value_or(p.tail_index);
    p.positive_fraction =
        get_number(m, "positive_fraction", prefix + ".positive_fraction", errors).value_or(p.positive_fraction);
    return p;
  }
  errors.push_back({prefix + ".type", "must be one of atoms | uniform | pareto"});
  return AtomMarks{};
}

}  // namespace

ConfigError::ConfigError(std::vector<FieldError> errors)
    : std::runtime_error(join_errors(errors)), errors_(std::move(errors)) {}

double ExperimentConfig::step_for(double eps) const {
  if (base_step) return *base_step;
  return default_base_step(eps, measure.total_intensity, step_cap);
}

std::vector<double> geometric_ladder(double start, double ratio, int count) {
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(start * std::pow(ratio, k));
  return out;
}

LevyMeasureSpec parse_measure(const json& doc, std::vector<FieldError>& errors,
                              const std::string& prefix) {
  LevyMeasureSpec spec;
  if (!doc.is_object()) {
    errors.push_back({prefix, "required object"});
    return spec;
  }
  const std::size_t before = errors.size();
  const std::string kind = doc.value("kind", std::string("finite_activity"));
  int dim = 1;
  if (doc.contains("dim")) {
    if (!doc.at("dim").is_number_integer())
      errors.push_back({prefix + ".dim", "must be an integer"});
    else
      dim = doc.at("dim").get<int>();
  }
  if (dim < 1 || dim > kMaxDim) {
    errors.push_back({prefix + ".dim", "must be in [1, " + std::to_string(kMaxDim) + "]"});
    return spec;
  }

  try {
    if (kind == "finite_activity") {
      reject_unknown(doc, {"kind", "dim", "intensity", "marks"}, prefix + ".", errors);
      const auto intensity = get_number(doc, "intensity", prefix + ".intensity", errors);
      if (!intensity) errors.push_back({prefix + ".intensity", "required number >= 0"});
      else if (!(*intensity >= 0.0)) errors.push_back({prefix + ".intensity", "must be >= 0"});
      if (!doc.contains("marks")) errors.push_back({prefix + ".marks", "required object"});
      const MarkDistribution marks =
          doc.contains("marks") ? parse_marks(doc.at("marks"), dim, prefix + ".marks", errors) : AtomMarks{};
      if (errors.size() == before) spec = compound_poisson(*intensity, marks, dim);
    } else if (kind == "truncated_infinite_activity") {
      reject_unknown(doc, {"kind", "dim", "scale", "alpha", "upper", "truncation", "positive_fraction"},
                     prefix + ".", errors);
      const auto scale = get_number(doc, "scale", prefix + ".scale", errors);
      const auto alpha = get_number(doc, "alpha", prefix + ".alpha", errors);
      const auto upper = get_number(doc, "upper", prefix + ".upper", errors);
      const auto rho = get_number(doc, "truncation", prefix + ".truncation", errors);
      const double pf = get_number(doc, "positive_fraction", prefix + ".positive_fraction", errors).value_or(0.5);
      if (!scale) errors.push_back({prefix + ".scale", "required number > 0"});
      if (!alpha) errors.push_back({prefix + ".alpha", "required number in (0, 2)"});
      if (!upper) errors.push_back({prefix + ".upper", "required number > truncation"});
      if (!rho) errors.push_back({prefix + ".truncation", "required number > 0"});
      if (errors.size() == before) spec = truncated_power_law(*scale, *alpha, *upper, *rho, dim, pf);
    } else {
      errors.push_back({prefix + ".kind", "must be finite_activity or truncated_infinite_activity"});
    }
  } catch (const std::invalid_argument& e) {
    errors.push_back({prefix, e.what()});
  }
  return spec;
}

ExperimentConfig parse_config(const json& doc) {
  std::vector<FieldError> errors;
  ExperimentConfig cfg;
  if (!doc.is_object()) throw ConfigError(std::vector<FieldError>{{"<root>", "configuration must be a JSON object"}});
  cfg.source = doc;

  reject_unknown(doc,
                 {"schema_version", "preset", "preset_params", "measure", "epsilons", "horizon",
                  "base_step", "step_cap", "n_paths", "thetas", "deltas", "master_seed",
                  "output_dir", "emit_plots", "initial_q", "initial_p", "rate_tolerance",
                  "observation_points", "export_paths"},
                 "", errors);

  if (!doc.contains("schema_version") || !doc.at("schema_version").is_number_integer() ||
      doc.at("schema_version").get<int>() != kConfigSchemaVersion)
    errors.push_back({"schema_version", "required, must equal " + std::to_string(kConfigSchemaVersion)});

  if (!doc.contains("preset") || !doc.at("preset").is_string()) {
    errors.push_back({"preset", "required string naming a registered preset"});
  } else {
    cfg.preset = doc.at("preset").get<std::string>();
    bool known = false;
    for (const auto& p : preset_registry()) known = known || p.name == cfg.preset;
    if (!known) errors.push_back({"preset", "unknown preset '" + cfg.preset + "'"});
  }

  if (doc.contains("preset_params")) {
    const json& pp = doc.at("preset_params");
    if (!pp.is_object()) {
      errors.push_back({"preset_params", "must be an object"});
    } else {
      reject_unknown(pp, {"n", "gamma_base", "gamma_amp", "gamma_coupling", "sigma", "potential_amp", "force_amp"},
                     "preset_params.", errors);
      if (pp.contains("n")) {
        if (!pp.at("n").is_number_integer())
          errors.push_back({"preset_params.n", "must be an integer"});
        else
          cfg.preset_params.n = pp.at("n").get<int>();
      }
      cfg.preset_params.gamma_base = get_number(pp, "gamma_base", "preset_params.gamma_base", errors);
      cfg.preset_params.gamma_amp = get_number(pp, "gamma_amp", "preset_params.gamma_amp", errors);
      cfg.preset_params.gamma_coupling = get_number(pp, "gamma_coupling", "preset_params.gamma_coupling", errors);
      cfg.preset_params.sigma = get_number(pp, "sigma", "preset_params.sigma", errors);
      cfg.preset_params.potential_amp = get_number(pp, "potential_amp", "preset_params.potential_amp", errors);
      cfg.preset_params.force_amp = get_number(pp, "force_amp", "preset_params.force_amp", errors);
    }
  }
  const int n = cfg.preset_params.n.value_or(1);
  if (n < 1 || n > kMaxDim) errors.push_back({"preset_params.n", "must be in [1, " + std::to_string(kMaxDim) + "]"});

  if (!doc.contains("measure")) {
    errors.push_back({"measure", "required object"});
  } else {
    cfg.measure = parse_measure(doc.at("measure"), errors);
    if (cfg.measure.dim != n) errors.push_back({"measure.dim", "must equal the model's noise dimension (n)"});
  }

  if (doc.contains("epsilons")) {
    const json& e = doc.at("epsilons");
    if (e.is_array()) {
      cfg.epsilons = get_number_list(e, "epsilons", errors);
    } else if (e.is_object()) {
      reject_unknown(e, {"start", "ratio", "count"}, "epsilons.", errors);
      const auto start = get_number(e, "start", "epsilons.start", errors);
      const auto ratio = get_number(e, "ratio", "epsilons.ratio", errors);
      const bool count_ok = e.contains("count") && e.at("count").is_number_integer();
      if (!start || !ratio || !count_ok)
        errors.push_back({"epsilons", "geometric ladder needs start, ratio and integer count"});
      else
        cfg.epsilons = geometric_ladder(*start, *ratio, e.at("count").get<int>());
    } else {
      errors.push_back({"epsilons", "must be an array or {start, ratio, count}"});
    }
  } else {
    cfg.epsilons = geometric_ladder(0.25, 0.5, 8);
  }
  if (cfg.epsilons.size() < 4) errors.push_back({"epsilons", "need at least 4 values for rate fitting"});
  for (std::size_t k = 0; k < cfg.epsilons.size(); ++k) {
    const double e = cfg.epsilons[k];
    if (!(e > 0.0 && e <= 1.0))
      errors.push_back({"epsilons[" + std::to_string(k) + "]", "must lie in (0, 1]"});
    if (k > 0 && !(e < cfg.epsilons[k - 1]))
      errors.push_back({"epsilons[" + std::to_string(k) + "]", "ladder must be strictly decreasing"});
  }

  cfg.horizon = get_number(doc, "horizon", "horizon", errors).value_or(cfg.horizon);
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) errors.push_back({"horizon", "must be > 0"});

  if (doc.contains("base_step")) {
    const json& b = doc.at("base_step");
    if (b.is_string() && b.get<std::string>() == "auto") {
      cfg.base_step.reset();
    } else if (b.is_number() && b.get<double>() > 0.0) {
      cfg.base_step = b.get<double>();
    } else {
      errors.push_back({"base_step", "must be \"auto\" or a number > 0"});
    }
  }
  cfg.step_cap = get_number(doc, "step_cap", "step_cap", errors).value_or(cfg.step_cap);
  if (!(cfg.step_cap > 0.0)) errors.push_back({"step_cap", "must be > 0"});

  if (doc.contains("n_paths")) {
    if (!doc.at("n_paths").is_number_integer() || doc.at("n_paths").get<long long>() < 100)
      errors.push_back({"n_paths", "must be an integer >= 100"});
    else
      cfg.n_paths = doc.at("n_paths").get<std::size_t>();
  }

  if (doc.contains("thetas")) cfg.thetas = get_number_list(doc.at("thetas"), "thetas", errors);
  if (cfg.thetas.empty()) errors.push_back({"thetas", "need at least one moment order"});
  for (double th : cfg.thetas)
    if (!(th > 0.0)) errors.push_back({"thetas", "moment orders must be > 0"});
  if (doc.contains("deltas")) cfg.deltas = get_number_list(doc.at("deltas"), "deltas", errors);
  for (double d : cfg.deltas)
    if (!(d > 0.0)) errors.push_back({"deltas", "thresholds must be > 0"});

  if (doc.contains("master_seed")) {
    if (!doc.at("master_seed").is_number_unsigned())
      errors.push_back({"master_seed", "must be a non-negative integer"});
    else
      cfg.master_seed = doc.at("master_seed").get<std::uint64_t>();
  }
  if (doc.contains("output_dir")) {
    if (!doc.at("output_dir").is_string() || doc.at("output_dir").get<std::string>().empty())
      errors.push_back({"output_dir", "must be a nonempty string"});
    else
      cfg.output_dir = doc.at("output_dir").get<std::string>();
  }
  if (doc.contains("emit_plots")) {
    if (!doc.at("emit_plots").is_boolean()) errors.push_back({"emit_plots", "must be a boolean"});
    else cfg.emit_plots = doc.at("emit_plots").get<bool>();
  }
  if (doc.contains("export_paths")) {
    if (!doc.at("export_paths").is_boolean()) errors.push_back({"export_paths", "must be a boolean"});
    else cfg.export_paths = doc.at("export_paths").get<bool>();
  }

  cfg.initial_q.assign(n, 0.0);
  cfg.initial_p.assign(n, 0.0);
  if (doc.contains("initial_q")) cfg.initial_q = get_number_list(doc.at("initial_q"), "initial_q", errors);
  if (doc.contains("initial_p")) cfg.initial_p = get_number_list(doc.at("initial_p"), "initial_p", errors);
  if (static_cast<int>(cfg.initial_q.size()) != n) errors.push_back({"initial_q", "length must equal n"});
  if (static_cast<int>(cfg.initial_p.size()) != n) errors.push_back({"initial_p", "length must equal n"});

  cfg.rate_tolerance = get_number(doc, "rate_tolerance", "rate_tolerance", errors).value_or(cfg.rate_tolerance);
  if (!(cfg.rate_tolerance >= 0.0)) errors.push_back({"rate_tolerance", "must be >= 0"});

  if (doc.contains("observation_points")) {
    if (!doc.at("observation_points").is_number_integer() || doc.at("observation_points").get<int>() < 1)
      errors.push_back({"observation_points", "must be an integer >= 1"});
    else
      cfg.observation_points = doc.at("observation_points").get<int>();
  }

  if (errors.empty() && !cfg.preset.empty()) {
    try {
      make_preset(cfg.preset, cfg.preset_params);
    } catch (const std::invalid_argument& e) {
      errors.push_back({"preset_params", e.what()});
    }
  }

  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::vector<FieldError>{{"<file>", "cannot open '" + path + "'"}});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::vector<FieldError>{{"<file>", std::string("malformed JSON: ") + e.what()}});
  }
  return parse_config(doc);
}

std::string config_hash(const json& doc) {
  // nlohmann::json objects keep keys sorted, so dump() is canonical.
  const std::string text = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace levyhom
