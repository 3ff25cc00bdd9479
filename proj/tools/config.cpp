#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "wskde/capi.h"

namespace wskde_cli {

namespace {

using nlohmann::json;

constexpr double kTwoPi = 6.283185307179586476925286766559;

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw ConfigError("config field '" + field + "': " + why);
}

double require_number(const json& j, const std::string& field) {
  if (!j.is_number()) bad_field(field, "expected a number");
  return j.get<double>();
}

std::uint64_t require_count(const json& j, const std::string& field,
                            std::uint64_t min_value) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    bad_field(field, "expected a non-negative integer");
  const std::uint64_t v = j.get<std::uint64_t>();
  if (v < min_value)
    bad_field(field, "must be at least " + std::to_string(min_value));
  return v;
}

std::vector<double> parse_axis_values(const json& j, const std::string& field) {
  // Accepts a plain number (broadcast later) or an array of numbers.
  std::vector<double> out;
  if (j.is_number()) {
    out.push_back(j.get<double>());
  } else if (j.is_array()) {
    for (const auto& e : j) {
      if (!e.is_number()) bad_field(field, "expected numeric entries");
      out.push_back(e.get<double>());
    }
    if (out.empty()) bad_field(field, "must not be empty");
  } else {
    bad_field(field, "expected a number or an array of numbers");
  }
  return out;
}

void parse_domain(const json& j, ExperimentConfig& cfg) {
  // Either [lo, hi] for one dimension or [[lo, hi], ...] for several.
  if (!j.is_array() || j.empty()) bad_field("domain", "expected an array");
  cfg.lo.clear();
  cfg.hi.clear();
  if (j[0].is_number()) {
    if (j.size() != 2) bad_field("domain", "expected [lo, hi]");
    cfg.lo.push_back(require_number(j[0], "domain"));
    cfg.hi.push_back(require_number(j[1], "domain"));
  } else {
    for (const auto& e : j) {
      if (!e.is_array() || e.size() != 2)
        bad_field("domain", "expected [lo, hi] pairs");
      cfg.lo.push_back(require_number(e[0], "domain"));
      cfg.hi.push_back(require_number(e[1], "domain"));
    }
  }
  for (std::size_t k = 0; k < cfg.lo.size(); ++k) {
    if (!std::isfinite(cfg.lo[k]) || !std::isfinite(cfg.hi[k]) ||
        !(cfg.hi[k] > cfg.lo[k]))
      bad_field("domain", "bounds must be finite with hi > lo");
  }
}

void parse_noise(const json& j, NoiseSpec& noise) {
  if (!j.is_object()) bad_field("noise", "expected an object");
  static const std::set<std::string> allowed{"type", "concentration",
                                             "pose_probs", "parts"};
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) bad_field("noise." + key, "unknown key");
  }
  if (j.contains("type")) {
    if (!j["type"].is_string()) bad_field("noise.type", "expected a string");
    noise.type = j["type"].get<std::string>();
  }
  if (noise.type != "bernoulli" && noise.type != "beta" &&
      noise.type != "mode_fraction")
    bad_field("noise.type", "must be bernoulli, beta, or mode_fraction");
  if (j.contains("concentration")) {
    if (noise.type != "beta")
      bad_field("noise.concentration", "only valid for beta noise");
    noise.concentration = require_number(j["concentration"], "noise.concentration");
  }
  if (noise.type == "beta" &&
      !(std::isfinite(noise.concentration) && noise.concentration > 0.0))
    bad_field("noise.concentration", "must be positive");
  if (j.contains("pose_probs")) {
    if (noise.type != "mode_fraction")
      bad_field("noise.pose_probs", "only valid for mode_fraction noise");
    noise.pose_probs = parse_axis_values(j["pose_probs"], "noise.pose_probs");
  }
  if (j.contains("parts")) {
    if (noise.type != "mode_fraction")
      bad_field("noise.parts", "only valid for mode_fraction noise");
    noise.parts = static_cast<std::uint32_t>(
        require_count(j["parts"], "noise.parts", 1));
  }
  if (noise.type == "mode_fraction") {
    if (noise.pose_probs.empty())
      bad_field("noise.pose_probs", "required for mode_fraction noise");
    double sum = 0.0;
    for (double p : noise.pose_probs) {
      if (!(std::isfinite(p) && p >= 0.0))
        bad_field("noise.pose_probs", "entries must be non-negative");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      bad_field("noise.pose_probs", "must sum to 1");
  }
}

std::vector<std::uint64_t> default_checkpoints(std::uint64_t samples) {
  const std::uint64_t schedule[] = {10,  20,   50,   100,  200,
                                    500, 1000, 2000, 5000, 10000};
  std::vector<std::uint64_t> out;
  for (std::uint64_t c : schedule)
    if (c <= samples) out.push_back(c);
  if (out.empty() || out.back() != samples) out.push_back(samples);
  return out;
}

}  // namespace

std::string NoiseSpec::label() const {
  char buf[64];
  if (type == "beta") {
    std::snprintf(buf, sizeof(buf), "beta(c=%g)", concentration);
    return buf;
  }
  if (type == "mode_fraction") {
    std::snprintf(buf, sizeof(buf), "mode_fraction(m=%u)", parts);
    return buf;
  }
  return "bernoulli";
}

std::string digest_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig load_config(const std::string& path, const std::string& kind,
                             const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);

  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be an object");

  static const std::set<std::string> allowed{
      "kind",        "estimator",  "noise",        "domain",
      "bandwidth",   "spacing",    "z",            "confidence",
      "budget",      "stop_half_width", "samples", "checkpoints",
      "eval_points", "replications", "seed",       "test_function",
      "out",         "data",       "inputs"};
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.count(key)) bad_field(key, "unknown key");
  }

  ExperimentConfig cfg;
  cfg.kind = kind;

  if (doc.contains("kind")) {
    if (!doc["kind"].is_string()) bad_field("kind", "expected a string");
    const std::string file_kind = doc["kind"].get<std::string>();
    if (file_kind != kind)
      bad_field("kind", "file says '" + file_kind +
                            "' but the subcommand is '" + kind + "'");
  }

  if (doc.contains("estimator")) {
    if (!doc["estimator"].is_string())
      bad_field("estimator", "expected a string");
    cfg.estimator = doc["estimator"].get<std::string>();
    if (cfg.estimator != "wskde" && cfg.estimator != "nakde" &&
        cfg.estimator != "both")
      bad_field("estimator", "must be wskde, nakde, or both");
  }

  if (doc.contains("noise")) parse_noise(doc["noise"], cfg.noise);
  if (doc.contains("domain")) parse_domain(doc["domain"], cfg);

  if (doc.contains("bandwidth"))
    cfg.bandwidth = parse_axis_values(doc["bandwidth"], "bandwidth");
  if (cfg.bandwidth.size() == 1 && cfg.dim() > 1)
    cfg.bandwidth.assign(cfg.dim(), cfg.bandwidth[0]);
  if (cfg.bandwidth.size() != cfg.dim())
    bad_field("bandwidth", "dimension mismatch with the domain");
  for (double h : cfg.bandwidth)
    if (!(std::isfinite(h) && h > 0.0)) bad_field("bandwidth", "must be positive");

  if (doc.contains("spacing")) {
    cfg.spacing = parse_axis_values(doc["spacing"], "spacing");
    if (cfg.spacing.size() == 1 && cfg.dim() > 1)
      cfg.spacing.assign(cfg.dim(), cfg.spacing[0]);
    if (cfg.spacing.size() != cfg.dim())
      bad_field("spacing", "dimension mismatch with the domain");
    for (double s : cfg.spacing)
      if (!(std::isfinite(s) && s > 0.0)) bad_field("spacing", "must be positive");
  }

  if (doc.contains("z") && doc.contains("confidence"))
    bad_field("confidence", "give either z or confidence, not both");
  if (doc.contains("z")) {
    cfg.z = require_number(doc["z"], "z");
    if (!(std::isfinite(cfg.z) && cfg.z > 0.0))
      bad_field("z", "must be positive");
  }
  if (doc.contains("confidence")) {
    if (!doc["confidence"].is_string())
      bad_field("confidence", "expected a string such as \"95%\"");
    double z = 0.0;
    if (wskde_confidence_z(doc["confidence"].get<std::string>().c_str(), &z) !=
        WSKDE_OK)
      bad_field("confidence", "must be one of 90%, 95%, 99%");
    cfg.z = z;
  }

  if (doc.contains("budget")) cfg.budget = require_count(doc["budget"], "budget", 0);
  if (doc.contains("stop_half_width")) {
    cfg.stop_half_width = require_number(doc["stop_half_width"], "stop_half_width");
    if (!(cfg.stop_half_width > 0.0 && cfg.stop_half_width <= 0.5))
      bad_field("stop_half_width", "must lie in (0, 0.5]");
  }
  if (doc.contains("samples"))
    cfg.samples = require_count(doc["samples"], "samples", 1);
  if (doc.contains("eval_points"))
    cfg.eval_points = require_count(doc["eval_points"], "eval_points", 2);
  if (doc.contains("replications"))
    cfg.replications = require_count(doc["replications"], "replications", 1);
  if (doc.contains("seed")) cfg.seed = require_count(doc["seed"], "seed", 0);

  if (doc.contains("checkpoints")) {
    if (!doc["checkpoints"].is_array() || doc["checkpoints"].empty())
      bad_field("checkpoints", "expected a non-empty array");
    for (const auto& e : doc["checkpoints"])
      cfg.checkpoints.push_back(require_count(e, "checkpoints", 1));
    if (!std::is_sorted(cfg.checkpoints.begin(), cfg.checkpoints.end()))
      bad_field("checkpoints", "must be ascending");
    if (cfg.checkpoints.back() > cfg.samples)
      bad_field("checkpoints", "beyond the sample budget");
  } else {
    cfg.checkpoints = default_checkpoints(cfg.samples);
  }

  if (doc.contains("test_function")) {
    const json& tf = doc["test_function"];
    if (!tf.is_object()) bad_field("test_function", "expected an object");
    for (const auto& [key, value] : tf.items()) {
      if (key != "a" && key != "b")
        bad_field("test_function." + key, "unknown key");
    }
    if (tf.contains("a")) cfg.tf_a = require_number(tf["a"], "test_function.a");
    if (tf.contains("b")) cfg.tf_b = require_number(tf["b"], "test_function.b");
    if (!(cfg.tf_a > 0.0)) bad_field("test_function.a", "must be positive");
    if (!(cfg.tf_b >= 0.0)) bad_field("test_function.b", "must be non-negative");
  }

  if (doc.contains("out")) {
    if (!doc["out"].is_string()) bad_field("out", "expected a string");
    cfg.out_dir = doc["out"].get<std::string>();
  }
  if (doc.contains("data")) {
    if (!doc["data"].is_string()) bad_field("data", "expected a string");
    cfg.data_path = doc["data"].get<std::string>();
  }
  if (doc.contains("inputs")) {
    if (!doc["inputs"].is_array()) bad_field("inputs", "expected an array");
    for (const auto& e : doc["inputs"]) {
      if (!e.is_string()) bad_field("inputs", "expected strings");
      cfg.inputs.push_back(e.get<std::string>());
    }
  }

  if (!overrides.out_dir.empty()) cfg.out_dir = overrides.out_dir;
  if (overrides.has_seed) cfg.seed = overrides.seed;
  if (overrides.has_replications) cfg.replications = overrides.replications;

  // Per-kind requirements.
  if (kind == "bo" || kind == "coverage") {
    if (cfg.dim() != 1)
      bad_field("domain", "must be one-dimensional for " + kind);
    if (cfg.lo[0] < 0.0 || cfg.hi[0] > kTwoPi + 1e-12)
      bad_field("domain", "must lie within [0, 2*pi], the test function domain");
    if (kind == "bo" && cfg.replications < 1)
      bad_field("replications", "must be at least 1");
  }
  if (kind == "estimate") {
    if (cfg.data_path.empty()) bad_field("data", "required for estimate");
    if (cfg.estimator == "both")
      bad_field("estimator", "estimate needs a single estimator");
  }
  if (kind == "peak-table" && cfg.inputs.empty())
    bad_field("inputs", "required for peak-table");
  if (kind == "bo" && cfg.budget == 0 && cfg.stop_half_width > 0.0)
    bad_field("budget", "a zero budget cannot use a stop threshold");

  // Canonical effective config: semantic fields only, sorted keys.
  json eff;
  eff["kind"] = cfg.kind;
  eff["estimator"] = cfg.estimator;
  eff["noise"] = {{"type", cfg.noise.type}};
  if (cfg.noise.type == "beta")
    eff["noise"]["concentration"] = cfg.noise.concentration;
  if (cfg.noise.type == "mode_fraction") {
    eff["noise"]["pose_probs"] = cfg.noise.pose_probs;
    eff["noise"]["parts"] = cfg.noise.parts;
  }
  json domain = json::array();
  for (std::size_t k = 0; k < cfg.dim(); ++k)
    domain.push_back({cfg.lo[k], cfg.hi[k]});
  eff["domain"] = domain;
  eff["bandwidth"] = cfg.bandwidth;
  if (!cfg.spacing.empty()) eff["spacing"] = cfg.spacing;
  eff["z"] = cfg.z;
  eff["seed"] = cfg.seed;
  eff["test_function"] = {{"a", cfg.tf_a}, {"b", cfg.tf_b}};
  if (kind == "bo") {
    eff["budget"] = cfg.budget;
    eff["replications"] = cfg.replications;
    if (cfg.stop_half_width > 0.0) eff["stop_half_width"] = cfg.stop_half_width;
  }
  if (kind == "coverage") {
    eff["samples"] = cfg.samples;
    eff["checkpoints"] = cfg.checkpoints;
    eff["eval_points"] = cfg.eval_points;
    eff["replications"] = cfg.replications;
  }
  if (kind == "estimate") eff["data"] = cfg.data_path;
  if (kind == "peak-table") eff["inputs"] = cfg.inputs;
  cfg.effective = eff;
  cfg.digest = digest_hex(eff.dump());
  return cfg;
}

}  // namespace wskde_cli
