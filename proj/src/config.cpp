#include "splatcal/config.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "splatcal/error.hpp"

namespace splatcal {

std::string to_string(TauCenterMode mode) {
  return mode == TauCenterMode::MedianDepth ? "median_depth" : "fixed";
}

void CalibConfig::validate() const {
  require(lambda_base > 0 && lambda_base <= 1, "config lambda_base: must be in (0,1], got %g",
          lambda_base);
  require(kappa > 0, "config kappa: must be positive, got %g", kappa);
  require(tau2 > 0 && tau2 <= tau1 && tau1 < 1, "config tau1/tau2: need 0 < tau2 <= tau1 < 1");
  require(eta > 0 && eta <= 1, "config eta: must be in (0,1], got %g", eta);
  require(t_prune > 0, "config t_prune: must be positive");
  require(t_start < total_iters, "config t_start: must be below total_iters");
  require(dcp_window > 0 && dcp_window % 2 == 1, "config dcp_window: must be odd and positive");
  require(alpha_min > 0 && alpha_min < 1, "config alpha_min: must be in (0,1)");
  require(d_near > 0 && d_near < d_middle, "config d_near/d_middle: need 0 < d_near < d_middle");
  require(lambda_middle >= 0 && lambda_middle <= 1 && lambda_far >= 0 && lambda_far <= 1,
          "config lambda_middle/lambda_far: must be in [0,1]");
  require(lambda1 >= 0, "config lambda1: must be non-negative");
  require(total_iters > 0, "config total_iters: must be positive");
  require(vis_epsilon > 0, "config vis_epsilon: must be positive");
  require(threads >= 1, "config threads: must be at least 1");
  require(log_interval > 0 && checkpoint_interval > 0,
          "config log/checkpoint interval: must be positive");
  require(densify_interval > 0, "config densify_interval: must be positive");
  require(tau_fixed > 0 || tau_center_mode == TauCenterMode::MedianDepth,
          "config tau_fixed: must be positive in fixed mode");
  require(dropout_end_iter >= 0, "config dropout_end_iter: must be non-negative");
}

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1")
    return true;
  if (v == "false" || v == "0")
    return false;
  fail("config %s: expected boolean, got '%s'", key.c_str(), v.c_str());
}

double parse_double(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  require(end && *end == '\0' && !v.empty(), "config %s: expected number, got '%s'", key.c_str(),
          v.c_str());
  return d;
}

int parse_int(const std::string& v, const std::string& key) {
  const double d = parse_double(v, key);
  require(d == static_cast<long long>(d), "config %s: expected integer, got '%s'", key.c_str(),
          v.c_str());
  return static_cast<int>(d);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void CalibConfig::apply_override(const std::string& key, const std::string& value) {
  using Setter = std::function<void(CalibConfig&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"lambda_base", [](CalibConfig& c, const std::string& v) { c.lambda_base = parse_double(v, "lambda_base"); }},
      {"kappa", [](CalibConfig& c, const std::string& v) { c.kappa = parse_double(v, "kappa"); }},
      {"tau_center_mode",
       [](CalibConfig& c, const std::string& v) {
         if (v == "median_depth")
           c.tau_center_mode = TauCenterMode::MedianDepth;
         else if (v == "fixed")
           c.tau_center_mode = TauCenterMode::Fixed;
         else
           fail("config tau_center_mode: expected median_depth|fixed, got '%s'", v.c_str());
       }},
      {"tau_fixed", [](CalibConfig& c, const std::string& v) { c.tau_fixed = parse_double(v, "tau_fixed"); }},
      {"global_tau", [](CalibConfig& c, const std::string& v) { c.global_tau = parse_bool(v, "global_tau"); }},
      {"invert_importance",
       [](CalibConfig& c, const std::string& v) { c.invert_importance = parse_bool(v, "invert_importance"); }},
      {"dropout_rescale",
       [](CalibConfig& c, const std::string& v) { c.dropout_rescale = parse_bool(v, "dropout_rescale"); }},
      {"dropout_end_iter",
       [](CalibConfig& c, const std::string& v) { c.dropout_end_iter = parse_int(v, "dropout_end_iter"); }},
      {"d_near", [](CalibConfig& c, const std::string& v) { c.d_near = parse_double(v, "d_near"); }},
      {"d_middle", [](CalibConfig& c, const std::string& v) { c.d_middle = parse_double(v, "d_middle"); }},
      {"lambda_middle",
       [](CalibConfig& c, const std::string& v) { c.lambda_middle = parse_double(v, "lambda_middle"); }},
      {"lambda_far", [](CalibConfig& c, const std::string& v) { c.lambda_far = parse_double(v, "lambda_far"); }},
      {"tau1", [](CalibConfig& c, const std::string& v) { c.tau1 = parse_double(v, "tau1"); }},
      {"tau2", [](CalibConfig& c, const std::string& v) { c.tau2 = parse_double(v, "tau2"); }},
      {"alpha_min", [](CalibConfig& c, const std::string& v) { c.alpha_min = parse_double(v, "alpha_min"); }},
      {"eta", [](CalibConfig& c, const std::string& v) { c.eta = parse_double(v, "eta"); }},
      {"t_prune", [](CalibConfig& c, const std::string& v) { c.t_prune = parse_int(v, "t_prune"); }},
      {"t_start", [](CalibConfig& c, const std::string& v) { c.t_start = parse_int(v, "t_start"); }},
      {"dcp_window", [](CalibConfig& c, const std::string& v) { c.dcp_window = parse_int(v, "dcp_window"); }},
      {"score_reset", [](CalibConfig& c, const std::string& v) { c.score_reset = parse_bool(v, "score_reset"); }},
      {"total_iters", [](CalibConfig& c, const std::string& v) { c.total_iters = parse_int(v, "total_iters"); }},
      {"lambda1", [](CalibConfig& c, const std::string& v) { c.lambda1 = parse_double(v, "lambda1"); }},
      {"vis_epsilon", [](CalibConfig& c, const std::string& v) { c.vis_epsilon = parse_double(v, "vis_epsilon"); }},
      {"seed",
       [](CalibConfig& c, const std::string& v) { c.seed = static_cast<uint64_t>(parse_double(v, "seed")); }},
      {"log_interval", [](CalibConfig& c, const std::string& v) { c.log_interval = parse_int(v, "log_interval"); }},
      {"checkpoint_interval",
       [](CalibConfig& c, const std::string& v) { c.checkpoint_interval = parse_int(v, "checkpoint_interval"); }},
      {"threads", [](CalibConfig& c, const std::string& v) { c.threads = parse_int(v, "threads"); }},
      {"lr_position", [](CalibConfig& c, const std::string& v) { c.lr_position = parse_double(v, "lr_position"); }},
      {"lr_position_final",
       [](CalibConfig& c, const std::string& v) { c.lr_position_final = parse_double(v, "lr_position_final"); }},
      {"lr_color", [](CalibConfig& c, const std::string& v) { c.lr_color = parse_double(v, "lr_color"); }},
      {"lr_opacity", [](CalibConfig& c, const std::string& v) { c.lr_opacity = parse_double(v, "lr_opacity"); }},
      {"lr_scale", [](CalibConfig& c, const std::string& v) { c.lr_scale = parse_double(v, "lr_scale"); }},
      {"lr_rotation", [](CalibConfig& c, const std::string& v) { c.lr_rotation = parse_double(v, "lr_rotation"); }},
      {"adam_beta1", [](CalibConfig& c, const std::string& v) { c.adam_beta1 = parse_double(v, "adam_beta1"); }},
      {"adam_beta2", [](CalibConfig& c, const std::string& v) { c.adam_beta2 = parse_double(v, "adam_beta2"); }},
      {"adam_eps", [](CalibConfig& c, const std::string& v) { c.adam_eps = parse_double(v, "adam_eps"); }},
      {"densify_interval",
       [](CalibConfig& c, const std::string& v) { c.densify_interval = parse_int(v, "densify_interval"); }},
      {"densify_from", [](CalibConfig& c, const std::string& v) { c.densify_from = parse_int(v, "densify_from"); }},
      {"densify_until",
       [](CalibConfig& c, const std::string& v) { c.densify_until = parse_int(v, "densify_until"); }},
      {"densify_grad_threshold",
       [](CalibConfig& c, const std::string& v) { c.densify_grad_threshold = parse_double(v, "densify_grad_threshold"); }},
      {"densify_scale_rel",
       [](CalibConfig& c, const std::string& v) { c.densify_scale_rel = parse_double(v, "densify_scale_rel"); }},
      {"cull_opacity", [](CalibConfig& c, const std::string& v) { c.cull_opacity = parse_double(v, "cull_opacity"); }},
      {"max_gaussians",
       [](CalibConfig& c, const std::string& v) { c.max_gaussians = parse_int(v, "max_gaussians"); }},
  };
  const auto it = setters.find(key);
  require(it != setters.end(), "config: unknown key '%s'", key.c_str());
  it->second(*this, value);
}

CalibConfig CalibConfig::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "config: cannot open '%s'", path.c_str());
  CalibConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos)
      line = line.substr(0, hash);
    size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos)
      continue;
    size_t e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    const size_t eq = line.find('=');
    require(eq != std::string::npos, "config %s:%d: expected key=value", path.c_str(), lineno);
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto strip = [](std::string& s) {
      const size_t x = s.find_first_not_of(" \t");
      const size_t y = s.find_last_not_of(" \t");
      s = x == std::string::npos ? "" : s.substr(x, y - x + 1);
    };
    strip(key);
    strip(value);
    cfg.apply_override(key, value);
  }
  return cfg;
}

std::string CalibConfig::serialize() const {
  std::ostringstream out;
  out << "lambda_base = " << fmt(lambda_base) << "\n";
  out << "kappa = " << fmt(kappa) << "\n";
  out << "tau_center_mode = " << to_string(tau_center_mode) << "\n";
  out << "tau_fixed = " << fmt(tau_fixed) << "\n";
  out << "global_tau = " << (global_tau ? "true" : "false") << "\n";
  out << "invert_importance = " << (invert_importance ? "true" : "false") << "\n";
  out << "dropout_rescale = " << (dropout_rescale ? "true" : "false") << "\n";
  out << "dropout_end_iter = " << dropout_end_iter << "\n";
  out << "d_near = " << fmt(d_near) << "\n";
  out << "d_middle = " << fmt(d_middle) << "\n";
  out << "lambda_middle = " << fmt(lambda_middle) << "\n";
  out << "lambda_far = " << fmt(lambda_far) << "\n";
  out << "tau1 = " << fmt(tau1) << "\n";
  out << "tau2 = " << fmt(tau2) << "\n";
  out << "alpha_min = " << fmt(alpha_min) << "\n";
  out << "eta = " << fmt(eta) << "\n";
  out << "t_prune = " << t_prune << "\n";
  out << "t_start = " << t_start << "\n";
  out << "dcp_window = " << dcp_window << "\n";
  out << "score_reset = " << (score_reset ? "true" : "false") << "\n";
  out << "total_iters = " << total_iters << "\n";
  out << "lambda1 = " << fmt(lambda1) << "\n";
  out << "vis_epsilon = " << fmt(vis_epsilon) << "\n";
  out << "seed = " << seed << "\n";
  out << "log_interval = " << log_interval << "\n";
  out << "checkpoint_interval = " << checkpoint_interval << "\n";
  out << "threads = " << threads << "\n";
  out << "lr_position = " << fmt(lr_position) << "\n";
  out << "lr_position_final = " << fmt(lr_position_final) << "\n";
  out << "lr_color = " << fmt(lr_color) << "\n";
  out << "lr_opacity = " << fmt(lr_opacity) << "\n";
  out << "lr_scale = " << fmt(lr_scale) << "\n";
  out << "lr_rotation = " << fmt(lr_rotation) << "\n";
  out << "adam_beta1 = " << fmt(adam_beta1) << "\n";
  out << "adam_beta2 = " << fmt(adam_beta2) << "\n";
  out << "adam_eps = " << fmt(adam_eps) << "\n";
  out << "densify_interval = " << densify_interval << "\n";
  out << "densify_from = " << densify_from << "\n";
  out << "densify_until = " << densify_until << "\n";
  out << "densify_grad_threshold = " << fmt(densify_grad_threshold) << "\n";
  out << "densify_scale_rel = " << fmt(densify_scale_rel) << "\n";
  out << "cull_opacity = " << fmt(cull_opacity) << "\n";
  out << "max_gaussians = " << max_gaussians << "\n";
  return out.str();
}

void CalibConfig::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "config: cannot write '%s'", path.c_str());
  out << serialize();
  require(out.good(), "config: write failed for '%s'", path.c_str());
}

}  // namespace splatcal
