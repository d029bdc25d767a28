#pragma once

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "devex/concentration.hpp"
#include "devex/error.hpp"
#include "devex/exponents.hpp"
#include "devex/fisher.hpp"
#include "devex/montecarlo.hpp"
#include "devex/probdist.hpp"

// Command-line front end. Reports are JSON objects
//   {"command": ..., "inputs": {...}, "results": {...}}
// with every quantity in nats and infinities written as the string "inf".

namespace devex::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

inline LogLevel log_level_from_env() {
  const char* v = std::getenv("DEVEX_LOG");
  if (v == nullptr) return LogLevel::Error;
  const std::string s(v);
  if (s == "debug") return LogLevel::Debug;
  if (s == "info") return LogLevel::Info;
  return LogLevel::Error;
}

class Logger {
 public:
  Logger(std::ostream& err, LogLevel level) : err_(err), level_(level) {}

  void error(const std::string& msg) const { err_ << "error: " << msg << '\n'; }
  void info(const std::string& msg) const {
    if (level_ >= LogLevel::Info) err_ << "info: " << msg << '\n';
  }
  void debug(const std::string& msg) const {
    if (level_ >= LogLevel::Debug) err_ << "debug: " << msg << '\n';
  }

 private:
  std::ostream& err_;
  LogLevel level_;
};

// Scalar as a JSON value: +inf becomes "inf".
inline json num(double v) {
  if (std::isinf(v) && v > 0) return "inf";
  if (std::isinf(v)) return "-inf";
  return v;
}

// Parses {"alphabet": [...], "p1": [...], "p2": [...]}.
inline HypothesisPair parse_pair_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::DomainError, std::string("pair file is not valid JSON (") + e.what() + ")");
  }
  if (!doc.is_object()) throw Error(ErrorKind::DomainError, "pair file: top level must be an object");
  for (const char* key : {"alphabet", "p1", "p2"}) {
    if (!doc.contains(key)) throw Error(ErrorKind::DomainError, std::string("pair file: missing field '") + key + "'");
    if (!doc[key].is_array()) throw Error(ErrorKind::DomainError, std::string("pair file: field '") + key + "' must be an array");
  }
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < doc["alphabet"].size(); ++i) {
    const json& v = doc["alphabet"][i];
    if (!v.is_string()) {
      throw Error(ErrorKind::DomainError, "pair file: field 'alphabet' entry " + std::to_string(i) + " must be a string");
    }
    labels.push_back(v.get<std::string>());
  }
  auto probs = [&](const char* key) {
    std::vector<double> out;
    for (std::size_t i = 0; i < doc[key].size(); ++i) {
      const json& v = doc[key][i];
      if (!v.is_number()) {
        throw Error(ErrorKind::DomainError,
                    std::string("pair file: field '") + key + "' entry " + std::to_string(i) + " must be a number");
      }
      out.push_back(v.get<double>());
    }
    return out;
  };
  return make_hypothesis_pair(make_pmf(labels, probs("p1")), make_pmf(labels, probs("p2")));
}

inline HypothesisPair load_pair_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::DomainError, "cannot open pair file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_pair_spec(ss.str());
}

inline json pair_json(const HypothesisPair& pair) {
  return json{{"alphabet", pair.p1.labels()}, {"p1", pair.p1.probs()}, {"p2", pair.p2.probs()}};
}

inline std::string ij(const char* prefix, int i, int j) {
  return std::string(prefix) + "_" + std::to_string(i) + std::to_string(j);
}

inline json exponents_results(const HypothesisPair& pair, const Thresholds& th) {
  const ExponentReport rep = compare_report(pair, th);
  const ChernoffResult c = chernoff_information(pair);
  json r;
  r["kl_12"] = kl_divergence(pair.p1, pair.p2);
  r["kl_21"] = kl_divergence(pair.p2, pair.p1);
  r["chernoff"] = c.value;
  r["chernoff_t_star"] = c.t_star;
  r["exact_alpha1"] = num(rep.exact.alpha1);
  r["exact_alpha2"] = num(rep.exact.alpha2);
  r["exact_beta1"] = num(rep.exact.beta1);
  r["exact_beta2"] = num(rep.exact.beta2);
  r["exact_pe1"] = num(rep.exact.pe1);
  r["exact_pe2"] = num(rep.exact.pe2);
  r["exact_pe"] = num(rep.exact.pe2);
  r["refined_lb_pe1"] = num(rep.refined.min_for(1));
  r["refined_lb_pe2"] = num(rep.refined.min_for(2));
  r["refined_lb"] = num(rep.refined.min_for(2));
  r["azuma_lb_pe1"] = num(rep.azuma.min_for(1));
  r["azuma_lb_pe2"] = num(rep.azuma.min_for(2));
  r["azuma_lb"] = num(rep.azuma.min_for(2));
  for (int i = 1; i <= 2; ++i) {
    const std::string s = std::to_string(i);
    r["gamma" + s] = rep.inputs.gamma[i - 1];
    r["inverse_gamma" + s] = rep.inverse_gamma[i - 1];
    r["d" + s] = rep.inputs.d[i - 1];
    r["sigma_sq" + s] = rep.inputs.sigma_sq[i - 1];
    for (int j = 1; j <= 2; ++j) {
      r[ij("epsilon", i, j)] = rep.inputs.epsilon[i - 1][j - 1];
      r[ij("delta", i, j)] = rep.inputs.delta[i - 1][j - 1];
      r[ij("refined", i, j)] = num(rep.refined.at(i, j));
      r[ij("azuma", i, j)] = num(rep.azuma.at(i, j));
      r[ij("improvement", i, j)] = num(rep.improvement[i - 1][j - 1]);
    }
  }
  r["cross_weighted_gamma2"] = rep.cross_weighted_gamma2;
  r["cross_weighted_refined_lb_pe1"] = num(rep.cross_weighted_refined_min[0]);
  r["cross_weighted_refined_lb_pe2"] = num(rep.cross_weighted_refined_min[1]);
  return r;
}

inline json bounds_results(double d, double sigma_sq, std::uint64_t n, double alpha, Sidedness sided) {
  const MartingaleParams params(d, sigma_sq);
  const double delta = params.delta(alpha);
  const double nd = static_cast<double>(n);
  const std::vector<double> jumps(n, d);
  const double azuma_two = azuma_bound(jumps, alpha * nd);
  json r;
  r["delta"] = delta;
  r["gamma"] = params.gamma();
  r["refined"] = refined_bound(params, n, alpha, sided);
  r["azuma"] = sided == Sidedness::TwoSided ? azuma_two : 0.5 * azuma_two;
  r["refined_exponent"] = num(refined_exponent(delta, params.gamma()));
  r["azuma_exponent"] = 0.5 * delta * delta;
  r["quad_cubic_floor"] = delta <= 1.0 ? json(quad_cubic_floor(delta, params.gamma())) : json(nullptr);
  return r;
}

inline std::vector<double> parse_offsets(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw Error(ErrorKind::DomainError, "offsets: '" + item + "' is not a number");
    }
    if (used != item.size()) throw Error(ErrorKind::DomainError, "offsets: '" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorKind::DomainError, "offsets: empty list");
  return out;
}

inline json fisher_results(const ParametricFamily& family, double theta, const std::vector<double>& offsets) {
  const FisherLimitReport rep = limit_ratios(family, theta, offsets);
  json rows = json::array();
  for (const auto& row : rep.rows) {
    rows.push_back({{"h", row.h},
                    {"divergence_ratio", row.divergence_ratio},
                    {"chernoff_ratio", row.chernoff_ratio},
                    {"el_ratio", row.el_ratio},
                    {"loosened_ratio", row.loosened_ratio}});
  }
  json r;
  r["j"] = rep.j;
  r["j_over_2"] = rep.j / 2.0;
  r["j_over_8"] = rep.j / 8.0;
  r["ratios"] = rows;
  r["divergence_limit"] = rep.limits.divergence_ratio;
  r["chernoff_limit"] = rep.limits.chernoff_ratio;
  r["el_limit"] = rep.limits.el_ratio;
  r["loosened_limit"] = rep.limits.loosened_ratio;
  r["a_theta"] = rep.a_theta;
  return r;
}

inline void put_estimate(json& r, const std::string& key, const Estimate& e) {
  r[key] = e.value;
  r[key + "_ci_lower"] = e.ci.lower;
  r[key + "_ci_upper"] = e.ci.upper;
  r[key + "_exponent"] = num(e.empirical_exponent);
}

inline json simulate_results(const HypothesisPair& pair, const SimConfig& cfg, unsigned threads) {
  const SimResult s = simulate_test(pair, cfg, threads);
  json r;
  r["alpha1_count"] = s.alpha1_count;
  r["alpha2_count"] = s.alpha2_count;
  r["beta1_count"] = s.beta1_count;
  r["beta2_count"] = s.beta2_count;
  put_estimate(r, "alpha1", s.alpha1);
  put_estimate(r, "alpha2", s.alpha2);
  put_estimate(r, "beta1", s.beta1);
  put_estimate(r, "beta2", s.beta2);
  put_estimate(r, "pe1", s.pe1);
  put_estimate(r, "pe2", s.pe2);
  if (pair.p1.size() == 2) {
    const ExactTail ex = exact_binary_tail(pair, cfg.n, cfg.thresholds);
    r["exact_alpha1"] = ex.alpha1;
    r["exact_alpha2"] = ex.alpha2;
    r["exact_beta1"] = ex.beta1;
    r["exact_beta2"] = ex.beta2;
    r["exact_pe1"] = ex.pe1(cfg.pi1);
    r["exact_pe2"] = ex.pe2(cfg.pi1);
  }
  return r;
}

// Flattens the results object into "key,value" lines.
inline std::string to_csv(const json& report) {
  std::ostringstream os;
  os << "quantity,value\n";
  const json flat = report["results"].flatten();
  for (const auto& [key, value] : flat.items()) {
    std::string k = key.substr(1);
    for (auto& ch : k) {
      if (ch == '/') ch = '.';
    }
    os << k << ',' << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
  }
  return os.str();
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const Logger log(err, log_level_from_env());

  CLI::App app{"Error exponents for binary hypothesis testing on finite alphabets", "devex"};
  app.require_subcommand(1);
  bool csv = false;
  app.add_flag("--csv", csv, "Emit results as quantity,value lines");

  std::string pair_file;
  double lambda_upper = 0.0;
  double lambda_lower = 0.0;

  auto* exp_cmd = app.add_subcommand("exponents", "Exact exponents and their lower bounds");
  exp_cmd->add_option("pair-file", pair_file, "PairSpec JSON file")->required();
  exp_cmd->add_option("--lambda-upper", lambda_upper, "Upper threshold (nats/sample)");
  exp_cmd->add_option("--lambda-lower", lambda_lower, "Lower threshold (nats/sample)");
  exp_cmd->add_flag("--csv", csv);

  double d = 0.0;
  double sigma_sq = 0.0;
  std::uint64_t n = 1;
  double alpha = 0.0;
  std::string sided = "one";
  auto* bounds_cmd = app.add_subcommand("bounds", "Azuma and refined martingale tail bounds");
  bounds_cmd->add_option("--d", d, "Jump bound")->required();
  bounds_cmd->add_option("--sigma-sq", sigma_sq, "Conditional variance bound")->required();
  bounds_cmd->add_option("--n", n, "Number of steps")->required();
  bounds_cmd->add_option("--alpha", alpha, "Per-step deviation")->required();
  bounds_cmd->add_option("--sided", sided, "one or two")->check(CLI::IsMember({"one", "two"}));
  bounds_cmd->add_flag("--csv", csv);

  std::string family_name;
  double family_alpha = 0.5;
  double theta = 0.0;
  std::string offsets_text = "0.01,0.005,0.0025";
  auto* fisher_cmd = app.add_subcommand("fisher", "Fisher information limits");
  fisher_cmd->add_option("--family", family_name, "bernoulli or ternary")
      ->required()
      ->check(CLI::IsMember({"bernoulli", "ternary"}));
  fisher_cmd->add_option("--alpha", family_alpha, "Ternary family parameter");
  fisher_cmd->add_option("--theta", theta, "Parameter value")->required();
  fisher_cmd->add_option("--offsets", offsets_text, "Comma-separated offsets h");
  fisher_cmd->add_flag("--csv", csv);

  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  double pi1 = 0.5;
  unsigned threads = 1;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo estimates of the test's error probabilities");
  sim_cmd->add_option("pair-file", pair_file, "PairSpec JSON file")->required();
  sim_cmd->add_option("--n", n, "Samples per trial")->required();
  sim_cmd->add_option("--trials", trials, "Trials per hypothesis")->required();
  sim_cmd->add_option("--seed", seed, "Master seed");
  sim_cmd->add_option("--lambda-upper", lambda_upper, "Upper threshold (nats/sample)");
  sim_cmd->add_option("--lambda-lower", lambda_lower, "Lower threshold (nats/sample)");
  sim_cmd->add_option("--pi1", pi1, "Prior of H1");
  sim_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  sim_cmd->add_flag("--csv", csv);

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    log.error(e.what());
    return kExitInput;
  }

  json report;
  try {
    if (exp_cmd->parsed()) {
      log.info("loading " + pair_file);
      const HypothesisPair pair = load_pair_file(pair_file);
      const Thresholds th{lambda_upper, lambda_lower};
      report["command"] = "exponents";
      report["inputs"] = {{"pair", pair_json(pair)}, {"lambda_upper", lambda_upper}, {"lambda_lower", lambda_lower}};
      report["results"] = exponents_results(pair, th);
    } else if (bounds_cmd->parsed()) {
      const Sidedness s = sided == "two" ? Sidedness::TwoSided : Sidedness::OneSided;
      if (n == 0) throw Error(ErrorKind::DomainError, "n must be at least 1");
      report["command"] = "bounds";
      report["inputs"] = {{"d", d}, {"sigma_sq", sigma_sq}, {"n", n}, {"alpha", alpha}, {"sided", sided}};
      report["results"] = bounds_results(d, sigma_sq, n, alpha, s);
    } else if (fisher_cmd->parsed()) {
      const std::vector<double> offsets = parse_offsets(offsets_text);
      const ParametricFamily family = family_name == "ternary" ? ternary_family(family_alpha) : bernoulli_family();
      report["command"] = "fisher";
      report["inputs"] = {{"family", family_name}, {"theta", theta}, {"offsets", offsets}};
      if (family_name == "ternary") report["inputs"]["alpha"] = family_alpha;
      report["results"] = fisher_results(family, theta, offsets);
    } else if (sim_cmd->parsed()) {
      const HypothesisPair pair = load_pair_file(pair_file);
      SimConfig cfg;
      cfg.n = n;
      cfg.trials = trials;
      cfg.seed = seed;
      cfg.thresholds = {lambda_upper, lambda_lower};
      cfg.pi1 = pi1;
      cfg.pi2 = 1.0 - pi1;
      log.debug("simulating with " + std::to_string(threads) + " worker(s)");
      report["command"] = "simulate";
      // Worker count is not echoed; the report is independent of it.
      report["inputs"] = {{"pair", pair_json(pair)},   {"n", n},
                          {"trials", trials},          {"seed", seed},
                          {"lambda_upper", lambda_upper}, {"lambda_lower", lambda_lower},
                          {"pi1", pi1}};
      report["results"] = simulate_results(pair, cfg, threads);
    }
  } catch (const Error& e) {
    log.error(e.what());
    return e.kind() == ErrorKind::NoConvergence ? kExitNumeric : kExitInput;
  }

  if (csv) {
    out << to_csv(report);
  } else {
    out << report.dump(2) << '\n';
  }
  return kExitOk;
}

}  // namespace devex::cli
