// Structured-text experiment configuration: top-level problem keys plus
// [factor], [exchange], [noise] and [output] sections. Parsing is strict:
// unknown sections or keys are rejected.

#pragma once

#include "fofdoe/optimizer.hpp"
#include "fofdoe/simulation.hpp"

#include <map>
#include <sstream>
#include <string>
#include <string_view>

namespace fofdoe {

class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

struct OutputConfig {
  std::string directory = "out";
  bool emit_svg = true;
  int curve_grid_size = 201;
};

/// Response-direction basis used when fitting; restricted to orthonormal
/// families.
struct EstimateConfig {
  BasisSpec theta = BasisSpec::fourier(7);
};

struct ExperimentConfig {
  DesignProblem problem;
  ExchangeConfig exchange;
  GPNoiseConfig noise;
  EstimateConfig estimate;
  OutputConfig outputs;
};

namespace detail {

inline std::string trim(std::string_view text) {
  const auto begin = text.find_first_not_of(" \t\r");
  const auto end = text.find_last_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  return std::string(text.substr(begin, end - begin + 1));
}

inline int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int parsed = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw config_error("config: key '" + key + "' expects an integer, got '" +
                       value + "'");
  }
}

inline double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw config_error("config: key '" + key + "' expects a number, got '" +
                       value + "'");
  }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const std::uint64_t parsed = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw config_error("config: key '" + key +
                       "' expects an unsigned integer, got '" + value + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw config_error("config: key '" + key + "' expects true/false, got '" +
                     value + "'");
}

inline BasisFamily parse_family(const std::string& key, const std::string& value) {
  if (value == "bspline") return BasisFamily::BSpline;
  if (value == "fourier") return BasisFamily::Fourier;
  throw config_error("config: key '" + key +
                     "' expects bspline or fourier, got '" + value + "'");
}

// one [factor] section: x_* keys describe the run basis, b_* keys the
// coefficient basis (field names mirror the design-archive columns)
struct FactorSection {
  std::map<std::string, std::string> entries;

  BasisSpec basis(const std::string& prefix) const {
    BasisSpec spec;
    const auto family = entries.find(prefix + "_family");
    if (family != entries.end())
      spec.family = parse_family(prefix + "_family", family->second);
    if (spec.family == BasisFamily::BSpline) {
      const auto degree = entries.find(prefix + "_degree");
      const auto breaks = entries.find(prefix + "_breaks");
      if (degree == entries.end() || breaks == entries.end())
        throw config_error("config: [factor] B-spline basis needs " + prefix +
                           "_degree and " + prefix + "_breaks");
      spec.degree = parse_int(prefix + "_degree", degree->second);
      spec.breakpoints = parse_int(prefix + "_breaks", breaks->second);
    } else {
      const auto size = entries.find(prefix + "_size");
      if (size == entries.end())
        throw config_error("config: [factor] Fourier basis needs " + prefix +
                           "_size");
      spec.size = parse_int(prefix + "_size", size->second);
    }
    return spec;
  }

  FactorSpec to_factor() const {
    static const std::vector<std::string> known = {
        "x_family", "x_degree", "x_breaks", "x_size",
        "b_family", "b_degree", "b_breaks", "b_size"};
    for (const auto& [key, value] : entries)
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw config_error("config: unknown key '" + key + "' in [factor]");
    return FactorSpec{basis("x"), basis("b")};
  }
};

}  // namespace detail

/// Parses and validates an experiment configuration. Structural problems
/// raise config_error; an identifiable-but-unestimable problem (or an
/// identifiability violation) raises infeasible_error.
inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  config.problem.factors.clear();
  std::vector<detail::FactorSection> factor_sections;
  std::string section;  // "" = top level
  bool any_content = false;

  std::istringstream stream(text);
  std::string raw;
  int line_number = 0;
  while (std::getline(stream, raw)) {
    ++line_number;
    std::string line = raw;
    if (const auto comment = line.find_first_of("#;"); comment != std::string::npos)
      line.erase(comment);
    line = detail::trim(line);
    if (line.empty()) continue;
    any_content = true;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error("config: malformed section header at line " +
                           std::to_string(line_number));
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "factor" && section != "exchange" && section != "noise" &&
          section != "estimate" && section != "output")
        throw config_error("config: unknown section [" + section + "]");
      if (section == "factor") factor_sections.emplace_back();
      continue;
    }

    const auto equals = line.find('=');
    if (equals == std::string::npos)
      throw config_error("config: expected 'key = value' at line " +
                         std::to_string(line_number));
    const std::string key = detail::trim(line.substr(0, equals));
    const std::string value = detail::trim(line.substr(equals + 1));
    if (key.empty() || value.empty())
      throw config_error("config: empty key or value at line " +
                         std::to_string(line_number));

    if (section.empty()) {
      if (key == "runs") {
        config.problem.n_runs = detail::parse_int(key, value);
      } else if (key == "criterion") {
        if (value == "A") config.problem.criterion = Criterion::A;
        else if (value == "D") config.problem.criterion = Criterion::D;
        else throw config_error("config: criterion must be A or D, got '" + value + "'");
      } else if (key == "bound") {
        config.problem.bound = detail::parse_real(key, value);
      } else {
        throw config_error("config: unknown top-level key '" + key + "'");
      }
    } else if (section == "factor") {
      factor_sections.back().entries[key] = value;
    } else if (section == "exchange") {
      if (key == "random_starts") config.exchange.random_starts = detail::parse_int(key, value);
      else if (key == "candidate_levels") config.exchange.candidate_levels = detail::parse_int(key, value);
      else if (key == "max_passes") config.exchange.max_passes = detail::parse_int(key, value);
      else if (key == "improvement_tol") config.exchange.improvement_tol = detail::parse_real(key, value);
      else if (key == "seed") config.exchange.seed = detail::parse_u64(key, value);
      else if (key == "refine") config.exchange.refine = detail::parse_bool(key, value);
      else if (key == "threads") config.exchange.threads = detail::parse_int(key, value);
      else throw config_error("config: unknown key '" + key + "' in [exchange]");
    } else if (section == "noise") {
      if (key == "kernel") {
        if (value != "rbf")
          throw config_error("config: kernel must be rbf, got '" + value + "'");
      } else if (key == "bandwidth") config.noise.bandwidth = detail::parse_real(key, value);
      else if (key == "variance") config.noise.variance = detail::parse_real(key, value);
      else if (key == "representation_size") config.noise.representation_size = detail::parse_int(key, value);
      else if (key == "grid_size") config.noise.grid_size = detail::parse_int(key, value);
      else if (key == "seed") config.noise.seed = detail::parse_u64(key, value);
      else throw config_error("config: unknown key '" + key + "' in [noise]");
    } else if (section == "estimate") {
      if (key == "theta_family") {
        if (detail::parse_family(key, value) != BasisFamily::Fourier)
          throw config_error("config: the response basis must be orthonormal; "
                             "only fourier is supported");
      } else if (key == "theta_size") {
        config.estimate.theta = BasisSpec::fourier(detail::parse_int(key, value));
      } else {
        throw config_error("config: unknown key '" + key + "' in [estimate]");
      }
    } else {  // output
      if (key == "directory") config.outputs.directory = value;
      else if (key == "emit_svg") config.outputs.emit_svg = detail::parse_bool(key, value);
      else if (key == "curve_grid_size") config.outputs.curve_grid_size = detail::parse_int(key, value);
      else throw config_error("config: unknown key '" + key + "' in [output]");
    }
  }

  if (!any_content) throw config_error("config: empty configuration");
  if (factor_sections.empty())
    throw config_error("config: at least one [factor] section is required");
  for (const detail::FactorSection& section_data : factor_sections)
    config.problem.factors.push_back(section_data.to_factor());
  if (config.outputs.curve_grid_size < 2)
    throw config_error("config: curve_grid_size must be >= 2");

  // structural field validation first (config errors), then the problem-level
  // identifiability/estimability conditions (infeasibility)
  for (std::size_t i = 0; i < config.problem.factors.size(); ++i) {
    try {
      config.problem.factors[i].factor_basis.validate();
      config.problem.factors[i].coeff_basis.validate();
    } catch (const std::invalid_argument& e) {
      throw config_error("config: [factor] " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  try {
    config.exchange.validate();
    config.noise.validate();
    config.estimate.theta.validate();
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string("config: ") + e.what());
  }
  require_valid(config.problem);
  return config;
}

}  // namespace fofdoe
