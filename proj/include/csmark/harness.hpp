#pragma once

#include "csmark/asymptotics.hpp"
#include "csmark/error.hpp"
#include "csmark/estimators.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace csmark {

enum class ExperimentKind
{
  simulate,
  estimate_grid,
  mc_normality,
  mc_mse,
  equivalence,
  functional,
  bw_select,
  table1
};

const char* to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

enum class EstimatorChoice
{
  F1,
  F2,
  both
};

//! Malformed configuration text; line and column are 1-based (0 when the
//! problem is not tied to a position).
class ConfigError : public Error
{
public:
  ConfigError(const std::string& what, std::size_t line = 0, std::size_t column = 0);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

//! Flat `key = value` experiment description. Lists are comma separated;
//! points are `t:z` pairs, e.g. `points = 0.4:0.4, 0.6:0.6`.
struct ExperimentConfig
{
  ExperimentKind kind = ExperimentKind::simulate;
  std::string scenario = "B";
  std::size_t n = 1000;
  std::size_t replications = 250; // m for Monte Carlo runs, B for the bootstrap
  std::vector<Point> points{{0.5, 0.5}};
  EstimatorChoice estimator = EstimatorChoice::both;
  double alpha = 0.0; // 0: derive from the schedule
  double beta = 0.0;
  double c1 = 0.5;
  double c2 = 0.5;
  double beta_exponent = 1.0 / 3.0;
  std::vector<double> alpha_grid;
  std::vector<double> beta_grid;
  std::vector<std::size_t> n_grid;
  std::vector<double> t_grid;
  std::vector<double> z_grid;
  std::string kernel = "epanechnikov";
  std::string input; // sample CSV for estimate-grid / bw-select; empty: simulate
  double alpha_exponent = 1.0 / 3.0;
  double alpha_constant = 1.0;
  double alpha0 = 0.0; // 0: default pilot bandwidth for n
  double beta0 = 0.0;
  double envelope = 1.5;
  std::uint64_t seed = 1;
  std::string output = "out";
  std::size_t threads = 1;

  //! Throws ConfigError when an id does not resolve or a numeric field is
  //! out of range for the experiment.
  void validate() const;

  bool operator==(const ExperimentConfig&) const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base);

//! Applies one `key = value` assignment; used for command-line overrides.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

//! Every field, one per line, in a form parse_config reads back unchanged.
std::string to_text(const ExperimentConfig& config);

struct RunResult
{
  int exit_code = 0;
  std::vector<std::filesystem::path> files;
  std::string message;
};

//! Runs the experiment and writes its CSV outputs and manifest.txt into
//! config.output. Exit codes: 0 success, 2 invalid configuration,
//! 3 estimator failures beyond the allowed threshold.
RunResult run(const ExperimentConfig& config);

struct Table1Row
{
  Point point;
  std::size_t n;
  EstimatorKind estimator;
  double alpha;
  double beta;
  double mse;
  double se;
  std::size_t failures;
};

//! Minimum Monte Carlo MSE over the candidate grid for every point, sample
//! size and estimator; all candidates share the replications' samples.
std::vector<Table1Row> table1(const ExperimentConfig& config);

//! CSV `point,n,estimator,alpha,beta,mse,se`.
void write_table1_csv(std::ostream& out, const std::vector<Table1Row>& rows);

inline constexpr const char* version = "1.0.0";

} // namespace csmark
