#include "csmark/harness.hpp"

#include "csmark/bandwidth.hpp"
#include "csmark/csv.hpp"
#include "csmark/numerics.hpp"
#include "csmark/parallel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace csmark {

namespace {

struct KindName
{
  ExperimentKind kind;
  const char* name;
};

constexpr KindName kind_names[] = {
  {ExperimentKind::simulate, "simulate"},
  {ExperimentKind::estimate_grid, "estimate-grid"},
  {ExperimentKind::mc_normality, "mc-normality"},
  {ExperimentKind::mc_mse, "mc-mse"},
  {ExperimentKind::equivalence, "equivalence"},
  {ExperimentKind::functional, "functional"},
  {ExperimentKind::bw_select, "bw-select"},
  {ExperimentKind::table1, "table1"},
};

std::string trim(const std::string& s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
  std::vector<std::string> parts;
  if (trim(s).empty())
    return parts;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep))
    parts.push_back(trim(item));
  return parts;
}

double to_double(const std::string& key, const std::string& text)
{
  double v = 0.0;
  if (!parse_double(text, v))
    throw ConfigError("'" + key + "' expects a number, got '" + text + "'");
  return v;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& text)
{
  std::uint64_t v = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + text + "'");
  return v;
}

std::vector<double> to_doubles(const std::string& key, const std::string& text)
{
  std::vector<double> out;
  for (const auto& part : split(text, ','))
    out.push_back(to_double(key, part));
  return out;
}

std::vector<Point> to_points(const std::string& key, const std::string& text)
{
  std::vector<Point> out;
  for (const auto& part : split(text, ',')) {
    const auto xy = split(part, ':');
    if (xy.size() != 2)
      throw ConfigError("'" + key + "' expects t:z pairs, got '" + part + "'");
    out.push_back({to_double(key, xy[0]), to_double(key, xy[1])});
  }
  return out;
}

template <class T, class F>
std::string join(const std::vector<T>& items, F&& format)
{
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0)
      out += ", ";
    out += format(items[i]);
  }
  return out;
}

std::string format_point(const Point& p)
{
  return format_double(p.t) + ":" + format_double(p.z);
}

const char* to_string(EstimatorChoice e)
{
  switch (e) {
    case EstimatorChoice::F1:
      return "F1";
    case EstimatorChoice::F2:
      return "F2";
    case EstimatorChoice::both:
      return "both";
  }
  return "both";
}

std::vector<EstimatorKind> estimators_of(EstimatorChoice e)
{
  switch (e) {
    case EstimatorChoice::F1:
      return {EstimatorKind::F1};
    case EstimatorChoice::F2:
      return {EstimatorKind::F2};
    case EstimatorChoice::both:
      break;
  }
  return {EstimatorKind::F1, EstimatorKind::F2};
}

void check(bool ok, const std::string& message)
{
  if (!ok)
    throw ConfigError(message);
}

void check_grid(const std::vector<double>& grid, const std::string& name)
{
  for (std::size_t i = 0; i < grid.size(); ++i) {
    check(grid[i] > 0.0, name + " entries must be positive");
    check(i == 0 || grid[i] > grid[i - 1], name + " must be strictly increasing");
  }
}

} // namespace

const char* to_string(ExperimentKind kind)
{
  for (const auto& k : kind_names)
    if (k.kind == kind)
      return k.name;
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name)
{
  for (const auto& k : kind_names)
    if (name == k.name)
      return k.kind;
  throw ConfigError("unknown experiment '" + name + "'");
}

ConfigError::ConfigError(const std::string& what, std::size_t line, std::size_t column)
  : Error(line > 0 ? "line " + std::to_string(line) + ", column " + std::to_string(column) +
                       ": " + what
                   : what),
    line_(line),
    column_(column)
{}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const
{
  auto same_points = [](const std::vector<Point>& a, const std::vector<Point>& b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](auto& p, auto& q) {
             return p.t == q.t && p.z == q.z;
           });
  };
  return kind == o.kind && scenario == o.scenario && n == o.n &&
         replications == o.replications && same_points(points, o.points) &&
         estimator == o.estimator && alpha == o.alpha && beta == o.beta && c1 == o.c1 &&
         c2 == o.c2 && beta_exponent == o.beta_exponent && alpha_grid == o.alpha_grid &&
         beta_grid == o.beta_grid && n_grid == o.n_grid && t_grid == o.t_grid &&
         z_grid == o.z_grid && kernel == o.kernel && input == o.input &&
         alpha_exponent == o.alpha_exponent && alpha_constant == o.alpha_constant &&
         alpha0 == o.alpha0 && beta0 == o.beta0 && envelope == o.envelope && seed == o.seed &&
         output == o.output && threads == o.threads;
}

void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value)
{
  if (key == "experiment")
    c.kind = experiment_kind_from_string(value);
  else if (key == "scenario")
    c.scenario = value;
  else if (key == "n")
    c.n = to_unsigned(key, value);
  else if (key == "m" || key == "B" || key == "replications")
    c.replications = to_unsigned(key, value);
  else if (key == "point" || key == "points")
    c.points = to_points(key, value);
  else if (key == "estimator") {
    if (value == "F1")
      c.estimator = EstimatorChoice::F1;
    else if (value == "F2")
      c.estimator = EstimatorChoice::F2;
    else if (value == "both")
      c.estimator = EstimatorChoice::both;
    else
      throw ConfigError("estimator must be F1, F2 or both, got '" + value + "'");
  } else if (key == "alpha")
    c.alpha = to_double(key, value);
  else if (key == "beta")
    c.beta = to_double(key, value);
  else if (key == "c1")
    c.c1 = to_double(key, value);
  else if (key == "c2")
    c.c2 = to_double(key, value);
  else if (key == "beta_exponent")
    c.beta_exponent = to_double(key, value);
  else if (key == "alpha_grid")
    c.alpha_grid = to_doubles(key, value);
  else if (key == "beta_grid")
    c.beta_grid = to_doubles(key, value);
  else if (key == "n_grid") {
    c.n_grid.clear();
    for (const auto& part : split(value, ','))
      c.n_grid.push_back(to_unsigned(key, part));
  } else if (key == "t_grid")
    c.t_grid = to_doubles(key, value);
  else if (key == "z_grid")
    c.z_grid = to_doubles(key, value);
  else if (key == "kernel")
    c.kernel = value;
  else if (key == "input")
    c.input = value;
  else if (key == "alpha_exponent")
    c.alpha_exponent = to_double(key, value);
  else if (key == "alpha_constant")
    c.alpha_constant = to_double(key, value);
  else if (key == "alpha0")
    c.alpha0 = to_double(key, value);
  else if (key == "beta0")
    c.beta0 = to_double(key, value);
  else if (key == "envelope")
    c.envelope = to_double(key, value);
  else if (key == "seed")
    c.seed = to_unsigned(key, value);
  else if (key == "output" || key == "out")
    c.output = value;
  else if (key == "threads")
    c.threads = to_unsigned(key, value);
  else
    throw ConfigError("unknown key '" + key + "'");
}

ExperimentConfig parse_config(const std::string& text)
{
  return parse_config(text, ExperimentConfig{});
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig config)
{
  std::stringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    if (trim(line).empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      const auto col = line.find_first_not_of(" \t") + 1;
      throw ConfigError("expected 'key = value'", line_no, col);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("missing key before '='", line_no, eq + 1);
    try {
      apply_setting(config, key, value);
    } catch (const ConfigError& e) {
      const auto col = line.find_first_not_of(" \t", eq + 1);
      throw ConfigError(e.what(), line_no, (col == std::string::npos ? eq : col) + 1);
    }
  }
  return config;
}

std::string to_text(const ExperimentConfig& c)
{
  std::ostringstream out;
  auto num = [](double v) { return format_double(v); };
  auto count = [](std::size_t v) { return std::to_string(v); };
  out << "experiment = " << to_string(c.kind) << '\n'
      << "scenario = " << c.scenario << '\n'
      << "n = " << c.n << '\n'
      << "replications = " << c.replications << '\n'
      << "points = " << join(c.points, format_point) << '\n'
      << "estimator = " << to_string(c.estimator) << '\n'
      << "alpha = " << num(c.alpha) << '\n'
      << "beta = " << num(c.beta) << '\n'
      << "c1 = " << num(c.c1) << '\n'
      << "c2 = " << num(c.c2) << '\n'
      << "beta_exponent = " << num(c.beta_exponent) << '\n'
      << "alpha_grid = " << join(c.alpha_grid, num) << '\n'
      << "beta_grid = " << join(c.beta_grid, num) << '\n'
      << "n_grid = " << join(c.n_grid, count) << '\n'
      << "t_grid = " << join(c.t_grid, num) << '\n'
      << "z_grid = " << join(c.z_grid, num) << '\n'
      << "kernel = " << c.kernel << '\n'
      << "input = " << c.input << '\n'
      << "alpha_exponent = " << num(c.alpha_exponent) << '\n'
      << "alpha_constant = " << num(c.alpha_constant) << '\n'
      << "alpha0 = " << num(c.alpha0) << '\n'
      << "beta0 = " << num(c.beta0) << '\n'
      << "envelope = " << num(c.envelope) << '\n'
      << "seed = " << c.seed << '\n'
      << "output = " << c.output << '\n'
      << "threads = " << c.threads << '\n';
  return out.str();
}

void ExperimentConfig::validate() const
{
  try {
    scenario_by_id(scenario);
    UnivariateKernel::by_name(kernel);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const bool reads_input =
    !input.empty() && (kind == ExperimentKind::estimate_grid || kind == ExperimentKind::bw_select);
  if (!reads_input && kind != ExperimentKind::equivalence && kind != ExperimentKind::table1)
    check(n >= 1, "n must be at least 1");
  check(alpha >= 0.0 && beta >= 0.0, "alpha and beta must be non-negative");
  check(c1 > 0.0 && c2 > 0.0, "c1 and c2 must be positive");
  check(beta_exponent > 0.0 && beta_exponent < 1.0, "beta_exponent must lie in (0, 1)");
  check(alpha0 >= 0.0 && beta0 >= 0.0, "pilot bandwidths must be non-negative");
  check_grid(alpha_grid, "alpha_grid");
  check_grid(beta_grid, "beta_grid");

  switch (kind) {
    case ExperimentKind::simulate:
      break;
    case ExperimentKind::estimate_grid:
      check_grid(t_grid, "t_grid");
      check_grid(z_grid, "z_grid");
      break;
    case ExperimentKind::mc_normality:
    case ExperimentKind::mc_mse:
      check(replications >= 2, "Monte Carlo runs need at least 2 replications");
      check(!points.empty(), "at least one point is required");
      if (kind == ExperimentKind::mc_mse)
        check(alpha > 0.0, "mc-mse needs alpha > 0");
      if (kind == ExperimentKind::mc_mse && estimator != EstimatorChoice::F1)
        check(beta > 0.0, "F2 needs beta > 0");
      break;
    case ExperimentKind::equivalence:
      for (auto size : n_grid)
        check(size >= 1, "n_grid entries must be at least 1");
      check(envelope > 0.0, "envelope must be positive");
      check(!points.empty(), "a point is required");
      break;
    case ExperimentKind::functional:
      check(replications >= 2, "Monte Carlo runs need at least 2 replications");
      check(alpha_exponent > 0.0 && alpha_constant > 0.0, "alpha rule must be positive");
      break;
    case ExperimentKind::bw_select:
      check(replications >= 1, "bootstrap needs B >= 1");
      check(!alpha_grid.empty(), "bw-select needs alpha_grid");
      check(!points.empty(), "a point is required");
      break;
    case ExperimentKind::table1:
      check(replications >= 2, "Monte Carlo runs need at least 2 replications");
      for (auto size : n_grid)
        check(size >= 1, "n_grid entries must be at least 1");
      break;
  }
}

std::vector<Table1Row> table1(const ExperimentConfig& config)
{
  const Scenario scenario = scenario_by_id(config.scenario);
  const auto kernel = UnivariateKernel::by_name(config.kernel);
  const EstimatorConfig base(kernel, Bandwidths{1.0, 1.0});
  const auto kinds = estimators_of(config.estimator);
  const std::vector<double> betas = config.beta_grid;

  std::vector<Table1Row> rows;
  for (const auto& point : config.points) {
    const double truth = scenario.cdf(point.t, point.z);
    for (const auto n : config.n_grid) {
      // candidates: F1 over alphas, then F2 over alphas x betas
      struct Candidate
      {
        EstimatorKind kind;
        double alpha;
        double beta;
      };
      std::vector<Candidate> candidates;
      for (auto kind : kinds) {
        for (double a : config.alpha_grid) {
          if (kind == EstimatorKind::F1)
            candidates.push_back({kind, a, 0.0});
          else
            for (double b : betas)
              candidates.push_back({kind, a, b});
        }
      }
      const std::size_t B = config.replications;
      std::vector<std::optional<double>> errors(B * candidates.size());
      parallel_for(B, config.threads, [&](std::size_t r) {
        const Sample data = sample(scenario, n, config.seed + r);
        for (std::size_t c = 0; c < candidates.size(); ++c) {
          const auto& cand = candidates[c];
          const auto cfg = base.with_bandwidths({cand.alpha, cand.kind == EstimatorKind::F2
                                                               ? cand.beta
                                                               : 0.0});
          try {
            const double v = cand.kind == EstimatorKind::F1 ? F1(data, cfg, point.t, point.z)
                                                            : F2(data, cfg, point.t, point.z);
            errors[r * candidates.size() + c] = v - truth;
          } catch (const Error&) {
          }
        }
      });

      for (auto kind : kinds) {
        std::optional<Table1Row> best;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
          if (candidates[c].kind != kind)
            continue;
          std::vector<double> squares;
          for (std::size_t r = 0; r < B; ++r)
            if (const auto& e = errors[r * candidates.size() + c])
              squares.push_back(*e * *e);
          const std::size_t failures = B - squares.size();
          if (squares.size() < 2 || failures * 100 > B)
            continue;
          const auto mv = mean_variance(squares);
          const Table1Row row{point,
                              n,
                              kind,
                              candidates[c].alpha,
                              candidates[c].beta,
                              mv.mean,
                              std::sqrt(mv.variance / static_cast<double>(squares.size())),
                              failures};
          if (!best || row.mse < best->mse)
            best = row;
        }
        if (best)
          rows.push_back(*best);
        else
          rows.push_back({point, n, kind, NAN, NAN, NAN, NAN, B});
      }
    }
  }
  return rows;
}

void write_table1_csv(std::ostream& out, const std::vector<Table1Row>& rows)
{
  out << "point,n,estimator,alpha,beta,mse,se\n";
  for (const auto& r : rows) {
    out << format_point(r.point) << ',' << r.n << ',' << to_string(r.estimator) << ','
        << format_double(r.alpha) << ',';
    if (r.estimator == EstimatorKind::F2)
      out << format_double(r.beta);
    out << ',' << format_double(r.mse) << ',' << format_double(r.se) << '\n';
  }
}

namespace {

class OutputDir
{
public:
  OutputDir(const std::string& path, RunResult& result) : root_(path), result_(result)
  {
    std::filesystem::create_directories(root_);
  }

  std::ofstream open(const std::string& name)
  {
    const auto path = root_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out)
      throw Error("cannot write " + path.string());
    result_.files.push_back(path);
    return out;
  }

private:
  std::filesystem::path root_;
  RunResult& result_;
};

Sample input_or_simulated(const ExperimentConfig& c, const Scenario& scenario)
{
  if (c.input.empty())
    return sample(scenario, c.n, c.seed);
  std::ifstream in(c.input);
  if (!in)
    throw ConfigError("cannot read input sample '" + c.input + "'");
  return read_sample_csv(in);
}

BandwidthSchedule schedule_of(const ExperimentConfig& c, std::size_t n)
{
  if (c.alpha > 0.0)
    return BandwidthSchedule::from_fixed({c.alpha, c.beta}, n, c.beta_exponent);
  return {c.c1, c.c2, c.beta_exponent};
}

void write_manifest(OutputDir& dir, const ExperimentConfig& c)
{
  auto out = dir.open("manifest.txt");
  out << "# csmark " << version << "\n"
      << "# seed " << c.seed << "\n"
      << to_text(c);
}

int run_experiment(const ExperimentConfig& c, OutputDir& dir, std::string& message)
{
  const Scenario scenario = scenario_by_id(c.scenario);
  const auto kernel = UnivariateKernel::by_name(c.kernel);
  int status = 0;

  switch (c.kind) {
    case ExperimentKind::simulate: {
      auto out = dir.open("sample.csv");
      write_sample_csv(out, sample(scenario, c.n, c.seed));
      break;
    }
    case ExperimentKind::estimate_grid: {
      const Sample data = input_or_simulated(c, scenario);
      const Bandwidths bw = c.alpha > 0.0 ? Bandwidths{c.alpha, c.beta}
                                          : schedule_of(c, data.size()).at(data.size());
      std::vector<double> ts = c.t_grid;
      std::vector<double> zs = c.z_grid;
      if (ts.empty())
        ts = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
      if (zs.empty())
        zs = ts;
      const auto rows = estimate_grid(data, EstimatorConfig(kernel, bw), ts, zs);
      auto out = dir.open("grid.csv");
      write_grid_csv(out, rows);
      break;
    }
    case ExperimentKind::mc_normality: {
      const ReplicationPlan plan{c.n, c.replications, c.seed, c.threads};
      for (auto kind : estimators_of(c.estimator)) {
        const auto summary =
          mc_normality(scenario, kind, c.points.front(), schedule_of(c, c.n), kernel, plan);
        const std::string tag = to_string(kind);
        auto stats = dir.open("mc_normality_" + tag + ".csv");
        write_statistics_csv(stats, summary);
        auto line = dir.open("summary_" + tag + ".json");
        write_summary_line(line, summary);
        auto qq = dir.open("qq_" + tag + ".csv");
        qq << "normal_quantile,statistic,reference\n";
        for (const auto& p : qq_data(summary))
          qq << format_double(p.normal_quantile) << ',' << format_double(p.statistic) << ','
             << format_double(p.reference) << '\n';
        message += tag + ": ks=" + format_double(summary.ks_distance) +
                   " failures=" + std::to_string(summary.failures) + "\n";
        if (!summary.valid())
          status = 3;
      }
      break;
    }
    case ExperimentKind::mc_mse: {
      ExperimentConfig cell = c;
      cell.n_grid = {c.n};
      cell.alpha_grid = {c.alpha};
      cell.beta_grid = {c.beta > 0.0 ? c.beta : 1.0};
      const auto rows = table1(cell);
      auto out = dir.open("mc_mse.csv");
      write_table1_csv(out, rows);
      for (const auto& r : rows) {
        message += std::string(to_string(r.estimator)) + ": mse=" + format_double(r.mse) +
                   " se=" + format_double(r.se) + "\n";
        if (std::isnan(r.mse))
          status = 3;
      }
      break;
    }
    case ExperimentKind::equivalence: {
      const auto sizes = c.n_grid.empty() ? geometric_sizes(1000, 100000, 40) : c.n_grid;
      const BandwidthSchedule schedule{c.c1, c.c2, c.beta_exponent};
      const auto curve =
        equivalence_curve(scenario, c.points.front(), sizes, schedule, kernel, c.seed, c.envelope);
      auto out = dir.open("equivalence.csv");
      write_equivalence_csv(out, curve);
      message += "fraction inside envelope: " + format_double(curve.fraction_inside) + "\n";
      if (curve.failures * 100 > sizes.size())
        status = 3;
      break;
    }
    case ExperimentKind::functional: {
      const ReplicationPlan plan{c.n, c.replications, c.seed, c.threads};
      const auto summary = mc_functional(scenario, {c.alpha_exponent, c.alpha_constant}, plan);
      auto stats = dir.open("functional.csv");
      write_statistics_csv(stats, summary);
      auto line = dir.open("summary.json");
      line << "{\"m\":" << summary.m << ",\"mean\":" << format_double(summary.mean)
           << ",\"variance\":" << format_double(summary.variance)
           << ",\"efficient_variance\":" << format_double(summary.reference_variance)
           << ",\"failures\":" << summary.failures << "}\n";
      message += "variance " + format_double(summary.variance) + " vs bound " +
                 format_double(summary.reference_variance) + "\n";
      if (!summary.valid())
        status = 3;
      break;
    }
    case ExperimentKind::bw_select: {
      const Sample data = input_or_simulated(c, scenario);
      BootstrapPlan plan;
      plan.alpha0 = c.alpha0 > 0.0 ? c.alpha0 : default_pilot_bandwidth(data.size());
      plan.beta0 = c.beta0 > 0.0 ? c.beta0 : default_pilot_bandwidth(data.size());
      plan.B = c.replications;
      plan.alpha_grid = c.alpha_grid;
      plan.beta_grid = c.beta_grid;
      plan.point = c.points.front();
      plan.seed = c.seed;
      plan.threads = c.threads;
      if (c.input.empty())
        plan.truth = scenario.cdf(plan.point.t, plan.point.z);
      const auto table = bootstrap_mse(data, plan, kernel, scenario.support);
      auto out = dir.open("bw_select.csv");
      write_bootstrap_csv(out, table);
      auto chosen = dir.open("selection.csv");
      chosen << "estimator,alpha,beta,mse_hat\n";
      try {
        const auto sel = select(table);
        for (auto [kind, choice] : {std::pair{EstimatorKind::F1, sel.F1},
                                    std::pair{EstimatorKind::F2, sel.F2}}) {
          if (!choice)
            continue;
          chosen << to_string(kind) << ',' << format_double(choice->alpha) << ',';
          if (kind == EstimatorKind::F2)
            chosen << format_double(choice->beta);
          chosen << ',' << format_double(choice->mse_hat) << '\n';
        }
      } catch (const SelectionFailure& e) {
        message += std::string(e.what()) + "\n";
        status = 3;
      }
      break;
    }
    case ExperimentKind::table1: {
      const auto rows = table1(c);
      auto out = dir.open("table1.csv");
      write_table1_csv(out, rows);
      for (const auto& r : rows)
        if (std::isnan(r.mse))
          message += "cell " + format_point(r.point) + " n=" + std::to_string(r.n) + " " +
                     to_string(r.estimator) + " failed\n";
      break;
    }
  }
  return status;
}

} // namespace

RunResult run(const ExperimentConfig& config)
{
  RunResult result;
  try {
    config.validate();
  } catch (const ConfigError& e) {
    result.exit_code = 2;
    result.message = e.what();
    return result;
  }
  try {
    OutputDir dir(config.output, result);
    write_manifest(dir, config);
    result.exit_code = run_experiment(config, dir, result.message);
  } catch (const ConfigError& e) {
    result.exit_code = 2;
    result.message += e.what();
  } catch (const Error& e) {
    result.exit_code = 3;
    result.message += e.what();
  }
  return result;
}

} // namespace csmark
