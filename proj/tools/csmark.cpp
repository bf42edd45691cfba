// Command-line front end: one experiment per invocation.
//
//   csmark mc-mse --config cell.cfg --seed 7 --out results --threads 4
//   csmark simulate --set n=500 --set scenario=A

#include "csmark/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr const char* subcommands[] = {
  "simulate", "estimate-grid", "mc-normality", "mc-mse",
  "equivalence", "functional", "bw-select", "table1",
};

struct Options
{
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
  std::vector<std::string> settings;
};

void add_options(CLI::App& sub, Options& opt)
{
  sub.add_option("--config", opt.config_path, "key = value configuration file")
    ->check(CLI::ExistingFile);
  sub.add_option("--seed", opt.seed, "base seed; replication r uses seed + r");
  sub.add_option("--out", opt.out, "output directory");
  sub.add_option("--threads", opt.threads, "worker cap (0: all cores); results do not depend on it");
  sub.add_option("--set", opt.settings, "extra key=value override, applied after the file");
}

int execute(const std::string& name, const Options& opt)
{
  using namespace csmark;
  ExperimentConfig config;
  try {
    std::string text;
    if (!opt.config_path.empty()) {
      std::ifstream in(opt.config_path);
      std::stringstream buffer;
      buffer << in.rdbuf();
      text = buffer.str();
    }
    config = parse_config(text);
    config.kind = experiment_kind_from_string(name);
    for (const auto& s : opt.settings) {
      const auto eq = s.find('=');
      if (eq == std::string::npos)
        throw ConfigError("--set expects key=value, got '" + s + "'");
      apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
    }
    if (opt.seed)
      config.seed = *opt.seed;
    if (opt.out)
      config.output = *opt.out;
    if (opt.threads)
      config.threads = *opt.threads;
  } catch (const ConfigError& e) {
    std::cerr << (opt.config_path.empty() ? "" : opt.config_path + ": ") << e.what() << '\n';
    return 2;
  }

  const RunResult result = run(config);
  if (!result.message.empty())
    (result.exit_code == 0 ? std::cout : std::cerr) << result.message
                                                    << (result.message.back() == '\n' ? "" : "\n");
  for (const auto& f : result.files)
    std::cout << f.string() << '\n';
  return result.exit_code;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Estimators for current status data with a continuous mark"};
  app.set_version_flag("--version", csmark::version);
  app.require_subcommand(1);

  Options options;
  std::string chosen;
  for (const char* name : subcommands) {
    auto* sub = app.add_subcommand(name);
    add_options(*sub, options);
    sub->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return execute(chosen, options);
}
