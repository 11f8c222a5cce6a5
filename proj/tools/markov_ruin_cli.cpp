#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "markov_ruin/config.hpp"
#include "markov_ruin/errors.hpp"
#include "markov_ruin/numerics.hpp"
#include "markov_ruin/run.hpp"

namespace mr = markov_ruin;

namespace {

constexpr const char* kExitCodes =
    "Exit status:\n"
    "  0  success, no fatal diagnostic\n"
    "  2  configuration error (ParseError, UnknownKey, MissingRequired, bad flag)\n"
    "  3  model validation error (UnknownKind, InvalidParameter, NonStationary, ...)\n"
    "  4  fatal statistical diagnostic (RouteDisagreement, MinorizationViolated, TooFewEvents, ...)\n"
    "  5  internal error\n"
    "\n"
    "MARKOV_RUIN_THREADS sets the worker count when --threads is absent.";

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<std::uint64_t> horizon;
  std::optional<std::string> out;
  std::optional<int> threads;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mr::Error(mr::ErrorCode::ParseError, "config", "cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int execute(mr::Experiment experiment, const Options& opt) {
  std::string text = read_file(opt.config_path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') text = mr::config_text_from_manifest(text);

  mr::RunConfig config = mr::parse_config(text, experiment);
  if (opt.seed) config.seed = *opt.seed;
  if (opt.paths) {
    if (*opt.paths == 0) throw mr::Error(mr::ErrorCode::ParseError, "n_paths", "--paths must be positive");
    config.n_paths = *opt.paths;
  }
  if (opt.horizon) {
    if (*opt.horizon == 0) throw mr::Error(mr::ErrorCode::ParseError, "horizon", "--horizon must be positive");
    config.horizon = *opt.horizon;
  }
  if (opt.out) config.output_dir = *opt.out;
  if (opt.threads) {
    if (*opt.threads <= 0) throw mr::Error(mr::ErrorCode::ParseError, "threads", "--threads must be positive");
    mr::set_thread_count(*opt.threads);
  }

  const mr::RunResult result = mr::run(config);
  for (const auto& f : result.files) std::cout << (std::filesystem::path(config.output_dir) / f).string() << '\n';
  for (const auto& f : result.flags) {
    const bool fatal = std::find(result.fatal.begin(), result.fatal.end(), f) != result.fatal.end();
    std::cerr << (fatal ? "fatal: " : "warning: ") << f << '\n';
  }
  if (result.report.contains("exponent")) std::cout << "exponent " << result.report["exponent"].dump() << '\n';
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tail exponents and ruin probabilities for Markov-modulated stochastic recurrences."};
  app.footer(kExitCodes);
  app.require_subcommand(1);

  Options opt;
  std::optional<mr::Experiment> chosen;
  const std::pair<const char*, const char*> commands[] = {
      {"solve", "tail exponent by every applicable route, with a cross-check verdict"},
      {"ruin", "Monte Carlo ruin curve and power-law fit"},
      {"perpetuity", "perpetuity samples and Hill report"},
      {"garch", "GARCH(1,1) stationary samples and Hill report"},
      {"verify", "invariant suite"},
      {"minorize", "minorization certificate and its checks"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->footer(kExitCodes);
    sub->add_option("--config", opt.config_path, "config file (TOML subset) or a run manifest")->required();
    sub->add_option("--seed", opt.seed, "master seed, overrides the config");
    sub->add_option("--paths", opt.paths, "number of paths, overrides n_paths");
    sub->add_option("--horizon", opt.horizon, "path horizon, overrides horizon");
    sub->add_option("--out", opt.out, "output directory, overrides output_dir");
    sub->add_option("--threads", opt.threads, "worker threads");
    sub->callback([&chosen, n = std::string(name)] { chosen = mr::parse_experiment(n); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return execute(*chosen, opt);
  } catch (const mr::Error& e) {
    std::cerr << "error: " << mr::to_string(e.code());
    if (!e.field().empty()) std::cerr << " [" << e.field() << "]";
    std::cerr << ": " << e.what() << '\n';
    return mr::exit_status(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: Internal: " << e.what() << '\n';
    return 5;
  }
}
