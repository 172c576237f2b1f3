// levinson2d: verify, phase, spectrum and sweep-family over an INI config.
//
// Exit status: 0 ok, 1 solver or I/O failure, 2 bad config or flags, 3 unsupported regime,
// 4 a VIOLATED row.

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "levinson2d/commands.hpp"

using namespace levinson2d;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::string format;
  std::optional<unsigned> threads;
  std::string log_level = "warn";
};

int run(const std::string& command, const Flags& f) {
  RunConfig cfg = load_config(f.config);
  if (!f.out.empty()) cfg.out_path = f.out;
  if (!f.format.empty()) cfg.format = f.format;
  if (f.threads) cfg.threads = *f.threads;

  static const std::map<std::string, std::function<CommandResult(const RunConfig&)>> commands = {
      {"verify", cmd_verify}, {"phase", cmd_phase}, {"spectrum", cmd_spectrum}, {"sweep-family", cmd_sweep_family}};
  spdlog::info("{}: {} j value(s), {} thread(s)", command, cfg.j_list.size(), cfg.threads);
  const CommandResult result = commands.at(command)(cfg);
  spdlog::info("{}: {} row(s), exit {}", command, result.table.rows.size(), result.exit_code);

  std::ofstream file;
  if (!cfg.out_path.empty()) {
    file.open(cfg.out_path, std::ios::binary);
    if (!file) {
      std::cerr << "error: cannot write '" << cfg.out_path << "'\n";
      return exit_error;
    }
  }
  std::ostream& os = cfg.out_path.empty() ? std::cout : file;
  if (cfg.format == "json") write_json(os, result.table, cfg.raw, result.metadata);
  else write_csv(os, result.table);
  os.flush();
  if (!os) {
    std::cerr << "error: write failed\n";
    return exit_error;
  }
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks of the relativistic 2D Levinson theorem"};
  app.require_subcommand(1);
  Flags flags;
  for (const char* name : {"verify", "phase", "spectrum", "sweep-family"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", flags.config, "INI run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "output file (default: stdout)");
    sub->add_option("--format", flags.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--log-level", flags.log_level, "trace, debug, info, warn, error, off");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  auto logger = spdlog::stderr_color_st("levinson2d");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(flags.log_level));

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, flags);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_unsupported(e.kind()) ? exit_unsupported : exit_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_error;
  }
}
