#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "cemreg/errors.hpp"
#include "cemreg/run_config.hpp"
#include "commands.hpp"

namespace {

void print_usage() {
  std::printf(
      "usage: cemreg <command> [--config FILE] [--key value | --key=value]...\n"
      "\n"
      "commands:\n"
      "  synth      generate a synthetic registration dataset\n"
      "  train      fit the latent model on a dataset\n"
      "  register   align one source cloud to one target cloud\n"
      "  bench      evaluate a method over a dataset split (or sweep budgets)\n"
      "\n"
      "configuration keys (defaults in brackets):\n"
      "%s",
      cemreg::RunConfig::describe().c_str());
}

// Short flags that map onto configuration keys, per command.
std::string alias_key(const std::string& command, const std::string& flag) {
  struct Alias {
    const char* command;
    const char* flag;
    const char* key;
  };
  static const Alias aliases[] = {
      {"*", "threads", "threads"},
      {"synth", "out", "data.out"},
      {"synth", "seed", "data.seed"},
      {"train", "dataset", "train.dataset"},
      {"train", "out", "train.out"},
      {"train", "epochs", "train.epochs"},
      {"train", "seed", "train.seed"},
      {"register", "source", "register.source"},
      {"register", "target", "register.target"},
      {"register", "emit-aligned", "register.emit_aligned"},
      {"register", "checkpoint", "model.checkpoint"},
      {"register", "oracle", "cem.oracle"},
      {"register", "seed", "cem.seed"},
      {"bench", "dataset", "bench.dataset"},
      {"bench", "method", "bench.method"},
      {"bench", "out", "bench.out"},
      {"bench", "checkpoint", "model.checkpoint"},
      {"bench", "seed", "cem.seed"},
      {"bench", "pairs", "bench.pairs"},
  };
  for (const Alias& alias : aliases) {
    if (flag == alias.flag &&
        (command == alias.command || std::string("*") == alias.command))
      return alias.key;
  }
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty()) {
    print_usage();
    return 1;
  }
  if (args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
    print_usage();
    return 0;
  }
  const std::string command = args[0];
  if (command != "synth" && command != "train" && command != "register" &&
      command != "bench") {
    std::fprintf(stderr, "error: unknown command '%s'\n", command.c_str());
    print_usage();
    return 1;
  }

  try {
    cemreg::RunConfig config;
    std::string config_file;
    std::vector<std::pair<std::string, std::string>> overrides;

    for (std::size_t i = 1; i < args.size(); ++i) {
      std::string arg = args[i];
      if (arg == "--help" || arg == "-h") {
        print_usage();
        return 0;
      }
      if (arg.rfind("--", 0) != 0)
        throw cemreg::ConfigError("unexpected argument '" + arg + "'");
      arg = arg.substr(2);

      std::string value;
      const std::size_t eq = arg.find('=');
      if (eq != std::string::npos) {
        value = arg.substr(eq + 1);
        arg = arg.substr(0, eq);
      } else {
        if (i + 1 >= args.size())
          throw cemreg::ConfigError("flag '--" + arg + "' needs a value");
        value = args[++i];
      }

      if (arg == "config") {
        config_file = value;
        continue;
      }
      // The synth smoke flag --pairs sets both split sizes at once.
      if (command == "synth" && arg == "pairs") {
        overrides.emplace_back("data.train_pairs", value);
        overrides.emplace_back("data.test_pairs", value);
        continue;
      }
      std::string key = alias_key(command, arg);
      if (key.empty()) key = arg;
      if (!config.is_known(key))
        throw cemreg::ConfigError("unknown flag or config key '--" + arg + "'");
      overrides.emplace_back(key, value);
    }

    if (!config_file.empty()) config.load_file(config_file);
    for (const auto& [key, value] : overrides) config.set(key, value);

    if (command == "synth") return cemreg::cli::cmd_synth(config);
    if (command == "train") return cemreg::cli::cmd_train(config);
    if (command == "register") return cemreg::cli::cmd_register(config);
    return cemreg::cli::cmd_bench(config);
  } catch (const cemreg::ConfigError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 1;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 2;
  }
}
