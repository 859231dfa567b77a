// cutofflab: certified total-variation bounds for powers of positive
// definite functions on finitely generated groups.
//
// Subcommands: analyze, scan, verify, cogrowth, psd-check.
// Exit codes: 0 success, 2 config error, 3 capacity exceeded,
//             4 oracle/tolerance mismatch.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cutofflab/cli.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitMismatch = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cutofflab::ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const cutofflab::CommandResult& result,
                  const std::optional<std::string>& path) {
  if (!result.csv.empty()) {
    if (path) {
      std::ofstream out(*path, std::ios::binary);
      if (!out)
        throw cutofflab::ConfigError("cannot open output file: " + *path);
      out << result.csv;
    } else {
      std::cout << result.csv;
    }
  }
  std::cout << result.summary;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certified TV-distance bounds for state powers on groups"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_path;
  unsigned threads = 1;
  std::size_t cap = 0;
  double epsilon = 0.0;
  unsigned radius = 0;
  bool output_set = false, cap_set = false, eps_set = false, radius_set = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config (JSON)")
        ->required();
    cmd->add_option("--output", output_path, "CSV output path")
        ->each([&](const std::string&) { output_set = true; });
    cmd->add_option("--threads", threads, "worker threads for scans");
    cmd->add_option("--cap", cap, "enumeration cap (elements per call)")
        ->each([&](const std::string&) { cap_set = true; });
    cmd->add_option("--epsilon", epsilon, "target accuracy for windows")
        ->each([&](const std::string&) { eps_set = true; });
    cmd->add_option("--radius", radius, "truncation radius override")
        ->each([&](const std::string&) { radius_set = true; });
  };

  CLI::App* analyze = app.add_subcommand("analyze", "per-power bound table");
  CLI::App* scan = app.add_subcommand("scan", "family cut-off window scan");
  CLI::App* verify = app.add_subcommand("verify", "run oracle comparisons");
  CLI::App* cogrowth = app.add_subcommand("cogrowth", "kernel word counts");
  CLI::App* psd = app.add_subcommand("psd-check", "Gram spectrum check");
  for (auto* cmd : {analyze, scan, verify, cogrowth, psd}) add_common(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    auto cfg = cutofflab::parse_config_text(read_file(config_path));

    cutofflab::CliOverrides ov;
    if (output_set) ov.output = output_path;
    if (threads > 0) ov.threads = threads;
    if (const char* env = std::getenv("CUTOFFLAB_CAP")) {
      const long long v = std::atoll(env);
      if (v <= 0)
        throw cutofflab::ConfigError("CUTOFFLAB_CAP must be a positive integer");
      ov.cap = static_cast<std::size_t>(v);
    }
    if (cap_set) ov.cap = cap;
    if (eps_set) ov.epsilon = epsilon;
    if (radius_set) ov.radius = radius;

    const std::optional<std::string> out_path =
        ov.output ? ov.output : cfg.output;

    cutofflab::CommandResult result;
    if (analyze->parsed()) {
      result = cutofflab::run_analyze(cfg, ov);
    } else if (scan->parsed()) {
      result = cutofflab::run_scan(cfg, ov);
    } else if (verify->parsed()) {
      result = cutofflab::run_verify(cfg, ov);
    } else if (cogrowth->parsed()) {
      result = cutofflab::run_cogrowth(cfg, ov);
    } else {
      result = cutofflab::run_psd_check(cfg, ov);
    }
    write_output(result, out_path);
    return result.ok ? kExitOk : kExitMismatch;
  } catch (const cutofflab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const cutofflab::CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const cutofflab::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
}
