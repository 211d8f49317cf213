#include <CLI11.hpp>
#include <iostream>
#include <stdexcept>

#include "arlhom/config.hpp"
#include "arlhom/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "arlhom: effective-coefficient identification for heterogeneous diffusion media\n"
      "by overlap coupling of the oscillatory and effective models"};
  std::string command, config_path, out_dir = ".";
  int threads = 0;
  bool verbose = false;

  std::string cmds;
  for (const auto& c : arlhom::known_commands()) cmds += (cmds.empty() ? "" : "|") + c;
  app.add_option("command", command, "one of: " + cmds)->required();
  app.add_option("--config", config_path, "experiment configuration file")->required();
  app.add_option("--out", out_dir, "output directory (default: .)");
  app.add_option("--threads", threads, "worker threads (default: all cores)");
  app.add_flag("--verbose", verbose, "echo the log to stdout");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = arlhom::KeyValueConfig::from_file(config_path);
    arlhom::RunOptions opt;
    opt.out_dir = out_dir;
    opt.threads = threads;
    opt.verbose = verbose;
    arlhom::run_command(command, cfg, opt);
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
