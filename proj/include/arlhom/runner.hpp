#pragma once

#include <string>
#include <vector>

#include "arlhom/config.hpp"
#include "arlhom/jsonout.hpp"

namespace arlhom {

struct RunOptions {
  std::string out_dir = ".";
  int threads = 0;  ///< 0 -> all cores
  bool verbose = false;
};

/// Executes one batch command and writes result.json, meta.log and the
/// command-specific CSV files into out_dir. Returns the result document.
/// Throws std::invalid_argument for configuration errors and
/// std::runtime_error for solver failures.
Json run_command(const std::string& command, const KeyValueConfig& cfg,
                 const RunOptions& opt);

const std::vector<std::string>& known_commands();

}  // namespace arlhom
