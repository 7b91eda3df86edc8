#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "table.hpp"

namespace ehs::cli {

struct Outcome {
  std::vector<std::string> files;
  std::vector<std::string> failures;  // one entry per failed grid point
};

Outcome cmd_spectrum(const RunConfig& cfg, const OutputContext& ctx);
Outcome cmd_chern(const RunConfig& cfg, const OutputContext& ctx);
Outcome cmd_wilson(const RunConfig& cfg, const OutputContext& ctx);
Outcome cmd_cqed(const RunConfig& cfg, const OutputContext& ctx);

// Exit codes: 0 all converged, 1 some points failed, 2 usage or config error, 3 I/O error.
int run_cli(int argc, char** argv);

}  // namespace ehs::cli
