#pragma once
// Command-line driver. Kept out of main() so tests can run commands against
// in-memory streams and compare outputs.
//
// Exit codes: 0 success, 1 usage error, 2 runtime or validation failure,
// 3 invariant-suite failure.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sketchattn/attention.hpp"
#include "sketchattn/evalbench.hpp"

namespace sketchattn {

struct RunConfig {
  std::string command;
  std::vector<std::size_t> ns = {256};  // bench-runtime takes the whole list,
                                        // other commands use the first entry
  std::size_t p = 8;
  std::size_t p_v = 0;  // 0 = same as p
  std::vector<std::size_t> ds;
  std::vector<std::uint64_t> seeds;
  KernelKind kernel = KernelKind::Gaussian;
  std::vector<std::string> methods;  // interpreted per command
  Distribution distribution = Distribution::IsotropicGaussian;
  double sigma = 1.0;
  double decay = 0.5;
  double gamma = 1e-3;
  InverseMode inverse_mode = InverseMode::ExactPinv;
  std::size_t iters = 20;
  double tol = 1e-7;
  std::size_t repeats = 5;
  std::size_t trials = 4;
  double perturb_scale = 1e-3;
  std::size_t top_k = 32;
  bool with_replacement = true;
  std::string out_path;  // empty = stdout
  std::string q_path, k_path, v_path;
};

/// args[0] is the command. Throws UsageError naming the offending token.
/// A `--config FILE` flag loads `key = value` lines first; remaining flags
/// override the file.
RunConfig parse_config(const std::vector<std::string>& args);

/// Executes a parsed config. Returns 0, 2 or 3; usage problems surface as
/// UsageError. CSV goes to cfg.out_path when set, otherwise to `out`.
int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Complete entry point: parse, dispatch, map exceptions to exit codes.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

const char* usage_text();

}  // namespace sketchattn
