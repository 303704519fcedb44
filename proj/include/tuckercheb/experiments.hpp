#pragma once

#include "tuckercheb/kernel_lowrank.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tuckercheb::experiments {

/// Bad configuration: unknown key, malformed value, unreadable input.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Fully resolved settings for one CLI invocation.
struct RunConfig {
  std::string command;  // funapprox | kernel | gp
  std::string suite;    // empty for a custom run
  std::uint64_t seed = 0;
  /// Repetitions with seeds seed, seed+1, ...; the reported error is the median.
  std::size_t repeats = 1;
  /// Function names (funapprox) or kernel names (kernel, gp).
  std::vector<std::string> targets;
  std::vector<std::string> methods;
  std::size_t n = 27;
  /// Target ranks swept; the core/sketch width is rank + oversample.
  std::vector<std::size_t> ranks;
  std::size_t oversample = 0;
  std::size_t levels = 1;
  SampleRule sample_rule = SampleRule::shifted;
  /// Uniform points for the funapprox error estimate.
  std::size_t samples = 100;

  double sigma = 1.0;
  /// gp: per-dimension length scales of the kernel formula.
  std::vector<double> sigmas;
  /// gp: "squared" (exp(-sum d^2/(2 s^2))) or "exponential"
  /// (exp(-sqrt(sum d^2/s^2))). Ignored when a kernel is named explicitly.
  std::string reading = "squared";

  /// kernel: report the error after recompression to the target rank.
  bool recompress = false;
  std::size_t rsvd_oversample = 5;

  double side = 5.0;
  double separation = 10.0;
  double theta = 0.0;
  std::size_t dims = 2;
  std::size_t source_count = 500;
  std::size_t target_count = 500;
  std::string points;
  std::string target_points;

  std::string out;
  bool timing = false;
};

std::vector<std::string> suite_names(std::string_view command);

/// Defaults of a command, replaced wholesale by a suite's settings.
RunConfig default_config(std::string_view command, std::string_view suite = "");

/// Sets one key; throws ConfigError naming the key for unknown keys or bad
/// values.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

using Settings = std::vector<std::pair<std::string, std::string>>;

/// key = value lines grouped under [common], [funapprox], [kernel] or [gp];
/// '#' starts a comment. Returns the settings of [common] and of `command`'s
/// section, in file order. Keys are checked against the known set.
Settings parse_config_file(std::istream& is, std::string_view command);

/// Defaults for the command and the last "suite" setting, then every setting
/// in order, then validation.
RunConfig resolve_config(std::string_view command, const Settings& settings);

/// Throws ConfigError for values that cannot be run.
void validate(const RunConfig& cfg);

/// The resolved config as key/value pairs accepted by apply_setting.
Settings describe(const RunConfig& cfg);

struct ResultRow {
  std::string experiment;
  std::string target;
  std::string method;
  std::string metric;
  std::size_t n = 0;
  std::size_t rank = 0;
  std::size_t oversample = 0;
  std::size_t levels = 0;
  std::uint64_t seed = 0;
  std::size_t repeats = 1;
  double error = 0.0;
  std::uint64_t eval_count = 0;
  std::uint64_t rng_draws = 0;
  double wall_time = 0.0;

  [[nodiscard]] std::size_t ell() const { return rank + oversample; }
};

std::vector<ResultRow> run_funapprox(const RunConfig& cfg);
std::vector<ResultRow> run_kernel(const RunConfig& cfg);
/// `inspect`, when set, sees every constructed kernel before it is dropped.
std::vector<ResultRow> run_gp(
    const RunConfig& cfg,
    const std::function<void(const ResultRow&, const LowRankKernel&)>& inspect = {});
std::vector<ResultRow> run(const RunConfig& cfg);

/// Comment header with the resolved config, then one line per row.
/// wall_time is written only when cfg.timing is set.
void write_csv(std::ostream& os, const RunConfig& cfg,
               const std::vector<ResultRow>& rows);
/// Rows = target x rank, columns = methods.
void write_summary(std::ostream& os, const std::vector<ResultRow>& rows);

/// GP test domain: longitude [-125,-66], latitude [24,50], day [1,366].
BoundingBox gp_domain();
/// Length scales 0.8 * {80, 30, 365}.
std::vector<double> gp_default_sigmas();
KernelSpec gp_kernel(const RunConfig& cfg);

struct SelftestResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Invariant checks on small fixed instances; deterministic.
std::vector<SelftestResult> run_selftest();
void write_selftest(std::ostream& os, const std::vector<SelftestResult>& results);

}  // namespace tuckercheb::experiments
