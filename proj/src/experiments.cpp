#include "tuckercheb/experiments.hpp"

#include "tuckercheb/random.hpp"
#include "tuckercheb/test_functions.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

namespace tuckercheb::experiments {
namespace {

const std::vector<std::string> kKeys = {
    "suite",      "seed",        "repeats",       "function",   "kernel",
    "method",     "n",           "rank",          "oversample", "levels",
    "sample_rule", "samples",    "sigma",         "sigmas",     "reading",
    "recompress", "rsvd_oversample", "side",      "separation", "theta",
    "dims",       "source_count", "target_count", "points",     "target_points",
    "out",        "timing"};

bool known_key(std::string_view key) {
  return std::find(kKeys.begin(), kKeys.end(), key) != kKeys.end();
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value,
                            std::string_view expected) {
  throw ConfigError("invalid value '" + std::string(value) + "' for key '" +
                    std::string(key) + "': expected " + std::string(expected));
}

std::uint64_t to_u64(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size())
    bad_value(key, value, "a non-negative integer");
  return out;
}

std::size_t to_size(std::string_view key, std::string_view value) {
  return static_cast<std::size_t>(to_u64(key, value));
}

double to_double(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size() ||
      !std::isfinite(out))
    bad_value(key, value, "a finite number");
  return out;
}

bool to_bool(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  bad_value(key, value, "true or false");
}

std::vector<std::string> to_list(std::string_view value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss{std::string(value)};
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_error(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9e", v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= b;
  return r;
}

Matrix load_points(const std::string& path, std::string_view key) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "' (key '" + std::string(key) + "')");
  try {
    return read_points_csv(in);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string experiment_id(const RunConfig& cfg) {
  return cfg.suite.empty() ? cfg.command : cfg.suite;
}

ResultRow base_row(const RunConfig& cfg, const std::string& target,
                   const std::string& method, const std::string& metric,
                   std::size_t rank) {
  ResultRow row;
  row.experiment = experiment_id(cfg);
  row.target = target;
  row.method = method;
  row.metric = metric;
  row.n = cfg.n;
  row.rank = rank;
  row.oversample = cfg.oversample;
  row.levels = cfg.levels;
  row.seed = cfg.seed;
  row.repeats = cfg.repeats;
  return row;
}

// Accumulates one (target, method, rank) cell over the repetitions.
struct Cell {
  std::vector<double> errors;
  std::uint64_t evals = 0;
  std::uint64_t draws = 0;
  double time = 0.0;

  void add(double err, std::uint64_t e, std::uint64_t d, double t) {
    if (errors.empty()) {
      evals = e;
      draws = d;
    }
    errors.push_back(err);
    time += t;
  }
};

void finish(ResultRow& row, const Cell& c) {
  row.error = median(c.errors);
  row.eval_count = c.evals;
  row.rng_draws = c.draws;
  row.wall_time = c.time;
}

const std::vector<std::string> kTensorMethods = {"hosvd", "m1", "m2", "m3"};

}  // namespace

std::vector<std::string> suite_names(std::string_view command) {
  if (command == "funapprox") return {"table1", "otl"};
  if (command == "kernel") return {"fig5", "fig6", "fig7"};
  if (command == "gp") return {"table4"};
  return {};
}

RunConfig default_config(std::string_view command, std::string_view suite) {
  RunConfig c;
  c.command = std::string(command);
  c.suite = std::string(suite);
  c.methods = kTensorMethods;
  if (command == "funapprox") {
    c.targets = {"f2"};
    c.n = 36;
    c.ranks = {5};
    c.oversample = 5;
    c.levels = 2;
    if (suite == "table1") {
      c.targets = {"f1", "f2", "f3"};
      c.repeats = 5;
    } else if (suite == "otl") {
      c.targets = {"otl"};
      c.n = 12;
      c.oversample = 0;
      c.levels = 1;
    }
  } else if (command == "kernel") {
    c.targets = {"gaussian"};
    c.n = 27;
    c.ranks = {4, 6, 8, 10};
    c.oversample = 0;
    c.levels = 1;
    c.side = 5.0;
    c.separation = 10.0;
    c.theta = std::numbers::pi / 4.0;
    c.dims = 2;
    if (suite == "fig5" || suite == "fig6") {
      c.targets = kernel_names();
      c.repeats = 5;
      if (suite == "fig6") {
        c.methods = {"randsvd", "hosvd", "m1", "m2", "m3"};
        c.recompress = true;
      }
    } else if (suite == "fig7") {
      c.targets = {"laplace3d", "biharmonic", "gaussian", "multiquadric", "matern32"};
      c.n = 18;
      c.separation = 15.0;
      c.dims = 3;
    }
  } else if (command == "gp") {
    c.n = 27;
    c.ranks = {2, 4, 6, 8};
    c.oversample = 0;
    c.levels = 1;
    c.sigmas = gp_default_sigmas();
    c.source_count = 2000;
  } else {
    throw ConfigError("unknown command '" + std::string(command) + "'");
  }
  const auto suites = suite_names(command);
  if (!suite.empty() && std::find(suites.begin(), suites.end(), suite) == suites.end())
    throw ConfigError("unknown suite '" + std::string(suite) + "' for " +
                      std::string(command) + " (key 'suite')");
  return c;
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  if (key == "suite") {
    c.suite = v;
  } else if (key == "seed") {
    c.seed = to_u64(key, v);
  } else if (key == "repeats") {
    c.repeats = to_size(key, v);
  } else if (key == "function" || key == "kernel") {
    c.targets = to_list(v);
  } else if (key == "method") {
    c.methods = to_list(v);
  } else if (key == "n") {
    c.n = to_size(key, v);
  } else if (key == "rank") {
    c.ranks.clear();
    for (const auto& item : to_list(v)) c.ranks.push_back(to_size(key, item));
  } else if (key == "oversample") {
    c.oversample = to_size(key, v);
  } else if (key == "levels") {
    c.levels = to_size(key, v);
  } else if (key == "sample_rule") {
    try {
      c.sample_rule = parse_sample_rule(v);
    } catch (const std::invalid_argument&) {
      bad_value(key, v, "shifted or nested");
    }
  } else if (key == "samples") {
    c.samples = to_size(key, v);
  } else if (key == "sigma") {
    c.sigma = to_double(key, v);
  } else if (key == "sigmas") {
    c.sigmas.clear();
    for (const auto& item : to_list(v)) c.sigmas.push_back(to_double(key, item));
  } else if (key == "reading") {
    if (v != "squared" && v != "exponential") bad_value(key, v, "squared or exponential");
    c.reading = v;
  } else if (key == "recompress") {
    c.recompress = to_bool(key, v);
  } else if (key == "rsvd_oversample") {
    c.rsvd_oversample = to_size(key, v);
  } else if (key == "side") {
    c.side = to_double(key, v);
  } else if (key == "separation") {
    c.separation = to_double(key, v);
  } else if (key == "theta") {
    c.theta = to_double(key, v);
  } else if (key == "dims") {
    c.dims = to_size(key, v);
  } else if (key == "source_count") {
    c.source_count = to_size(key, v);
  } else if (key == "target_count") {
    c.target_count = to_size(key, v);
  } else if (key == "points") {
    c.points = v;
  } else if (key == "target_points") {
    c.target_points = v;
  } else if (key == "out") {
    c.out = v;
  } else if (key == "timing") {
    c.timing = to_bool(key, v);
  } else {
    throw ConfigError("unknown key '" + std::string(key) + "'");
  }
}

Settings parse_config_file(std::istream& is, std::string_view command) {
  static const std::set<std::string, std::less<>> sections = {"common", "funapprox",
                                                              "kernel", "gp"};
  Settings out;
  std::string line, section = "common";
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const std::string where = "config line " + std::to_string(lineno) + ": ";
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      if (!sections.contains(section))
        throw ConfigError(where + "unknown section '" + section + "'");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (!known_key(key)) throw ConfigError(where + "unknown key '" + key + "'");
    if (section == "common" || section == command) out.emplace_back(key, value);
  }
  return out;
}

RunConfig resolve_config(std::string_view command, const Settings& settings) {
  std::string suite;
  for (const auto& [k, v] : settings)
    if (k == "suite") suite = trim(v);
  RunConfig c = default_config(command, suite);
  for (const auto& [k, v] : settings)
    if (k != "suite") apply_setting(c, k, v);
  validate(c);
  return c;
}

void validate(const RunConfig& c) {
  const bool kernel = c.command == "kernel", gp = c.command == "gp";
  if (c.command != "funapprox" && !kernel && !gp)
    throw ConfigError("unknown command '" + c.command + "'");
  if (c.repeats == 0) throw ConfigError("key 'repeats' must be at least 1");
  if (c.n < 2) throw ConfigError("key 'n' must be at least 2");
  if (c.ranks.empty()) throw ConfigError("key 'rank' needs at least one value");
  for (std::size_t r : c.ranks)
    if (r == 0) throw ConfigError("key 'rank' values must be positive");
  if (c.methods.empty()) throw ConfigError("key 'method' needs at least one value");
  bool uses_m2 = false;
  for (const auto& m : c.methods) {
    const bool ok = std::find(kTensorMethods.begin(), kTensorMethods.end(), m) !=
                        kTensorMethods.end() ||
                    (kernel && m == "randsvd");
    if (!ok)
      throw ConfigError("unknown method '" + m + "' for " + c.command + " (key 'method')");
    uses_m2 = uses_m2 || m == "m2";
  }
  for (std::size_t r : c.ranks) {
    if (r + c.oversample > c.n)
      throw ConfigError("rank + oversample = " + std::to_string(r + c.oversample) +
                        " exceeds n = " + std::to_string(c.n) + " (key 'rank')");
  }
  if (uses_m2) {
    const std::size_t stride = ipow(3, c.levels);
    if (c.n % stride != 0)
      throw ConfigError("method m2 needs n divisible by 3^levels = " +
                        std::to_string(stride) + " (key 'levels')");
  }
  if (c.command == "funapprox") {
    const auto names = builtin_function_names();
    if (c.targets.empty()) throw ConfigError("key 'function' needs at least one name");
    for (const auto& t : c.targets)
      if (std::find(names.begin(), names.end(), t) == names.end())
        throw ConfigError("unknown function '" + t + "' (key 'function')");
    if (c.samples == 0) throw ConfigError("key 'samples' must be at least 1");
  } else {
    const auto names = kernel_names();
    if (kernel && c.targets.empty()) throw ConfigError("key 'kernel' needs at least one name");
    for (const auto& t : c.targets)
      if (std::find(names.begin(), names.end(), t) == names.end())
        throw ConfigError("unknown kernel '" + t + "' (key 'kernel')");
    if (!(c.sigma > 0.0)) throw ConfigError("key 'sigma' must be positive");
  }
  if (c.recompress && !kernel) throw ConfigError("key 'recompress' applies to kernel only");
  if (kernel) {
    if (c.points.empty() != c.target_points.empty())
      throw ConfigError("keys 'points' and 'target_points' must be given together");
    if (c.points.empty()) {
      if (c.dims < 1 || c.dims > 3) throw ConfigError("key 'dims' must be 1, 2 or 3");
      if (!(c.side > 0.0)) throw ConfigError("key 'side' must be positive");
      if (!(c.separation >= 0.0)) throw ConfigError("key 'separation' must be non-negative");
      if (c.source_count == 0 || c.target_count == 0)
        throw ConfigError("keys 'source_count' and 'target_count' must be positive");
    }
  }
  if (gp) {
    if (c.sigmas.empty()) throw ConfigError("key 'sigmas' needs one value per dimension");
    for (double s : c.sigmas)
      if (!(s > 0.0)) throw ConfigError("key 'sigmas' values must be positive");
    if (c.points.empty() && c.sigmas.size() != 3)
      throw ConfigError("key 'sigmas' needs 3 values for the synthetic 3D cloud");
    if (c.points.empty() && c.source_count == 0)
      throw ConfigError("key 'source_count' must be positive");
    if (!c.target_points.empty())
      throw ConfigError("key 'target_points' does not apply to gp");
    for (const auto& t : c.targets)
      if (KernelSpec::named(t).singular_at_zero())
        throw ConfigError("kernel '" + t + "' is singular at r = 0 and cannot be used for gp");
  }
}

Settings describe(const RunConfig& c) {
  std::vector<std::string> ranks, sigmas;
  for (std::size_t r : c.ranks) ranks.push_back(std::to_string(r));
  for (double s : c.sigmas) sigmas.push_back(fmt_double(s));
  Settings s = {{"suite", c.suite},
                {"seed", std::to_string(c.seed)},
                {"repeats", std::to_string(c.repeats)},
                {c.command == "funapprox" ? "function" : "kernel", join(c.targets)},
                {"method", join(c.methods)},
                {"n", std::to_string(c.n)},
                {"rank", join(ranks)},
                {"oversample", std::to_string(c.oversample)},
                {"levels", std::to_string(c.levels)},
                {"sample_rule", std::string(sample_rule_name(c.sample_rule))}};
  if (c.command == "funapprox") {
    s.emplace_back("samples", std::to_string(c.samples));
  } else if (c.command == "kernel") {
    s.emplace_back("sigma", fmt_double(c.sigma));
    s.emplace_back("recompress", c.recompress ? "true" : "false");
    s.emplace_back("rsvd_oversample", std::to_string(c.rsvd_oversample));
    if (c.points.empty()) {
      s.emplace_back("side", fmt_double(c.side));
      s.emplace_back("separation", fmt_double(c.separation));
      s.emplace_back("theta", fmt_double(c.theta));
      s.emplace_back("dims", std::to_string(c.dims));
      s.emplace_back("source_count", std::to_string(c.source_count));
      s.emplace_back("target_count", std::to_string(c.target_count));
    } else {
      s.emplace_back("points", c.points);
      s.emplace_back("target_points", c.target_points);
    }
  } else {
    s.emplace_back("sigma", fmt_double(c.sigma));
    s.emplace_back("sigmas", join(sigmas));
    s.emplace_back("reading", c.reading);
    if (c.points.empty())
      s.emplace_back("source_count", std::to_string(c.source_count));
    else
      s.emplace_back("points", c.points);
  }
  return s;
}

std::vector<ResultRow> run_funapprox(const RunConfig& cfg) {
  validate(cfg);
  std::vector<ResultRow> rows;
  for (const auto& name : cfg.targets) {
    const TestFunction tf = builtin_function(name);
    for (const auto& mname : cfg.methods) {
      for (std::size_t rank : cfg.ranks) {
        Cell cell;
        for (std::size_t s = 0; s < cfg.repeats; ++s) {
          const auto t0 = Clock::now();
          CountedFunction f(tf.f, tf.domain.dims());
          InterpolantConfig ic;
          ic.n = cfg.n;
          ic.method = parse_method(mname);
          ic.rank = rank;
          ic.oversample = cfg.oversample;
          ic.subsample_levels = cfg.levels;
          ic.sample_rule = cfg.sample_rule;
          ic.seed = cfg.seed + s;
          const CompressedInterpolant ip = build_interpolant(f, tf.domain, ic);
          const double err = sample_error(tf.f, ip, cfg.samples, cfg.seed + s);
          cell.add(err, f.eval_count(), ip.tucker.rng_draws, seconds_since(t0));
        }
        ResultRow row = base_row(cfg, name, mname, "sampled_max_rel", rank);
        finish(row, cell);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<ResultRow> run_kernel(const RunConfig& cfg) {
  validate(cfg);
  const bool from_csv = !cfg.points.empty();
  Matrix csv_x, csv_y;
  std::optional<BoundingBox> sbox, tbox;
  if (from_csv) {
    csv_x = load_points(cfg.points, "points");
    csv_y = load_points(cfg.target_points, "target_points");
    if (csv_x.cols() != csv_y.cols())
      throw ConfigError("source and target points have different dimensions (key 'target_points')");
    sbox = bounding_box(csv_x);
    tbox = bounding_box(csv_y);
  } else {
    auto [a, b] = experiment_boxes(cfg.side, cfg.separation, cfg.theta, cfg.dims);
    sbox = a;
    tbox = b;
  }
  const std::size_t dims = sbox->dims();
  const double gap = dist(*sbox, *tbox);

  std::vector<KernelSpec> kernels;
  for (const auto& name : cfg.targets) {
    KernelSpec k = KernelSpec::named(name, cfg.sigma);
    if (k.singular_at_zero() && gap == 0.0) {
      std::ostringstream msg;
      msg << "kernel '" << name << "' is singular at r = 0 and the boxes are not "
          << "admissible: diam(source) = " << diam(*sbox)
          << ", diam(target) = " << diam(*tbox) << ", dist = " << gap;
      throw ConfigError(msg.str());
    }
    kernels.push_back(k);
  }

  std::vector<ResultRow> rows;
  const std::size_t grid_size = ipow(cfg.n, dims);
  for (const KernelSpec& k : kernels) {
    std::map<std::pair<std::size_t, std::size_t>, Cell> cells;
    for (std::size_t s = 0; s < cfg.repeats; ++s) {
      const std::uint64_t seed = cfg.seed + s;
      const Matrix x = from_csv ? csv_x : uniform_points_in_box(*sbox, cfg.source_count, seed, 0);
      const Matrix y = from_csv ? csv_y : uniform_points_in_box(*tbox, cfg.target_count, seed, 1);
      const Matrix kd = dense_kernel_matrix(x, y, k);
      for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        const std::string& m = cfg.methods[mi];
        for (std::size_t ri = 0; ri < cfg.ranks.size(); ++ri) {
          const std::size_t ell = cfg.ranks[ri] + cfg.oversample;
          const auto t0 = Clock::now();
          double err = 0.0;
          std::uint64_t evals = 0, draws = 0;
          if (m == "randsvd") {
            const SvdKernel svd = chebyshev_randsvd(x, y, *sbox, *tbox, k, cfg.n, ell,
                                                    cfg.rsvd_oversample, seed);
            err = max_norm_relative_error(kd, svd);
            evals = grid_size * grid_size;
            draws = grid_size * (ell + cfg.rsvd_oversample);
          } else {
            LowRankConfig lc;
            lc.n = cfg.n;
            lc.method = parse_method(m);
            lc.rank = cfg.ranks[ri];
            lc.oversample = cfg.oversample;
            lc.subsample_levels = cfg.levels;
            lc.sample_rule = cfg.sample_rule;
            lc.seed = seed;
            const LowRankKernel lrk = kernel_lowrank(x, y, *sbox, *tbox, k, lc);
            err = cfg.recompress ? max_norm_relative_error(kd, recompress(lrk, ell))
                                 : max_norm_relative_error(kd, lrk);
            evals = lrk.kernel_evals;
            draws = lrk.tucker.rng_draws;
          }
          cells[{mi, ri}].add(err, evals, draws, seconds_since(t0));
        }
      }
    }
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      const std::string& m = cfg.methods[mi];
      const std::string metric =
          cfg.recompress && m != "randsvd" ? "max_rel_recompressed" : "max_rel";
      for (std::size_t ri = 0; ri < cfg.ranks.size(); ++ri) {
        ResultRow row = base_row(cfg, std::string(k.name()), m, metric, cfg.ranks[ri]);
        finish(row, cells[{mi, ri}]);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

BoundingBox gp_domain() {
  return BoundingBox({{-125.0, -66.0}, {24.0, 50.0}, {1.0, 366.0}});
}

std::vector<double> gp_default_sigmas() { return {0.8 * 80.0, 0.8 * 30.0, 0.8 * 365.0}; }

KernelSpec gp_kernel(const RunConfig& cfg) {
  if (!cfg.targets.empty()) {
    KernelSpec k = KernelSpec::named(cfg.targets.front(), cfg.sigma);
    k.scales = cfg.sigmas;
    return k;
  }
  if (cfg.reading == "exponential") {
    KernelSpec k = KernelSpec::named("matern12");
    k.scales = cfg.sigmas;
    return k;
  }
  // exp(-1/2 sum (d_j/s_j)^2) is the unit gaussian at scales s_j * sqrt(2).
  KernelSpec k = KernelSpec::named("gaussian");
  k.scales.clear();
  for (double s : cfg.sigmas) k.scales.push_back(s * std::numbers::sqrt2);
  return k;
}

std::vector<ResultRow> run_gp(
    const RunConfig& cfg,
    const std::function<void(const ResultRow&, const LowRankKernel&)>& inspect) {
  validate(cfg);
  Matrix x;
  std::optional<BoundingBox> box;
  if (!cfg.points.empty()) {
    x = load_points(cfg.points, "points");
    if (static_cast<std::size_t>(x.cols()) != cfg.sigmas.size())
      throw ConfigError("points have " + std::to_string(x.cols()) +
                        " coordinates but key 'sigmas' has " +
                        std::to_string(cfg.sigmas.size()) + " values");
    box = bounding_box(x);
  } else {
    box = gp_domain();
    x = uniform_points_in_box(*box, cfg.source_count, cfg.seed, 0);
  }

  std::vector<KernelSpec> kernels;
  if (cfg.targets.empty()) {
    kernels.push_back(gp_kernel(cfg));
  } else {
    for (const auto& name : cfg.targets) {
      RunConfig one = cfg;
      one.targets = {name};
      kernels.push_back(gp_kernel(one));
    }
  }

  std::vector<ResultRow> rows;
  for (const KernelSpec& k : kernels) {
    const std::string label =
        cfg.targets.empty() ? std::string(k.name()) + "-" + cfg.reading : std::string(k.name());
    for (const auto& m : cfg.methods) {
      for (std::size_t rank : cfg.ranks) {
        Cell cell;
        for (std::size_t s = 0; s < cfg.repeats; ++s) {
          const auto t0 = Clock::now();
          LowRankConfig lc;
          lc.n = cfg.n;
          lc.method = parse_method(m);
          lc.rank = rank;
          lc.oversample = cfg.oversample;
          lc.subsample_levels = cfg.levels;
          lc.sample_rule = cfg.sample_rule;
          lc.seed = cfg.seed + s;
          const LowRankKernel lrk = symmetric_lowrank(x, *box, k, lc);
          const double err = trace_relative_error(x, k, lrk);
          cell.add(err, lrk.kernel_evals, lrk.tucker.rng_draws, seconds_since(t0));
          if (inspect) {
            ResultRow seen = base_row(cfg, label, m, "trace_rel", rank);
            seen.seed = lc.seed;
            seen.error = err;
            inspect(seen, lrk);
          }
        }
        ResultRow row = base_row(cfg, label, m, "trace_rel", rank);
        finish(row, cell);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<ResultRow> run(const RunConfig& cfg) {
  if (cfg.command == "funapprox") return run_funapprox(cfg);
  if (cfg.command == "kernel") return run_kernel(cfg);
  if (cfg.command == "gp") return run_gp(cfg);
  throw ConfigError("unknown command '" + cfg.command + "'");
}

void write_csv(std::ostream& os, const RunConfig& cfg,
               const std::vector<ResultRow>& rows) {
  os << "# tuckercheb " << cfg.command << "\n";
  os << "# rng = " << kRngName << "\n";
  for (const auto& [k, v] : describe(cfg)) os << "# " << k << " = " << v << "\n";
  os << "experiment,target,method,metric,n,rank,oversample,ell,levels,seed,repeats,"
        "error,eval_count,rng_draws";
  if (cfg.timing) os << ",wall_time";
  os << "\n";
  for (const auto& r : rows) {
    os << r.experiment << ',' << r.target << ',' << r.method << ',' << r.metric << ','
       << r.n << ',' << r.rank << ',' << r.oversample << ',' << r.ell() << ','
       << r.levels << ',' << r.seed << ',' << r.repeats << ',' << fmt_error(r.error)
       << ',' << r.eval_count << ',' << r.rng_draws;
    if (cfg.timing) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", r.wall_time);
      os << ',' << buf;
    }
    os << "\n";
  }
}

void write_summary(std::ostream& os, const std::vector<ResultRow>& rows) {
  std::vector<std::string> methods;
  std::vector<std::pair<std::string, std::size_t>> keys;
  std::map<std::pair<std::pair<std::string, std::size_t>, std::string>, double> cell;
  for (const auto& r : rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
      methods.push_back(r.method);
    const std::pair<std::string, std::size_t> key{r.target, r.ell()};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    cell[{key, r.method}] = r.error;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-16s %4s", "target", "ell");
  os << buf;
  for (const auto& m : methods) {
    std::snprintf(buf, sizeof buf, " %12s", m.c_str());
    os << buf;
  }
  os << "\n";
  for (const auto& key : keys) {
    std::snprintf(buf, sizeof buf, "%-16s %4zu", key.first.c_str(), key.second);
    os << buf;
    for (const auto& m : methods) {
      const auto it = cell.find({key, m});
      if (it == cell.end())
        std::snprintf(buf, sizeof buf, " %12s", "-");
      else
        std::snprintf(buf, sizeof buf, " %12.3e", it->second);
      os << buf;
    }
    os << "\n";
  }
}

}  // namespace tuckercheb::experiments
