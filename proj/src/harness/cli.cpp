#include "hwiener/harness/cli.hpp"

#include "hwiener/feynman_kac.hpp"
#include "hwiener/harness/output.hpp"
#include "hwiener/harness/run_config.hpp"
#include "hwiener/harness/validation.hpp"
#include "hwiener/heat_kernel.hpp"
#include "hwiener/measure.hpp"
#include "hwiener/sampler.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

namespace hwiener::harness {

namespace {

using nlohmann::json;

/// Output target: a file when a path is configured, the given stream otherwise.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ConfigError("cannot open output file '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

/// Flags shared by every subcommand.
struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "key = value configuration file");
  app->add_option("--set", c.overrides, "override, KEY=VALUE (repeatable)");
}

/// Loads the config file, then flag shorthands, then --set overrides.
RunConfig resolve(const Common& c, const std::vector<std::pair<std::string, std::string>>& flags) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : RunConfig::load(c.config_path);
  for (const auto& [k, v] : flags) cfg.set(k, v);
  cfg.apply_overrides(c.overrides);
  return cfg;
}

/// Shorthand flag bound to a config key; only set values are forwarded.
struct Flags {
  std::vector<std::pair<std::string, std::string>> values;
  std::vector<std::pair<std::string, std::unique_ptr<std::string>>> slots;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    slots.emplace_back(key, std::make_unique<std::string>());
    app->add_option(flag, *slots.back().second, help + " (key " + key + ")");
  }
  std::vector<std::pair<std::string, std::string>> collected(const CLI::App* app) const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [key, slot] : slots) {
      if (!slot->empty()) out.emplace_back(key, *slot);
    }
    (void)app;
    return out;
  }
};

int as_int(const RunConfig& cfg, const std::string& key, std::int64_t fallback) {
  const auto v = cfg.get_int(key, fallback);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(key + ": out of range");
  }
  return static_cast<int>(v);
}

KernelConfig kernel_config(const RunConfig& cfg) {
  KernelConfig k;
  k.n = as_int(cfg, "n", 1);
  k.rel_tol = cfg.get_double("rel_tol", k.rel_tol);
  k.node_count = as_int(cfg, "node_count", k.node_count);
  k.validate();
  return k;
}

GroupPoint parse_point(const std::vector<double>& v, int n, const std::string& key) {
  if (v.size() != 2 * static_cast<std::size_t>(n) + 1) {
    throw ConfigError(key + ": expected " + std::to_string(2 * n + 1) + " coordinates");
  }
  return GroupPoint::from_coords(v);
}

/// "lo hi, lo hi, ..." with one pair per coordinate.
Box parse_box(const std::string& text, int n, const std::string& key) {
  const auto values = parse_doubles([&] {
    std::string s = text;
    std::replace(s.begin(), s.end(), ',', ' ');
    return s;
  }(), key, ' ');
  const std::size_t d = 2 * static_cast<std::size_t>(n) + 1;
  if (values.size() != 2 * d) throw ConfigError(key + ": expected " + std::to_string(d) + " 'lo hi' pairs");
  Box b(d);
  for (std::size_t i = 0; i < d; ++i) {
    b[i] = {values[2 * i], values[2 * i + 1]};
    if (!(b[i].lo <= b[i].hi)) throw ConfigError(key + ": interval with lo > hi");
  }
  return b;
}

int cmd_kernel(const RunConfig& cfg, std::ostream& out) {
  cfg.require_known({"n", "t", "z", "u", "rel_tol", "node_count", "out"});
  const KernelConfig k = kernel_config(cfg);
  const auto ts = cfg.has("t") ? cfg.get_doubles("t") : std::vector<double>{1.0};
  const auto zs = cfg.has("z") ? cfg.get_doubles("z") : std::vector<double>{0.0};
  const auto us = cfg.has("u") ? cfg.get_doubles("u") : std::vector<double>{0.0};
  std::vector<std::vector<double>> rows;
  for (double t : ts) {
    for (double z : zs) {
      if (!(z >= 0.0)) throw ConfigError("z: |z| values must be non-negative");
      for (double u : us) {
        const auto v = kernel_eval_detailed(k, t, z, u);
        rows.push_back({t, z, u, v.value, v.tail_bound + v.quad_error});
      }
    }
  }
  Sink sink(cfg.get_string("out", ""), out);
  write_csv_header(*sink, {"kernel", cfg}, kernel_columns());
  for (const auto& row : rows) write_csv_row(*sink, row);
  return kExitOk;
}

int cmd_sample(const RunConfig& cfg, std::ostream& out) {
  cfg.require_known({"n", "t", "intervals", "substeps", "paths", "seed", "workers", "lambdas", "out", "summary"});
  const int n = as_int(cfg, "n", 1);
  const double t = cfg.get_double("t", 1.0);
  const int intervals = as_int(cfg, "intervals", 10);
  const int substeps = as_int(cfg, "substeps", 100);
  const std::uint64_t paths = cfg.get_uint("paths", 10);
  const std::uint64_t seed = cfg.get_uint("seed", 1);
  const auto workers = static_cast<unsigned>(cfg.get_uint("workers", 0));
  const auto lambdas = cfg.has("lambdas") ? cfg.get_doubles("lambdas") : std::vector<double>{0.1, 0.25};
  if (n < 1 || intervals < 1 || substeps < 1 || paths < 1) {
    throw ConfigError("sample: n, intervals, substeps and paths must be positive");
  }
  const PathGrid grid = PathGrid::uniform(t, intervals, substeps);
  {
    Sink sink(cfg.get_string("out", ""), out);
    write_csv_header(*sink, {"sample", cfg}, sample_columns(n));
    for (std::uint64_t i = 0; i < paths; ++i) {
      const SamplePath p = sample_path(n, grid, path_stream(seed, i));
      for (std::size_t k = 0; k < p.size(); ++k) {
        std::vector<double> row{static_cast<double>(i), grid.times[k]};
        for (double c : p.at(k)) row.push_back(c);
        write_csv_row(*sink, row);
      }
    }
  }
  if (cfg.has("summary")) {
    Sink sink(cfg.get_string("summary"), out);
    const auto m = endpoint_moments(n, t, intervals * substeps, paths, seed, lambdas, workers);
    write_jsonl(*sink, provenance_record({"sample", cfg}));
    json rec = {{"record", "moments"},   {"t", t},
                {"n_paths", m.n_paths},  {"seed", seed},
                {"E_z_sq", m.z_sq},      {"E_z_sq_stderr", m.z_sq_stderr},
                {"u_mean", m.u_mean},    {"var_u", m.u_var},
                {"var_u_stderr", m.u_var_stderr}, {"lambdas", m.lambdas},
                {"E_cos_lambda_u", m.cos_mean},  {"E_cos_lambda_u_stderr", m.cos_stderr}};
    write_jsonl(*sink, rec);
  }
  return kExitOk;
}

CylinderSet parse_cylinder(const RunConfig& desc) {
  desc.require_known({"n", "times", "box."});
  CylinderSet I;
  I.n = as_int(desc, "n", 1);
  I.times = desc.get_doubles("times");
  for (std::size_t j = 0; j < I.times.size(); ++j) {
    const std::string key = "box." + std::to_string(j + 1);
    I.boxes.push_back(desc.has(key) ? parse_box(desc.get_string(key), I.n, key) : whole_space(I.n));
  }
  for (const auto& [key, value] : desc.entries()) {
    if (key.rfind("box.", 0) == 0) {
      const std::string idx = key.substr(4);
      bool known = false;
      for (std::size_t j = 0; j < I.times.size(); ++j) known = known || idx == std::to_string(j + 1);
      if (!known) throw ConfigError("cylinder: '" + key + "' does not match a time");
    }
  }
  I.validate();
  return I;
}

int cmd_cylinder(const RunConfig& cfg, std::ostream& out) {
  cfg.require_known({"file", "mc_paths", "seed", "substeps", "workers", "tail_mass", "density", "out"});
  const RunConfig desc = RunConfig::load(cfg.get_string("file"));
  const CylinderSet I = parse_cylinder(desc);
  RunConfig echo = cfg;
  for (const auto& [k, v] : desc.entries()) echo.set("cylinder." + k, v);
  Sink sink(cfg.get_string("out", ""), out);
  write_jsonl(*sink, provenance_record({"cylinder", echo}));
  if (I.n == 1 && I.times.size() <= 2) {
    KernelConfig k;
    CylinderQuadOptions q;
    q.tail_mass = cfg.get_double("tail_mass", q.tail_mass);
    q.density = cfg.get_double("density", q.density);
    const auto res = cylinder_measure_quadrature(k, I, q);
    write_jsonl(*sink, {{"record", "cylinder"}, {"method", "quadrature"}, {"value", res.value}, {"error", res.error}});
  }
  const std::uint64_t mc_paths = cfg.get_uint("mc_paths", 0);
  if (mc_paths > 0) {
    CylinderMcOptions mc;
    mc.substeps_per_interval = as_int(cfg, "substeps", mc.substeps_per_interval);
    mc.workers = static_cast<unsigned>(cfg.get_uint("workers", 0));
    const std::uint64_t seed = cfg.get_uint("seed", 1);
    const auto e = cylinder_measure_mc(I, mc_paths, seed, mc);
    write_jsonl(*sink, {{"record", "cylinder"}, {"method", "monte_carlo"}, {"value", e.value},
                        {"stderr", e.stderr_}, {"n_paths", e.n_paths}, {"seed", seed}});
  }
  if (!(I.n == 1 && I.times.size() <= 2) && mc_paths == 0) {
    throw ConfigError("cylinder: quadrature needs n = 1 and at most 2 times; set mc_paths for Monte Carlo");
  }
  return kExitOk;
}

Potential parse_potential(const RunConfig& cfg, int n) {
  const std::string kind = cfg.get_string("V.kind", "constant");
  Potential V;
  if (kind == "constant") {
    V = Potential::constant(cfg.get_double("V.value", 0.0));
  } else if (kind == "quadratic_radial") {
    V = Potential::quadratic_radial(cfg.get_double("V.alpha"), cfg.get_double("V.beta", 0.0));
  } else if (kind == "tabulated") {
    std::vector<int> count;
    for (double c : cfg.get_doubles("V.count")) count.push_back(static_cast<int>(c));
    V = Potential::tabulated(cfg.get_doubles("V.lo"), cfg.get_doubles("V.step"), count, cfg.get_doubles("V.values"));
  } else {
    throw ConfigError("V.kind: expected constant, quadratic_radial or tabulated");
  }
  V.validate(n);
  return V;
}

InitialData parse_initial(const RunConfig& cfg, int n) {
  const std::string kind = cfg.get_string("f.kind", "constant");
  const double amp = cfg.get_double("f.amplitude", 1.0);
  InitialData f;
  if (kind == "constant") {
    f = InitialData::constant(amp);
  } else if (kind == "gaussian_bump") {
    f = InitialData::gaussian_bump(cfg.get_doubles("f.center"), cfg.get_double("f.width"), amp);
  } else if (kind == "indicator_box") {
    f = InitialData::indicator_box(parse_box(cfg.get_string("f.box"), n, "f.box"), amp);
  } else {
    throw ConfigError("f.kind: expected constant, gaussian_bump or indicator_box");
  }
  f.validate(n);
  return f;
}

int cmd_fk(const RunConfig& cfg, std::ostream& out) {
  cfg.require_known({"n", "t", "base", "f.", "V.", "n_paths", "substeps", "seed", "workers", "reference",
                     "density.", "out"});
  const int n = as_int(cfg, "n", 1);
  const double t = cfg.get_double("t");
  const GroupPoint base = cfg.has("base") ? parse_point(cfg.get_doubles("base"), n, "base") : GroupPoint(n);
  const InitialData f = parse_initial(cfg, n);
  const Potential V = parse_potential(cfg, n);
  FKOptions fo;
  fo.n = n;
  fo.substeps = as_int(cfg, "substeps", fo.substeps);
  fo.workers = static_cast<unsigned>(cfg.get_uint("workers", 0));
  const std::uint64_t paths = cfg.get_uint("n_paths", 10'000);
  const std::uint64_t seed = cfg.get_uint("seed", 1);

  Sink sink(cfg.get_string("out", ""), out);
  write_jsonl(*sink, provenance_record({"fk", cfg}));
  const auto e = fk_solve(t, base, f, V, paths, seed, fo);
  write_jsonl(*sink, {{"record", "fk"}, {"value", e.value}, {"stderr", e.stderr_}, {"n_paths", e.n_paths},
                      {"seed", seed}});
  if (cfg.get_bool("reference", false)) {
    if (!V.is_constant()) throw ConfigError("reference: only available for constant potentials");
    KernelConfig k;
    k.n = n;
    const auto ref = heat_reference(t, base, f, k);
    const double factor = std::exp(-V.value * t);
    write_jsonl(*sink, {{"record", "reference"}, {"value", factor * ref.value}, {"error", factor * ref.error}});
  }
  if (cfg.has("density.r_edges") || cfg.has("density.u_edges")) {
    DensityGrid grid{cfg.get_doubles("density.r_edges"), cfg.get_doubles("density.u_edges")};
    DensityOptions dopt;
    static_cast<FKOptions&>(dopt) = fo;
    dopt.reverse_paths = cfg.get_bool("density.reverse", false);
    const auto d = fk_kernel_density(t, V, grid, paths, seed, dopt);
    Sink dsink(cfg.get_string("density.out", ""), out);
    write_csv_header(*dsink, {"fk", cfg}, density_columns());
    for (std::size_t i = 0; i < grid.r_bins(); ++i) {
      for (std::size_t j = 0; j < grid.u_bins(); ++j) {
        const std::size_t b = d.index(i, j);
        write_csv_row(*dsink, {grid.r_edges[i], grid.r_edges[i + 1], grid.u_edges[j], grid.u_edges[j + 1],
                               d.empty[b] ? 1.0 : 0.0, d.mass[b], d.mass_stderr[b], d.density[b],
                               d.density_stderr[b]});
      }
    }
  }
  return kExitOk;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  cfg.require_known({"suite", "criteria", "seed", "workers", "path_scale", "timing", "out"});
  std::vector<int> ids;
  if (cfg.has("criteria")) {
    for (double c : cfg.get_doubles("criteria")) ids.push_back(static_cast<int>(c));
  } else {
    ids = suite_criteria(cfg.get_string("suite", "all"));
  }
  ValidationOptions opt;
  opt.seed = cfg.get_uint("seed", opt.seed);
  opt.workers = static_cast<unsigned>(cfg.get_uint("workers", 0));
  opt.path_scale = cfg.get_double("path_scale", 1.0);
  if (!(opt.path_scale > 0.0)) throw ConfigError("path_scale must be positive");
  const bool timing = cfg.get_bool("timing", true);

  Sink sink(cfg.get_string("out", ""), out);
  write_jsonl(*sink, provenance_record({"validate", cfg}));
  const auto results = run_criteria(ids, opt, [&](const CriterionResult& r) {
    write_jsonl(*sink, criterion_record(r));
    (*sink).flush();
    err << "criterion " << r.id << " (" << r.name << "): " << (r.passed ? "PASS" : "FAIL") << "\n";
  });
  if (timing) {
    for (const auto& r : results) write_jsonl(*sink, timing_record(r));
  }
  const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed; });
  write_jsonl(*sink, {{"record", "summary"},
                      {"criteria", results.size()},
                      {"passed", static_cast<long>(results.size()) - failed},
                      {"failed", failed}});
  return failed == 0 ? kExitOk : kExitAcceptance;
}

void error_record(std::ostream& err, const std::string& kind, const std::string& message, int code) {
  err << json{{"record", "error"}, {"kind", kind}, {"message", message}, {"exit_code", code}}.dump() << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heisenberg-group heat kernel, Wiener measure and Feynman-Kac toolkit", "hwiener"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  Common c_kernel, c_sample, c_cyl, c_fk, c_val;
  Flags f_kernel, f_sample, f_cyl, f_fk, f_val;

  auto* kernel = app.add_subcommand("kernel", "evaluate p_t on a (t, |z|, u) product grid, CSV");
  add_common(kernel, c_kernel);
  f_kernel.add(kernel, "--n", "n", "dimension");
  f_kernel.add(kernel, "--t", "t", "times, comma separated");
  f_kernel.add(kernel, "--z", "z", "|z| values, comma separated");
  f_kernel.add(kernel, "--u", "u", "u values, comma separated");
  f_kernel.add(kernel, "--rel-tol", "rel_tol", "quadrature tolerance");
  f_kernel.add(kernel, "--out", "out", "output file");

  auto* sample = app.add_subcommand("sample", "dump sampled paths as CSV, optional moments JSON line");
  add_common(sample, c_sample);
  f_sample.add(sample, "--n", "n", "dimension");
  f_sample.add(sample, "--t", "t", "horizon");
  f_sample.add(sample, "--intervals", "intervals", "recorded intervals");
  f_sample.add(sample, "--substeps", "substeps", "substeps per interval");
  f_sample.add(sample, "--paths", "paths", "number of paths");
  f_sample.add(sample, "--seed", "seed", "master seed");
  f_sample.add(sample, "--out", "out", "CSV output file");
  f_sample.add(sample, "--summary", "summary", "moments JSON-lines file");

  auto* cyl = app.add_subcommand("cylinder", "Wiener measure of a cylinder set, JSON lines");
  add_common(cyl, c_cyl);
  f_cyl.add(cyl, "--file", "file", "cylinder description file");
  f_cyl.add(cyl, "--mc-paths", "mc_paths", "also estimate by Monte Carlo with this many paths");
  f_cyl.add(cyl, "--seed", "seed", "master seed");
  f_cyl.add(cyl, "--out", "out", "output file");

  auto* fk = app.add_subcommand("fk", "Feynman-Kac estimate, JSON lines and optional density CSV");
  add_common(fk, c_fk);
  f_fk.add(fk, "--paths", "n_paths", "number of paths");
  f_fk.add(fk, "--seed", "seed", "master seed");
  f_fk.add(fk, "--out", "out", "output file");

  auto* val = app.add_subcommand("validate", "run acceptance criteria, JSON-lines report");
  add_common(val, c_val);
  f_val.add(val, "--suite", "suite", "all, kernel, sampler, measure, fk or determinism");
  f_val.add(val, "--criteria", "criteria", "criterion ids, comma separated");
  f_val.add(val, "--seed", "seed", "master seed");
  f_val.add(val, "--workers", "workers", "worker threads (0: hardware)");
  f_val.add(val, "--path-scale", "path_scale", "multiplier on Monte Carlo path counts");
  f_val.add(val, "--out", "out", "report file");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    error_record(err, "usage", e.what(), kExitUsage);
    return kExitUsage;
  }

  try {
    if (kernel->parsed()) return cmd_kernel(resolve(c_kernel, f_kernel.collected(kernel)), out);
    if (sample->parsed()) return cmd_sample(resolve(c_sample, f_sample.collected(sample)), out);
    if (cyl->parsed()) return cmd_cylinder(resolve(c_cyl, f_cyl.collected(cyl)), out);
    if (fk->parsed()) return cmd_fk(resolve(c_fk, f_fk.collected(fk)), out);
    if (val->parsed()) return cmd_validate(resolve(c_val, f_val.collected(val)), out, err);
  } catch (const ConfigError& e) {
    error_record(err, "config", e.what(), kExitConfig);
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    error_record(err, "config", e.what(), kExitConfig);
    return kExitConfig;
  } catch (const NumericalFailure& e) {
    error_record(err, "numerical", e.what(), kExitNumerical);
    return kExitNumerical;
  }
  return kExitUsage;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace hwiener::harness
