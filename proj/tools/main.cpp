#include "commands.hpp"

#include <lagfilt/types.hpp>

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <string>

namespace {

void add_design_options(CLI::App* cmd, lagcli::DesignArgs& a) {
  cmd->add_option("--sigma", a.sigma, "Forgetting factor, sigma < 0")->required();
  cmd->add_option("--q", a.q, "Synthesis offset (samples)");
  cmd->add_option("--B", a.B, "Polynomial degree");
  auto* nc = cmd->add_flag("--noncausal", a.noncausal, "Two-sided, zero-phase variant");
  auto* c = cmd->add_flag("--causal", "Causal variant (default)");
  c->excludes(nc);
  nc->excludes(c);
  cmd->add_option("--role", a.role, "synthesis | analysis | derivative")
      ->check(CLI::IsMember({"synthesis", "analysis", "derivative"}));
  cmd->add_option("--k", a.k, "Analysis coefficient index (role analysis)");
}

void add_run_options(CLI::App* cmd, lagcli::RunArgs& a, bool with_input) {
  cmd->add_option("--config", a.config_path, "INI config file (a manifest is a valid config)");
  cmd->add_option("--out", a.out, "Output directory")->required();
  cmd->add_option("--seed,--scenario.seed", a.scenario.seed, "Scenario RNG seed");
  cmd->add_flag("--pgm", a.pgm, "Export last-frame graymaps");

  cmd->add_option("--scenario.frames", a.scenario.frames);
  cmd->add_option("--scenario.width", a.scenario.width);
  cmd->add_option("--scenario.height", a.scenario.height);
  cmd->add_option("--scenario.clutter", a.scenario.enable_clutter);
  cmd->add_option("--scenario.components", a.scenario.n_components);
  cmd->add_option("--scenario.fmax", a.scenario.f_max);
  cmd->add_option("--scenario.amplitude", a.scenario.clutter_amplitude);
  cmd->add_option("--scenario.dc", a.scenario.dc_offset);
  cmd->add_option("--scenario.vclt_min", a.scenario.v_clt_min);
  cmd->add_option("--scenario.vclt_max", a.scenario.v_clt_max);
  cmd->add_option("--scenario.target", a.scenario.enable_target);
  cmd->add_option("--scenario.imax", a.scenario.i_max);
  cmd->add_option("--scenario.psf_std", a.scenario.psf_std);
  cmd->add_option("--scenario.vtgt_min", a.scenario.v_tgt_min);
  cmd->add_option("--scenario.vtgt_max", a.scenario.v_tgt_max);
  cmd->add_option("--scenario.final_x", a.scenario.final_x);
  cmd->add_option("--scenario.final_y", a.scenario.final_y);
  cmd->add_option("--scenario.sigma_eps", a.scenario.sigma_eps);

  cmd->add_option("--stage1.sigma_x", a.stage1.sigma_x);
  cmd->add_option("--stage1.sigma_y", a.stage1.sigma_y);
  cmd->add_option("--stage1.sigma_z", a.stage1.sigma_z);
  cmd->add_option("--qz,--stage1.qz", a.stage1.q_z, "Stage-1 temporal synthesis offset");
  cmd->add_option("--stage1.B", a.stage1.B);
  cmd->add_option("--stage2.sigma", a.stage2.sigma);
  cmd->add_option("--stage2.B", a.stage2.B);

  cmd->add_flag("--bypass-stage1", a.bypass_stage1, "Feed raw frames straight to stage 2");
  cmd->add_option("--pipeline.bypass", a.bypass_stage1);
  cmd->add_option("--omega,--pipeline.omega", a.omega, "Coefficient subset: subset7 | full")
      ->check(CLI::IsMember({"subset7", "full"}));
  cmd->add_option("--pipeline.normalize", a.normalize);
  cmd->add_option("--threads,--pipeline.threads", a.threads, "Worker threads for spatial passes");
  cmd->add_option("--pipeline.crop", a.crop);
  cmd->add_option("--pipeline.warmup", a.warmup);

  if (with_input)
    cmd->add_option("--input", a.input, "Process an existing frame file instead of generating");
}

std::map<std::string, std::string> read_ini(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw lagfilt::io_error("cannot open config file: " + path);
  const auto trim = [](const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::map<std::string, std::string> kv;
  std::string line, section;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw lagfilt::config_error("malformed config line (expected key=value): " + line);
    kv[(section.empty() ? "" : section + ".") + trim(line.substr(0, eq))] =
        trim(line.substr(eq + 1));
  }
  return kv;
}

double cfg_dbl(const std::string& v, const std::string& key) {
  std::size_t pos = 0;
  double r = 0.0;
  try {
    r = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size()) throw lagfilt::config_error("bad number for " + key + ": " + v);
  return r;
}

long long cfg_int(const std::string& v, const std::string& key) {
  std::size_t pos = 0;
  long long r = 0;
  try {
    r = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size()) throw lagfilt::config_error("bad integer for " + key + ": " + v);
  return r;
}

bool cfg_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw lagfilt::config_error("bad boolean for " + key + ": " + v);
}

// Fills every option the command line left untouched from the config file.
// Keys mirror the manifest layout; unknown keys (and sections that only apply
// to other subcommands) are ignored, so any manifest replays directly.
void apply_config(const CLI::App* cmd, lagcli::RunArgs& a) {
  if (a.config_path.empty()) return;
  const auto kv = read_ini(a.config_path);
  const auto given = [&](const char* name) {
    const CLI::Option* o = cmd->get_option_no_throw(name);
    return o != nullptr && o->count() > 0;
  };
  std::string cur_key;
  const auto want = [&](const char* key, const char* name) -> const std::string* {
    if (cmd->get_option_no_throw(name) == nullptr || given(name)) return nullptr;
    const auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    cur_key = key;
    return &it->second;
  };
  const std::string* v = nullptr;
  const auto num = [&] { return cfg_dbl(*v, cur_key); };

  if ((v = want("manifest.input", "--input"))) a.input = *v;
  if ((v = want("manifest.sweep", "--sweep"))) a.sweep = *v;
  if ((v = want("manifest.sweep_seeds", "--sweep-seeds")))
    a.sweep_seeds = static_cast<int>(cfg_int(*v, "sweep_seeds"));

  if ((v = want("scenario.frames", "--scenario.frames")))
    a.scenario.frames = static_cast<int>(cfg_int(*v, "frames"));
  if ((v = want("scenario.width", "--scenario.width")))
    a.scenario.width = static_cast<int>(cfg_int(*v, "width"));
  if ((v = want("scenario.height", "--scenario.height")))
    a.scenario.height = static_cast<int>(cfg_int(*v, "height"));
  if ((v = want("scenario.clutter", "--scenario.clutter")))
    a.scenario.enable_clutter = cfg_bool(*v, "clutter");
  if ((v = want("scenario.components", "--scenario.components")))
    a.scenario.n_components = static_cast<int>(cfg_int(*v, "components"));
  if ((v = want("scenario.fmax", "--scenario.fmax"))) a.scenario.f_max = num();
  if ((v = want("scenario.amplitude", "--scenario.amplitude")))
    a.scenario.clutter_amplitude = num();
  if ((v = want("scenario.dc", "--scenario.dc"))) a.scenario.dc_offset = num();
  if ((v = want("scenario.vclt_min", "--scenario.vclt_min"))) a.scenario.v_clt_min = num();
  if ((v = want("scenario.vclt_max", "--scenario.vclt_max"))) a.scenario.v_clt_max = num();
  if ((v = want("scenario.target", "--scenario.target")))
    a.scenario.enable_target = cfg_bool(*v, "target");
  if ((v = want("scenario.imax", "--scenario.imax"))) a.scenario.i_max = num();
  if ((v = want("scenario.psf_std", "--scenario.psf_std"))) a.scenario.psf_std = num();
  if ((v = want("scenario.vtgt_min", "--scenario.vtgt_min"))) a.scenario.v_tgt_min = num();
  if ((v = want("scenario.vtgt_max", "--scenario.vtgt_max"))) a.scenario.v_tgt_max = num();
  if ((v = want("scenario.final_x", "--scenario.final_x"))) a.scenario.final_x = num();
  if ((v = want("scenario.final_y", "--scenario.final_y"))) a.scenario.final_y = num();
  if ((v = want("scenario.sigma_eps", "--scenario.sigma_eps"))) a.scenario.sigma_eps = num();
  if ((v = want("scenario.seed", "--seed")))
    a.scenario.seed = static_cast<std::uint64_t>(cfg_int(*v, "seed"));

  if ((v = want("stage1.sigma_x", "--stage1.sigma_x"))) a.stage1.sigma_x = num();
  if ((v = want("stage1.sigma_y", "--stage1.sigma_y"))) a.stage1.sigma_y = num();
  if ((v = want("stage1.sigma_z", "--stage1.sigma_z"))) a.stage1.sigma_z = num();
  if ((v = want("stage1.qz", "--qz"))) a.stage1.q_z = static_cast<int>(cfg_int(*v, "qz"));
  if ((v = want("stage1.B", "--stage1.B"))) a.stage1.B = static_cast<int>(cfg_int(*v, "B"));
  if ((v = want("stage2.sigma", "--stage2.sigma"))) a.stage2.sigma = num();
  if ((v = want("stage2.B", "--stage2.B"))) a.stage2.B = static_cast<int>(cfg_int(*v, "B"));

  if (!given("--bypass-stage1") && !given("--pipeline.bypass")) {
    const auto it = kv.find("pipeline.bypass");
    if (it != kv.end()) a.bypass_stage1 = cfg_bool(it->second, "bypass");
  }
  if ((v = want("pipeline.omega", "--omega"))) a.omega = *v;
  if ((v = want("pipeline.normalize", "--pipeline.normalize")))
    a.normalize = cfg_bool(*v, "normalize");
  if ((v = want("pipeline.threads", "--threads")))
    a.threads = static_cast<int>(cfg_int(*v, "threads"));
  if ((v = want("pipeline.crop", "--pipeline.crop")))
    a.crop = static_cast<int>(cfg_int(*v, "crop"));
  if ((v = want("pipeline.warmup", "--pipeline.warmup")))
    a.warmup = static_cast<int>(cfg_int(*v, "warmup"));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recursive Laguerre smoothing filters and a two-stage point-target enhancement pipeline"};
  app.set_version_flag("--version", lagcli::kVersion);
  app.require_subcommand(1);

  int rc = 0;
  lagcli::DesignArgs dargs;
  lagcli::ResponseArgs rargs;
  lagcli::RunArgs pargs;

  auto* design = app.add_subcommand("design", "Synthesize coefficients and design metrics");
  add_design_options(design, dargs);
  design->add_flag("--qopt", dargs.qopt_only, "Report the VRF-minimizing offset and exit");
  design->add_option("--out", dargs.out, "Directory for design.csv");
  design->callback([&] { rc = lagcli::cmd_design(dargs); });

  auto* response = app.add_subcommand("response", "Emit frequency/impulse response CSVs");
  add_design_options(response, rargs.spec);
  response->add_flag("--hpf", rargs.hpf, "Analyze delay(q) minus the low-pass");
  response->add_option("--fmax", rargs.fmax, "Upper frequency (cycles/sample)");
  response->add_option("--points", rargs.points, "Frequency grid size");
  response->add_option("--samples", rargs.samples, "Impulse response extent");
  response->add_option("--out", rargs.out, "Output directory");
  response->callback([&] { rc = lagcli::cmd_response(rargs); });

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic scenario");
  add_run_options(simulate, pargs, false);
  auto* run = app.add_subcommand("run", "Run the two-stage pipeline on a scenario");
  add_run_options(run, pargs, true);
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  add_run_options(sweep, pargs, false);
  sweep->add_option("--sweep", pargs.sweep, "Sweep list, e.g. qz=0,2,4,6")->required();
  sweep->add_option("--sweep-seeds", pargs.sweep_seeds, "Seeds averaged per sweep point");

  simulate->callback([&] {
    apply_config(simulate, pargs);
    rc = lagcli::cmd_simulate(pargs);
  });
  run->callback([&] {
    apply_config(run, pargs);
    rc = lagcli::cmd_run(pargs);
  });
  sweep->callback([&] {
    apply_config(sweep, pargs);
    rc = lagcli::cmd_sweep(pargs);
  });

  try {
    app.parse(argc, argv);
    return rc;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const lagfilt::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const lagfilt::conditioning_error& e) {
    std::fprintf(stderr, "conditioning error: %s\n", e.what());
    return 2;
  } catch (const lagfilt::numeric_error& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const lagfilt::io_error& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
