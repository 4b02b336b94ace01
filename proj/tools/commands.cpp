#include "commands.hpp"

#include <lagfilt/frame_io.hpp>
#include <lagfilt/synth.hpp>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

namespace lagcli {

namespace fs = std::filesystem;
using namespace lagfilt;

namespace {

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

Sidedness sidedness_of(const DesignArgs& a) {
  return a.noncausal ? Sidedness::TwoSided : Sidedness::Causal;
}

struct DesignProduct {
  std::optional<RealizedFilter> filt;
  std::optional<LdeCoeffs> lde;  // derivative role

  const LdeCoeffs& fwd() const { return filt ? filt->fwd : *lde; }
};

DesignProduct make_design(const DesignArgs& a) {
  const double p = sigma_to_p(a.sigma);
  require_pole(p);
  DesignProduct d;
  if (a.role == "synthesis") {
    d.filt = synthesis_filter(p, a.q, sidedness_of(a), a.B);
  } else if (a.role == "analysis") {
    d.filt = analysis_filter(a.k, p, sidedness_of(a), a.B);
  } else if (a.role == "derivative") {
    if (a.noncausal) throw config_error("derivative filters are causal only");
    if (a.B != 2) throw config_error("derivative filters require B = 2");
    d.lde = derivative_filter(p, a.q);
  } else {
    throw config_error("role must be synthesis, analysis or derivative");
  }
  return d;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create directory: " + dir);
}

}  // namespace

int cmd_design(const DesignArgs& a) {
  const double p = sigma_to_p(a.sigma);
  require_pole(p);

  std::vector<std::pair<std::string, std::string>> report;
  report.emplace_back("sigma", fmt(a.sigma));
  report.emplace_back("p", fmt(p));
  report.emplace_back("B", std::to_string(a.B));
  report.emplace_back("sidedness", a.noncausal ? "noncausal" : "causal");

  if (a.qopt_only) {
    report.emplace_back("q_opt", fmt(q_opt(p)));
  } else {
    report.emplace_back("role", a.role);
    if (a.role == "analysis") report.emplace_back("k", std::to_string(a.k));
    else report.emplace_back("q", fmt(a.q));

    const DesignProduct d = make_design(a);
    const LdeCoeffs& fwd = d.fwd();
    for (int i = 0; i < fwd.b.size(); ++i) report.emplace_back("b" + std::to_string(i), fmt(fwd.b(i)));
    for (int i = 0; i < fwd.a.size(); ++i) report.emplace_back("a" + std::to_string(i), fmt(fwd.a(i)));
    if (d.filt && !d.filt->causal()) {
      const char* tag = d.filt->fwd.direction == Direction::FwdBwdShared
                            ? "shared"
                            : d.filt->fwd.direction == Direction::FwdBwdAntisym ? "negated" : "distinct";
      report.emplace_back("bwd_numerator", tag);
      if (d.filt->fwd.direction == Direction::Fwd)
        for (int i = 0; i < d.filt->bwd.b.size(); ++i)
          report.emplace_back("bwd_b" + std::to_string(i), fmt(d.filt->bwd.b(i)));
    }
    const auto poles = pole_locations(fwd);
    for (std::size_t i = 0; i < poles.size(); ++i)
      report.emplace_back("pole_radius" + std::to_string(i), fmt(std::abs(poles[i])));
    if (a.role == "synthesis") {
      const int flat = d.filt->causal() ? flatness_orders(to_tf(fwd)) : flatness_orders(*d.filt);
      const int flat_even =
          d.filt->causal() ? flatness_orders_even(to_tf(fwd)) : flatness_orders_even(*d.filt);
      report.emplace_back("flatness_orders", std::to_string(flat));
      report.emplace_back("flatness_orders_even", std::to_string(flat_even));
      if (!a.noncausal && a.B == 2) {
        report.emplace_back("vrf", fmt(vrf(p, a.q)));
        report.emplace_back("q_opt", fmt(q_opt(p)));
      }
    }
  }

  for (const auto& [key, value] : report) std::printf("%-22s %s\n", key.c_str(), value.c_str());
  if (!a.out.empty()) {
    ensure_dir(a.out);
    const std::string path = a.out + "/design.csv";
    std::ofstream os(path);
    if (!os) throw io_error("cannot open for writing: " + path);
    os << "key,value\n";
    for (const auto& [key, value] : report) os << key << "," << value << "\n";
    std::printf("wrote %s\n", path.c_str());
  }
  return 0;
}

int cmd_response(const ResponseArgs& a) {
  if (a.points < 2) throw config_error("--points must be at least 2");
  if (!(a.fmax > 0.0) || a.fmax > 0.5)
    throw config_error("--fmax must lie in (0, 0.5] cycles/sample");
  if (a.samples < 1) throw config_error("--samples must be positive");
  int hq = -1;
  if (a.hpf) {
    if (a.spec.role != "synthesis")
      throw config_error("hpf conversion applies to synthesis designs");
    hq = static_cast<int>(std::llround(a.spec.q));
    if (static_cast<double>(hq) != a.spec.q || hq < 0)
      throw config_error("hpf conversion requires integer q >= 0");
  }

  const DesignProduct d = make_design(a.spec);
  const bool zero_phase = d.filt && !d.filt->causal();
  auto response = [&](double f) {
    std::complex<double> h =
        d.filt ? (d.filt->causal() ? freq_response(to_tf(d.filt->fwd), f)
                                   : freq_response(*d.filt, f))
               : freq_response(to_tf(*d.lde), f);
    if (a.hpf) h = std::polar(1.0, -2.0 * std::numbers::pi * f * hq) - h;
    return h;
  };

  ensure_dir(a.out);
  std::vector<std::vector<double>> rows;
  rows.reserve(a.points);
  for (int i = 0; i < a.points; ++i) {
    const double f = a.fmax * i / (a.points - 1);
    const std::complex<double> h = response(f);
    rows.push_back({f, magnitude_db(h), zero_phase ? 0.0 : std::arg(h)});
  }
  write_csv(a.out + "/response.csv", {"f", "mag_db", "phase_rad"}, rows);

  rows.clear();
  if (zero_phase) {
    const VectorXd hf = impulse_response(d.filt->fwd, a.samples);
    const VectorXd hb = impulse_response(d.filt->bwd, a.samples);
    for (int m = -(a.samples - 1); m < a.samples; ++m) {
      double h = m > 0 ? hf(m) : m < 0 ? hb(-m) : hf(0) + hb(0);
      if (a.hpf) h = (m == 0 ? 1.0 : 0.0) - h;
      rows.push_back({static_cast<double>(m), h});
    }
  } else {
    const VectorXd hc = impulse_response(d.fwd(), std::max(a.samples, hq + 1));
    for (int m = 0; m < a.samples; ++m) {
      double h = hc(m);
      if (a.hpf) h = (m == hq ? 1.0 : 0.0) - h;
      rows.push_back({static_cast<double>(m), h});
    }
  }
  write_csv(a.out + "/impulse.csv", {"m", "h"}, rows);
  std::printf("wrote %s/response.csv and %s/impulse.csv (%d points, fmax %.4f%s)\n",
              a.out.c_str(), a.out.c_str(), a.points, a.fmax, a.hpf ? ", hpf" : "");
  return 0;
}

namespace {

void write_manifest(const std::string& path, const RunArgs& a) {
  std::ofstream os(path);
  if (!os) throw io_error("cannot open for writing: " + path);
  const auto b = [](bool v) { return v ? "true" : "false"; };
  os << "[manifest]\n";
  os << "command=" << a.command << "\n";
  os << "version=" << kVersion << "\n";
  os << "config=" << (a.config_path.empty() ? "-" : a.config_path) << "\n";
  if (!a.input.empty()) os << "input=" << a.input << "\n";
  if (!a.sweep.empty()) {
    os << "sweep=" << a.sweep << "\n";
    os << "sweep_seeds=" << a.sweep_seeds << "\n";
  }
  os << "\n[scenario]\n";
  os << "frames=" << a.scenario.frames << "\n";
  os << "width=" << a.scenario.width << "\n";
  os << "height=" << a.scenario.height << "\n";
  os << "clutter=" << b(a.scenario.enable_clutter) << "\n";
  os << "components=" << a.scenario.n_components << "\n";
  os << "fmax=" << fmt(a.scenario.f_max) << "\n";
  os << "amplitude=" << fmt(a.scenario.clutter_amplitude) << "\n";
  os << "dc=" << fmt(a.scenario.dc_offset) << "\n";
  os << "vclt_min=" << fmt(a.scenario.v_clt_min) << "\n";
  os << "vclt_max=" << fmt(a.scenario.v_clt_max) << "\n";
  os << "target=" << b(a.scenario.enable_target) << "\n";
  os << "imax=" << fmt(a.scenario.i_max) << "\n";
  os << "psf_std=" << fmt(a.scenario.psf_std) << "\n";
  os << "vtgt_min=" << fmt(a.scenario.v_tgt_min) << "\n";
  os << "vtgt_max=" << fmt(a.scenario.v_tgt_max) << "\n";
  os << "final_x=" << fmt(a.scenario.final_x) << "\n";
  os << "final_y=" << fmt(a.scenario.final_y) << "\n";
  os << "sigma_eps=" << fmt(a.scenario.sigma_eps) << "\n";
  os << "seed=" << a.scenario.seed << "\n";
  os << "\n[stage1]\n";
  os << "sigma_x=" << fmt(a.stage1.sigma_x) << "\n";
  os << "sigma_y=" << fmt(a.stage1.sigma_y) << "\n";
  os << "sigma_z=" << fmt(a.stage1.sigma_z) << "\n";
  os << "qz=" << a.stage1.q_z << "\n";
  os << "B=" << a.stage1.B << "\n";
  os << "\n[stage2]\n";
  os << "sigma=" << fmt(a.stage2.sigma) << "\n";
  os << "B=" << a.stage2.B << "\n";
  os << "\n[pipeline]\n";
  os << "bypass=" << b(a.bypass_stage1) << "\n";
  os << "omega=" << a.omega << "\n";
  os << "normalize=" << b(a.normalize) << "\n";
  os << "threads=" << a.threads << "\n";
  os << "crop=" << a.crop << "\n";
  os << "warmup=" << a.warmup << "\n";
  if (!os) throw io_error("short write: " + path);
}

std::vector<Bin> omega_from_string(const std::string& name, int B) {
  if (name == "full") return omega_full(B);
  if (name == "subset7") {
    // the 7-bin set only exists at B = 2; lower orders keep their full set
    return B >= 2 ? omega_subset7() : omega_full(B);
  }
  throw config_error("omega must be 'subset7' or 'full'");
}

struct RunSummary {
  double mean_snr = std::nan("");
  int snr_frames = 0;
  double vx_avg = 0.0, vy_avg = 0.0;
  double vx_true = std::nan(""), vy_true = std::nan("");
  double fps = 0.0;
  long aligned_frames = 0;
  int crop = 0, warmup = 0;
};

RunSummary run_once(const RunArgs& a, bool write_outputs) {
  std::vector<ArrayXXd> frames;
  std::optional<GroundTruth> truth;
  if (!a.input.empty()) {
    frames = read_frames(a.input);
  } else {
    auto [f, t] = generate(a.scenario);
    frames = std::move(f);
    truth = std::move(t);
  }

  PipelineConfig pc;
  pc.stage1 = a.stage1;
  pc.stage2 = a.stage2;
  pc.omega = omega_from_string(a.omega, a.stage2.B);
  pc.bypass_stage1 = a.bypass_stage1;
  pc.normalize_power = a.normalize;
  pc.nthreads = a.threads;
  pc.crop_margin = a.crop;
  pc.warmup_frames = a.warmup;
  Pipeline pipe(pc, static_cast<int>(frames.front().rows()),
                static_cast<int>(frames.front().cols()));

  std::vector<ArrayXXd> js, ihats, iepss, phats;
  std::vector<std::vector<double>> metrics;
  RunSummary summary;
  summary.crop = pipe.crop_margin();
  summary.warmup = pipe.warmup_frames();
  if (truth) {
    summary.vx_true = truth->vx_tgt;
    summary.vy_true = truth->vy_tgt;
  }

  double snr_sum = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (const ArrayXXd& f : frames) {
    auto r = pipe.push(f);
    if (!r) continue;
    ++summary.aligned_frames;
    if (write_outputs) {
      js.push_back(pc.bypass_stage1 ? f : r->delayed);
      if (!pc.bypass_stage1) {
        ihats.push_back(std::move(r->ihat));
        iepss.push_back(std::move(r->residual));
      }
      phats.push_back(r->phat);
    }
    double snr = std::nan("");
    if (truth && !r->warmup) {
      // P-hat is a power map; the SNR metric is an amplitude ratio, so measure
      // its square root. The same convention is used everywhere a power map is
      // scored, keeping comparisons against matched-filter outputs meaningful.
      if (auto s = measure_snr(r->phat.sqrt(), *truth, r->index, pipe.crop_margin())) {
        snr = *s;
        snr_sum += snr;
        ++summary.snr_frames;
      }
    }
    summary.vx_avg = r->vx_avg;
    summary.vy_avg = r->vy_avg;
    metrics.push_back({static_cast<double>(r->index), static_cast<double>(r->argmax_x),
                       static_cast<double>(r->argmax_y), r->peak, r->vel.vx, r->vel.vy,
                       static_cast<double>(r->vel.reliable_x),
                       static_cast<double>(r->vel.reliable_y), r->vx_avg, r->vy_avg,
                       static_cast<double>(r->warmup), snr});
  }
  const auto t1 = std::chrono::steady_clock::now();
  const double elapsed = std::chrono::duration<double>(t1 - t0).count();
  summary.fps = elapsed > 0.0 ? static_cast<double>(frames.size()) / elapsed : 0.0;
  if (summary.snr_frames > 0) summary.mean_snr = snr_sum / summary.snr_frames;

  if (write_outputs) {
    ensure_dir(a.out);
    write_frames(a.out + "/J.lagf", js);
    if (!iepss.empty()) {
      write_frames(a.out + "/ihat.lagf", ihats);
      write_frames(a.out + "/ieps.lagf", iepss);
    }
    write_frames(a.out + "/phat.lagf", phats);
    write_csv(a.out + "/metrics.csv",
              {"frame", "argmax_x", "argmax_y", "peak", "vx", "vy", "reliable_x", "reliable_y",
               "vx_avg", "vy_avg", "warmup", "snr_db"},
              metrics);
    write_manifest(a.out + "/manifest.ini", a);
    if (a.pgm) {
      write_pgm(a.out + "/J_last.pgm", js.back());
      if (!iepss.empty()) {
        write_pgm(a.out + "/ihat_last.pgm", ihats.back());
        write_pgm(a.out + "/ieps_last.pgm", iepss.back());
      }
      write_pgm(a.out + "/phat_last.pgm", phats.back());
    }
  }
  return summary;
}

}  // namespace

int cmd_simulate(const RunArgs& args) {
  RunArgs a = args;
  a.command = "simulate";
  if (a.out.empty()) throw config_error("--out is required");
  ensure_dir(a.out);
  auto [frames, truth] = generate(a.scenario);
  write_frames(a.out + "/frames.lagf", frames);

  std::vector<std::vector<double>> rows;
  for (std::size_t n = 0; n < truth.centers.size(); ++n)
    rows.push_back({static_cast<double>(n), truth.centers[n][0], truth.centers[n][1],
                    truth.vx_tgt, truth.vy_tgt, truth.vx_clt, truth.vy_clt});
  write_csv(a.out + "/truth.csv", {"frame", "cx", "cy", "vx_tgt", "vy_tgt", "vx_clt", "vy_clt"},
            rows);
  rows.clear();
  for (const ClutterComponent& c : truth.components)
    rows.push_back({c.fx, c.fy, c.phase, c.amplitude});
  write_csv(a.out + "/components.csv", {"fx", "fy", "phase", "amplitude"}, rows);
  write_manifest(a.out + "/manifest.ini", a);
  if (a.pgm) write_pgm(a.out + "/frame_last.pgm", frames.back());

  std::printf("wrote %zu frames (%dx%d) to %s/frames.lagf\n", frames.size(), a.scenario.width,
              a.scenario.height, a.out.c_str());
  std::printf("v_tgt (%.4f, %.4f)  v_clt (%.4f, %.4f)  seed %llu\n", truth.vx_tgt, truth.vy_tgt,
              truth.vx_clt, truth.vy_clt, static_cast<unsigned long long>(a.scenario.seed));
  return 0;
}

int cmd_run(const RunArgs& args) {
  RunArgs a = args;
  a.command = "run";
  if (a.out.empty()) throw config_error("--out is required");
  const RunSummary s = run_once(a, true);
  std::printf("aligned frames %ld  crop %d  warmup %d\n", s.aligned_frames, s.crop, s.warmup);
  if (s.snr_frames > 0)
    std::printf("mean output SNR %.2f dB over %d frames\n", s.mean_snr, s.snr_frames);
  std::printf("v_avg (%.4f, %.4f)", s.vx_avg, s.vy_avg);
  if (!std::isnan(s.vx_true)) std::printf("  truth (%.4f, %.4f)", s.vx_true, s.vy_true);
  std::printf("\nthroughput %.1f fps\n", s.fps);
  std::printf("wrote frame files, metrics.csv and manifest.ini to %s\n", a.out.c_str());
  return 0;
}

int cmd_sweep(const RunArgs& args) {
  RunArgs base = args;
  base.command = "sweep";
  if (base.out.empty()) throw config_error("--out is required");
  if (!base.input.empty())
    throw config_error("sweep regenerates scenarios; --input is not supported");
  if (base.sweep_seeds < 1) throw config_error("--sweep-seeds must be positive");

  const auto eq = base.sweep.find('=');
  if (eq == std::string::npos || base.sweep.substr(0, eq) != "qz")
    throw config_error("--sweep expects qz=v1,v2,...");
  std::vector<int> values;
  std::string rest = base.sweep.substr(eq + 1);
  std::size_t pos = 0;
  while (pos <= rest.size()) {
    const std::size_t comma = rest.find(',', pos);
    const std::string tok = rest.substr(pos, comma == std::string::npos ? comma : comma - pos);
    if (tok.empty()) throw config_error("empty value in --sweep list");
    std::size_t used = 0;
    int v;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::exception&) {
      throw config_error("non-integer value in --sweep list: " + tok);
    }
    if (used != tok.size() || v < 0)
      throw config_error("sweep values must be non-negative integers");
    values.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (values.empty()) throw config_error("empty --sweep list");

  ensure_dir(base.out);
  std::vector<std::vector<double>> table;
  std::printf("%6s %14s %10s %10s %8s\n", "qz", "mean_snr_db", "vx_avg", "vy_avg", "seeds");
  for (int v : values) {
    RunArgs r = base;
    r.command = "run";
    r.stage1.q_z = v;
    double snr_sum = 0.0, vx_sum = 0.0, vy_sum = 0.0;
    int counted = 0;
    for (int i = 0; i < base.sweep_seeds; ++i) {
      r.scenario.seed = base.scenario.seed + static_cast<std::uint64_t>(i);
      r.out = base.out + "/qz_" + std::to_string(v);
      const RunSummary s = run_once(r, i == 0);
      if (!std::isnan(s.mean_snr)) {
        snr_sum += s.mean_snr;
        vx_sum += s.vx_avg;
        vy_sum += s.vy_avg;
        ++counted;
      }
    }
    const double snr = counted ? snr_sum / counted : std::nan("");
    const double vx = counted ? vx_sum / counted : 0.0;
    const double vy = counted ? vy_sum / counted : 0.0;
    std::printf("%6d %14.2f %10.4f %10.4f %8d\n", v, snr, vx, vy, counted);
    table.push_back({static_cast<double>(v), snr, vx, vy, static_cast<double>(counted)});
  }
  write_csv(base.out + "/sweep.csv", {"qz", "mean_snr_db", "vx_avg", "vy_avg", "seeds"}, table);
  write_manifest(base.out + "/manifest.ini", base);
  std::printf("wrote %s/sweep.csv\n", base.out.c_str());
  return 0;
}

}  // namespace lagcli
