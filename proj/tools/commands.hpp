#pragma once

#include <lagfilt/pipeline.hpp>
#include <lagfilt/scenario.hpp>

#include <string>

namespace lagcli {

inline constexpr const char* kVersion = "1.0.0";

struct DesignArgs {
  double sigma = -0.5;
  double q = 0.0;
  int B = 2;
  bool noncausal = false;
  std::string role = "synthesis";  // synthesis | analysis | derivative
  int k = 0;
  bool qopt_only = false;
  std::string out;  // optional directory for design.csv
};

struct ResponseArgs {
  DesignArgs spec;
  bool hpf = false;   // analyze delay(q) minus the low-pass instead
  double fmax = 0.5;  // cycles/sample
  int points = 501;
  int samples = 64;   // impulse-response extent
  std::string out = ".";
};

struct RunArgs {
  lagfilt::ScenarioConfig scenario;
  lagfilt::StageOneConfig stage1;
  lagfilt::StageTwoConfig stage2;
  std::string omega = "subset7";  // subset7 | full
  bool bypass_stage1 = false;
  bool normalize = false;
  int threads = 1;
  int crop = -1;
  int warmup = -1;
  std::string out;
  std::string input;  // optional frame file consumed instead of generating
  bool pgm = false;
  std::string config_path;
  std::string command = "run";
  std::string sweep;  // e.g. "qz=0,2,4,6"
  int sweep_seeds = 1;
};

int cmd_design(const DesignArgs& args);
int cmd_response(const ResponseArgs& args);
int cmd_simulate(const RunArgs& args);
int cmd_run(const RunArgs& args);
int cmd_sweep(const RunArgs& args);

}  // namespace lagcli
