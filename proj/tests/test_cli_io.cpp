#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <lagfilt/frame_io.hpp>
#include <lagfilt/types.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

using namespace lagfilt;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int exit_code = -1;
  std::string out;
};

CmdResult run_cmd(const std::string& args) {
  const std::string cmd = std::string(LAGFILT_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult r;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("lagfilt_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("frame container round-trip") {
  TempDir tmp;
  std::mt19937_64 gen(5);
  std::vector<ArrayXXd> frames;
  for (int n = 0; n < 3; ++n) {
    ArrayXXd fr(7, 11);
    for (int y = 0; y < 7; ++y)
      for (int x = 0; x < 11; ++x)
        fr(y, x) = static_cast<double>(static_cast<float>(((gen() >> 11) * 0x1p-53) - 0.5));
    frames.push_back(std::move(fr));
  }
  const std::string path = tmp / "a.lagf";
  write_frames(path, frames);
  const auto back = read_frames(path);
  REQUIRE(back.size() == 3);
  for (int n = 0; n < 3; ++n) CHECK((back[n] == frames[n]).all());

  // Header carries the geometry.
  const std::string bytes = slurp(path);
  REQUIRE(bytes.size() == 20 + 3 * 7 * 11 * 4);
  CHECK(bytes.substr(0, 4) == "LAGF");
  CHECK(static_cast<unsigned char>(bytes[4]) == 1);   // version, little-endian
  CHECK(static_cast<unsigned char>(bytes[8]) == 11);  // width
  CHECK(static_cast<unsigned char>(bytes[12]) == 7);  // height
  CHECK(static_cast<unsigned char>(bytes[16]) == 3);  // count
}

TEST_CASE("frame container rejects malformed input") {
  TempDir tmp;
  const std::string path = tmp / "bad.lagf";

  std::ofstream(path, std::ios::binary) << "NOPE";
  CHECK_THROWS_AS(read_frames(path), io_error);

  write_frames(path, {ArrayXXd::Zero(4, 4)});
  std::string bytes = slurp(path);
  std::ofstream(path, std::ios::binary).write(bytes.data(), bytes.size() - 7);
  CHECK_THROWS_AS(read_frames(path), io_error);

  CHECK_THROWS_AS(read_frames(tmp / "missing.lagf"), io_error);
  CHECK_THROWS_AS(write_frames(tmp / "x.lagf", {}), io_error);
  CHECK_THROWS_AS(write_frames(tmp / "y.lagf", {ArrayXXd::Zero(2, 2), ArrayXXd::Zero(3, 2)}),
                  io_error);
}

TEST_CASE("pgm bytes") {
  TempDir tmp;
  ArrayXXd fr(2, 2);
  fr << 0.0, 1.0, 0.5, 0.25;
  const std::string path = tmp / "f.pgm";
  write_pgm(path, fr);
  const std::string bytes = slurp(path);
  const std::string header = "P5\n2 2\n255\n";
  REQUIRE(bytes.size() == header.size() + 4);
  CHECK(bytes.substr(0, header.size()) == header);
  CHECK(static_cast<unsigned char>(bytes[header.size() + 0]) == 0);
  CHECK(static_cast<unsigned char>(bytes[header.size() + 1]) == 255);
  CHECK(static_cast<unsigned char>(bytes[header.size() + 2]) == 127);
  CHECK(static_cast<unsigned char>(bytes[header.size() + 3]) == 63);
}

TEST_CASE("csv layout") {
  TempDir tmp;
  const std::string path = tmp / "t.csv";
  write_csv(path, {"a", "b"}, {{1.0, 0.5}, {2.0, 1.0 / 3.0}});
  std::ifstream is(path);
  std::string line;
  std::getline(is, line);
  CHECK(line == "a,b");
  std::getline(is, line);
  CHECK(line == "1,0.5");
  std::getline(is, line);
  CHECK(line == "2,0.33333333333333331");

  CHECK_THROWS_AS(write_csv(tmp / "w.csv", {"a", "b"}, {{1.0}}), io_error);
}

TEST_CASE("cli: version, help and argument errors") {
  CHECK(run_cmd("--version").exit_code == 0);
  const CmdResult help = run_cmd("--help");
  CHECK(help.exit_code == 0);
  CHECK(help.out.find("design") != std::string::npos);

  CHECK(run_cmd("").exit_code == 2);
  CHECK(run_cmd("frobnicate").exit_code == 2);
  CHECK(run_cmd("design").exit_code == 2);                       // missing --sigma
  CHECK(run_cmd("design --sigma 0.25 --q 0").exit_code == 2);    // positive sigma
  CHECK(run_cmd("design --sigma -0.25 --q 1 --noncausal").exit_code == 2);  // q with noncausal
  CHECK(run_cmd("response --sigma -0.25 --q 1.5 --hpf").exit_code == 2);    // hpf wants integer q
}

TEST_CASE("cli: design report") {
  const CmdResult r = run_cmd("design --sigma -0.25 --q 4");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("b0") != std::string::npos);
  CHECK(r.out.find("0.092") != std::string::npos);     // leading numerator tap
  CHECK(r.out.find("4.6161569") != std::string::npos); // optimal offset

  const CmdResult qo = run_cmd("design --sigma -0.25 --qopt");
  CHECK(qo.exit_code == 0);
  CHECK(qo.out.find("4.6161569016282") != std::string::npos);

  const CmdResult an = run_cmd("design --sigma -0.5 --noncausal --role analysis --k 1");
  CHECK(an.exit_code == 0);
  CHECK(an.out.find("0.107") != std::string::npos);
  CHECK(an.out.find("negated") != std::string::npos);  // odd-order backward numerator
}

TEST_CASE("cli: response tables") {
  TempDir tmp;
  const CmdResult r = run_cmd("response --sigma -0.25 --q 4 --hpf --points 101 --out " +
                              std::string(tmp.path));
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(tmp.path / "response.csv"));
  CHECK(fs::exists(tmp.path / "impulse.csv"));
  std::ifstream is(tmp.path / "response.csv");
  std::string line;
  std::getline(is, line);
  CHECK(line == "f,mag_db,phase_rad");
  std::getline(is, line);
  CHECK(line.substr(0, 2) == "0,");  // DC row present
}

TEST_CASE("cli: simulate then run from file") {
  TempDir tmp;
  const std::string sim = tmp / "sim";
  const CmdResult s = run_cmd("simulate --seed 5 --scenario.frames 40 --scenario.width 48"
                              " --scenario.height 48 --out " + sim);
  CHECK(s.exit_code == 0);
  REQUIRE(fs::exists(sim + "/frames.lagf"));
  CHECK(fs::exists(sim + "/truth.csv"));
  CHECK(fs::exists(sim + "/components.csv"));
  CHECK(fs::exists(sim + "/manifest.ini"));
  const auto frames = read_frames(sim + "/frames.lagf");
  CHECK(frames.size() == 40);
  CHECK(frames[0].cols() == 48);

  const std::string out = tmp / "run";
  const CmdResult r = run_cmd("run --input " + sim + "/frames.lagf --out " + out);
  CHECK(r.exit_code == 0);
  for (const char* f : {"J.lagf", "ihat.lagf", "ieps.lagf", "phat.lagf", "metrics.csv",
                        "manifest.ini"})
    CHECK(fs::exists(out + "/" + f));
  // 40 inputs, 4 frames swallowed by the temporal offset.
  CHECK(read_frames(out + "/phat.lagf").size() == 36);
}

TEST_CASE("cli: identical runs across thread counts") {
  TempDir tmp;
  const std::string base = "run --seed 11 --scenario.frames 40 --scenario.width 48"
                           " --scenario.height 48 ";
  const std::string o1 = tmp / "t1", o4 = tmp / "t4";
  CHECK(run_cmd(base + "--threads 1 --out " + o1).exit_code == 0);
  CHECK(run_cmd(base + "--threads 4 --out " + o4).exit_code == 0);
  for (const char* f : {"J.lagf", "ihat.lagf", "ieps.lagf", "phat.lagf", "metrics.csv"})
    CHECK(slurp(o1 + "/" + f) == slurp(o4 + "/" + f));
}

TEST_CASE("cli: manifest replays the run") {
  TempDir tmp;
  const std::string o1 = tmp / "a", o2 = tmp / "b";
  CHECK(run_cmd("run --seed 3 --scenario.frames 36 --scenario.width 48 --scenario.height 48"
                " --stage1.qz 2 --omega full --pipeline.normalize true --out " + o1).exit_code == 0);
  CHECK(run_cmd("run --config " + o1 + "/manifest.ini --out " + o2).exit_code == 0);
  for (const char* f : {"J.lagf", "phat.lagf", "metrics.csv"})
    CHECK(slurp(o1 + "/" + f) == slurp(o2 + "/" + f));
}

TEST_CASE("cli: sweep emits one row per offset") {
  TempDir tmp;
  const std::string out = tmp / "sw";
  const CmdResult r = run_cmd("sweep --sweep qz=0,2 --seed 2 --scenario.frames 36"
                              " --scenario.width 48 --scenario.height 48 --out " + out);
  CHECK(r.exit_code == 0);
  REQUIRE(fs::exists(out + "/sweep.csv"));
  std::ifstream is(out + "/sweep.csv");
  std::string line;
  std::getline(is, line);
  CHECK(line.find("qz") == 0);
  int rows = 0;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2);
  CHECK(fs::exists(out + "/qz_0/phat.lagf"));
  CHECK(fs::exists(out + "/qz_2/phat.lagf"));
}

TEST_CASE("cli: io and numeric failures map to distinct exit codes") {
  TempDir tmp;
  CHECK(run_cmd("run --input " + (tmp / "absent.lagf") + " --out " + (tmp / "o")).exit_code == 4);

  // A non-finite sample in the input stream trips the numeric guard.
  std::vector<ArrayXXd> bad(30, ArrayXXd::Zero(48, 48));
  bad[5](10, 10) = std::numeric_limits<double>::quiet_NaN();
  write_frames(tmp / "nan.lagf", bad);
  CHECK(run_cmd("run --input " + (tmp / "nan.lagf") + " --out " + (tmp / "o2")).exit_code == 3);

  // Interior swallowed by the crop margin: configuration error.
  CHECK(run_cmd("run --seed 1 --scenario.width 20 --scenario.height 20 --out " +
                (tmp / "o3")).exit_code == 2);
}
