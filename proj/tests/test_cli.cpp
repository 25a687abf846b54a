#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "dbosim/csv.hpp"

namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

CmdResult run(const std::string& args) {
  const std::string cmd = std::string(DBOSIM_BIN) + " " + args + " 2>&1";
  std::array<char, 4096> buf{};
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) out += buf.data();
  const int status = pclose(pipe);
  return {WEXITSTATUS(status), out};
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("dbosim_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

long count_lines(const std::string& text) {
  long n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("vopt prints the closed-form bias with six decimals") {
  CHECK(run("vopt --tmr0 1.0 --vh 0.3").output == "0.424264\n");
  CHECK(run("vopt --tmr0 0 --vh 0.25").output == "0.250000\n");
  CHECK(run("vopt --tmr0 0.7 --vh 0.22").output == "0.286845\n");
}

TEST_CASE("vopt rejects non-physical inputs with a nonzero exit") {
  CHECK(run("vopt --tmr0 -1 --vh 0.3").exit_code != 0);
  CHECK(run("vopt --tmr0 1.0 --vh 0").exit_code != 0);
  CHECK(run("vopt --tmr0 1.0").exit_code != 0);  // missing required flag
}

TEST_CASE("sweep writes the CSV schema and echoes the effective config") {
  const fs::path out = fresh_dir("sweep");
  const CmdResult r = run("sweep --out " + out.string() + " --points 101");
  CHECK(r.exit_code == 0);
  REQUIRE(fs::exists(out / "sweep.csv"));
  REQUIRE(fs::exists(out / "effective_config.json"));
  const std::string csv = dbosim::read_file(out / "sweep.csv");
  CHECK(csv.rfind("v_volts,margin_a\n", 0) == 0);
  CHECK(count_lines(csv) == 102);  // header + 101 points
  CHECK(r.output.find("v_opt_closed_form=0.4242640687") != std::string::npos);
}

TEST_CASE("transient reports the hand-traced convergence cycle") {
  const fs::path out = fresh_dir("transient");
  const CmdResult r = run("transient --out " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("convergence_cycle=18") != std::string::npos);
  const std::string csv = dbosim::read_file(out / "trace.csv");
  CHECK(csv.rfind("cycle,time_s,temp_c,v_ref,v_m,v_s,flip,coarse,pump_cmd,v_opt,margin_a\n",
                  0) == 0);
  CHECK(count_lines(csv) == 101);  // header + 100 cycles
}

TEST_CASE("reruns with the same seed produce byte-identical outputs") {
  const fs::path out1 = fresh_dir("rerun1");
  const fs::path out2 = fresh_dir("rerun2");
  const std::string flags = " --seed 7 --quiet";
  CHECK(run("transient --out " + out1.string() + flags).exit_code == 0);
  CHECK(run("transient --out " + out2.string() + flags).exit_code == 0);
  CHECK(dbosim::read_file(out1 / "trace.csv") == dbosim::read_file(out2 / "trace.csv"));
}

TEST_CASE("rerunning from the echoed config reproduces the outputs") {
  const fs::path out1 = fresh_dir("echo1");
  const fs::path out2 = fresh_dir("echo2");
  CHECK(run("transient --out " + out1.string() + " --seed 3 --quiet").exit_code == 0);
  CHECK(run("transient --config " + (out1 / "effective_config.json").string() +
            " --out " + out2.string() + " --quiet")
            .exit_code == 0);
  CHECK(dbosim::read_file(out1 / "trace.csv") == dbosim::read_file(out2 / "trace.csv"));
}

TEST_CASE("plots are a pure view: CSVs do not change when enabled") {
  const fs::path out1 = fresh_dir("plot1");
  const fs::path out2 = fresh_dir("plot2");
  CHECK(run("transient --out " + out1.string() + " --quiet").exit_code == 0);
  CHECK(run("transient --out " + out2.string() + " --quiet --plot").exit_code == 0);
  CHECK(dbosim::read_file(out1 / "trace.csv") == dbosim::read_file(out2 / "trace.csv"));
  CHECK(fs::exists(out2 / "trace_vref.svg"));
  CHECK_FALSE(fs::exists(out1 / "trace_vref.svg"));
}

TEST_CASE("config files drive the scenario and bad ones fail loudly") {
  const fs::path dir = fresh_dir("cfg");
  const fs::path good = dir / "good.json";
  const fs::path bad = dir / "bad.json";
  {
    std::ofstream(good) << R"({"dbo": {"fine_step_volts": 0.008},
                               "schedule": {"total_duration_s": 4e-05}})";
    std::ofstream(bad) << R"({"dbo": {"fine_stepp": 0.008}})";
  }
  const CmdResult ok =
      run("transient --config " + good.string() + " --out " + (dir / "o").string());
  CHECK(ok.exit_code == 0);
  CHECK(ok.output.find("cycles=200") != std::string::npos);

  const CmdResult err =
      run("transient --config " + bad.string() + " --out " + (dir / "e").string());
  CHECK(err.exit_code != 0);
  CHECK(err.output.find("config.dbo.fine_stepp") != std::string::npos);

  const CmdResult missing = run("transient --config /nonexistent.json");
  CHECK(missing.exit_code != 0);
}

TEST_CASE("drift compares tracked and fixed-bias margins") {
  const fs::path out = fresh_dir("drift");
  const CmdResult r = run("drift --out " + out.string());
  CHECK(r.exit_code == 0);
  REQUIRE(fs::exists(out / "margin_compare.csv"));
  const std::string csv = dbosim::read_file(out / "margin_compare.csv");
  CHECK(csv.rfind("cycle,time_s,temp_c,v_ref_dbo,margin_dbo_a,v_fixed,margin_fixed_a\n",
                  0) == 0);
  CHECK(r.output.find("margin_improvement_pct=") != std::string::npos);
}

TEST_CASE("accuracy emits one row per grid point") {
  const fs::path out = fresh_dir("accuracy");
  const fs::path cfg = out / "cfg.json";
  std::ofstream(cfg) << R"({"accuracy": {"tmr0_points": 3, "vh_points": 3,
                            "duration_s": 1e-04}})";
  const CmdResult r =
      run("accuracy --config " + cfg.string() + " --out " + out.string());
  CHECK(r.exit_code == 0);
  const std::string csv = dbosim::read_file(out / "accuracy.csv");
  CHECK(csv.rfind("tmr0,vh,accuracy\n", 0) == 0);
  CHECK(count_lines(csv) == 10);  // header + 9 grid points
  CHECK(r.output.find("min_accuracy=") != std::string::npos);
}

TEST_CASE("ber emits two modes per sigma and temperature") {
  const fs::path out = fresh_dir("ber");
  const fs::path cfg = out / "cfg.json";
  std::ofstream(cfg) << R"({"variation": {"n_cells": 2000, "dbo_settle_cycles": 128},
                            "ber": {"sigma_grid": [0.02, 0.05], "temps_c": [25.0]}})";
  const CmdResult r = run("ber --config " + cfg.string() + " --out " + out.string());
  CHECK(r.exit_code == 0);
  const std::string csv = dbosim::read_file(out / "ber.csv");
  CHECK(csv.rfind("mode,v_read,temp_c,sigma_mu_tmr0,sigma_mu_vh,ber,stderr,n_cells\n",
                  0) == 0);
  CHECK(count_lines(csv) == 5);  // header + 2 sigmas x 2 modes
  CHECK(csv.find("DBO,") != std::string::npos);
  CHECK(csv.find("FIXED,") != std::string::npos);
}
