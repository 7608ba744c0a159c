/*
   Copyright 2026 The fbdg Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "harness/csv.hpp"

namespace fs = std::filesystem;
using namespace fbdg::harness;

namespace {

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() / ("fbdg_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  }
  std::string read(const std::string& name) const {
    std::ifstream in(dir / name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
};

int run(const std::string& args, const Sandbox& box) {
  const std::string cmd = std::string(FBDG_CLI_PATH) + " " + args + " > " + (box.dir / "stdout.txt").string() +
                          " 2> " + (box.dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kRates =
    "[drive]\nk0 = 1.25\n[scan]\nvariable = OMEGA\nstart = 300\nstop = 2500\ncount = 12\n"
    "trajectories = linear_x, diagonal, circular\n";

const char* kBdg =
    "[lattice]\nhopping_hz = 50\ninteraction_hz = 600\n[drive]\nk0 = 1.25\n"
    "[scan]\nvariable = OMEGA\nvalues = 1000\nengines = BDG\n"
    "[bdg]\nnx = 6\nnz = 1\nn_cycles = 6\nfit_window_cycles = 3\n";

const char* kTwa =
    "[lattice]\nhopping_hz = 50\ninteraction_hz = 600\ndensity = 20\n"
    "[drive]\ntrajectory = diagonal\nk0 = 1.5\nomega_hz = 1000\nramp_up_periods = 1\nhold_periods = 6\n"
    "[twa]\nnx = 4\nnz = 2\nn_realizations = 4\n";

}  // namespace

TEST_CASE("rates: exit code, units in column names, reproducible") {
  Sandbox box;
  const auto cfg = box.write("rates.cfg", kRates);
  REQUIRE(run("rates --preset paper-11ER --config " + cfg + " --out " + box.dir.string(), box) == 0);
  std::ifstream in(box.dir / "rates.csv");
  const auto table = read_csv(in, "rates.csv");
  CHECK(table.rows.size() == 36);
  for (const auto& h : table.header) {
    if (h.find("omega") != std::string::npos || h.find("j_") == 0 || h.find("g_") == 0) {
      const bool unit = h.size() > 3 && (h.substr(h.size() - 3) == "_hz" || h.substr(h.size() - 6) == "_rad_s");
      CHECK_MESSAGE(unit, h);
    }
  }
  const auto first = box.read("rates.csv");
  REQUIRE(run("rates --preset paper-11ER --config " + cfg + " --workers 3 --out " + box.dir.string(), box) == 0);
  CHECK(box.read("rates.csv") == first);
  CHECK(fs::exists(box.dir / "manifest.txt"));
}

TEST_CASE("configuration errors exit with 2") {
  Sandbox box;
  CHECK(run("rates --config /nonexistent.cfg", box) == 2);
  CHECK(run("rates --preset no-such-preset", box) == 2);
  const auto broken = box.write("broken.cfg", "[drive\nk0 = 1\n");
  CHECK(run("rates --config " + broken, box) == 2);
  const auto conflict = box.write("conflict.cfg", std::string(kRates) + "[drive]\nomega_hz = 2000\n");
  CHECK(run("rates --preset paper-11ER --config " + conflict + " --out " + box.dir.string(), box) == 2);
  CHECK(run("nonsense", box) == 2);
  CHECK(run("rates --workers notanumber", box) == 2);
}

TEST_CASE("numerical failure exits with 3") {
  Sandbox box;
  // Past the first Bessel zero the effective band is inverted for every point.
  const auto cfg = box.write(
      "inv.cfg", "[drive]\nk0 = 2.6\n[scan]\nvariable = OMEGA\nvalues = 2000, 2500\ntrajectories = linear_x\n");
  CHECK(run("rates --preset paper-11ER --config " + cfg + " --out " + box.dir.string(), box) == 3);
}

TEST_CASE("bdg and twa outputs do not depend on the worker count") {
  Sandbox box;
  const auto bdg = box.write("bdg.cfg", kBdg);
  REQUIRE(run("bdg --config " + bdg + " --workers 1 --out " + box.dir.string(), box) == 0);
  const auto serial = box.read("bdg.csv");
  REQUIRE(run("bdg --config " + bdg + " --workers 4 --out " + box.dir.string(), box) == 0);
  CHECK(box.read("bdg.csv") == serial);

  const auto twa = box.write("twa.cfg", kTwa);
  REQUIRE(run("twa --config " + twa + " --seed 9 --workers 1 --out " + box.dir.string(), box) == 0);
  const auto trace = box.read("twa_trace.csv");
  REQUIRE(run("twa --config " + twa + " --seed 9 --workers 3 --out " + box.dir.string(), box) == 0);
  CHECK(box.read("twa_trace.csv") == trace);
  REQUIRE(run("twa --config " + twa + " --seed 10 --workers 3 --out " + box.dir.string(), box) == 0);
  CHECK(box.read("twa_trace.csv") != trace);
}

TEST_CASE("fit reads a trace written by twa") {
  Sandbox box;
  const auto twa = box.write("twa.cfg", kTwa);
  REQUIRE(run("twa --config " + twa + " --seed 2 --out " + box.dir.string(), box) == 0);
  const auto fit_cfg = box.write("fit.cfg", "[fit]\ny_column = condensed_fraction\nmethod = linear\n");
  const auto trace = (box.dir / "twa_trace.csv").string();
  CHECK(run("fit " + trace + " --config " + fit_cfg + " --out " + box.dir.string(), box) == 0);
  std::ifstream in(box.dir / "fit.csv");
  const auto table = read_csv(in, "fit.csv");
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0][table.column("method")] == "linear_fallback");
}

TEST_CASE("fit recovers a synthetic rate and rejects bad input") {
  Sandbox box;
  std::ostringstream csv;
  CsvWriter w(csv, {"t_s", "condensed_fraction"});
  for (int k = 0; k < 20; ++k) w.row({0.001 * k, 0.9 * std::exp(-40.0 * 0.001 * k)});
  const auto good = box.write("good.csv", csv.str());
  REQUIRE(run("fit " + good + " --out " + box.dir.string(), box) == 0);
  std::ifstream in(box.dir / "fit.csv");
  const auto table = read_csv(in, "fit.csv");
  CHECK(table.numbers(table.column("rate_per_s"))[0] == doctest::Approx(40.0).epsilon(1e-9));

  const auto ragged = box.write("ragged.csv", "t_s,condensed_fraction\n0,1\n1\n2,0.8\n");
  CHECK(run("fit " + ragged + " --out " + box.dir.string(), box) == 2);
  CHECK(box.read("stderr.txt").find("line 3") != std::string::npos);

  const auto backwards = box.write("back.csv", "t_s,condensed_fraction\n0,1\n2,0.9\n1,0.8\n3,0.7\n4,0.6\n");
  CHECK(run("fit " + backwards + " --out " + box.dir.string(), box) == 2);
  CHECK(box.read("stderr.txt").find("line 4") != std::string::npos);

  CHECK(run("fit --out " + box.dir.string(), box) == 2);
}
