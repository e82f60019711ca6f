// Copyright 2026 The qfeedback Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "qfb/atom_squash/atom_squash.hpp"
#include "qfb/cli/commands.hpp"
#include "qfb/cli/config.hpp"
#include "qfb/cli/csv.hpp"
#include "qfb/common/parallel.hpp"
#include "qfb/errors.hpp"
#include "qfb/loop_spectra/spectra.hpp"

namespace fs = std::filesystem;
using namespace qfb::cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("qfb_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  std::string l;
  while (std::getline(in, l)) v.push_back(l);
  return v;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  std::string c;
  while (std::getline(in, c, ',')) v.push_back(c);
  return v;
}

}  // namespace

TEST_CASE("numbers round-trip through the CSV format") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int k = 0; k < 10000; ++k) {
    const double x = std::ldexp(u(gen), static_cast<int>(k % 200) - 100);
    CHECK(std::strtod(format_number(x).c_str(), nullptr) == x);
  }
  CsvTable t({"name", "value"});
  t.comment("two\nlines");
  t.add_row(std::vector<Cell>{"a,b", 1.5});
  t.add_row(std::vector<Cell>{"say \"hi\"", 2.0});
  std::ostringstream os;
  t.write(os);
  CHECK(os.str() == "# two\n# lines\nname,value\n\"a,b\",1.5\n\"say \"\"hi\"\"\",2\n");
  CHECK_THROWS(t.add_row(std::vector<double>{1.0}));
}

TEST_CASE("INI parsing") {
  std::istringstream in("# comment\nseed = 3\n\n[spectra]\n ; other comment\neta2 = 0.5\nwmax=7\n");
  const auto f = parse_ini(in, "x.ini");
  REQUIRE(f.sections.at("").size() == 1);
  CHECK(f.sections.at("spectra")[1].key == "wmax");
  CHECK(f.sections.at("spectra")[1].value == "7");
  CHECK(f.sections.at("spectra")[1].line == 7);
  for (const char* bad : {"[spectra\n", "novalue\n", " = 3\n", "[]\n", "a = 1\na = 2\n"}) {
    std::istringstream b(std::string("# ok\n") + bad);
    const bool duplicate = std::string(bad).find("a = 2") != std::string::npos;
    try {
      parse_ini(b, "bad.ini");
      FAIL("expected ParseError for " << bad);
    } catch (const qfb::ParseError& e) {
      CHECK(std::string(e.what()).find(duplicate ? "bad.ini:3" : "bad.ini:2") != std::string::npos);
    }
  }
  CHECK_THROWS_AS(load_ini("/nonexistent/qfb.ini"), qfb::ValidationError);
}

TEST_CASE("run config merges defaults, file and flags") {
  const std::vector<ParamSpec> specs{{"eta2", ParamType::Real, "1", ""}, {"n", ParamType::Integer, "4", ""},
                                     {"fast", ParamType::Boolean, "false", ""}};
  RunConfig c("spectra", specs);
  std::istringstream in("[spectra]\neta2 = 0.5\nn = 9\n[atom]\neta = 0.3\n");
  c.apply_file(parse_ini(in, "c.ini"), {"spectra", "atom"});
  c.apply_flag("eta2", "0.7");
  CHECK(c.real("eta2") == 0.7);
  CHECK(c.integer("n") == 9);
  CHECK_FALSE(c.boolean("fast"));
  CHECK(c.values()[0].source == Source::Flag);
  CHECK(*c.values()[0].overridden == "0.5");
  CHECK(c.values()[1].source == Source::File);
  CHECK(c.echo().find("# eta2: flag (overrides file value 0.5)\neta2 = 0.7") != std::string::npos);
  CHECK_THROWS_AS(c.apply_flag("n", "x"), qfb::ValidationError);
  CHECK_THROWS_AS(c.apply_flag("n", "1.5"), qfb::ValidationError);

  RunConfig d("spectra", specs);
  std::istringstream bad("eta_2 = 1\nbogus_key = 2\n[nowhere]\n");
  try {
    d.apply_file(parse_ini(bad, "d.ini"), {"spectra"});
    FAIL("expected UnknownKey");
  } catch (const qfb::UnknownKey& e) {
    const std::string m = e.what();
    CHECK(m.find("eta_2 (d.ini:1)") != std::string::npos);
    CHECK(m.find("bogus_key (d.ini:2)") != std::string::npos);
    CHECK(m.find("[nowhere]") != std::string::npos);
  }
  RunConfig e("spectra", specs);
  std::istringstream underscore("[spectra]\neta2 = 0.25\n");
  e.apply_file(parse_ini(underscore, "e.ini"), {"spectra"});
  CHECK(e.real("eta2") == 0.25);
}

TEST_CASE("spectra subcommand") {
  const auto r = cli({"spectra", "--g", "-4", "--gamma", "0.1", "--T", "0", "--eta1", "1", "--eta2", "1", "--wmax",
                      "5", "--n", "512", "--stdout"});
  REQUIRE(r.code == 0);
  const auto ls = lines(r.out);
  CHECK(ls[0] == "# qfb " + std::string(version()));
  CHECK(ls[1] == "# subcommand: spectra");
  CHECK(r.out.find("# config: g = -4 (flag)") != std::string::npos);
  CHECK(r.out.find("# config: beta = 1 (default)") != std::string::npos);
  CHECK(r.out.find("# seed: none") != std::string::npos);
  std::size_t h = 0;
  while (ls[h][0] == '#') ++h;
  CHECK(ls[h] == "omega,s2x,s3x,s2y,s3y");
  CHECK(ls.size() - h - 1 == 512);
  const qfb::loop::LoopFilter f(-4.0, qfb::loop::SinglePole{0.1}, 0.0);
  const qfb::loop::FeedbackBeamline b;
  for (std::size_t k = h + 1; k < ls.size(); k += 37) {
    const auto cells = split(ls[k]);
    const double w = std::strtod(cells[0].c_str(), nullptr);
    CHECK(std::strtod(cells[1].c_str(), nullptr) == qfb::loop::s2x_at(f, b, w));
    CHECK(std::strtod(cells[2].c_str(), nullptr) == qfb::loop::s3x_at(f, b, w));
  }
}

TEST_CASE("atom rates table at the optimal gain") {
  const auto r = cli({"atom", "--eta", "0.8", "--eps", "0.95", "--lambda-opt", "--stdout"});
  REQUIRE(r.code == 0);
  bool found = false;
  for (const auto& l : lines(r.out)) {
    const auto c = split(l);
    if (c.size() == 2 && c[0] == "gamma_x") {
      found = true;
      CHECK(std::abs(std::strtod(c[1].c_str(), nullptr) - 0.12) < 1e-12);
    }
  }
  CHECK(found);
  const auto cmp = cli({"atom", "--lambda-opt", "--output", "compare", "--n", "5", "--stdout"});
  CHECK(cmp.code == 0);
  CHECK(cmp.out.find("omega,p_in_loop,p_free") != std::string::npos);
}

TEST_CASE("exit codes") {
  const auto bad = cli({"spectra", "--eta2", "1.5", "--stdout"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("eta2") != std::string::npos);
  CHECK(bad.err.find("[0, 1]") != std::string::npos);
  CHECK(cli({"spectra", "--n", "abc", "--stdout"}).code == 2);
  CHECK(cli({"spectra", "--no-such-flag", "1"}).code == 2);
  CHECK(cli({"nonsense"}).code == 2);
  CHECK(cli({}).code == 2);
  CHECK(cli({"--help"}).code == 0);
  // Loop with a right-half-plane pole.
  const auto unstable = cli({"spectra", "--g", "2", "--stdout"});
  CHECK(unstable.code == 3);
  CHECK(unstable.err.find("unstable") != std::string::npos);
  CHECK(cli({"trajectory", "--preset", "nope", "--stdout"}).code == 2);
  CHECK(cli({"intracavity", "--theta", "1", "--stdout"}).code == 2);
  CHECK(cli({"intracavity", "--theta", "0.5", "--lambda-min", "-2", "--stdout"}).code == 3);
}

TEST_CASE("config files, provenance echo and the output directory") {
  const auto dir = scratch("config");
  {
    std::ofstream(dir / "c.ini") << "# run file\n[spectra]\neta2 = 0.5\nn = 8\n";
    std::ofstream(dir / "empty.ini") << "";
    std::ofstream(dir / "unknown.ini") << "[spectra]\netta2 = 0.5\n";
    std::ofstream(dir / "broken.ini") << "[spectra]\n\neta2 0.5\n";
  }
  const auto r = cli({"spectra", "--config", (dir / "c.ini").string(), "--eta2", "0.7", "--out-dir", dir.string()});
  REQUIRE(r.code == 0);
  const auto csv = slurp(dir / "spectra.csv");
  CHECK(csv.find("# config: eta2 = 0.7 (flag)") != std::string::npos);
  CHECK(csv.find("# config: n = 8 (file)") != std::string::npos);
  const auto echo = slurp(dir / "spectra.config.ini");
  CHECK(echo.find("# eta2: flag (overrides file value 0.5)") != std::string::npos);
  // The echo is itself a valid config file reproducing the run.
  const auto again = cli({"spectra", "--config", (dir / "spectra.config.ini").string(), "--out-dir", dir.string(),
                          "--name", "again"});
  REQUIRE(again.code == 0);
  const auto csv2 = slurp(dir / "again.csv");
  CHECK(csv2.substr(csv2.find("omega,")) == csv.substr(csv.find("omega,")));

  const auto full = cli({"spectra", "--config", (dir / "empty.ini").string(), "--g", "-2", "--gamma", "3", "--T",
                         "0.1", "--eta1", "0.9", "--eta2", "0.6", "--n", "4", "--stdout"});
  CHECK(full.code == 0);
  CHECK(full.out.find("# config: eta2 = 0.6 (flag)") != std::string::npos);

  const auto unknown = cli({"spectra", "--config", (dir / "unknown.ini").string(), "--stdout"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("etta2") != std::string::npos);
  const auto broken = cli({"spectra", "--config", (dir / "broken.ini").string(), "--stdout"});
  CHECK(broken.code == 2);
  CHECK(broken.err.find("broken.ini:3") != std::string::npos);

  const auto env_dir = dir / "from_env";
  ::setenv(kOutputDirEnv, env_dir.string().c_str(), 1);
  const auto e = cli({"qnd", "--n", "3"});
  ::unsetenv(kOutputDirEnv);
  CHECK(e.code == 0);
  CHECK(fs::exists(env_dir / "qnd.csv"));
  fs::remove_all(dir);
}

TEST_CASE("trajectory runs are byte-identical across reruns and thread counts") {
  const auto dir = scratch("traj");
  const std::vector<std::string> base{"trajectory", "--preset", "damped-cavity", "--n-traj", "200", "--t", "1",
                                      "--seed", "7", "--out-dir", dir.string()};
  auto with_name = [&](const std::string& n) {
    auto a = base;
    a.push_back("--name");
    a.push_back(n);
    return a;
  };
  const int saved = qfb::max_threads();
  REQUIRE(cli(with_name("a")).code == 0);
  REQUIRE(cli(with_name("b")).code == 0);
  qfb::set_threads(3);
  REQUIRE(cli(with_name("c")).code == 0);
  qfb::set_threads(saved);
  const auto a = slurp(dir / "a.csv");
  CHECK(a == slurp(dir / "b.csv"));
  CHECK(a == slurp(dir / "c.csv"));
  CHECK(a.find("# seed: 7") != std::string::npos);
  CHECK(a.find("t,n_mean,n_se") != std::string::npos);
  auto other = with_name("d");
  other[8] = "8";
  REQUIRE(cli(other).code == 0);
  CHECK(a != slurp(dir / "d.csv"));
  for (const char* preset : {"atom", "linear-cavity"}) {
    const auto r = cli({"trajectory", "--preset", preset, "--n-traj", "4", "--t", "0.2", "--lambda", "0.3",
                        "--eta", "0.7", "--stdout"});
    CHECK(r.code == 0);
  }
  CHECK(cli({"trajectory", "--detection", "homodyne-jump", "--beta", "3", "--n-traj", "4", "--t", "0.2", "--stdout"})
            .code == 0);
  fs::remove_all(dir);
}

TEST_CASE("remaining subcommands produce tables") {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"stability", "--g-n", "2", "--T-n", "2", "--time-domain", "--duration", "5", "--stdout"},
           {"semiclassical", "--duration", "50", "--segments", "8", "--stdout"},
           {"qnd", "--g", "-2", "--n", "5", "--stdout"},
           {"intracavity", "--sweep", "eta", "--n", "5", "--stdout"},
           {"intracavity", "--sweep", "riccati", "--mode", "qnd", "--n", "5", "--stdout"},
           {"intracavity", "--delay", "0.1", "--n", "5", "--stdout"},
           {"atom", "--output", "spectrum", "--lambda", "-0.3", "--n", "5", "--stdout"}}) {
    const auto r = cli(args);
    CHECK_MESSAGE(r.code == 0, args[0] << ": " << r.err);
    CHECK(r.out.rfind("# qfb ", 0) == 0);
  }
  const auto s = cli({"semiclassical", "--duration", "50", "--segments", "8", "--seed", "5", "--stdout"});
  CHECK(s.out.find("# seed: 5") != std::string::npos);
}
