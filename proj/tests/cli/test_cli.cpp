#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = QATHERMO_CLI_PATH;
const std::string kData = QATHERMO_DATA_DIR;
const std::string kProfile = kData + "/profiles/Advantage_system4.1.json";

struct Run {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(QATHERMO_TMP_DIR) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Run cli(const std::string& args, const fs::path& cwd = fs::path(QATHERMO_TMP_DIR)) {
  const fs::path out = cwd / ".stdout";
  const fs::path err = cwd / ".stderr";
  const std::string cmd =
      "cd '" + cwd.string() + "' && '" + kCli + "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int raw = std::system(cmd.c_str());
  Run r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

using Row = std::map<std::string, std::string>;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

std::vector<Row> read_table(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  const auto header = split_csv_line(line);
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    Row row;
    for (std::size_t i = 0; i < header.size() && i < cells.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(row);
  }
  return rows;
}

int count_records(const fs::path& p, const std::string& prefix) {
  std::ifstream in(p);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) n += line.rfind(prefix, 0) == 0;
  return n;
}

}  // namespace

TEST_CASE("sample writes the requested number of records") {
  const auto dir = scratch("sample");
  const auto r = cli("sample --profile " + kProfile + " --n-qb 101 --j-enc 0.5 --tau-us 100 --shots 10 --seed 3 --out s.csv",
                     dir);
  REQUIRE(r.exit_code == 0);
  CHECK(count_records(dir / "s.csv", "count,") == 10);
  CHECK(fs::exists(dir / "s.csv.manifest.json"));
  const auto manifest = nlohmann::json::parse(slurp(dir / "s.csv.manifest.json"));
  CHECK(manifest.at("command") == "sample");

  REQUIRE(cli("sample --profile " + kProfile + " --n-qb 101 --j-enc 0.5 --tau-us 100 --shots 10 --seed 3 --out t.csv", dir)
              .exit_code == 0);
  CHECK(slurp(dir / "s.csv") == slurp(dir / "t.csv"));
}

TEST_CASE("sample rejects annealing times outside the profile") {
  const auto dir = scratch("sample_range");
  const auto r =
      cli("sample --profile " + kProfile + " --n-qb 101 --j-enc 0.5 --tau-us 50000 --shots 10 --out s.csv", dir);
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("extrapolation") != std::string::npos);
  CHECK(cli("sample --profile " + kProfile + " --n-qb 101 --j-enc 0.5 --tau-us 50000 --shots 10 --out s.csv "
            "--allow-extrapolation",
            dir)
            .exit_code == 0);
  CHECK(cli("sample --profile " + kProfile + " --n-qb 101 --tau-us 10 --shots 10 --out s.csv", dir).exit_code == 1);
}

TEST_CASE("estimate round trip") {
  const auto dir = scratch("estimate");
  REQUIRE(cli("sample --profile " + kProfile + " --n-qb 301 --j-enc 0.8 --tau-us 100 --shots 100000 --seed 1 --out s.csv",
              dir)
              .exit_code == 0);
  const auto r = cli("estimate s.csv", dir);
  REQUIRE(r.exit_code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  const double model = 0.34 + 1.85 * 0.015 / (0.407 * 0.8 / 2.0);
  CHECK(std::fabs(doc.at("t_eff").get<double>() - model) <= 0.03);
  CHECK(doc.at("shots") == 100000);
  CHECK(doc.at("n_qb") == 301);
  CHECK(doc.at("epsilon").get<double>() <= 0.02);
}

TEST_CASE("estimate reports frozen ensembles with a null temperature") {
  const auto dir = scratch("estimate_zero");
  {
    std::ofstream f(dir / "z.csv");
    f << "ring_size,101\n";
    for (int i = 0; i < 100; ++i) f << "count,1\n";
  }
  const auto r = cli("estimate z.csv", dir);
  REQUIRE(r.exit_code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc.at("t_eff").is_null());
  CHECK(doc.at("flags").dump().find("zero_temperature") != std::string::npos);
}

TEST_CASE("estimate rejects corrupted files") {
  const auto dir = scratch("estimate_bad");
  {
    std::ofstream f(dir / "bad.csv");
    f << "ring_size,101\ncount,1\ncount,2\n";
  }
  const auto r = cli("estimate bad.csv", dir);
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("bad.csv:3") != std::string::npos);
  CHECK(cli("estimate missing.csv", dir).exit_code != 0);
}

TEST_CASE("sweep, fit and report") {
  const auto dir = scratch("sweep");
  const std::string sweep = "sweep --profile " + kProfile +
                            " --n-qb 101,301 --j-enc 0.25,0.5,0.75,1.0 --tau-us 10,1000 --shots 50000 --seed 11";
  REQUIRE(cli(sweep + " --out a", dir).exit_code == 0);
  const auto rows = read_table(dir / "a/sweep.csv");
  CHECK(rows.size() == 16);
  CHECK(fs::exists(dir / "a/plan.csv"));
  CHECK(fs::exists(dir / "a/samples/n101_j0.5_tau10.csv"));

  REQUIRE(cli(sweep + " --out b", dir).exit_code == 0);
  CHECK(slurp(dir / "a/sweep.csv") == slurp(dir / "b/sweep.csv"));

  const auto inv = cli("fit a/sweep.csv --out fits_inv.csv", dir);
  REQUIRE(inv.exit_code == 0);
  const auto mach = cli("fit a/sweep.csv --abscissa machine --out fits_machine.csv", dir);
  REQUIRE(mach.exit_code == 0);
  const auto fi = read_table(dir / "fits_inv.csv");
  const auto fm = read_table(dir / "fits_machine.csv");
  REQUIRE(fi.size() == 2);
  REQUIRE(fm.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(fi[i].at("status") == "ok");
    const double a_inv = std::stod(fi[i].at("alpha"));
    const double a_mach = std::stod(fm[i].at("alpha"));
    CHECK(a_mach == doctest::Approx(a_inv * 0.407 / (2.0 * 0.015)).epsilon(1e-9));
    CHECK(std::stod(fm[i].at("tbar")) == doctest::Approx(std::stod(fi[i].at("tbar"))).epsilon(1e-9));
  }
  CHECK(std::fabs(std::stod(fm[0].at("alpha")) - 2.10) < 0.15);
  CHECK(std::fabs(std::stod(fm[1].at("alpha")) - 1.65) < 0.15);

  const auto rep = cli("report --fits fits_inv.csv --sweep a/sweep.csv --out rep", dir);
  REQUIRE(rep.exit_code == 0);
  for (const char* f : {"surface.csv", "lines.csv", "params.csv", "summary.txt"}) CHECK(fs::exists(dir / "rep" / f));
  const auto lines = read_table(dir / "rep/lines.csv");
  CHECK(lines.size() == 8);
  for (const auto& line : lines) {
    const double lo = std::stod(line.at("t_min"));
    const double hi = std::stod(line.at("t_max"));
    CHECK(std::stod(line.at("spread")) == doctest::Approx(hi - lo).epsilon(1e-9));
  }
}

TEST_CASE("single annealing time gives a single fit record") {
  const auto dir = scratch("fit_single");
  REQUIRE(cli("sweep --profile " + kProfile +
                  " --n-qb 101 --j-enc 0.3,0.6,0.9 --tau-us 100 --shots 20000 --seed 2 --out s",
              dir)
              .exit_code == 0);
  const auto r = cli("fit s/sweep.csv", dir);
  REQUIRE(r.exit_code == 0);
  std::istringstream in(r.out);
  std::string line;
  int records = 0;
  while (std::getline(in, line)) records += !line.empty();
  CHECK(records == 2);  // header plus one record
}

TEST_CASE("report with no usable fits") {
  const auto dir = scratch("report_empty");
  {
    std::ofstream f(dir / "fits.csv");
    f << "tau_us,abscissa,tbar,alpha,stderr_tbar,stderr_alpha,r_squared,points_used,points_excluded,status,message\n";
    std::ofstream s(dir / "sweep.csv");
    s << "n_qb,j_enc,tau_us,shots,seed,t_model,t_eff,epsilon,iterations,flags,inv_j,machine_ratio,status\n";
  }
  const auto r = cli("report --fits fits.csv --sweep sweep.csv --out rep", dir);
  REQUIRE(r.exit_code == 0);
  CHECK(slurp(dir / "rep/summary.txt").find("no fits") != std::string::npos);
}

TEST_CASE("frozen sweep corners are recorded as zero temperature") {
  const auto dir = scratch("sweep_frozen");
  const std::string profile = kData + "/profiles/Advantage2_System1.1.json";
  REQUIRE(cli("sweep --profile " + profile + " --n-qb 11 --j-enc 1.0 --tau-us 2000 --shots 10000 --seed 4 --out s", dir)
              .exit_code == 0);
  const auto rows = read_table(dir / "s/sweep.csv");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].at("t_eff").empty());
  CHECK(rows[0].at("flags").find("zero_temperature") != std::string::npos);
}

TEST_CASE("rerun reproduces outputs") {
  const auto dir = scratch("rerun");
  REQUIRE(cli("sweep --profile " + kProfile + " --n-qb 101 --j-enc 0.5,1.0 --tau-us 10 --seed 9 --out s", dir)
              .exit_code == 0);
  const std::string first = slurp(dir / "s/sweep.csv");
  const std::string first_sample = slurp(dir / "s/samples/n101_j1_tau10.csv");
  fs::copy_file(dir / "s/manifest.json", dir / "m.json");
  fs::remove_all(dir / "s");
  REQUIRE(cli("rerun '" + (dir / "m.json").string() + "'", fs::path(QATHERMO_TMP_DIR)).exit_code == 0);
  CHECK(slurp(dir / "s/sweep.csv") == first);
  CHECK(slurp(dir / "s/samples/n101_j1_tau10.csv") == first_sample);
}

TEST_CASE("embed exit codes") {
  const auto dir = scratch("embed");
  const auto ok = cli("embed --graph " + kData + "/graphs/zephyr_m4_t4.edges --n-qb 101 --seed 1", dir);
  REQUIRE(ok.exit_code == 0);
  std::istringstream in(ok.out);
  std::string line;
  int ids = 0;
  while (std::getline(in, line)) ids += !line.empty();
  CHECK(ids == 101);

  CHECK(cli("embed --graph " + kData + "/graphs/chimera_c4.edges --n-qb 11", dir).exit_code == 2);
  {
    std::ofstream f(dir / "ring.edges");
    for (int i = 0; i < 9; ++i) f << i << ' ' << (i + 1) % 9 << '\n';
  }
  CHECK(cli("embed --graph ring.edges --n-qb 7 --timeout 0 --max-expansions 100000", dir).exit_code == 3);
  CHECK(cli("embed --graph ring.edges --n-qb 8", dir).exit_code == 2);
  CHECK(cli("embed --n-qb 9", dir).exit_code == 1);
}
