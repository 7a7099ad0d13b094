// qathermo command-line tool. Links only the C API in qathermo.h.

#include <qathermo.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNotFound = 3 };

struct Failure {
  int exit_code;
  std::string message;
};

int exit_for(qt_status s) {
  if (s == QT_ERR_NOT_FOUND) return kNotFound;
  return kData;
}

void check(qt_status s) {
  if (s != QT_OK) throw Failure{exit_for(s), std::string(qt_status_name(s)) + ": " + qt_last_error()};
}

[[noreturn]] void data_error(const std::string& msg) { throw Failure{kData, msg}; }

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string tag(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string flags_text(unsigned flags) {
  size_t needed = 0;
  check(qt_flags_format(flags, nullptr, 0, &needed));
  std::string out(needed, '\0');
  check(qt_flags_format(flags, out.data(), out.size(), &needed));
  out.resize(needed - 1);
  return out;
}

unsigned parse_flags(const std::string& text) {
  unsigned flags = 0;
  check(qt_flags_parse(text.c_str(), &flags));
  return flags;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) data_error("cannot write " + path.string());
  return out;
}

// ---- CSV ------------------------------------------------------------------

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

struct Table {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) data_error(source + ": missing column '" + name + "'");
    return static_cast<size_t>(it - header.begin());
  }
};

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) data_error("cannot open " + path);
  Table t{path, {}, {}};
  std::string line;
  if (!std::getline(in, line)) data_error(path + ": empty table");
  t.header = split_csv_line(line);
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto row = split_csv_line(line);
    if (row.size() != t.header.size())
      data_error(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) +
                 " fields, found " + std::to_string(row.size()));
    t.rows.push_back(std::move(row));
  }
  return t;
}

double parse_double(const std::string& s, const std::string& where) {
  if (s.empty()) return std::nan("");
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    data_error(where + ": '" + s + "' is not a number");
  }
}

// ---- RAII handles ----------------------------------------------------------

struct SamplesDeleter {
  void operator()(qt_samples* s) const { qt_samples_free(s); }
};
struct ProfileDeleter {
  void operator()(qt_profile* p) const { qt_profile_free(p); }
};
struct PlanDeleter {
  void operator()(qt_plan* p) const { qt_plan_free(p); }
};
struct GraphDeleter {
  void operator()(qt_graph* g) const { qt_graph_free(g); }
};
using Samples = std::unique_ptr<qt_samples, SamplesDeleter>;
using Profile = std::unique_ptr<qt_profile, ProfileDeleter>;
using Plan = std::unique_ptr<qt_plan, PlanDeleter>;
using Graph = std::unique_ptr<qt_graph, GraphDeleter>;

Profile load_profile(const std::string& path) {
  qt_profile* p = nullptr;
  check(qt_profile_load(path.c_str(), &p));
  return Profile(p);
}

// ---- Manifests -------------------------------------------------------------

struct Invocation {
  std::vector<std::string> argv;  // without the program name
  CLI::App* command = nullptr;
};

json parameters_of(const CLI::App* command) {
  json params = json::object();
  for (const CLI::Option* opt : command->get_options()) {
    if (opt->get_name() == "--help" || opt->get_name() == "-h") continue;
    std::string key = opt->get_single_name();
    if (opt->count() > 0) {
      const auto& results = opt->results();
      params[key] = results.size() == 1 ? json(results.front()) : json(results);
    } else if (!opt->get_default_str().empty()) {
      params[key] = opt->get_default_str();
    } else {
      params[key] = nullptr;
    }
  }
  return params;
}

void write_manifest(const fs::path& path, const Invocation& inv, json extra) {
  json m;
  m["tool"] = "qathermo";
  m["version"] = qt_version();
  m["command"] = inv.command->get_name();
  m["argv"] = inv.argv;
  m["cwd"] = fs::current_path().string();
  m["parameters"] = parameters_of(inv.command);
  for (auto& [k, v] : extra.items()) m[k] = v;
  m["timestamp"] = utc_timestamp();
  auto out = open_out(path);
  out << m.dump(2) << '\n';
}

// ---- Estimator options ------------------------------------------------------

struct EstimatorFlags {
  qt_estimator_options opts{};
  EstimatorFlags() { qt_estimator_options_default(&opts); }

  void attach(CLI::App* cmd) {
    cmd->add_option("--max-iter", opts.max_iterations, "Iteration cap of the line search")->capture_default_str();
    cmd->add_option("--t-tol", opts.t_tolerance, "Absolute temperature tolerance")->capture_default_str();
    cmd->add_option("--t-min", opts.t_min, "Lower search bound")->capture_default_str();
    cmd->add_option("--t-max", opts.t_max, "Upper search bound")->capture_default_str();
    cmd->add_option("--poor-fit", opts.poor_fit_threshold, "TVD above which poor_fit is set")->capture_default_str();
    cmd->add_option("--high-t-delta", opts.high_t_delta, "Density margin below 1/2 for high_t_saturation")
        ->capture_default_str();
    cmd->add_option("--zero-t-delta", opts.zero_t_delta,
                    "Density margin above 1/n for zero_temperature (negative: derive per size)")
        ->capture_default_str();
    cmd->add_option("--resolution-floor", opts.resolution_floor, "Probability resolution used to derive the zero-T margin")
        ->capture_default_str();
  }
};

json estimate_json(const qt_estimate& e) {
  json r;
  r["t_eff"] = e.is_zero ? json(nullptr) : json(e.t_eff);
  r["epsilon"] = e.epsilon;
  r["iterations"] = e.iterations;
  r["converged"] = e.converged != 0;
  r["flags"] = flags_text(e.flags);
  return r;
}

// ---- sample ----------------------------------------------------------------

struct SampleArgs {
  std::string profile;
  int n_qb = 0;
  double j_enc = 0;
  double tau_us = 0;
  uint64_t shots = 0;
  uint64_t seed = 0;
  std::string perturb = "none";
  std::string out;
  bool allow_extrapolation = false;
};

int run_sample(const SampleArgs& a, const Invocation& inv) {
  auto profile = load_profile(a.profile);
  qt_perturbation pert{};
  check(qt_perturbation_parse(a.perturb.c_str(), &pert));
  const qt_job job{a.n_qb, a.j_enc, a.tau_us, a.shots};
  qt_samples* raw = nullptr;
  check(qt_simulate_job(profile.get(), &job, &pert, a.seed, a.allow_extrapolation, &raw));
  Samples samples(raw);

  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  check(qt_samples_write(samples.get(), a.out.c_str()));

  size_t needed = 0;
  check(qt_samples_metadata(samples.get(), nullptr, 0, &needed));
  std::string meta(needed, '\0');
  check(qt_samples_metadata(samples.get(), meta.data(), meta.size(), &needed));
  meta.resize(needed - 1);

  json extra;
  extra["seed"] = a.seed;
  extra["profile"] = {{"path", a.profile}, {"name", qt_profile_name(profile.get())}};
  extra["inputs"] = json::array({a.profile});
  extra["outputs"] = json::array({a.out});
  extra["job"] = json::parse(meta);
  write_manifest(a.out + ".manifest.json", inv, extra);
  return kOk;
}

// ---- estimate --------------------------------------------------------------

struct EstimateArgs {
  std::string input;
  std::string out;
  EstimatorFlags est;
};

int run_estimate(const EstimateArgs& a, const Invocation& inv) {
  qt_samples* raw = nullptr;
  check(qt_samples_read(a.input.c_str(), &raw));
  Samples samples(raw);
  qt_estimate e{};
  check(qt_estimate_samples(samples.get(), &a.est.opts, &e));

  json r;
  r["source"] = a.input;
  r["n_qb"] = qt_samples_ring_size(samples.get());
  r["shots"] = qt_samples_shots(samples.get());
  const json est = estimate_json(e);
  for (auto& [k, v] : est.items()) r[k] = v;

  if (a.out.empty()) {
    std::cout << r.dump(2) << '\n';
  } else {
    auto out = open_out(a.out);
    out << r.dump(2) << '\n';
    write_manifest(a.out + ".manifest.json", inv,
                   {{"inputs", json::array({a.input})}, {"outputs", json::array({a.out})}});
  }
  return kOk;
}

// ---- sweep -----------------------------------------------------------------

struct SweepArgs {
  std::string profile;
  std::vector<int> n_qb;
  std::vector<double> j_enc;
  std::vector<double> tau_us;
  std::optional<uint64_t> shots;
  uint64_t min_shots = 10000;
  uint64_t max_shots = 100000;
  uint64_t seed = 0;
  std::string perturb = "none";
  std::string out;
  bool allow_extrapolation = false;
  EstimatorFlags est;
};

const char* kSweepHeader =
    "n_qb,j_enc,tau_us,shots,seed,t_model,t_eff,epsilon,iterations,flags,inv_j,machine_ratio,status";

int run_sweep(const SweepArgs& a, const Invocation& inv) {
  auto profile = load_profile(a.profile);
  qt_perturbation pert{};
  check(qt_perturbation_parse(a.perturb.c_str(), &pert));

  std::vector<qt_job> jobs;
  for (double tau : a.tau_us)
    for (double j : a.j_enc)
      for (int n : a.n_qb) jobs.push_back({n, j, tau, 1});

  const uint64_t lo = a.shots ? *a.shots : a.min_shots;
  const uint64_t hi = a.shots ? *a.shots : a.max_shots;
  qt_time_model tm;
  qt_time_model_default(&tm);
  qt_plan* raw_plan = nullptr;
  check(qt_plan_shots(jobs.data(), jobs.size(), lo, hi, &tm, &raw_plan));
  Plan plan(raw_plan);

  const fs::path dir(a.out);
  fs::create_directories(dir / "samples");

  {
    auto out = open_out(dir / "plan.csv");
    out << "submission,job,n_qb,j_enc,tau_us,shots,estimated_seconds\n";
    const size_t count = qt_plan_submission_count(plan.get());
    for (size_t s = 0; s < count; ++s) {
      size_t job = 0;
      uint64_t shots = 0;
      double secs = 0;
      check(qt_plan_submission(plan.get(), s, &job, &shots, &secs));
      out << s << ',' << job << ',' << jobs[job].n_qb << ',' << num(jobs[job].j_enc) << ',' << num(jobs[job].tau_us)
          << ',' << shots << ',' << num(secs) << '\n';
    }
  }

  auto table = open_out(dir / "sweep.csv");
  table << kSweepHeader << '\n';
  size_t failures = 0;
  for (size_t i = 0; i < jobs.size(); ++i) {
    qt_job job = jobs[i];
    double complexity = 0;
    check(qt_plan_job(plan.get(), i, &job.shots, &complexity));
    const uint64_t seed = qt_derive_seed(a.seed, i);

    double j_phys = 0;
    check(qt_physical_coupling(profile.get(), job.j_enc, &j_phys));
    const double ratio = j_phys > 0 ? qt_profile_t_machine_kelvin(profile.get()) / j_phys : std::nan("");
    double t_model = std::nan("");

    qt_estimate e{};
    std::string status = "ok";
    qt_status s = qt_model_teff(profile.get(), job.j_enc, job.tau_us, a.allow_extrapolation, &t_model);
    qt_samples* raw = nullptr;
    if (s == QT_OK) s = qt_simulate_job(profile.get(), &job, &pert, seed, a.allow_extrapolation, &raw);
    Samples samples(raw);
    if (s == QT_OK) {
      const fs::path file =
          dir / "samples" / ("n" + std::to_string(job.n_qb) + "_j" + tag(job.j_enc) + "_tau" + tag(job.tau_us) + ".csv");
      s = qt_samples_write(samples.get(), file.string().c_str());
    }
    if (s == QT_OK) s = qt_estimate_samples(samples.get(), &a.est.opts, &e);
    if (s != QT_OK) {
      status = qt_status_name(s);
      std::cerr << "point n_qb=" << job.n_qb << " j_enc=" << num(job.j_enc) << " tau_us=" << num(job.tau_us)
                << " failed: " << qt_last_error() << '\n';
      ++failures;
    }

    const bool have = s == QT_OK;
    table << job.n_qb << ',' << num(job.j_enc) << ',' << num(job.tau_us) << ',' << job.shots << ',' << seed << ','
          << num(t_model) << ',' << (have && !e.is_zero ? num(e.t_eff) : "") << ',' << (have ? num(e.epsilon) : "")
          << ',' << (have ? std::to_string(e.iterations) : "") << ',' << (have ? flags_text(e.flags) : "") << ','
          << num(1.0 / job.j_enc) << ',' << num(ratio) << ',' << status << '\n';
  }
  table.close();

  json extra;
  extra["seed"] = a.seed;
  extra["profile"] = {{"path", a.profile}, {"name", qt_profile_name(profile.get())}};
  extra["inputs"] = json::array({a.profile});
  extra["outputs"] = json::array({(dir / "sweep.csv").string(), (dir / "plan.csv").string(), (dir / "samples").string()});
  write_manifest(dir / "manifest.json", inv, extra);

  if (failures == jobs.size()) {
    std::cerr << "every sweep point failed\n";
    return kData;
  }
  return kOk;
}

// ---- fit / report shared ----------------------------------------------------

struct SweepRow {
  int n_qb;
  double j_enc;
  double tau_us;
  double t_eff;
  double epsilon;
  unsigned flags;
  double inv_j;
  double machine_ratio;
};

std::vector<SweepRow> read_sweep(const std::string& path) {
  const Table t = read_table(path);
  const size_t c_n = t.column("n_qb"), c_j = t.column("j_enc"), c_tau = t.column("tau_us"), c_t = t.column("t_eff"),
               c_eps = t.column("epsilon"), c_flags = t.column("flags"), c_status = t.column("status");
  const auto it_ratio = std::find(t.header.begin(), t.header.end(), "machine_ratio");
  std::vector<SweepRow> rows;
  for (size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    if (r[c_status] != "ok") continue;
    const std::string where = path + ":" + std::to_string(i + 2);
    SweepRow row{};
    row.n_qb = static_cast<int>(parse_double(r[c_n], where));
    row.j_enc = parse_double(r[c_j], where);
    row.tau_us = parse_double(r[c_tau], where);
    row.t_eff = parse_double(r[c_t], where);
    row.epsilon = parse_double(r[c_eps], where);
    row.flags = parse_flags(r[c_flags]);
    row.inv_j = 1.0 / row.j_enc;
    row.machine_ratio =
        it_ratio == t.header.end() ? std::nan("") : parse_double(r[static_cast<size_t>(it_ratio - t.header.begin())], where);
    rows.push_back(row);
  }
  return rows;
}

double abscissa_of(const SweepRow& r, const std::string& abscissa) {
  if (abscissa == "machine") {
    if (std::isnan(r.machine_ratio)) data_error("sweep table lacks machine_ratio values for abscissa=machine");
    return r.machine_ratio;
  }
  return r.inv_j;
}

std::map<double, std::vector<qt_sweep_point>> group_by_tau(const std::vector<SweepRow>& rows,
                                                           const std::string& abscissa) {
  std::map<double, std::vector<qt_sweep_point>> groups;
  for (const auto& r : rows) {
    qt_sweep_point p{};
    p.x = abscissa_of(r, abscissa);
    p.t_eff = r.t_eff;
    p.epsilon = r.epsilon;
    p.flags = r.flags;
    p.n_qb = r.n_qb;
    p.tau_us = r.tau_us;
    p.weight = 1.0;
    groups[r.tau_us].push_back(p);
  }
  return groups;
}

std::vector<qt_aggregate_point> aggregate(const std::vector<qt_sweep_point>& entries, int min_size) {
  size_t needed = 0;
  check(qt_aggregate_over_sizes(entries.data(), entries.size(), min_size, nullptr, 0, &needed));
  std::vector<qt_aggregate_point> out(needed);
  if (needed) check(qt_aggregate_over_sizes(entries.data(), entries.size(), min_size, out.data(), out.size(), &needed));
  return out;
}

const char* kFitsHeader =
    "tau_us,abscissa,tbar,alpha,stderr_tbar,stderr_alpha,r_squared,points_used,points_excluded,status,message";

// ---- fit -------------------------------------------------------------------

struct FitArgs {
  std::string sweep;
  int min_size = 100;
  std::string abscissa = "inv_j";
  std::string out;
  bool exclude_poor_fit = false;
};

int run_fit(const FitArgs& a, const Invocation& inv) {
  const auto rows = read_sweep(a.sweep);
  const auto groups = group_by_tau(rows, a.abscissa);

  std::ostringstream buf;
  buf << kFitsHeader << '\n';
  qt_fit_options fo;
  qt_fit_options_default(&fo);
  fo.exclude_poor_fit = a.exclude_poor_fit;
  for (const auto& [tau, entries] : groups) {
    buf << num(tau) << ',' << a.abscissa << ',';
    try {
      const auto agg = aggregate(entries, a.min_size);
      std::vector<qt_sweep_point> pts;
      for (const auto& g : agg) pts.push_back({g.x, g.mean_t_eff, g.mean_epsilon, g.flags, 0, tau, 1.0});
      qt_fit_result f{};
      check(qt_fit_scaling(pts.data(), pts.size(), &fo, &f));
      buf << num(f.tbar) << ',' << num(f.alpha) << ',' << num(f.stderr_tbar) << ',' << num(f.stderr_alpha) << ','
          << num(f.r_squared) << ',' << f.points_used << ',' << f.points_excluded << ",ok,\n";
    } catch (const Failure& f) {
      std::cerr << "fit at tau_us=" << num(tau) << " skipped: " << f.message << '\n';
      const auto colon = f.message.find(':');
      buf << ",,,,,,," << csv_field(f.message.substr(0, colon)) << ','
          << csv_field(colon == std::string::npos ? "" : f.message.substr(colon + 2)) << '\n';
    }
  }

  if (a.out.empty()) {
    std::cout << buf.str();
  } else {
    auto out = open_out(a.out);
    out << buf.str();
    write_manifest(a.out + ".manifest.json", inv,
                   {{"inputs", json::array({a.sweep})}, {"outputs", json::array({a.out})}});
  }
  return kOk;
}

// ---- report ----------------------------------------------------------------

struct ReportArgs {
  std::string fits;
  std::string sweep;
  std::string out;
  int min_size = 100;
  std::string abscissa = "inv_j";
};

int run_report(const ReportArgs& a, const Invocation& inv) {
  if (!fs::exists(a.fits)) data_error("fit records not found: " + a.fits);
  if (!fs::exists(a.sweep)) data_error("sweep table not found: " + a.sweep);
  const Table fits = read_table(a.fits);
  const auto rows = read_sweep(a.sweep);
  const fs::path dir(a.out);
  fs::create_directories(dir);

  {
    auto out = open_out(dir / "surface.csv");
    out << "n_qb,j_enc,tau_us,t_eff,epsilon,flags\n";
    auto sorted = rows;
    std::sort(sorted.begin(), sorted.end(), [](const SweepRow& x, const SweepRow& y) {
      return std::tie(x.tau_us, x.j_enc, x.n_qb) < std::tie(y.tau_us, y.j_enc, y.n_qb);
    });
    for (const auto& r : sorted)
      out << r.n_qb << ',' << num(r.j_enc) << ',' << num(r.tau_us) << ',' << num(r.t_eff) << ',' << num(r.epsilon)
          << ',' << flags_text(r.flags) << '\n';
  }

  {
    auto out = open_out(dir / "lines.csv");
    out << "tau_us,abscissa,x,mean_t_eff,t_min,t_max,spread,sizes,flags\n";
    for (const auto& [tau, entries] : group_by_tau(rows, a.abscissa)) {
      std::vector<qt_aggregate_point> agg;
      try {
        agg = aggregate(entries, a.min_size);
      } catch (const Failure& f) {
        std::cerr << "lines at tau_us=" << num(tau) << " skipped: " << f.message << '\n';
        continue;
      }
      for (const auto& g : agg)
        out << num(tau) << ',' << a.abscissa << ',' << num(g.x) << ',' << num(g.mean_t_eff) << ',' << num(g.t_min)
            << ',' << num(g.t_max) << ',' << num(g.spread) << ',' << g.sizes << ',' << flags_text(g.flags) << '\n';
    }
  }

  const size_t c_tau = fits.column("tau_us"), c_abs = fits.column("abscissa"), c_tbar = fits.column("tbar"),
               c_alpha = fits.column("alpha"), c_se_t = fits.column("stderr_tbar"), c_se_a = fits.column("stderr_alpha"),
               c_r2 = fits.column("r_squared"), c_used = fits.column("points_used"), c_status = fits.column("status"),
               c_msg = fits.column("message");
  std::ostringstream summary;
  size_t ok = 0;
  {
    auto out = open_out(dir / "params.csv");
    out << "tau_us,abscissa,tbar,alpha,stderr_tbar,stderr_alpha,r_squared,points_used\n";
    for (const auto& r : fits.rows) {
      if (r[c_status] != "ok") continue;
      ++ok;
      out << r[c_tau] << ',' << r[c_abs] << ',' << r[c_tbar] << ',' << r[c_alpha] << ',' << r[c_se_t] << ','
          << r[c_se_a] << ',' << r[c_r2] << ',' << r[c_used] << '\n';
    }
  }

  std::set<int> sizes;
  std::set<double> couplings, taus;
  size_t zero = 0, high = 0, poor = 0;
  for (const auto& r : rows) {
    sizes.insert(r.n_qb);
    couplings.insert(r.j_enc);
    taus.insert(r.tau_us);
    zero += (r.flags & QT_FLAG_ZERO_TEMPERATURE) != 0;
    high += (r.flags & QT_FLAG_HIGH_T_SATURATION) != 0;
    poor += (r.flags & QT_FLAG_POOR_FIT) != 0;
  }
  summary << "qathermo report\n";
  summary << "sweep: " << rows.size() << " points, " << sizes.size() << " sizes, " << couplings.size()
          << " couplings, " << taus.size() << " anneal times\n";
  summary << "flags: zero_temperature " << zero << ", high_t_saturation " << high << ", poor_fit " << poor << '\n';
  if (ok == 0) {
    summary << "no fits\n";
  } else {
    summary << "fits (" << ok << "):\n";
    for (const auto& r : fits.rows) {
      if (r[c_status] != "ok") continue;
      summary << "  tau_us=" << r[c_tau] << "  tbar=" << r[c_tbar] << " +/- " << r[c_se_t] << "  alpha=" << r[c_alpha]
              << " +/- " << r[c_se_a] << "  r2=" << r[c_r2] << "  (" << r[c_abs] << ", " << r[c_used] << " points)\n";
    }
  }
  for (const auto& r : fits.rows)
    if (r[c_status] != "ok") summary << "  tau_us=" << r[c_tau] << " not fitted: " << r[c_status] << ' ' << r[c_msg] << '\n';

  {
    auto out = open_out(dir / "summary.txt");
    out << summary.str();
  }
  std::cout << summary.str();
  write_manifest(dir / "manifest.json", inv,
                 {{"inputs", json::array({a.fits, a.sweep})},
                  {"outputs", json::array({(dir / "surface.csv").string(), (dir / "lines.csv").string(),
                                           (dir / "params.csv").string(), (dir / "summary.txt").string()})}});
  return kOk;
}

// ---- embed -----------------------------------------------------------------

struct EmbedArgs {
  std::string graph;
  int n_qb = 0;
  double timeout = 10.0;
  uint64_t seed = 0;
  uint64_t max_expansions = 0;
  std::string out;
};

int run_embed(const EmbedArgs& a, const Invocation& inv) {
  qt_graph* raw = nullptr;
  check(qt_graph_load(a.graph.c_str(), &raw));
  Graph graph(raw);
  if (a.n_qb < 0) data_error("ring length must be positive");
  std::vector<int64_t> cycle(static_cast<size_t>(a.n_qb));
  check(qt_find_ring_embedding(graph.get(), a.n_qb, a.timeout, a.seed, a.max_expansions, cycle.data(), cycle.size()));
  int ok = 0;
  char message[256];
  check(qt_verify_embedding(graph.get(), cycle.data(), cycle.size(), a.n_qb, &ok, message, sizeof message));
  if (!ok) data_error(std::string("embedding failed verification: ") + message);

  std::ostringstream buf;
  for (int64_t v : cycle) buf << v << '\n';
  if (a.out.empty()) {
    std::cout << buf.str();
  } else {
    auto out = open_out(a.out);
    out << buf.str();
    write_manifest(a.out + ".manifest.json", inv,
                   {{"seed", a.seed}, {"inputs", json::array({a.graph})}, {"outputs", json::array({a.out})}});
  }
  return kOk;
}

// ---- dispatch --------------------------------------------------------------

int dispatch(const std::vector<std::string>& argv);

int run_rerun(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) data_error("cannot open manifest " + manifest_path);
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    data_error(manifest_path + ": " + e.what());
  }
  if (!m.contains("argv") || !m["argv"].is_array()) data_error(manifest_path + ": missing argv");
  const auto argv = m["argv"].get<std::vector<std::string>>();
  if (!argv.empty() && argv.front() == "rerun") data_error("refusing to rerun a rerun manifest");
  if (m.contains("cwd")) {
    std::error_code ec;
    fs::current_path(m["cwd"].get<std::string>(), ec);
    if (ec) data_error("cannot enter recorded working directory " + m["cwd"].get<std::string>());
  }
  return dispatch(argv);
}

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"Effective-temperature thermometry for annealers sampling odd antiferromagnetic Ising rings", "qathermo"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qt_version()));

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Draw a synthetic sample file from a machine profile");
  sample->add_option("--profile", sa.profile, "Machine profile JSON")->required()->check(CLI::ExistingFile);
  sample->add_option("--n-qb", sa.n_qb, "Odd ring length")->required();
  sample->add_option("--j-enc", sa.j_enc, "Encoded coupling in (0, 1]")->required();
  sample->add_option("--tau-us", sa.tau_us, "Annealing time in microseconds")->required();
  sample->add_option("--shots", sa.shots, "Number of shots")->required();
  sample->add_option("--seed", sa.seed, "Random seed")->capture_default_str();
  sample->add_option("--perturb", sa.perturb, "none | readout_flip:<p> | ground_state_mix:<w>")->capture_default_str();
  sample->add_option("--out", sa.out, "Output sample file")->required();
  sample->add_flag("--allow-extrapolation", sa.allow_extrapolation, "Extrapolate profile tables beyond their range");

  EstimateArgs ea;
  auto* estimate = app.add_subcommand("estimate", "Estimate the effective temperature of a sample file");
  estimate->add_option("input", ea.input, "Sample file")->required();
  estimate->add_option("--out", ea.out, "Write the record here instead of stdout");
  ea.est.attach(estimate);

  SweepArgs wa;
  auto* sweep = app.add_subcommand("sweep", "Sample and estimate over a grid of sizes, couplings and anneal times");
  sweep->add_option("--profile", wa.profile, "Machine profile JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--n-qb", wa.n_qb, "Ring lengths")->required()->delimiter(',');
  sweep->add_option("--j-enc", wa.j_enc, "Encoded couplings")->required()->delimiter(',');
  sweep->add_option("--tau-us", wa.tau_us, "Annealing times in microseconds")->required()->delimiter(',');
  sweep->add_option("--shots", wa.shots, "Fixed shots per point (overrides the planner range)");
  sweep->add_option("--min-shots", wa.min_shots, "Shots for the least complex point")->capture_default_str();
  sweep->add_option("--max-shots", wa.max_shots, "Shots for the most complex point")->capture_default_str();
  sweep->add_option("--seed", wa.seed, "Base random seed")->capture_default_str();
  sweep->add_option("--perturb", wa.perturb, "none | readout_flip:<p> | ground_state_mix:<w>")->capture_default_str();
  sweep->add_option("--out", wa.out, "Output directory")->required();
  sweep->add_flag("--allow-extrapolation", wa.allow_extrapolation, "Extrapolate profile tables beyond their range");
  wa.est.attach(sweep);

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Fit offset and slope per anneal time from a sweep table");
  fit->add_option("sweep", fa.sweep, "sweep.csv produced by the sweep command")->required();
  fit->add_option("--min-size", fa.min_size, "Smallest ring length included in size averages")->capture_default_str();
  fit->add_option("--abscissa", fa.abscissa, "inv_j (1/j_enc) or machine (T_machine/J_phys)")
      ->check(CLI::IsMember({"inv_j", "machine"}))
      ->capture_default_str();
  fit->add_option("--out", fa.out, "Write fit records here instead of stdout");
  fit->add_flag("--exclude-poor-fit", fa.exclude_poor_fit, "Also drop points flagged poor_fit");

  ReportArgs ra;
  auto* report = app.add_subcommand("report", "Write plot-ready tables and a text summary");
  report->add_option("--fits", ra.fits, "Fit records from the fit command")->required();
  report->add_option("--sweep", ra.sweep, "sweep.csv from the sweep command")->required();
  report->add_option("--out", ra.out, "Output directory")->required();
  report->add_option("--min-size", ra.min_size, "Smallest ring length included in size averages")->capture_default_str();
  report->add_option("--abscissa", ra.abscissa, "inv_j or machine")
      ->check(CLI::IsMember({"inv_j", "machine"}))
      ->capture_default_str();

  EmbedArgs ba;
  auto* embed = app.add_subcommand("embed", "Find a chain-free ring of the given length in a hardware graph");
  embed->add_option("--graph", ba.graph, "Edge-list file")->required();
  embed->add_option("--n-qb", ba.n_qb, "Odd ring length")->required();
  embed->add_option("--timeout", ba.timeout, "Seconds before giving up (<= 0 disables)")->capture_default_str();
  embed->add_option("--seed", ba.seed, "Random seed")->capture_default_str();
  embed->add_option("--max-expansions", ba.max_expansions, "Search budget, 0 for unbounded")->capture_default_str();
  embed->add_option("--out", ba.out, "Write node ids here instead of stdout");

  std::string manifest;
  auto* rerun = app.add_subcommand("rerun", "Repeat a run from its manifest");
  rerun->add_option("manifest", manifest, "Manifest JSON")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  const Invocation inv{args, app.get_subcommands().front()};
  if (*sample) return run_sample(sa, inv);
  if (*estimate) return run_estimate(ea, inv);
  if (*sweep) return run_sweep(wa, inv);
  if (*fit) return run_fit(fa, inv);
  if (*report) return run_report(ra, inv);
  if (*embed) return run_embed(ba, inv);
  return run_rerun(manifest);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const Failure& f) {
    std::cerr << "qathermo: " << f.message << '\n';
    return f.exit_code;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "qathermo: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "qathermo: " << e.what() << '\n';
    return kData;
  }
}
