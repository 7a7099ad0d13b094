// Profile documents, sample files and their sidecar manifests.

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qathermo/annealer.hpp"
#include "qathermo/error.hpp"

namespace qathermo {

namespace {

using nlohmann::json;

std::map<double, double> read_table(const json& doc, const char* key) {
  std::map<double, double> table;
  for (const auto& row : doc.at(key)) {
    if (!row.is_array() || row.size() != 2) fail(Errc::parse, std::string(key) + " rows must be [tau_us, value]");
    const double tau = row[0].get<double>();
    if (!table.emplace(tau, row[1].get<double>()).second)
      fail(Errc::domain, std::string(key) + " has duplicate tau key");
  }
  return table;
}

json write_table(const std::map<double, double>& table) {
  json rows = json::array();
  for (const auto& [tau, value] : table) rows.push_back({tau, value});
  return rows;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

bool parse_int(std::string_view text, int& out) {
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string where(const std::string& source, std::size_t line) { return source + ":" + std::to_string(line); }

}  // namespace

MachineProfile parse_profile(std::istream& in, const std::string& source_name) {
  MachineProfile p;
  try {
    const json doc = json::parse(in);
    p.name = doc.at("name").get<std::string>();
    p.b1_kelvin = doc.at("b1_kelvin").get<double>();
    p.t_machine_kelvin = doc.at("t_machine_kelvin").get<double>();
    p.alpha_table = read_table(doc, "alpha_table");
    p.tbar_table = read_table(doc, "tbar_table");
    p.notes = doc.value("notes", "");
  } catch (const json::exception& e) {
    fail(Errc::parse, source_name + ": " + e.what());
  }
  p.validate();
  return p;
}

MachineProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open profile " + path);
  return parse_profile(in, path);
}

void write_profile(const MachineProfile& profile, std::ostream& out) {
  json doc;
  doc["name"] = profile.name;
  doc["b1_kelvin"] = profile.b1_kelvin;
  doc["t_machine_kelvin"] = profile.t_machine_kelvin;
  doc["alpha_table"] = write_table(profile.alpha_table);
  doc["tbar_table"] = write_table(profile.tbar_table);
  doc["notes"] = profile.notes;
  out << doc.dump(2) << '\n';
}

SampleSet parse_samples(std::istream& in, const std::string& source_name) {
  std::optional<RingSpec> ring;
  std::vector<int> counts;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) fail(Errc::parse, where(source_name, line_no) + ": expected '<key>,<value>'");
    const std::string_view key = line.substr(0, comma);
    const std::string_view value = trim(line.substr(comma + 1));

    if (!ring) {
      int n = 0;
      if (key != "ring_size" || !parse_int(value, n))
        fail(Errc::parse, where(source_name, line_no) + ": file must start with 'ring_size,<n>'");
      try {
        ring = RingSpec(n);
      } catch (const Error& e) {
        fail(Errc::parse, where(source_name, line_no) + ": " + e.what());
      }
      continue;
    }

    int k = 0;
    if (key == "count") {
      if (!parse_int(value, k)) fail(Errc::parse, where(source_name, line_no) + ": count is not an integer");
    } else if (key == "spins") {
      std::optional<SpinConfig> config;
      try {
        config = SpinConfig::parse(value);
      } catch (const Error& e) {
        if (e.code() == Errc::parse) fail(Errc::parse, where(source_name, line_no) + ": " + e.what());
        fail(Errc::mismatch, where(source_name, line_no) + ": spin string of length " + std::to_string(value.size()) +
                                 " does not match ring size " + std::to_string(ring->size()));
      }
      if (config->ring() != *ring)
        fail(Errc::mismatch, where(source_name, line_no) + ": spin string has " + std::to_string(config->size()) +
                                 " spins, ring size is " + std::to_string(ring->size()));
      k = count_domain_walls(*config);
    } else {
      fail(Errc::parse, where(source_name, line_no) + ": unknown record type '" + std::string(key) + "'");
    }

    if (k % 2 == 0)
      fail(Errc::parity, where(source_name, line_no) + ": record has even wall count " + std::to_string(k) +
                             ", impossible on an odd ring");
    if (k < 1 || k > ring->size())
      fail(Errc::range, where(source_name, line_no) + ": wall count " + std::to_string(k) + " outside [1, " +
                            std::to_string(ring->size()) + "]");
    counts.push_back(k);
  }
  if (!ring) fail(Errc::parse, source_name + ": missing 'ring_size' header");

  SampleMetadata meta;
  meta.source = SampleSource::ingested;
  return SampleSet(*ring, std::move(counts), std::move(meta));
}

SampleSet ingest_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open sample file " + path);
  return parse_samples(in, path);
}

void write_samples(const SampleSet& samples, std::ostream& out) {
  out << "ring_size," << samples.ring().size() << '\n';
  for (int k : samples.counts()) out << "count," << k << '\n';
}

std::string metadata_json(const SampleSet& samples) {
  const SampleMetadata& m = samples.metadata();
  json doc;
  doc["source"] = m.source == SampleSource::synthetic ? "synthetic" : "ingested";
  doc["ring_size"] = samples.ring().size();
  doc["shots"] = samples.shots();
  if (m.seed) doc["seed"] = *m.seed;
  if (m.t_eff) doc["t_eff_model"] = *m.t_eff;
  if (m.j_enc) doc["j_enc"] = *m.j_enc;
  if (m.tau_us) doc["tau_us"] = *m.tau_us;
  if (m.machine) doc["machine"] = *m.machine;
  if (m.perturbation) doc["perturbation"] = *m.perturbation;
  return doc.dump(2);
}

}  // namespace qathermo
