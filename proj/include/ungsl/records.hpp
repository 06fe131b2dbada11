#ifndef UNGSL_RECORDS_HPP
#define UNGSL_RECORDS_HPP

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "ungsl/common.hpp"

namespace ungsl {

/// One persisted run: a stable fingerprint of everything that determines
/// the outcome except the seed, the seed itself, named metrics and
/// timings, and the files the run produced.
struct ExperimentRecord {
  std::uint64_t fingerprint = 0;
  std::uint64_t seed = 0;
  std::map<std::string, double> metrics;
  std::map<std::string, double> timings_seconds;
  std::vector<std::string> artifacts;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["fingerprint"] = fingerprint;
    j["seed"] = seed;
    j["metrics"] = metrics;
    j["timings_seconds"] = timings_seconds;
    j["artifacts"] = artifacts;
    return j;
  }

  static ExperimentRecord from_json(const nlohmann::json& j) {
    ExperimentRecord r;
    r.fingerprint = j.at("fingerprint").get<std::uint64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.metrics = j.at("metrics").get<std::map<std::string, double>>();
    r.timings_seconds =
        j.at("timings_seconds").get<std::map<std::string, double>>();
    r.artifacts = j.at("artifacts").get<std::vector<std::string>>();
    return r;
  }
};

/// Fingerprint of a canonical key=value listing: order-independent input
/// is the caller's job (feed keys sorted). Identical configs always hash
/// identically; the seed is excluded by convention.
class Fingerprint {
 public:
  template <typename T>
  Fingerprint& add(const std::string& key, const T& value) {
    std::ostringstream os;
    os.precision(17);
    os << key << '=' << value << ';';
    text_ += os.str();
    return *this;
  }

  std::uint64_t value() const { return fnv1a(text_); }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

/// Append-only record store, one JSON object per line.
inline void append_record(const ExperimentRecord& rec, const std::string& path) {
  std::ofstream out(path, std::ios::app);
  if (!out) fail("cannot append to " + path);
  out << rec.to_json().dump() << '\n';
}

inline std::vector<ExperimentRecord> load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read " + path);
  std::vector<ExperimentRecord> recs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      recs.push_back(ExperimentRecord::from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      fail(path + ":" + std::to_string(lineno) + ": bad record: " + e.what());
    }
  }
  return recs;
}

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  std::size_t count = 0;
};

inline MetricSummary summarize(const std::vector<double>& xs) {
  MetricSummary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  for (double x : xs) s.stddev += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(s.stddev / static_cast<double>(xs.size()));
  return s;
}

/// Groups records by fingerprint and summarizes each metric over seeds.
inline std::map<std::uint64_t, std::map<std::string, MetricSummary>>
group_records(const std::vector<ExperimentRecord>& recs) {
  std::map<std::uint64_t, std::map<std::string, std::vector<double>>> buckets;
  for (const ExperimentRecord& r : recs)
    for (const auto& [name, value] : r.metrics)
      buckets[r.fingerprint][name].push_back(value);
  std::map<std::uint64_t, std::map<std::string, MetricSummary>> out;
  for (const auto& [fp, metrics] : buckets)
    for (const auto& [name, values] : metrics) out[fp][name] = summarize(values);
  return out;
}

}  // namespace ungsl

#endif  // UNGSL_RECORDS_HPP
