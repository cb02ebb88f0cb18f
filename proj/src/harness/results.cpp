#include "deconlab/errors.hpp"
#include "deconlab/harness.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace deconlab::harness {

using nlohmann::json;

namespace {

const std::vector<std::string> kColumns = {
    "scenario", "n",      "m",                "replicate",    "estimator", "kind",  "family", "k",    "estimand",
    "point",    "se",     "truth",            "bias",         "status",    "condition_number", "independence",
    "overlap",  "note"};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::vector<std::string>> parse_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string cur;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(cur);
      cur.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !cur.empty()) {
        rec.push_back(cur);
        records.push_back(rec);
      }
      rec.clear();
      cur.clear();
      any = false;
    } else {
      cur += c;
      any = true;
    }
  }
  if (quoted) throw ConfigError("results csv: unterminated quoted field");
  if (any || !cur.empty()) {
    rec.push_back(cur);
    records.push_back(rec);
  }
  return records;
}

double to_double(const std::string& s, std::size_t line, const char* col) {
  if (s.empty()) return std::nan("");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw ConfigError("results csv line " + std::to_string(line) + ": column " + col + " is not a number");
  }
  return v;
}

std::size_t to_size(const std::string& s, std::size_t line, const char* col) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("results csv line " + std::to_string(line) + ": column " + col + " is not a count");
  }
}

json num_json(double v) {
  if (std::isfinite(v)) return v;
  return num(v);
}

}  // namespace

std::string to_csv(const ResultsTable& table) {
  std::string out;
  for (std::size_t i = 0; i < kColumns.size(); ++i) out += (i ? "," : "") + kColumns[i];
  out += "\n";
  for (const auto& r : table.rows) {
    const std::vector<std::string> cells = {
        r.scenario, std::to_string(r.n), std::to_string(r.m), std::to_string(r.replicate), r.estimator, r.kind,
        r.family, std::to_string(r.k), r.estimand, num(r.point), num(r.se), num(r.truth), num(r.bias), r.status,
        num(r.condition_number), r.independence, r.overlap, r.note};
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + field(cells[i]);
    out += "\n";
  }
  return out;
}

json to_json(const ResultsTable& table) {
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"scenario", r.scenario},
                    {"n", r.n},
                    {"m", r.m},
                    {"replicate", r.replicate},
                    {"estimator", r.estimator},
                    {"kind", r.kind},
                    {"family", r.family},
                    {"k", r.k},
                    {"estimand", r.estimand},
                    {"point", num_json(r.point)},
                    {"se", num_json(r.se)},
                    {"truth", num_json(r.truth)},
                    {"bias", num_json(r.bias)},
                    {"status", r.status},
                    {"condition_number", num_json(r.condition_number)},
                    {"independence", r.independence},
                    {"overlap", r.overlap},
                    {"note", r.note}});
  }
  return rows;
}

ResultsTable parse_csv(const std::string& text) {
  const auto records = parse_records(text);
  if (records.empty()) throw ConfigError("results csv is empty");
  if (records[0] != kColumns) throw ConfigError("results csv has an unexpected header");
  ResultsTable table;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& c = records[i];
    const std::size_t line = i + 1;
    if (c.size() != kColumns.size()) {
      throw ConfigError("results csv line " + std::to_string(line) + ": expected " + std::to_string(kColumns.size()) +
                        " fields, got " + std::to_string(c.size()));
    }
    ResultRow r;
    r.scenario = c[0];
    r.n = to_size(c[1], line, "n");
    r.m = to_size(c[2], line, "m");
    r.replicate = to_size(c[3], line, "replicate");
    r.estimator = c[4];
    r.kind = c[5];
    r.family = c[6];
    r.k = to_size(c[7], line, "k");
    r.estimand = c[8];
    r.point = to_double(c[9], line, "point");
    r.se = to_double(c[10], line, "se");
    r.truth = to_double(c[11], line, "truth");
    r.bias = to_double(c[12], line, "bias");
    r.status = c[13];
    r.condition_number = to_double(c[14], line, "condition_number");
    r.independence = c[15];
    r.overlap = c[16];
    r.note = c[17];
    table.rows.push_back(std::move(r));
  }
  return table;
}

ResultsTable load_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read results file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

void write_results(const ResultsTable& table, const ExperimentConfig& config, const RunInfo& info,
                   const std::string& path) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write results to '" + path + "'");
    if (config.format == "json") {
      out << to_json(table).dump(2) << "\n";
    } else {
      out << to_csv(table);
    }
    if (!out) throw Error("failed writing results to '" + path + "'");
  }
  const json meta = {{"config_hash", info.config_hash},
                     {"version", kVersion},
                     {"seed", info.seed},
                     {"rows", table.rows.size()},
                     {"wall_clock_seconds", info.wall_clock_seconds},
                     {"config", config_to_json(config)}};
  std::ofstream out(path + ".meta.json", std::ios::binary);
  if (!out) throw Error("cannot write metadata to '" + path + ".meta.json'");
  out << meta.dump(2) << "\n";
}

}  // namespace deconlab::harness
