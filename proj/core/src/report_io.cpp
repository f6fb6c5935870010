#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <json.hpp>

#include "hyperlab/runner.hpp"

namespace hyperlab::runner {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

// NaN and infinities are not JSON numbers; they are stored as strings.
json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string table_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) out += (c ? "," : "") + table.columns[c];
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + row[c];
    out += '\n';
  }
  return out;
}

std::string report_json(const CheckReport& report) {
  json j;
  j["check"] = report.check;
  // The output location lives in metadata.json so that reports written to different directories compare equal.
  j["config"] = json::parse(report.config_json);
  j["config"].erase("output");
  j["pass"] = report.pass;
  json verdicts = json::array();
  for (const auto& v : report.verdicts) {
    json params = json::object();
    for (const auto& [k, x] : v.params) params[k] = number(x);
    verdicts.push_back({{"group", v.group},
                        {"name", v.name},
                        {"params", params},
                        {"value", number(v.value)},
                        {"threshold", number(v.threshold)},
                        {"margin", number(v.margin)},
                        {"pass", v.pass},
                        {"recipe", v.recipe}});
  }
  j["verdicts"] = verdicts;
  j["warnings"] = report.warnings;
  j["artifacts"] = report.artifacts;
  return j.dump(2) + "\n";
}

std::string metadata_json(const CheckReport& report) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  json j;
  j["check"] = report.check;
  j["output"] = json::parse(report.config_json).value("output", "");
  j["timestamp_utc"] = stamp;
  j["wall_seconds"] = report.wall_seconds;
  j["group_seconds"] = report.group_seconds;
  return j.dump(2) + "\n";
}

std::string checkpoint_json(const Checkpoint& cp) {
  json values = json::array();
  for (Eigen::Index i = 0; i < cp.state.values.size(); ++i) {
    values.push_back(cp.state.values[i].real());
    values.push_back(cp.state.values[i].imag());
  }
  json j{{"name", cp.name}, {"n", cp.n},     {"time", cp.state.time}, {"mode_ell", cp.state.mode_ell},
         {"rho", cp.rho},   {"values", values}};
  return j.dump() + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  const json j = json::parse(text);
  Checkpoint cp;
  cp.name = j.at("name").get<std::string>();
  cp.n = j.at("n").get<int>();
  cp.state.time = j.at("time").get<double>();
  cp.state.mode_ell = j.at("mode_ell").get<int>();
  cp.rho = j.at("rho").get<std::vector<double>>();
  const auto v = j.at("values").get<std::vector<double>>();
  if (v.size() != 2 * cp.rho.size()) throw Error("checkpoint: values must hold 2 entries per node");
  cp.state.values.resize(static_cast<Eigen::Index>(cp.rho.size()));
  for (std::size_t i = 0; i < cp.rho.size(); ++i) {
    cp.state.values[static_cast<Eigen::Index>(i)] = {v[2 * i], v[2 * i + 1]};
  }
  return cp;
}

void write_report(CheckReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<std::string> artifacts;
  for (const auto& t : report.tables) {
    write_file(dir / (t.name + ".csv"), table_csv(t));
    artifacts.push_back(t.name + ".csv");
    if (t.plot) {
      fs::create_directories(dir / "plotdata");
      write_file(dir / "plotdata" / (t.name + ".csv"), table_csv(t));
      artifacts.push_back("plotdata/" + t.name + ".csv");
    }
  }
  for (const auto& cp : report.checkpoints) {
    fs::create_directories(dir / "checkpoints");
    write_file(dir / "checkpoints" / (cp.name + ".json"), checkpoint_json(cp));
    artifacts.push_back("checkpoints/" + cp.name + ".json");
  }
  std::sort(artifacts.begin(), artifacts.end());
  report.artifacts = artifacts;
  write_file(dir / "report.json", report_json(report));
  write_file(dir / "metadata.json", metadata_json(report));
}

}  // namespace hyperlab::runner
