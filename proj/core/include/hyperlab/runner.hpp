#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hyperlab/carleman.hpp"
#include "hyperlab/common.hpp"
#include "hyperlab/evolution.hpp"

namespace hyperlab::runner {

// Schema violation; `path` is the JSON pointer of the offending entry.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& path, const std::string& what)
      : Error("config" + path + ": " + what), path_(path) {}
  [[nodiscard]] const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Error raised inside a suite, with the suite name prepended.
class SuiteError : public Error {
 public:
  using Error::Error;
};

struct GridConfig {
  double rho_max = 8.0;
  int cells = 400;
  int angular_cells = 0;
  bool operator==(const GridConfig&) const = default;
};

// Real radial profile amplitude * shape(rho); kind "zero" ignores the numbers.
struct ProfileConfig {
  std::string kind = "zero";
  double amplitude = 0.0;
  double scale = 1.0;
  bool operator==(const ProfileConfig&) const = default;
};

struct PhysicsConfig {
  double a = 0.0;
  double b = 1.0;
  std::vector<double> gammas{0.0};
  ProfileConfig V;
  ProfileConfig F;
  double dt = 1e-2;
  double t_final = 1.0;
  ProfileConfig initial{"gaussian", 1.0, 0.5};
  bool operator==(const PhysicsConfig&) const = default;
};

struct WeightConfig {
  std::string kind = "static_quadratic";
  double mu = 1.0;
  double eps = 1.0;
  double R = 12.0;
  int ell = 1;
  double sigma = 0.02;
  bool operator==(const WeightConfig&) const = default;
};

struct CorpusConfig {
  std::uint64_t seed = 20240607;
  int size = 0;
  bool operator==(const CorpusConfig&) const = default;
};

struct ExperimentConfig {
  std::string check;
  std::vector<int> dims{2};
  GridConfig grid;
  PhysicsConfig physics;
  WeightConfig weight;
  std::map<std::string, double> tolerances;
  CorpusConfig corpus;
  std::string output = "out";
  bool operator==(const ExperimentConfig&) const = default;
};

// Names of all suites, in dispatch order.
const std::vector<std::string>& suite_names();
// Default tolerance table; config entries may only override these keys.
const std::map<std::string, double>& default_tolerances();
// The built-in configuration of a suite. Throws SchemaError for an unknown check.
ExperimentConfig default_config(const std::string& check);
// Overlays a JSON document on the defaults of its "check". Unknown keys, wrong types and
// non-positive tolerances are SchemaErrors naming the path.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
// Canonical JSON of a config (sorted keys); parse_config(config_to_json(c)) == c.
std::string config_to_json(const ExperimentConfig& config);

// Bump corpus on the annulus [rho_min, rho_max] x (0, 1).
struct CorpusSpec {
  int size = 0;
  double rho_min = 0.0;
  double rho_max = 4.5;
  double margin = 0.1;    // spatial distance kept from both radii
  double margin_t = 0.02; // temporal distance kept from 0 and 1
  double width_lo = 0.2;
  double width_hi = 0.35;
  double t_width_lo = 0.05;
  double t_width_hi = 0.09;
};
// Same seed and spec give the same corpus; every bump satisfies carleman::bump_inside with the margins.
// Throws DomainError when the annulus cannot hold the widest bump.
std::vector<carleman::TestBump> corpus(std::uint64_t seed, const CorpusSpec& spec);

struct Verdict {
  std::string group;  // acceptance grouping, e.g. "bilaplacian_interval"
  std::string name;
  std::map<std::string, double> params;
  double value = 0.0;
  double threshold = 0.0;
  double margin = 0.0;  // pass iff margin >= 0
  bool pass = false;
  std::string recipe;   // "seed=S index=I" for corpus samples
};

// Rows are pre-formatted cells; numbers use 17 significant digits.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  bool plot = false;  // also written under plotdata/
};

struct Checkpoint {
  std::string name;
  evolution::FieldState state;
  std::vector<double> rho;
  int n = 2;
};

struct CheckReport {
  std::string check;
  std::string config_json;
  bool pass = false;
  std::vector<Verdict> verdicts;
  std::vector<Table> tables;
  std::vector<std::string> warnings;
  std::vector<std::string> artifacts;
  std::vector<Checkpoint> checkpoints;
  // Excluded from report.json.
  double wall_seconds = 0.0;
  std::map<std::string, double> group_seconds;
};

struct RunOptions {
  int jobs = 1;
  bool write = true;  // write report.json, CSVs, plotdata and metadata under config.output
};

// Dispatches to the named suite. Suite exceptions are rethrown as SuiteError with context.
CheckReport run(const ExperimentConfig& config, const RunOptions& options = {});

// Calls fn(i) for i in [0, count) on up to `jobs` threads; the first exception is rethrown.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

// Output helpers.
std::string format_double(double x);
std::string report_json(const CheckReport& report);
std::string metadata_json(const CheckReport& report);
std::string table_csv(const Table& table);
// Field values are stored interleaved as [re0, im0, re1, im1, ...].
std::string checkpoint_json(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(const std::string& json_text);
// Writes report.json, metadata.json, one CSV per table, plotdata/*.csv and checkpoints/*.json;
// fills report.artifacts with the paths relative to `dir`.
void write_report(CheckReport& report, const std::filesystem::path& dir);

}  // namespace hyperlab::runner
