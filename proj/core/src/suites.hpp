#pragma once

#include <chrono>
#include <random>
#include <string>

#include "hyperlab/runner.hpp"

namespace hyperlab::runner {

struct SuiteContext {
  const ExperimentConfig& config;
  const RunOptions& options;
  CheckReport report;

  [[nodiscard]] double tol(const std::string& key) const {
    const auto it = config.tolerances.find(key);
    return it != config.tolerances.end() ? it->second : default_tolerances().at(key);
  }
  [[nodiscard]] std::string recipe(int index) const {
    return "seed=" + std::to_string(config.corpus.seed) + " index=" + std::to_string(index);
  }
  // value <= limit.
  Verdict& at_most(const std::string& group, const std::string& name, double value, double limit,
                   std::map<std::string, double> params = {}, std::string recipe = {}) {
    return push(group, name, value, limit, limit - value, std::move(params), std::move(recipe));
  }
  // value >= limit.
  Verdict& at_least(const std::string& group, const std::string& name, double value, double limit,
                    std::map<std::string, double> params = {}, std::string recipe = {}) {
    return push(group, name, value, limit, value - limit, std::move(params), std::move(recipe));
  }
  Table& table(const std::string& name, std::vector<std::string> columns, bool plot = false) {
    report.tables.push_back({name, std::move(columns), {}, plot});
    return report.tables.back();
  }
  void warn(const std::string& message) { report.warnings.push_back(message); }

 private:
  Verdict& push(const std::string& group, const std::string& name, double value, double threshold, double margin,
                std::map<std::string, double> params, std::string recipe) {
    Verdict v{group, name, std::move(params), value, threshold, margin, margin >= 0.0, std::move(recipe)};
    report.verdicts.push_back(std::move(v));
    return report.verdicts.back();
  }
};

// Adds the elapsed wall time to report.group_seconds[group] on destruction.
class GroupClock {
 public:
  GroupClock(CheckReport& report, std::string group)
      : report_(report), group_(std::move(group)), start_(std::chrono::steady_clock::now()) {}
  ~GroupClock() {
    report_.group_seconds[group_] += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  GroupClock(const GroupClock&) = delete;
  GroupClock& operator=(const GroupClock&) = delete;

 private:
  CheckReport& report_;
  std::string group_;
  std::chrono::steady_clock::time_point start_;
};

// Uniform double in [0, 1) from the top 53 bits; independent of the standard library's distributions.
inline double unit01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Suites fill ctx.report in place so that scoped GroupClocks finish before the report is taken.
using SuiteFn = void (*)(SuiteContext&);

void suite_curvature(SuiteContext& ctx);
void suite_bilaplacian(SuiteContext& ctx);
void suite_evolution(SuiteContext& ctx);
void suite_convexity(SuiteContext& ctx);
void suite_gaussian_decay(SuiteContext& ctx);
void suite_commutator(SuiteContext& ctx);
void suite_carleman(SuiteContext& ctx);
void suite_carleman_heat(SuiteContext& ctx);
void suite_carleman_qlog(SuiteContext& ctx);
void suite_mollifier(SuiteContext& ctx);
void suite_asymptotics(SuiteContext& ctx);
void suite_kinematics(SuiteContext& ctx);

}  // namespace hyperlab::runner
