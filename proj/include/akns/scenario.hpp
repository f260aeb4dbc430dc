#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "akns/field.hpp"

namespace akns {

using json = nlohmann::ordered_json;

inline constexpr int kScenarioSchema = 1;

/// Plot-ready table; written as CSV with a header row.
struct CsvTable {
  std::string name;  // suffix used when deriving file names
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string to_csv() const;
};

struct RunResult {
  json report;
  std::vector<CsvTable> tables;
  bool pass = false;
  int exit_code() const { return pass ? 0 : 1; }
};

struct ScenarioInfo {
  std::string name, description, anchor;
};

/// Scenarios compiled into the binary.
std::vector<ScenarioInfo> list_scenarios();
/// Bundled scenario text by name; ConfigError if unknown.
json bundled_scenario(const std::string& name);

/// Reads a JSON file, or a bundled scenario when no such file exists.
json load_scenario(const std::string& path_or_name);

/// Header check (schema, name, target, params present); parameter blocks are
/// checked by the runner before any numerics. ConfigError carries a field path.
void validate_scenario(const json& cfg);

/// Validates and executes; ConfigError (exit 2) propagates to the caller.
RunResult run_scenario(const json& cfg);

/// Writes the report to report_path and each table to <csv_stem>_<table>.csv;
/// empty paths skip that output.
void write_outputs(const RunResult& r, const std::string& report_path, const std::string& csv_stem);

/// Kernel samples from CSV rows "i,j,re,im" (1×1 blocks) or "i,j,r,c,re,im";
/// '#' lines and a non-numeric header are skipped. blocks[i*n + j].
struct KernelCsv {
  int n = 0, rows = 1, cols = 1;
  std::vector<MatC> blocks;
};
KernelCsv read_kernel_csv(const std::string& path);

}  // namespace akns
