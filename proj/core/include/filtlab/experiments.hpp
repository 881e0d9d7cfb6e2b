#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace filtlab {

/// Runner configuration; flags override config-file fields of the same name.
struct ExperimentConfig {
    std::string experiment;
    std::string model = "bm";
    std::size_t n_paths = 10000;
    unsigned mesh_exp = 10;  // uniform grid with 2^mesh_exp steps
    std::uint64_t seed = 42;
    std::vector<double> eps_list;
    double t_max = 0.45;
    double cost = 0.0;
    std::string strategy = "sign";
    std::string out_dir;

    void validate() const;
};

/// One row of the flat CSV summary.
struct TestRow {
    std::string experiment;
    std::string test;
    double statistic = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double expected = 0.0;
    bool pass = false;
};

struct ExperimentResult {
    std::vector<TestRow> rows;
    bool all_pass() const;
    std::string to_csv() const;  // header + data rows, no timestamps
};

std::vector<std::string> list_experiments();

/// Fills experiment-appropriate default sizes for a named experiment.
ExperimentConfig default_config(const std::string& experiment);

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes <out_dir>/<experiment>_summary.csv and <experiment>_manifest.json.
void write_reports(const ExperimentConfig& config, const ExperimentResult& result);

/// key = value lines; '#' starts a comment. Unknown keys are an error.
void apply_config_file(ExperimentConfig& config, const std::string& file);
void apply_config_line(ExperimentConfig& config, const std::string& key, const std::string& value);

} // namespace filtlab
