#pragma once

#include <somp/alasso.hpp>
#include <somp/baselines.hpp>
#include <somp/simgen.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace somp {

enum class Mode { Simulate, Screen, Fit };
enum class OutputFormat { Csv, Json };
enum class R2Formula { Test, Normalized };

/**
 * Everything a CLI run needs. Loaded from a flat `key = value` file
 * (`#` starts a comment) and then overridden from the command line.
 *
 * Keys and defaults:
 *   scenario = sim1           sim1 .. sim5
 *   n = 200, p = 2000, s = 10, T = 100, t_nonzero = 100
 *   snr = <unset>             exactly one of snr / sigma
 *   sigma = <unset>
 *   rho = 0                   sim3 / sim4 correlation parameter
 *   test_n = 0                0 = n
 *   seed = 0
 *   replicates = 200
 *   methods = SIS-ALASSO,ISIS-ALASSO,OMP,S-OMP,S-OMP-ALASSO
 *   threads = 0               0 = available hardware threads
 *   output = <stdout>
 *   format = csv              csv | json
 *   dump_replicates = <none>  per-replicate CSV path
 *   r2 = test                 test | normalized
 *   standardize = false       screen / fit: standardize X, center Y
 *   bic_p = 0                 0 = data p
 *   max_steps = 0             0 = min(n - 1, p)
 *   alasso.lambda_grid_size = 100, alasso.lambda_min_ratio = 1e-3,
 *   alasso.cd_tolerance = 1e-8, alasso.max_cd_iterations = 10000,
 *   alasso.weight_epsilon = 1e-12
 *   x, y                      screen / fit input CSV paths
 */
struct RunConfig
{
    Mode mode = Mode::Simulate;
    SimulationSpec simulation;
    std::vector<Method> methods = all_methods();
    std::size_t replicates = 200;
    std::size_t threads = 0;
    std::string output_path;
    OutputFormat format = OutputFormat::Csv;
    std::string dump_replicates;
    R2Formula r2 = R2Formula::Test;
    bool standardize = false;
    std::optional<std::size_t> bic_p_override;
    std::size_t max_steps = 0;
    AlassoConfig alasso;
    std::string x_path;
    std::string y_path;

    /// Throws Error(Config) naming the offending field.
    void validate() const;

    PipelineConfig pipeline(std::size_t threads_for_pipeline) const;
};

/// Sets one key; throws Error(Config) for unknown keys or bad values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Applies every `key = value` line of text on top of config.
void apply_config_text(RunConfig& config, std::string_view text);

void load_config_file(RunConfig& config, const std::string& path);

std::string_view format_name(OutputFormat f);

} // namespace somp
