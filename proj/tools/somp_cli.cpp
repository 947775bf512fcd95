// somp: simulation tables and CSV screening/fitting from the command line.
//
//   somp simulate --config sim3.cfg [--seed N] [--threads N] [--output PATH] [--format csv|json]
//   somp screen --x X.csv --y Y.csv [--standardize] [--output PATH] [--format csv|json]
//   somp fit    --x X.csv --y Y.csv [--standardize] [--output PATH] [--format csv|json]
//
// Any config key can also be given as --set key=value. Exit codes: 0 success,
// 2 config error, 3 data error, 4 numerical failure.

#include <somp/config.hpp>
#include <somp/dataset_tools.hpp>
#include <somp/errors.hpp>
#include <somp/experiment.hpp>
#include <somp/report.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace somp;

struct Overrides
{
    std::string config_path;
    std::optional<std::string> seed;
    std::optional<std::string> threads;
    std::optional<std::string> output;
    std::optional<std::string> format;
    std::optional<std::string> replicates;
    std::optional<std::string> methods;
    std::optional<std::string> dump;
    std::optional<std::string> x;
    std::optional<std::string> y;
    std::optional<std::string> bic_p;
    std::optional<std::string> max_steps;
    bool standardize = false;
    bool progress = false;
    std::vector<std::string> settings;
};

RunConfig build_config(Mode mode, const Overrides& o)
{
    RunConfig c;
    c.mode = mode;
    if (!o.config_path.empty()) load_config_file(c, o.config_path);
    for (const auto& kv : o.settings) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::Config, "--set expects key=value, got '" + kv + "'");
        apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    auto apply = [&](const char* key, const std::optional<std::string>& v) {
        if (v) apply_setting(c, key, *v);
    };
    apply("seed", o.seed);
    apply("threads", o.threads);
    apply("output", o.output);
    apply("format", o.format);
    apply("replicates", o.replicates);
    apply("methods", o.methods);
    apply("dump_replicates", o.dump);
    apply("x", o.x);
    apply("y", o.y);
    apply("bic_p", o.bic_p);
    apply("max_steps", o.max_steps);
    if (o.standardize) c.standardize = true;
    c.validate();
    return c;
}

template <typename Fn>
void with_output(const std::string& path, Fn&& fn)
{
    if (path.empty() || path == "-") {
        fn(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Config, "cannot write output file '" + path + "'");
    fn(out);
    if (!out) throw Error(ErrorCode::Config, "write failed for '" + path + "'");
}

void run_simulate(const RunConfig& c, bool progress)
{
    ReplicateCallback cb;
    if (progress) {
        cb = [](std::size_t done, std::size_t total) {
            std::cerr << "\rreplicate " << done << '/' << total << std::flush;
            if (done == total) std::cerr << '\n';
        };
    }
    const auto result = run_simulation(c, cb);
    with_output(c.output_path, [&](std::ostream& out) {
        if (c.format == OutputFormat::Json) {
            write_report_json(out, c, result.reports);
        } else {
            write_report_csv(out, result.reports);
        }
    });
    if (!c.dump_replicates.empty()) {
        with_output(c.dump_replicates, [&](std::ostream& out) { write_replicates_csv(out, result.records); });
    }
    if (result.alasso.no_convergence > 0) {
        std::cerr << "warning: " << result.alasso.no_convergence << " of " << result.alasso.fits
                  << " adaptive Lasso fits hit the iteration limit\n";
    }
}

void run_screen(const RunConfig& c)
{
    const auto loaded = load_dataset(c.x_path, c.y_path, c.standardize);
    const auto result = screen_dataset(loaded, c);
    for (auto t : result.excluded_tasks) {
        std::cerr << "task " << t + 1 << " (" << loaded.tasks[t] << "): ZeroVariance: response is constant, "
                  << "left out of screening\n";
    }
    with_output(c.output_path, [&](std::ostream& out) {
        if (c.format == OutputFormat::Json) {
            write_screen_json(out, loaded, result);
        } else {
            write_screen_csv(out, loaded, result);
        }
    });
}

int run_fit(const RunConfig& c)
{
    const auto loaded = load_dataset(c.x_path, c.y_path, c.standardize);
    const auto result = fit_dataset(loaded, c);
    with_output(c.output_path, [&](std::ostream& out) {
        if (c.format == OutputFormat::Json) {
            write_fit_json(out, loaded, result);
        } else {
            write_fit_csv(out, loaded, result);
        }
    });
    std::size_t failed = 0;
    for (const auto& t : result.tasks) {
        if (t.error) {
            std::cerr << "task " << t.task + 1 << " (" << loaded.tasks[t.task] << "): " << *t.error << '\n';
            ++failed;
        }
    }
    return failed == result.tasks.size() ? 4 : 0;
}

void add_common(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--threads", o.threads, "Worker threads (0 or auto = all cores)");
    cmd->add_option("--output,-o", o.output, "Output file (default stdout)");
    cmd->add_option("--format", o.format, "csv or json");
    cmd->add_option("--set", o.settings, "Extra config setting key=value (repeatable)");
}

void add_dataset(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--config", o.config_path, "Config file");
    cmd->add_option("--x", o.x, "Design CSV (n rows, p columns, header)")->required();
    cmd->add_option("--y", o.y, "Response CSV (n rows, T columns, header)")->required();
    cmd->add_flag("--standardize", o.standardize, "Center and scale X, center Y");
    cmd->add_option("--bic-p", o.bic_p, "p used in the BIC penalty (default: columns of X)");
    cmd->add_option("--max-steps", o.max_steps, "Screening path length (default min(n-1, p))");
    add_common(cmd, o);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"S-OMP screening for multi-task regression"};
    app.require_subcommand(1);
    Overrides o;

    auto* simulate = app.add_subcommand("simulate", "Run a simulation study and print the result table");
    simulate->add_option("--config", o.config_path, "Config file")->required();
    simulate->add_option("--seed", o.seed, "Base random seed");
    simulate->add_option("--replicates", o.replicates, "Number of replicates");
    simulate->add_option("--methods", o.methods, "Comma-separated methods");
    simulate->add_option("--dump-replicates", o.dump, "Write per-replicate metrics to this CSV");
    simulate->add_flag("--progress", o.progress, "Report progress on stderr");
    add_common(simulate, o);

    auto* screen = app.add_subcommand("screen", "S-OMP path and BIC-selected variables for CSV data");
    add_dataset(screen, o);

    auto* fit = app.add_subcommand("fit", "S-OMP screening plus adaptive Lasso for CSV data");
    add_dataset(fit, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (simulate->parsed()) {
            run_simulate(build_config(Mode::Simulate, o), o.progress);
        } else if (screen->parsed()) {
            run_screen(build_config(Mode::Screen, o));
        } else {
            return run_fit(build_config(Mode::Fit, o));
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
