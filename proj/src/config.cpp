#include <somp/config.hpp>

#include <somp/errors.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace somp {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

Error bad_value(std::string_view key, std::string_view value, std::string_view expected)
{
    return Error(ErrorCode::Config,
                 "config key '" + std::string(key) + "': invalid value '" + std::string(value) + "' (expected " +
                     std::string(expected) + ")");
}

std::uint64_t parse_u64(std::string_view key, std::string_view value)
{
    std::uint64_t out = 0;
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) throw bad_value(key, value, "a nonnegative integer");
    return out;
}

std::size_t parse_size(std::string_view key, std::string_view value)
{
    return static_cast<std::size_t>(parse_u64(key, value));
}

double parse_real(std::string_view key, std::string_view value)
{
    double out = 0.0;
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) throw bad_value(key, value, "a real number");
    return out;
}

bool parse_bool(std::string_view key, std::string_view value)
{
    std::string v;
    for (char c : value) v.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw bad_value(key, value, "true or false");
}

std::vector<Method> parse_methods(std::string_view key, std::string_view value)
{
    std::vector<Method> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        const auto comma = value.find(',', start);
        const auto item = trim(value.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                   : comma - start));
        if (!item.empty()) {
            auto m = parse_method(item);
            if (!m) throw bad_value(key, item, "one of SIS-ALASSO, ISIS-ALASSO, OMP, S-OMP, S-OMP-ALASSO");
            if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
        }
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw bad_value(key, value, "a comma-separated list of methods");
    return out;
}

} // namespace

std::string_view format_name(OutputFormat f)
{
    return f == OutputFormat::Json ? "json" : "csv";
}

void apply_setting(RunConfig& c, std::string_view raw_key, std::string_view raw_value)
{
    const auto key = trim(raw_key);
    const auto value = trim(raw_value);
    auto& sim = c.simulation;

    if (key == "scenario") {
        auto s = parse_scenario(value);
        if (!s) throw bad_value(key, value, "sim1 .. sim5");
        sim.scenario = *s;
    } else if (key == "n") {
        sim.n = parse_size(key, value);
    } else if (key == "p") {
        sim.p = parse_size(key, value);
    } else if (key == "s") {
        sim.s = parse_size(key, value);
    } else if (key == "T" || key == "tasks") {
        sim.tasks = parse_size(key, value);
    } else if (key == "t_nonzero") {
        sim.t_nonzero = parse_size(key, value);
    } else if (key == "snr") {
        sim.snr = parse_real(key, value);
        sim.sigma.reset();
    } else if (key == "sigma") {
        sim.sigma = parse_real(key, value);
        sim.snr.reset();
    } else if (key == "rho") {
        sim.rho = parse_real(key, value);
    } else if (key == "test_n") {
        sim.test_n = parse_size(key, value);
    } else if (key == "seed") {
        sim.seed = parse_u64(key, value);
    } else if (key == "replicates") {
        c.replicates = parse_size(key, value);
    } else if (key == "methods") {
        c.methods = parse_methods(key, value);
    } else if (key == "threads") {
        c.threads = value == "auto" ? 0 : parse_size(key, value);
    } else if (key == "output") {
        c.output_path = std::string(value);
    } else if (key == "format") {
        if (value == "csv") {
            c.format = OutputFormat::Csv;
        } else if (value == "json") {
            c.format = OutputFormat::Json;
        } else {
            throw bad_value(key, value, "csv or json");
        }
    } else if (key == "dump_replicates") {
        c.dump_replicates = std::string(value);
    } else if (key == "r2") {
        if (value == "test") {
            c.r2 = R2Formula::Test;
        } else if (value == "normalized") {
            c.r2 = R2Formula::Normalized;
        } else {
            throw bad_value(key, value, "test or normalized");
        }
    } else if (key == "standardize") {
        c.standardize = parse_bool(key, value);
    } else if (key == "bic_p") {
        const auto v = parse_size(key, value);
        c.bic_p_override = v == 0 ? std::nullopt : std::optional<std::size_t>(v);
    } else if (key == "max_steps") {
        c.max_steps = parse_size(key, value);
    } else if (key == "alasso.lambda_grid_size") {
        c.alasso.lambda_grid_size = parse_size(key, value);
    } else if (key == "alasso.lambda_min_ratio") {
        c.alasso.lambda_min_ratio = parse_real(key, value);
    } else if (key == "alasso.cd_tolerance") {
        c.alasso.cd_tolerance = parse_real(key, value);
    } else if (key == "alasso.max_cd_iterations") {
        c.alasso.max_cd_iterations = parse_size(key, value);
    } else if (key == "alasso.weight_epsilon") {
        c.alasso.weight_epsilon = parse_real(key, value);
    } else if (key == "x") {
        c.x_path = std::string(value);
    } else if (key == "y") {
        c.y_path = std::string(value);
    } else {
        throw Error(ErrorCode::Config, "unknown config key '" + std::string(key) + "'");
    }
}

void apply_config_text(RunConfig& config, std::string_view text)
{
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view v = line;
        if (auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
        v = trim(v);
        if (v.empty()) continue;
        const auto eq = v.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::Config, "config line " + std::to_string(line_no) + ": expected key = value");
        }
        apply_setting(config, v.substr(0, eq), v.substr(eq + 1));
    }
}

void load_config_file(RunConfig& config, const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Config, "cannot read config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    apply_config_text(config, text.str());
}

void RunConfig::validate() const
{
    if (replicates == 0) throw Error(ErrorCode::Config, "config key 'replicates' must be >= 1");
    if (methods.empty()) throw Error(ErrorCode::Config, "config key 'methods' must name at least one method");
    if (bic_p_override && *bic_p_override == 0) throw Error(ErrorCode::Config, "config key 'bic_p' must be >= 1");
    alasso.validate();
    if (mode == Mode::Simulate) {
        simulation.validate();
    } else {
        if (x_path.empty()) throw Error(ErrorCode::Config, "config key 'x' (design CSV) is required");
        if (y_path.empty()) throw Error(ErrorCode::Config, "config key 'y' (response CSV) is required");
    }
}

PipelineConfig RunConfig::pipeline(std::size_t threads_for_pipeline) const
{
    PipelineConfig pc;
    pc.somp.max_steps = max_steps;
    pc.somp.parallel_candidates = threads_for_pipeline > 1;
    pc.somp.threads = threads_for_pipeline;
    pc.alasso = alasso;
    pc.bic_p = bic_p_override.value_or(0);
    pc.threads = threads_for_pipeline;
    return pc;
}

} // namespace somp
