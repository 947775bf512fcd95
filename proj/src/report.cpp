#include <somp/report.hpp>

#include <somp/csv_io.hpp>
#include <somp/errors.hpp>

#include <json.hpp>

#include <istream>
#include <ostream>

namespace somp {

namespace {

using nlohmann::ordered_json;

void csv_row(std::ostream& out, std::string_view section, const AggregateReport& r, const SupportSummary& s,
             bool with_estimates)
{
    out << section << ',' << r.method << ',' << r.replicates << ',' << format_fixed(100.0 * s.covered.mean, 1)
        << ',' << format_fixed(100.0 * s.frac_correct_zeros.mean, 1) << ','
        << format_fixed(100.0 * s.frac_incorrect_zeros.mean, 1) << ','
        << format_fixed(100.0 * s.exactly_fitted.mean, 1) << ',' << format_double(s.support_size.mean) << ',';
    if (with_estimates) {
        out << format_double(r.estimation_error.mean) << ',' << format_double(r.r2_test.mean);
    } else {
        out << "-,-";
    }
    out << '\n';
}

ordered_json summary_json(const MetricSummary& m)
{
    return ordered_json{{"mean", m.mean}, {"sd", m.sd}};
}

ordered_json support_json(const SupportSummary& s)
{
    ordered_json j;
    j["coverage"] = summary_json(s.covered);
    j["correct_zeros"] = summary_json(s.frac_correct_zeros);
    j["incorrect_zeros"] = summary_json(s.frac_incorrect_zeros);
    j["exactly_fitted"] = summary_json(s.exactly_fitted);
    j["support_size"] = summary_json(s.support_size);
    return j;
}

MetricSummary summary_from(const ordered_json& j)
{
    return {j.at("mean").get<double>(), j.at("sd").get<double>()};
}

SupportSummary support_from(const ordered_json& j)
{
    SupportSummary s;
    s.covered = summary_from(j.at("coverage"));
    s.frac_correct_zeros = summary_from(j.at("correct_zeros"));
    s.frac_incorrect_zeros = summary_from(j.at("incorrect_zeros"));
    s.exactly_fitted = summary_from(j.at("exactly_fitted"));
    s.support_size = summary_from(j.at("support_size"));
    return s;
}

ordered_json config_json(const RunConfig& c)
{
    // thread count is deliberately absent: output must not depend on it
    const auto& s = c.simulation;
    ordered_json j;
    j["scenario"] = scenario_name(s.scenario);
    j["n"] = s.n;
    j["p"] = s.p;
    j["s"] = s.s;
    j["T"] = s.tasks;
    j["t_nonzero"] = s.t_nonzero;
    if (s.snr) j["snr"] = *s.snr;
    if (s.sigma) j["sigma"] = *s.sigma;
    j["rho"] = s.rho;
    j["test_n"] = s.test_rows();
    j["seed"] = s.seed;
    j["replicates"] = c.replicates;
    ordered_json methods = ordered_json::array();
    for (auto m : c.methods) methods.push_back(method_name(m));
    j["methods"] = methods;
    j["r2"] = c.r2 == R2Formula::Test ? "test" : "normalized";
    j["bic_p"] = c.bic_p_override.value_or(0);
    j["max_steps"] = c.max_steps;
    j["alasso"] = {{"lambda_grid_size", c.alasso.lambda_grid_size},
                   {"lambda_min_ratio", c.alasso.lambda_min_ratio},
                   {"cd_tolerance", c.alasso.cd_tolerance},
                   {"max_cd_iterations", c.alasso.max_cd_iterations},
                   {"weight_epsilon", c.alasso.weight_epsilon}};
    return j;
}

} // namespace

void write_report_csv(std::ostream& out, const std::vector<AggregateReport>& reports)
{
    out << "section,method,replicates,coverage_pct,correct_zeros_pct,incorrect_zeros_pct,exactly_fitted_pct,"
           "support_size,estimation_error,r2\n";
    for (const auto& r : reports) csv_row(out, "union", r, r.union_support, false);
    for (const auto& r : reports) csv_row(out, "exact", r, r.exact_support, true);
}

void write_report_json(std::ostream& out, const RunConfig& config, const std::vector<AggregateReport>& reports)
{
    ordered_json root;
    root["config"] = config_json(config);
    ordered_json methods = ordered_json::array();
    for (const auto& r : reports) {
        ordered_json m;
        m["name"] = r.method;
        m["replicates"] = r.replicates;
        m["union"] = support_json(r.union_support);
        auto exact = support_json(r.exact_support);
        exact["estimation_error"] = summary_json(r.estimation_error);
        exact["r2"] = summary_json(r.r2_test);
        m["exact"] = exact;
        methods.push_back(m);
    }
    root["methods"] = methods;
    out << root.dump(2) << '\n';
}

std::vector<AggregateReport> parse_report_json(std::istream& in)
{
    ordered_json root;
    try {
        root = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("report JSON: ") + e.what());
    }
    std::vector<AggregateReport> out;
    for (const auto& m : root.at("methods")) {
        AggregateReport r;
        r.method = m.at("name").get<std::string>();
        r.replicates = m.at("replicates").get<std::size_t>();
        r.union_support = support_from(m.at("union"));
        r.exact_support = support_from(m.at("exact"));
        r.estimation_error = summary_from(m.at("exact").at("estimation_error"));
        r.r2_test = summary_from(m.at("exact").at("r2"));
        out.push_back(r);
    }
    return out;
}

void write_replicates_csv(std::ostream& out, const std::vector<ReplicateRecord>& records)
{
    out << "replicate,method,union_covered,union_correct_zeros,union_incorrect_zeros,union_exactly_fitted,"
           "union_support_size,exact_covered,exact_correct_zeros,exact_incorrect_zeros,exact_exactly_fitted,"
           "exact_support_size,estimation_error,r2\n";
    auto support = [&](const SupportMetrics& m) {
        out << (m.covered ? 1 : 0) << ',' << format_double(m.frac_correct_zeros) << ','
            << format_double(m.frac_incorrect_zeros) << ',' << (m.exactly_fitted ? 1 : 0) << ',' << m.support_size;
    };
    for (const auto& r : records) {
        out << r.replicate + 1 << ',' << r.method << ',';
        support(r.report.union_support);
        out << ',';
        support(r.report.exact_support);
        out << ',' << format_double(r.report.estimation_error) << ',' << format_double(r.report.r2_test) << '\n';
    }
}

} // namespace somp
