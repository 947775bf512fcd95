#pragma once

#include <somp/config.hpp>
#include <somp/metrics.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace somp {

struct ReplicateRecord
{
    std::size_t replicate = 0;
    std::string method;
    ReplicateReport report;
};

/**
 * Table in the layout of the published results: one row per (section,
 * method) with columns
 *
 *   section,method,replicates,coverage_pct,correct_zeros_pct,
 *   incorrect_zeros_pct,exactly_fitted_pct,support_size,estimation_error,r2
 *
 * Union rows come first, then exact rows. Percentages carry one decimal;
 * other numbers use the shortest round-trip form. Union rows leave the last
 * two columns as "-".
 */
void write_report_csv(std::ostream& out, const std::vector<AggregateReport>& reports);

/// {config: {...}, methods: [{name, replicates, union: {...}, exact: {...}}]}
/// with every metric as {mean, sd} (fractions, not percentages).
void write_report_json(std::ostream& out, const RunConfig& config, const std::vector<AggregateReport>& reports);

/// Inverse of write_report_json for the methods array.
std::vector<AggregateReport> parse_report_json(std::istream& in);

/// One row per (replicate, method), full precision.
void write_replicates_csv(std::ostream& out, const std::vector<ReplicateRecord>& records);

} // namespace somp
