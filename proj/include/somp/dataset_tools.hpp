#pragma once

#include <somp/config.hpp>
#include <somp/csv_io.hpp>
#include <somp/greedy.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace somp {

/// A shared-design dataset read from CSV, with column names kept for output.
struct LoadedDataset
{
    MultiTaskDataset data;
    std::vector<std::string> variables;  // X header
    std::vector<std::string> tasks;      // Y header
};

/// X is n x p, Y is n x T. With standardize, X columns are centered and
/// scaled to unit sample variance and Y columns are centered. Constant X
/// columns are centered only.
LoadedDataset make_dataset(const CsvTable& x, const CsvTable& y, bool standardize);
LoadedDataset load_dataset(const std::string& x_path, const std::string& y_path, bool standardize);

struct ScreenResult
{
    SelectionPath path;
    BicSelection selection;
    std::vector<std::size_t> excluded_tasks;  // constant responses, left out of screening
};

/// Tasks whose response column is constant.
std::vector<std::size_t> constant_tasks(const MultiTaskDataset& data);

/// S-OMP path plus BIC over the non-constant responses. Throws
/// Error(ZeroVariance) when every response is constant.
ScreenResult screen_dataset(const LoadedDataset& loaded, const RunConfig& config);

/// step,variable,name,rss,bic,selected (variable is 1-based; step 0 is the empty model).
void write_screen_csv(std::ostream& out, const LoadedDataset& loaded, const ScreenResult& result);
void write_screen_json(std::ostream& out, const LoadedDataset& loaded, const ScreenResult& result);

struct TaskFit
{
    std::size_t task = 0;
    std::vector<std::size_t> support;  // sorted, 0-based
    double training_rss = 0.0;
    std::optional<std::string> error;  // set when the task was skipped
};

struct FitResult
{
    SupportSet screened;
    CoefficientMatrix estimate{0, 0};
    std::vector<TaskFit> tasks;
};

/// S-OMP screening plus BIC, then adaptive Lasso per task. Tasks whose
/// response is constant are left out of screening and reported with an
/// error; a numerical failure in one task's fit does not stop the others.
FitResult fit_dataset(const LoadedDataset& loaded, const RunConfig& config);

/// variable,task,value triples (1-based), then per-task summaries in a
/// second table separated by a blank line.
void write_fit_csv(std::ostream& out, const LoadedDataset& loaded, const FitResult& result);
void write_fit_json(std::ostream& out, const LoadedDataset& loaded, const FitResult& result);

/// Reads the triple table written by write_fit_csv back into a p x T matrix.
CoefficientMatrix read_fit_triples(std::istream& in, std::size_t p, std::size_t tasks);

} // namespace somp
