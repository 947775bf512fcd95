#include <somp/dataset_tools.hpp>

#include <somp/alasso.hpp>
#include <somp/errors.hpp>
#include <somp/numerics.hpp>

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

namespace somp {

namespace {

using nlohmann::ordered_json;

std::string support_string(const std::vector<std::size_t>& support)
{
    std::string out;
    for (auto j : support) {
        if (!out.empty()) out += ' ';
        out += std::to_string(j + 1);
    }
    return out;
}

std::string csv_cell(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

} // namespace

LoadedDataset make_dataset(const CsvTable& x, const CsvTable& y, bool standardize)
{
    if (x.values.rows() != y.values.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "X has " + std::to_string(x.values.rows()) + " rows but Y has " +
                                                      std::to_string(y.values.rows()));
    }
    if (x.values.rows() < 2) throw Error(ErrorCode::DimensionMismatch, "need at least 2 observations");
    if (x.values.cols() == 0) throw Error(ErrorCode::DimensionMismatch, "X has no columns");
    if (y.values.cols() == 0) throw Error(ErrorCode::DimensionMismatch, "Y has no columns");

    Matrix design = x.values;
    Matrix responses = y.values;
    if (standardize) {
        const double n = static_cast<double>(design.rows());
        for (Eigen::Index j = 0; j < design.cols(); ++j) {
            auto col = design.col(j);
            col.array() -= col.mean();
            const double sd = std::sqrt(col.squaredNorm() / (n - 1.0));
            if (sd > 0.0) col /= sd;
        }
        for (Eigen::Index t = 0; t < responses.cols(); ++t) {
            responses.col(t).array() -= responses.col(t).mean();
        }
    }
    std::vector<Vector> ys;
    for (Eigen::Index t = 0; t < responses.cols(); ++t) ys.emplace_back(responses.col(t));
    return {MultiTaskDataset::shared(std::move(design), std::move(ys)), x.header, y.header};
}

LoadedDataset load_dataset(const std::string& x_path, const std::string& y_path, bool standardize)
{
    return make_dataset(read_csv_file(x_path), read_csv_file(y_path), standardize);
}

std::vector<std::size_t> constant_tasks(const MultiTaskDataset& data)
{
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < data.tasks(); ++t) {
        const auto& y = data.response(t);
        if (y.maxCoeff() == y.minCoeff()) out.push_back(t);
    }
    return out;
}

namespace {

std::vector<std::size_t> complement(const std::vector<std::size_t>& excluded, std::size_t tasks)
{
    std::vector<std::size_t> kept;
    for (std::size_t t = 0, e = 0; t < tasks; ++t) {
        if (e < excluded.size() && excluded[e] == t) {
            ++e;
        } else {
            kept.push_back(t);
        }
    }
    return kept;
}

} // namespace

ScreenResult screen_dataset(const LoadedDataset& loaded, const RunConfig& config)
{
    const auto& data = loaded.data;
    auto excluded = constant_tasks(data);
    const auto kept = complement(excluded, data.tasks());
    if (kept.empty()) throw Error(ErrorCode::ZeroVariance, "every response column is constant");
    const auto sub = data.select_tasks(kept);
    const auto bic_p = config.bic_p_override.value_or(data.p());
    auto sc = config.pipeline(resolve_threads(config.threads)).somp;
    sc.bic_p = bic_p;
    auto path = run_somp(sub, sc);
    auto selection = select_by_bic(path, data.n(), bic_p, kept.size());
    return {std::move(path), std::move(selection), std::move(excluded)};
}

void write_screen_csv(std::ostream& out, const LoadedDataset& loaded, const ScreenResult& result)
{
    const auto& path = result.path;
    out << "step,variable,name,rss,bic,selected\n";
    out << "0,-,-," << format_double(path.rss_empty) << ',' << format_double(path.bic_empty) << ','
        << (result.selection.steps == 0 ? 1 : 0) << '\n';
    for (std::size_t k = 0; k < path.size(); ++k) {
        const auto& step = path.steps[k];
        out << k + 1 << ',' << step.index + 1 << ',' << csv_cell(loaded.variables[step.index]) << ','
            << format_double(step.rss) << ',' << format_double(step.bic) << ','
            << (k + 1 <= result.selection.steps ? 1 : 0) << '\n';
    }
}

void write_screen_json(std::ostream& out, const LoadedDataset& loaded, const ScreenResult& result)
{
    const auto& path = result.path;
    ordered_json steps = ordered_json::array();
    steps.push_back({{"step", 0}, {"rss", path.rss_empty}, {"bic", path.bic_empty}});
    for (std::size_t k = 0; k < path.size(); ++k) {
        const auto& s = path.steps[k];
        steps.push_back({{"step", k + 1},
                         {"variable", s.index + 1},
                         {"name", loaded.variables[s.index]},
                         {"rss", s.rss},
                         {"bic", s.bic}});
    }
    ordered_json selected = ordered_json::array();
    for (auto j : result.selection.support) selected.push_back(j + 1);
    ordered_json root;
    root["n"] = loaded.data.n();
    root["p"] = loaded.data.p();
    root["T"] = loaded.data.tasks();
    ordered_json excluded = ordered_json::array();
    for (auto t : result.excluded_tasks) excluded.push_back(t + 1);
    root["excluded_tasks"] = excluded;
    root["path"] = steps;
    root["selected_steps"] = result.selection.steps;
    root["selected"] = selected;
    root["selected_bic"] = result.selection.bic;
    out << root.dump(2) << '\n';
}

FitResult fit_dataset(const LoadedDataset& loaded, const RunConfig& config)
{
    const auto& data = loaded.data;
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    const std::size_t tasks = data.tasks();
    const auto threads = resolve_threads(config.threads);
    const auto bic_p = config.bic_p_override.value_or(p);

    FitResult result{{}, CoefficientMatrix(p, tasks), std::vector<TaskFit>(tasks)};
    const auto excluded = constant_tasks(data);
    const auto kept = complement(excluded, tasks);
    for (std::size_t t = 0; t < tasks; ++t) result.tasks[t].task = t;
    for (auto t : excluded) result.tasks[t].error = "ZeroVariance: response is constant";
    if (kept.empty()) return result;

    const auto sub = data.select_tasks(kept);
    auto sc = config.pipeline(threads).somp;
    sc.bic_p = bic_p;
    const auto path = run_somp(sub, sc);
    const auto chosen = select_by_bic(path, n, bic_p, kept.size());
    result.screened = chosen.support;

    AlassoOptions options;
    options.config = config.alasso;
    options.bic_p = bic_p;
    options.threads = 1;

    std::vector<std::optional<CoefficientMatrix>> fits(kept.size());
    std::vector<std::optional<std::string>> errors(kept.size());
    parallel_chunks(kept.size(), threads, 1, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            if (chosen.support.empty()) {
                fits[i] = CoefficientMatrix(p, 1);
                continue;
            }
            try {
                fits[i] = alasso_per_task(sub.task_view(i), {chosen.support}, options, nullptr);
            } catch (const Error& e) {
                errors[i] = std::string(to_string(e.code())) + ": " + e.what();
            }
        }
    });

    for (std::size_t i = 0; i < kept.size(); ++i) {
        auto& summary = result.tasks[kept[i]];
        if (errors[i]) {
            summary.error = errors[i];
            continue;
        }
        Vector beta = Vector::Zero(static_cast<Eigen::Index>(p));
        for (const auto& [key, v] : fits[i]->entries()) {
            result.estimate.set(key.first, kept[i], v);
            beta(static_cast<Eigen::Index>(key.first)) = v;
            summary.support.push_back(key.first);
        }
        summary.training_rss = (data.response(kept[i]) - data.design(kept[i]) * beta).squaredNorm();
    }
    return result;
}

void write_fit_csv(std::ostream& out, const LoadedDataset& loaded, const FitResult& result)
{
    out << "variable,task,value\n";
    for (const auto& [key, v] : result.estimate.entries()) {
        out << key.first + 1 << ',' << key.second + 1 << ',' << format_double(v) << '\n';
    }
    out << "\ntask,name,support_size,support,training_rss,error\n";
    for (const auto& t : result.tasks) {
        out << t.task + 1 << ',' << csv_cell(loaded.tasks[t.task]) << ',';
        if (t.error) {
            out << "-,-,-," << csv_cell(*t.error) << '\n';
        } else {
            out << t.support.size() << ',' << support_string(t.support) << ',' << format_double(t.training_rss)
                << ",\n";
        }
    }
}

void write_fit_json(std::ostream& out, const LoadedDataset& loaded, const FitResult& result)
{
    ordered_json coefs = ordered_json::array();
    for (const auto& [key, v] : result.estimate.entries()) {
        coefs.push_back({{"variable", key.first + 1}, {"task", key.second + 1}, {"value", v}});
    }
    ordered_json screened = ordered_json::array();
    for (auto j : result.screened.sorted()) screened.push_back(j + 1);
    ordered_json tasks = ordered_json::array();
    for (const auto& t : result.tasks) {
        ordered_json row{{"task", t.task + 1}, {"name", loaded.tasks[t.task]}};
        if (t.error) {
            row["error"] = *t.error;
        } else {
            ordered_json support = ordered_json::array();
            for (auto j : t.support) support.push_back(j + 1);
            row["support"] = support;
            row["training_rss"] = t.training_rss;
        }
        tasks.push_back(row);
    }
    ordered_json root;
    root["screened"] = screened;
    root["coefficients"] = coefs;
    root["tasks"] = tasks;
    out << root.dump(2) << '\n';
}

CoefficientMatrix read_fit_triples(std::istream& in, std::size_t p, std::size_t tasks)
{
    CoefficientMatrix out(p, tasks);
    std::string line;
    if (!std::getline(in, line) || line.rfind("variable,task,value", 0) != 0) {
        throw Error(ErrorCode::Parse, "expected header 'variable,task,value'");
    }
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) break;
        ++row;
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
        std::size_t j = 0;
        std::size_t t = 0;
        double v = 0.0;
        bool ok = c2 != std::string::npos;
        if (ok) {
            const char* s = line.data();
            ok = std::from_chars(s, s + c1, j).ec == std::errc() &&
                 std::from_chars(s + c1 + 1, s + c2, t).ec == std::errc() &&
                 std::from_chars(s + c2 + 1, s + line.size(), v).ec == std::errc();
        }
        if (!ok || j == 0 || t == 0 || j > p || t > tasks) {
            throw Error(ErrorCode::Parse, "bad coefficient triple at row " + std::to_string(row));
        }
        out.set(j - 1, t - 1, v);
    }
    return out;
}

} // namespace somp
