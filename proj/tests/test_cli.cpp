// Config parsing, CSV and report I/O, the simulation harness, screen/fit on
// CSV data, and exit codes of the somp executable.

#include <doctest.h>

#include "oracles.hpp"

#include <somp/config.hpp>
#include <somp/csv_io.hpp>
#include <somp/dataset_tools.hpp>
#include <somp/errors.hpp>
#include <somp/experiment.hpp>
#include <somp/report.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace somp;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected somp::Error");
    return ErrorCode::Config;
}

std::string error_text(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

struct TempDir
{
    fs::path path;
    TempDir()
    {
        static int counter = 0;
        path = fs::temp_directory_path() / ("somp_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name, const std::string& content) const
    {
        const auto p = path / name;
        std::ofstream(p) << content;
        return p.string();
    }
};

std::string table_text(const Matrix& m, const std::string& prefix)
{
    CsvTable t;
    for (Eigen::Index j = 0; j < m.cols(); ++j) t.header.push_back(prefix + std::to_string(j + 1));
    t.values = m;
    std::ostringstream out;
    write_csv(out, t);
    return out.str();
}

RunConfig small_simulation()
{
    RunConfig c;
    apply_config_text(c, R"(
        # small iid problem
        scenario = sim1
        n = 40
        p = 80
        s = 3
        T = 5
        t_nonzero = 4
        snr = 5
        seed = 11
        replicates = 3
        methods = S-OMP, S-OMP-ALASSO, SIS-ALASSO
        threads = 1
    )");
    return c;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string("\"") + SOMP_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("config text sets every kind of key")
{
    RunConfig c;
    apply_config_text(c, "scenario = sim3\nrho = 0.5 # trailing comment\nsigma = 2\nformat = json\n"
                         "alasso.lambda_grid_size = 20\nthreads = auto\nbic_p = 0\n");
    CHECK(c.simulation.scenario == Scenario::Sim3);
    CHECK(c.simulation.rho == 0.5);
    CHECK(c.simulation.sigma == 2.0);
    CHECK_FALSE(c.simulation.snr.has_value());
    CHECK(c.format == OutputFormat::Json);
    CHECK(c.alasso.lambda_grid_size == 20);
    CHECK(c.threads == 0);
    CHECK_FALSE(c.bic_p_override.has_value());
    apply_setting(c, "snr", "3");
    CHECK_FALSE(c.simulation.sigma.has_value());
}

TEST_CASE("config errors name the problem")
{
    RunConfig c;
    CHECK(code_of([&] { apply_setting(c, "colour", "red"); }) == ErrorCode::Config);
    CHECK(error_text([&] { apply_setting(c, "colour", "red"); }).find("colour") != std::string::npos);
    CHECK(code_of([&] { apply_setting(c, "n", "ten"); }) == ErrorCode::Config);
    CHECK(code_of([&] { apply_setting(c, "methods", "LASSO"); }) == ErrorCode::Config);
    CHECK(code_of([&] { apply_setting(c, "format", "xml"); }) == ErrorCode::Config);
    CHECK(error_text([&] { apply_config_text(c, "n = 5\njust words\n"); }).find("line 2") != std::string::npos);
    CHECK(code_of([&] { load_config_file(c, "/nonexistent/somp.cfg"); }) == ErrorCode::Config);
    c.replicates = 0;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::Config);
    RunConfig fit;
    fit.mode = Mode::Fit;
    CHECK(code_of([&] { fit.validate(); }) == ErrorCode::Config);
}

TEST_CASE("CSV parse errors give row and column")
{
    std::istringstream bad("a,b\n1,2\n3,4\n5,x7\n");
    const auto msg = error_text([&] { (void)read_csv(bad, "X.csv"); });
    CHECK(msg.find("X.csv") != std::string::npos);
    CHECK(msg.find("row 3, column 2") != std::string::npos);
    std::istringstream ragged("a,b\n1,2\n3\n");
    CHECK(error_text([&] { (void)read_csv(ragged); }).find("row 2") != std::string::npos);
    std::istringstream empty("");
    CHECK(code_of([&] { (void)read_csv(empty); }) == ErrorCode::Parse);
    std::istringstream inf("a\ninf\n");
    CHECK(code_of([&] { (void)read_csv(inf); }) == ErrorCode::Parse);
}

TEST_CASE("CSV reading handles BOM, CRLF, blank lines and signs")
{
    std::istringstream in("\xEF\xBB\xBFx1, x2\r\n\r\n+1.5, -2e-3\r\n0,4\r\n");
    const auto t = read_csv(in);
    CHECK(t.header == std::vector<std::string>{"x1", "x2"});
    REQUIRE(t.values.rows() == 2);
    CHECK(t.values(0, 0) == 1.5);
    CHECK(t.values(0, 1) == -2e-3);
    CHECK(t.values(1, 1) == 4.0);
}

TEST_CASE("number formatting round-trips")
{
    std::mt19937_64 rng(60);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, static_cast<double>(i % 40) - 20.0);
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_fixed(66.66666, 1) == "66.7");
    CHECK(format_fixed(100.0, 1) == "100.0");
}

TEST_CASE("report CSV layout")
{
    AggregateReport r;
    r.method = "S-OMP";
    r.replicates = 4;
    r.union_support.covered.mean = 1.0;
    r.union_support.frac_correct_zeros.mean = 0.99875;
    r.union_support.frac_incorrect_zeros.mean = 0.0;
    r.union_support.exactly_fitted.mean = 0.75;
    r.union_support.support_size.mean = 10.25;
    r.exact_support.covered.mean = 0.5;
    r.exact_support.frac_correct_zeros.mean = 1.0;
    r.exact_support.frac_incorrect_zeros.mean = 0.125;
    r.exact_support.exactly_fitted.mean = 0.25;
    r.exact_support.support_size.mean = 999.5;
    r.estimation_error.mean = 0.5;
    r.r2_test.mean = 0.875;
    std::ostringstream out;
    write_report_csv(out, {r});
    CHECK(out.str() ==
          "section,method,replicates,coverage_pct,correct_zeros_pct,incorrect_zeros_pct,exactly_fitted_pct,"
          "support_size,estimation_error,r2\n"
          "union,S-OMP,4,100.0,99.9,0.0,75.0,10.25,-,-\n"
          "exact,S-OMP,4,50.0,100.0,12.5,25.0,999.5,0.5,0.875\n");
}

TEST_CASE("report JSON parses back exactly")
{
    const auto c = small_simulation();
    const auto result = run_simulation(c);
    std::stringstream buf;
    write_report_json(buf, c, result.reports);
    const auto back = parse_report_json(buf);
    REQUIRE(back.size() == result.reports.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].method == result.reports[i].method);
        CHECK(back[i].estimation_error.mean == result.reports[i].estimation_error.mean);
        CHECK(back[i].estimation_error.sd == result.reports[i].estimation_error.sd);
        CHECK(back[i].r2_test.mean == result.reports[i].r2_test.mean);
        CHECK(back[i].union_support.support_size.sd == result.reports[i].union_support.support_size.sd);
        CHECK(back[i].exact_support.frac_correct_zeros.mean == result.reports[i].exact_support.frac_correct_zeros.mean);
    }
    std::istringstream junk("{not json");
    CHECK(code_of([&] { (void)parse_report_json(junk); }) == ErrorCode::Parse);
}

TEST_CASE("one replicate equals the hand-chained pipeline")
{
    auto c = small_simulation();
    c.replicates = 1;
    const auto result = run_simulation(c);
    auto spec = c.simulation;
    spec.replicate = 0;
    const auto inst = generate(spec);
    REQUIRE(result.reports.size() == c.methods.size());
    for (std::size_t i = 0; i < c.methods.size(); ++i) {
        const auto est = run_pipeline(inst.train, c.methods[i], c.pipeline(1)).estimate;
        const auto want = aggregate({evaluate(inst.truth, est, inst.test)}, std::string(method_name(c.methods[i])));
        CHECK(result.reports[i].method == want.method);
        CHECK(result.reports[i].estimation_error.mean == want.estimation_error.mean);
        CHECK(result.reports[i].r2_test.mean == want.r2_test.mean);
        CHECK(result.reports[i].exact_support.support_size.mean == want.exact_support.support_size.mean);
    }
}

TEST_CASE("simulation output does not depend on the thread count")
{
    auto c = small_simulation();
    c.replicates = 6;
    auto render = [&](std::size_t threads) {
        c.threads = threads;
        const auto r = run_simulation(c);
        std::ostringstream out;
        write_report_csv(out, r.reports);
        write_report_json(out, c, r.reports);
        write_replicates_csv(out, r.records);
        return out.str();
    };
    const auto one = render(1);
    CHECK(one == render(4));
    CHECK(one == render(7));
}

TEST_CASE("screening CSV data follows the S-OMP path")
{
    std::mt19937_64 rng(61);
    const Matrix x = oracle::gaussian(rng, 50, 30);
    Matrix y(50, 3);
    for (Eigen::Index t = 0; t < 3; ++t) y.col(t) = 2.0 * x.col(4) - x.col(17) + 0.3 * oracle::gaussian(rng, 50);
    std::istringstream xs(table_text(x, "g")), ys(table_text(y, "trait"));
    const auto loaded = make_dataset(read_csv(xs), read_csv(ys), false);
    CHECK(loaded.variables[4] == "g5");
    RunConfig c;
    c.mode = Mode::Screen;
    const auto res = screen_dataset(loaded, c);
    const auto direct = run_somp(MultiTaskDataset::shared(x, {y.col(0), y.col(1), y.col(2)}));
    CHECK(res.path.steps.size() == direct.steps.size());
    for (std::size_t k = 0; k < direct.size(); ++k) {
        CHECK(res.path.steps[k].index == direct.steps[k].index);
        CHECK(oracle::relative_error(res.path.steps[k].rss, direct.steps[k].rss) < 1e-12);
    }
    CHECK(res.selection.support.same_elements(SupportSet({4, 17})));

    std::ostringstream out;
    write_screen_csv(out, loaded, res);
    std::istringstream lines(out.str());
    std::string header, first, second;
    std::getline(lines, header);
    std::getline(lines, first);
    std::getline(lines, second);
    CHECK(header == "step,variable,name,rss,bic,selected");
    CHECK(first.rfind("0,-,-,", 0) == 0);
    CHECK(second.rfind("1,5,g5,", 0) == 0);
}

TEST_CASE("a single response screens like OMP")
{
    std::mt19937_64 rng(62);
    const Matrix x = oracle::gaussian(rng, 30, 20);
    const Matrix y = oracle::gaussian(rng, 30, 1);
    std::istringstream xs(table_text(x, "x")), ys(table_text(y, "y"));
    const auto loaded = make_dataset(read_csv(xs), read_csv(ys), false);
    RunConfig c;
    c.mode = Mode::Screen;
    CHECK(screen_dataset(loaded, c).path == omp_single(MultiTaskDataset::shared(x, {y.col(0)}), 0));
}

TEST_CASE("fit recovers a planted coefficient")
{
    std::mt19937_64 rng(63);
    const Matrix x = oracle::gaussian(rng, 80, 10);
    Matrix y(80, 1);
    y.col(0) = 2.0 * x.col(0) + 0.01 * oracle::gaussian(rng, 80);
    std::istringstream xs(table_text(x, "x")), ys(table_text(y, "y"));
    const auto loaded = make_dataset(read_csv(xs), read_csv(ys), false);
    RunConfig c;
    c.mode = Mode::Fit;
    const auto fit = fit_dataset(loaded, c);
    CHECK(fit.estimate.get(0, 0) == doctest::Approx(2.0).epsilon(1e-2));
    CHECK(fit.estimate.nonzeros() == 1);
    CHECK(fit.tasks[0].support == std::vector<std::size_t>{0});

    std::stringstream csv;
    write_fit_csv(csv, loaded, fit);
    CHECK(read_fit_triples(csv, 10, 1) == fit.estimate);
}

TEST_CASE("a constant response is isolated")
{
    std::mt19937_64 rng(64);
    const Matrix x = oracle::gaussian(rng, 40, 8);
    Matrix y(40, 3);
    y.col(0) = x.col(2) + 0.1 * oracle::gaussian(rng, 40);
    y.col(1) = Vector::Constant(40, 5.0);
    y.col(2) = -x.col(6) + 0.1 * oracle::gaussian(rng, 40);
    std::istringstream xs(table_text(x, "x")), ys(table_text(y, "y"));
    const auto loaded = make_dataset(read_csv(xs), read_csv(ys), false);
    RunConfig c;
    c.mode = Mode::Fit;
    const auto fit = fit_dataset(loaded, c);
    REQUIRE(fit.tasks.size() == 3);
    CHECK(fit.tasks[1].error.has_value());
    CHECK_FALSE(fit.tasks[0].error.has_value());
    CHECK_FALSE(fit.tasks[2].error.has_value());
    CHECK(fit.estimate.get(2, 0) != 0.0);
    CHECK(fit.estimate.get(6, 2) != 0.0);
    CHECK(fit.estimate.column(1).isZero(0.0));
    CHECK(constant_tasks(loaded.data) == std::vector<std::size_t>{1});

    std::istringstream flat_x(table_text(x, "x")), flat_y(table_text(Matrix::Ones(40, 2), "y"));
    const auto flat = make_dataset(read_csv(flat_x), read_csv(flat_y), false);
    CHECK(code_of([&] { (void)screen_dataset(flat, c); }) == ErrorCode::ZeroVariance);
}

TEST_CASE("standardize centers and scales")
{
    Matrix x(4, 2);
    x << 1, 7, 2, 7, 3, 7, 4, 7;
    Matrix y(4, 1);
    y << 10, 11, 12, 13;
    std::istringstream xs(table_text(x, "x")), ys(table_text(y, "y"));
    const auto d = make_dataset(read_csv(xs), read_csv(ys), true).data;
    const Matrix& sx = d.design(0);
    CHECK(std::abs(sx.col(0).mean()) < 1e-15);
    CHECK(sx.col(0).squaredNorm() / 3.0 == doctest::Approx(1.0));
    CHECK(sx.col(1).isZero(0.0));
    CHECK(std::abs(d.response(0).mean()) < 1e-15);
}

TEST_CASE("mismatched row counts are data errors")
{
    std::istringstream xs("a\n1\n2\n3\n"), ys("b\n1\n2\n");
    CHECK(code_of([&] { (void)make_dataset(read_csv(xs), read_csv(ys), false); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("executable exit codes")
{
    TempDir dir;
    std::mt19937_64 rng(65);
    const Matrix x = oracle::gaussian(rng, 30, 6);
    Matrix y(30, 2);
    y.col(0) = x.col(1) + 0.1 * oracle::gaussian(rng, 30);
    y.col(1) = x.col(3) + 0.1 * oracle::gaussian(rng, 30);
    const auto xp = dir.file("x.csv", table_text(x, "x"));
    const auto yp = dir.file("y.csv", table_text(y, "y"));
    const auto bad = dir.file("bad.csv", "a,b\n1,2\n3,oops\n");
    const auto flat = dir.file("flat.csv", table_text(Matrix::Ones(30, 1), "y"));
    const auto cfg = dir.file("sim.cfg", "scenario = sim1\nn = 30\np = 40\ns = 2\nT = 3\nt_nonzero = 3\n"
                                         "snr = 5\nreplicates = 2\nmethods = S-OMP\n");
    const auto out = (dir.path / "fit.csv").string();

    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("") == 2);
    CHECK(run_cli("simulate --bogus") == 2);
    CHECK(run_cli("simulate --config /nonexistent.cfg") == 2);
    CHECK(run_cli("simulate --config " + cfg + " --set colour=red") == 2);
    CHECK(run_cli("simulate --config " + cfg + " --threads 2") == 0);
    CHECK(run_cli("screen --x " + xp + " --y " + bad) == 3);
    CHECK(run_cli("fit --x " + xp + " --y " + flat) == 4);
    CHECK(run_cli("fit --x " + xp + " --y " + yp + " -o " + out) == 0);
    std::ifstream in(out);
    CHECK(read_fit_triples(in, 6, 2).nonzeros() >= 2);
    CHECK(run_cli("screen --x " + xp + " --y " + yp + " --format json -o " + (dir.path / "s.json").string()) == 0);
    CHECK(fs::file_size(dir.path / "s.json") > 0);
}
