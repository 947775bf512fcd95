#include <somp/projector.hpp>

#include <somp/errors.hpp>
#include <somp/numerics.hpp>

#include <cmath>
#include <limits>
#include <string>

namespace somp {

namespace {

std::span<const double> column_span(const Matrix& x, std::size_t j)
{
    return {x.col(static_cast<Eigen::Index>(j)).data(), static_cast<std::size_t>(x.rows())};
}

constexpr std::size_t min_columns_per_worker = 512;

} // namespace

double default_column_tolerance(std::size_t n)
{
    return 1e-10 * static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// GramFactor

GramFactor::GramFactor(std::shared_ptr<const Matrix> design, const ProjectorOptions& options)
    : design_(std::move(design))
{
    const std::size_t cols = p();
    tolerance_ = options.column_tolerance > 0.0 ? options.column_tolerance : default_column_tolerance(n());
    const std::size_t capacity =
        options.capacity > 0 ? options.capacity : std::min(n(), cols);
    in_model_.assign(cols, 0);
    residual_sq_.resize(cols);
    for (std::size_t j = 0; j < cols; ++j) {
        residual_sq_[j] = pairwise_sum_squares(column_span(*design_, j));
    }
    w_.resize(static_cast<Eigen::Index>(capacity), static_cast<Eigen::Index>(cols));
    l_.setZero(static_cast<Eigen::Index>(capacity), static_cast<Eigen::Index>(capacity));
}

void GramFactor::extend(std::size_t j, std::size_t threads)
{
    if (j >= p()) throw std::out_of_range("variable index " + std::to_string(j) + " out of range");
    if (in_model_[j]) throw std::invalid_argument("variable " + std::to_string(j) + " already selected");
    if (degenerate(j)) {
        throw Error(ErrorCode::DegenerateColumn,
                    "column " + std::to_string(j + 1) +
                        " is collinear with the selected columns (residual norm^2 " +
                        std::to_string(residual_sq_[j]) + ")");
    }

    const auto k = static_cast<Eigen::Index>(size());
    if (k == w_.rows()) {
        const Eigen::Index grown = std::max<Eigen::Index>(2 * k, 1);
        w_.conservativeResize(grown, Eigen::NoChange);
        Matrix l = Matrix::Zero(grown, grown);
        l.topLeftCorner(k, k) = l_.topLeftCorner(k, k);
        l_ = std::move(l);
    }

    const double pivot = std::sqrt(residual_sq_[j]);
    const auto jj = static_cast<Eigen::Index>(j);
    for (Eigen::Index i = 0; i < k; ++i) l_(k, i) = w_(i, jj);
    l_(k, k) = pivot;

    // new row of W: (X_j' X - W_{.,j}' W) / pivot, column by column
    const Matrix& x = *design_;
    const auto xj = column_span(x, j);
    double* row = w_.row(k).data();
    parallel_chunks(p(), threads, min_columns_per_worker, [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) row[c] = pairwise_dot(column_span(x, c), xj);
        for (Eigen::Index i = 0; i < k; ++i) {
            const double a = w_(i, jj);
            const double* prev = w_.row(i).data();
            for (std::size_t c = begin; c < end; ++c) row[c] -= prev[c] * a;
        }
        for (std::size_t c = begin; c < end; ++c) {
            row[c] /= pivot;
            residual_sq_[c] -= row[c] * row[c];
        }
    });
    residual_sq_[j] = 0.0;
    in_model_[j] = 1;
    selected_.insert(j);
}

std::span<const double> GramFactor::last_row() const
{
    if (size() == 0) throw std::logic_error("no extension performed yet");
    return {w_.row(static_cast<Eigen::Index>(size() - 1)).data(), p()};
}

double GramFactor::last_pivot() const
{
    if (size() == 0) throw std::logic_error("no extension performed yet");
    const auto k = static_cast<Eigen::Index>(size() - 1);
    return l_(k, k);
}

Matrix GramFactor::lower() const
{
    const auto k = static_cast<Eigen::Index>(size());
    return l_.topLeftCorner(k, k);
}

// ---------------------------------------------------------------------------
// CholeskyState

CholeskyState::CholeskyState(std::shared_ptr<GramFactor> factor, std::shared_ptr<const Vector> response)
    : factor_(std::move(factor)), response_(std::move(response))
{
    if (factor_->size() != 0) throw std::logic_error("CholeskyState needs an empty factor");
    const Matrix& x = factor_->design();
    if (response_->size() != x.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "response length does not match design rows");
    }
    const std::span<const double> y{response_->data(), static_cast<std::size_t>(response_->size())};
    response_sq_ = pairwise_sum_squares(y);
    rss_ = response_sq_;
    correlation_.resize(factor_->p());
    for (std::size_t j = 0; j < correlation_.size(); ++j) {
        correlation_[j] = pairwise_dot(column_span(x, j), y);
    }
}

double CholeskyState::candidate_gain(std::size_t j) const
{
    if (j >= correlation_.size()) {
        throw std::out_of_range("variable index " + std::to_string(j) + " out of range");
    }
    if (factor_->in_model(j)) {
        throw std::invalid_argument("variable " + std::to_string(j) + " already selected");
    }
    if (factor_->degenerate(j)) return 0.0;
    const double r = correlation_[j];
    return r * r / factor_->residual_norm_sq(j);
}

void CholeskyState::extend(std::size_t j)
{
    if (factor_.use_count() > 1) {
        throw std::logic_error("CholeskyState::extend on a shared factor; use Projector");
    }
    factor_->extend(j);
    absorb_last_step();
}

void CholeskyState::absorb_last_step()
{
    if (factor_->size() != z_.size() + 1) throw std::logic_error("factor and task state out of step");
    const std::size_t j = factor_->selected()[factor_->size() - 1];
    const double zk = correlation_[j] / factor_->last_pivot();
    z_.push_back(zk);
    rss_ = std::max(rss_ - zk * zk, 0.0);
    const auto row = factor_->last_row();
    for (std::size_t c = 0; c < correlation_.size(); ++c) correlation_[c] -= row[c] * zk;
    correlation_[j] = 0.0;
}

Vector CholeskyState::coefficients() const
{
    const std::size_t k = size();
    if (k == 0) throw Error(ErrorCode::EmptyModel, "no variables selected");
    // L' beta = z
    const Matrix l = factor_->lower();
    Vector z(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) z[static_cast<Eigen::Index>(i)] = z_[i];
    return l.transpose().triangularView<Eigen::Upper>().solve(z);
}

CholeskyState init_state(const MultiTaskDataset& data, std::size_t task, const ProjectorOptions& options)
{
    auto factor = std::make_shared<GramFactor>(data.design_ptr(task), options);
    return CholeskyState(std::move(factor), data.response_ptr(task));
}

double batched_gains(std::span<const CholeskyState> states, std::size_t j)
{
    if (states.empty()) return 0.0;
    const auto& first = states.front();
    for (const auto& s : states.subspan(1)) {
        if (!s.shares_factor_with(first) && s.selected() != first.selected()) {
            throw std::invalid_argument("batched_gains: task states have different supports");
        }
    }
    double total = 0.0;
    for (const auto& s : states) total += s.candidate_gain(j);
    return total;
}

// ---------------------------------------------------------------------------
// Projector

Projector::Projector(const MultiTaskDataset& data, const ProjectorOptions& options)
    : threads_(std::max<std::size_t>(options.threads, 1))
{
    if (data.shared_design()) {
        factors_.push_back(std::make_shared<GramFactor>(data.design_ptr(0), options));
    } else {
        for (std::size_t t = 0; t < data.tasks(); ++t) {
            factors_.push_back(std::make_shared<GramFactor>(data.design_ptr(t), options));
        }
    }
    states_.reserve(data.tasks());
    for (std::size_t t = 0; t < data.tasks(); ++t) {
        states_.emplace_back(factors_[factors_.size() == 1 ? 0 : t], data.response_ptr(t));
    }
}

double Projector::total_rss() const
{
    double total = 0.0;
    for (const auto& s : states_) total += s.rss();
    return total;
}

double Projector::total_response_sq_norm() const
{
    double total = 0.0;
    for (const auto& s : states_) total += s.response_sq_norm();
    return total;
}

bool Projector::selectable(std::size_t j) const
{
    for (const auto& f : factors_) {
        if (f->in_model(j) || f->degenerate(j)) return false;
    }
    return true;
}

void Projector::total_gains(std::size_t begin, std::size_t end, std::span<double> out) const
{
    if (end < begin || end > p() || out.size() < end - begin) {
        throw std::out_of_range("total_gains: bad range");
    }
    constexpr double excluded = -std::numeric_limits<double>::infinity();
    for (std::size_t c = begin; c < end; ++c) out[c - begin] = 0.0;
    // accumulate task by task; same summation order as batched_gains
    for (const auto& s : states_) {
        const auto& f = s.factor();
        const auto resid = f.residual_norms_sq();
        for (std::size_t c = begin; c < end; ++c) {
            double& g = out[c - begin];
            if (g == excluded) continue;
            if (f.in_model(c) || resid[c] <= f.column_tolerance()) {
                g = excluded;
                continue;
            }
            const double r = s.residual_correlation(c);
            g += r * r / resid[c];
        }
    }
}

void Projector::extend(std::size_t j)
{
    if (j >= p()) throw std::out_of_range("variable index " + std::to_string(j) + " out of range");
    // validate on every factor before mutating any of them
    for (const auto& f : factors_) {
        if (f->in_model(j)) throw std::invalid_argument("variable " + std::to_string(j) + " already selected");
        if (f->degenerate(j)) {
            throw Error(ErrorCode::DegenerateColumn,
                        "column " + std::to_string(j + 1) + " is collinear with the selected columns");
        }
    }
    for (const auto& f : factors_) f->extend(j, factors_.size() == 1 ? threads_ : 1);
    parallel_chunks(states_.size(), factors_.size() == 1 ? threads_ : 1, 8,
                    [&](std::size_t begin, std::size_t end) {
                        for (std::size_t t = begin; t < end; ++t) states_[t].absorb_last_step();
                    });
}

} // namespace somp
