#pragma once

#include <somp/datamodel.hpp>

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace somp {

struct ProjectorOptions
{
    /// Residualized squared column norms at or below this are treated as
    /// collinear with the current model. 0 selects the default 1e-10 * n.
    double column_tolerance = 0.0;
    /// Expected maximal model size, used to preallocate. 0 selects min(n, p).
    std::size_t capacity = 0;
    /// Workers for column scans inside one extension step.
    std::size_t threads = 1;
};

double default_column_tolerance(std::size_t n);

/**
 * Progressive Cholesky factorization of the Gram matrix of a growing set of
 * selected columns of one design X (n x p).
 *
 * Besides L (L L' = X_M' X_M) the factor keeps W = L^{-1} X_M' X, one row per
 * selected variable, so that for every candidate column j the squared norm of
 * X_j residualized against X_M is ||X_j||^2 - ||W_{.,j}||^2. Each extension
 * costs O(np + kp) and appends one row to L and to W.
 */
class GramFactor
{
public:
    GramFactor(std::shared_ptr<const Matrix> design, const ProjectorOptions& options);

    std::size_t n() const noexcept { return static_cast<std::size_t>(design_->rows()); }
    std::size_t p() const noexcept { return static_cast<std::size_t>(design_->cols()); }
    std::size_t size() const noexcept { return selected_.size(); }
    const SupportSet& selected() const noexcept { return selected_; }
    bool in_model(std::size_t j) const { return in_model_.at(j) != 0; }
    const Matrix& design() const noexcept { return *design_; }
    double column_tolerance() const noexcept { return tolerance_; }

    /// ||(I - H_M) X_j||^2; zero for selected columns.
    double residual_norm_sq(std::size_t j) const { return residual_sq_[j]; }
    std::span<const double> residual_norms_sq() const noexcept { return residual_sq_; }
    bool degenerate(std::size_t j) const { return residual_sq_[j] <= tolerance_; }

    /// Adds column j. Throws Error(DegenerateColumn) when its residualized norm
    /// is at or below the tolerance.
    void extend(std::size_t j, std::size_t threads = 1);

    /// Row of W appended by the most recent extend (length p).
    std::span<const double> last_row() const;
    /// Diagonal entry of L appended by the most recent extend.
    double last_pivot() const;

    /// L as a dense k x k lower-triangular matrix.
    Matrix lower() const;

private:
    std::shared_ptr<const Matrix> design_;
    double tolerance_;
    SupportSet selected_;
    std::vector<char> in_model_;
    std::vector<double> residual_sq_;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w_;
    Matrix l_;
};

/**
 * Least-squares state of one task against a (possibly shared) GramFactor.
 *
 * Holds z with L z = X_M' y, the current RSS = ||y||^2 - z'z, and the residual
 * correlations X_j' r for every column j, updated in O(p) per extension.
 */
class CholeskyState
{
public:
    CholeskyState(std::shared_ptr<GramFactor> factor, std::shared_ptr<const Vector> response);

    std::size_t size() const noexcept { return z_.size(); }
    const SupportSet& selected() const noexcept { return factor_->selected(); }
    const GramFactor& factor() const noexcept { return *factor_; }
    bool shares_factor_with(const CholeskyState& other) const noexcept
    {
        return factor_ == other.factor_;
    }

    double rss() const noexcept { return rss_; }
    double response_sq_norm() const noexcept { return response_sq_; }

    /// X_j' r for the current residual r.
    double residual_correlation(std::size_t j) const { return correlation_[j]; }

    /// RSS(M) - RSS(M + j) for this task. Zero for degenerate candidates.
    /// Throws std::out_of_range for j >= p, std::invalid_argument if j is selected.
    double candidate_gain(std::size_t j) const;
    bool degenerate(std::size_t j) const { return factor_->degenerate(j); }

    /// Extends the model by j. Only valid when this state is the sole owner of
    /// its factor; multi-task code goes through Projector.
    void extend(std::size_t j);

    /// OLS coefficients on the selected columns, in selection order.
    /// Throws Error(EmptyModel) when nothing is selected.
    Vector coefficients() const;

    Matrix lower() const { return factor_->lower(); }

private:
    friend class Projector;
    /// Applies the factor's most recent extension to this task.
    void absorb_last_step();

    std::shared_ptr<GramFactor> factor_;
    std::shared_ptr<const Vector> response_;
    std::vector<double> z_;
    double rss_ = 0.0;
    double response_sq_ = 0.0;
    std::vector<double> correlation_;
};

/// Empty-model state for one task with its own factor.
CholeskyState init_state(const MultiTaskDataset& data, std::size_t task,
                         const ProjectorOptions& options = {});

/// Sum over tasks of candidate_gain(j). All states must share the same
/// selected set (std::invalid_argument otherwise).
double batched_gains(std::span<const CholeskyState> states, std::size_t j);

/**
 * All tasks of a dataset, extended in lockstep. In shared-design mode a single
 * GramFactor serves every task, so the O(np) column work is done once per step.
 */
class Projector
{
public:
    explicit Projector(const MultiTaskDataset& data, const ProjectorOptions& options = {});

    std::size_t tasks() const noexcept { return states_.size(); }
    std::size_t p() const noexcept { return factors_.front()->p(); }
    std::size_t size() const noexcept { return factors_.front()->size(); }
    const SupportSet& selected() const noexcept { return factors_.front()->selected(); }
    const CholeskyState& state(std::size_t task) const { return states_.at(task); }
    std::span<const CholeskyState> states() const noexcept { return states_; }

    double total_rss() const;
    double total_response_sq_norm() const;

    bool selectable(std::size_t j) const;
    double total_gain(std::size_t j) const { return batched_gains(states_, j); }

    /// out[j - begin] = total gain of j for j in [begin, end), or -infinity
    /// for selected and degenerate columns. Safe to call concurrently on
    /// disjoint ranges.
    void total_gains(std::size_t begin, std::size_t end, std::span<double> out) const;

    void extend(std::size_t j);

    Vector coefficients(std::size_t task) const { return states_.at(task).coefficients(); }

private:
    std::vector<std::shared_ptr<GramFactor>> factors_;
    std::vector<CholeskyState> states_;
    std::size_t threads_;
};

} // namespace somp
