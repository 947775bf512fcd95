#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <utility>
#include <vector>

namespace somp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Solver output below this magnitude is stored as an exact zero.
inline constexpr double coefficient_zero_threshold = 1e-12;

/**
 * Designs and responses for T regression tasks sharing n samples and p
 * variables. Either every task regresses on one shared design (Y = XB + W),
 * or each task carries its own design of identical shape.
 *
 * Copies are cheap: matrices are held by shared, immutable pointers.
 */
class MultiTaskDataset
{
public:
    static MultiTaskDataset shared(Matrix design, std::vector<Vector> responses);
    static MultiTaskDataset per_task(std::vector<Matrix> designs, std::vector<Vector> responses);

    /// Shares the existing design storage; only the responses are new.
    static MultiTaskDataset shared(std::shared_ptr<const Matrix> design,
                                   std::vector<std::shared_ptr<const Vector>> responses);

    std::size_t n() const noexcept { return n_; }
    std::size_t p() const noexcept { return p_; }
    std::size_t tasks() const noexcept { return responses_.size(); }
    bool shared_design() const noexcept { return shared_; }

    const Matrix& design(std::size_t task) const;
    const Vector& response(std::size_t task) const;
    std::shared_ptr<const Matrix> design_ptr(std::size_t task) const;
    std::shared_ptr<const Vector> response_ptr(std::size_t task) const;

    /// Dataset holding a single task of this one; storage is shared.
    MultiTaskDataset task_view(std::size_t task) const;

    /// Subset of tasks, in the given order; storage is shared.
    MultiTaskDataset select_tasks(const std::vector<std::size_t>& tasks) const;

private:
    MultiTaskDataset() = default;
    void validate() const;

    std::size_t n_ = 0;
    std::size_t p_ = 0;
    bool shared_ = true;
    std::vector<std::shared_ptr<const Matrix>> designs_;
    std::vector<std::shared_ptr<const Vector>> responses_;
};

/// Ordered set of distinct variable indices. Preserves insertion order.
class SupportSet
{
public:
    SupportSet() = default;
    explicit SupportSet(std::vector<std::size_t> indices);

    void insert(std::size_t index);
    bool contains(std::size_t index) const;

    std::size_t size() const noexcept { return indices_.size(); }
    bool empty() const noexcept { return indices_.empty(); }
    std::size_t operator[](std::size_t i) const { return indices_[i]; }
    auto begin() const noexcept { return indices_.begin(); }
    auto end() const noexcept { return indices_.end(); }

    const std::vector<std::size_t>& indices() const noexcept { return indices_; }
    std::vector<std::size_t> sorted() const;

    /// First k indices in insertion order.
    SupportSet prefix(std::size_t k) const;

    /// Throws DimensionMismatch if any index is >= p.
    void check_bounds(std::size_t p) const;

    /// Set equality, ignoring order.
    bool same_elements(const SupportSet& other) const;

    friend bool operator==(const SupportSet&, const SupportSet&) = default;

private:
    std::vector<std::size_t> indices_;
};

struct PathStep
{
    std::size_t index;  // variable added at this step
    double rss;         // total RSS after the step
    double bic;

    friend bool operator==(const PathStep&, const PathStep&) = default;
};

/// Nested models M(0) ⊂ M(1) ⊂ ... produced by a greedy forward pass.
struct SelectionPath
{
    double rss_empty = 0.0;
    double bic_empty = 0.0;
    std::vector<PathStep> steps;
    /// Variables excluded at some step because their residualized column was
    /// numerically zero (collinear with the current model).
    std::size_t degenerate_skips = 0;

    std::size_t size() const noexcept { return steps.size(); }
    double rss_at(std::size_t k) const { return k == 0 ? rss_empty : steps.at(k - 1).rss; }
    double bic_at(std::size_t k) const { return k == 0 ? bic_empty : steps.at(k - 1).bic; }
    SupportSet support(std::size_t k) const;

    friend bool operator==(const SelectionPath&, const SelectionPath&) = default;
};

/// Sparse p x T coefficient matrix. Absent entries are exactly zero.
class CoefficientMatrix
{
public:
    CoefficientMatrix(std::size_t p, std::size_t tasks);

    std::size_t p() const noexcept { return p_; }
    std::size_t tasks() const noexcept { return tasks_; }

    /// Stores value at (variable, task); magnitudes below
    /// coefficient_zero_threshold erase the entry. Non-finite values throw.
    void set(std::size_t variable, std::size_t task, double value);
    double get(std::size_t variable, std::size_t task) const;

    /// Nonzero entries keyed by (variable, task), in ascending order.
    const std::map<std::pair<std::size_t, std::size_t>, double>& entries() const noexcept
    {
        return entries_;
    }
    std::size_t nonzeros() const noexcept { return entries_.size(); }

    Vector column(std::size_t task) const;

    friend bool operator==(const CoefficientMatrix&, const CoefficientMatrix&) = default;

private:
    void check(std::size_t variable, std::size_t task) const;

    std::size_t p_;
    std::size_t tasks_;
    std::map<std::pair<std::size_t, std::size_t>, double> entries_;
};

/// Rows with at least one nonzero entry, ascending.
SupportSet union_support(const CoefficientMatrix& b);

/// All (variable, task) positions with a nonzero entry.
std::set<std::pair<std::size_t, std::size_t>> exact_support(const CoefficientMatrix& b);

struct TrueModel
{
    TrueModel(CoefficientMatrix coefficients, double noise_sigma);

    CoefficientMatrix coefficients;
    SupportSet relevant_set;  // union support of coefficients
    double noise_sigma;
};

} // namespace somp
