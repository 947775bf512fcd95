#include <somp/datamodel.hpp>
#include <somp/errors.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace somp {

namespace {

Error dimension_error(const std::string& what)
{
    return Error(ErrorCode::DimensionMismatch, what);
}

} // namespace

MultiTaskDataset MultiTaskDataset::shared(Matrix design, std::vector<Vector> responses)
{
    std::vector<std::shared_ptr<const Vector>> ys;
    ys.reserve(responses.size());
    for (auto& y : responses) ys.push_back(std::make_shared<const Vector>(std::move(y)));
    return shared(std::make_shared<const Matrix>(std::move(design)), std::move(ys));
}

MultiTaskDataset MultiTaskDataset::shared(std::shared_ptr<const Matrix> design,
                                          std::vector<std::shared_ptr<const Vector>> responses)
{
    MultiTaskDataset d;
    d.shared_ = true;
    d.n_ = static_cast<std::size_t>(design->rows());
    d.p_ = static_cast<std::size_t>(design->cols());
    d.designs_.push_back(std::move(design));
    d.responses_ = std::move(responses);
    d.validate();
    return d;
}

MultiTaskDataset MultiTaskDataset::per_task(std::vector<Matrix> designs, std::vector<Vector> responses)
{
    if (designs.size() != responses.size()) {
        throw dimension_error("per-task dataset needs one design per response (got " +
                              std::to_string(designs.size()) + " designs, " +
                              std::to_string(responses.size()) + " responses)");
    }
    MultiTaskDataset d;
    d.shared_ = false;
    if (!designs.empty()) {
        d.n_ = static_cast<std::size_t>(designs.front().rows());
        d.p_ = static_cast<std::size_t>(designs.front().cols());
    }
    for (auto& x : designs) d.designs_.push_back(std::make_shared<const Matrix>(std::move(x)));
    for (auto& y : responses) d.responses_.push_back(std::make_shared<const Vector>(std::move(y)));
    d.validate();
    return d;
}

void MultiTaskDataset::validate() const
{
    if (n_ == 0 || p_ == 0) throw dimension_error("dataset needs n >= 1 and p >= 1");
    if (responses_.empty()) throw dimension_error("dataset needs at least one task");
    for (const auto& x : designs_) {
        if (static_cast<std::size_t>(x->rows()) != n_ || static_cast<std::size_t>(x->cols()) != p_) {
            throw dimension_error("all designs must be " + std::to_string(n_) + "x" + std::to_string(p_));
        }
    }
    for (std::size_t t = 0; t < responses_.size(); ++t) {
        if (static_cast<std::size_t>(responses_[t]->size()) != n_) {
            throw dimension_error("response " + std::to_string(t + 1) + " has length " +
                                  std::to_string(responses_[t]->size()) + ", expected " +
                                  std::to_string(n_));
        }
    }
}

const Matrix& MultiTaskDataset::design(std::size_t task) const
{
    return *design_ptr(task);
}

const Vector& MultiTaskDataset::response(std::size_t task) const
{
    return *response_ptr(task);
}

std::shared_ptr<const Matrix> MultiTaskDataset::design_ptr(std::size_t task) const
{
    if (task >= tasks()) throw std::out_of_range("task index out of range");
    return shared_ ? designs_.front() : designs_[task];
}

std::shared_ptr<const Vector> MultiTaskDataset::response_ptr(std::size_t task) const
{
    if (task >= tasks()) throw std::out_of_range("task index out of range");
    return responses_[task];
}

MultiTaskDataset MultiTaskDataset::task_view(std::size_t task) const
{
    return select_tasks({task});
}

MultiTaskDataset MultiTaskDataset::select_tasks(const std::vector<std::size_t>& tasks) const
{
    MultiTaskDataset d;
    d.n_ = n_;
    d.p_ = p_;
    d.shared_ = shared_;
    if (shared_) d.designs_.push_back(designs_.front());
    for (auto t : tasks) {
        if (!shared_) d.designs_.push_back(design_ptr(t));
        d.responses_.push_back(response_ptr(t));
    }
    d.validate();
    return d;
}

// ---------------------------------------------------------------------------

SupportSet::SupportSet(std::vector<std::size_t> indices)
{
    indices_.reserve(indices.size());
    for (auto j : indices) insert(j);
}

void SupportSet::insert(std::size_t index)
{
    if (contains(index)) {
        throw std::invalid_argument("duplicate variable index " + std::to_string(index));
    }
    indices_.push_back(index);
}

bool SupportSet::contains(std::size_t index) const
{
    return std::find(indices_.begin(), indices_.end(), index) != indices_.end();
}

std::vector<std::size_t> SupportSet::sorted() const
{
    auto out = indices_;
    std::sort(out.begin(), out.end());
    return out;
}

SupportSet SupportSet::prefix(std::size_t k) const
{
    if (k > indices_.size()) throw std::out_of_range("support prefix longer than support");
    SupportSet s;
    s.indices_.assign(indices_.begin(), indices_.begin() + static_cast<std::ptrdiff_t>(k));
    return s;
}

void SupportSet::check_bounds(std::size_t p) const
{
    for (auto j : indices_) {
        if (j >= p) {
            throw dimension_error("variable index " + std::to_string(j + 1) + " exceeds p = " +
                                  std::to_string(p));
        }
    }
}

bool SupportSet::same_elements(const SupportSet& other) const
{
    return sorted() == other.sorted();
}

SupportSet SelectionPath::support(std::size_t k) const
{
    if (k > steps.size()) throw std::out_of_range("path prefix longer than path");
    SupportSet s;
    for (std::size_t i = 0; i < k; ++i) s.insert(steps[i].index);
    return s;
}

// ---------------------------------------------------------------------------

CoefficientMatrix::CoefficientMatrix(std::size_t p, std::size_t tasks) : p_(p), tasks_(tasks) {}

void CoefficientMatrix::check(std::size_t variable, std::size_t task) const
{
    if (variable >= p_ || task >= tasks_) {
        throw std::out_of_range("coefficient (" + std::to_string(variable) + ", " +
                                std::to_string(task) + ") outside " + std::to_string(p_) + "x" +
                                std::to_string(tasks_));
    }
}

void CoefficientMatrix::set(std::size_t variable, std::size_t task, double value)
{
    check(variable, task);
    if (!std::isfinite(value)) throw std::invalid_argument("non-finite coefficient");
    const auto key = std::make_pair(variable, task);
    if (std::abs(value) < coefficient_zero_threshold) {
        entries_.erase(key);
    } else {
        entries_[key] = value;
    }
}

double CoefficientMatrix::get(std::size_t variable, std::size_t task) const
{
    check(variable, task);
    auto it = entries_.find({variable, task});
    return it == entries_.end() ? 0.0 : it->second;
}

Vector CoefficientMatrix::column(std::size_t task) const
{
    if (task >= tasks_) throw std::out_of_range("task index out of range");
    Vector v = Vector::Zero(static_cast<Eigen::Index>(p_));
    for (const auto& [key, value] : entries_) {
        if (key.second == task) v[static_cast<Eigen::Index>(key.first)] = value;
    }
    return v;
}

SupportSet union_support(const CoefficientMatrix& b)
{
    // entries are ordered by variable first, so rows come out ascending
    SupportSet s;
    std::size_t last = static_cast<std::size_t>(-1);
    for (const auto& [key, value] : b.entries()) {
        if (key.first != last) {
            s.insert(key.first);
            last = key.first;
        }
    }
    return s;
}

std::set<std::pair<std::size_t, std::size_t>> exact_support(const CoefficientMatrix& b)
{
    std::set<std::pair<std::size_t, std::size_t>> out;
    for (const auto& [key, value] : b.entries()) out.insert(key);
    return out;
}

TrueModel::TrueModel(CoefficientMatrix coefs, double sigma)
    : coefficients(std::move(coefs)), relevant_set(union_support(coefficients)), noise_sigma(sigma)
{
    if (!(sigma > 0.0)) throw std::invalid_argument("noise sigma must be positive");
}

} // namespace somp
