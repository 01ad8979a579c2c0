#include "wlslab/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wlslab {

namespace {

inline double mother_hat(double x) {
    return std::max(0.5 - std::abs(x - 0.5), 0.0);
}

}  // namespace

SchauderField::SchauderField(int max_level, double tau)
    : max_level_(max_level), tau_(tau) {
    if (max_level < 0 || max_level > 30)
        throw std::invalid_argument("SchauderField: level out of range");
    if (!(tau > 0.0))
        throw std::invalid_argument("SchauderField: tau must be positive");
    function_count_ = (1 << (max_level + 1)) - 1;
}

std::pair<int, int> SchauderField::decode(int j) {
    int level = 0;
    while ((2 << level) <= j) ++level;
    return {level, j - (1 << level)};
}

double SchauderField::eval_basis(int j, double x) const {
    if (j < 1 || j > function_count_)
        throw std::out_of_range("SchauderField: flat index out of range");
    if (x < 0.0 || x > 1.0)
        throw std::out_of_range("SchauderField: point outside [0,1]");
    const auto [level, shift] = decode(j);
    return std::exp2(-0.5 * level) * mother_hat(std::exp2(level) * x - shift);
}

double SchauderField::eval_field(std::span<const double> y, double x) const {
    if (static_cast<int>(y.size()) < function_count_)
        throw std::out_of_range("SchauderField: parameter vector too short");
    if (x < 0.0 || x > 1.0)
        throw std::out_of_range("SchauderField: point outside [0,1]");
    double sum = 0.0;
    for (int level = 0; level <= max_level_; ++level) {
        // Only the hat containing x is active on this level.
        const double scaled = std::exp2(level) * x;
        const int shift = std::min(static_cast<int>(scaled), (1 << level) - 1);
        const int j = (1 << level) + shift;
        sum += y[j - 1] * std::exp2(-0.5 * level) * mother_hat(scaled - shift);
    }
    return tau_ * sum;
}

std::vector<double> SchauderField::breakpoints() const {
    const int count = 1 << (max_level_ + 1);
    std::vector<double> grid(count + 1);
    const double step = 1.0 / count;
    for (int i = 0; i <= count; ++i) grid[i] = i * step;
    return grid;
}

double SchauderField::sup_abs(std::span<const double> y) const {
    double best = 0.0;
    for (const double x : breakpoints())
        best = std::max(best, std::abs(eval_field(y, x)));
    return best;
}

}  // namespace wlslab
