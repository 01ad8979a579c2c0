#pragma once

#include <span>
#include <utility>
#include <vector>

namespace wlslab {

/// Truncated Brownian bridge on [0,1] in the Schauder (Levy-Ciesielski)
/// expansion: b_J(x, y) = tau * sum_{l<=L} sum_k y_{l,k} psi_{l,k}(x) with
/// psi_{l,k}(x) = 2^{-l/2} psi(2^l x - k), psi(x) = max(1/2 - |x - 1/2|, 0).
/// Basis functions are enumerated flat as j = 2^l + k, so levels 0..L give
/// J = 2^{L+1} - 1 functions. b_J(.,y) is piecewise linear with breakpoints
/// on the dyadic grid of step 2^{-(L+1)}.
class SchauderField {
public:
    explicit SchauderField(int max_level, double tau = 1.0);

    int max_level() const { return max_level_; }
    double tau() const { return tau_; }
    int function_count() const { return function_count_; }  // J

    /// Decodes a flat index j = 2^l + k into (level l, shift k).
    static std::pair<int, int> decode(int j);

    /// psi_{l,k}(x) for the (l,k) decoded from j. Unscaled by tau.
    /// Requires 1 <= j <= J and 0 <= x <= 1.
    double eval_basis(int j, double x) const;

    /// b_J(x, y) using the first J entries of y (y may be longer).
    /// Evaluated in O(L) by visiting the single active hat per level.
    double eval_field(std::span<const double> y, double x) const;

    /// The dyadic grid {i * 2^{-(L+1)} : i = 0..2^{L+1}}; the field is
    /// linear between consecutive points for every y.
    std::vector<double> breakpoints() const;

    /// sup_x |b_J(x, y)|, exact (attained at a breakpoint).
    double sup_abs(std::span<const double> y) const;

private:
    int max_level_;
    double tau_;
    int function_count_;
};

}  // namespace wlslab
