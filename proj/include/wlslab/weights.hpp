#pragma once

#include <span>
#include <vector>

#include "wlslab/multiindex.hpp"

namespace wlslab {

/// Per-variable weight sequence rho_i for the Schauder enumeration
/// i = 1..2^{L+1}-1, built as rho_i = rho~_i * ln2 / (2 * C * sqrt(r) * tau)
/// with rho~_i = 2^{beta * floor(log2 i)} constant within a level and
/// C = sup_x sum_i rho~_i |psi_i(x)| evaluated exactly on the dyadic grid.
/// The normalization forces sup_x sum_i rho_i * |tau psi_i(x)| = ln2/(2 sqrt r),
/// half the admissible bound ln2/sqrt(r).
class RhoSequence {
public:
    static RhoSequence build(double beta, int max_level, int r, double tau);

    double beta() const { return beta_; }
    int max_level() const { return max_level_; }
    int r() const { return r_; }
    double tau() const { return tau_; }
    /// The exact grid supremum C of sum_i rho~_i psi_i.
    double normalizer() const { return normalizer_; }

    std::size_t size() const { return values_.size(); }
    /// rho_j, 1-based.
    double value(int position) const { return values_.at(position - 1); }
    std::span<const double> values() const { return values_; }

    /// Element-wise rescaled copy (the tau-compensation map).
    RhoSequence rescaled(double factor) const;

private:
    RhoSequence() = default;
    double beta_ = 0.0;
    int max_level_ = 0;
    int r_ = 1;
    double tau_ = 1.0;
    double normalizer_ = 0.0;
    std::vector<double> values_;
};

/// The weight xi_nu = prod_j sum_{l=0}^{r} binom(nu_j, l) rho_j^{2l}, kept in
/// the log domain so deep indices cannot overflow. Always >= 1, with equality
/// exactly at the zero index.
class XiWeight {
public:
    XiWeight(double log_value, MultiIndex index)
        : log_value_(log_value), index_(std::move(index)) {}

    double log_value() const { return log_value_; }
    /// May round to +inf past the double range; comparisons should use
    /// log_value().
    double value() const;
    const MultiIndex& index() const { return index_; }

private:
    double log_value_;
    MultiIndex index_;
};

XiWeight xi(const MultiIndex& nu, const RhoSequence& rho);

/// Selection order used to grow index sets: ascending xi, ties broken by the
/// canonical order. A linear extension of the componentwise partial order.
bool selection_less(const MultiIndex& a, const MultiIndex& b, const RhoSequence& rho);

/// Downward-closed set of exactly n indices grown greedily through the
/// reduced margin, always taking the smallest xi (canonical tie-break).
/// Monotonicity of xi makes the greedy choice globally exact. Members are
/// emitted in the canonical weighted order (degree, xi, reverse-lex).
IndexSet build_lambda(int n, const RhoSequence& rho, int variable_budget);

}  // namespace wlslab
