#pragma once

#include <span>
#include <vector>

#include "wlslab/multiindex.hpp"

namespace wlslab {

/// Probabilists' Hermite polynomials H_k, normalized to unit L2 norm against
/// the standard Gaussian density g(t) = exp(-t^2/2)/sqrt(2*pi). Evaluation
/// uses the stable normalized three-term recurrence
///   H_{k+1}(t) = (t*H_k(t) - sqrt(k)*H_{k-1}(t)) / sqrt(k+1).
class HermiteEvaluator {
public:
    static constexpr int kMaxSupportedDegree = 200;

    explicit HermiteEvaluator(int max_degree);

    int max_degree() const { return max_degree_; }

    /// H_k(t) for 0 <= k <= max_degree.
    double eval_univariate(int k, double t) const;

    /// Fills out[k] = H_k(t) for k = 0..out.size()-1 (size <= max_degree+1).
    void eval_all(double t, std::span<double> out) const;

    /// Tensorized value H_nu(y) = prod_j H_{nu_j}(y_j); factors with
    /// nu_j = 0 are skipped. Requires support(nu) within 1..y.size().
    double eval_tensor(const MultiIndex& nu, std::span<const double> y) const;

private:
    int max_degree_;
};

struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;  // sums to 1
};

/// Gauss-Hermite rule with q nodes for the probabilists' weight g(t),
/// exact for polynomials of degree <= 2q-1. Nodes come from the symmetric
/// tridiagonal Jacobi matrix eigenproblem (Golub-Welsch).
GaussHermiteRule gauss_hermite_nodes(int q);

}  // namespace wlslab
