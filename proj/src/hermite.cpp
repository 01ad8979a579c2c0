#include "wlslab/hermite.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace wlslab {

HermiteEvaluator::HermiteEvaluator(int max_degree) : max_degree_(max_degree) {
    if (max_degree < 0 || max_degree > kMaxSupportedDegree)
        throw std::invalid_argument("HermiteEvaluator: degree out of range");
}

double HermiteEvaluator::eval_univariate(int k, double t) const {
    if (k < 0 || k > max_degree_)
        throw std::out_of_range("HermiteEvaluator: degree exceeds max_degree");
    double prev = 1.0;  // H_0
    if (k == 0) return prev;
    double cur = t;  // H_1
    for (int j = 1; j < k; ++j) {
        const double next = (t * cur - std::sqrt(double(j)) * prev) / std::sqrt(double(j + 1));
        prev = cur;
        cur = next;
    }
    return cur;
}

void HermiteEvaluator::eval_all(double t, std::span<double> out) const {
    if (out.empty()) return;
    if (static_cast<int>(out.size()) > max_degree_ + 1)
        throw std::out_of_range("HermiteEvaluator: degree exceeds max_degree");
    out[0] = 1.0;
    if (out.size() == 1) return;
    out[1] = t;
    for (std::size_t k = 1; k + 1 < out.size(); ++k)
        out[k + 1] = (t * out[k] - std::sqrt(double(k)) * out[k - 1]) / std::sqrt(double(k + 1));
}

double HermiteEvaluator::eval_tensor(const MultiIndex& nu, std::span<const double> y) const {
    if (nu.max_position() > static_cast<int>(y.size()))
        throw std::out_of_range("eval_tensor: support exceeds vector length");
    double prod = 1.0;
    for (const auto& [pos, exp] : nu.entries())
        prod *= eval_univariate(exp, y[pos - 1]);
    return prod;
}

GaussHermiteRule gauss_hermite_nodes(int q) {
    if (q < 1 || q > HermiteEvaluator::kMaxSupportedDegree)
        throw std::invalid_argument("gauss_hermite_nodes: node count out of range");
    if (q == 1) return {{0.0}, {1.0}};

    // Jacobi matrix of the monic probabilists' recurrence p_{k+1} = t p_k - k p_{k-1}:
    // zero diagonal, off-diagonal sqrt(k).
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(q, q);
    for (int k = 1; k < q; ++k) {
        const double b = std::sqrt(double(k));
        jacobi(k, k - 1) = b;
        jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("gauss_hermite_nodes: eigensolver failed");

    GaussHermiteRule rule;
    rule.nodes.resize(q);
    rule.weights.resize(q);
    for (int i = 0; i < q; ++i) {
        rule.nodes[i] = solver.eigenvalues()(i);
        const double v0 = solver.eigenvectors()(0, i);
        rule.weights[i] = v0 * v0;  // total mass of g is 1
    }
    // Symmetrize: nodes of a symmetric weight come in +/- pairs. Eigen's
    // ordering is ascending already; pair-average to kill asymmetry noise.
    for (int i = 0, j = q - 1; i < j; ++i, --j) {
        const double node = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        rule.nodes[i] = -node;
        rule.nodes[j] = node;
        const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.weights[i] = w;
        rule.weights[j] = w;
    }
    if (q % 2 == 1) rule.nodes[q / 2] = 0.0;
    return rule;
}

}  // namespace wlslab
