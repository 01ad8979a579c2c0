#pragma once

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "wlslab/field.hpp"

namespace wlslab {

/// 1D mesh on [0,1] with strictly increasing nodes pinned to the endpoints.
class Mesh {
public:
    explicit Mesh(std::vector<double> nodes);

    /// Uniform mesh with 2^exponent elements (nodes i * 2^-exponent).
    static std::shared_ptr<const Mesh> uniform_dyadic(int exponent);

    const std::vector<double>& nodes() const { return nodes_; }
    std::size_t element_count() const { return nodes_.size() - 1; }
    /// Interior degrees of freedom n_h = element_count - 1.
    std::size_t interior_count() const { return nodes_.size() - 2; }

    bool contains_points(std::span<const double> points) const;
    bool same_as(const Mesh& other) const;

private:
    std::vector<double> nodes_;
};

/// Continuous piecewise-linear function on a mesh vanishing at 0 and 1,
/// stored by its interior nodal values.
class FemSolution {
public:
    FemSolution(std::shared_ptr<const Mesh> mesh, Eigen::VectorXd interior);

    /// The zero function on the given mesh.
    static FemSolution zero(std::shared_ptr<const Mesh> mesh);

    const Mesh& mesh() const { return *mesh_; }
    const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
    const Eigen::VectorXd& interior_values() const { return interior_; }

    /// Pointwise evaluation (piecewise-linear interpolation).
    double value_at(double x) const;

private:
    std::shared_ptr<const Mesh> mesh_;
    Eigen::VectorXd interior_;
};

using Forcing = std::function<double(double)>;

inline Forcing constant_forcing(double c) {
    return [c](double) { return c; };
}

struct TridiagonalSystem {
    Eigen::VectorXd diag;      // n_h
    Eigen::VectorXd off;       // n_h - 1, symmetric off-diagonal
    Eigen::VectorXd load;      // n_h
};

/// Assembled P1 Galerkin machinery for -(a u')' = f with a = exp(b_J(.,y))
/// and homogeneous Dirichlet conditions. The quadrature points, the basis
/// table for evaluating b_J at them, and the load vector are precomputed
/// once; solve() then costs one tridiagonal factorization per parameter.
///
/// Element integrals of exp(b_J) use 3-point Gauss-Legendre, which is
/// near-exact when every element lies between field breakpoints. By default
/// the constructor rejects meshes that straddle breakpoints; pass
/// require_alignment = false to study coarse-mesh convergence.
class FemSystem {
public:
    FemSystem(std::shared_ptr<const Mesh> mesh, const SchauderField& field,
              Forcing f = constant_forcing(1.0), bool require_alignment = true);

    const Mesh& mesh() const { return *mesh_; }
    const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
    int parameter_count() const { return field_count_; }

    /// Stiffness and load for the parameter y (first J entries used).
    TridiagonalSystem assemble(std::span<const double> y) const;

    /// Galerkin solution u_h(y). Thread-safe; solves are independent.
    FemSolution solve(std::span<const double> y) const;

private:
    std::shared_ptr<const Mesh> mesh_;
    int field_count_;
    double field_tau_;
    // Per element: 3 quadrature nodes; per node a compact row of the
    // Schauder basis (column index, value) for evaluating b_J.
    struct QuadPoint {
        double weight;              // GL weight * element length
        std::vector<std::pair<int, double>> basis;  // tau-scaled
    };
    std::vector<QuadPoint> quad_;   // 3 per element
    Eigen::VectorXd load_;          // n_h
};

/// One-shot convenience wrapper around FemSystem.
FemSolution solve(const SchauderField& field, std::span<const double> y,
                  const Forcing& f, std::shared_ptr<const Mesh> mesh,
                  bool require_alignment = true);

/// H^1_0 seminorm ||u'||_{L2}, exact for piecewise linears.
double v_norm(const FemSolution& u);
double v_inner(const FemSolution& u, const FemSolution& w);

/// alpha * u + w, nodally. Meshes must agree.
FemSolution axpy(double alpha, const FemSolution& u, const FemSolution& w);

/// Re-expresses u on a finer mesh whose nodes include all of u's nodes;
/// exact since u is linear between its own nodes.
FemSolution prolongate(const FemSolution& u, std::shared_ptr<const Mesh> fine);

}  // namespace wlslab
