#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "wlslab/fem1d.hpp"
#include "wlslab/hermite.hpp"
#include "wlslab/multiindex.hpp"

namespace wlslab {

/// The weighted normal equations G v = d of the least-squares problem,
/// with one V_h-valued right-hand row per index, plus the spectral
/// deviation ||G - I||_2 that gates the conditioned estimator.
struct GramSystem {
    Eigen::MatrixXd gram;           // n x n, symmetric PSD
    Eigen::MatrixXd rhs;            // n x n_h
    double gram_deviation = 0.0;    // ||G - I||_2
    std::size_t sample_count = 0;
    std::shared_ptr<const Mesh> mesh;
};

struct WlsSample {
    std::vector<double> point;
    double weight;
    FemSolution solution;
};

/// Streaming accumulator for G and d. Blocks of samples are reduced through
/// dense rank updates; feeding the same samples in the same block order
/// gives bitwise-identical results regardless of how the rows were produced.
class GramAssembler {
public:
    GramAssembler(IndexSet index_set, int dimension, std::shared_ptr<const Mesh> mesh);

    const IndexSet& index_set() const { return index_set_; }

    /// points: rows of length J; weights: per-row w(y); solutions: rows of
    /// interior nodal values on the assembler's mesh.
    void add_block(const Eigen::MatrixXd& points, const Eigen::VectorXd& weights,
                   const Eigen::MatrixXd& solutions);

    void add(std::span<const double> point, double weight, const FemSolution& solution);

    /// Fills one row of the design block: row[c] = sqrt(w) * H_{nu_c}(y).
    void design_row(std::span<const double> point, double weight,
                    Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) const;

    std::size_t sample_count() const { return count_; }

    /// Scales by 1/m and computes ||G - I||_2 by full symmetric
    /// eigendecomposition. Throws if no samples were added.
    GramSystem finalize() const;

private:
    IndexSet index_set_;
    int dimension_;
    std::shared_ptr<const Mesh> mesh_;
    HermiteEvaluator evaluator_;
    Eigen::MatrixXd gram_;       // accumulates sum w H H^T
    Eigen::MatrixXd rhs_;        // accumulates sum w u H
    std::size_t count_ = 0;
};

/// One-shot assembly of the normal equations from explicit samples.
GramSystem assemble(std::span<const WlsSample> samples, const IndexSet& index_set,
                    int dimension);

/// The conditioned weighted least-squares estimator: coefficients v_nu in
/// V_h for nu in Lambda_n when ||G - I||_2 <= 1/2, the zero expansion
/// otherwise.
class WlsEstimator {
public:
    WlsEstimator(IndexSet index_set, std::shared_ptr<const Mesh> mesh,
                 Eigen::MatrixXd coefficients, bool conditioned, double gram_deviation);

    static WlsEstimator zero(IndexSet index_set, std::shared_ptr<const Mesh> mesh,
                             double gram_deviation);

    const IndexSet& index_set() const { return index_set_; }
    const Mesh& mesh() const { return *mesh_; }
    const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
    bool conditioned() const { return conditioned_; }
    double gram_deviation() const { return gram_deviation_; }

    /// Row-per-index interior nodal values (n x n_h).
    const Eigen::MatrixXd& coefficient_matrix() const { return coefficients_; }
    FemSolution coefficient(const MultiIndex& nu) const;
    FemSolution coefficient(std::size_t row) const;

private:
    IndexSet index_set_;
    std::shared_ptr<const Mesh> mesh_;
    Eigen::MatrixXd coefficients_;
    bool conditioned_;
    double gram_deviation_;
};

/// Solves G V = D by Cholesky when the deviation gate passes; returns the
/// zero estimator otherwise. A Cholesky failure under the gate would mean
/// the deviation computation is inconsistent and aborts loudly.
WlsEstimator estimate(const GramSystem& system, const IndexSet& index_set);

/// Pointwise evaluation sum_nu v_nu H_nu(y).
FemSolution evaluate(const WlsEstimator& estimator, std::span<const double> y);

/// The V_2 distance between two expansions on one mesh: root-sum-square of
/// V-norms of coefficient differences over the union of index sets, with
/// missing coefficients treated as zero.
double parseval_distance(const WlsEstimator& a, const WlsEstimator& b);

/// Root-sum-square of the V-norms of all coefficients (distance to zero).
double parseval_norm(const WlsEstimator& a);

/// Binary estimator file: text header (mesh node count, index lines,
/// conditioning, deviation) then little-endian doubles for the mesh nodes
/// and the row-major coefficient matrix.
void save_estimator(const WlsEstimator& estimator, const std::filesystem::path& path);
WlsEstimator load_estimator(const std::filesystem::path& path);

}  // namespace wlslab
