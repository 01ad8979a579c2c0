#include "wlslab/wls.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace wlslab {

GramAssembler::GramAssembler(IndexSet index_set, int dimension,
                             std::shared_ptr<const Mesh> mesh)
    : index_set_(std::move(index_set)),
      dimension_(dimension),
      mesh_(std::move(mesh)),
      evaluator_(index_set_.max_degree()) {
    if (index_set_.empty()) throw std::invalid_argument("GramAssembler: empty index set");
    if (index_set_.max_position() > dimension_)
        throw std::invalid_argument("GramAssembler: set uses variables beyond J");
    if (!mesh_) throw std::invalid_argument("GramAssembler: null mesh");
    const auto n = static_cast<Eigen::Index>(index_set_.size());
    gram_ = Eigen::MatrixXd::Zero(n, n);
    rhs_ = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(mesh_->interior_count()));
}

void GramAssembler::design_row(
    std::span<const double> point, double weight,
    Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) const {
    if (static_cast<int>(point.size()) < dimension_)
        throw std::invalid_argument("GramAssembler: point shorter than J");
    const int max_deg = evaluator_.max_degree();
    std::vector<double> table(static_cast<std::size_t>(max_deg + 1) * dimension_);
    std::vector<double> column(max_deg + 1);
    for (int j = 0; j < dimension_; ++j) {
        evaluator_.eval_all(point[j], column);
        for (int k = 0; k <= max_deg; ++k)
            table[static_cast<std::size_t>(k) * dimension_ + j] = column[k];
    }
    const double root_w = std::sqrt(weight);
    const auto& members = index_set_.members();
    for (std::size_t c = 0; c < members.size(); ++c) {
        double prod = 1.0;
        for (const auto& [pos, exp] : members[c].entries())
            prod *= table[static_cast<std::size_t>(exp) * dimension_ + (pos - 1)];
        row[static_cast<Eigen::Index>(c)] = root_w * prod;
    }
}

void GramAssembler::add_block(const Eigen::MatrixXd& points, const Eigen::VectorXd& weights,
                              const Eigen::MatrixXd& solutions) {
    const Eigen::Index rows = points.rows();
    if (weights.size() != rows || solutions.rows() != rows)
        throw std::invalid_argument("GramAssembler: block shapes disagree");
    if (solutions.cols() != rhs_.cols())
        throw std::invalid_argument("GramAssembler: solution block does not match the mesh");
    if (points.cols() < dimension_)
        throw std::invalid_argument("GramAssembler: point block shorter than J");

    Eigen::MatrixXd design(rows, gram_.rows());
    std::vector<double> point(dimension_);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (int j = 0; j < dimension_; ++j) point[j] = points(i, j);
        design_row(point, weights[i], design.row(i));
    }
    gram_.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
    // rhs accumulates sqrt(w)H * sqrt(w)u = w u H.
    rhs_.noalias() += design.transpose() * (weights.cwiseSqrt().asDiagonal() * solutions);
    count_ += static_cast<std::size_t>(rows);
}

void GramAssembler::add(std::span<const double> point, double weight,
                        const FemSolution& solution) {
    if (!solution.mesh().same_as(*mesh_))
        throw std::invalid_argument("GramAssembler: sample mesh mismatch");
    Eigen::MatrixXd points(1, dimension_);
    for (int j = 0; j < dimension_; ++j) points(0, j) = point[j];
    Eigen::VectorXd weights(1);
    weights[0] = weight;
    add_block(points, weights, solution.interior_values().transpose());
}

GramSystem GramAssembler::finalize() const {
    if (count_ == 0) throw std::logic_error("GramAssembler: no samples");
    GramSystem out;
    const double inv_m = 1.0 / static_cast<double>(count_);
    out.gram = inv_m * Eigen::MatrixXd(gram_.selfadjointView<Eigen::Lower>());
    out.rhs = inv_m * rhs_;
    out.sample_count = count_;
    out.mesh = mesh_;

    Eigen::MatrixXd shifted = out.gram;
    shifted.diagonal().array() -= 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(shifted,
                                                          Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("GramAssembler: eigensolver failed");
    out.gram_deviation = solver.eigenvalues().cwiseAbs().maxCoeff();
    return out;
}

GramSystem assemble(std::span<const WlsSample> samples, const IndexSet& index_set,
                    int dimension) {
    if (samples.empty()) throw std::invalid_argument("assemble: empty sample list");
    GramAssembler assembler(index_set, dimension, samples.front().solution.mesh_ptr());
    for (const auto& sample : samples)
        assembler.add(sample.point, sample.weight, sample.solution);
    return assembler.finalize();
}

WlsEstimator::WlsEstimator(IndexSet index_set, std::shared_ptr<const Mesh> mesh,
                           Eigen::MatrixXd coefficients, bool conditioned,
                           double gram_deviation)
    : index_set_(std::move(index_set)),
      mesh_(std::move(mesh)),
      coefficients_(std::move(coefficients)),
      conditioned_(conditioned),
      gram_deviation_(gram_deviation) {
    if (!mesh_) throw std::invalid_argument("WlsEstimator: null mesh");
    if (coefficients_.rows() != static_cast<Eigen::Index>(index_set_.size()) ||
        coefficients_.cols() != static_cast<Eigen::Index>(mesh_->interior_count()))
        throw std::invalid_argument("WlsEstimator: coefficient shape mismatch");
    if (!conditioned_ && coefficients_.cwiseAbs().maxCoeff() != 0.0)
        throw std::invalid_argument("WlsEstimator: unconditioned estimator must be zero");
}

WlsEstimator WlsEstimator::zero(IndexSet index_set, std::shared_ptr<const Mesh> mesh,
                                double gram_deviation) {
    const auto n = static_cast<Eigen::Index>(index_set.size());
    const auto n_h = static_cast<Eigen::Index>(mesh->interior_count());
    return WlsEstimator(std::move(index_set), std::move(mesh),
                        Eigen::MatrixXd::Zero(n, n_h), false, gram_deviation);
}

FemSolution WlsEstimator::coefficient(std::size_t row) const {
    return FemSolution(mesh_, coefficients_.row(static_cast<Eigen::Index>(row)).transpose());
}

FemSolution WlsEstimator::coefficient(const MultiIndex& nu) const {
    const auto& members = index_set_.members();
    for (std::size_t i = 0; i < members.size(); ++i)
        if (members[i] == nu) return coefficient(i);
    throw std::out_of_range("WlsEstimator: index not in the set");
}

WlsEstimator estimate(const GramSystem& system, const IndexSet& index_set) {
    if (system.gram.rows() != static_cast<Eigen::Index>(index_set.size()))
        throw std::invalid_argument("estimate: system size does not match the set");
    if (system.gram_deviation > 0.5)
        return WlsEstimator::zero(index_set, system.mesh, system.gram_deviation);

    // ||G - I||_2 <= 1/2 bounds the spectrum of G within [1/2, 3/2].
    Eigen::LLT<Eigen::MatrixXd> llt(system.gram);
    if (llt.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "estimate: Cholesky failed although ||G-I||_2 = " << system.gram_deviation
            << " <= 1/2 (n = " << system.gram.rows() << ", m = " << system.sample_count
            << "); deviation and factorization disagree";
        throw std::runtime_error(msg.str());
    }
    return WlsEstimator(index_set, system.mesh, llt.solve(system.rhs), true,
                        system.gram_deviation);
}

FemSolution evaluate(const WlsEstimator& estimator, std::span<const double> y) {
    const auto& set = estimator.index_set();
    const HermiteEvaluator evaluator(set.max_degree());
    Eigen::VectorXd basis(set.size());
    for (std::size_t i = 0; i < set.size(); ++i)
        basis[static_cast<Eigen::Index>(i)] = evaluator.eval_tensor(set[i], y);
    return FemSolution(estimator.mesh_ptr(),
                       estimator.coefficient_matrix().transpose() * basis);
}

namespace {

double v_norm_sq_row(const Eigen::RowVectorXd& row, const Mesh& mesh) {
    const auto& nodes = mesh.nodes();
    const std::size_t n_el = mesh.element_count();
    double sum = 0.0;
    for (std::size_t el = 0; el < n_el; ++el) {
        const double left = (el == 0) ? 0.0 : row[static_cast<Eigen::Index>(el - 1)];
        const double right = (el == n_el - 1) ? 0.0 : row[static_cast<Eigen::Index>(el)];
        const double d = right - left;
        sum += d * d / (nodes[el + 1] - nodes[el]);
    }
    return sum;
}

}  // namespace

double parseval_distance(const WlsEstimator& a, const WlsEstimator& b) {
    if (!a.mesh().same_as(b.mesh()))
        throw std::invalid_argument("parseval_distance: mesh mismatch");
    const auto& members_b = b.index_set().members();
    std::unordered_map<MultiIndex, std::size_t, MultiIndexHash> rows_b;
    rows_b.reserve(members_b.size());
    for (std::size_t j = 0; j < members_b.size(); ++j) rows_b.emplace(members_b[j], j);

    double sum = 0.0;
    const auto& members_a = a.index_set().members();
    for (std::size_t i = 0; i < members_a.size(); ++i) {
        Eigen::RowVectorXd diff = a.coefficient_matrix().row(static_cast<Eigen::Index>(i));
        if (const auto it = rows_b.find(members_a[i]); it != rows_b.end())
            diff -= b.coefficient_matrix().row(static_cast<Eigen::Index>(it->second));
        sum += v_norm_sq_row(diff, a.mesh());
    }
    // Indices of b that a does not carry.
    for (std::size_t j = 0; j < members_b.size(); ++j) {
        if (a.index_set().contains(members_b[j])) continue;
        sum += v_norm_sq_row(b.coefficient_matrix().row(static_cast<Eigen::Index>(j)),
                             b.mesh());
    }
    return std::sqrt(sum);
}

double parseval_norm(const WlsEstimator& a) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < a.coefficient_matrix().rows(); ++i)
        sum += v_norm_sq_row(a.coefficient_matrix().row(i), a.mesh());
    return std::sqrt(sum);
}

namespace {

constexpr char kMagic[] = "wlslab-estimator v1";

void write_doubles(std::ostream& out, const double* data, std::size_t count) {
    static_assert(sizeof(double) == 8);
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(data),
                  static_cast<std::streamsize>(count * 8));
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            std::uint64_t bits;
            std::memcpy(&bits, data + i, 8);
            for (int b = 0; b < 8; ++b)
                out.put(static_cast<char>((bits >> (8 * b)) & 0xff));
        }
    }
}

void read_doubles(std::istream& in, double* data, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * 8));
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            std::uint64_t bits = 0;
            for (int b = 0; b < 8; ++b)
                bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in.get()))
                        << (8 * b);
            std::memcpy(data + i, &bits, 8);
        }
    }
    if (!in) throw std::runtime_error("estimator file: truncated payload");
}

}  // namespace

void save_estimator(const WlsEstimator& estimator, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    char deviation[32];
    std::snprintf(deviation, sizeof(deviation), "%.17g", estimator.gram_deviation());
    out << kMagic << '\n'
        << "mesh_nodes " << estimator.mesh().nodes().size() << '\n'
        << "indices " << estimator.index_set().size() << '\n'
        << "conditioned " << (estimator.conditioned() ? 1 : 0) << '\n'
        << "gram_deviation " << deviation << '\n';
    estimator.index_set().save(out);
    out << "DATA\n";
    write_doubles(out, estimator.mesh().nodes().data(), estimator.mesh().nodes().size());
    // Row-major coefficient payload.
    const auto& coeff = estimator.coefficient_matrix();
    for (Eigen::Index i = 0; i < coeff.rows(); ++i) {
        const Eigen::RowVectorXd row = coeff.row(i);
        write_doubles(out, row.data(), static_cast<std::size_t>(row.size()));
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

WlsEstimator load_estimator(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != kMagic) throw std::runtime_error("estimator file: bad magic");

    auto expect = [&](const std::string& key) -> std::string {
        std::getline(in, line);
        if (line.rfind(key + ' ', 0) != 0)
            throw std::runtime_error("estimator file: expected '" + key + "'");
        return line.substr(key.size() + 1);
    };
    const std::size_t node_count = std::stoul(expect("mesh_nodes"));
    const std::size_t index_count = std::stoul(expect("indices"));
    const bool conditioned = std::stoi(expect("conditioned")) != 0;
    const double gram_deviation = std::stod(expect("gram_deviation"));

    std::vector<MultiIndex> members;
    members.reserve(index_count);
    for (std::size_t i = 0; i < index_count; ++i) {
        if (!std::getline(in, line))
            throw std::runtime_error("estimator file: truncated index block");
        members.push_back(parse_line(line));
    }
    std::getline(in, line);
    if (line != "DATA") throw std::runtime_error("estimator file: missing DATA marker");

    std::vector<double> nodes(node_count);
    read_doubles(in, nodes.data(), node_count);
    auto mesh = std::make_shared<Mesh>(std::move(nodes));

    Eigen::MatrixXd coeff(index_count, mesh->interior_count());
    std::vector<double> row(mesh->interior_count());
    for (std::size_t i = 0; i < index_count; ++i) {
        read_doubles(in, row.data(), row.size());
        for (std::size_t c = 0; c < row.size(); ++c)
            coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = row[c];
    }
    return WlsEstimator(IndexSet(std::move(members)), std::move(mesh), std::move(coeff),
                        conditioned, gram_deviation);
}

}  // namespace wlslab
