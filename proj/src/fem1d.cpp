#include "wlslab/fem1d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wlslab {

namespace {

// 3-point Gauss-Legendre on [0,1].
constexpr double kGlNode[3] = {0.1127016653792583, 0.5, 0.8872983346207417};
constexpr double kGlWeight[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

}  // namespace

Mesh::Mesh(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 3)
        throw std::invalid_argument("Mesh: need at least 2 elements");
    if (nodes_.front() != 0.0 || nodes_.back() != 1.0)
        throw std::invalid_argument("Mesh: endpoints must be 0 and 1");
    for (std::size_t i = 1; i < nodes_.size(); ++i)
        if (!(nodes_[i] > nodes_[i - 1]))
            throw std::invalid_argument("Mesh: nodes must be strictly increasing");
}

std::shared_ptr<const Mesh> Mesh::uniform_dyadic(int exponent) {
    if (exponent < 1 || exponent > 26)
        throw std::invalid_argument("Mesh: dyadic exponent out of range");
    const int count = 1 << exponent;
    std::vector<double> nodes(count + 1);
    const double h = 1.0 / count;
    for (int i = 0; i <= count; ++i) nodes[i] = i * h;
    return std::make_shared<Mesh>(std::move(nodes));
}

bool Mesh::contains_points(std::span<const double> points) const {
    for (const double p : points)
        if (!std::binary_search(nodes_.begin(), nodes_.end(), p)) return false;
    return true;
}

bool Mesh::same_as(const Mesh& other) const {
    return this == &other || nodes_ == other.nodes_;
}

FemSolution::FemSolution(std::shared_ptr<const Mesh> mesh, Eigen::VectorXd interior)
    : mesh_(std::move(mesh)), interior_(std::move(interior)) {
    if (!mesh_) throw std::invalid_argument("FemSolution: null mesh");
    if (interior_.size() != static_cast<Eigen::Index>(mesh_->interior_count()))
        throw std::invalid_argument("FemSolution: size does not match mesh");
}

FemSolution FemSolution::zero(std::shared_ptr<const Mesh> mesh) {
    const auto n = mesh->interior_count();
    return FemSolution(std::move(mesh), Eigen::VectorXd::Zero(n));
}

double FemSolution::value_at(double x) const {
    const auto& nodes = mesh_->nodes();
    if (x <= nodes.front() || x >= nodes.back()) return 0.0;
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    const std::size_t el = static_cast<std::size_t>(it - nodes.begin()) - 1;
    const double t = (x - nodes[el]) / (nodes[el + 1] - nodes[el]);
    const auto nodal = [&](std::size_t node) -> double {
        if (node == 0 || node + 1 == nodes.size()) return 0.0;
        return interior_[node - 1];
    };
    return (1.0 - t) * nodal(el) + t * nodal(el + 1);
}

FemSystem::FemSystem(std::shared_ptr<const Mesh> mesh, const SchauderField& field,
                     Forcing f, bool require_alignment)
    : mesh_(std::move(mesh)),
      field_count_(field.function_count()),
      field_tau_(field.tau()) {
    if (!mesh_) throw std::invalid_argument("FemSystem: null mesh");
    if (require_alignment && !mesh_->contains_points(field.breakpoints()))
        throw std::invalid_argument(
            "FemSystem: mesh does not resolve the field breakpoints "
            "(pass require_alignment=false to study coarse meshes)");

    const auto& nodes = mesh_->nodes();
    const std::size_t n_el = mesh_->element_count();
    const std::size_t n_h = mesh_->interior_count();

    quad_.resize(3 * n_el);
    load_ = Eigen::VectorXd::Zero(n_h);
    for (std::size_t el = 0; el < n_el; ++el) {
        const double x0 = nodes[el];
        const double h = nodes[el + 1] - x0;
        for (int q = 0; q < 3; ++q) {
            const double x = x0 + h * kGlNode[q];
            QuadPoint& qp = quad_[3 * el + q];
            qp.weight = h * kGlWeight[q];
            qp.basis.reserve(field.max_level() + 1);
            for (int level = 0; level <= field.max_level(); ++level) {
                const int shift = std::min(static_cast<int>(std::exp2(level) * x),
                                           (1 << level) - 1);
                const int j = (1 << level) + shift;
                const double v = field.eval_basis(j, x);
                if (v != 0.0) qp.basis.emplace_back(j - 1, field_tau_ * v);
            }
            // Load: integral of f against the two element hats.
            const double fv = f(x);
            if (el > 0) load_[el - 1] += qp.weight * fv * (1.0 - kGlNode[q]);
            if (el < n_el - 1) load_[el] += qp.weight * fv * kGlNode[q];
        }
    }
}

TridiagonalSystem FemSystem::assemble(std::span<const double> y) const {
    if (static_cast<int>(y.size()) < field_count_)
        throw std::invalid_argument("FemSystem: parameter vector too short");
    const auto& nodes = mesh_->nodes();
    const std::size_t n_el = mesh_->element_count();
    const std::size_t n_h = mesh_->interior_count();

    TridiagonalSystem sys;
    sys.diag = Eigen::VectorXd::Zero(n_h);
    sys.off = Eigen::VectorXd::Zero(n_h > 0 ? n_h - 1 : 0);
    sys.load = load_;

    for (std::size_t el = 0; el < n_el; ++el) {
        const double h = nodes[el + 1] - nodes[el];
        double coeff_int = 0.0;  // integral of exp(b_J) over the element
        for (int q = 0; q < 3; ++q) {
            const QuadPoint& qp = quad_[3 * el + q];
            double b = 0.0;
            for (const auto& [col, v] : qp.basis) b += v * y[col];
            coeff_int += qp.weight * std::exp(b);
        }
        const double k = coeff_int / (h * h);  // shared magnitude of the 2x2 element block
        if (el > 0) sys.diag[el - 1] += k;
        if (el < n_el - 1) sys.diag[el] += k;
        if (el > 0 && el < n_el - 1) sys.off[el - 1] -= k;
    }
    return sys;
}

FemSolution FemSystem::solve(std::span<const double> y) const {
    TridiagonalSystem sys = assemble(y);
    const Eigen::Index n = sys.diag.size();

    // Thomas algorithm; positive pivots are guaranteed by a > 0.
    Eigen::VectorXd c(n > 0 ? n - 1 : 0), d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double pivot = sys.diag[i] - (i > 0 ? sys.off[i - 1] * c[i - 1] : 0.0);
        if (!(pivot > 0.0))
            throw std::runtime_error("FemSystem: non-positive pivot (assembly bug)");
        const double rhs = sys.load[i] - (i > 0 ? sys.off[i - 1] * d[i - 1] : 0.0);
        d[i] = rhs / pivot;
        if (i + 1 < n) c[i] = sys.off[i] / pivot;
    }
    for (Eigen::Index i = n - 2; i >= 0; --i) d[i] -= c[i] * d[i + 1];
    return FemSolution(mesh_, std::move(d));
}

FemSolution solve(const SchauderField& field, std::span<const double> y,
                  const Forcing& f, std::shared_ptr<const Mesh> mesh,
                  bool require_alignment) {
    return FemSystem(std::move(mesh), field, f, require_alignment).solve(y);
}

namespace {

void require_same_mesh(const FemSolution& u, const FemSolution& w) {
    if (!u.mesh().same_as(w.mesh()))
        throw std::invalid_argument("fem1d: mesh mismatch");
}

}  // namespace

double v_norm(const FemSolution& u) {
    return std::sqrt(v_inner(u, u));
}

double v_inner(const FemSolution& u, const FemSolution& w) {
    require_same_mesh(u, w);
    const auto& nodes = u.mesh().nodes();
    const auto& a = u.interior_values();
    const auto& b = w.interior_values();
    const std::size_t n_el = u.mesh().element_count();
    double sum = 0.0;
    for (std::size_t el = 0; el < n_el; ++el) {
        const double h = nodes[el + 1] - nodes[el];
        const double ua = (el == 0) ? 0.0 : a[el - 1];
        const double ub = (el == n_el - 1) ? 0.0 : a[el];
        const double wa = (el == 0) ? 0.0 : b[el - 1];
        const double wb = (el == n_el - 1) ? 0.0 : b[el];
        sum += (ub - ua) * (wb - wa) / h;
    }
    return sum;
}

FemSolution axpy(double alpha, const FemSolution& u, const FemSolution& w) {
    require_same_mesh(u, w);
    return FemSolution(w.mesh_ptr(), alpha * u.interior_values() + w.interior_values());
}

FemSolution prolongate(const FemSolution& u, std::shared_ptr<const Mesh> fine) {
    if (!fine->contains_points(u.mesh().nodes()))
        throw std::invalid_argument("prolongate: target mesh does not refine the source");
    const std::size_t n_h = fine->interior_count();
    Eigen::VectorXd vals(n_h);
    for (std::size_t i = 0; i < n_h; ++i) vals[i] = u.value_at(fine->nodes()[i + 1]);
    return FemSolution(std::move(fine), std::move(vals));
}

}  // namespace wlslab
