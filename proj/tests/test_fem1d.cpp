#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "wlslab/fem1d.hpp"
#include "wlslab/field.hpp"
#include "wlslab/rng.hpp"
#include "wlslab/sampling.hpp"

using namespace wlslab;

namespace {

// Composite Simpson with 2*halves panels.
template <typename F>
double simpson(const F& f, double a, double b, int halves = 4096) {
    const double h = (b - a) / (2 * halves);
    double sum = f(a) + f(b);
    for (int i = 1; i < 2 * halves; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double k = double(x.size());
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

std::vector<double> standard_normal(int count, std::uint64_t seed) {
    RngStream stream(seed);
    std::vector<double> out(count);
    for (auto& v : out) v = normal_quantile(stream.uniform01());
    return out;
}

}  // namespace

TEST_CASE("unit coefficient, unit forcing: nodal values are exact") {
    const SchauderField field(0);
    const std::vector<double> y{0.0};
    for (const int exponent : {2, 4, 6}) {
        const auto mesh = Mesh::uniform_dyadic(exponent);
        const FemSolution u = solve(field, y, constant_forcing(1.0), mesh);
        for (std::size_t i = 0; i < mesh->interior_count(); ++i) {
            const double x = mesh->nodes()[i + 1];
            CHECK(u.interior_values()[i] ==
                  doctest::Approx(0.5 * x * (1.0 - x)).epsilon(1e-13));
        }
    }
}

TEST_CASE("V-norm converges to 1/sqrt(12) with first-order V-error") {
    const SchauderField field(0);
    const std::vector<double> y{0.0};
    std::vector<double> log_n, log_err;
    for (int exponent = 2; exponent <= 9; ++exponent) {
        const auto mesh = Mesh::uniform_dyadic(exponent);
        const FemSolution u = solve(field, y, constant_forcing(1.0), mesh);
        // V-error against u(x) = x(1-x)/2, exact per element for the
        // quadratic integrand (u' - u_h')^2 via 3-point quadrature.
        const auto& nodes = mesh->nodes();
        double err_sq = 0.0;
        static const double gl_node[3] = {0.1127016653792583, 0.5, 0.8872983346207417};
        static const double gl_weight[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
        for (std::size_t el = 0; el < mesh->element_count(); ++el) {
            const double h = nodes[el + 1] - nodes[el];
            const double left = (el == 0) ? 0.0 : u.interior_values()[el - 1];
            const double right = (el == mesh->element_count() - 1)
                                     ? 0.0
                                     : u.interior_values()[el];
            const double slope = (right - left) / h;
            for (int q = 0; q < 3; ++q) {
                const double x = nodes[el] + h * gl_node[q];
                const double diff = (0.5 - x) - slope;
                err_sq += h * gl_weight[q] * diff * diff;
            }
        }
        log_n.push_back(std::log(double(mesh->interior_count())));
        log_err.push_back(std::log(std::sqrt(err_sq)));
        if (exponent == 9)
            CHECK(v_norm(u) ==
                  doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(1e-5));
    }
    CHECK(fit_slope(log_n, log_err) <= -0.9);
}

TEST_CASE("V-norm closed forms and Cauchy-Schwarz") {
    const auto mesh = Mesh::uniform_dyadic(4);
    CHECK(v_norm(FemSolution::zero(mesh)) == 0.0);

    // A single hat of height 1: ||u'||^2 = 2/h.
    const double h = 1.0 / 16.0;
    Eigen::VectorXd hat = Eigen::VectorXd::Zero(15);
    hat[7] = 1.0;
    CHECK(v_norm(FemSolution(mesh, hat)) ==
          doctest::Approx(std::sqrt(2.0 / h)).epsilon(1e-14));

    std::mt19937 rng(3);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd a(15), b(15);
        for (int i = 0; i < 15; ++i) {
            a[i] = gauss(rng);
            b[i] = gauss(rng);
        }
        const FemSolution ua(mesh, a), ub(mesh, b);
        CHECK(std::abs(v_inner(ua, ub)) <= v_norm(ua) * v_norm(ub) * (1.0 + 1e-12));
    }
}

TEST_CASE("axpy") {
    const auto mesh = Mesh::uniform_dyadic(3);
    std::mt19937 rng(5);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd a(7), b(7);
    for (int i = 0; i < 7; ++i) {
        a[i] = gauss(rng);
        b[i] = gauss(rng);
    }
    const FemSolution u(mesh, a), w(mesh, b);
    CHECK(axpy(0.0, u, w).interior_values() == w.interior_values());
    CHECK(v_norm(axpy(1.0, u, axpy(-1.0, u, FemSolution::zero(mesh)))) == 0.0);
    CHECK(v_norm(axpy(-2.5, u, FemSolution::zero(mesh))) ==
          doctest::Approx(2.5 * v_norm(u)).epsilon(1e-14));

    const auto other = Mesh::uniform_dyadic(4);
    CHECK_THROWS(axpy(1.0, u, FemSolution::zero(other)));
    CHECK_THROWS(v_inner(u, FemSolution::zero(other)));
}

TEST_CASE("forcing scales linearly") {
    const SchauderField field(2);
    const auto y = standard_normal(field.function_count(), 99);
    const auto mesh = Mesh::uniform_dyadic(4);
    const FemSolution base = solve(field, y, constant_forcing(1.0), mesh);
    const FemSolution scaled = solve(field, y, constant_forcing(std::exp(1.5)), mesh);
    for (std::size_t i = 0; i < mesh->interior_count(); ++i)
        CHECK(scaled.interior_values()[i] ==
              doctest::Approx(std::exp(1.5) * base.interior_values()[i]).epsilon(1e-14));
}

TEST_CASE("Galerkin residual of the solve is at solver precision") {
    const SchauderField field(3);
    const auto y = standard_normal(field.function_count(), 17);
    const auto mesh = Mesh::uniform_dyadic(6);
    const FemSystem system(mesh, field);
    const FemSolution u = system.solve(y);
    const TridiagonalSystem sys = system.assemble(y);
    const auto& v = u.interior_values();
    const Eigen::Index n = v.size();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double r = sys.diag[i] * v[i] - sys.load[i];
        if (i > 0) r += sys.off[i - 1] * v[i - 1];
        if (i + 1 < n) r += sys.off[i] * v[i + 1];
        worst = std::max(worst, std::abs(r));
    }
    CHECK(worst < 1e-10 * sys.load.norm());
}

TEST_CASE("a-priori bound against the exact field supremum") {
    const SchauderField field(4);
    const auto mesh = Mesh::uniform_dyadic(5);
    const FemSystem system(mesh, field);
    const double dual_norm = 1.0 / std::sqrt(12.0);  // ||1||_{V'}
    for (int trial = 0; trial < 100; ++trial) {
        const auto y = standard_normal(field.function_count(), 1000 + trial);
        const FemSolution u = system.solve(y);
        const double bound = dual_norm * std::exp(field.sup_abs(y));
        CHECK(v_norm(u) <= bound * (1.0 + 1e-12));
    }
}

TEST_CASE("solution matches the exact flux formula for an L = 0 field") {
    const double c = 1.3;
    const SchauderField field(0);
    const std::vector<double> y{c};
    const auto a_fun = [&](double x) { return std::exp(field.eval_field(y, x)); };
    // -(a u')' = 1 with u(0) = u(1) = 0: u'(x) = (c1 - x)/a(x) with
    // c1 = (int t/a) / (int 1/a).
    const auto inv_a = [&](double t) { return 1.0 / a_fun(t); };
    const auto t_inv_a = [&](double t) { return t / a_fun(t); };
    const double c1 = (simpson(t_inv_a, 0.0, 0.5) + simpson(t_inv_a, 0.5, 1.0)) /
                      (simpson(inv_a, 0.0, 0.5) + simpson(inv_a, 0.5, 1.0));
    const auto u_prime = [&](double x) { return (c1 - x) / a_fun(x); };

    std::vector<double> log_n, log_err;
    for (int exponent = 3; exponent <= 8; ++exponent) {
        const auto mesh = Mesh::uniform_dyadic(exponent);
        const FemSolution u = solve(field, y, constant_forcing(1.0), mesh);
        const auto& nodes = mesh->nodes();
        double err_sq = 0.0;
        for (std::size_t el = 0; el < mesh->element_count(); ++el) {
            const double h = nodes[el + 1] - nodes[el];
            const double left = (el == 0) ? 0.0 : u.interior_values()[el - 1];
            const double right = (el == mesh->element_count() - 1)
                                     ? 0.0
                                     : u.interior_values()[el];
            const double slope = (right - left) / h;
            const auto diff_sq = [&](double x) {
                const double d = u_prime(x) - slope;
                return d * d;
            };
            err_sq += simpson(diff_sq, nodes[el], nodes[el + 1], 16);
        }
        log_n.push_back(std::log(double(mesh->interior_count())));
        log_err.push_back(std::log(std::sqrt(err_sq)));
    }
    CHECK(fit_slope(log_n, log_err) <= -0.9);
}

TEST_CASE("rough-path spatial convergence") {
    const SchauderField field(8);
    const auto y = standard_normal(field.function_count(), 314159);
    const auto fine_mesh = Mesh::uniform_dyadic(13);
    const FemSolution reference = solve(field, y, constant_forcing(1.0), fine_mesh);

    std::vector<double> log_n, log_err;
    for (int exponent = 4; exponent <= 10; ++exponent) {
        const auto mesh = Mesh::uniform_dyadic(exponent);
        const FemSolution u =
            solve(field, y, constant_forcing(1.0), mesh, /*require_alignment=*/false);
        const FemSolution lifted = prolongate(u, fine_mesh);
        const double err = v_norm(axpy(-1.0, lifted, reference));
        log_n.push_back(std::log(double(mesh->interior_count())));
        log_err.push_back(std::log(err));
    }
    CHECK(fit_slope(log_n, log_err) <= -0.45);
}

TEST_CASE("coarse meshes are rejected unless explicitly allowed") {
    const SchauderField field(4);  // breakpoints at 2^-5
    const auto coarse = Mesh::uniform_dyadic(3);
    CHECK_THROWS(FemSystem(coarse, field));
    CHECK_NOTHROW(FemSystem(coarse, field, constant_forcing(1.0),
                            /*require_alignment=*/false));
    CHECK_NOTHROW(FemSystem(Mesh::uniform_dyadic(5), field));
}

TEST_CASE("prolongation is exact on nested meshes") {
    const SchauderField field(2);
    const auto y = standard_normal(field.function_count(), 42);
    const auto coarse = Mesh::uniform_dyadic(3);
    const auto fine = Mesh::uniform_dyadic(6);
    const FemSolution u = solve(field, y, constant_forcing(1.0), coarse);
    const FemSolution lifted = prolongate(u, fine);
    for (double x : {0.1, 0.35, 0.5, 0.62, 0.99})
        CHECK(lifted.value_at(x) == doctest::Approx(u.value_at(x)).epsilon(1e-14));
    CHECK(v_norm(lifted) == doctest::Approx(v_norm(u)).epsilon(1e-14));
    CHECK_THROWS(prolongate(FemSolution::zero(fine), coarse));
}
