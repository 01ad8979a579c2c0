#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "wlslab/field.hpp"
#include "wlslab/weights.hpp"

using namespace wlslab;

namespace {

MultiIndex dense(std::initializer_list<int> values) {
    return MultiIndex::from_dense(std::vector<int>(values));
}

// xi by its defining double sum over nu~ <= nu with ||nu~||_inf <= r:
// sum binom(nu, nu~) rho^{2 nu~}, enumerated directly.
double xi_by_definition(const MultiIndex& nu, const RhoSequence& rho) {
    std::vector<int> caps(nu.max_position(), 0);
    for (const auto& [pos, exp] : nu.entries()) caps[pos - 1] = std::min(exp, rho.r());
    std::vector<int> cur(caps.size(), 0);
    auto binom = [](int k, int l) {
        double b = 1.0;
        for (int i = 0; i < l; ++i) b = b * (k - i) / (i + 1);
        return b;
    };
    double total = 0.0;
    while (true) {
        double term = 1.0;
        for (std::size_t j = 0; j < cur.size(); ++j) {
            term *= binom(nu.exponent(int(j) + 1), cur[j]) *
                    std::pow(rho.value(int(j) + 1), 2.0 * cur[j]);
        }
        total += term;
        std::size_t j = 0;
        while (j < cur.size() && cur[j] == caps[j]) cur[j++] = 0;
        if (j == cur.size()) break;
        ++cur[j];
    }
    return total;
}

// All indices in the box {nu : nu_j <= cap, j <= vars} with degree <= maxdeg.
std::vector<MultiIndex> candidate_box(int vars, int cap, int maxdeg) {
    std::vector<MultiIndex> out;
    std::vector<int> cur(vars, 0);
    while (true) {
        int deg = 0;
        for (int v : cur) deg += v;
        if (deg <= maxdeg) out.push_back(MultiIndex::from_dense(cur));
        int j = 0;
        while (j < vars && cur[j] == cap) cur[j++] = 0;
        if (j == vars) break;
        ++cur[j];
    }
    return out;
}

std::vector<MultiIndex> brute_force_lambda(int n, const RhoSequence& rho,
                                           std::vector<MultiIndex> box) {
    std::sort(box.begin(), box.end(), [&](const MultiIndex& a, const MultiIndex& b) {
        return selection_less(a, b, rho);
    });
    box.resize(n);
    return box;
}

}  // namespace

TEST_CASE("build_rho at L = 0 gives C = 1/2 and rho_1 = ln 2") {
    const auto rho = RhoSequence::build(0.7, 0, 1, 1.0);
    REQUIRE(rho.size() == 1);
    CHECK(rho.normalizer() == 0.5);
    CHECK(rho.value(1) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("normalization forces the half-slack weight condition") {
    for (const double beta : {0.125, 0.25, 0.5})
        for (const int r : {1, 2})
            for (const int level : {0, 1, 3}) {
                const auto rho = RhoSequence::build(beta, level, r, 1.0);
                const SchauderField basis(level, 1.0);
                double sup = 0.0;
                for (int i = 0; i <= 100000; ++i) {
                    const double x = i / 100000.0;
                    double sum = 0.0;
                    for (int j = 1; j <= int(rho.size()); ++j)
                        sum += rho.value(j) * std::abs(basis.eval_basis(j, x));
                    sup = std::max(sup, sum);
                }
                const double target = std::log(2.0) / (2.0 * std::sqrt(double(r)));
                CHECK(sup == doctest::Approx(target).epsilon(1e-9));
                CHECK(sup < std::log(2.0) / std::sqrt(double(r)));
            }
}

TEST_CASE("the exact grid normalizer matches a dense search at beta = 1/2, L = 1") {
    const auto rho = RhoSequence::build(0.5, 1, 1, 1.0);
    // rho~ = (1, sqrt 2, sqrt 2).
    const SchauderField basis(1, 1.0);
    double dense_sup = 0.0;
    for (int i = 0; i <= 100000; ++i) {
        const double x = i / 100000.0;
        double sum = basis.eval_basis(1, x) +
                     std::sqrt(2.0) * (basis.eval_basis(2, x) + basis.eval_basis(3, x));
        dense_sup = std::max(dense_sup, sum);
    }
    CHECK(rho.normalizer() == doctest::Approx(dense_sup).epsilon(1e-9));
    CHECK(rho.normalizer() >= dense_sup - 1e-12);
}

TEST_CASE("tau divides the weights") {
    const auto unit = RhoSequence::build(0.25, 2, 1, 1.0);
    const auto scaled = RhoSequence::build(0.25, 2, 1, 4.0);
    REQUIRE(unit.size() == scaled.size());
    for (int j = 1; j <= int(unit.size()); ++j)
        CHECK(scaled.value(j) == doctest::Approx(unit.value(j) / 4.0).epsilon(1e-15));
}

TEST_CASE("xi closed forms") {
    const auto rho = RhoSequence::build(0.5, 1, 1, 1.0);
    CHECK(xi(MultiIndex{}, rho).value() == 1.0);
    CHECK(xi(MultiIndex{}, rho).log_value() == 0.0);

    for (int j = 1; j <= 3; ++j) {
        const double r1 = rho.value(j);
        CHECK(xi(MultiIndex::unit(j), rho).value() ==
              doctest::Approx(1.0 + r1 * r1).epsilon(1e-14));
    }

    const double r1 = rho.value(1), r2 = rho.value(2);
    CHECK(xi(dense({2, 1}), rho).value() ==
          doctest::Approx((1.0 + 2.0 * r1 * r1) * (1.0 + r2 * r2)).epsilon(1e-14));
}

TEST_CASE("xi factorization agrees with the defining double sum") {
    std::mt19937 rng(29);
    for (const int r : {1, 2, 3}) {
        const auto rho = RhoSequence::build(0.25, 1, r, 1.0);
        for (int trial = 0; trial < 100; ++trial) {
            const MultiIndex nu({{1, int(rng() % 5)}, {2, int(rng() % 5)},
                                 {3, int(rng() % 5)}});
            CHECK(xi(nu, rho).value() ==
                  doctest::Approx(xi_by_definition(nu, rho)).epsilon(1e-11));
        }
    }
}

TEST_CASE("xi is monotone along the partial order") {
    std::mt19937 rng(31);
    const auto rho = RhoSequence::build(0.5, 2, 1, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<int> big(7), small(7);
        for (int j = 0; j < 7; ++j) {
            big[j] = int(rng() % 6);
            small[j] = int(rng() % (big[j] + 1));
        }
        const auto nu = MultiIndex::from_dense(big);
        const auto nut = MultiIndex::from_dense(small);
        if (nu.total_degree() > 5) continue;
        CHECK(leq(nut, nu));
        CHECK(xi(nut, rho).log_value() <= xi(nu, rho).log_value());
    }
    // Strict unless equal, since every rho_j > 0.
    CHECK(xi(dense({1}), rho).value() > 1.0);
}

TEST_CASE("xi stays usable past the double overflow range") {
    // A tiny tau inflates rho far enough that rho^2 alone exceeds the double
    // range; the direct product path would be inf from the first factor.
    const auto rho = RhoSequence::build(0.5, 3, 1, 1e-160);
    const MultiIndex deep({{1, 10000}});
    const XiWeight w = xi(deep, rho);
    CHECK(std::isfinite(w.log_value()));
    CHECK(w.log_value() > 709.0);  // value() overflows, the log does not
    CHECK(std::isinf(w.value()));
    const MultiIndex deeper = deep.plus_unit(8);
    CHECK(xi(deeper, rho).log_value() > w.log_value());
}

TEST_CASE("build_lambda small cases") {
    const auto rho = RhoSequence::build(0.5, 1, 1, 1.0);
    const auto single = build_lambda(1, rho, 3);
    REQUIRE(single.size() == 1);
    CHECK(single[0].is_zero());

    // With rho_1 < rho_2 the order of arrival is 0, e_1, e_2; the set as a
    // set is {0, e_1, e_2} either way.
    REQUIRE(rho.value(1) < rho.value(2));
    const auto three = build_lambda(3, rho, 2);
    CHECK(three.contains(MultiIndex{}));
    CHECK(three.contains(dense({1})));
    CHECK(three.contains(dense({0, 1})));
}

TEST_CASE("build_lambda matches brute force on the degree-6 box") {
    const auto rho = RhoSequence::build(0.5, 1, 1, 1.0);  // J = 3
    const auto expected =
        brute_force_lambda(6, rho, candidate_box(3, 6, 6));
    const auto set = build_lambda(6, rho, 3);
    REQUIRE(set.size() == 6);
    for (const auto& nu : expected) CHECK(set.contains(nu));
}

TEST_CASE("build_lambda equals brute force for J <= 3, n <= 30") {
    for (const double beta : {0.25, 0.5}) {
        const auto rho = RhoSequence::build(beta, 1, 1, 1.0);
        const auto box = candidate_box(3, 8, 24);
        for (int n = 1; n <= 30; ++n) {
            const auto expected = brute_force_lambda(n, rho, box);
            const auto set = build_lambda(n, rho, 3);
            REQUIRE(set.size() == std::size_t(n));
            CHECK(is_downward_closed(set));
            for (const auto& nu : expected) CHECK(set.contains(nu));
        }
    }
}

TEST_CASE("build_lambda output is downward closed with exact cardinality") {
    for (const double beta : {0.125, 0.25, 0.5})
        for (const int level : {2, 4}) {
            const auto rho = RhoSequence::build(beta, level, 1, 1.0);
            for (const int n : {10, 100, 500}) {
                const auto set = build_lambda(n, rho, int(rho.size()));
                CHECK(set.size() == std::size_t(n));
                CHECK(is_downward_closed(set));
            }
        }
}

TEST_CASE("scaling tau is the same as rescaling rho") {
    const double tau = 3.0;
    const auto rho_tau = RhoSequence::build(0.5, 2, 1, tau);
    const auto rho_unit = RhoSequence::build(0.5, 2, 1, 1.0).rescaled(1.0 / tau);
    REQUIRE(rho_tau.size() == rho_unit.size());
    for (int j = 1; j <= int(rho_tau.size()); ++j)
        CHECK(rho_tau.value(j) == doctest::Approx(rho_unit.value(j)).epsilon(1e-15));

    const auto set_tau = build_lambda(64, rho_tau, int(rho_tau.size()));
    const auto set_unit = build_lambda(64, rho_unit, int(rho_unit.size()));
    REQUIRE(set_tau.size() == set_unit.size());
    for (std::size_t i = 0; i < set_tau.size(); ++i)
        CHECK(set_tau[i] == set_unit[i]);
}
