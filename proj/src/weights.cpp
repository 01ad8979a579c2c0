#include "wlslab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "wlslab/field.hpp"

namespace wlslab {

RhoSequence RhoSequence::build(double beta, int max_level, int r, double tau) {
    if (!(beta > 0.0)) throw std::invalid_argument("RhoSequence: beta must be positive");
    if (max_level < 0) throw std::invalid_argument("RhoSequence: negative level");
    if (r < 1) throw std::invalid_argument("RhoSequence: r must be >= 1");
    if (!(tau > 0.0)) throw std::invalid_argument("RhoSequence: tau must be positive");

    RhoSequence rho;
    rho.beta_ = beta;
    rho.max_level_ = max_level;
    rho.r_ = r;
    rho.tau_ = tau;

    const int count = (1 << (max_level + 1)) - 1;
    std::vector<double> raw(count);
    for (int i = 1; i <= count; ++i) {
        const int level = SchauderField::decode(i).first;
        raw[i - 1] = std::exp2(beta * level);
    }

    // C = sup_x sum_i rho~_i psi_i(x): the sum is piecewise linear with the
    // field's breakpoints, so the supremum sits on the dyadic grid.
    const SchauderField basis(max_level, 1.0);
    double sup = 0.0;
    for (const double x : basis.breakpoints())
        sup = std::max(sup, basis.eval_field(raw, x));
    rho.normalizer_ = sup;

    const double scale = std::log(2.0) / (2.0 * sup * std::sqrt(double(r)) * tau);
    rho.values_.resize(count);
    for (int i = 0; i < count; ++i) rho.values_[i] = raw[i] * scale;
    return rho;
}

RhoSequence RhoSequence::rescaled(double factor) const {
    if (!(factor > 0.0)) throw std::invalid_argument("RhoSequence: factor must be positive");
    RhoSequence out(*this);
    for (double& v : out.values_) v *= factor;
    return out;
}

double XiWeight::value() const {
    return std::exp(log_value_);
}

namespace {

double log_binomial(int k, int l) {
    return std::lgamma(double(k) + 1.0) - std::lgamma(double(l) + 1.0) -
           std::lgamma(double(k - l) + 1.0);
}

// log of sum_{l=0}^{min(r,k)} binom(k,l) rho^{2l}; terms with l > k vanish.
double log_xi_factor(int k, double rho_j, int r) {
    const int top = std::min(r, k);
    // Direct evaluation first; it is exact for the common small cases.
    double direct = 0.0;
    double binom = 1.0;   // binom(k, l)
    double power = 1.0;   // rho^{2l}
    const double rho2 = rho_j * rho_j;
    for (int l = 0; l <= top; ++l) {
        direct += binom * power;
        binom *= double(k - l) / double(l + 1);
        power *= rho2;
    }
    if (std::isfinite(direct)) return std::log(direct);

    // Log-sum-exp fallback for factors past the double range.
    double peak = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(top + 1);
    for (int l = 0; l <= top; ++l) {
        logs[l] = log_binomial(k, l) + 2.0 * l * std::log(rho_j);
        peak = std::max(peak, logs[l]);
    }
    double sum = 0.0;
    for (double lv : logs) sum += std::exp(lv - peak);
    return peak + std::log(sum);
}

}  // namespace

XiWeight xi(const MultiIndex& nu, const RhoSequence& rho) {
    if (nu.max_position() > static_cast<int>(rho.size()))
        throw std::out_of_range("xi: support exceeds rho length");
    double log_value = 0.0;
    for (const auto& [pos, exp] : nu.entries())
        log_value += log_xi_factor(exp, rho.value(pos), rho.r());
    return XiWeight(log_value, nu);
}

bool selection_less(const MultiIndex& a, const MultiIndex& b, const RhoSequence& rho) {
    const double la = xi(a, rho).log_value();
    const double lb = xi(b, rho).log_value();
    if (la != lb) return la < lb;
    return canonical_less(a, b);
}

IndexSet build_lambda(int n, const RhoSequence& rho, int variable_budget) {
    if (n < 1) throw std::invalid_argument("build_lambda: n must be >= 1");
    if (variable_budget < 1 || variable_budget > static_cast<int>(rho.size()))
        throw std::invalid_argument("build_lambda: variable budget out of range");

    struct Candidate {
        double log_xi;
        MultiIndex index;
        bool operator<(const Candidate& other) const {
            if (log_xi != other.log_xi) return log_xi < other.log_xi;
            return canonical_less(index, other.index);
        }
    };

    std::vector<MultiIndex> members{MultiIndex{}};
    std::unordered_set<MultiIndex, MultiIndexHash> chosen{MultiIndex{}};
    std::unordered_set<MultiIndex, MultiIndexHash> queued;
    std::set<Candidate> frontier;

    auto try_enqueue_children = [&](const MultiIndex& nu) {
        for (int j = 1; j <= variable_budget; ++j) {
            MultiIndex child = nu.plus_unit(j);
            if (chosen.count(child) || queued.count(child)) continue;
            bool ready = true;
            for (const auto& [pos, exp] : child.entries()) {
                if (!chosen.count(child.minus_unit(pos))) {
                    ready = false;
                    break;
                }
            }
            if (!ready) continue;
            queued.insert(child);
            frontier.insert({xi(child, rho).log_value(), std::move(child)});
        }
    };

    try_enqueue_children(MultiIndex{});
    while (static_cast<int>(members.size()) < n) {
        if (frontier.empty())
            throw std::logic_error("build_lambda: frontier exhausted");  // unreachable
        Candidate best = *frontier.begin();
        frontier.erase(frontier.begin());
        queued.erase(best.index);
        chosen.insert(best.index);
        members.push_back(best.index);
        try_enqueue_children(best.index);
    }

    // Canonical weighted order: degree, then xi, then reverse-lex.
    std::unordered_map<MultiIndex, double, MultiIndexHash> log_xi;
    log_xi.reserve(members.size());
    for (const auto& nu : members) log_xi.emplace(nu, xi(nu, rho).log_value());
    std::sort(members.begin(), members.end(),
              [&](const MultiIndex& a, const MultiIndex& b) {
                  const int da = a.total_degree(), db = b.total_degree();
                  if (da != db) return da < db;
                  const double la = log_xi.at(a), lb = log_xi.at(b);
                  if (la != lb) return la < lb;
                  return canonical_less(a, b);
              });
    return IndexSet(std::move(members));
}

}  // namespace wlslab
