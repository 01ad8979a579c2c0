#include "wlslab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace wlslab {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double gaussian_density(double t) {
    return kInvSqrt2Pi * std::exp(-0.5 * t * t);
}

// Acklam's rational approximation for the inverse normal CDF.
double acklam_quantile(double u) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double low = 0.02425;
    if (u < low) {
        const double q = std::sqrt(-2.0 * std::log(u));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (u > 1.0 - low) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - u));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = u - 0.5;
    const double s = q * q;
    return (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * q /
           (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1.0);
}

}  // namespace

double normal_cdf(double t) {
    return 0.5 * std::erfc(-t * 0.7071067811865476);
}

double normal_quantile(double u) {
    if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("normal_quantile: argument outside (0,1)");
    double x = acklam_quantile(u);
    // One Halley step against erfc-based CDF brings the result to machine
    // precision.
    const double e = normal_cdf(x) - u;
    const double v = e / gaussian_density(x);
    x -= v / (1.0 + 0.5 * x * v);
    return x;
}

HermiteDensitySampler::HermiteDensitySampler(int degree) : degree_(degree) {
    if (degree < 0) throw std::invalid_argument("HermiteDensitySampler: negative degree");
    bound_ = std::sqrt(4.0 * degree + 2.0) + 8.0;

    const HermiteEvaluator hermite(degree);
    const auto density = [&](double t) {
        const double h = hermite.eval_univariate(degree_, t);
        return h * h * gaussian_density(t);
    };

    // Tabulate the half-line CDF G(t) = int_0^t p by adaptive Simpson
    // bisection: a segment carries its density values at both ends and the
    // midpoint; the Simpson masses of its two halves estimate the linear
    // interpolation error of the CDF at the midpoint, |left - right| / 2.
    // Segments split until that error is below 5e-9, so the mirrored table
    // interpolates the full CDF within 1e-8.
    struct Segment {
        double a, b, fa, fm, fb;
    };
    const auto simpson = [](double a, double b, double fa, double fm, double fb) {
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    };

    // Seed with a grid fine enough to see every oscillation of |H_k|^2.
    const int seed_count = std::max(64, 8 * (degree + 1));
    std::vector<Segment> stack;
    stack.reserve(seed_count + 64);
    for (int i = seed_count; i-- > 0;) {
        const double a = bound_ * i / seed_count;
        const double b = bound_ * (i + 1) / seed_count;
        stack.push_back({a, b, density(a), density(0.5 * (a + b)), density(b)});
    }

    std::vector<std::pair<double, double>> half;  // (node, mass since previous node)
    half.reserve(4096);
    const double min_width = bound_ * 1e-9;
    while (!stack.empty()) {
        const Segment seg = stack.back();
        stack.pop_back();
        const double mid = 0.5 * (seg.a + seg.b);
        const double q1 = 0.5 * (seg.a + mid), q3 = 0.5 * (mid + seg.b);
        const double fq1 = density(q1), fq3 = density(q3);
        const double left = simpson(seg.a, mid, seg.fa, fq1, seg.fm);
        const double right = simpson(mid, seg.b, seg.fm, fq3, seg.fb);
        const bool too_wide = seg.b - seg.a > 0.25;
        if ((std::abs(left - right) > 1e-8 || too_wide) && seg.b - seg.a > min_width) {
            stack.push_back({mid, seg.b, seg.fm, fq3, seg.fb});
            stack.push_back({seg.a, mid, seg.fa, fq1, seg.fm});
        } else {
            half.emplace_back(mid, left);
            half.emplace_back(seg.b, right);
        }
    }

    // Prefix sums, normalization of the half mass to exactly 1/2, mirroring.
    double total = 0.0;
    for (auto& [node, mass] : half) total += std::exchange(mass, total + mass);
    const std::size_t m = half.size();
    grid_.resize(2 * m + 1);
    cum_.resize(2 * m + 1);
    grid_[m] = 0.0;
    cum_[m] = 0.5;
    for (std::size_t i = 0; i < m; ++i) {
        const double g = 0.5 * half[i].second / total;
        grid_[m + 1 + i] = half[i].first;
        cum_[m + 1 + i] = 0.5 + g;
        grid_[m - 1 - i] = -half[i].first;
        cum_[m - 1 - i] = 0.5 - g;
    }
}

double HermiteDensitySampler::cdf(double t) const {
    if (t <= grid_.front()) return 0.0;
    if (t >= grid_.back()) return 1.0;
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - grid_.begin()) - 1;
    const double span = grid_[i + 1] - grid_[i];
    const double frac = (t - grid_[i]) / span;
    return cum_[i] + frac * (cum_[i + 1] - cum_[i]);
}

double HermiteDensitySampler::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0))
        throw std::domain_error("HermiteDensitySampler: argument outside (0,1)");
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    if (it == cum_.begin()) return grid_.front();
    if (it == cum_.end()) return grid_.back();
    const std::size_t i = static_cast<std::size_t>(it - cum_.begin()) - 1;
    const double rise = cum_[i + 1] - cum_[i];
    if (rise <= 0.0) return grid_[i];  // flat spot at a density root
    return grid_[i] + (u - cum_[i]) / rise * (grid_[i + 1] - grid_[i]);
}

SamplingMeasure::SamplingMeasure(IndexSet index_set, int dimension)
    : index_set_(std::move(index_set)),
      dimension_(dimension),
      max_degree_(index_set_.max_degree()),
      evaluator_(index_set_.max_degree()) {
    if (index_set_.empty())
        throw std::invalid_argument("SamplingMeasure: empty index set");
    if (!index_set_.contains(MultiIndex{}))
        throw std::invalid_argument("SamplingMeasure: zero index missing from the set");
    if (index_set_.max_position() > dimension_)
        throw std::invalid_argument("SamplingMeasure: set uses variables beyond J");
    samplers_.reserve(max_degree_);
    for (int k = 1; k <= max_degree_; ++k)
        samplers_.push_back(std::make_unique<HermiteDensitySampler>(k));
}

double SamplingMeasure::weight(std::span<const double> y) const {
    if (static_cast<int>(y.size()) < dimension_)
        throw std::invalid_argument("SamplingMeasure: point is shorter than J");
    // Per-coordinate Hermite values up to the set's max degree.
    std::vector<double> table(static_cast<std::size_t>(max_degree_ + 1) * dimension_);
    std::vector<double> column(max_degree_ + 1);
    for (int j = 0; j < dimension_; ++j) {
        evaluator_.eval_all(y[j], column);
        for (int k = 0; k <= max_degree_; ++k)
            table[static_cast<std::size_t>(k) * dimension_ + j] = column[k];
    }
    double sum = 0.0;
    for (const auto& nu : index_set_.members()) {
        double prod = 1.0;
        for (const auto& [pos, exp] : nu.entries())
            prod *= table[static_cast<std::size_t>(exp) * dimension_ + (pos - 1)];
        sum += prod * prod;
    }
    // sum >= |H_0(y)|^2 = 1 because the zero index is a member.
    return static_cast<double>(index_set_.size()) / sum;
}

SamplingMeasure::Draw SamplingMeasure::draw(RngStream& rng) const {
    Draw out;
    out.point.resize(dimension_);
    out.weight = draw_into(rng, out.point);
    return out;
}

double SamplingMeasure::draw_into(RngStream& rng, std::span<double> point) const {
    if (static_cast<int>(point.size()) < dimension_)
        throw std::invalid_argument("SamplingMeasure: output row is shorter than J");
    const auto& members = index_set_.members();
    const MultiIndex& nu = members[rng.uniform_below(members.size())];
    auto entry = nu.entries().begin();
    for (int j = 1; j <= dimension_; ++j) {
        const double u = rng.uniform01();
        int deg = 0;
        if (entry != nu.entries().end() && entry->first == j) {
            deg = entry->second;
            ++entry;
        }
        point[j - 1] = (deg == 0) ? normal_quantile(u) : samplers_[deg - 1]->quantile(u);
    }
    return weight(point.first(dimension_));
}

const HermiteDensitySampler& SamplingMeasure::component_sampler(int k) const {
    if (k < 1 || k > max_degree_)
        throw std::out_of_range("SamplingMeasure: no sampler for that degree");
    return *samplers_[k - 1];
}

}  // namespace wlslab
