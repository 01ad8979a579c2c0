#pragma once

#include <memory>
#include <span>
#include <vector>

#include "wlslab/hermite.hpp"
#include "wlslab/multiindex.hpp"
#include "wlslab/rng.hpp"

namespace wlslab {

/// Standard normal CDF and its inverse (Acklam's rational approximation
/// polished by one Halley step; accurate to machine precision).
double normal_cdf(double t);
double normal_quantile(double u);

/// Inverse-CDF sampler for the univariate density |H_k(t)|^2 g(t). The CDF
/// is tabulated by adaptive Simpson quadrature on [-(sqrt(4k+2)+8),
/// sqrt(4k+2)+8], on a grid refined until linear interpolation of the CDF
/// is accurate to 1e-8; inversion is by bisection on the table plus linear
/// interpolation. The table is symmetric by construction.
class HermiteDensitySampler {
public:
    explicit HermiteDensitySampler(int degree);

    int degree() const { return degree_; }
    double support_bound() const { return bound_; }

    double cdf(double t) const;
    /// Requires 0 < u < 1.
    double quantile(double u) const;

    std::size_t table_size() const { return grid_.size(); }

private:
    int degree_;
    double bound_;
    std::vector<double> grid_;    // ascending abscissae
    std::vector<double> cum_;     // CDF values at grid_, cum_.front()=0, back()=1
};

/// The mixture measure d(mu) = (1/n) sum_{nu in Lambda} prod_{j<=J}
/// |H_{nu_j}(y_j)|^2 d(gamma_J) together with the matching weight
/// w(y) = n / sum_{nu} |H_nu(y)|^2. Immutable once built; draws take an
/// explicit stream and consume exactly J+1 uniforms each.
class SamplingMeasure {
public:
    SamplingMeasure(IndexSet index_set, int dimension);

    const IndexSet& index_set() const { return index_set_; }
    int dimension() const { return dimension_; }
    int max_degree() const { return max_degree_; }

    /// w(y) = n / sum_{nu in Lambda} |H_nu(y)|^2, using the first J
    /// coordinates. Always in (0, n] since the zero index is a member.
    double weight(std::span<const double> y) const;

    struct Draw {
        std::vector<double> point;
        double weight;
    };
    Draw draw(RngStream& rng) const;

    /// Fills a preallocated row (size J) and returns the weight.
    double draw_into(RngStream& rng, std::span<double> point) const;

    /// The degree-k component sampler, 1 <= k <= max_degree().
    const HermiteDensitySampler& component_sampler(int k) const;

private:
    IndexSet index_set_;
    int dimension_;
    int max_degree_;
    HermiteEvaluator evaluator_;
    std::vector<std::unique_ptr<HermiteDensitySampler>> samplers_;  // [k-1]
};

}  // namespace wlslab
