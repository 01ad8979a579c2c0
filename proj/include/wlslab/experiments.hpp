#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "wlslab/weights.hpp"
#include "wlslab/wls.hpp"

namespace wlslab {

/// Everything a convergence run needs. Loaded from a plain key = value file
/// whose keys are exactly these field names; WLSLAB_OUTDIR overrides
/// output_dir when set.
struct ExperimentConfig {
    double beta = 0.5;
    double tau = 1.0;
    int levels = 6;              // Schauder truncation L; J = 2^{L+1}-1
    int r = 1;
    int mesh_exponent = 9;       // M; uniform mesh of step 2^-M, M >= L+1
    std::vector<int> n_schedule = {25, 50, 100, 200, 400};
    std::string budget_rule = "3nlogn";  // or "kappa"
    double kappa_s = 0.5;        // s in kappa(s) = (1 - ln 2)/(2 + 4s)
    int n_ref = 800;
    int m_ref_multiplier = 20;   // m_ref = multiplier * n_ref * ceil(ln n_ref)
    int mc_reps = 5;             // Monte Carlo repetitions per n
    std::uint64_t seed = 20260810;
    double forcing = 1.0;        // constant right-hand side
    std::string output_dir = "out";
    int threads = 0;             // 0 = hardware concurrency

    int variable_count() const { return (1 << (levels + 1)) - 1; }
    /// Deterministic file-name stem encoding the run parameters.
    std::string tag() const;
    void validate() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);

/// m for a given n: 3 n ceil(ln n), or in kappa mode the smallest m with
/// n <= kappa(s) m / ln m.
int sample_budget(const ExperimentConfig& config, int n);

/// Weighted least-squares estimator of u_h on Lambda_n from m samples of
/// the truncated optimal measure; the samples' FEM solves run on a worker
/// pool while reduction order stays fixed. seed_tag separates independent
/// sample populations drawn from one master seed.
WlsEstimator run_estimator(const ExperimentConfig& config, int n, int m,
                           std::uint64_t seed_tag);

/// The reference protocol: n_ref indices, m_ref = multiplier * n_ref *
/// ceil(ln n_ref) samples. Persists the result under output_dir and throws
/// if the conditioning gate fails (re-run with another seed).
WlsEstimator build_reference(const ExperimentConfig& config);

/// Loads the persisted reference if present, otherwise builds it.
WlsEstimator load_or_build_reference(const ExperimentConfig& config);

struct ConvergenceRow {
    int n = 0;
    int m = 0;
    double mean_error = 0.0;
    double std_error = 0.0;
    int failures = 0;            // unconditioned trials among mc_reps
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    double slope_upper = 0.0;    // log-log fit over the upper half of the schedule
    double slope_full = 0.0;     // log-log fit over the whole schedule
    double reference_check = 0.0;         // distance between the two references
    bool reference_consistent = false;    // check < min(mean_error) / 3
    bool monotone = false;                // means non-increasing up to 2 std errors
    bool valid() const { return reference_consistent && monotone; }
};

/// Full protocol: reference (plus an independently seeded check reference),
/// mc_reps trials per n measured against the reference in the Parseval
/// metric, slope fits, and CSV/loglog/summary files under output_dir.
/// Rows with n == n_ref are reported but excluded from the slope fits.
ConvergenceTable convergence_study(const ExperimentConfig& config);

struct AnisotropyRow {
    int n = 0;
    // Largest Hermite degree attached to psi_{0,0}, psi_{1,0}, psi_{2,0},
    // psi_{3,0} (variables 1, 2, 4, 8).
    int max_degree[4] = {0, 0, 0, 0};
};

struct AnisotropySection {
    int first = 0, second = 0;           // 1-based variable positions
    std::vector<std::pair<int, int>> points;  // members supported on the pair
    bool symmetric = false;
};

struct AnisotropyReport {
    std::vector<AnisotropyRow> rows;     // one per n in the schedule
    std::vector<AnisotropySection> sections;  // for the largest n
};

/// Index-set growth report: per-n maxima along the first Schauder levels
/// and two-dimensional sections of the largest set, written as CSV.
AnisotropyReport anisotropy_report(const ExperimentConfig& config);

/// The section of a set along two coordinates: all (a, b) with
/// a e_{j1} + b e_{j2} in the set and every other coordinate zero.
std::vector<std::pair<int, int>> index_section(const IndexSet& set, int j1, int j2);

}  // namespace wlslab
