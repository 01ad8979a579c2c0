#include "wlslab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "wlslab/field.hpp"
#include "wlslab/rng.hpp"
#include "wlslab/sampling.hpp"

namespace wlslab {

namespace {

constexpr std::uint64_t kTagReference = 0x5245464552ull;
constexpr std::uint64_t kTagRefCheck = 0x434845434bull;
constexpr std::uint64_t kTagTrial = 0x545249414cull;

constexpr int kBlockRows = 1024;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_compact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

int ceil_log(int n) {
    return std::max(1, static_cast<int>(std::ceil(std::log(double(n)))));
}

void parallel_for(int begin, int end, int threads, const std::function<void(int)>& fn) {
    threads = std::min(threads, end - begin);
    if (threads <= 1) {
        for (int i = begin; i < end; ++i) fn(i);
        return;
    }
    std::atomic<int> next{begin};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        try {
            for (int i; (i = next.fetch_add(1)) < end;) fn(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
            next.store(end);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

int effective_threads(const ExperimentConfig& config) {
    if (config.threads > 0) return config.threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::filesystem::path resolved_output_dir(const ExperimentConfig& config) {
    const char* env = std::getenv("WLSLAB_OUTDIR");
    std::filesystem::path dir = (env && *env) ? env : config.output_dir;
    std::filesystem::create_directories(dir);
    return dir;
}

double fit_slope(std::span<const ConvergenceRow> rows) {
    if (rows.size() < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& row : rows) {
        const double x = std::log(double(row.n));
        const double y = std::log(row.mean_error);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double k = double(rows.size());
    return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

}  // namespace

std::string ExperimentConfig::tag() const {
    std::ostringstream out;
    out << "beta" << format_compact(beta) << "_tau" << format_compact(tau) << "_L"
        << levels << "_M" << mesh_exponent << "_r" << r << "_nref" << n_ref;
    return out.str();
}

void ExperimentConfig::validate() const {
    if (!(beta > 0.0)) throw std::invalid_argument("config: beta must be positive");
    if (!(tau > 0.0)) throw std::invalid_argument("config: tau must be positive");
    if (levels < 0) throw std::invalid_argument("config: levels must be >= 0");
    if (r < 1) throw std::invalid_argument("config: r must be >= 1");
    if (mesh_exponent < levels + 1)
        throw std::invalid_argument("config: mesh_exponent must be >= levels + 1");
    if (n_schedule.empty()) throw std::invalid_argument("config: empty n schedule");
    for (const int n : n_schedule)
        if (n < 1) throw std::invalid_argument("config: schedule entries must be >= 1");
    if (budget_rule != "3nlogn" && budget_rule != "kappa")
        throw std::invalid_argument("config: budget_rule must be 3nlogn or kappa");
    if (!(kappa_s > 0.0)) throw std::invalid_argument("config: kappa_s must be positive");
    if (n_ref < *std::max_element(n_schedule.begin(), n_schedule.end()))
        throw std::invalid_argument("config: n_ref must dominate the schedule");
    if (m_ref_multiplier < 1)
        throw std::invalid_argument("config: m_ref_multiplier must be >= 1");
    if (mc_reps < 1) throw std::invalid_argument("config: mc_reps must be >= 1");
    if (threads < 0) throw std::invalid_argument("config: threads must be >= 0");
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    ExperimentConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw std::runtime_error("config line " + std::to_string(line_no) +
                                         ": expected key = value");
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "beta") config.beta = std::stod(value);
        else if (key == "tau") config.tau = std::stod(value);
        else if (key == "levels") config.levels = std::stoi(value);
        else if (key == "r") config.r = std::stoi(value);
        else if (key == "mesh_exponent") config.mesh_exponent = std::stoi(value);
        else if (key == "n_schedule") {
            config.n_schedule.clear();
            std::string item;
            std::istringstream ss(value);
            while (std::getline(ss, item, ','))
                config.n_schedule.push_back(std::stoi(trim(item)));
        } else if (key == "budget_rule") config.budget_rule = value;
        else if (key == "kappa_s") config.kappa_s = std::stod(value);
        else if (key == "n_ref") config.n_ref = std::stoi(value);
        else if (key == "m_ref_multiplier") config.m_ref_multiplier = std::stoi(value);
        else if (key == "mc_reps") config.mc_reps = std::stoi(value);
        else if (key == "seed") config.seed = std::stoull(value);
        else if (key == "forcing") config.forcing = std::stod(value);
        else if (key == "output_dir") config.output_dir = value;
        else if (key == "threads") config.threads = std::stoi(value);
        else throw std::runtime_error("config: unknown key '" + key + "'");
    }
    config.validate();
    return config;
}

int sample_budget(const ExperimentConfig& config, int n) {
    if (n < 1) throw std::invalid_argument("sample_budget: n must be >= 1");
    if (config.budget_rule == "3nlogn") return 3 * n * ceil_log(n);
    // kappa mode: smallest m with n <= kappa(s) m / ln m.
    const double kappa = (1.0 - std::log(2.0)) / (2.0 + 4.0 * config.kappa_s);
    int m = std::max(3, n);
    while (kappa * m / std::log(double(m)) < double(n)) {
        const int jump = static_cast<int>(std::ceil(double(n) * std::log(double(m)) / kappa));
        m = std::max(m + 1, jump);
    }
    while (m > 3 && kappa * (m - 1) / std::log(double(m - 1)) >= double(n)) --m;
    return m;
}

WlsEstimator run_estimator(const ExperimentConfig& config, int n, int m,
                           std::uint64_t seed_tag) {
    const int J = config.variable_count();
    const RhoSequence rho = RhoSequence::build(config.beta, config.levels, config.r,
                                               config.tau);
    const IndexSet set = build_lambda(n, rho, J);
    const SamplingMeasure measure(set, J);
    const auto mesh = Mesh::uniform_dyadic(config.mesh_exponent);
    const SchauderField field(config.levels, config.tau);
    const FemSystem system(mesh, field, constant_forcing(config.forcing));

    GramAssembler assembler(set, J, mesh);
    const int threads = effective_threads(config);
    const auto n_h = static_cast<Eigen::Index>(mesh->interior_count());

    Eigen::MatrixXd points(kBlockRows, J);
    Eigen::VectorXd weights(kBlockRows);
    Eigen::MatrixXd solutions(kBlockRows, n_h);

    for (int start = 0; start < m; start += kBlockRows) {
        const int rows = std::min(kBlockRows, m - start);
        parallel_for(0, rows, threads, [&](int local) {
            const int i = start + local;
            RngStream stream(derive_seed(config.seed, {seed_tag, std::uint64_t(i)}));
            std::vector<double> y(J);
            weights[local] = measure.draw_into(stream, y);
            for (int j = 0; j < J; ++j) points(local, j) = y[j];
            const FemSolution u = system.solve(y);
            solutions.row(local) = u.interior_values().transpose();
        });
        assembler.add_block(points.topRows(rows), weights.head(rows),
                            solutions.topRows(rows));
    }
    return estimate(assembler.finalize(), set);
}

WlsEstimator build_reference(const ExperimentConfig& config) {
    config.validate();
    const int m_ref = config.m_ref_multiplier * config.n_ref * ceil_log(config.n_ref);
    WlsEstimator reference =
        run_estimator(config, config.n_ref, m_ref, kTagReference);
    if (!reference.conditioned()) {
        std::ostringstream msg;
        msg << "reference estimator failed the conditioning gate (||G-I||_2 = "
            << reference.gram_deviation() << " > 1/2) with n_ref = " << config.n_ref
            << ", m_ref = " << m_ref << "; re-run with a different seed";
        throw std::runtime_error(msg.str());
    }
    const auto dir = resolved_output_dir(config);
    save_estimator(reference, dir / (config.tag() + "_reference.bin"));
    return reference;
}

WlsEstimator load_or_build_reference(const ExperimentConfig& config) {
    const auto path = resolved_output_dir(config) / (config.tag() + "_reference.bin");
    if (std::filesystem::exists(path)) {
        WlsEstimator reference = load_estimator(path);
        const bool matches =
            reference.index_set().size() == static_cast<std::size_t>(config.n_ref) &&
            reference.mesh().nodes().size() ==
                static_cast<std::size_t>((1 << config.mesh_exponent) + 1);
        if (matches) return reference;
    }
    return build_reference(config);
}

ConvergenceTable convergence_study(const ExperimentConfig& config) {
    config.validate();
    const WlsEstimator reference = load_or_build_reference(config);

    // Independently seeded duplicate of the reference protocol; its distance
    // to the reference bounds the reference noise floor.
    const int m_ref = config.m_ref_multiplier * config.n_ref * ceil_log(config.n_ref);
    const WlsEstimator check = run_estimator(config, config.n_ref, m_ref, kTagRefCheck);
    if (!check.conditioned())
        throw std::runtime_error("check reference failed the conditioning gate");

    ConvergenceTable table;
    table.reference_check = parseval_distance(reference, check);

    for (const int n : config.n_schedule) {
        const int m = sample_budget(config, n);
        ConvergenceRow row;
        row.n = n;
        row.m = m;
        std::vector<double> distances(config.mc_reps);
        for (int rep = 0; rep < config.mc_reps; ++rep) {
            const std::uint64_t tag =
                derive_seed(kTagTrial, {std::uint64_t(n), std::uint64_t(rep)});
            const WlsEstimator trial = run_estimator(config, n, m, tag);
            if (!trial.conditioned()) ++row.failures;
            distances[rep] = parseval_distance(trial, reference);
        }
        double mean = 0.0;
        for (const double d : distances) mean += d;
        mean /= distances.size();
        double var = 0.0;
        for (const double d : distances) var += (d - mean) * (d - mean);
        row.mean_error = mean;
        row.std_error = distances.size() > 1
                            ? std::sqrt(var / (distances.size() - 1.0) / distances.size())
                            : 0.0;
        table.rows.push_back(row);
    }

    // Slope fits exclude any degenerate n == n_ref row.
    std::vector<ConvergenceRow> fit_rows;
    for (const auto& row : table.rows)
        if (row.n != config.n_ref) fit_rows.push_back(row);
    table.slope_full = fit_slope(fit_rows);
    const std::size_t upper =
        std::min(fit_rows.size(),
                 std::max<std::size_t>(2, fit_rows.size() - fit_rows.size() / 2));
    table.slope_upper =
        fit_slope(std::span<const ConvergenceRow>(fit_rows).subspan(fit_rows.size() - upper));

    double min_error = std::numeric_limits<double>::infinity();
    for (const auto& row : table.rows) min_error = std::min(min_error, row.mean_error);
    table.reference_consistent = table.reference_check < min_error / 3.0;

    table.monotone = true;
    for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
        const auto& a = table.rows[i];
        const auto& b = table.rows[i + 1];
        const double slack = 2.0 * std::sqrt(a.std_error * a.std_error +
                                             b.std_error * b.std_error);
        if (b.mean_error > a.mean_error + slack) table.monotone = false;
    }

    const auto dir = resolved_output_dir(config);
    const std::string tag = config.tag();
    {
        std::ofstream csv(dir / (tag + "_convergence.csv"), std::ios::binary);
        csv << "n,m,mean_error,stderr,failures\n";
        for (const auto& row : table.rows)
            csv << row.n << ',' << row.m << ',' << format_double(row.mean_error) << ','
                << format_double(row.std_error) << ',' << row.failures << '\n';
    }
    {
        std::ofstream loglog(dir / (tag + "_loglog.dat"), std::ios::binary);
        loglog << "# log10(n) log10(mean_error)  [slope_full "
               << format_double(table.slope_full) << ", slope_upper "
               << format_double(table.slope_upper) << "]\n";
        for (const auto& row : table.rows)
            loglog << format_double(std::log10(double(row.n))) << ' '
                   << format_double(std::log10(row.mean_error)) << '\n';
    }
    {
        std::ofstream summary(dir / (tag + "_summary.txt"), std::ios::binary);
        summary << "slope_full " << format_double(table.slope_full) << '\n'
                << "slope_upper " << format_double(table.slope_upper) << '\n'
                << "reference_check " << format_double(table.reference_check) << '\n'
                << "reference_consistent " << (table.reference_consistent ? 1 : 0) << '\n'
                << "monotone " << (table.monotone ? 1 : 0) << '\n'
                << "valid " << (table.valid() ? 1 : 0) << '\n';
    }
    return table;
}

std::vector<std::pair<int, int>> index_section(const IndexSet& set, int j1, int j2) {
    std::vector<std::pair<int, int>> points;
    for (const auto& nu : set.members()) {
        bool on_pair = true;
        for (const auto& [pos, exp] : nu.entries())
            if (pos != j1 && pos != j2) {
                on_pair = false;
                break;
            }
        if (on_pair) points.emplace_back(nu.exponent(j1), nu.exponent(j2));
    }
    std::sort(points.begin(), points.end());
    return points;
}

AnisotropyReport anisotropy_report(const ExperimentConfig& config) {
    config.validate();
    const int J = config.variable_count();
    const RhoSequence rho = RhoSequence::build(config.beta, config.levels, config.r,
                                               config.tau);
    AnisotropyReport report;
    static constexpr int kLevelHeads[4] = {1, 2, 4, 8};

    for (const int n : config.n_schedule) {
        const IndexSet set = build_lambda(n, rho, J);
        AnisotropyRow row;
        row.n = n;
        for (const auto& nu : set.members())
            for (int c = 0; c < 4; ++c)
                if (kLevelHeads[c] <= J)
                    row.max_degree[c] = std::max(row.max_degree[c],
                                                 nu.exponent(kLevelHeads[c]));
        report.rows.push_back(row);
    }

    const int n_largest = *std::max_element(config.n_schedule.begin(),
                                            config.n_schedule.end());
    const IndexSet largest = build_lambda(n_largest, rho, J);
    const std::pair<int, int> pairs[] = {{1, 2}, {1, 4}, {1, 8},
                                         {2, 3}, {4, 5}, {8, 9}};
    for (const auto& [j1, j2] : pairs) {
        if (j1 > J || j2 > J) continue;
        AnisotropySection section;
        section.first = j1;
        section.second = j2;
        section.points = index_section(largest, j1, j2);
        auto mirrored = section.points;
        for (auto& [a, b] : mirrored) std::swap(a, b);
        std::sort(mirrored.begin(), mirrored.end());
        section.symmetric = mirrored == section.points;
        report.sections.push_back(std::move(section));
    }

    const auto dir = resolved_output_dir(config);
    const std::string tag = config.tag();
    {
        std::ofstream csv(dir / (tag + "_anisotropy.csv"), std::ios::binary);
        csv << "n,maxdeg_psi00,maxdeg_psi10,maxdeg_psi20,maxdeg_psi30\n";
        for (const auto& row : report.rows)
            csv << row.n << ',' << row.max_degree[0] << ',' << row.max_degree[1] << ','
                << row.max_degree[2] << ',' << row.max_degree[3] << '\n';
    }
    {
        std::ofstream csv(dir / (tag + "_sections.csv"), std::ios::binary);
        csv << "j1,j2,deg1,deg2\n";
        for (const auto& section : report.sections)
            for (const auto& [a, b] : section.points)
                csv << section.first << ',' << section.second << ',' << a << ',' << b
                    << '\n';
    }
    return report;
}

}  // namespace wlslab
