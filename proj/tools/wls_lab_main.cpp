#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "wlslab/experiments.hpp"
#include "wlslab/field.hpp"
#include "wlslab/rng.hpp"
#include "wlslab/sampling.hpp"
#include "wlslab/weights.hpp"

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int cmd_build_set(double beta, int levels, int r, double tau, int n,
                  const std::string& set_path, const std::string& csv_path) {
    const auto rho = wlslab::RhoSequence::build(beta, levels, r, tau);
    const int J = static_cast<int>(rho.size());
    const auto set = wlslab::build_lambda(n, rho, J);

    std::ofstream set_file(set_path, std::ios::binary);
    if (!set_file) {
        std::cerr << "cannot open " << set_path << "\n";
        return 1;
    }
    set.save(set_file);

    if (!csv_path.empty()) {
        std::ofstream csv(csv_path, std::ios::binary);
        if (!csv) {
            std::cerr << "cannot open " << csv_path << "\n";
            return 1;
        }
        csv << "index,xi\n";
        for (const auto& nu : set.members())
            csv << '"' << wlslab::to_line(nu) << "\"," << fmt17(wlslab::xi(nu, rho).value())
                << '\n';
    }
    std::cout << "wrote " << set.size() << " indices to " << set_path << "\n";
    return 0;
}

int cmd_sample(const std::string& set_path, int J, int m, std::uint64_t seed,
               const std::string& out_path) {
    std::ifstream set_file(set_path);
    if (!set_file) {
        std::cerr << "cannot open " << set_path << "\n";
        return 1;
    }
    const auto set = wlslab::IndexSet::load(set_file);
    const wlslab::SamplingMeasure measure(set, J);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path, std::ios::binary);
        if (!file) {
            std::cerr << "cannot open " << out_path << "\n";
            return 1;
        }
        out = &file;
    }
    for (int j = 1; j <= J; ++j) *out << 'y' << j << ',';
    *out << "w\n";
    std::vector<double> y(J);
    for (int i = 0; i < m; ++i) {
        wlslab::RngStream stream(wlslab::derive_seed(seed, {std::uint64_t(i)}));
        const double w = measure.draw_into(stream, y);
        for (int j = 0; j < J; ++j) *out << fmt17(y[j]) << ',';
        *out << fmt17(w) << '\n';
    }
    return 0;
}

int cmd_reference(const wlslab::ExperimentConfig& config) {
    const auto reference = wlslab::build_reference(config);
    std::cout << "reference built: n_ref = " << config.n_ref
              << ", ||G-I||_2 = " << fmt17(reference.gram_deviation()) << "\n";
    return 0;
}

int cmd_converge(const wlslab::ExperimentConfig& config) {
    const auto table = wlslab::convergence_study(config);
    std::cout << "n,m,mean_error,stderr,failures\n";
    for (const auto& row : table.rows)
        std::cout << row.n << ',' << row.m << ',' << fmt17(row.mean_error) << ','
                  << fmt17(row.std_error) << ',' << row.failures << '\n';
    std::cout << "slope_full " << fmt17(table.slope_full) << "\n"
              << "slope_upper " << fmt17(table.slope_upper) << "\n"
              << "reference_check " << fmt17(table.reference_check) << "\n"
              << "reference_consistent " << (table.reference_consistent ? "yes" : "no")
              << "\n"
              << "monotone " << (table.monotone ? "yes" : "no") << "\n";
    if (!table.valid()) {
        std::cerr << "run flagged invalid\n";
        return 1;
    }
    return 0;
}

int cmd_anisotropy(const wlslab::ExperimentConfig& config) {
    const auto report = wlslab::anisotropy_report(config);
    std::cout << "n,maxdeg_psi00,maxdeg_psi10,maxdeg_psi20,maxdeg_psi30\n";
    for (const auto& row : report.rows)
        std::cout << row.n << ',' << row.max_degree[0] << ',' << row.max_degree[1] << ','
                  << row.max_degree[2] << ',' << row.max_degree[3] << '\n';
    for (const auto& section : report.sections)
        std::cout << "section (" << section.first << ',' << section.second << "): "
                  << section.points.size() << " indices, "
                  << (section.symmetric ? "symmetric" : "asymmetric") << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted least-squares polynomial approximation lab for lognormal "
                 "elliptic PDEs"};
    app.require_subcommand(1);

    // build-set
    double beta = 0.5, tau = 1.0;
    int levels = 6, r = 1, n = 100;
    std::string set_path = "lambda.txt", csv_path;
    auto* build_set = app.add_subcommand("build-set", "Construct the index set Lambda_n");
    build_set->add_option("--beta", beta, "level growth exponent")->required();
    build_set->add_option("--levels", levels, "Schauder truncation level L")->required();
    build_set->add_option("--r", r, "weight order r");
    build_set->add_option("--tau", tau, "field rescaling");
    build_set->add_option("--n", n, "set cardinality")->required();
    build_set->add_option("--out", set_path, "output index-set file");
    build_set->add_option("--csv", csv_path, "optional CSV of (index, xi)");

    // sample
    std::string sample_set, sample_out;
    int sample_J = 0, sample_m = 0;
    std::uint64_t sample_seed = 0;
    auto* sample = app.add_subcommand("sample", "Draw from the optimal measure");
    sample->add_option("--set", sample_set, "index-set file")->required();
    sample->add_option("--J", sample_J, "active variable count")->required();
    sample->add_option("--m", sample_m, "number of draws")->required();
    sample->add_option("--seed", sample_seed, "master seed")->required();
    sample->add_option("--out", sample_out, "output CSV (stdout when omitted)");

    // config-driven commands
    std::string config_path;
    int thread_override = -1;
    auto add_config_cmd = [&](const char* name, const char* help) {
        auto* cmd = app.add_subcommand(name, help);
        cmd->add_option("--config", config_path, "experiment config file")->required();
        cmd->add_option("--threads", thread_override, "override the config thread count");
        return cmd;
    };
    auto* reference = add_config_cmd("reference", "Build and persist the reference estimator");
    auto* converge = add_config_cmd("converge", "Run the convergence study");
    auto* anisotropy = add_config_cmd("anisotropy", "Report index-set anisotropy");

    CLI11_PARSE(app, argc, argv);

    try {
        if (build_set->parsed())
            return cmd_build_set(beta, levels, r, tau, n, set_path, csv_path);
        if (sample->parsed())
            return cmd_sample(sample_set, sample_J, sample_m, sample_seed, sample_out);
        auto config = wlslab::load_config(config_path);
        if (thread_override >= 0) config.threads = thread_override;
        if (reference->parsed()) return cmd_reference(config);
        if (converge->parsed()) return cmd_converge(config);
        if (anisotropy->parsed()) return cmd_anisotropy(config);
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
    return 0;
}
