/*
 * Copyright 2026 The sgstab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "sgstab/config.hpp"
#include "sgstab/solver.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitNoGuarantee = 4;

namespace fs = std::filesystem;
using namespace sgstab;

struct GlobalOpts {
    std::string config_path;
    std::string output_dir;  // overrides [output] dir when set
    int workers = 0;
    bool verbose = false;
};

ExperimentConfig load(const GlobalOpts& g)
{
    ExperimentConfig c = load_config(g.config_path);
    if (!g.output_dir.empty()) c.output.directory = g.output_dir;
    return c;
}

void write_file(const fs::path& path, const std::string& content)
{
    fs::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << content;
}

std::string timestamp()
{
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    return buf;
}

CovarianceKernel kernel_from_config(const FieldConfig& f)
{
    switch (f.kernel) {
        case CovarianceKernel::Kind::Exponential:
            return CovarianceKernel::exponential(f.sigma2, f.corr_len);
        case CovarianceKernel::Kind::Matern:
            return CovarianceKernel::matern(f.sigma2, f.corr_len, f.nu);
        case CovarianceKernel::Kind::SquaredExponential:
        default:
            return CovarianceKernel::squared_exponential(f.sigma2, f.corr_len);
    }
}

std::string metadata_text(const ExperimentConfig& c, const StabilityCertificate* cert)
{
    std::ostringstream os;
    os << "# metadata (timestamp only, data files carry no wall-clock content)\n";
    os << "# generated_at: " << timestamp() << "\n\n";
    os << echo_config(c);
    if (cert) {
        // certificate lines are commented so the file re-parses as a config
        std::ostringstream cs;
        write_certificate_report(cs, *cert);
        os << "\n";
        std::istringstream is(cs.str());
        std::string line;
        while (std::getline(is, line)) {
            os << (line.empty() || line[0] == '#' ? "" : "# ") << line << "\n";
        }
    }
    return os.str();
}

int cmd_kl(const GlobalOpts& g)
{
    const ExperimentConfig c = load(g);
    if (!(c.field.sigma2 > 0.0)) {
        throw std::invalid_argument("config: field.sigma2 must be positive for the kl command");
    }
    const CovarianceKernel kernel = kernel_from_config(c.field);
    const int n_quad = c.field.n_quad > 0 ? c.field.n_quad : std::max(4 * c.basis.dims, 8 * c.grid.cells);
    KlExpansion kl;
    CovarianceFn cov;
    if (c.field.measure_x.size() > 0) {
        const double mean = plastic_slope(c.material);
        ConditionedField cf = condition([mean](double) { return mean; }, kernel, c.field.measure_x,
                                        c.field.measure_z);
        kl = kl_decompose(cf, c.grid.length, c.basis.dims, n_quad);
        cov = cf.covariance_function();
    } else {
        kl = kl_decompose(kernel, c.grid.length, c.basis.dims, n_quad);
        cov = CovarianceFn(kernel);
    }

    const fs::path dir(c.output.directory);
    {
        std::ostringstream os;
        write_kl_table(os, kl, kernel.describe());
        write_file(dir / "kl_eigenfunctions.txt", os.str());
    }
    {
        const ExplainedVariance ev = explained_variance(kl, cov);
        std::ostringstream os;
        os.precision(17);
        os << "# explained variance for M = " << kl.modes() << "\n";
        os << "total_ratio = " << ev.total << "\n";
        os << "# columns: x pointwise_ratio\n";
        for (Eigen::Index i = 0; i < kl.grid.size(); ++i) {
            os << kl.grid[i] << " " << ev.pointwise(kl.grid[i]) << "\n";
        }
        write_file(dir / "kl_variance.txt", os.str());
    }
    write_file(dir / "kl_metadata.txt", metadata_text(c, nullptr));
    std::cout << "kl: wrote " << (dir / "kl_eigenfunctions.txt").string() << " ("
              << kl.modes() << " modes, leading eigenvalue " << kl.eigenvalues[0] << ")\n";
    return kExitOk;
}

StabilityCertificate certify_pipeline(const ExperimentConfig& c, GalerkinSystem* system_out)
{
    ExperimentConfig frozen = c;
    frozen.grid.t_end = 0.0;  // assemble and certify only
    SimulationResult r = run(frozen);
    if (system_out) *system_out = std::move(r.system);
    return r.certificate;
}

int cmd_certify(const GlobalOpts& g)
{
    const ExperimentConfig c = load(g);
    GalerkinSystem system;
    const StabilityCertificate cert = certify_pipeline(c, &system);

    const fs::path dir(c.output.directory);
    {
        std::ostringstream os;
        write_certificate_report(os, cert);
        write_file(dir / "certificate.txt", os.str());
    }
    {
        std::ostringstream os;
        write_system_report(os, system);
        write_file(dir / "system.txt", os.str());
    }
    write_file(dir / "certify_metadata.txt", metadata_text(c, &cert));

    write_certificate_report(std::cout, cert);
    if (cert.valid && cert.mu > 0.0) return kExitOk;
    std::cout << "certificate does not guarantee decay"
              << (cert.valid ? " (rate not positive)" : " (dissipativity fails)") << "\n";
    return kExitNoGuarantee;
}

int cmd_simulate(const GlobalOpts& g)
{
    const ExperimentConfig c = load(g);
    const SimulationResult r = run(c);

    const fs::path dir(c.output.directory);
    {
        std::ostringstream os;
        write_timeseries(os, r.series, r.grid.centers);
        write_file(dir / "series.txt", os.str());
    }
    write_file(dir / "metadata.txt", metadata_text(c, &r.certificate));

    const Eigen::Index last = r.series.t.size() - 1;
    write_certificate_report(std::cout, r.certificate);
    std::cout << "final t = " << r.series.t[last]
              << ", normalized lyapunov = " << r.series.normalized[last] << "\n";
    std::cout << "wrote " << (dir / "series.txt").string() << "\n";
    return kExitOk;
}

void apply_override(ExperimentConfig& c, const std::string& name, double value)
{
    if (name == "material.sigma_star") c.material.sigma_star = value;
    else if (name == "material.kappa0") c.material.kappa0 = value;
    else if (name == "material.kappa1") c.material.kappa1 = value;
    else if (name == "material.kappa") { c.material.kappa0 = value; c.material.kappa1 = value; }
    else if (name == "material.E") c.material.elastic_modulus = value;
    else if (name == "material.relation_coeff") c.material.relation_coeff = value;
    else if (name == "stability.mu_hat") c.stability.mu_hat = value;
    else if (name == "stability.h_plus") c.stability.h_plus = value;
    else if (name == "stability.h_minus") c.stability.h_minus = value;
    else if (name == "field.sigma2") c.field.sigma2 = value;
    else if (name == "field.corr_length") c.field.corr_len = value;
    else if (name == "grid.N") c.grid.cells = static_cast<int>(value);
    else if (name == "grid.cfl") c.grid.cfl = value;
    else if (name == "grid.t_end") c.grid.t_end = value;
    else if (name == "basis.K") c.basis.order = static_cast<int>(value);
    else if (name == "basis.M") c.basis.dims = static_cast<int>(value);
    else throw std::invalid_argument("sweep: unknown or unsupported parameter '" + name + "'");
}

int cmd_sweep(const GlobalOpts& g, const std::string& param, const std::vector<double>& values)
{
    if (values.empty()) throw std::invalid_argument("sweep: the value list must not be empty");
    const ExperimentConfig base = load(g);
    {
        ExperimentConfig probe = base;  // fail fast if the parameter is unknown
        apply_override(probe, param, values.front());
    }

    struct Row {
        double value = 0.0;
        bool ok = false;
        std::string error;
        double margin = 0.0, mu = 0.0, final_lbar = 0.0;
    };
    std::vector<Row> rows(values.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= values.size()) return;
            Row& row = rows[i];
            row.value = values[i];
            try {
                ExperimentConfig c = base;
                apply_override(c, param, values[i]);
                std::ostringstream sub;
                sub << "sweep_" << param << "_" << values[i];
                c.output.directory = (fs::path(base.output.directory) / sub.str()).string();
                c = parse_config_text(echo_config(c));  // re-validate after the override
                const SimulationResult r = run(c);
                {
                    std::ostringstream os;
                    write_timeseries(os, r.series, r.grid.centers);
                    write_file(fs::path(c.output.directory) / "series.txt", os.str());
                }
                write_file(fs::path(c.output.directory) / "metadata.txt",
                           metadata_text(c, &r.certificate));
                row.margin = r.certificate.margin;
                row.mu = r.certificate.mu;
                row.final_lbar = r.series.normalized[r.series.t.size() - 1];
                row.ok = true;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };

    int n_workers = g.workers > 0 ? g.workers : static_cast<int>(std::thread::hardware_concurrency());
    n_workers = std::max(1, std::min<int>(n_workers, static_cast<int>(values.size())));
    std::vector<std::thread> pool;
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    std::ostringstream os;
    os.precision(12);
    os << "# sweep over " << param << "\n";
    os << "# columns: value margin mu final_normalized_lyapunov status\n";
    for (const Row& row : rows) {
        if (row.ok) {
            os << row.value << " " << row.margin << " " << row.mu << " " << row.final_lbar << " ok\n";
        } else {
            os << row.value << " nan nan nan failed: " << row.error << "\n";
        }
    }
    write_file(fs::path(base.output.directory) / ("sweep_" + param + ".txt"), os.str());
    std::cout << os.str();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"boundary feedback stabilization of random linear hyperbolic balance laws"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("-o,--output", g.output_dir, "override the output directory");
    app.add_option("-w,--workers", g.workers, "worker count for sweeps");
    app.add_flag("-v,--verbose", g.verbose, "verbose progress output");

    auto* kl = app.add_subcommand("kl", "Karhunen-Loeve decomposition report");
    kl->add_option("config", g.config_path, "experiment config file")->required();

    auto* certify = app.add_subcommand("certify", "hyperbolicity and stability certificate");
    certify->add_option("config", g.config_path, "experiment config file")->required();

    auto* simulate = app.add_subcommand("simulate", "time integration with Lyapunov monitoring");
    simulate->add_option("config", g.config_path, "experiment config file")->required();

    auto* sweep = app.add_subcommand("sweep", "independent runs over one parameter");
    sweep->add_option("config", g.config_path, "experiment config file")->required();
    std::string sweep_param;
    std::vector<double> sweep_values;
    sweep->add_option("-p,--param", sweep_param, "parameter to sweep, e.g. material.sigma_star")
        ->required();
    sweep->add_option("--values", sweep_values, "comma separated value list")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (kl->parsed()) return cmd_kl(g);
        if (certify->parsed()) return cmd_certify(g);
        if (simulate->parsed()) return cmd_simulate(g);
        if (sweep->parsed()) return cmd_sweep(g, sweep_param, sweep_values);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitOk;
}
