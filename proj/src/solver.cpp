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

#include "sgstab/solver.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace sgstab {

Grid Grid::uniform(double length, int cells)
{
    Grid g;
    g.length = length;
    g.cells = cells;
    g.dx = length / cells;
    g.centers = Eigen::VectorXd::LinSpaced(cells, 0.5 * g.dx, length - 0.5 * g.dx);
    return g;
}

double cfl_timestep(const GalerkinSystem& system, double dx, double cfl)
{
    double lambda_max = 0.0;
    for (int i = 0; i < system.cells(); ++i) {
        lambda_max = std::max(lambda_max, system.d_plus[static_cast<std::size_t>(i)].cwiseAbs().maxCoeff());
        lambda_max = std::max(lambda_max, system.d_minus[static_cast<std::size_t>(i)].cwiseAbs().maxCoeff());
    }
    if (!(lambda_max > 0.0)) throw std::runtime_error("timestep: system has no nonzero speeds");
    return cfl * dx / lambda_max;
}

Eigen::MatrixXd discrete_weights(const GalerkinSystem& system, double mu_hat,
                                 const Eigen::VectorXd& h_plus, const Eigen::VectorXd& h_minus)
{
    const int n = system.n_modes;
    const int cells = system.cells();
    const double dx = cells > 1 ? system.cell_centers[1] - system.cell_centers[0] : system.length;

    Eigen::MatrixXd w(2 * n, cells);
    for (int k = 0; k < n; ++k) {
        double prod = 1.0;
        for (int i = 0; i < cells; ++i) {
            w(k, i) = h_plus[k] / system.d_plus[static_cast<std::size_t>(i)][k] * prod;
            const double factor = 1.0 - dx * mu_hat / system.d_plus[static_cast<std::size_t>(i)][k];
            if (!(factor > 0.0)) {
                throw std::runtime_error("discrete weights lose positivity: decrease mu_hat or refine "
                                         "the grid so that dx*mu_hat < min |D|");
            }
            prod *= factor;
        }
    }
    for (int k = 0; k < n; ++k) {
        double prod = 1.0;
        for (int i = cells - 1; i >= 0; --i) {
            w(n + k, i) = h_minus[k] / std::abs(system.d_minus[static_cast<std::size_t>(i)][k]) * prod;
            const double factor = 1.0 + dx * mu_hat / system.d_minus[static_cast<std::size_t>(i)][k];
            if (!(factor > 0.0)) {
                throw std::runtime_error("discrete weights lose positivity: decrease mu_hat or refine "
                                         "the grid so that dx*mu_hat < min |D|");
            }
            prod *= factor;
        }
    }
    return w;
}

void refresh_ghosts(SolverState& state, const Eigen::MatrixXd& b_hat)
{
    const Eigen::Index n = state.z.rows() / 2;
    const Eigen::Index cells = state.cells();
    Eigen::VectorXd outgoing(2 * n);
    outgoing.head(n) = state.z.col(cells).head(n);  // plus family at the last cell
    outgoing.tail(n) = state.z.col(1).tail(n);      // minus family at the first cell
    const Eigen::VectorXd incoming = b_hat * outgoing;
    state.z.col(0).head(n) = incoming.head(n);
    state.z.col(0).tail(n).setZero();  // unused half of the ghost
    state.z.col(cells + 1).tail(n) = incoming.tail(n);
    state.z.col(cells + 1).head(n).setZero();
}

void step(SolverState& state, const GalerkinSystem& system, const Eigen::MatrixXd& b_hat,
          double dt, double dx)
{
    const Eigen::Index n = state.z.rows() / 2;
    const Eigen::Index cells = state.cells();
    const double nu = dt / dx;

    Eigen::MatrixXd znew(state.z.rows(), cells);
    for (Eigen::Index i = 0; i < cells; ++i) {
        const Eigen::VectorXd& zi = state.z.col(i + 1);
        Eigen::VectorXd zn = zi;
        // left-sided upwind for the plus family, right-sided for the minus
        zn.head(n) -= nu * system.d_plus[static_cast<std::size_t>(i)]
                               .cwiseProduct(zi.head(n) - state.z.col(i).head(n));
        zn.tail(n) -= nu * system.d_minus[static_cast<std::size_t>(i)]
                               .cwiseProduct(state.z.col(i + 2).tail(n) - zi.tail(n));
        zn.noalias() -= dt * (system.q[static_cast<std::size_t>(i)] * zi);
        znew.col(i) = zn;
    }
    if (!znew.allFinite()) {
        throw std::runtime_error("solver: state became non-finite at step " +
                                 std::to_string(state.step_index + 1));
    }
    state.z.middleCols(1, cells) = znew;
    state.step_index += 1;
    refresh_ghosts(state, b_hat);
}

double discrete_lyapunov(const SolverState& state, const Eigen::MatrixXd& weights, double dx)
{
    if ((weights.array() <= 0.0).any()) {
        throw std::invalid_argument("lyapunov sum needs strictly positive weights");
    }
    const Eigen::Index cells = state.cells();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < cells; ++i) {
        sum += state.z.col(i + 1).cwiseAbs2().dot(weights.col(i));
    }
    return dx * sum;
}

MomentFields moments(const SolverState& state, const GalerkinSystem& system,
                     const Eigen::Matrix2d& t_physical, const Eigen::VectorXd& v_star,
                     const Eigen::VectorXd& sigma_star)
{
    const Eigen::Index n = state.z.rows() / 2;
    const Eigen::Index cells = state.cells();

    MomentFields mf;
    mf.mean_v.resize(cells);
    mf.var_v.resize(cells);
    mf.mean_s.resize(cells);
    mf.var_s.resize(cells);

    for (Eigen::Index i = 0; i < cells; ++i) {
        // back to the pre-diagonalization modes, then to physical ones
        Eigen::VectorXd r(2 * n);
        r.head(n).noalias() = system.t_plus[static_cast<std::size_t>(i)] * state.z.col(i + 1).head(n);
        r.tail(n).noalias() = system.t_minus[static_cast<std::size_t>(i)] * state.z.col(i + 1).tail(n);

        const Eigen::VectorXd dv = t_physical(0, 0) * r.head(n) + t_physical(0, 1) * r.tail(n);
        const Eigen::VectorXd ds = t_physical(1, 0) * r.head(n) + t_physical(1, 1) * r.tail(n);

        mf.mean_v[i] = v_star[i] + dv[0];
        mf.mean_s[i] = sigma_star[i] + ds[0];
        mf.var_v[i] = dv.tail(n - 1).squaredNorm();
        mf.var_s[i] = ds.tail(n - 1).squaredNorm();
    }
    return mf;
}

namespace {

struct Pipeline {
    GpcBasis basis;
    RandomSystemSpec spec;
    RiemannTransform transform;
    FeedbackGains gains;
    double slope_mean = 0.0;
};

Pipeline assemble_from_config(const ExperimentConfig& config, const Grid& grid)
{
    const MultiIndexSet set = build_index_set(config.basis.dims, config.basis.order, config.basis.kind);
    GpcBasis basis(config.basis.family, set, config.basis.quad_size);

    const double slope_mean = plastic_slope(config.material);
    const RiemannTransform rt = riemann_transform(config.material.elastic_modulus);
    const FeedbackGains fg =
        feedback_gains(config.material.kappa0, config.material.kappa1, config.material.elastic_modulus);

    // modes of the plastic-sensitivity field on the cell grid
    Eigen::MatrixXd slope_modes = Eigen::MatrixXd::Zero(basis.size(), grid.cells);
    if (config.field.sigma2 > 0.0) {
        CovarianceKernel kernel;
        switch (config.field.kernel) {
            case CovarianceKernel::Kind::Exponential:
                kernel = CovarianceKernel::exponential(config.field.sigma2, config.field.corr_len);
                break;
            case CovarianceKernel::Kind::SquaredExponential:
                kernel = CovarianceKernel::squared_exponential(config.field.sigma2, config.field.corr_len);
                break;
            case CovarianceKernel::Kind::Matern:
                kernel = CovarianceKernel::matern(config.field.sigma2, config.field.corr_len,
                                                  config.field.nu);
                break;
        }
        const int n_quad = config.field.n_quad > 0 ? config.field.n_quad
                                                   : std::max(4 * basis.dims(), 8 * grid.cells);
        const ScalarField mean = [slope_mean](double) { return slope_mean; };
        KlExpansion kl;
        if (config.field.measure_x.size() > 0) {
            ConditionedField cf = condition(mean, kernel, config.field.measure_x, config.field.measure_z);
            kl = kl_decompose(cf, grid.length, basis.dims(), n_quad);
            slope_modes = kl_to_gpc(kl, cf.mean_function(), basis, grid.centers);
        } else {
            kl = kl_decompose(kernel, grid.length, basis.dims(), n_quad);
            slope_modes = kl_to_gpc(kl, mean, basis, grid.centers);
        }
    } else {
        slope_modes.row(0).setConstant(slope_mean);
    }

    Pipeline p{std::move(basis), RandomSystemSpec{}, rt, fg, slope_mean};
    p.spec.length = grid.length;
    p.spec.cell_centers = grid.centers;
    // uniform characteristic speeds +-sqrt(E); only mode zero is populated
    p.spec.lambda_plus = Eigen::MatrixXd::Zero(p.basis.size(), grid.cells);
    p.spec.lambda_minus = Eigen::MatrixXd::Zero(p.basis.size(), grid.cells);
    p.spec.lambda_plus.row(0).setConstant(rt.lambda(0, 0));
    p.spec.lambda_minus.row(0).setConstant(rt.lambda(1, 1));
    // source in characteristic coordinates: -(slope/2) in all four blocks
    p.spec.source.pp = -0.5 * slope_modes;
    p.spec.source.pm = p.spec.source.pp;
    p.spec.source.mp = p.spec.source.pp;
    p.spec.source.mm = p.spec.source.pp;
    p.spec.boundary = fg.riemann;
    return p;
}

Eigen::MatrixXd initial_state(const ExperimentConfig& config, const Grid& grid,
                              const RiemannTransform& rt, int n_modes)
{
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(2 * n_modes, grid.cells + 2);
    const double two_pi_f = 2.0 * M_PI * config.initial.frequency / grid.length;
    for (int i = 0; i < grid.cells; ++i) {
        const double profile = std::cos(two_pi_f * grid.centers[i]);
        double r_plus, r_minus;
        if (config.initial.coordinates == "riemann") {
            r_plus = config.initial.amp_plus * profile;
            r_minus = config.initial.amp_minus * profile;
        } else {
            // physical (velocity, stress) deviations mapped through T^{-1}
            const Eigen::Vector2d dy(config.initial.amp_plus * profile,
                                     config.initial.amp_minus * profile);
            const Eigen::Vector2d r = rt.t_inverse * dy;
            r_plus = r[0];
            r_minus = r[1];
        }
        z(0, i + 1) = r_plus;           // mode zero of the plus family
        z(n_modes, i + 1) = r_minus;    // mode zero of the minus family
    }
    return z;
}

}  // namespace

SimulationResult run(const ExperimentConfig& config)
{
    const Grid grid0 = Grid::uniform(config.grid.length, config.grid.cells);
    Pipeline p = assemble_from_config(config, grid0);

    SimulationResult result{grid0,
                            build_system(p.spec, p.basis),
                            StabilityCertificate{},
                            Eigen::MatrixXd(),
                            TimeSeries{},
                            p.slope_mean};
    GalerkinSystem& system = result.system;
    Grid& grid = result.grid;
    grid.cfl = config.grid.cfl;
    grid.dt = cfl_timestep(system, grid.dx, grid.cfl);

    const int n = system.n_modes;
    result.certificate = build_certificate(
        system, config.stability.mu_hat, Eigen::VectorXd::Constant(n, config.stability.h_plus),
        Eigen::VectorXd::Constant(n, config.stability.h_minus), config.stability.optimize_scaling);
    result.discrete_w = discrete_weights(system, config.stability.mu_hat, result.certificate.h_plus,
                                         result.certificate.h_minus);

    // state in diagonalized coordinates: zeta = T^T R
    SolverState state;
    state.z = initial_state(config, grid, p.transform, n);
    for (int i = 0; i < grid.cells; ++i) {
        Eigen::VectorXd r = state.z.col(i + 1);
        state.z.col(i + 1).head(n) = system.t_plus[static_cast<std::size_t>(i)].transpose() * r.head(n);
        state.z.col(i + 1).tail(n) = system.t_minus[static_cast<std::size_t>(i)].transpose() * r.tail(n);
    }
    refresh_ghosts(state, system.b_hat);

    const double t_end = config.grid.t_end;
    const int sample_every = config.output.sample_every > 0
                                 ? config.output.sample_every
                                 : std::max(1, static_cast<int>(std::ceil(1.0 / (50.0 * grid.dt))));

    std::vector<double> ts, lyap;
    std::vector<MomentFields> mfs;
    std::vector<Eigen::Vector2d> acts;

    const Eigen::VectorXd v_star = Eigen::VectorXd::Constant(grid.cells, config.material.v_star);
    const Eigen::VectorXd s_star = Eigen::VectorXd::Constant(grid.cells, config.material.sigma_star);

    auto record = [&](double t) {
        ts.push_back(t);
        lyap.push_back(discrete_lyapunov(state, result.discrete_w, grid.dx));
        mfs.push_back(moments(state, system, p.transform.t, v_star, s_star));
        const MomentFields& mf = mfs.back();
        // mean actuation: desired velocity plus the feedback response to the
        // mean stress deviation at the nearest cell
        Eigen::Vector2d a;
        a[0] = config.material.v_star +
               p.gains.physical(0, 0) * (mf.mean_s[0] - config.material.sigma_star);
        a[1] = config.material.v_star +
               p.gains.physical(1, 1) * (mf.mean_s[grid.cells - 1] - config.material.sigma_star);
        acts.push_back(a);
    };

    record(0.0);
    double t = 0.0;
    while (t < t_end && t_end > 0.0) {
        const double dt = std::min(grid.dt, t_end - t);
        step(state, system, system.b_hat, dt, grid.dx);
        t += dt;
        const bool final_step = !(t < t_end);
        if (state.step_index % sample_every == 0 || final_step) record(t);
    }

    TimeSeries& series = result.series;
    const int samples = static_cast<int>(ts.size());
    series.t.resize(samples);
    series.lyapunov.resize(samples);
    series.normalized.resize(samples);
    series.mean_s.resize(samples, grid.cells);
    series.var_s.resize(samples, grid.cells);
    series.mean_v.resize(samples, grid.cells);
    series.var_v.resize(samples, grid.cells);
    series.actuation.resize(samples, 2);
    const double l0 = lyap.front();
    for (int s = 0; s < samples; ++s) {
        series.t[s] = ts[static_cast<std::size_t>(s)];
        series.lyapunov[s] = lyap[static_cast<std::size_t>(s)];
        series.normalized[s] = l0 > 0.0 ? lyap[static_cast<std::size_t>(s)] / l0 : 0.0;
        series.mean_s.row(s) = mfs[static_cast<std::size_t>(s)].mean_s;
        series.var_s.row(s) = mfs[static_cast<std::size_t>(s)].var_s;
        series.mean_v.row(s) = mfs[static_cast<std::size_t>(s)].mean_v;
        series.var_v.row(s) = mfs[static_cast<std::size_t>(s)].var_v;
        series.actuation.row(s) = acts[static_cast<std::size_t>(s)];
    }
    return result;
}

void write_timeseries(std::ostream& os, const TimeSeries& series, const Eigen::VectorXd& centers)
{
    os.precision(17);
    os << "# columns: t lyapunov lyapunov_normalized";
    os << " mean_sigma[x] for x in cells, var_sigma[x] for x in cells";
    os << " actuation_left actuation_right\n";
    os << "# cells:";
    for (Eigen::Index i = 0; i < centers.size(); ++i) os << " " << centers[i];
    os << "\n";
    for (Eigen::Index s = 0; s < series.t.size(); ++s) {
        os << series.t[s] << " " << series.lyapunov[s] << " " << series.normalized[s];
        for (Eigen::Index i = 0; i < series.mean_s.cols(); ++i) os << " " << series.mean_s(s, i);
        for (Eigen::Index i = 0; i < series.var_s.cols(); ++i) os << " " << series.var_s(s, i);
        os << " " << series.actuation(s, 0) << " " << series.actuation(s, 1);
        os << "\n";
    }
}

}  // namespace sgstab
