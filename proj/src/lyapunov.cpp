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

#include "sgstab/lyapunov.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace sgstab {

namespace {

double spectral_norm(const Eigen::MatrixXd& m)
{
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()[0];
}

}  // namespace

LyapunovWeights continuous_weights(const GalerkinSystem& system, double mu_hat,
                                   const Eigen::VectorXd& h_plus, const Eigen::VectorXd& h_minus)
{
    const int n = system.n_modes;
    const int cells = system.cells();
    if (!(mu_hat >= 0.0)) {
        throw std::invalid_argument("weights: mu_hat must be non-negative");
    }
    if (h_plus.size() != n || h_minus.size() != n) {
        throw std::invalid_argument("weights: h vectors need one entry per mode");
    }
    if ((h_plus.array() <= 0.0).any() || (h_minus.array() <= 0.0).any()) {
        throw std::invalid_argument("weights: h entries must be strictly positive");
    }

    const double dx = cells > 1 ? system.cell_centers[1] - system.cell_centers[0]
                                : system.length;
    const double x0 = system.cell_centers[0];

    LyapunovWeights w;
    w.cells.resize(2 * n, cells);
    w.at_left.resize(2 * n);
    w.at_right.resize(2 * n);
    w.speeds_left.resize(2 * n);
    w.speeds_right.resize(2 * n);

    for (int k = 0; k < n; ++k) {
        // cumulative trapezoid of 1/D+ from the left end; the first segment
        // [0, x_1] uses the first-cell value
        double integral = x0 / system.d_plus[0][k];
        w.cells(k, 0) = h_plus[k] / system.d_plus[0][k] * std::exp(-mu_hat * integral);
        w.at_left[k] = h_plus[k] / system.d_plus[0][k];
        for (int i = 1; i < cells; ++i) {
            integral += 0.5 * dx * (1.0 / system.d_plus[static_cast<std::size_t>(i - 1)][k] +
                                    1.0 / system.d_plus[static_cast<std::size_t>(i)][k]);
            w.cells(k, i) = h_plus[k] / system.d_plus[static_cast<std::size_t>(i)][k] *
                            std::exp(-mu_hat * integral);
        }
        const double tail = system.length - system.cell_centers[cells - 1];
        const double integral_L = integral + tail / system.d_plus[static_cast<std::size_t>(cells - 1)][k];
        w.at_right[k] = h_plus[k] / system.d_plus[static_cast<std::size_t>(cells - 1)][k] *
                        std::exp(-mu_hat * integral_L);
        w.speeds_left[k] = system.d_plus[0][k];
        w.speeds_right[k] = system.d_plus[static_cast<std::size_t>(cells - 1)][k];
    }

    for (int k = 0; k < n; ++k) {
        // minus speeds are negative; the exponent exp(mu_hat int_x^L 1/D-)
        // decays away from the right end
        const double tail = system.length - system.cell_centers[cells - 1];
        double integral = tail / system.d_minus[static_cast<std::size_t>(cells - 1)][k];
        const int row = n + k;
        w.cells(row, cells - 1) = h_minus[k] /
                                  std::abs(system.d_minus[static_cast<std::size_t>(cells - 1)][k]) *
                                  std::exp(mu_hat * integral);
        w.at_right[row] = h_minus[k] / std::abs(system.d_minus[static_cast<std::size_t>(cells - 1)][k]);
        for (int i = cells - 2; i >= 0; --i) {
            integral += 0.5 * dx * (1.0 / system.d_minus[static_cast<std::size_t>(i + 1)][k] +
                                    1.0 / system.d_minus[static_cast<std::size_t>(i)][k]);
            w.cells(row, i) = h_minus[k] / std::abs(system.d_minus[static_cast<std::size_t>(i)][k]) *
                              std::exp(mu_hat * integral);
        }
        const double integral_0 = integral + x0 / system.d_minus[0][k];
        w.at_left[row] = h_minus[k] / std::abs(system.d_minus[0][k]) * std::exp(mu_hat * integral_0);
        w.speeds_left[row] = std::abs(system.d_minus[0][k]);
        w.speeds_right[row] = std::abs(system.d_minus[static_cast<std::size_t>(cells - 1)][k]);
    }

    if ((w.cells.array() <= 0.0).any()) {
        throw std::runtime_error("weights: lost positivity");
    }
    return w;
}

DissipativityResult dissipativity_check(const Eigen::MatrixXd& b_hat, double mu_hat, double length,
                                        double lambda_min, const Eigen::VectorXd& d_diag)
{
    if (d_diag.size() != b_hat.rows()) {
        throw std::invalid_argument("dissipativity: scaling diagonal has wrong size");
    }
    if ((d_diag.array() <= 0.0).any()) {
        throw std::invalid_argument("dissipativity: scaling diagonal must be strictly positive");
    }
    if (!(lambda_min > 0.0)) {
        throw std::invalid_argument("dissipativity: lambda_min must be positive");
    }

    const Eigen::MatrixXd scaled =
        d_diag.asDiagonal() * b_hat * d_diag.cwiseInverse().asDiagonal();
    DissipativityResult res;
    res.scaled_norm = spectral_norm(scaled);
    res.margin = 1.0 - std::exp(mu_hat * length / (2.0 * lambda_min)) * res.scaled_norm;
    res.pass = res.margin >= 0.0;
    return res;
}

CorollaryResult corollary_bound(const Eigen::Matrix2d& boundary, const ModeField& lambda_plus,
                                const ModeField& lambda_minus, const GpcBasis& basis, double mu_hat,
                                double length)
{
    const HyperbolicityReport rep = check_hyperbolicity(lambda_plus, lambda_minus, basis);
    CorollaryResult res;
    res.lambda_min = rep.lambda_min;
    if (!rep.pass || !(rep.lambda_min > 0.0)) {
        res.pass = false;
        res.margin = -std::numeric_limits<double>::infinity();
        return res;
    }
    const double norm = spectral_norm(boundary);
    res.margin = 1.0 - std::exp(mu_hat * length / (2.0 * rep.lambda_min)) * norm;
    res.pass = res.margin >= 0.0;
    return res;
}

double decay_rate(const LyapunovWeights& weights, const std::vector<Eigen::MatrixXd>& q,
                  double mu_hat)
{
    if (static_cast<Eigen::Index>(q.size()) != weights.cells.cols()) {
        throw std::invalid_argument("decay rate: weights and source fields disagree on cell count");
    }
    double worst = 0.0;
    bool first = true;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const Eigen::VectorXd wi = weights.cells.col(static_cast<Eigen::Index>(i));
        const Eigen::MatrixXd wq = wi.asDiagonal() * q[i];
        const Eigen::MatrixXd sym = wq + wq.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
        const double smallest = es.eigenvalues()[0];
        if (first || smallest < worst) {
            worst = smallest;
            first = false;
        }
    }
    return mu_hat + worst;
}

BoundaryMatrix boundary_matrix_h(const Eigen::MatrixXd& b_hat, const LyapunovWeights& weights)
{
    const Eigen::Index n2 = b_hat.rows();
    const Eigen::Index n = n2 / 2;

    Eigen::VectorXd in_flow(n2), out_flow(n2);
    // W+(0) D+(0) and W-(L) |D-(L)| weight the incoming boundary values,
    // W+(L) D+(L) and W-(0) |D-(0)| the outgoing ones
    in_flow.head(n) = weights.at_left.head(n).cwiseProduct(weights.speeds_left.head(n));
    in_flow.tail(n) = weights.at_right.tail(n).cwiseProduct(weights.speeds_right.tail(n));
    out_flow.head(n) = weights.at_right.head(n).cwiseProduct(weights.speeds_right.head(n));
    out_flow.tail(n) = weights.at_left.tail(n).cwiseProduct(weights.speeds_left.tail(n));

    BoundaryMatrix res;
    res.h = b_hat.transpose() * in_flow.asDiagonal() * b_hat;
    res.h -= Eigen::MatrixXd(out_flow.asDiagonal());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(res.h, Eigen::EigenvaluesOnly);
    res.min_eigenvalue = es.eigenvalues()[0];
    res.max_eigenvalue = es.eigenvalues()[es.eigenvalues().size() - 1];
    return res;
}

namespace {

// one golden-section pass over a single log-scale against an objective
template <typename F>
void refine_coordinate(Eigen::VectorXd& logd, Eigen::Index i, double& best, const F& objective)
{
    double lo = logd[i] - 2.0, hi = logd[i] + 2.0;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    Eigen::VectorXd trial = logd;
    trial[i] = x1;
    double f1 = objective(trial);
    trial[i] = x2;
    double f2 = objective(trial);
    for (int it = 0; it < 40; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            trial[i] = x1;
            f1 = objective(trial);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            trial[i] = x2;
            f2 = objective(trial);
        }
    }
    trial[i] = 0.5 * (lo + hi);
    const double fc = objective(trial);
    if (fc < best) {
        logd[i] = trial[i];
        best = fc;
    }
}

}  // namespace

Rho2Result rho2(const Eigen::MatrixXd& b, int max_sweeps)
{
    if (b.rows() != b.cols()) throw std::invalid_argument("rho2 needs a square matrix");
    const Eigen::Index n = b.rows();

    auto scaled = [&](const Eigen::VectorXd& ld) -> Eigen::MatrixXd {
        const Eigen::VectorXd d = ld.array().exp();
        return d.asDiagonal() * b * d.cwiseInverse().asDiagonal();
    };
    auto norm_at = [&](const Eigen::VectorXd& ld) { return spectral_norm(scaled(ld)); };
    // smoothed singular-value norm: the plain max is flat wherever one
    // singular value dominates, which stalls coordinate moves
    const double p = 16.0;
    auto smooth_at = [&](const Eigen::VectorXd& ld) {
        const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(scaled(ld)).singularValues();
        const double top = sv[0];
        if (top == 0.0) return 0.0;
        return top * std::pow((sv / top).array().pow(p).sum(), 1.0 / p);
    };

    Eigen::VectorXd logd = Eigen::VectorXd::Zero(n);
    Rho2Result res;
    res.rho = norm_at(logd);
    if (n == 1) {
        res.scaling = Eigen::VectorXd::Ones(1);
        res.converged = true;
        return res;
    }

    double smooth_best = smooth_at(logd);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        const double before = smooth_best;
        for (Eigen::Index i = 1; i < n; ++i) {  // first scale pinned, the norm is scale invariant
            refine_coordinate(logd, i, smooth_best, smooth_at);
        }
        if (before - smooth_best < 1e-12 * std::max(1.0, before)) {
            res.converged = true;
            break;
        }
    }
    // polish against the true spectral norm
    double norm_best = norm_at(logd);
    for (Eigen::Index i = 1; i < n; ++i) refine_coordinate(logd, i, norm_best, norm_at);

    logd.array() -= logd.mean();  // geometric mean one
    res.scaling = logd.array().exp();
    res.rho = norm_at(logd);
    return res;
}

StabilityCertificate build_certificate(const GalerkinSystem& system, double mu_hat,
                                       const Eigen::VectorXd& h_plus, const Eigen::VectorXd& h_minus,
                                       bool optimize_scaling)
{
    if (!(mu_hat > 0.0)) throw std::invalid_argument("certificate: mu_hat must be positive");
    const int n = system.n_modes;

    StabilityCertificate cert;
    cert.mu_hat = mu_hat;
    cert.h_plus = h_plus;
    cert.h_minus = h_minus;
    cert.lambda_min = system.lambda_min;
    cert.b_norm = spectral_norm(system.b_hat);

    Eigen::VectorXd d_diag(2 * n);
    d_diag.head(n) = h_plus;
    d_diag.tail(n) = h_minus;

    if (optimize_scaling) {
        const Rho2Result opt = rho2(system.b_hat);
        const DissipativityResult with_h =
            dissipativity_check(system.b_hat, mu_hat, system.length, system.lambda_min, d_diag);
        const DissipativityResult with_opt = dissipativity_check(
            system.b_hat, mu_hat, system.length, system.lambda_min, opt.scaling);
        if (with_opt.margin > with_h.margin) {
            d_diag = opt.scaling;
            cert.h_plus = d_diag.head(n);
            cert.h_minus = d_diag.tail(n);
            cert.scaling_optimized = true;
        }
    }

    cert.weights = continuous_weights(system, mu_hat, cert.h_plus, cert.h_minus);
    const DissipativityResult diss =
        dissipativity_check(system.b_hat, mu_hat, system.length, system.lambda_min, d_diag);
    cert.scaled_norm = diss.scaled_norm;
    cert.margin = diss.margin;
    cert.valid = diss.pass;
    cert.mu = decay_rate(cert.weights, system.q, mu_hat);
    cert.boundary = boundary_matrix_h(system.b_hat, cert.weights);
    return cert;
}

StabilityCertificate build_certificate(const GalerkinSystem& system, double mu_hat, double h_plus,
                                       double h_minus, bool optimize_scaling)
{
    const int n = system.n_modes;
    return build_certificate(system, mu_hat, Eigen::VectorXd::Constant(n, h_plus),
                             Eigen::VectorXd::Constant(n, h_minus), optimize_scaling);
}

std::vector<Eigen::MatrixXd> decay_matrix_field(const GalerkinSystem& system,
                                                const LyapunovWeights& weights, double dx)
{
    const int cells = system.cells();
    const Eigen::Index n2 = weights.cells.rows();

    Eigen::MatrixXd wd(n2, cells);
    for (int i = 0; i < cells; ++i) {
        wd.col(i) = weights.cells.col(i).cwiseProduct(system.stacked_speeds(i).cwiseAbs());
    }

    std::vector<Eigen::MatrixXd> field;
    field.reserve(static_cast<std::size_t>(cells));
    for (int i = 0; i < cells; ++i) {
        Eigen::VectorXd ddx(n2);
        if (cells == 1) {
            ddx.setZero();
        } else if (i == 0) {
            ddx = (wd.col(1) - wd.col(0)) / dx;
        } else if (i == cells - 1) {
            ddx = (wd.col(cells - 1) - wd.col(cells - 2)) / dx;
        } else {
            ddx = (wd.col(i + 1) - wd.col(i - 1)) / (2.0 * dx);
        }
        // the minus block of W D is negative, the derivative flips with it
        Eigen::VectorXd signed_ddx(n2);
        const Eigen::Index n = n2 / 2;
        signed_ddx.head(n) = ddx.head(n);
        signed_ddx.tail(n) = -ddx.tail(n);

        const Eigen::VectorXd wi = weights.cells.col(i);
        const Eigen::MatrixXd wq = wi.asDiagonal() * system.q[static_cast<std::size_t>(i)];
        Eigen::MatrixXd m = wq + wq.transpose();
        m -= Eigen::MatrixXd(signed_ddx.asDiagonal());
        field.push_back(std::move(m));
    }
    return field;
}

void write_certificate_report(std::ostream& os, const StabilityCertificate& cert)
{
    os.precision(12);
    os << "# stability certificate\n";
    os << "mu_hat = " << cert.mu_hat << "\n";
    os << "lambda_min = " << cert.lambda_min << "\n";
    os << "b_hat_norm = " << cert.b_norm << "\n";
    os << "scaled_norm = " << cert.scaled_norm << "\n";
    os << "dissipativity_margin = " << cert.margin << "\n";
    os << "dissipative = " << (cert.valid ? "yes" : "no") << "\n";
    os << "decay_rate = " << cert.mu << "\n";
    os << "H_max_eigenvalue = " << cert.boundary.max_eigenvalue << "\n";
    os << "H_min_eigenvalue = " << cert.boundary.min_eigenvalue << "\n";
    os << "scaling_optimized = " << (cert.scaling_optimized ? "yes" : "no") << "\n";
}

}  // namespace sgstab
