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

#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

#include "sgstab/galerkin.hpp"

namespace sgstab {

// Diagonal Lyapunov weights W(x) = diag(W+, W-) evaluated at the cell
// centers and extrapolated to the domain ends. The plus weights decay along
// x, the minus weights decay against it.
struct LyapunovWeights {
    Eigen::MatrixXd cells;  // 2|K| x N, strictly positive
    Eigen::VectorXd at_left;   // W at x = 0
    Eigen::VectorXd at_right;  // W at x = L
    Eigen::VectorXd speeds_left;   // stacked |D| at x = 0 (first-cell value)
    Eigen::VectorXd speeds_right;  // stacked |D| at x = L (last-cell value)
};

/// w+_k(x) = (h+_k / D+_k(x)) exp(-mu_hat int_0^x 1/D+_k) and the mirrored
/// minus formula; integrals by the trapezoid rule along the cell grid.
LyapunovWeights continuous_weights(const GalerkinSystem& system, double mu_hat,
                                   const Eigen::VectorXd& h_plus, const Eigen::VectorXd& h_minus);

struct DissipativityResult {
    double margin = 0.0;  // 1 - exp(mu_hat L / (2 lambda_min)) * |D B D^-1|_2
    double scaled_norm = 0.0;
    bool pass = false;
};

DissipativityResult dissipativity_check(const Eigen::MatrixXd& b_hat, double mu_hat, double length,
                                        double lambda_min, const Eigen::VectorXd& d_diag);

struct CorollaryResult {
    bool pass = false;
    double lambda_min = 0.0;  // over quadrature-node evaluations
    double margin = 0.0;
};

/// Sufficient condition using only the 2x2 boundary matrix and speed
/// realizations at the quadrature nodes; no Galerkin assembly required.
CorollaryResult corollary_bound(const Eigen::Matrix2d& boundary, const ModeField& lambda_plus,
                                const ModeField& lambda_minus, const GpcBasis& basis, double mu_hat,
                                double length);

/// mu = mu_hat + min over cells of the smallest eigenvalue of W Q + Q^T W.
/// A negative value means no decay is guaranteed.
double decay_rate(const LyapunovWeights& weights, const std::vector<Eigen::MatrixXd>& q,
                  double mu_hat);

struct BoundaryMatrix {
    Eigen::MatrixXd h;
    double max_eigenvalue = 0.0;
    double min_eigenvalue = 0.0;
};

/// H = B^T diag(W+(0)D+(0), W-(L)|D-(L)|) B - diag(W+(L)D+(L), W-(0)|D-(0)|),
/// negative semidefinite exactly when the dissipativity condition holds.
BoundaryMatrix boundary_matrix_h(const Eigen::MatrixXd& b_hat, const LyapunovWeights& weights);

struct Rho2Result {
    double rho = 0.0;
    Eigen::VectorXd scaling;  // achieving diagonal, geometric mean one
    bool converged = false;
};

/// inf over positive diagonal D of |D B D^-1|_2, approximated by coordinate
/// descent on the log-scales. Always >= the spectral radius of B.
Rho2Result rho2(const Eigen::MatrixXd& b, int max_sweeps = 60);

// Everything the stability theorem certifies for one assembled system.
struct StabilityCertificate {
    double mu_hat = 0.0;
    Eigen::VectorXd h_plus, h_minus;
    LyapunovWeights weights;
    double lambda_min = 0.0;
    double b_norm = 0.0;         // |B_hat|_2
    double scaled_norm = 0.0;    // |D B_hat D^-1|_2 for the certificate D
    double margin = 0.0;         // dissipativity margin delta
    bool valid = false;          // margin >= 0
    double mu = 0.0;             // guaranteed decay rate, may be negative
    BoundaryMatrix boundary;
    bool scaling_optimized = false;
};

/// Builds weights and all certificate quantities for given mu_hat and h. If
/// optimize_scaling is set, a rho2 search over the diagonal scaling replaces
/// h when it improves the margin.
StabilityCertificate build_certificate(const GalerkinSystem& system, double mu_hat,
                                       const Eigen::VectorXd& h_plus, const Eigen::VectorXd& h_minus,
                                       bool optimize_scaling = false);

StabilityCertificate build_certificate(const GalerkinSystem& system, double mu_hat,
                                       double h_plus = 1.0, double h_minus = 1.0,
                                       bool optimize_scaling = false);

/// M(x) = -d/dx(W D) + W Q + Q^T W on the cell grid, derivative by centered
/// differences. Used to inspect the decay estimate cell by cell.
std::vector<Eigen::MatrixXd> decay_matrix_field(const GalerkinSystem& system,
                                                const LyapunovWeights& weights, double dx);

/// Plain-text block with mu_hat, margin, mu, |B_hat|_2, lambda_min and the
/// extremal eigenvalues of H.
void write_certificate_report(std::ostream& os, const StabilityCertificate& cert);

}  // namespace sgstab
