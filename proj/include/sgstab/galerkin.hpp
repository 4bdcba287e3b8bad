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

#include "sgstab/gpc.hpp"

namespace sgstab {

// A spatially varying chaos coefficient: one column of modes per grid cell.
using ModeField = Eigen::MatrixXd;

// Modes of the 2x2 source matrix in characteristic coordinates, stored as
// four |K| x N blocks ordered to match the (plus, minus) state stacking.
struct SourceModes {
    ModeField pp, pm, mp, mm;
};

// Input description of the random system on [0,L]: characteristic speed
// modes, source modes and the 2x2 boundary matrix in characteristic
// coordinates.
struct RandomSystemSpec {
    double length = 1.0;
    Eigen::VectorXd cell_centers;
    ModeField lambda_plus;   // |K| x N
    ModeField lambda_minus;  // |K| x N
    SourceModes source;
    Eigen::Matrix2d boundary = Eigen::Matrix2d::Zero();
};

struct HyperbolicityReport {
    bool pass = false;
    double min_plus = 0.0;   // smallest realization of the plus speed
    double max_plus = 0.0;
    double min_minus = 0.0;  // smallest realization of the minus speed
    double max_minus = 0.0;
    double lambda_min = 0.0; // min over nodes/cells of {plus, |minus|}
};

/// Evaluates the projected speeds at all tensorized quadrature nodes and
/// cells; passes iff the plus family is strictly positive and the minus
/// family strictly negative everywhere.
HyperbolicityReport check_hyperbolicity(const ModeField& lambda_plus, const ModeField& lambda_minus,
                                        const GpcBasis& basis);

/// A(x) = sum_k modes_k(x) G^k for one cell; symmetric by construction.
Eigen::MatrixXd assemble_advection(const Eigen::VectorXd& modes,
                                   const std::vector<Eigen::MatrixXd>& triple_tensor);

/// Orthogonal eigendecomposition A = T D T^T with ascending eigenvalues and
/// a deterministic sign convention for the eigenvectors.
void diagonalize(const Eigen::MatrixXd& a, Eigen::MatrixXd& t, Eigen::VectorXd& d);

/// Boundary matrix of the diagonalized system:
/// blockdiag(T+(0), T-(L))^T [B_ij I] blockdiag(T+(L), T-(0)).
Eigen::MatrixXd transform_boundary(const Eigen::Matrix2d& boundary, const Eigen::MatrixXd& t_plus_0,
                                   const Eigen::MatrixXd& t_plus_L, const Eigen::MatrixXd& t_minus_0,
                                   const Eigen::MatrixXd& t_minus_L);

// Fully assembled deterministic system for the diagonalized modes: per-cell
// speeds D, transforms T and source Q, the boundary matrix and the smallest
// characteristic speed magnitude. Immutable once built.
struct GalerkinSystem {
    double length = 1.0;
    Eigen::VectorXd cell_centers;
    int n_modes = 0;  // |K|

    std::vector<Eigen::MatrixXd> t_plus, t_minus;  // orthogonal, per cell
    std::vector<Eigen::VectorXd> d_plus, d_minus;  // ascending eigenvalues
    std::vector<Eigen::MatrixXd> q;                // 2|K| x 2|K| per cell
    Eigen::MatrixXd b_hat;
    double lambda_min = 0.0;  // min over cells/modes of {D+, |D-|}
    HyperbolicityReport hyperbolicity;
    bool constant_speeds = false;

    int cells() const { return static_cast<int>(cell_centers.size()); }
    /// diag(D+(cell), D-(cell)) as a stacked vector of length 2|K|.
    Eigen::VectorXd stacked_speeds(int cell) const;
};

/// Q(x) = T^T C T + D T^T dT/dx with the transform derivative by centered
/// differences (one-sided second order at the ends).
std::vector<Eigen::MatrixXd> assemble_q(const std::vector<Eigen::MatrixXd>& t_plus,
                                        const std::vector<Eigen::MatrixXd>& t_minus,
                                        const std::vector<Eigen::VectorXd>& d_plus,
                                        const std::vector<Eigen::VectorXd>& d_minus,
                                        const SourceModes& source,
                                        const std::vector<Eigen::MatrixXd>& triple_tensor, double dx);

/// Checks hyperbolicity, then assembles all blocks. Throws if the speed
/// fields change sign at a quadrature node.
GalerkinSystem build_system(const RandomSystemSpec& spec, const GpcBasis& basis);

/// Plain-text summary: per-cell eigenvalue extrema, lambda_min, verdict.
void write_system_report(std::ostream& os, const GalerkinSystem& system);

}  // namespace sgstab
