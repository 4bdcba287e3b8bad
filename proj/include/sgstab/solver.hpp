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

#include "sgstab/config.hpp"
#include "sgstab/galerkin.hpp"
#include "sgstab/lyapunov.hpp"
#include "sgstab/material.hpp"

namespace sgstab {

struct Grid {
    double length = 1.0;
    int cells = 0;
    double dx = 0.0;
    Eigen::VectorXd centers;  // (i + 1/2) dx
    double cfl = 0.0;
    double dt = 0.0;

    static Grid uniform(double length, int cells);
};

/// dt = cfl * dx / max |D|, the explicit stability bound of the scheme.
double cfl_timestep(const GalerkinSystem& system, double dx, double cfl);

/// Discrete Lyapunov weights: one-sided products that follow the direction
/// of each characteristic family. Requires 1 - dx mu_hat / |D| > 0.
Eigen::MatrixXd discrete_weights(const GalerkinSystem& system, double mu_hat,
                                 const Eigen::VectorXd& h_plus, const Eigen::VectorXd& h_minus);

// Cell averages of the diagonalized modes including the two ghost columns
// that impose the boundary feedback.
struct SolverState {
    int step_index = 0;
    Eigen::MatrixXd z;  // 2|K| x (N + 2); columns 0 and N+1 are ghosts

    Eigen::Index cells() const { return z.cols() - 2; }
    auto interior() { return z.middleCols(1, cells()); }
    auto interior() const { return z.middleCols(1, cells()); }
};

/// Writes the feedback relation into the ghost columns from the current
/// interior values.
void refresh_ghosts(SolverState& state, const Eigen::MatrixXd& b_hat);

/// One upwind/explicit-Euler step followed by a ghost refresh.
void step(SolverState& state, const GalerkinSystem& system, const Eigen::MatrixXd& b_hat,
          double dt, double dx);

/// L = dx sum_i z_i^T W_i z_i over the interior cells.
double discrete_lyapunov(const SolverState& state, const Eigen::MatrixXd& weights, double dx);

struct MomentFields {
    Eigen::VectorXd mean_v, var_v;      // velocity mean and variance per cell
    Eigen::VectorXd mean_s, var_s;      // stress mean and variance per cell
};

/// Physical first and second moments: map the diagonalized modes back
/// through the per-cell transform and the 2x2 physical eigenvectors, then
/// read mean and variance off the normalized chaos modes.
MomentFields moments(const SolverState& state, const GalerkinSystem& system,
                     const Eigen::Matrix2d& t_physical, const Eigen::VectorXd& v_star,
                     const Eigen::VectorXd& sigma_star);

struct TimeSeries {
    Eigen::VectorXd t;
    Eigen::VectorXd lyapunov;    // L^k
    Eigen::VectorXd normalized;  // L^k / L^0
    Eigen::MatrixXd mean_s, var_s;  // samples x cells
    Eigen::MatrixXd mean_v, var_v;
    Eigen::MatrixXd actuation;   // samples x 2, mean boundary velocity
};

struct SimulationResult {
    Grid grid;
    GalerkinSystem system;
    StabilityCertificate certificate;
    Eigen::MatrixXd discrete_w;  // discrete Lyapunov weights
    TimeSeries series;
    double plastic_slope_mean = 0.0;
};

/// Full pipeline: basis, random field, characteristic transform, Galerkin
/// assembly, certificate, then time integration with sampling. Deterministic
/// for a fixed config.
SimulationResult run(const ExperimentConfig& config);

/// One row per sample: t, L, L_normalized, then the stress mean and variance
/// at every cell. A header documents the column layout.
void write_timeseries(std::ostream& os, const TimeSeries& series, const Eigen::VectorXd& centers);

}  // namespace sgstab
