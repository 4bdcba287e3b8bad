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

namespace sgstab {

// Dislocation-density hardening model: the density evolves along the strain
// axis and maps to stress through sigma = sigma0 + alpha*G*b*sqrt(rho).
struct BergstromParams {
    double u0 = 0.0;        // storage coefficient
    double temperature = 0.0;
    double omega0 = 0.0;    // athermal remobilization
    double c = 0.0;         // thermal remobilization prefactor
    double m = 0.0;         // rate sensitivity exponent
    double q = 0.0;         // activation energy
    double gas_constant = 8.314462618;
    double strain_rate = 0.0;
    double sigma0 = 0.0;    // yield offset
    double alpha = 0.0;
    double shear_modulus = 0.0;
    double burgers = 0.0;
    double rho_init = 0.0;  // initial dislocation density

    void validate() const;
};

// Dynamic recrystallization on top of the hardening model: beyond the
// critical strain a recrystallized volume fraction softens the stress.
struct DrxParams {
    BergstromParams base;
    double eps_c = 0.0;      // critical strain
    double eps_s = 0.0;      // saturation strain, > eps_c
    double kappa_drx = 0.0;  // Avrami shape
    double q_drx = 0.0;      // Avrami exponent

    void validate() const;
};

struct StressStrainCurve {
    Eigen::VectorXd strain;
    Eigen::VectorXd stress;
};

/// Integrates the dislocation-density equation with the classical 4th-order
/// one-step method on the given strain grid.
StressStrainCurve bergstrom_stress(const Eigen::VectorXd& strain_grid, const BergstromParams& params);

/// Hardening curve up to eps_c, then Avrami softening of the stress.
StressStrainCurve drx_stress(const Eigen::VectorXd& strain_grid, const DrxParams& params);

/// Sensitivity of the plastic strain with respect to stress at sigma_star:
/// the central-difference slope of the strain-vs-stress branch through
/// sigma_star. The branch must be strictly increasing around sigma_star.
double linearize_plastic(const StressStrainCurve& curve, double sigma_star);

// 2x2 diagonalization of the elastic operator and the linearized source in
// characteristic coordinates.
struct RiemannTransform {
    Eigen::Matrix2d t;          // columns: plus and minus eigenvectors
    Eigen::Matrix2d t_inverse;
    Eigen::Matrix2d lambda;     // diag(sqrt(E), -sqrt(E))
    /// Source matrix in characteristic coordinates for one value of the
    /// plastic sensitivity: -(slope/2) * ones(2,2).
    Eigen::Matrix2d source(double plastic_slope) const;
};

RiemannTransform riemann_transform(double elastic_modulus);

// Boundary feedback in characteristic coordinates (antidiagonal B with
// gains kappa0, kappa1) and the equivalent physical law relating velocity
// to stress deviations at the two ends.
struct FeedbackGains {
    double kappa0 = 0.0;
    double kappa1 = 0.0;
    Eigen::Matrix2d riemann;   // antidiagonal gain matrix
    Eigen::Matrix2d physical;  // diagonal velocity-from-stress law
};

FeedbackGains feedback_gains(double kappa0, double kappa1, double elastic_modulus);

// Both closed-form gain candidates for the rate ansatz mu_hat = 2|slope|,
// with their dissipativity verdicts. The two candidates differ in the sign
// of the exponent; only the decaying one satisfies the boundary condition
// bound, and it does so with equality.
struct RateGainCandidates {
    double mu_hat = 0.0;
    double kappa_grow = 0.0;      // exp(+(L/sqrt(E)) |slope|)
    double kappa_decay = 0.0;     // exp(-(L/sqrt(E)) |slope|)
    double product_grow = 0.0;    // exp(mu_hat L / (2 sqrt(E))) * kappa_grow
    double product_decay = 0.0;   // exp(mu_hat L / (2 sqrt(E))) * kappa_decay
    bool grow_dissipative = false;
    bool decay_dissipative = false;
};

RateGainCandidates kappa_for_rate(double plastic_slope, double elastic_modulus, double length);

/// Two-column plain-text export (strain, stress).
void write_curve(std::ostream& os, const StressStrainCurve& curve);

}  // namespace sgstab
