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

#include <functional>
#include <iosfwd>
#include <string>

#include "sgstab/gpc.hpp"

namespace sgstab {

using ScalarField = std::function<double(double)>;
using CovarianceFn = std::function<double(double, double)>;

// Stationary covariance kernels on the line. Exponential and squared
// exponential are the nu = 1/2 and nu -> infinity limits of the Matern
// family.
struct CovarianceKernel {
    enum class Kind { Exponential, SquaredExponential, Matern };

    Kind kind = Kind::SquaredExponential;
    double sigma2 = 1.0;    // variance at zero distance
    double corr_len = 1.0;  // correlation length, same units as x
    double nu = 1.5;        // Matern smoothness

    static CovarianceKernel exponential(double sigma2, double corr_len);
    static CovarianceKernel squared_exponential(double sigma2, double corr_len);
    static CovarianceKernel matern(double sigma2, double corr_len, double nu);

    double operator()(double x1, double x2) const;
    std::string describe() const;
};

CovarianceKernel::Kind parse_kernel_kind(const std::string& name);
std::string to_string(CovarianceKernel::Kind kind);

// Gaussian process conditioned on point measurements. The posterior mean
// interpolates the data and the posterior variance vanishes at the
// measurement locations.
class ConditionedField {
public:
    ConditionedField(ScalarField prior_mean, CovarianceKernel prior_kernel,
                     Eigen::VectorXd locations, Eigen::VectorXd values);

    double posterior_mean(double x) const;
    double posterior_cov(double x1, double x2) const;

    ScalarField mean_function() const;
    CovarianceFn covariance_function() const;

    const Eigen::VectorXd& locations() const { return locations_; }
    const Eigen::VectorXd& values() const { return values_; }
    const CovarianceKernel& prior_kernel() const { return kernel_; }

private:
    ScalarField prior_mean_;
    CovarianceKernel kernel_;
    Eigen::VectorXd locations_;
    Eigen::VectorXd values_;
    Eigen::LDLT<Eigen::MatrixXd> gram_;
    Eigen::VectorXd alpha_;  // gram^{-1} (values - prior_mean(locations))
};

ConditionedField condition(ScalarField prior_mean, const CovarianceKernel& kernel,
                           const Eigen::VectorXd& locations, const Eigen::VectorXd& values);

// Truncated Karhunen-Loeve expansion of a covariance kernel on [0,L]:
// eigenvalues d_1 >= ... >= d_M > 0 and eigenfunctions orthonormal in
// L2(0,L), sampled on the decomposition grid and linearly interpolated
// in between.
struct KlExpansion {
    double length = 0.0;
    Eigen::VectorXd eigenvalues;    // descending, strictly positive
    Eigen::VectorXd grid;           // decomposition grid including endpoints
    Eigen::MatrixXd eigenfunctions; // grid points x modes

    int modes() const { return static_cast<int>(eigenvalues.size()); }
    /// psi_k(x) by linear interpolation on the decomposition grid.
    double eval(int mode, double x) const;
    /// Eigenfunctions sampled at the given points, one column per mode.
    Eigen::MatrixXd sample(const Eigen::VectorXd& points) const;
};

/// Nystrom decomposition of a covariance function with trapezoid weights on
/// a uniform grid of n_quad points.
KlExpansion kl_decompose(const CovarianceFn& covariance, double length, int modes, int n_quad);
KlExpansion kl_decompose(const CovarianceKernel& kernel, double length, int modes, int n_quad);
KlExpansion kl_decompose(const ConditionedField& field, double length, int modes, int n_quad);

struct ExplainedVariance {
    double total = 0.0;                      // sum d_k / integral of C(x,x)
    std::function<double(double)> pointwise; // sum d_k psi_k(x)^2 / C(x,x)
};

ExplainedVariance explained_variance(const KlExpansion& kl, const CovarianceFn& covariance);
ExplainedVariance explained_variance(const KlExpansion& kl, const CovarianceKernel& kernel);

/// mean(x) + sum_k sqrt(d_k) psi_k(x) xi_k at the given points.
Eigen::VectorXd sample_path(const KlExpansion& kl, const ScalarField& mean,
                            const Eigen::VectorXd& draw, const Eigen::VectorXd& points);

/// Embed mean + KL fluctuations as first-order Hermite modes: mode 0 holds
/// the mean, the unit index of dimension k holds sqrt(d_k) psi_k(x), all
/// other modes vanish. Returns a |K| x n_points mode field.
Eigen::MatrixXd kl_to_gpc(const KlExpansion& kl, const ScalarField& mean,
                          const GpcBasis& basis, const Eigen::VectorXd& points);

/// Plain-text export: header with L, M and the kernel descriptor, the
/// eigenvalue list, then rows x, psi_1(x), ..., psi_M(x).
void write_kl_table(std::ostream& os, const KlExpansion& kl, const std::string& kernel_descriptor);

}  // namespace sgstab
