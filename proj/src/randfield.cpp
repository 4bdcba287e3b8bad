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

#include "sgstab/randfield.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sgstab {

namespace {

void validate_kernel(const CovarianceKernel& k)
{
    if (!(k.sigma2 > 0.0)) throw std::invalid_argument("kernel variance must be positive");
    if (!(k.corr_len > 0.0)) throw std::invalid_argument("kernel correlation length must be positive");
    if (k.kind == CovarianceKernel::Kind::Matern && !(k.nu > 0.0)) {
        throw std::invalid_argument("Matern smoothness nu must be positive");
    }
}

double matern_value(double sigma2, double corr_len, double nu, double r)
{
    if (r == 0.0) return sigma2;
    const double u = std::sqrt(2.0 * nu) * r / corr_len;
    // closed forms for the half-integer orders used in practice
    if (nu == 0.5) return sigma2 * std::exp(-u);
    if (nu == 1.5) return sigma2 * (1.0 + u) * std::exp(-u);
    if (nu == 2.5) return sigma2 * (1.0 + u + u * u / 3.0) * std::exp(-u);
    if (u > 700.0) return 0.0;  // K_nu underflows
    const double scale = sigma2 * std::pow(2.0, 1.0 - nu) / std::tgamma(nu);
    return scale * std::pow(u, nu) * std::cyl_bessel_k(nu, u);
}

}  // namespace

CovarianceKernel CovarianceKernel::exponential(double sigma2, double corr_len)
{
    CovarianceKernel k{Kind::Exponential, sigma2, corr_len, 0.5};
    validate_kernel(k);
    return k;
}

CovarianceKernel CovarianceKernel::squared_exponential(double sigma2, double corr_len)
{
    CovarianceKernel k{Kind::SquaredExponential, sigma2, corr_len, 0.0};
    k.nu = std::numeric_limits<double>::infinity();
    validate_kernel(k);
    return k;
}

CovarianceKernel CovarianceKernel::matern(double sigma2, double corr_len, double nu)
{
    CovarianceKernel k{Kind::Matern, sigma2, corr_len, nu};
    validate_kernel(k);
    return k;
}

double CovarianceKernel::operator()(double x1, double x2) const
{
    const double r = std::abs(x1 - x2);
    switch (kind) {
        case Kind::Exponential:
            return sigma2 * std::exp(-r / corr_len);
        case Kind::SquaredExponential: {
            const double s = r / corr_len;
            return sigma2 * std::exp(-0.5 * s * s);
        }
        case Kind::Matern:
            return matern_value(sigma2, corr_len, nu, r);
    }
    return 0.0;
}

std::string CovarianceKernel::describe() const
{
    std::ostringstream os;
    os << to_string(kind) << " sigma2=" << sigma2 << " corr_length=" << corr_len;
    if (kind == Kind::Matern) os << " nu=" << nu;
    return os.str();
}

CovarianceKernel::Kind parse_kernel_kind(const std::string& name)
{
    if (name == "exponential") return CovarianceKernel::Kind::Exponential;
    if (name == "gaussian" || name == "squared_exponential") return CovarianceKernel::Kind::SquaredExponential;
    if (name == "matern") return CovarianceKernel::Kind::Matern;
    throw std::invalid_argument("unknown kernel kind '" + name +
                                "' (expected exponential, gaussian or matern)");
}

std::string to_string(CovarianceKernel::Kind kind)
{
    switch (kind) {
        case CovarianceKernel::Kind::Exponential: return "exponential";
        case CovarianceKernel::Kind::SquaredExponential: return "gaussian";
        case CovarianceKernel::Kind::Matern: return "matern";
    }
    return "?";
}

ConditionedField::ConditionedField(ScalarField prior_mean, CovarianceKernel prior_kernel,
                                   Eigen::VectorXd locations, Eigen::VectorXd values)
    : prior_mean_(std::move(prior_mean)),
      kernel_(prior_kernel),
      locations_(std::move(locations)),
      values_(std::move(values))
{
    validate_kernel(kernel_);
    if (locations_.size() != values_.size()) {
        throw std::invalid_argument("conditioning needs one value per measurement location");
    }
    const Eigen::Index m = locations_.size();
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i + 1; j < m; ++j) {
            if (locations_[i] == locations_[j]) {
                throw std::invalid_argument("duplicate measurement location makes the Gram matrix singular");
            }
        }
    }
    if (m == 0) return;

    Eigen::MatrixXd gram(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) gram(i, j) = kernel_(locations_[i], locations_[j]);
    }
    gram_.compute(gram);
    if (gram_.info() != Eigen::Success || !gram_.isPositive()) {
        throw std::runtime_error("conditioning: measurement Gram matrix is not positive definite");
    }
    Eigen::VectorXd centered(m);
    for (Eigen::Index i = 0; i < m; ++i) centered[i] = values_[i] - prior_mean_(locations_[i]);
    alpha_ = gram_.solve(centered);
}

double ConditionedField::posterior_mean(double x) const
{
    double v = prior_mean_(x);
    for (Eigen::Index i = 0; i < locations_.size(); ++i) {
        v += kernel_(x, locations_[i]) * alpha_[i];
    }
    return v;
}

double ConditionedField::posterior_cov(double x1, double x2) const
{
    double v = kernel_(x1, x2);
    const Eigen::Index m = locations_.size();
    if (m == 0) return v;
    Eigen::VectorXd k1(m), k2(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        k1[i] = kernel_(x1, locations_[i]);
        k2[i] = kernel_(x2, locations_[i]);
    }
    return v - k1.dot(gram_.solve(k2));
}

ScalarField ConditionedField::mean_function() const
{
    return [*this](double x) { return posterior_mean(x); };
}

CovarianceFn ConditionedField::covariance_function() const
{
    return [*this](double x1, double x2) { return posterior_cov(x1, x2); };
}

ConditionedField condition(ScalarField prior_mean, const CovarianceKernel& kernel,
                           const Eigen::VectorXd& locations, const Eigen::VectorXd& values)
{
    return ConditionedField(std::move(prior_mean), kernel, locations, values);
}

double KlExpansion::eval(int mode, double x) const
{
    const Eigen::Index n = grid.size();
    if (x <= grid[0]) return eigenfunctions(0, mode);
    if (x >= grid[n - 1]) return eigenfunctions(n - 1, mode);
    const double h = grid[1] - grid[0];
    const Eigen::Index i = std::min<Eigen::Index>(static_cast<Eigen::Index>((x - grid[0]) / h), n - 2);
    const double t = (x - grid[i]) / (grid[i + 1] - grid[i]);
    return (1.0 - t) * eigenfunctions(i, mode) + t * eigenfunctions(i + 1, mode);
}

Eigen::MatrixXd KlExpansion::sample(const Eigen::VectorXd& points) const
{
    Eigen::MatrixXd out(points.size(), modes());
    for (Eigen::Index i = 0; i < points.size(); ++i) {
        for (int k = 0; k < modes(); ++k) out(i, k) = eval(k, points[i]);
    }
    return out;
}

KlExpansion kl_decompose(const CovarianceFn& covariance, double length, int modes, int n_quad)
{
    if (modes < 1) throw std::invalid_argument("KL decomposition needs at least one mode");
    if (!(length > 0.0)) throw std::invalid_argument("KL decomposition needs a positive domain length");
    if (n_quad < 4 * modes) {
        throw std::invalid_argument("KL decomposition needs n_quad >= 4*M quadrature points (got " +
                                    std::to_string(n_quad) + " for M=" + std::to_string(modes) + ")");
    }

    const double h = length / (n_quad - 1);
    Eigen::VectorXd grid(n_quad), w(n_quad);
    for (int i = 0; i < n_quad; ++i) {
        grid[i] = i * h;
        w[i] = (i == 0 || i == n_quad - 1) ? 0.5 * h : h;
    }

    // symmetric Nystrom matrix sqrt(W) C sqrt(W)
    Eigen::VectorXd sw = w.array().sqrt();
    Eigen::MatrixXd a(n_quad, n_quad);
    double trace = 0.0;
    for (int i = 0; i < n_quad; ++i) {
        for (int j = i; j < n_quad; ++j) {
            const double c = covariance(grid[i], grid[j]);
            a(i, j) = sw[i] * c * sw[j];
            a(j, i) = a(i, j);
        }
        trace += w[i] * covariance(grid[i], grid[i]);
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("KL decomposition: Nystrom eigenproblem failed");
    }

    const double threshold = 1e-12 * trace;
    int usable = 0;
    for (Eigen::Index i = es.eigenvalues().size() - 1; i >= 0; --i) {
        if (es.eigenvalues()[i] > threshold) ++usable;
        else break;
    }
    if (usable < modes) {
        throw std::runtime_error("KL decomposition: only " + std::to_string(usable) +
                                 " eigenvalues above threshold, requested M=" + std::to_string(modes));
    }

    KlExpansion kl;
    kl.length = length;
    kl.grid = grid;
    kl.eigenvalues.resize(modes);
    kl.eigenfunctions.resize(n_quad, modes);
    const Eigen::Index last = es.eigenvalues().size() - 1;
    for (int k = 0; k < modes; ++k) {
        kl.eigenvalues[k] = es.eigenvalues()[last - k];
        Eigen::VectorXd psi = es.eigenvectors().col(last - k).cwiseQuotient(sw);
        // canonical sign: value at the left end positive, first nonzero as tie-break
        double anchor = psi[0];
        if (std::abs(anchor) < 1e-12 * psi.cwiseAbs().maxCoeff()) {
            for (Eigen::Index i = 0; i < psi.size(); ++i) {
                if (std::abs(psi[i]) > 1e-12 * psi.cwiseAbs().maxCoeff()) {
                    anchor = psi[i];
                    break;
                }
            }
        }
        if (anchor < 0.0) psi = -psi;
        kl.eigenfunctions.col(k) = psi;
    }
    return kl;
}

KlExpansion kl_decompose(const CovarianceKernel& kernel, double length, int modes, int n_quad)
{
    validate_kernel(kernel);
    return kl_decompose(CovarianceFn(kernel), length, modes, n_quad);
}

KlExpansion kl_decompose(const ConditionedField& field, double length, int modes, int n_quad)
{
    return kl_decompose(field.covariance_function(), length, modes, n_quad);
}

ExplainedVariance explained_variance(const KlExpansion& kl, const CovarianceFn& covariance)
{
    const Eigen::Index n = kl.grid.size();
    const double h = kl.grid[1] - kl.grid[0];
    double total_var = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double wi = (i == 0 || i == n - 1) ? 0.5 * h : h;
        total_var += wi * covariance(kl.grid[i], kl.grid[i]);
    }

    ExplainedVariance ev;
    ev.total = kl.eigenvalues.sum() / total_var;
    KlExpansion copy = kl;
    ev.pointwise = [copy, covariance](double x) {
        double s = 0.0;
        for (int k = 0; k < copy.modes(); ++k) {
            const double p = copy.eval(k, x);
            s += copy.eigenvalues[k] * p * p;
        }
        return s / covariance(x, x);
    };
    return ev;
}

ExplainedVariance explained_variance(const KlExpansion& kl, const CovarianceKernel& kernel)
{
    return explained_variance(kl, CovarianceFn(kernel));
}

Eigen::VectorXd sample_path(const KlExpansion& kl, const ScalarField& mean,
                            const Eigen::VectorXd& draw, const Eigen::VectorXd& points)
{
    if (draw.size() != kl.modes()) {
        throw std::invalid_argument("sample_path: draw length must equal the KL truncation");
    }
    Eigen::VectorXd out(points.size());
    for (Eigen::Index i = 0; i < points.size(); ++i) {
        double v = mean(points[i]);
        for (int k = 0; k < kl.modes(); ++k) {
            v += std::sqrt(kl.eigenvalues[k]) * kl.eval(k, points[i]) * draw[k];
        }
        out[i] = v;
    }
    return out;
}

Eigen::MatrixXd kl_to_gpc(const KlExpansion& kl, const ScalarField& mean,
                          const GpcBasis& basis, const Eigen::VectorXd& points)
{
    for (const auto& f : basis.families()) {
        if (f != PolyFamily::Hermite) {
            throw std::invalid_argument("KL embedding requires a Hermite basis: the KL variables "
                                        "of a Gaussian field are standard normal");
        }
    }
    if (basis.dims() != kl.modes()) {
        throw std::invalid_argument("KL embedding: basis has " + std::to_string(basis.dims()) +
                                    " dimensions but the expansion has M=" + std::to_string(kl.modes()));
    }
    if (basis.order() < 1) {
        throw std::invalid_argument("KL embedding needs truncation order K >= 1");
    }

    Eigen::MatrixXd modes = Eigen::MatrixXd::Zero(basis.size(), points.size());
    for (Eigen::Index i = 0; i < points.size(); ++i) {
        modes(0, i) = mean(points[i]);
    }
    for (int k = 0; k < kl.modes(); ++k) {
        const int pos = basis.index_set().unit_index(k);
        const double sd = std::sqrt(kl.eigenvalues[k]);
        for (Eigen::Index i = 0; i < points.size(); ++i) {
            modes(pos, i) = sd * kl.eval(k, points[i]);
        }
    }
    return modes;
}

void write_kl_table(std::ostream& os, const KlExpansion& kl, const std::string& kernel_descriptor)
{
    os.precision(17);
    os << "# karhunen-loeve expansion\n";
    os << "# L = " << kl.length << "\n";
    os << "# M = " << kl.modes() << "\n";
    os << "# kernel = " << kernel_descriptor << "\n";
    os << "# eigenvalues:";
    for (int k = 0; k < kl.modes(); ++k) os << " " << kl.eigenvalues[k];
    os << "\n";
    os << "# columns: x psi_1 ... psi_M\n";
    for (Eigen::Index i = 0; i < kl.grid.size(); ++i) {
        os << kl.grid[i];
        for (int k = 0; k < kl.modes(); ++k) os << " " << kl.eigenfunctions(i, k);
        os << "\n";
    }
}

}  // namespace sgstab
