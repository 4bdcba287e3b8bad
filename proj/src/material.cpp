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

#include "sgstab/material.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace sgstab {

namespace {

void require_positive(double v, const char* name)
{
    if (!(v > 0.0)) {
        throw std::invalid_argument(std::string("material: ") + name + " must be positive");
    }
}

}  // namespace

void BergstromParams::validate() const
{
    require_positive(u0, "u0");
    require_positive(temperature, "temperature");
    require_positive(omega0, "omega0");
    require_positive(c, "c");
    require_positive(m, "m");
    require_positive(q, "q");
    require_positive(gas_constant, "gas_constant");
    require_positive(strain_rate, "strain_rate");
    require_positive(sigma0, "sigma0");
    require_positive(alpha, "alpha");
    require_positive(shear_modulus, "shear_modulus");
    require_positive(burgers, "burgers");
    require_positive(rho_init, "rho_init");
}

void DrxParams::validate() const
{
    base.validate();
    require_positive(eps_c, "eps_c");
    if (!(eps_s > eps_c)) {
        throw std::invalid_argument("material: saturation strain eps_s must exceed eps_c");
    }
    require_positive(kappa_drx, "kappa_drx");
    require_positive(q_drx, "q_drx");
}

StressStrainCurve bergstrom_stress(const Eigen::VectorXd& strain_grid, const BergstromParams& p)
{
    p.validate();
    if (strain_grid.size() < 1 || strain_grid[0] != 0.0) {
        throw std::invalid_argument("stress curve: strain grid must start at zero");
    }
    for (Eigen::Index i = 1; i < strain_grid.size(); ++i) {
        if (!(strain_grid[i] > strain_grid[i - 1])) {
            throw std::invalid_argument("stress curve: strain grid must be strictly increasing");
        }
    }

    const double storage = p.strain_rate * p.u0 / p.temperature;
    const double remob =
        p.omega0 + p.c * std::exp(-p.m * p.q / (p.gas_constant * p.temperature)) *
                       std::pow(p.strain_rate, -p.m);
    auto rhs = [&](double rho) { return storage * std::sqrt(rho) - remob * rho; };

    StressStrainCurve curve;
    curve.strain = strain_grid;
    curve.stress.resize(strain_grid.size());

    double rho = p.rho_init;
    curve.stress[0] = p.sigma0 + p.alpha * p.shear_modulus * p.burgers * std::sqrt(rho);
    for (Eigen::Index i = 1; i < strain_grid.size(); ++i) {
        const double h = strain_grid[i] - strain_grid[i - 1];
        const double k1 = rhs(rho);
        const double k2 = rhs(rho + 0.5 * h * k1);
        const double k3 = rhs(rho + 0.5 * h * k2);
        const double k4 = rhs(rho + h * k3);
        rho += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!(rho > 0.0)) {
            throw std::runtime_error("stress curve: dislocation density driven non-positive at strain " +
                                     std::to_string(strain_grid[i]));
        }
        curve.stress[i] = p.sigma0 + p.alpha * p.shear_modulus * p.burgers * std::sqrt(rho);
    }
    return curve;
}

StressStrainCurve drx_stress(const Eigen::VectorXd& strain_grid, const DrxParams& p)
{
    p.validate();
    StressStrainCurve base = bergstrom_stress(strain_grid, p.base);
    if (p.eps_c >= strain_grid[strain_grid.size() - 1]) {
        throw std::invalid_argument("drx: critical strain lies outside the strain grid");
    }

    auto fraction = [&](double eps) {
        if (eps <= p.eps_c) return 0.0;
        const double s = (eps - p.eps_c) / (p.eps_s - p.eps_c);
        return 1.0 - std::exp(-p.kappa_drx * std::pow(s, p.q_drx));
    };
    auto fraction_rate = [&](double eps) {
        if (eps <= p.eps_c) return 0.0;
        const double span = p.eps_s - p.eps_c;
        const double s = (eps - p.eps_c) / span;
        return p.kappa_drx * p.q_drx / span * std::pow(s, p.q_drx - 1.0) *
               std::exp(-p.kappa_drx * std::pow(s, p.q_drx));
    };
    auto base_stress = [&](double eps) {
        // piecewise-linear read-back of the hardening curve
        if (eps <= base.strain[0]) return base.stress[0];
        const Eigen::Index n = base.strain.size();
        for (Eigen::Index i = 1; i < n; ++i) {
            if (eps <= base.strain[i]) {
                const double t = (eps - base.strain[i - 1]) / (base.strain[i] - base.strain[i - 1]);
                return (1.0 - t) * base.stress[i - 1] + t * base.stress[i];
            }
        }
        return base.stress[n - 1];
    };
    const double sigma_c = base_stress(p.eps_c);

    StressStrainCurve curve = base;
    double softened = 0.0;  // trapezoid accumulation of X'(e) sigma(e - eps_c)
    double prev_eps = p.eps_c;
    // limit of X' at eps_c: zero for q > 1, kappa/span for q = 1, and the
    // q < 1 singularity is integrable so the first segment starts at zero
    double prev_integrand =
        p.q_drx == 1.0 ? p.kappa_drx / (p.eps_s - p.eps_c) * base_stress(0.0) : 0.0;
    for (Eigen::Index i = 0; i < strain_grid.size(); ++i) {
        const double eps = strain_grid[i];
        if (eps <= p.eps_c) continue;
        const double integrand = fraction_rate(eps) * base_stress(eps - p.eps_c);
        softened += 0.5 * (eps - prev_eps) * (prev_integrand + integrand);
        prev_eps = eps;
        prev_integrand = integrand;
        curve.stress[i] = sigma_c * (1.0 - fraction(eps)) + softened;
    }
    return curve;
}

double linearize_plastic(const StressStrainCurve& curve, double sigma_star)
{
    const Eigen::Index n = curve.stress.size();
    if (n < 3) throw std::invalid_argument("linearization needs at least three curve points");

    Eigen::Index at = -1;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const double lo = std::min(curve.stress[i], curve.stress[i + 1]);
        const double hi = std::max(curve.stress[i], curve.stress[i + 1]);
        if (sigma_star >= lo && sigma_star <= hi) {
            at = i;
            break;
        }
    }
    if (at < 0) {
        throw std::invalid_argument("linearization: sigma_star outside the stress range of the curve");
    }

    const Eigen::Index lo = std::max<Eigen::Index>(0, at - 1);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, at + 2);
    const double dsigma = curve.stress[hi] - curve.stress[lo];
    if (dsigma == 0.0) return 0.0;  // flat branch: strain insensitive to stress
    for (Eigen::Index i = lo; i < hi; ++i) {
        if ((curve.stress[i + 1] - curve.stress[i]) * dsigma < 0.0) {
            throw std::invalid_argument("linearization: stress-strain curve not monotone near sigma_star");
        }
    }
    // central difference of strain as a function of stress
    return (curve.strain[hi] - curve.strain[lo]) / dsigma;
}

Eigen::Matrix2d RiemannTransform::source(double plastic_slope) const
{
    return -(plastic_slope / 2.0) * Eigen::Matrix2d::Ones();
}

RiemannTransform riemann_transform(double elastic_modulus)
{
    if (!(elastic_modulus > 0.0)) {
        throw std::invalid_argument("riemann transform: elastic modulus must be positive");
    }
    const double root_e = std::sqrt(elastic_modulus);
    RiemannTransform rt;
    rt.t << -1.0, 1.0, root_e, root_e;
    rt.t_inverse << -0.5, 0.5 / root_e, 0.5, 0.5 / root_e;
    rt.lambda << root_e, 0.0, 0.0, -root_e;
    return rt;
}

FeedbackGains feedback_gains(double kappa0, double kappa1, double elastic_modulus)
{
    if (!(elastic_modulus > 0.0)) {
        throw std::invalid_argument("feedback: elastic modulus must be positive");
    }
    if (kappa0 == -1.0 || kappa1 == -1.0) {
        throw std::invalid_argument("feedback: gain -1 makes the physical law singular");
    }
    const double root_e = std::sqrt(elastic_modulus);
    FeedbackGains fg;
    fg.kappa0 = kappa0;
    fg.kappa1 = kappa1;
    fg.riemann << 0.0, kappa0, kappa1, 0.0;
    fg.physical << (1.0 - kappa0) / ((1.0 + kappa0) * root_e), 0.0, 0.0,
        (kappa1 - 1.0) / ((1.0 + kappa1) * root_e);
    return fg;
}

RateGainCandidates kappa_for_rate(double plastic_slope, double elastic_modulus, double length)
{
    if (!(elastic_modulus > 0.0) || !(length > 0.0)) {
        throw std::invalid_argument("kappa_for_rate: elastic modulus and length must be positive");
    }
    const double root_e = std::sqrt(elastic_modulus);
    const double a = length / root_e * std::abs(plastic_slope);

    RateGainCandidates rc;
    rc.mu_hat = 2.0 * std::abs(plastic_slope);
    rc.kappa_grow = std::exp(a);
    rc.kappa_decay = std::exp(-a);
    // boundary condition bound with lambda_min = sqrt(E):
    // exp(mu_hat L / (2 sqrt(E))) |kappa| <= 1
    const double amplification = std::exp(rc.mu_hat * length / (2.0 * root_e));
    rc.product_grow = amplification * rc.kappa_grow;
    rc.product_decay = amplification * rc.kappa_decay;
    // the decaying candidate sits exactly on the bound; allow roundoff there
    rc.grow_dissipative = rc.product_grow <= 1.0 + 1e-12;
    rc.decay_dissipative = rc.product_decay <= 1.0 + 1e-12;
    return rc;
}

void write_curve(std::ostream& os, const StressStrainCurve& curve)
{
    os.precision(17);
    os << "# columns: strain stress\n";
    for (Eigen::Index i = 0; i < curve.strain.size(); ++i) {
        os << curve.strain[i] << " " << curve.stress[i] << "\n";
    }
}

}  // namespace sgstab
