// Test-only reference implementations, kept independent of the library code
// paths they check: plain recurrence evaluation, dense tensorized
// quadrature, analytic eigenpairs of the exponential kernel, and a grid
// search for the scaled boundary norm.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "sgstab/gpc.hpp"

namespace oracles {

// unnormalized recurrence value, written as a direct loop
inline double poly_value(sgstab::PolyFamily family, int k, double xi)
{
    double pm1 = 0.0, p = 1.0;
    for (int n = 0; n < k; ++n) {
        double next;
        if (family == sgstab::PolyFamily::Hermite) {
            next = xi * p - n * pm1;
        } else {
            next = ((2.0 * n + 1.0) * xi * p - n * pm1) / (n + 1.0);
        }
        pm1 = p;
        p = next;
    }
    return p;
}

// analytic squared norms: k! for Hermite, 1/(2k+1) for Legendre with the
// uniform density 1/2
inline double poly_norm(sgstab::PolyFamily family, int k)
{
    if (family == sgstab::PolyFamily::Hermite) {
        double f = 1.0;
        for (int i = 2; i <= k; ++i) f *= i;
        return std::sqrt(f);
    }
    return std::sqrt(1.0 / (2.0 * k + 1.0));
}

// dense tensorized quadrature of f over R^M against the product density,
// using the library quadrature nodes but an independent evaluation loop
inline double tensor_integral(const std::vector<sgstab::Quadrature>& rules,
                              const std::function<double(const Eigen::VectorXd&)>& f)
{
    const int m = static_cast<int>(rules.size());
    std::vector<int> digit(static_cast<std::size_t>(m), 0);
    Eigen::VectorXd xi(m);
    double total = 0.0;
    while (true) {
        double w = 1.0;
        for (int d = 0; d < m; ++d) {
            xi[d] = rules[static_cast<std::size_t>(d)].nodes[digit[static_cast<std::size_t>(d)]];
            w *= rules[static_cast<std::size_t>(d)].weights[digit[static_cast<std::size_t>(d)]];
        }
        total += w * f(xi);
        int d = m - 1;
        while (d >= 0) {
            if (++digit[static_cast<std::size_t>(d)] < rules[static_cast<std::size_t>(d)].nodes.size()) break;
            digit[static_cast<std::size_t>(d)] = 0;
            --d;
        }
        if (d < 0) break;
    }
    return total;
}

// normalized multi-index polynomial via the reference loop and analytic norms
inline double basis_value(const std::vector<sgstab::PolyFamily>& families,
                          const std::vector<int>& index, const Eigen::VectorXd& xi)
{
    double v = 1.0;
    for (std::size_t d = 0; d < families.size(); ++d) {
        v *= poly_value(families[d], index[d], xi[static_cast<Eigen::Index>(d)]) /
             poly_norm(families[d], index[d]);
    }
    return v;
}

// First eigenvalues of sigma^2 exp(-|x-y|/ell) on [0,L] through the
// transcendental equations for the even and odd families: on [-a,a] with
// a = L/2 and c = 1/ell, even roots solve tan(w a) = c/w and odd roots
// tan(w a) = -w/c; each eigenvalue is 2 c sigma^2 / (w^2 + c^2).
inline std::vector<double> exponential_kernel_eigenvalues(double sigma2, double ell, double length,
                                                          int count)
{
    const double a = 0.5 * length;
    const double c = 1.0 / ell;

    auto bisect = [](const std::function<double(double)>& f, double lo, double hi) {
        double flo = f(lo);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = f(mid);
            if ((flo < 0.0) == (fm < 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    };

    std::vector<double> roots;
    const double eps = 1e-11;
    for (int n = 0; static_cast<int>(roots.size()) < 2 * count; ++n) {
        // even root in (n pi, n pi + pi/2) / a, odd root in (n pi + pi/2, (n+1) pi) / a
        const double lo_e = (n * M_PI) / a + eps;
        const double hi_e = (n * M_PI + 0.5 * M_PI) / a - eps;
        roots.push_back(bisect([&](double w) { return std::tan(w * a) - c / w; }, lo_e, hi_e));
        const double lo_o = (n * M_PI + 0.5 * M_PI) / a + eps;
        const double hi_o = ((n + 1) * M_PI) / a - eps;
        roots.push_back(bisect([&](double w) { return std::tan(w * a) + w / c; }, lo_o, hi_o));
    }
    std::sort(roots.begin(), roots.end());
    std::vector<double> eigs;
    for (int i = 0; i < count; ++i) {
        const double w = roots[static_cast<std::size_t>(i)];
        eigs.push_back(2.0 * c * sigma2 / (w * w + c * c));
    }
    return eigs;
}

// brute-force search over diag(1, d) scalings for 2x2 matrices
inline double rho2_grid(const Eigen::Matrix2d& b)
{
    double best = std::numeric_limits<double>::infinity();
    for (int i = -3000; i <= 3000; ++i) {
        const double d = std::pow(10.0, i / 1000.0);
        Eigen::Matrix2d scaled = b;
        scaled(0, 1) /= d;
        scaled(1, 0) *= d;
        const double norm = scaled.jacobiSvd().singularValues()[0];
        best = std::min(best, norm);
    }
    return best;
}

}  // namespace oracles
