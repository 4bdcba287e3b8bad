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

#include "sgstab/galerkin.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace sgstab {

namespace {

bool columns_identical(const Eigen::MatrixXd& m)
{
    for (Eigen::Index j = 1; j < m.cols(); ++j) {
        if ((m.col(j).array() != m.col(0).array()).any()) return false;
    }
    return true;
}

Eigen::MatrixXd galerkin_matrix(const Eigen::VectorXd& modes,
                                const std::vector<Eigen::MatrixXd>& tensor)
{
    const Eigen::Index n = tensor.front().rows();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k < modes.size(); ++k) {
        if (modes[k] != 0.0) a += modes[k] * tensor[static_cast<std::size_t>(k)];
    }
    return a;
}

}  // namespace

HyperbolicityReport check_hyperbolicity(const ModeField& lambda_plus, const ModeField& lambda_minus,
                                        const GpcBasis& basis)
{
    if (lambda_plus.rows() != basis.size() || lambda_minus.rows() != basis.size()) {
        throw std::invalid_argument("speed mode fields must have one row per basis index");
    }
    // realizations at all tensorized quadrature nodes, for every cell
    const Eigen::MatrixXd& phi = basis.basis_at_nodes();  // |K| x nodes
    const Eigen::MatrixXd vals_plus = phi.transpose() * lambda_plus;    // nodes x N
    const Eigen::MatrixXd vals_minus = phi.transpose() * lambda_minus;

    HyperbolicityReport rep;
    rep.min_plus = vals_plus.minCoeff();
    rep.max_plus = vals_plus.maxCoeff();
    rep.min_minus = vals_minus.minCoeff();
    rep.max_minus = vals_minus.maxCoeff();
    rep.pass = rep.min_plus > 0.0 && rep.max_minus < 0.0;
    rep.lambda_min = std::min(rep.min_plus, -rep.max_minus);
    return rep;
}

Eigen::MatrixXd assemble_advection(const Eigen::VectorXd& modes,
                                   const std::vector<Eigen::MatrixXd>& triple_tensor)
{
    if (modes.size() != static_cast<Eigen::Index>(triple_tensor.size())) {
        throw std::invalid_argument("advection assembly: modes and tensor sizes differ");
    }
    return galerkin_matrix(modes, triple_tensor);
}

void diagonalize(const Eigen::MatrixXd& a, Eigen::MatrixXd& t, Eigen::VectorXd& d)
{
    // near-scalar matrices have a fully degenerate spectrum and the solver
    // would return an arbitrary rotation; pick the identity basis instead
    const double scale = a.cwiseAbs().maxCoeff();
    bool scalar = true;
    for (Eigen::Index i = 0; i < a.rows() && scalar; ++i) {
        for (Eigen::Index j = 0; j < a.cols() && scalar; ++j) {
            const double target = i == j ? a(0, 0) : 0.0;
            scalar = std::abs(a(i, j) - target) <= 1e-13 * scale;
        }
    }
    if (scalar) {
        t = Eigen::MatrixXd::Identity(a.rows(), a.cols());
        d = a.diagonal();
        return;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("diagonalize: symmetric eigensolver failed");
    }
    t = es.eigenvectors();
    d = es.eigenvalues();
    // deterministic sign: largest-magnitude component of each eigenvector positive
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
        Eigen::Index imax;
        t.col(j).cwiseAbs().maxCoeff(&imax);
        if (t(imax, j) < 0.0) t.col(j) = -t.col(j);
    }
}

Eigen::MatrixXd transform_boundary(const Eigen::Matrix2d& boundary, const Eigen::MatrixXd& t_plus_0,
                                   const Eigen::MatrixXd& t_plus_L, const Eigen::MatrixXd& t_minus_0,
                                   const Eigen::MatrixXd& t_minus_L)
{
    const Eigen::Index n = t_plus_0.rows();
    Eigen::MatrixXd b_hat(2 * n, 2 * n);
    b_hat.topLeftCorner(n, n) = boundary(0, 0) * t_plus_0.transpose() * t_plus_L;
    b_hat.topRightCorner(n, n) = boundary(0, 1) * t_plus_0.transpose() * t_minus_0;
    b_hat.bottomLeftCorner(n, n) = boundary(1, 0) * t_minus_L.transpose() * t_plus_L;
    b_hat.bottomRightCorner(n, n) = boundary(1, 1) * t_minus_L.transpose() * t_minus_0;
    return b_hat;
}

Eigen::VectorXd GalerkinSystem::stacked_speeds(int cell) const
{
    Eigen::VectorXd d(2 * n_modes);
    d.head(n_modes) = d_plus[static_cast<std::size_t>(cell)];
    d.tail(n_modes) = d_minus[static_cast<std::size_t>(cell)];
    return d;
}

std::vector<Eigen::MatrixXd> assemble_q(const std::vector<Eigen::MatrixXd>& t_plus,
                                        const std::vector<Eigen::MatrixXd>& t_minus,
                                        const std::vector<Eigen::VectorXd>& d_plus,
                                        const std::vector<Eigen::VectorXd>& d_minus,
                                        const SourceModes& source,
                                        const std::vector<Eigen::MatrixXd>& triple_tensor, double dx)
{
    const int cells = static_cast<int>(t_plus.size());
    const Eigen::Index n = t_plus.front().rows();

    auto all_equal = [](const std::vector<Eigen::MatrixXd>& t) {
        for (std::size_t i = 1; i < t.size(); ++i) {
            if ((t[i].array() != t[0].array()).any()) return false;
        }
        return true;
    };
    const bool constant_plus = all_equal(t_plus);
    const bool constant_minus = all_equal(t_minus);

    auto dt_at = [&](const std::vector<Eigen::MatrixXd>& t, int i, bool constant) -> Eigen::MatrixXd {
        if (cells == 1 || constant) return Eigen::MatrixXd::Zero(n, n);
        if (i == 0) {
            return (-3.0 * t[0] + 4.0 * t[1] - t[2]) / (2.0 * dx);
        }
        if (i == cells - 1) {
            return (3.0 * t[static_cast<std::size_t>(i)] - 4.0 * t[static_cast<std::size_t>(i - 1)] +
                    t[static_cast<std::size_t>(i - 2)]) /
                   (2.0 * dx);
        }
        return (t[static_cast<std::size_t>(i + 1)] - t[static_cast<std::size_t>(i - 1)]) / (2.0 * dx);
    };

    std::vector<Eigen::MatrixXd> q;
    q.reserve(static_cast<std::size_t>(cells));
    for (int i = 0; i < cells; ++i) {
        const Eigen::MatrixXd c_pp = galerkin_matrix(source.pp.col(i), triple_tensor);
        const Eigen::MatrixXd c_pm = galerkin_matrix(source.pm.col(i), triple_tensor);
        const Eigen::MatrixXd c_mp = galerkin_matrix(source.mp.col(i), triple_tensor);
        const Eigen::MatrixXd c_mm = galerkin_matrix(source.mm.col(i), triple_tensor);

        const Eigen::MatrixXd& tp = t_plus[static_cast<std::size_t>(i)];
        const Eigen::MatrixXd& tm = t_minus[static_cast<std::size_t>(i)];

        Eigen::MatrixXd qi(2 * n, 2 * n);
        qi.topLeftCorner(n, n) = tp.transpose() * c_pp * tp;
        qi.topRightCorner(n, n) = tp.transpose() * c_pm * tm;
        qi.bottomLeftCorner(n, n) = tm.transpose() * c_mp * tp;
        qi.bottomRightCorner(n, n) = tm.transpose() * c_mm * tm;

        const Eigen::MatrixXd dtp = dt_at(t_plus, i, constant_plus);
        const Eigen::MatrixXd dtm = dt_at(t_minus, i, constant_minus);
        qi.topLeftCorner(n, n) +=
            d_plus[static_cast<std::size_t>(i)].asDiagonal() * (tp.transpose() * dtp);
        qi.bottomRightCorner(n, n) +=
            d_minus[static_cast<std::size_t>(i)].asDiagonal() * (tm.transpose() * dtm);

        q.push_back(std::move(qi));
    }
    return q;
}

GalerkinSystem build_system(const RandomSystemSpec& spec, const GpcBasis& basis)
{
    const int cells = static_cast<int>(spec.cell_centers.size());
    if (cells < 1) throw std::invalid_argument("system needs at least one cell");
    if (spec.lambda_plus.cols() != cells || spec.lambda_minus.cols() != cells) {
        throw std::invalid_argument("speed mode fields must have one column per cell");
    }
    if (spec.source.pp.cols() != cells || spec.source.pm.cols() != cells ||
        spec.source.mp.cols() != cells || spec.source.mm.cols() != cells) {
        throw std::invalid_argument("source mode fields must have one column per cell");
    }

    GalerkinSystem sys;
    sys.length = spec.length;
    sys.cell_centers = spec.cell_centers;
    sys.n_modes = basis.size();

    sys.hyperbolicity = check_hyperbolicity(spec.lambda_plus, spec.lambda_minus, basis);
    if (!sys.hyperbolicity.pass) {
        throw std::runtime_error("system assembly: projected speeds change sign at a quadrature node "
                                 "(boundary control not applicable)");
    }

    const auto tensor = basis.triple_product_tensor();
    sys.constant_speeds = columns_identical(spec.lambda_plus) && columns_identical(spec.lambda_minus);

    sys.t_plus.resize(static_cast<std::size_t>(cells));
    sys.t_minus.resize(static_cast<std::size_t>(cells));
    sys.d_plus.resize(static_cast<std::size_t>(cells));
    sys.d_minus.resize(static_cast<std::size_t>(cells));

    const int assemble_cells = sys.constant_speeds ? 1 : cells;
    for (int i = 0; i < assemble_cells; ++i) {
        const Eigen::MatrixXd a_plus = assemble_advection(spec.lambda_plus.col(i), tensor);
        const Eigen::MatrixXd a_minus = assemble_advection(spec.lambda_minus.col(i), tensor);
        diagonalize(a_plus, sys.t_plus[static_cast<std::size_t>(i)], sys.d_plus[static_cast<std::size_t>(i)]);
        diagonalize(a_minus, sys.t_minus[static_cast<std::size_t>(i)], sys.d_minus[static_cast<std::size_t>(i)]);
    }
    if (sys.constant_speeds) {
        for (int i = 1; i < cells; ++i) {
            sys.t_plus[static_cast<std::size_t>(i)] = sys.t_plus[0];
            sys.t_minus[static_cast<std::size_t>(i)] = sys.t_minus[0];
            sys.d_plus[static_cast<std::size_t>(i)] = sys.d_plus[0];
            sys.d_minus[static_cast<std::size_t>(i)] = sys.d_minus[0];
        }
    }

    double lambda_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < cells; ++i) {
        lambda_min = std::min(lambda_min, sys.d_plus[static_cast<std::size_t>(i)].minCoeff());
        lambda_min = std::min(lambda_min, sys.d_minus[static_cast<std::size_t>(i)].cwiseAbs().minCoeff());
        if (sys.d_plus[static_cast<std::size_t>(i)].minCoeff() <= 0.0 ||
            sys.d_minus[static_cast<std::size_t>(i)].maxCoeff() >= 0.0) {
            throw std::runtime_error("system assembly: diagonalized speeds lost their sign");
        }
    }
    sys.lambda_min = lambda_min;

    const double dx = cells > 1 ? spec.cell_centers[1] - spec.cell_centers[0] : spec.length;
    sys.q = assemble_q(sys.t_plus, sys.t_minus, sys.d_plus, sys.d_minus, spec.source, tensor, dx);

    sys.b_hat = transform_boundary(spec.boundary, sys.t_plus.front(), sys.t_plus.back(),
                                   sys.t_minus.front(), sys.t_minus.back());
    return sys;
}

void write_system_report(std::ostream& os, const GalerkinSystem& system)
{
    os.precision(12);
    os << "# galerkin system report\n";
    os << "cells = " << system.cells() << "\n";
    os << "modes = " << system.n_modes << "\n";
    os << "hyperbolic = " << (system.hyperbolicity.pass ? "yes" : "no") << "\n";
    os << "speed_plus_range = [" << system.hyperbolicity.min_plus << ", "
       << system.hyperbolicity.max_plus << "]\n";
    os << "speed_minus_range = [" << system.hyperbolicity.min_minus << ", "
       << system.hyperbolicity.max_minus << "]\n";
    os << "lambda_min = " << system.lambda_min << "\n";
    os << "# columns: x d_plus_min d_plus_max d_minus_min d_minus_max\n";
    for (int i = 0; i < system.cells(); ++i) {
        os << system.cell_centers[i] << " " << system.d_plus[static_cast<std::size_t>(i)].minCoeff()
           << " " << system.d_plus[static_cast<std::size_t>(i)].maxCoeff() << " "
           << system.d_minus[static_cast<std::size_t>(i)].minCoeff() << " "
           << system.d_minus[static_cast<std::size_t>(i)].maxCoeff() << "\n";
    }
}

}  // namespace sgstab
