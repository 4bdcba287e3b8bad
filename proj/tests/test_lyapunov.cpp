#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "sgstab/lyapunov.hpp"

using namespace sgstab;

namespace {

// uniform characteristic speeds +-sqrt(E) with the rank-one viscoplastic
// source of strength `slope`, antidiagonal feedback kappa
GalerkinSystem make_system(const GpcBasis& basis, int cells, double elastic_modulus, double slope,
                           double kappa, double fluct_amp = 0.0)
{
    const int n = basis.size();
    RandomSystemSpec spec;
    spec.length = 1.0;
    spec.cell_centers = Eigen::VectorXd::LinSpaced(cells, 0.5 / cells, 1.0 - 0.5 / cells);
    spec.lambda_plus = Eigen::MatrixXd::Zero(n, cells);
    spec.lambda_minus = Eigen::MatrixXd::Zero(n, cells);
    spec.lambda_plus.row(0).setConstant(std::sqrt(elastic_modulus));
    spec.lambda_minus.row(0).setConstant(-std::sqrt(elastic_modulus));

    Eigen::MatrixXd slope_modes = Eigen::MatrixXd::Zero(n, cells);
    slope_modes.row(0).setConstant(slope);
    if (fluct_amp != 0.0 && basis.order() >= 1) {
        const int pos = basis.index_set().unit_index(0);
        for (int i = 0; i < cells; ++i) {
            slope_modes(pos, i) = fluct_amp * std::sin(2.0 * M_PI * spec.cell_centers[i]);
        }
    }
    spec.source.pp = -0.5 * slope_modes;
    spec.source.pm = spec.source.pp;
    spec.source.mp = spec.source.pp;
    spec.source.mm = spec.source.pp;
    spec.boundary << 0.0, kappa, kappa, 0.0;
    return build_system(spec, basis);
}

}  // namespace

TEST_CASE("continuous weights for constant speeds")
{
    const GpcBasis basis(PolyFamily::Hermite, build_index_set(1, 1, IndexSetKind::Sparse));
    const GalerkinSystem sys = make_system(basis, 64, 100.0, 0.0, 0.9);
    const int n = basis.size();
    const double mu_hat = 0.25;
    const LyapunovWeights w =
        continuous_weights(sys, mu_hat, Eigen::VectorXd::Ones(n), Eigen::VectorXd::Ones(n));

    CHECK(w.at_left[0] == doctest::Approx(0.1).epsilon(1e-13));
    CHECK(w.at_right[0] == doctest::Approx(0.1 * std::exp(-0.025)).epsilon(1e-12));
    // minus family mirrors the plus family
    CHECK(w.at_right[n] == doctest::Approx(0.1).epsilon(1e-13));
    CHECK(w.at_left[n] == doctest::Approx(0.1 * std::exp(-0.025)).epsilon(1e-12));

    // closed form at the cell centers
    for (int i = 0; i < sys.cells(); ++i) {
        const double x = sys.cell_centers[i];
        CHECK(w.cells(0, i) == doctest::Approx(0.1 * std::exp(-0.025 * x)).epsilon(1e-12));
        CHECK(w.cells(n, i) == doctest::Approx(0.1 * std::exp(-0.025 * (1.0 - x))).epsilon(1e-12));
    }
    // plus weights decay, minus weights grow along x
    for (int i = 1; i < sys.cells(); ++i) {
        CHECK(w.cells(0, i) < w.cells(0, i - 1));
        CHECK(w.cells(n, i) > w.cells(n, i - 1));
    }

    const LyapunovWeights flat =
        continuous_weights(sys, 0.0, Eigen::VectorXd::Ones(n), Eigen::VectorXd::Ones(n));
    CHECK((flat.cells.array() - 0.1).abs().maxCoeff() < 1e-14);
}

TEST_CASE("weights reject non-positive parameters")
{
    const GpcBasis basis(PolyFamily::Hermite, build_index_set(1, 1, IndexSetKind::Sparse));
    const GalerkinSystem sys = make_system(basis, 8, 100.0, 0.0, 0.5);
    const int n = basis.size();
    CHECK_THROWS_AS(
        continuous_weights(sys, -0.1, Eigen::VectorXd::Ones(n), Eigen::VectorXd::Ones(n)),
        std::invalid_argument);
    CHECK_THROWS_AS(
        continuous_weights(sys, 0.25, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n)),
        std::invalid_argument);
}

TEST_CASE("weight derivative tracks -mu_hat W to first order")
{
    const GpcBasis basis(PolyFamily::Hermite, build_index_set(1, 2, IndexSetKind::Sparse));
    const double mu_hat = 0.25;
    double prev_err = -1.0;
    for (int cells : {32, 64, 128}) {
        const GalerkinSystem sys = make_system(basis, cells, 100.0, 0.0, 0.9);
        const int n = basis.size();
        const LyapunovWeights w =
            continuous_weights(sys, mu_hat, Eigen::VectorXd::Ones(n), Eigen::VectorXd::Ones(n));
        const double dx = sys.cell_centers[1] - sys.cell_centers[0];
        double worst = 0.0;
        for (int i = 1; i + 1 < cells; ++i) {
            for (int k = 0; k < n; ++k) {
                // d/dx (w+ D+) for constant D: D dw/dx vs -mu_hat w
                const double lhs = sys.d_plus[static_cast<std::size_t>(i)][k] *
                                   (w.cells(k, i + 1) - w.cells(k, i - 1)) / (2.0 * dx);
                worst = std::max(worst, std::abs(lhs + mu_hat * w.cells(k, i)));
            }
        }
        if (prev_err >= 0.0) CHECK(worst < prev_err);
        prev_err = worst;
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("dissipativity margin reproduces the closed-form value")
{
    const GpcBasis basis(PolyFamily::Hermite, build_index_set(4, 4, IndexSetKind::Sparse));
    const GalerkinSystem sys = make_system(basis, 16, 100.0, 1.4, 0.9);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(2 * basis.size());

    const DissipativityResult res = dissipativity_check(sys.b_hat, 0.25, 1.0, sys.lambda_min, ones);
    const double expect = 1.0 - std::exp(0.25 * 1.0 / (2.0 * 10.0)) * 0.9;
    CHECK(std::abs(res.margin - expect) < 1e-12);
    CHECK(res.scaled_norm == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(res.pass);

    // zero boundary matrix: margin one
    const DissipativityResult zero = dissipativity_check(
        Eigen::MatrixXd::Zero(4, 4), 0.25, 1.0, 10.0, Eigen::VectorXd::Ones(4));
    CHECK(zero.margin == doctest::Approx(1.0).epsilon(1e-15));

    // the exponential dominates for large mu_hat
    const DissipativityResult big = dissipativity_check(sys.b_hat, 50.0, 1.0, sys.lambda_min, ones);
    CHECK_FALSE(big.pass);
}

TEST_CASE("dissipativity rejects bad scalings")
{
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2, 2);
    Eigen::VectorXd d(2);
    d << 1.0, -1.0;
    CHECK_THROWS_AS(dissipativity_check(b, 0.25, 1.0, 10.0, d), std::invalid_argument);
    CHECK_THROWS_AS(dissipativity_check(b, 0.25, 1.0, 0.0, Eigen::VectorXd::Ones(2)),
                    std::invalid_argument);
}

TEST_CASE("corollary bound agrees with the assembled check for uniform speeds")
{
    const GpcBasis basis(PolyFamily::Hermite, build_index_set(2, 2, IndexSetKind::Sparse));
    const GalerkinSystem sys = make_system(basis, 16, 100.0, 1.4, 0.9);

    Eigen::Matrix2d b;
    b << 0.0, 0.9, 0.9, 0.0;
    const int n = basis.size();
    Eigen::MatrixXd lp = Eigen::MatrixXd::Zero(n, 16), lm = Eigen::MatrixXd::Zero(n, 16);
    lp.row(0).setConstant(10.0);
    lm.row(0).setConstant(-10.0);

    const CorollaryResult cor = corollary_bound(b, lp, lm, basis, 0.25, 1.0);
    const DissipativityResult diss =
        dissipativity_check(sys.b_hat, 0.25, 1.0, sys.lambda_min, Eigen::VectorXd::Ones(2 * n));
    CHECK(cor.pass);
    CHECK(cor.lambda_min == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(cor.margin == doctest::Approx(diss.margin).epsilon(1e-10));

    // |B| > 1 never passes for non-negative rates
    Eigen::Matrix2d big;
    big << 0.0, 1.2, 1.2, 0.0;
    CHECK_FALSE(corollary_bound(big, lp, lm, basis, 0.0, 1.0).pass);

    // zero boundary matrix passes for every rate
    CHECK(corollary_bound(Eigen::Matrix2d::Zero(), lp, lm, basis, 123.0, 1.0).pass);
}

TEST_CASE("corollary bound implies the assembled dissipativity check")
{
    const GpcBasis basis(PolyFamily::Hermite, build_index_set(1, 2, IndexSetKind::Sparse));
    const int n = basis.size();
    const int cells = 12;
    std::mt19937 rng(71);
    std::uniform_real_distribution<double> u(-1.0, 1.0);

    int tested = 0;
    for (int rep = 0; rep < 25; ++rep) {
        Eigen::Matrix2d b;
        b << u(rng), u(rng), u(rng), u(rng);
        b /= std::max(1.0, 1.05 * b.jacobiSvd().singularValues()[0]);  // norm <= 1

        RandomSystemSpec spec;
        spec.length = 1.0;
        spec.cell_centers = Eigen::VectorXd::LinSpaced(cells, 0.5 / cells, 1.0 - 0.5 / cells);
        spec.lambda_plus = Eigen::MatrixXd::Zero(n, cells);
        spec.lambda_minus = Eigen::MatrixXd::Zero(n, cells);
        spec.lambda_plus.row(0).setConstant(10.0 + u(rng));
        spec.lambda_minus.row(0).setConstant(-(10.0 + u(rng)));
        const int pos = basis.index_set().unit_index(0);
        for (int i = 0; i < cells; ++i) {
            spec.lambda_plus(pos, i) = u(rng) * std::sin(2.0 * M_PI * spec.cell_centers[i]);
            spec.lambda_minus(pos, i) = u(rng) * std::cos(2.0 * M_PI * spec.cell_centers[i]);
        }
        spec.source.pp = Eigen::MatrixXd::Zero(n, cells);
        spec.source.pm = spec.source.pp;
        spec.source.mp = spec.source.pp;
        spec.source.mm = spec.source.pp;
        spec.boundary = b;

        const double mu_hat = 0.1 + 0.4 * std::abs(u(rng));
        const CorollaryResult cor =
            corollary_bound(b, spec.lambda_plus, spec.lambda_minus, basis, mu_hat, 1.0);
        if (!cor.pass) continue;
        ++tested;
        const GalerkinSystem sys = build_system(spec, basis);
        const DissipativityResult diss = dissipativity_check(sys.b_hat, mu_hat, 1.0, sys.lambda_min,
                                                             Eigen::VectorXd::Ones(2 * n));
        CHECK(diss.pass);
    }
    CHECK(tested > 5);
}

TEST_CASE("decay rate: zero source returns the ansatz rate")
{
    const GpcBasis basis(PolyFamily::Hermite, build_index_set(1, 1, IndexSetKind::Sparse));
    const GalerkinSystem sys = make_system(basis, 32, 100.0, 0.0, 0.9);
    const int n = basis.size();
    const LyapunovWeights w =
        continuous_weights(sys, 0.25, Eigen::VectorXd::Ones(n), Eigen::VectorXd::Ones(n));
    CHECK(decay_rate(w, sys.q, 0.25) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("decay rate: strong source drives the certificate negative")
{
    // sensitivity 2.0 (the high-stress regime) overwhelms the ansatz 0.25
    const GpcBasis basis(PolyFamily::Hermite, build_index_set(2, 2, IndexSetKind::Sparse));
    const GalerkinSystem sys = make_system(basis, 64, 100.0, 2.0, 0.9);
    const int n = basis.size();
    const LyapunovWeights w =
        continuous_weights(sys, 0.25, Eigen::VectorXd::Ones(n), Eigen::VectorXd::Ones(n));
    CHECK(decay_rate(w, sys.q, 0.25) < 0.0);
}

TEST_CASE("decay rate is monotone under source damping")
{
    const GpcBasis basis(PolyFamily::Hermite, build_index_set(1, 2, IndexSetKind::Sparse));
    const GalerkinSystem sys = make_system(basis, 32, 100.0, 1.4, 0.9);
    const int n = basis.size();
    const LyapunovWeights w =
        continuous_weights(sys, 0.25, Eigen::VectorXd::Ones(n), Eigen::VectorXd::Ones(n));

    double prev = -std::numeric_limits<double>::infinity();
    for (double s : {1.0, 0.75, 0.5, 0.25, 0.0}) {
        std::vector<Eigen::MatrixXd> scaled;
        for (const auto& qi : sys.q) scaled.push_back(s * qi);
        const double mu = decay_rate(w, scaled, 0.25);
        CHECK(mu >= prev - 1e-14);
        prev = mu;
    }
    CHECK(prev == doctest::Approx(0.25).epsilon(1e-14));  // s = 0 recovers the ansatz
}

TEST_CASE("boundary matrix H: zero feedback and the certified regime")
{
    const GpcBasis basis(PolyFamily::Hermite, build_index_set(2, 2, IndexSetKind::Sparse));
    const int n = basis.size();

    // zero feedback: H is the negative outflow diagonal
    const GalerkinSystem no_fb = make_system(basis, 16, 100.0, 0.0, 0.0);
    const LyapunovWeights w =
        continuous_weights(no_fb, 0.25, Eigen::VectorXd::Ones(n), Eigen::VectorXd::Ones(n));
    const BoundaryMatrix h0 = boundary_matrix_h(Eigen::MatrixXd::Zero(2 * n, 2 * n), w);
    CHECK(h0.max_eigenvalue < 0.0);
    Eigen::VectorXd outflow(2 * n);
    outflow.head(n) = w.at_right.head(n).cwiseProduct(w.speeds_right.head(n));
    outflow.tail(n) = w.at_left.tail(n).cwiseProduct(w.speeds_left.tail(n));
    CHECK((h0.h + Eigen::MatrixXd(outflow.asDiagonal())).cwiseAbs().maxCoeff() < 1e-14);

    // certified gains keep H negative semidefinite
    const GalerkinSystem sys = make_system(basis, 16, 100.0, 1.4, 0.9);
    const LyapunovWeights wc =
        continuous_weights(sys, 0.25, Eigen::VectorXd::Ones(n), Eigen::VectorXd::Ones(n));
    const BoundaryMatrix h = boundary_matrix_h(sys.b_hat, wc);
    CHECK(h.max_eigenvalue <= 1e-8);

    // quadratic form characterization on random boundary vectors
    std::mt19937 rng(83);
    std::normal_distribution<double> gauss;
    for (int rep = 0; rep < 1000; ++rep) {
        Eigen::VectorXd v(2 * n);
        for (int i = 0; i < 2 * n; ++i) v[i] = gauss(rng);
        CHECK(v.dot(h.h * v) <= 1e-8 * v.squaredNorm());
    }

    // an overdriven boundary makes H indefinite
    const GalerkinSystem bad = make_system(basis, 16, 100.0, 1.4, 2.0);
    const BoundaryMatrix hb = boundary_matrix_h(bad.b_hat, wc);
    CHECK(hb.max_eigenvalue > 0.0);
}

TEST_CASE("rho2 of diagonal and antidiagonal matrices")
{
    Eigen::MatrixXd diag = Eigen::Vector3d(0.3, -0.7, 0.5).asDiagonal();
    const Rho2Result rd = rho2(diag);
    CHECK(rd.rho == doctest::Approx(0.7).epsilon(1e-9));

    Eigen::Matrix2d anti;
    anti << 0.0, 0.6, 0.6, 0.0;
    const Rho2Result ra = rho2(anti);
    CHECK(ra.rho == doctest::Approx(oracles::rho2_grid(anti)).epsilon(1e-3));
    CHECK(ra.rho == doctest::Approx(0.6).epsilon(1e-6));

    // asymmetric antidiagonal: the scaling equalizes the two entries
    Eigen::Matrix2d skew;
    skew << 0.0, 0.9, 0.4, 0.0;
    const Rho2Result rs = rho2(skew);
    CHECK(rs.rho == doctest::Approx(oracles::rho2_grid(skew)).epsilon(1e-3));
    CHECK(rs.rho == doctest::Approx(0.6).epsilon(1e-4));  // sqrt(0.9*0.4)
}

TEST_CASE("rho2 never exceeds the unscaled norm and bounds the spectral radius")
{
    std::mt19937 rng(97);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::MatrixXd b(3, 3);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) b(i, j) = u(rng);
        }
        const Rho2Result r = rho2(b);
        const double norm = Eigen::JacobiSVD<Eigen::MatrixXd>(b).singularValues()[0];
        CHECK(r.rho <= norm + 1e-12);
        const double spectral_radius = b.eigenvalues().cwiseAbs().maxCoeff();
        CHECK(r.rho >= spectral_radius - 1e-9);
        CHECK(r.scaling.minCoeff() > 0.0);
    }
}

TEST_CASE("certificate assembles the certified and uncertified regimes")
{
    const GpcBasis basis(PolyFamily::Hermite, build_index_set(2, 3, IndexSetKind::Sparse));

    // weak source: decay certified
    const GalerkinSystem weak = make_system(basis, 32, 100.0, 0.1, 0.9, 0.02);
    const StabilityCertificate cert = build_certificate(weak, 0.25, 1.0, 1.0);
    CHECK(cert.valid);
    CHECK(cert.margin > 0.0);
    CHECK(cert.mu > 0.0);
    CHECK(cert.boundary.max_eigenvalue <= 1e-8);
    CHECK(cert.b_norm == doctest::Approx(0.9).epsilon(1e-12));

    // strong source: dissipativity still holds but no decay is guaranteed
    const GalerkinSystem strong = make_system(basis, 32, 100.0, 2.0, 0.9, 0.02);
    const StabilityCertificate neg = build_certificate(strong, 0.25, 1.0, 1.0);
    CHECK(neg.valid);
    CHECK(neg.mu < 0.0);

    std::ostringstream os;
    write_certificate_report(os, neg);
    CHECK(os.str().find("dissipative = yes") != std::string::npos);
    CHECK(os.str().find("decay_rate") != std::string::npos);
}

TEST_CASE("certificate can adopt an improving scaling")
{
    const GpcBasis basis(PolyFamily::Hermite, build_index_set(1, 1, IndexSetKind::Sparse));
    // asymmetric gains: the identity scaling is not optimal for the
    // boundary norm
    const int n = basis.size();
    RandomSystemSpec spec;
    spec.length = 1.0;
    spec.cell_centers = Eigen::VectorXd::LinSpaced(16, 0.5 / 16, 1.0 - 0.5 / 16);
    spec.lambda_plus = Eigen::MatrixXd::Zero(n, 16);
    spec.lambda_minus = Eigen::MatrixXd::Zero(n, 16);
    spec.lambda_plus.row(0).setConstant(10.0);
    spec.lambda_minus.row(0).setConstant(-10.0);
    spec.source.pp = Eigen::MatrixXd::Zero(n, 16);
    spec.source.pm = spec.source.pp;
    spec.source.mp = spec.source.pp;
    spec.source.mm = spec.source.pp;
    spec.boundary << 0.0, 1.2, 0.5, 0.0;  // norm 1.2 but rho2 = sqrt(0.6) < 1
    const GalerkinSystem sys = build_system(spec, basis);

    const StabilityCertificate plain = build_certificate(sys, 0.25, 1.0, 1.0, false);
    CHECK_FALSE(plain.valid);
    const StabilityCertificate tuned = build_certificate(sys, 0.25, 1.0, 1.0, true);
    CHECK(tuned.scaling_optimized);
    CHECK(tuned.margin > plain.margin);
    CHECK(tuned.valid);
}

TEST_CASE("decay matrix field matches the weight identity")
{
    const GpcBasis basis(PolyFamily::Hermite, build_index_set(1, 2, IndexSetKind::Sparse));
    const GalerkinSystem sys = make_system(basis, 128, 100.0, 1.4, 0.9);
    const int n = basis.size();
    const double mu_hat = 0.25;
    const LyapunovWeights w =
        continuous_weights(sys, mu_hat, Eigen::VectorXd::Ones(n), Eigen::VectorXd::Ones(n));
    const double dx = sys.cell_centers[1] - sys.cell_centers[0];
    const auto field = decay_matrix_field(sys, w, dx);

    // M(x) = mu_hat W + (W Q + Q^T W) up to the discretization error of the
    // derivative term
    for (int i = 1; i + 1 < sys.cells(); i += 13) {
        const Eigen::VectorXd wi = w.cells.col(i);
        const Eigen::MatrixXd wq = wi.asDiagonal() * sys.q[static_cast<std::size_t>(i)];
        const Eigen::MatrixXd expect =
            mu_hat * Eigen::MatrixXd(wi.asDiagonal()) + wq + wq.transpose();
        CHECK((field[static_cast<std::size_t>(i)] - expect).cwiseAbs().maxCoeff() < 1e-5);
    }
}
