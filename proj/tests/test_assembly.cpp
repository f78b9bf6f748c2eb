#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "dtnlab/assembly.hpp"

using namespace dtnlab;

namespace {

std::shared_ptr<const Mesh> shared_preset(const std::string& name, int res, int refine = 0) {
    Mesh m = Mesh::preset(name, res);
    for (int i = 0; i < refine; ++i) m = m.refined();
    return std::make_shared<const Mesh>(std::move(m));
}

OperatorBundle identity_bundle(const std::string& name, int res, int refine = 0,
                               double V = 0.0, double beta = 0.0) {
    auto mesh = shared_preset(name, res, refine);
    return assemble(mesh, CoefficientField::constant(*mesh, {1.0, 0.0, 1.0}, V, beta));
}

}  // namespace

TEST_CASE("local stiffness of the reference right triangle") {
    // Hand integration with a = I on (0,0),(1,0),(0,1):
    // (1/2) [[2,-1,-1],[-1,1,0],[-1,0,1]].
    auto mesh = std::make_shared<const Mesh>(Mesh::from_parts(
        {{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {{0, 1, 0}, {1, 2, 0}, {2, 0, 0}}));
    const OperatorBundle b =
        assemble(mesh, CoefficientField::constant(*mesh, {1.0, 0.0, 1.0}, 0.0, 0.0));
    const Eigen::MatrixXd K = Eigen::MatrixXd(b.K);
    Eigen::MatrixXd expected(3, 3);
    expected << 2, -1, -1, -1, 1, 0, -1, 0, 1;
    expected *= 0.5;
    CHECK((K - expected).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("stiffness is homogeneous in a") {
    auto mesh = shared_preset("square", 2);
    const auto b1 = assemble(mesh, CoefficientField::constant(*mesh, {1, 0, 1}, 0, 0));
    const auto b2 = assemble(mesh, CoefficientField::constant(*mesh, {2, 0, 2}, 0, 0));
    const Eigen::MatrixXd d = Eigen::MatrixXd(b2.K) - 2.0 * Eigen::MatrixXd(b1.K);
    CHECK(d.cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("zero potential and beta give A = K, B_beta = 0") {
    const OperatorBundle b = identity_bundle("lshape", 2);
    CHECK((Eigen::MatrixXd(b.A) - Eigen::MatrixXd(b.K)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(b.B_beta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bundle invariants: symmetry, zero row sums, positive masses") {
    const OperatorBundle b = identity_bundle("annulus", 2, 1, 0.7, -0.3);
    const Eigen::MatrixXd A = Eigen::MatrixXd(b.A);
    const double scale = A.cwiseAbs().maxCoeff();
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * scale);
    const Eigen::VectorXd rowsum = b.K * Eigen::VectorXd::Ones(b.size());
    CHECK(rowsum.cwiseAbs().maxCoeff() <= 1e-13 * scale);
    CHECK(b.M_omega.minCoeff() > 0.0);
    CHECK(b.M_gamma.minCoeff() > 0.0);
}

TEST_CASE("ellipticity violation is rejected with the triangle index") {
    auto mesh = shared_preset("square", 1);
    CoefficientField c = CoefficientField::constant(*mesh, {1, 0, 1}, 0, 0);
    c.a[1] = {1.0, 2.0, 1.0};  // eigenvalues -1, 3
    CHECK_THROWS_WITH_AS(assemble(mesh, c), doctest::Contains("triangle 1"), CoefficientError);
}

TEST_CASE("assembly is additive in the potential and beta contributions") {
    auto mesh = shared_preset("square", 2);
    const auto b0 = assemble(mesh, CoefficientField::constant(*mesh, {1, 0, 1}, 0, 0));
    const auto bV = assemble(mesh, CoefficientField::constant(*mesh, {1, 0, 1}, 2.5, 1.5));
    // V enters only the diagonal through the lumped mass.
    Eigen::MatrixXd diff = Eigen::MatrixXd(bV.A) - Eigen::MatrixXd(b0.A);
    const Eigen::MatrixXd expected = (2.5 * b0.M_omega).asDiagonal();
    CHECK((diff - expected).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK((bV.B_beta - 1.5 * b0.M_gamma).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("ellipticity inheritance against the identity stiffness") {
    auto mesh = shared_preset("disk", 2, 1);
    CoefficientField c = CoefficientField::constant(*mesh, {3.0, 1.0, 2.0}, 0, 0);
    const double mu = c.mu;
    CHECK(mu > 0.0);
    const auto b = assemble(mesh, c);
    const auto bref = assemble(mesh, CoefficientField::constant(*mesh, {1, 0, 1}, 0, 0));
    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist;
    for (int probe = 0; probe < 20; ++probe) {
        Eigen::VectorXd u(b.size());
        for (int i = 0; i < b.size(); ++i) u[i] = dist(rng);
        const double lhs = u.dot(b.K * u);
        const double rhs = mu * u.dot(bref.K * u);
        CHECK(lhs >= rhs - 1e-10 * std::abs(lhs));
    }
}

TEST_CASE("dirichlet block of the minimal square is empty") {
    const OperatorBundle b = identity_bundle("square", 1);
    CHECK(b.interior.empty());
    CHECK(dirichlet_block(b).rows() == 0);
}

TEST_CASE("first Dirichlet eigenvalue of the unit square approaches 2 pi^2") {
    const double exact = 2.0 * M_PI * M_PI;
    const OperatorBundle b = identity_bundle("square", 4, 2);
    const Eigen::VectorXd ev = dirichlet_eigenvalues(b);
    CHECK(std::abs(ev[0] - exact) / exact < 0.05);
}

TEST_CASE("constant potential shift moves the whole Dirichlet spectrum") {
    const OperatorBundle b0 = identity_bundle("square", 3, 1);
    const OperatorBundle bc = identity_bundle("square", 3, 1, 4.25);
    const Eigen::VectorXd e0 = dirichlet_eigenvalues(b0);
    const Eigen::VectorXd ec = dirichlet_eigenvalues(bc);
    CHECK((ec - e0.array().matrix() - 4.25 * Eigen::VectorXd::Ones(e0.size()))
              .cwiseAbs()
              .maxCoeff() <= 1e-9 * std::max(1.0, e0.cwiseAbs().maxCoeff()));
}

TEST_CASE("spectral gate") {
    const OperatorBundle b0 = identity_bundle("square", 3, 1);
    const double lam1 = dirichlet_eigenvalues(b0)[0];

    SUBCASE("V = 0 passes") {
        const SpectralGateResult g = spectral_gate(b0, default_gate_tol(b0));
        CHECK(g.pass);
        CHECK(g.min_abs_eigenvalue == doctest::Approx(lam1).epsilon(1e-6));
    }
    SUBCASE("V = -lambda_1 is a constructed violation") {
        const OperatorBundle b = identity_bundle("square", 3, 1, -lam1);
        const SpectralGateResult g = spectral_gate(b, 1e-6);
        CHECK_FALSE(g.pass);
        CHECK(g.min_abs_eigenvalue <= 1e-6);
    }
    SUBCASE("V = -lambda_1/2 stays positive definite") {
        const OperatorBundle b = identity_bundle("square", 3, 1, -0.5 * lam1);
        const SpectralGateResult g = spectral_gate(b, default_gate_tol(b));
        CHECK(g.pass);
        CHECK(dirichlet_eigenvalues(b)[0] > 0.0);
    }
}

TEST_CASE("coefficient JSON parsing") {
    auto mesh = shared_preset("square", 1);
    SUBCASE("presets and constants") {
        const auto c = CoefficientField::from_json_text(
            *mesh, R"({"a": {"preset": "identity"}, "V": 1.5, "beta": -2})");
        CHECK(c.a[0][0] == 1.0);
        CHECK(c.V[0] == 1.5);
        CHECK(c.beta[0] == -2.0);
        CHECK(c.mu == doctest::Approx(1.0));
    }
    SUBCASE("anisotropic preset") {
        const auto c = CoefficientField::from_json_text(
            *mesh, R"({"a": {"preset": "anisotropic", "a11": 4, "a12": 0, "a22": 1}})");
        CHECK(c.a[0][0] == 4.0);
        CHECK(c.mu == doctest::Approx(1.0));
    }
    SUBCASE("per-triangle arrays must cover the mesh") {
        CHECK_THROWS_AS(CoefficientField::from_json_text(*mesh, R"({"V": [1.0]})"),
                        CoefficientError);
    }
    SUBCASE("malformed JSON") {
        CHECK_THROWS_AS(CoefficientField::from_json_text(*mesh, "not json"), CoefficientError);
    }
}
