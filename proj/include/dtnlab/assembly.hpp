#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dtnlab/mesh.hpp"

namespace dtnlab {

// Piecewise-constant coefficients: a symmetric 2x2 matrix per triangle
// (stored a11, a12, a22), a potential per triangle, a Robin coefficient
// per boundary edge. V and beta carry no sign restriction; a must be
// uniformly elliptic.
struct CoefficientField {
    std::vector<std::array<double, 3>> a;
    std::vector<double> V;
    std::vector<double> beta;
    double mu = 0.0;  // min over triangles of the smallest eigenvalue of a

    static CoefficientField constant(const Mesh& mesh, std::array<double, 3> a_const,
                                     double V_const, double beta_const);
    // {"a": {"preset":"identity"} | {"preset":"anisotropic","a11":..,"a12":..,"a22":..}
    //       | [[a11,a12,a22], ...],
    //  "V": number | [...], "beta": number | [...]}
    static CoefficientField from_json_text(const Mesh& mesh, const std::string& text);

    void validate(const Mesh& mesh);  // computes mu, rejects non-elliptic a
};

// Assembled P1 matrices for the forms over all nodal functions, with
// lumped (diagonal) masses. Boundary-indexed vectors follow the order
// of mesh->boundary_nodes().
struct OperatorBundle {
    std::shared_ptr<const Mesh> mesh;
    CoefficientField coeffs;

    Eigen::SparseMatrix<double> A;  // stiffness(a) + lumped potential
    Eigen::SparseMatrix<double> K;  // stiffness(a) alone
    Eigen::VectorXd M_omega;        // lumped domain mass, size n
    Eigen::VectorXd M_gamma;        // lumped boundary mass, boundary order
    Eigen::VectorXd B_beta;         // diagonal of the Robin boundary form, boundary order

    std::vector<int> interior;  // ascending node ids
    std::vector<int> boundary;  // ascending node ids (== mesh->boundary_nodes())

    int size() const { return static_cast<int>(M_omega.size()); }
    double a_max_norm() const;
};

OperatorBundle assemble(std::shared_ptr<const Mesh> mesh, CoefficientField coeffs);

// A restricted to interior x interior (the discrete Dirichlet
// realization of the form with potential).
Eigen::SparseMatrix<double> dirichlet_block(const OperatorBundle& bundle);

// All eigenvalues of the pair (A_II, M_omega,II), ascending. Dense;
// intended for desk-scale meshes.
Eigen::VectorXd dirichlet_eigenvalues(const OperatorBundle& bundle);

struct SpectralGateResult {
    bool pass = false;
    double min_abs_eigenvalue = 0.0;
    double tol = 0.0;
};

// Distance of the Dirichlet spectrum from zero, by inverse iteration on
// the pair (A_II, M_omega,II). pass iff the distance is >= tol.
SpectralGateResult spectral_gate(const OperatorBundle& bundle, double tol);

double default_gate_tol(const OperatorBundle& bundle);

// Smallest-magnitude eigenvalue of the pair (A, diag(M)), by inverse
// iteration; returns 0 when A is numerically singular.
double min_abs_generalized_eig(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& M);

}  // namespace dtnlab
