#pragma once

#include <memory>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "dtnlab/assembly.hpp"

namespace dtnlab {

// Discrete Dirichlet-to-Neumann operator: the boundary Schur complement
// S = A_BB - A_BI A_II^{-1} A_IB paired with the lumped boundary mass.
// Applying the operator to boundary data phi means solving
// S phi = M_gamma psi for the conormal derivative psi.
class DtnOperator {
public:
    const Eigen::MatrixXd& S() const { return S_; }
    const Eigen::VectorXd& M_gamma() const { return M_gamma_; }
    const std::vector<int>& boundary() const { return boundary_; }
    const std::shared_ptr<const Mesh>& mesh() const { return mesh_; }

    // Harmonic lifting: full nodal vector u with u|_B = phi and
    // A_II u_I + A_IB phi = 0.
    Eigen::VectorXd lift(const Eigen::VectorXd& phi) const;

    // Variational conormal derivative M_gamma^{-1} S phi.
    Eigen::VectorXd apply(const Eigen::VectorXd& phi) const;

private:
    friend DtnOperator build_dtn(const OperatorBundle& bundle, double gate_tol);
    Eigen::MatrixXd S_;
    Eigen::VectorXd M_gamma_;
    std::vector<int> boundary_, interior_;
    std::shared_ptr<const Mesh> mesh_;
    std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;  // factor of A_II
    Eigen::SparseMatrix<double> A_IB_;
    int n_ = 0;
};

// Throws SpectralGateViolation unless the Dirichlet spectrum keeps
// distance gate_tol from zero. gate_tol <= 0 selects the default
// 1e-8 * ||A||_max.
DtnOperator build_dtn(const OperatorBundle& bundle, double gate_tol = 0.0);

struct ConormalRoutes {
    Eigen::VectorXd psi_schur;  // M_gamma^{-1} S phi
    Eigen::VectorXd psi_flux;   // nodal average of nu . (a grad u) over incident edges
    double discrepancy = 0.0;   // M_gamma-weighted L2 distance
};

// Two independent routes to the conormal derivative of the lifted
// solution: the variational (Schur) one and the pointwise edge flux
// averaged onto nodes with incident-edge length weights.
ConormalRoutes conormal_two_routes(const DtnOperator& dtn, const OperatorBundle& bundle,
                                   const Eigen::VectorXd& phi);

// Robin realization: R = A + B_beta over all nodes, paired with the
// lumped domain mass. No spectral gate is required.
struct RobinOperator {
    Eigen::SparseMatrix<double> R;
    Eigen::VectorXd M_omega;
    std::shared_ptr<const Mesh> mesh;
};

RobinOperator build_robin(const OperatorBundle& bundle);

// Solve A u = (0 on I, M_gamma tau on B); then Tr u lies in the domain
// of the DtN operator with D_V Tr u = tau. Throws NearSingularNeumann
// when the full pair (A, M_omega) has an eigenvalue within gate_tol of
// zero (e.g. V = 0, where constants span the kernel).
Eigen::VectorXd neumann_solve(const OperatorBundle& bundle, const Eigen::VectorXd& tau,
                              double gate_tol = 0.0);

}  // namespace dtnlab
