#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dtnlab/errors.hpp"

namespace dtnlab {

// Eigenpairs of a symmetric generalized pair (S, diag(M)): ascending
// real eigenvalues and M-orthonormal eigenvectors (columns).
struct SpectralDecomposition {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd vectors;
    Eigen::VectorXd weights;  // the diagonal mass M

    int size() const { return static_cast<int>(eigenvalues.size()); }
};

SpectralDecomposition eigensolve(const Eigen::MatrixXd& S, const Eigen::VectorXd& M);
SpectralDecomposition eigensolve(const Eigen::SparseMatrix<double>& S, const Eigen::VectorXd& M);

struct SemigroupKernel {
    double t = 0.0;
    Eigen::MatrixXd K;         // kernel values k_t(x,y)
    Eigen::VectorXd weights;   // lumped measure m; (S_t phi)_x = sum_y K(x,y) m_y phi_y
};

// Semigroup action e^{-tD} phi by spectral calculus; t >= 0.
Eigen::VectorXd semigroup_apply(const SpectralDecomposition& dec, double t,
                                const Eigen::VectorXd& phi);

// Kernel matrix K_t = Phi e^{-t Lambda} Phi^T; t > 0.
SemigroupKernel kernel_matrix(const SpectralDecomposition& dec, double t);

// (lambda I + D)^{-1} psi; throws NumericError at a resolvent pole.
Eigen::VectorXd resolvent_apply(const SpectralDecomposition& dec, double lambda,
                                const Eigen::VectorXd& psi);

// Weighted operator p -> p norm of the semigroup at time t, for the
// measure given by dec.weights. p must be 1, 2 or +infinity.
double semigroup_p_norm(const SpectralDecomposition& dec, double t, double p);

}  // namespace dtnlab
