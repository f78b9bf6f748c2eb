#include "dtnlab/spectral.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace dtnlab {

SpectralDecomposition eigensolve(const Eigen::MatrixXd& S, const Eigen::VectorXd& M) {
    const int n = static_cast<int>(S.rows());
    if (M.size() != n) throw NumericError("mass dimension mismatch");
    for (int i = 0; i < n; ++i)
        if (!(M[i] > 0.0)) throw NumericError("mass must be strictly positive");

    // Fold the diagonal mass in: B = M^{-1/2} S M^{-1/2}.
    const Eigen::VectorXd d = M.cwiseSqrt();
    const Eigen::VectorXd dinv = d.cwiseInverse();
    Eigen::MatrixXd B = dinv.asDiagonal() * S * dinv.asDiagonal();
    B = 0.5 * (B + B.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    if (es.info() != Eigen::Success)
        throw NumericError("symmetric eigensolver did not converge (condition of S: max entry " +
                           std::to_string(S.cwiseAbs().maxCoeff()) + ")");

    SpectralDecomposition dec;
    dec.eigenvalues = es.eigenvalues();
    dec.vectors = dinv.asDiagonal() * es.eigenvectors();
    dec.weights = M;
    return dec;
}

SpectralDecomposition eigensolve(const Eigen::SparseMatrix<double>& S, const Eigen::VectorXd& M) {
    return eigensolve(Eigen::MatrixXd(S), M);
}

Eigen::VectorXd semigroup_apply(const SpectralDecomposition& dec, double t,
                                const Eigen::VectorXd& phi) {
    if (t < 0.0) throw NumericError("semigroup time must be nonnegative");
    const Eigen::VectorXd coeff = dec.vectors.transpose() * (dec.weights.asDiagonal() * phi);
    return dec.vectors * (Eigen::exp(-t * dec.eigenvalues.array()) * coeff.array()).matrix();
}

SemigroupKernel kernel_matrix(const SpectralDecomposition& dec, double t) {
    if (!(t > 0.0)) throw NumericError("kernel time must be strictly positive");
    SemigroupKernel k;
    k.t = t;
    k.weights = dec.weights;
    const Eigen::VectorXd e = Eigen::exp(-t * dec.eigenvalues.array());
    k.K = dec.vectors * e.asDiagonal() * dec.vectors.transpose();
    return k;
}

Eigen::VectorXd resolvent_apply(const SpectralDecomposition& dec, double lambda,
                                const Eigen::VectorXd& psi) {
    const double scale = std::max(1.0, dec.eigenvalues.cwiseAbs().maxCoeff());
    for (int i = 0; i < dec.size(); ++i)
        if (std::abs(lambda + dec.eigenvalues[i]) < 1e-12 * scale)
            throw NumericError("resolvent pole at lambda = " + std::to_string(lambda) +
                               " (eigenvalue " + std::to_string(dec.eigenvalues[i]) + ")");
    const Eigen::VectorXd coeff = dec.vectors.transpose() * (dec.weights.asDiagonal() * psi);
    return dec.vectors *
           (coeff.array() / (lambda + dec.eigenvalues.array())).matrix();
}

double semigroup_p_norm(const SpectralDecomposition& dec, double t, double p) {
    if (p == 2.0) return std::exp(-t * dec.eigenvalues[0]);
    const SemigroupKernel k = kernel_matrix(dec, t);
    // For an integral operator with symmetric kernel the 1->1 and
    // inf->inf norms are both sup over x of int |k(x,y)| dmu(y).
    if (p == 1.0 || std::isinf(p)) {
        double best = 0.0;
        for (int x = 0; x < k.K.rows(); ++x) {
            double row = 0.0;
            if (p == 1.0)
                row = (k.K.col(x).cwiseAbs().array() * k.weights.array()).sum();
            else
                row = (k.K.row(x).transpose().cwiseAbs().array() * k.weights.array()).sum();
            best = std::max(best, row);
        }
        return best;
    }
    throw NumericError("semigroup_p_norm supports p in {1, 2, inf}");
}

}  // namespace dtnlab
