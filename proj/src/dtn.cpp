#include "dtnlab/dtn.hpp"

#include <cmath>

namespace dtnlab {

namespace {

Eigen::SparseMatrix<double> submatrix(const Eigen::SparseMatrix<double>& A,
                                      const std::vector<int>& rows,
                                      const std::vector<int>& cols) {
    std::vector<int> rmap(A.rows(), -1), cmap(A.cols(), -1);
    for (std::size_t i = 0; i < rows.size(); ++i) rmap[rows[i]] = static_cast<int>(i);
    for (std::size_t j = 0; j < cols.size(); ++j) cmap[cols[j]] = static_cast<int>(j);
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
            if (rmap[it.row()] >= 0 && cmap[it.col()] >= 0)
                trip.emplace_back(rmap[it.row()], cmap[it.col()], it.value());
    Eigen::SparseMatrix<double> out(rows.size(), cols.size());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

}  // namespace

DtnOperator build_dtn(const OperatorBundle& bundle, double gate_tol) {
    if (gate_tol <= 0.0) gate_tol = default_gate_tol(bundle);
    const auto& I = bundle.interior;
    const auto& B = bundle.boundary;
    const int nb = static_cast<int>(B.size());

    DtnOperator op;
    op.mesh_ = bundle.mesh;
    op.boundary_ = B;
    op.interior_ = I;
    op.M_gamma_ = bundle.M_gamma;
    op.n_ = bundle.size();

    if (I.empty()) {
        op.S_ = Eigen::MatrixXd(submatrix(bundle.A, B, B));
        return op;
    }

    const SpectralGateResult gate = spectral_gate(bundle, gate_tol);
    if (!gate.pass)
        throw SpectralGateViolation(
            "Dirichlet spectrum too close to zero: distance " +
                std::to_string(gate.min_abs_eigenvalue) + " < gate tolerance " +
                std::to_string(gate_tol),
            gate.min_abs_eigenvalue);

    Eigen::SparseMatrix<double> A_II = submatrix(bundle.A, I, I);
    op.A_IB_ = submatrix(bundle.A, I, B);
    Eigen::SparseMatrix<double> A_BI = submatrix(bundle.A, B, I);
    Eigen::MatrixXd A_BB = Eigen::MatrixXd(submatrix(bundle.A, B, B));

    op.lu_ = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    op.lu_->analyzePattern(A_II);
    op.lu_->factorize(A_II);
    if (op.lu_->info() != Eigen::Success)
        throw SpectralGateViolation("interior factorization failed (singular A_II)", 0.0);

    Eigen::MatrixXd X = op.lu_->solve(Eigen::MatrixXd(op.A_IB_));
    op.S_ = A_BB - Eigen::MatrixXd(A_BI) * X;
    return op;
}

Eigen::VectorXd DtnOperator::lift(const Eigen::VectorXd& phi) const {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n_);
    for (std::size_t i = 0; i < boundary_.size(); ++i) u[boundary_[i]] = phi[i];
    if (!interior_.empty()) {
        Eigen::VectorXd ui = lu_->solve((-(A_IB_ * phi)).eval());
        for (std::size_t i = 0; i < interior_.size(); ++i) u[interior_[i]] = ui[i];
    }
    return u;
}

Eigen::VectorXd DtnOperator::apply(const Eigen::VectorXd& phi) const {
    return (S_ * phi).cwiseQuotient(M_gamma_);
}

ConormalRoutes conormal_two_routes(const DtnOperator& dtn, const OperatorBundle& bundle,
                                   const Eigen::VectorXd& phi) {
    const Mesh& mesh = *bundle.mesh;
    ConormalRoutes out;
    out.psi_schur = dtn.apply(phi);

    const Eigen::VectorXd u = dtn.lift(phi);
    const int n = mesh.vertex_count();
    std::vector<double> flux_sum(n, 0.0);

    for (int e = 0; e < static_cast<int>(mesh.boundary_edges().size()); ++e) {
        const auto& be = mesh.boundary_edges()[e];
        const int t = mesh.boundary_edge_triangle(e);
        const auto& tri = mesh.triangles()[t];
        const Vec2& p0 = mesh.vertices()[tri[0]];
        const Vec2& p1 = mesh.vertices()[tri[1]];
        const Vec2& p2 = mesh.vertices()[tri[2]];
        const double area = mesh.triangle_area(t);
        const double gx[3] = {(p1.y - p2.y) / (2 * area), (p2.y - p0.y) / (2 * area),
                              (p0.y - p1.y) / (2 * area)};
        const double gy[3] = {(p2.x - p1.x) / (2 * area), (p0.x - p2.x) / (2 * area),
                              (p1.x - p0.x) / (2 * area)};
        double ux = 0.0, uy = 0.0;
        for (int k = 0; k < 3; ++k) {
            ux += u[tri[k]] * gx[k];
            uy += u[tri[k]] * gy[k];
        }
        const auto& am = bundle.coeffs.a[t];
        const double qx = am[0] * ux + am[1] * uy;
        const double qy = am[1] * ux + am[2] * uy;
        const Vec2 nu = mesh.boundary_edge_normal(e);
        const double flux = nu.x * qx + nu.y * qy;
        const double half = 0.5 * mesh.edge_length(be.a, be.b);
        flux_sum[be.a] += half * flux;
        flux_sum[be.b] += half * flux;
    }

    const auto& bnodes = dtn.boundary();
    out.psi_flux.resize(bnodes.size());
    for (std::size_t i = 0; i < bnodes.size(); ++i)
        out.psi_flux[i] = flux_sum[bnodes[i]] / dtn.M_gamma()[i];

    const Eigen::VectorXd diff = out.psi_schur - out.psi_flux;
    out.discrepancy = std::sqrt(diff.dot(dtn.M_gamma().asDiagonal() * diff));
    return out;
}

RobinOperator build_robin(const OperatorBundle& bundle) {
    RobinOperator r;
    r.mesh = bundle.mesh;
    r.M_omega = bundle.M_omega;
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < bundle.A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(bundle.A, k); it; ++it)
            trip.emplace_back(it.row(), it.col(), it.value());
    for (std::size_t i = 0; i < bundle.boundary.size(); ++i)
        trip.emplace_back(bundle.boundary[i], bundle.boundary[i], bundle.B_beta[i]);
    r.R.resize(bundle.size(), bundle.size());
    r.R.setFromTriplets(trip.begin(), trip.end());
    return r;
}

Eigen::VectorXd neumann_solve(const OperatorBundle& bundle, const Eigen::VectorXd& tau,
                              double gate_tol) {
    if (gate_tol <= 0.0) gate_tol = default_gate_tol(bundle);
    const double dist = min_abs_generalized_eig(bundle.A, bundle.M_omega);
    if (dist < gate_tol)
        throw NearSingularNeumann("Neumann matrix is near singular: spectral distance " +
                                      std::to_string(dist) + " < tolerance " +
                                      std::to_string(gate_tol),
                                  dist);

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(bundle.size());
    for (std::size_t i = 0; i < bundle.boundary.size(); ++i)
        rhs[bundle.boundary[i]] = bundle.M_gamma[i] * tau[i];

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(bundle.A);
    lu.factorize(bundle.A);
    if (lu.info() != Eigen::Success)
        throw NearSingularNeumann("Neumann factorization failed", 0.0);
    return lu.solve(rhs);
}

}  // namespace dtnlab
