#include "dtnlab/assembly.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <json.hpp>

namespace dtnlab {

namespace {

double min_eig_sym2(const std::array<double, 3>& a) {
    const double tr = a[0] + a[2];
    const double det = a[0] * a[2] - a[1] * a[1];
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    return tr / 2.0 - disc;
}

}  // namespace

CoefficientField CoefficientField::constant(const Mesh& mesh, std::array<double, 3> a_const,
                                            double V_const, double beta_const) {
    CoefficientField c;
    c.a.assign(mesh.triangle_count(), a_const);
    c.V.assign(mesh.triangle_count(), V_const);
    c.beta.assign(mesh.boundary_edges().size(), beta_const);
    c.validate(mesh);
    return c;
}

CoefficientField CoefficientField::from_json_text(const Mesh& mesh, const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw CoefficientError(std::string("coefficient JSON parse failure: ") + e.what());
    }
    CoefficientField c;
    const int nt = mesh.triangle_count();
    const int ne = static_cast<int>(mesh.boundary_edges().size());
    try {
        if (!j.contains("a") || (j["a"].is_object() && j["a"].value("preset", "") == "identity")) {
            c.a.assign(nt, {1.0, 0.0, 1.0});
        } else if (j["a"].is_object()) {
            const auto& ja = j["a"];
            if (ja.value("preset", "") != "anisotropic")
                throw CoefficientError("unknown coefficient preset '" +
                                       ja.value("preset", std::string{}) + "'");
            c.a.assign(nt, {ja.value("a11", 1.0), ja.value("a12", 0.0), ja.value("a22", 1.0)});
        } else {
            if (static_cast<int>(j["a"].size()) != nt)
                throw CoefficientError("per-triangle 'a' has " + std::to_string(j["a"].size()) +
                                       " entries, mesh has " + std::to_string(nt) + " triangles");
            for (const auto& row : j["a"])
                c.a.push_back({row.at(0).get<double>(), row.at(1).get<double>(),
                               row.at(2).get<double>()});
        }
        if (!j.contains("V")) {
            c.V.assign(nt, 0.0);
        } else if (j["V"].is_number()) {
            c.V.assign(nt, j["V"].get<double>());
        } else {
            if (static_cast<int>(j["V"].size()) != nt)
                throw CoefficientError("per-triangle 'V' has " + std::to_string(j["V"].size()) +
                                       " entries, mesh has " + std::to_string(nt) + " triangles");
            c.V = j["V"].get<std::vector<double>>();
        }
        if (!j.contains("beta")) {
            c.beta.assign(ne, 0.0);
        } else if (j["beta"].is_number()) {
            c.beta.assign(ne, j["beta"].get<double>());
        } else {
            if (static_cast<int>(j["beta"].size()) != ne)
                throw CoefficientError("per-edge 'beta' has " + std::to_string(j["beta"].size()) +
                                       " entries, mesh has " + std::to_string(ne) +
                                       " boundary edges");
            c.beta = j["beta"].get<std::vector<double>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw CoefficientError(std::string("coefficient JSON schema violation: ") + e.what());
    }
    c.validate(mesh);
    return c;
}

void CoefficientField::validate(const Mesh& mesh) {
    if (static_cast<int>(a.size()) != mesh.triangle_count() ||
        static_cast<int>(V.size()) != mesh.triangle_count() ||
        beta.size() != mesh.boundary_edges().size())
        throw CoefficientError("coefficient field does not cover the mesh");
    mu = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < a.size(); ++t) {
        for (double x : a[t])
            if (!std::isfinite(x))
                throw CoefficientError("non-finite 'a' on triangle " + std::to_string(t));
        const double lam = min_eig_sym2(a[t]);
        if (lam <= 0.0)
            throw CoefficientError("ellipticity violation on triangle " + std::to_string(t) +
                                   ": smallest eigenvalue of a is " + std::to_string(lam));
        mu = std::min(mu, lam);
    }
    for (std::size_t t = 0; t < V.size(); ++t)
        if (!std::isfinite(V[t]))
            throw CoefficientError("non-finite 'V' on triangle " + std::to_string(t));
    for (std::size_t e = 0; e < beta.size(); ++e)
        if (!std::isfinite(beta[e]))
            throw CoefficientError("non-finite 'beta' on boundary edge " + std::to_string(e));
}

OperatorBundle assemble(std::shared_ptr<const Mesh> mesh, CoefficientField coeffs) {
    coeffs.validate(*mesh);
    const int n = mesh->vertex_count();

    OperatorBundle b;
    b.mesh = mesh;
    b.coeffs = std::move(coeffs);
    b.M_omega = Eigen::VectorXd::Zero(n);

    std::vector<Eigen::Triplet<double>> trip_k, trip_a;
    trip_k.reserve(9 * mesh->triangle_count());
    trip_a.reserve(9 * mesh->triangle_count() + n);

    for (int t = 0; t < mesh->triangle_count(); ++t) {
        const auto& tri = mesh->triangles()[t];
        const Vec2& p0 = mesh->vertices()[tri[0]];
        const Vec2& p1 = mesh->vertices()[tri[1]];
        const Vec2& p2 = mesh->vertices()[tri[2]];
        const double area = mesh->triangle_area(t);

        // Constant P1 gradients: grad phi_i = rot(opposite edge) / (2 area).
        const double gx[3] = {(p1.y - p2.y) / (2 * area), (p2.y - p0.y) / (2 * area),
                              (p0.y - p1.y) / (2 * area)};
        const double gy[3] = {(p2.x - p1.x) / (2 * area), (p0.x - p2.x) / (2 * area),
                              (p1.x - p0.x) / (2 * area)};

        const auto& am = b.coeffs.a[t];
        double local[3][3];
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) {
                const double v = area * (gx[i] * (am[0] * gx[j] + am[1] * gy[j]) +
                                         gy[i] * (am[1] * gx[j] + am[2] * gy[j]));
                local[i][j] = v;
                local[j][i] = v;
            }
        // Diagonal from the zero-row-sum identity, so K*1 vanishes exactly.
        for (int i = 0; i < 3; ++i) local[i][i] = -(local[i][(i + 1) % 3] + local[i][(i + 2) % 3]);

        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trip_k.emplace_back(tri[i], tri[j], local[i][j]);

        const double lump = area / 3.0;
        for (int i = 0; i < 3; ++i) b.M_omega[tri[i]] += lump;
    }

    b.K.resize(n, n);
    b.K.setFromTriplets(trip_k.begin(), trip_k.end());

    // A = K + lumped potential.
    trip_a = trip_k;
    for (int t = 0; t < mesh->triangle_count(); ++t) {
        const auto& tri = mesh->triangles()[t];
        const double vlump = b.coeffs.V[t] * mesh->triangle_area(t) / 3.0;
        for (int i = 0; i < 3; ++i) trip_a.emplace_back(tri[i], tri[i], vlump);
    }
    b.A.resize(n, n);
    b.A.setFromTriplets(trip_a.begin(), trip_a.end());

    const BoundaryMeasure bm = mesh->boundary_measure();
    b.M_gamma = Eigen::Map<const Eigen::VectorXd>(bm.weights.data(), bm.weights.size());
    b.boundary = bm.nodes;
    for (int v = 0; v < n; ++v)
        if (!mesh->is_boundary_node(v)) b.interior.push_back(v);

    // B_beta diagonal: sum over incident edges of beta_e * |e|/2. This
    // equals beta-bar_z * m_z with the length-weighted nodal average.
    std::vector<double> bb(n, 0.0);
    for (std::size_t e = 0; e < mesh->boundary_edges().size(); ++e) {
        const auto& be = mesh->boundary_edges()[e];
        const double half = 0.5 * mesh->edge_length(be.a, be.b) * b.coeffs.beta[e];
        bb[be.a] += half;
        bb[be.b] += half;
    }
    b.B_beta.resize(b.boundary.size());
    for (std::size_t i = 0; i < b.boundary.size(); ++i) b.B_beta[i] = bb[b.boundary[i]];

    return b;
}

double OperatorBundle::a_max_norm() const {
    double m = 0.0;
    for (int k = 0; k < A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
            m = std::max(m, std::abs(it.value()));
    return m;
}

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

Eigen::SparseMatrix<double> dirichlet_block(const OperatorBundle& bundle) {
    return submatrix(bundle.A, bundle.interior, bundle.interior);
}

Eigen::VectorXd dirichlet_eigenvalues(const OperatorBundle& bundle) {
    const int ni = static_cast<int>(bundle.interior.size());
    if (ni == 0) return Eigen::VectorXd();
    Eigen::MatrixXd Aii = Eigen::MatrixXd(dirichlet_block(bundle));
    Eigen::VectorXd d(ni);
    for (int i = 0; i < ni; ++i) d[i] = 1.0 / std::sqrt(bundle.M_omega[bundle.interior[i]]);
    Eigen::MatrixXd B = d.asDiagonal() * Aii * d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("dense Dirichlet eigensolve failed");
    return es.eigenvalues();
}

// Smallest-magnitude eigenvalue of (A_sub, M_sub) by inverse iteration.
// Shared by the spectral gate and the Neumann near-singularity check.
double min_abs_generalized_eig(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& M) {
    const int n = static_cast<int>(A.rows());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success) return 0.0;  // numerically singular

    Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
    for (int i = 0; i < n; ++i) x[i] += 1e-3 * std::sin(1.0 + 0.7 * i);
    x /= std::sqrt(x.dot(M.asDiagonal() * x));
    double lam = 0.0;
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXd y = lu.solve(M.asDiagonal() * x);
        const double ny = std::sqrt(y.dot(M.asDiagonal() * y));
        if (!(ny > 0.0) || !std::isfinite(ny)) return 0.0;
        y /= ny;
        const double lam_new = y.dot(A * y) / y.dot(M.asDiagonal() * y);
        if (it > 3 && std::abs(lam_new - lam) <= 1e-12 * std::max(1.0, std::abs(lam_new))) {
            lam = lam_new;
            break;
        }
        lam = lam_new;
        x = y;
    }
    return std::abs(lam);
}

SpectralGateResult spectral_gate(const OperatorBundle& bundle, double tol) {
    if (bundle.interior.empty())
        throw NumericError("spectral gate requires a nonempty interior");
    Eigen::VectorXd Mi(bundle.interior.size());
    for (std::size_t i = 0; i < bundle.interior.size(); ++i)
        Mi[i] = bundle.M_omega[bundle.interior[i]];
    SpectralGateResult r;
    r.tol = tol;
    r.min_abs_eigenvalue = min_abs_generalized_eig(dirichlet_block(bundle), Mi);
    r.pass = r.min_abs_eigenvalue >= tol;
    return r;
}

double default_gate_tol(const OperatorBundle& bundle) { return 1e-8 * bundle.a_max_norm(); }

}  // namespace dtnlab
