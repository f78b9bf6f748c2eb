#include "dtnlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <random>

namespace dtnlab {

namespace {

Eigen::VectorXd sign_normalized_ground_state(const SpectralDecomposition& dec) {
    Eigen::VectorXd phi = dec.vectors.col(0);
    int imax = 0;
    phi.cwiseAbs().maxCoeff(&imax);
    if (phi[imax] < 0.0) phi = -phi;
    return phi;
}

std::vector<double> usable_times(const SpectralDecomposition& dec,
                                 const std::vector<double>& times,
                                 std::vector<double>& excluded) {
    const double lam_max = dec.eigenvalues.cwiseAbs().maxCoeff();
    const double t_floor = lam_max > 0.0 ? 1.0 / lam_max : 0.0;
    std::vector<double> used;
    for (double t : times)
        (t >= t_floor ? used : excluded).push_back(t);
    if (used.empty()) {
        used = times;
        excluded.clear();
    }
    return used;
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = dist(rng);
    return v;
}

}  // namespace

std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Fail: return "fail";
        case CheckStatus::Informational: return "informational";
    }
    return "informational";
}

nlohmann::json CheckResult::to_json() const {
    nlohmann::json j{{"name", name},
                     {"status", dtnlab::to_string(status)},
                     {"measured", measured},
                     {"tolerance", tolerance},
                     {"anchor", anchor}};
    if (!note.empty()) j["note"] = note;
    return j;
}

void VerificationReport::finalize() {
    overall = std::none_of(checks.begin(), checks.end(),
                           [](const CheckResult& c) { return c.status == CheckStatus::Fail; });
}

nlohmann::json VerificationReport::to_json() const {
    nlohmann::json j;
    j["schema"] = 1;
    j["scenario"] = scenario;
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks) j["checks"].push_back(c.to_json());
    j["overall"] = overall ? "pass" : "fail";
    return j;
}

// ---------------------------------------------------------------------------

CheckResult check_selfadjoint_lowerbounded(const Eigen::MatrixXd& S,
                                           const SpectralDecomposition& dec) {
    CheckResult r;
    r.name = "selfadjoint_lower_bounded";
    r.anchor = "boundary operator is self-adjoint and bounded below";
    const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
    const double asym = (S - S.transpose()).cwiseAbs().maxCoeff() / scale;
    r.tolerance = 1e-12;
    r.measured = {{"relative_asymmetry", asym}, {"lambda_1", dec.eigenvalues[0]}};
    r.status = asym <= r.tolerance && std::isfinite(dec.eigenvalues[0]) ? CheckStatus::Pass
                                                                        : CheckStatus::Fail;
    return r;
}

CheckResult check_positivity(const SpectralDecomposition& dec, const std::vector<double>& times,
                             bool hypothesis_positive_form) {
    CheckResult r;
    r.name = "positivity";
    r.anchor = "semigroup preserves the nonnegative cone when the Dirichlet form is positive";
    r.tolerance = 1e-9;  // relative to the max kernel entry
    std::vector<double> excluded;
    const std::vector<double> used = usable_times(dec, times, excluded);
    double worst = 0.0;  // most negative min/max ratio
    nlohmann::json per_t = nlohmann::json::array();
    for (double t : used) {
        const SemigroupKernel k = kernel_matrix(dec, t);
        const double mx = k.K.maxCoeff();
        const double mn = k.K.minCoeff();
        const double ratio = mx > 0.0 ? mn / mx : mn;
        per_t.push_back({{"t", t}, {"min_entry", mn}, {"max_entry", mx}});
        worst = std::min(worst, ratio);
    }
    r.measured = {{"per_time", per_t}, {"worst_min_over_max", worst}};
    if (!excluded.empty()) r.measured["excluded_times"] = excluded;
    if (!hypothesis_positive_form) {
        r.status = CheckStatus::Informational;
        r.note = "Dirichlet form not positive; positivity may fail and is reported only";
    } else {
        r.status = worst >= -r.tolerance ? CheckStatus::Pass : CheckStatus::Fail;
    }
    return r;
}

CheckResult check_submarkov(const SpectralDecomposition& dec, const std::vector<double>& times,
                            bool potential_nonneg, unsigned long long seed) {
    CheckResult r;
    r.name = "submarkov";
    r.anchor = "for nonnegative potentials the semigroup is submarkovian";
    r.tolerance = 1e-9;
    if (!potential_nonneg) {
        r.status = CheckStatus::Informational;
        r.note = "skipped: potential is not nonnegative";
        return r;
    }
    std::mt19937_64 rng(seed);
    const int n = dec.size();
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(n);
    double max_one = -std::numeric_limits<double>::infinity();
    double box_violation = 0.0;
    for (double t : times) {
        max_one = std::max(max_one, semigroup_apply(dec, t, one).maxCoeff());
        for (int probe = 0; probe < 5; ++probe) {
            const Eigen::VectorXd phi = random_vector(rng, n, 0.0, 1.0);
            const Eigen::VectorXd out = semigroup_apply(dec, t, phi);
            box_violation = std::max(box_violation, out.maxCoeff() - 1.0);
            box_violation = std::max(box_violation, -out.minCoeff());
        }
    }
    r.measured = {{"max_S_t_one", max_one}, {"unit_box_violation", box_violation}};
    r.status = (max_one <= 1.0 + 1e-10 && box_violation <= r.tolerance) ? CheckStatus::Pass
                                                                         : CheckStatus::Fail;
    return r;
}

CheckResult check_kernel_laws(const SpectralDecomposition& dec, const std::vector<double>& times,
                              unsigned long long seed) {
    CheckResult r;
    r.name = "kernel_laws";
    r.anchor = "kernel symmetry, Chapman-Kolmogorov, action and trace identities";
    r.tolerance = 1e-10;
    std::mt19937_64 rng(seed);
    const int n = dec.size();
    double sym = 0.0, ck = 0.0, action = 0.0, trace_err = 0.0;
    for (double t : times) {
        const SemigroupKernel kt = kernel_matrix(dec, t);
        const SemigroupKernel k2t = kernel_matrix(dec, 2.0 * t);
        const double kscale = std::max(1e-300, kt.K.cwiseAbs().maxCoeff());
        sym = std::max(sym, (kt.K - kt.K.transpose()).cwiseAbs().maxCoeff() / kscale);

        const Eigen::MatrixXd comp = kt.K * kt.weights.asDiagonal() * kt.K;
        const double scale2 = std::max(1e-300, k2t.K.cwiseAbs().maxCoeff());
        ck = std::max(ck, (comp - k2t.K).cwiseAbs().maxCoeff() / scale2);

        const Eigen::VectorXd phi = random_vector(rng, n, -1.0, 1.0);
        const Eigen::VectorXd via_kernel = kt.K * (kt.weights.asDiagonal() * phi);
        const Eigen::VectorXd via_spec = semigroup_apply(dec, t, phi);
        const double ascale = std::max(1.0, via_spec.cwiseAbs().maxCoeff());
        action = std::max(action, (via_kernel - via_spec).cwiseAbs().maxCoeff() / ascale);

        const double tr_kernel = (kt.K.diagonal().array() * kt.weights.array()).sum();
        const double tr_spec = Eigen::exp(-t * dec.eigenvalues.array()).sum();
        trace_err = std::max(trace_err,
                             std::abs(tr_kernel - tr_spec) / std::max(1.0, std::abs(tr_spec)));
    }
    r.measured = {{"symmetry", sym},
                  {"chapman_kolmogorov", ck},
                  {"action_identity", action},
                  {"trace_identity", trace_err}};
    r.status = (sym <= 1e-12 && ck <= 1e-10 && action <= 1e-10 && trace_err <= 1e-10)
                   ? CheckStatus::Pass
                   : CheckStatus::Fail;
    return r;
}

CheckResult check_perron(const SpectralDecomposition& dec, const std::vector<int>& node_components,
                         bool hypotheses_hold) {
    CheckResult r;
    r.name = "perron";
    r.anchor = "bottom eigenvalue is simple with strictly positive ground state";
    r.tolerance = 1e-8;
    if (!hypotheses_hold) {
        r.status = CheckStatus::Informational;
        r.note = "skipped: requires connected domain and positive Dirichlet form";
        return r;
    }
    const double gap = dec.size() > 1
                           ? dec.eigenvalues[1] - dec.eigenvalues[0]
                           : std::numeric_limits<double>::infinity();
    const double gap_tol = 1e-8 * std::max(1.0, std::abs(dec.eigenvalues[0]));
    const Eigen::VectorXd phi1 = sign_normalized_ground_state(dec);
    const double mx = phi1.maxCoeff();
    const double delta = phi1.minCoeff();

    std::map<int, double> comp_min;
    for (int i = 0; i < phi1.size(); ++i) {
        const int c = i < static_cast<int>(node_components.size()) ? node_components[i] : 0;
        auto it = comp_min.find(c);
        if (it == comp_min.end())
            comp_min[c] = phi1[i];
        else
            it->second = std::min(it->second, phi1[i]);
    }
    nlohmann::json per_comp = nlohmann::json::object();
    bool comps_positive = true;
    for (const auto& [c, m] : comp_min) {
        per_comp[std::to_string(c)] = m;
        comps_positive = comps_positive && m >= 1e-14 * mx;
    }
    r.measured = {{"spectral_gap", gap},
                  {"lambda_1", dec.eigenvalues[0]},
                  {"delta_min_phi1", delta},
                  {"max_phi1", mx},
                  {"per_component_min", per_comp}};
    r.status = (gap >= gap_tol && delta >= 1e-14 * mx && comps_positive) ? CheckStatus::Pass
                                                                          : CheckStatus::Fail;
    return r;
}

CheckResult check_robin_dtn_link(const OperatorBundle& bundle, const DtnOperator& dtn,
                                 const SpectralDecomposition& dtn_dec, bool hypotheses_hold) {
    CheckResult r;
    r.name = "robin_dtn_link";
    r.anchor = "shifting the Robin coefficient by -lambda_1 of the boundary operator "
               "makes zero the minimum of the Robin spectrum, with matching traces";
    r.tolerance = 1e-8;
    if (!hypotheses_hold) {
        r.status = CheckStatus::Informational;
        r.note = "skipped: requires connected domain and positive Dirichlet form";
        return r;
    }
    const double lam1 = dtn_dec.eigenvalues[0];

    // R = A + diag(-lambda_1 * m_z) on boundary nodes.
    Eigen::SparseMatrix<double> R = bundle.A;
    for (std::size_t i = 0; i < bundle.boundary.size(); ++i)
        R.coeffRef(bundle.boundary[i], bundle.boundary[i]) -= lam1 * bundle.M_gamma[i];

    const SpectralDecomposition rdec = eigensolve(R, bundle.M_omega);
    const double spec_scale = std::max(1.0, rdec.eigenvalues.cwiseAbs().maxCoeff());
    const double min_eig = rdec.eigenvalues[0];

    // Angle between the Robin ground-state trace and the bottom DtN
    // eigenvector, in the boundary mass geometry.
    Eigen::VectorXd trace(bundle.boundary.size());
    for (std::size_t i = 0; i < bundle.boundary.size(); ++i)
        trace[i] = rdec.vectors.col(0)[bundle.boundary[i]];
    const Eigen::VectorXd phi1 = dtn_dec.vectors.col(0);
    const auto mdot = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        return x.dot(bundle.M_gamma.asDiagonal() * y);
    };
    const Eigen::VectorXd tn = trace / std::sqrt(mdot(trace, trace));
    const Eigen::VectorXd pn = phi1 / std::sqrt(mdot(phi1, phi1));
    const double c = mdot(tn, pn);
    const Eigen::VectorXd ortho = tn - c * pn;
    const double angle = std::asin(std::min(1.0, std::sqrt(mdot(ortho, ortho))));

    r.measured = {{"beta", -lam1},
                  {"min_robin_eigenvalue", min_eig},
                  {"relative_min", min_eig / spec_scale},
                  {"trace_angle_rad", angle}};
    r.status = (std::abs(min_eig) <= 1e-8 * spec_scale && angle <= 1e-6) ? CheckStatus::Pass
                                                                          : CheckStatus::Fail;
    return r;
}

CheckResult check_strict_kernel_positivity(const SpectralDecomposition& dec,
                                           const std::vector<double>& times,
                                           bool hypotheses_hold) {
    CheckResult r;
    r.name = "strict_kernel_positivity";
    r.anchor = "kernel entries are strictly positive on connected domains (irreducibility)";
    r.tolerance = 1e-14;  // relative to the max kernel entry
    double worst = std::numeric_limits<double>::infinity();
    nlohmann::json per_t = nlohmann::json::array();
    for (double t : times) {
        const SemigroupKernel k = kernel_matrix(dec, t);
        const double mx = k.K.maxCoeff();
        const double mn = k.K.minCoeff();
        per_t.push_back({{"t", t}, {"min_entry", mn}, {"max_entry", mx}});
        worst = std::min(worst, mx > 0.0 ? mn / mx : mn);
    }
    r.measured = {{"per_time", per_t}, {"worst_min_over_max", worst}};
    if (!hypotheses_hold) {
        r.status = worst > r.tolerance ? CheckStatus::Pass : CheckStatus::Fail;
        r.note = "hypotheses not declared; strict positivity asserted as stated";
        return r;
    }
    r.status = worst > r.tolerance ? CheckStatus::Pass : CheckStatus::Fail;
    return r;
}

CheckResult check_lp_bound(const SpectralDecomposition& dec, const std::vector<double>& times,
                           const std::vector<double>& ps, bool strict_positivity_established) {
    CheckResult r;
    r.name = "lp_bound";
    r.anchor = "||S_t||_{p->p} <= (max phi_1 / min phi_1) e^{-lambda_1 t}";
    r.tolerance = 1e-8;
    if (!strict_positivity_established) {
        r.status = CheckStatus::Informational;
        r.note = "skipped: requires strictly positive ground state";
        return r;
    }
    const Eigen::VectorXd phi1 = sign_normalized_ground_state(dec);
    const double delta = phi1.minCoeff();
    const double big_m = phi1.maxCoeff() / delta;
    const double lam1 = dec.eigenvalues[0];
    bool ok = true;
    double worst_excess = -std::numeric_limits<double>::infinity();
    nlohmann::json entries = nlohmann::json::array();
    for (double t : times)
        for (double p : ps) {
            const double norm = semigroup_p_norm(dec, t, p);
            const double bound = big_m * std::exp(-lam1 * t) * (1.0 + 1e-8);
            entries.push_back({{"t", t},
                               {"p", std::isinf(p) ? std::string("inf") : std::to_string(p)},
                               {"norm", norm},
                               {"bound", bound}});
            ok = ok && norm <= bound;
            worst_excess = std::max(worst_excess, norm / bound - 1.0);
        }
    r.measured = {{"M", big_m}, {"delta", delta}, {"entries", entries},
                  {"worst_excess", worst_excess}};
    r.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
    return r;
}

CheckResult check_strong_continuity_rates(const SpectralDecomposition& dec,
                                          unsigned long long seed) {
    CheckResult r;
    r.name = "strong_continuity_rates";
    r.anchor = "||S_t phi - phi||_inf as t -> 0 (recorded as evidence only)";
    r.status = CheckStatus::Informational;
    std::mt19937_64 rng(seed);
    const Eigen::VectorXd phi = random_vector(rng, dec.size(), -1.0, 1.0);
    nlohmann::json rates = nlohmann::json::array();
    for (double t : {1e-1, 1e-2, 1e-3}) {
        const double err = (semigroup_apply(dec, t, phi) - phi).cwiseAbs().maxCoeff();
        rates.push_back({{"t", t}, {"sup_error", err}});
    }
    r.measured = {{"rates", rates}};
    r.note = "finite-dimensional statement is trivially true; rates across refinements "
             "are evidence only";
    return r;
}

// ---------------------------------------------------------------------------

nlohmann::json Scenario::to_json() const {
    nlohmann::json j{{"domain", domain},      {"resolution", resolution},
                     {"refine", refine},
                     {"coefficients", nlohmann::json::parse(coeff_json, nullptr, false)},
                     {"target", target},      {"times", times},
                     {"seed", seed},          {"gate_tol", gate_tol}};
    if (!mesh_path.empty()) j["mesh_path"] = mesh_path;
    nlohmann::json jp = nlohmann::json::array();
    for (double p : ps) jp.push_back(std::isinf(p) ? nlohmann::json("inf") : nlohmann::json(p));
    j["p"] = jp;
    return j;
}

Scenario Scenario::from_json(const nlohmann::json& j) {
    Scenario sc;
    sc.domain = j.value("domain", sc.domain);
    sc.mesh_path = j.value("mesh_path", std::string{});
    sc.resolution = j.value("resolution", sc.resolution);
    sc.refine = j.value("refine", 0);
    if (j.contains("coefficients")) sc.coeff_json = j["coefficients"].dump();
    sc.target = j.value("target", sc.target);
    if (j.contains("times")) sc.times = j["times"].get<std::vector<double>>();
    if (j.contains("p")) {
        sc.ps.clear();
        for (const auto& p : j["p"])
            sc.ps.push_back(p.is_string() ? std::numeric_limits<double>::infinity()
                                          : p.get<double>());
    }
    sc.seed = j.value("seed", 0ULL);
    sc.gate_tol = j.value("gate_tol", 0.0);
    sc.inject_asymmetry = j.value("inject_asymmetry", false);
    return sc;
}

Mesh build_scenario_mesh(const Scenario& sc) {
    Mesh mesh = sc.mesh_path.empty() ? Mesh::preset(sc.domain, sc.resolution)
                                     : Mesh::load_json(sc.mesh_path);
    for (int i = 0; i < sc.refine; ++i) mesh = mesh.refined();
    return mesh;
}

VerificationReport run_suite(const Scenario& sc) {
    try {
        auto mesh = std::make_shared<Mesh>(build_scenario_mesh(sc));
        CoefficientField coeffs = CoefficientField::from_json_text(*mesh, sc.coeff_json);
        return run_suite_on(assemble(mesh, coeffs), sc);
    } catch (const std::exception& e) {
        VerificationReport report;
        report.scenario = sc.to_json();
        CheckResult fail;
        fail.name = "construction";
        fail.anchor = "scenario could be constructed";
        fail.status = CheckStatus::Fail;
        fail.measured = {{"error", e.what()}};
        report.checks.push_back(fail);
        report.finalize();
        return report;
    }
}

VerificationReport run_suite_on(const OperatorBundle& bundle, const Scenario& sc) {
    VerificationReport report;
    report.scenario = sc.to_json();
    report.scenario["mesh"] = bundle.mesh->provenance();

    try {
        const Mesh* mesh = bundle.mesh.get();
        const CoefficientField& coeffs = bundle.coeffs;
        bool v_nonneg =
            std::all_of(coeffs.V.begin(), coeffs.V.end(), [](double v) { return v >= 0.0; });
        if (sc.target == "robin")
            v_nonneg = v_nonneg && std::all_of(coeffs.beta.begin(), coeffs.beta.end(),
                                               [](double b) { return b >= 0.0; });

        bool dirichlet_positive = true;
        if (!bundle.interior.empty()) {
            const Eigen::VectorXd dspec = dirichlet_eigenvalues(bundle);
            dirichlet_positive = dspec[0] > 0.0;
            report.scenario["dirichlet_lambda_min"] = dspec[0];
        }
        report.scenario["regime"] = dirichlet_positive ? "positive-definite" : "indefinite";
        const bool perron_hyp = dirichlet_positive && mesh->omega_connected();

        Eigen::MatrixXd S;
        Eigen::VectorXd M;
        std::vector<int> components;
        std::unique_ptr<DtnOperator> dtn;
        if (sc.target == "dtn") {
            dtn = std::make_unique<DtnOperator>(build_dtn(bundle, sc.gate_tol));
            S = dtn->S();
            M = dtn->M_gamma();
            for (int v : bundle.boundary) components.push_back(mesh->node_component(v));
        } else if (sc.target == "robin") {
            const RobinOperator rob = build_robin(bundle);
            S = Eigen::MatrixXd(rob.R);
            M = rob.M_omega;
            components.assign(bundle.size(), 0);
        } else {
            throw NumericError("unknown verification target '" + sc.target + "'");
        }
        if (sc.inject_asymmetry && S.rows() > 1) S(0, 1) += 1e-3 * (1.0 + S.cwiseAbs().maxCoeff());

        const SpectralDecomposition dec = eigensolve(S, M);

        report.checks.push_back(check_selfadjoint_lowerbounded(S, dec));
        report.checks.push_back(check_kernel_laws(dec, sc.times, sc.seed));
        report.checks.push_back(check_positivity(dec, sc.times, dirichlet_positive));
        report.checks.push_back(check_submarkov(dec, sc.times, v_nonneg, sc.seed));
        report.checks.push_back(check_perron(dec, components, perron_hyp));
        const auto& perron = report.checks.back();
        const bool strict_est =
            perron.status == CheckStatus::Pass && perron_hyp;
        report.checks.push_back(check_strict_kernel_positivity(dec, sc.times, perron_hyp));
        if (!perron_hyp) {
            report.checks.back().status = CheckStatus::Informational;
            report.checks.back().note =
                "hypotheses fail (disconnected domain or indefinite Dirichlet form); "
                "measured values reported only";
        }
        if (sc.target == "dtn")
            report.checks.push_back(check_robin_dtn_link(bundle, *dtn, dec, perron_hyp));
        report.checks.push_back(check_lp_bound(dec, sc.times, sc.ps, strict_est));
        report.checks.push_back(check_strong_continuity_rates(dec, sc.seed));
    } catch (const std::exception& e) {
        CheckResult fail;
        fail.name = "construction";
        fail.anchor = "scenario could be constructed";
        fail.status = CheckStatus::Fail;
        fail.measured = {{"error", e.what()}};
        report.checks.push_back(fail);
    }

    report.finalize();
    return report;
}

}  // namespace dtnlab
