#pragma once

#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtnlab/assembly.hpp"
#include "dtnlab/dtn.hpp"
#include "dtnlab/spectral.hpp"

namespace dtnlab {

enum class CheckStatus { Pass, Fail, Informational };

std::string to_string(CheckStatus s);

struct CheckResult {
    std::string name;
    CheckStatus status = CheckStatus::Informational;
    nlohmann::json measured;
    double tolerance = 0.0;
    std::string anchor;  // one-line statement of the property being checked
    std::string note;    // skip reason or context, optional

    nlohmann::json to_json() const;
};

struct VerificationReport {
    nlohmann::json scenario;
    std::vector<CheckResult> checks;
    bool overall = false;

    nlohmann::json to_json() const;
    void finalize();  // overall = no non-informational check failed
};

// --- individual checks -----------------------------------------------------

CheckResult check_selfadjoint_lowerbounded(const Eigen::MatrixXd& S,
                                           const SpectralDecomposition& dec);

// Entrywise kernel nonnegativity. Informational when the positive-form
// hypothesis does not hold. Times below the smallest spectral scale
// 1/max|lambda| are excluded from gating and listed in the result.
CheckResult check_positivity(const SpectralDecomposition& dec, const std::vector<double>& times,
                             bool hypothesis_positive_form);

// S_t 1 <= 1 and preservation of [0,1]-valued vectors; requires V >= 0,
// otherwise reported as skipped.
CheckResult check_submarkov(const SpectralDecomposition& dec, const std::vector<double>& times,
                            bool potential_nonneg, unsigned long long seed);

// Kernel symmetry, Chapman-Kolmogorov, action identity, trace identity.
CheckResult check_kernel_laws(const SpectralDecomposition& dec, const std::vector<double>& times,
                              unsigned long long seed);

// Simple bottom eigenvalue with strictly positive ground state;
// node_components labels each coordinate with its boundary component
// (or 0 for domain operators) so positivity is certified per component.
CheckResult check_perron(const SpectralDecomposition& dec, const std::vector<int>& node_components,
                         bool hypotheses_hold);

// With beta = -lambda_1(D_V): the Robin pair has minimum eigenvalue
// zero and the trace of its ground state is parallel to the bottom DtN
// eigenvector.
CheckResult check_robin_dtn_link(const OperatorBundle& bundle, const DtnOperator& dtn,
                                 const SpectralDecomposition& dtn_dec, bool hypotheses_hold);

CheckResult check_strict_kernel_positivity(const SpectralDecomposition& dec,
                                           const std::vector<double>& times,
                                           bool hypotheses_hold);

// ||S_t||_{p->p} <= (max phi_1 / min phi_1) e^{-lambda_1 t} for
// p in {1, 2, inf}, in the lumped-measure geometry.
CheckResult check_lp_bound(const SpectralDecomposition& dec, const std::vector<double>& times,
                           const std::vector<double>& ps, bool strict_positivity_established);

// Informational: strong continuity rates ||S_t phi - phi||_inf as t -> 0.
CheckResult check_strong_continuity_rates(const SpectralDecomposition& dec,
                                          unsigned long long seed);

// --- scenario runner -------------------------------------------------------

struct Scenario {
    std::string domain = "square";  // preset name, or "file" with mesh_path set
    std::string mesh_path;
    int resolution = 2;  // preset base resolution
    int refine = 0;
    std::string coeff_json = "{}";
    std::string target = "dtn";  // "dtn" | "robin"
    std::vector<double> times = {0.1, 0.5, 1.0};
    std::vector<double> ps = {1.0, 2.0, std::numeric_limits<double>::infinity()};
    unsigned long long seed = 0;
    double gate_tol = 0.0;          // <= 0: default
    bool inject_asymmetry = false;  // test fixture: perturb S before the symmetry check

    nlohmann::json to_json() const;
    static Scenario from_json(const nlohmann::json& j);
};

Mesh build_scenario_mesh(const Scenario& sc);

// Runs every applicable check; construction errors become failing
// entries in the report rather than exceptions.
VerificationReport run_suite(const Scenario& sc);

// Same, over an already assembled problem (mesh/coefficient fields of
// sc are ignored).
VerificationReport run_suite_on(const OperatorBundle& bundle, const Scenario& sc);

}  // namespace dtnlab
