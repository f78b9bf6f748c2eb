#include "dtnlab.h"

#include <cstring>
#include <memory>
#include <string>

#include "dtnlab/dtn.hpp"
#include "dtnlab/spectral.hpp"
#include "dtnlab/verify.hpp"

namespace {

thread_local std::string g_last_error;

int set_error(int code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const dtnlab::SpectralGateViolation& e) {
        return set_error(DTNLAB_ERR_SPECTRAL_GATE, e.what());
    } catch (const dtnlab::MeshError& e) {
        return set_error(DTNLAB_ERR_INVALID_ARGUMENT, e.what());
    } catch (const dtnlab::CoefficientError& e) {
        return set_error(DTNLAB_ERR_INVALID_ARGUMENT, e.what());
    } catch (const dtnlab::IoError& e) {
        return set_error(DTNLAB_ERR_INVALID_ARGUMENT, e.what());
    } catch (const dtnlab::NearSingularNeumann& e) {
        return set_error(DTNLAB_ERR_NUMERIC, e.what());
    } catch (const std::exception& e) {
        return set_error(DTNLAB_ERR_NUMERIC, e.what());
    }
}

}  // namespace

struct dtnlab_mesh {
    std::shared_ptr<const dtnlab::Mesh> mesh;
};

struct dtnlab_problem {
    dtnlab::OperatorBundle bundle;
};

struct dtnlab_operator {
    std::string kind;
    dtnlab::SpectralDecomposition dec;
    std::vector<int> node_ids;
};

extern "C" {

const char* dtnlab_version(void) { return "0.1.0"; }

const char* dtnlab_last_error(void) { return g_last_error.c_str(); }

int dtnlab_mesh_preset(const char* name, int resolution, dtnlab_mesh** out) {
    if (!name || !out) return set_error(DTNLAB_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        auto m = std::make_shared<dtnlab::Mesh>(dtnlab::Mesh::preset(name, resolution));
        *out = new dtnlab_mesh{std::move(m)};
        return DTNLAB_OK;
    });
}

int dtnlab_mesh_load(const char* path, dtnlab_mesh** out) {
    if (!path || !out) return set_error(DTNLAB_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        auto m = std::make_shared<dtnlab::Mesh>(dtnlab::Mesh::load_json(path));
        *out = new dtnlab_mesh{std::move(m)};
        return DTNLAB_OK;
    });
}

int dtnlab_mesh_refine(const dtnlab_mesh* mesh, dtnlab_mesh** out) {
    if (!mesh || !out) return set_error(DTNLAB_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        auto m = std::make_shared<dtnlab::Mesh>(mesh->mesh->refined());
        *out = new dtnlab_mesh{std::move(m)};
        return DTNLAB_OK;
    });
}

int dtnlab_mesh_info(const dtnlab_mesh* mesh, int* vertices, int* triangles,
                     int* boundary_edges, int* components) {
    if (!mesh) return set_error(DTNLAB_ERR_INVALID_ARGUMENT, "null mesh");
    if (vertices) *vertices = mesh->mesh->vertex_count();
    if (triangles) *triangles = mesh->mesh->triangle_count();
    if (boundary_edges) *boundary_edges = static_cast<int>(mesh->mesh->boundary_edges().size());
    if (components) *components = mesh->mesh->component_count();
    return DTNLAB_OK;
}

void dtnlab_mesh_free(dtnlab_mesh* mesh) { delete mesh; }

int dtnlab_problem_create(const dtnlab_mesh* mesh, const char* coeff_json,
                          dtnlab_problem** out) {
    if (!mesh || !out) return set_error(DTNLAB_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const std::string text = coeff_json ? coeff_json : "{}";
        dtnlab::CoefficientField coeffs =
            dtnlab::CoefficientField::from_json_text(*mesh->mesh, text);
        *out = new dtnlab_problem{dtnlab::assemble(mesh->mesh, std::move(coeffs))};
        return DTNLAB_OK;
    });
}

void dtnlab_problem_free(dtnlab_problem* problem) { delete problem; }

int dtnlab_operator_build(const dtnlab_problem* problem, const char* kind, double gate_tol,
                          dtnlab_operator** out) {
    if (!problem || !kind || !out)
        return set_error(DTNLAB_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        auto op = std::make_unique<dtnlab_operator>();
        op->kind = kind;
        if (op->kind == "dtn") {
            const dtnlab::DtnOperator dtn = dtnlab::build_dtn(problem->bundle, gate_tol);
            op->dec = dtnlab::eigensolve(dtn.S(), dtn.M_gamma());
            op->node_ids = dtn.boundary();
        } else if (op->kind == "robin") {
            const dtnlab::RobinOperator rob = dtnlab::build_robin(problem->bundle);
            op->dec = dtnlab::eigensolve(rob.R, rob.M_omega);
            op->node_ids.resize(problem->bundle.size());
            for (int i = 0; i < problem->bundle.size(); ++i) op->node_ids[i] = i;
        } else {
            return set_error(DTNLAB_ERR_INVALID_ARGUMENT,
                             "unknown operator kind '" + op->kind + "'");
        }
        *out = op.release();
        return DTNLAB_OK;
    });
}

int dtnlab_operator_size(const dtnlab_operator* op, int* n) {
    if (!op || !n) return set_error(DTNLAB_ERR_INVALID_ARGUMENT, "null argument");
    *n = op->dec.size();
    return DTNLAB_OK;
}

int dtnlab_operator_node_ids(const dtnlab_operator* op, int* out) {
    if (!op || !out) return set_error(DTNLAB_ERR_INVALID_ARGUMENT, "null argument");
    std::memcpy(out, op->node_ids.data(), op->node_ids.size() * sizeof(int));
    return DTNLAB_OK;
}

int dtnlab_operator_eigenvalues(const dtnlab_operator* op, double* out) {
    if (!op || !out) return set_error(DTNLAB_ERR_INVALID_ARGUMENT, "null argument");
    std::memcpy(out, op->dec.eigenvalues.data(), op->dec.size() * sizeof(double));
    return DTNLAB_OK;
}

int dtnlab_operator_eigenvector(const dtnlab_operator* op, int i, double* out) {
    if (!op || !out) return set_error(DTNLAB_ERR_INVALID_ARGUMENT, "null argument");
    if (i < 0 || i >= op->dec.size())
        return set_error(DTNLAB_ERR_INVALID_ARGUMENT,
                         "eigenvector index " + std::to_string(i) + " out of range");
    Eigen::Map<Eigen::VectorXd>(out, op->dec.size()) = op->dec.vectors.col(i);
    return DTNLAB_OK;
}

int dtnlab_operator_weights(const dtnlab_operator* op, double* out) {
    if (!op || !out) return set_error(DTNLAB_ERR_INVALID_ARGUMENT, "null argument");
    std::memcpy(out, op->dec.weights.data(), op->dec.size() * sizeof(double));
    return DTNLAB_OK;
}

int dtnlab_operator_kernel(const dtnlab_operator* op, double t, double* out) {
    if (!op || !out) return set_error(DTNLAB_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const dtnlab::SemigroupKernel k = dtnlab::kernel_matrix(op->dec, t);
        const int n = op->dec.size();
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            out, n, n) = k.K;
        return DTNLAB_OK;
    });
}

int dtnlab_operator_apply(const dtnlab_operator* op, double t, const double* phi, double* out) {
    if (!op || !phi || !out) return set_error(DTNLAB_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const Eigen::Map<const Eigen::VectorXd> in(phi, op->dec.size());
        Eigen::Map<Eigen::VectorXd>(out, op->dec.size()) =
            dtnlab::semigroup_apply(op->dec, t, in);
        return DTNLAB_OK;
    });
}

void dtnlab_operator_free(dtnlab_operator* op) { delete op; }

int dtnlab_verify(const dtnlab_problem* problem, const char* options_json, char** report_json) {
    if (!problem || !report_json)
        return set_error(DTNLAB_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        dtnlab::Scenario sc;
        if (options_json) {
            nlohmann::json j = nlohmann::json::parse(options_json, nullptr, false);
            if (j.is_discarded())
                return set_error(DTNLAB_ERR_INVALID_ARGUMENT, "options JSON parse failure");
            sc = dtnlab::Scenario::from_json(j);
        }
        if (sc.target == "dtn" && !problem->bundle.interior.empty()) {
            const double tol = sc.gate_tol > 0.0 ? sc.gate_tol
                                                 : dtnlab::default_gate_tol(problem->bundle);
            const dtnlab::SpectralGateResult gate = dtnlab::spectral_gate(problem->bundle, tol);
            if (!gate.pass)
                return set_error(DTNLAB_ERR_SPECTRAL_GATE,
                                 "spectral gate violation: min |lambda| = " +
                                     std::to_string(gate.min_abs_eigenvalue));
        }
        const dtnlab::VerificationReport report = dtnlab::run_suite_on(problem->bundle, sc);
        const std::string text = report.to_json().dump(2);
        *report_json = new char[text.size() + 1];
        std::memcpy(*report_json, text.c_str(), text.size() + 1);
        if (!report.overall)
            return set_error(DTNLAB_ERR_VERIFICATION, "one or more verification checks failed");
        return DTNLAB_OK;
    });
}

void dtnlab_string_free(char* s) { delete[] s; }

}  // extern "C"
