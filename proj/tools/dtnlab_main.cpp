// Command-line front end for the DtN/Robin spectral laboratory. Talks
// to the core exclusively through the C API in dtnlab.h.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dtnlab.h"

namespace {

// Exit codes: 0 pass, 1 input error, 2 spectral-gate violation,
// 3 verification failure.
int exit_code_for(int api_status) {
    switch (api_status) {
        case DTNLAB_OK: return 0;
        case DTNLAB_ERR_SPECTRAL_GATE: return 2;
        case DTNLAB_ERR_VERIFICATION: return 3;
        default: return 1;
    }
}

struct CommonOpts {
    std::string domain = "square";
    std::string mesh_path;
    int resolution = 2;
    int refine = 0;
    std::string coeff;  // file path or inline JSON
    double V = 0.0;
    double beta = 0.0;
    std::string out_dir = ".";
    double gate_tol = 0.0;
    int threads = 0;
    unsigned long long seed = 0;
    std::string op_kind = "dtn";
    std::vector<double> times = {0.1, 0.5, 1.0};
    std::vector<std::string> ps = {"1", "2", "inf"};
    bool inject_asymmetry = false;
};

void add_common_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--domain", o.domain, "preset domain: square|disk|annulus|lshape");
    cmd->add_option("--mesh", o.mesh_path, "mesh JSON file (overrides --domain)");
    cmd->add_option("--resolution", o.resolution, "preset base resolution");
    cmd->add_option("--refine", o.refine, "uniform refinement steps")->check(CLI::NonNegativeNumber);
    cmd->add_option("--coeff", o.coeff, "coefficient JSON (inline or file path)");
    cmd->add_option("--V", o.V, "constant potential (ignored when --coeff is given)");
    cmd->add_option("--beta", o.beta, "constant Robin coefficient (ignored when --coeff is given)");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--seed", o.seed, "seed for randomized probes");
    cmd->add_option("--gate-tol", o.gate_tol, "spectral gate tolerance (0 = default)");
    cmd->add_option("--threads", o.threads, "worker threads (0 = env DTNLAB_THREADS or 1)");
}

std::string coefficient_json(const CommonOpts& o) {
    if (o.coeff.empty()) {
        std::ostringstream ss;
        ss << "{\"V\": " << o.V << ", \"beta\": " << o.beta << "}";
        return ss.str();
    }
    if (!o.coeff.empty() && o.coeff.front() == '{') return o.coeff;
    std::ifstream in(o.coeff);
    if (!in) throw CLI::ValidationError("--coeff", "cannot open file '" + o.coeff + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int resolve_threads(const CommonOpts& o) {
    if (o.threads > 0) return o.threads;
    if (const char* env = std::getenv("DTNLAB_THREADS")) {
        const int t = std::atoi(env);
        if (t > 0) return t;
    }
    return 1;
}

int fail(const char* what) {
    std::fprintf(stderr, "error: %s: %s\n", what, dtnlab_last_error());
    return 1;
}

struct MeshHandle {
    dtnlab_mesh* m = nullptr;
    ~MeshHandle() { dtnlab_mesh_free(m); }
};
struct ProblemHandle {
    dtnlab_problem* p = nullptr;
    ~ProblemHandle() { dtnlab_problem_free(p); }
};
struct OperatorHandle {
    dtnlab_operator* op = nullptr;
    ~OperatorHandle() { dtnlab_operator_free(op); }
};

int build_problem(const CommonOpts& o, ProblemHandle& prob) {
    MeshHandle mesh;
    int rc = o.mesh_path.empty() ? dtnlab_mesh_preset(o.domain.c_str(), o.resolution, &mesh.m)
                                 : dtnlab_mesh_load(o.mesh_path.c_str(), &mesh.m);
    if (rc != DTNLAB_OK) return rc;
    for (int i = 0; i < o.refine; ++i) {
        dtnlab_mesh* refined = nullptr;
        rc = dtnlab_mesh_refine(mesh.m, &refined);
        if (rc != DTNLAB_OK) return rc;
        dtnlab_mesh_free(mesh.m);
        mesh.m = refined;
    }
    return dtnlab_problem_create(mesh.m, coefficient_json(o).c_str(), &prob.p);
}

int cmd_spectrum(const CommonOpts& o) {
    ProblemHandle prob;
    int rc = build_problem(o, prob);
    if (rc != DTNLAB_OK) {
        fail("spectrum");
        return exit_code_for(rc);
    }
    OperatorHandle op;
    rc = dtnlab_operator_build(prob.p, o.op_kind.c_str(), o.gate_tol, &op.op);
    if (rc != DTNLAB_OK) {
        fail("spectrum");
        return exit_code_for(rc);
    }
    int n = 0;
    dtnlab_operator_size(op.op, &n);
    std::vector<double> eig(n), vec(n);
    std::vector<int> ids(n);
    dtnlab_operator_eigenvalues(op.op, eig.data());
    dtnlab_operator_node_ids(op.op, ids.data());

    std::filesystem::create_directories(o.out_dir);
    {
        std::FILE* f = std::fopen((o.out_dir + "/spectrum.csv").c_str(), "w");
        if (!f) return 1;
        std::fprintf(f, "index,eigenvalue\n");
        for (int i = 0; i < n; ++i) std::fprintf(f, "%d,%.17g\n", i, eig[i]);
        std::fclose(f);
    }
    {
        std::FILE* f = std::fopen((o.out_dir + "/eigenfunctions.csv").c_str(), "w");
        if (!f) return 1;
        std::fprintf(f, "node");
        for (int i = 0; i < n; ++i) std::fprintf(f, ",ef_%d", i);
        std::fprintf(f, "\n");
        std::vector<std::vector<double>> cols(n, std::vector<double>(n));
        for (int i = 0; i < n; ++i) dtnlab_operator_eigenvector(op.op, i, cols[i].data());
        for (int r = 0; r < n; ++r) {
            std::fprintf(f, "%d", ids[r]);
            for (int i = 0; i < n; ++i) std::fprintf(f, ",%.17g", cols[i][r]);
            std::fprintf(f, "\n");
        }
        std::fclose(f);
    }
    return 0;
}

int cmd_evolve(const CommonOpts& o) {
    ProblemHandle prob;
    int rc = build_problem(o, prob);
    if (rc != DTNLAB_OK) {
        fail("evolve");
        return exit_code_for(rc);
    }
    OperatorHandle op;
    rc = dtnlab_operator_build(prob.p, o.op_kind.c_str(), o.gate_tol, &op.op);
    if (rc != DTNLAB_OK) {
        fail("evolve");
        return exit_code_for(rc);
    }
    int n = 0;
    dtnlab_operator_size(op.op, &n);
    std::vector<int> ids(n);
    std::vector<double> eig(n), kernel(static_cast<std::size_t>(n) * n);
    dtnlab_operator_node_ids(op.op, ids.data());
    dtnlab_operator_eigenvalues(op.op, eig.data());

    std::filesystem::create_directories(o.out_dir);
    std::FILE* decay = std::fopen((o.out_dir + "/trace_decay.csv").c_str(), "w");
    if (!decay) return 1;
    std::fprintf(decay, "t,trace\n");
    for (double t : o.times) {
        rc = dtnlab_operator_kernel(op.op, t, kernel.data());
        if (rc != DTNLAB_OK) {
            std::fclose(decay);
            fail("evolve");
            return exit_code_for(rc);
        }
        char name[64];
        std::snprintf(name, sizeof(name), "/kernel_t%g.csv", t);
        std::FILE* f = std::fopen((o.out_dir + name).c_str(), "w");
        if (!f) {
            std::fclose(decay);
            return 1;
        }
        std::fprintf(f, "node");
        for (int j = 0; j < n; ++j) std::fprintf(f, ",%d", ids[j]);
        std::fprintf(f, "\n");
        for (int i = 0; i < n; ++i) {
            std::fprintf(f, "%d", ids[i]);
            for (int j = 0; j < n; ++j)
                std::fprintf(f, ",%.17g", kernel[static_cast<std::size_t>(i) * n + j]);
            std::fprintf(f, "\n");
        }
        std::fclose(f);

        double trace = 0.0;
        for (double lam : eig) trace += std::exp(-t * lam);
        std::fprintf(decay, "%.17g,%.17g\n", t, trace);
    }
    std::fclose(decay);
    return 0;
}

int cmd_verify(const CommonOpts& o) {
    ProblemHandle prob;
    int rc = build_problem(o, prob);
    if (rc != DTNLAB_OK) {
        fail("verify");
        return exit_code_for(rc);
    }
    std::ostringstream opts;
    opts << "{\"target\": \"" << o.op_kind << "\", \"seed\": " << o.seed
         << ", \"gate_tol\": " << o.gate_tol << ", \"inject_asymmetry\": "
         << (o.inject_asymmetry ? "true" : "false") << ", \"times\": [";
    for (std::size_t i = 0; i < o.times.size(); ++i)
        opts << (i ? ", " : "") << o.times[i];
    opts << "], \"p\": [";
    for (std::size_t i = 0; i < o.ps.size(); ++i) {
        if (i) opts << ", ";
        if (o.ps[i] == "inf")
            opts << "\"inf\"";
        else
            opts << o.ps[i];
    }
    opts << "]}";

    char* report = nullptr;
    rc = dtnlab_verify(prob.p, opts.str().c_str(), &report);
    if (report) {
        std::filesystem::create_directories(o.out_dir);
        std::ofstream out(o.out_dir + "/report.json");
        out << report << "\n";
        dtnlab_string_free(report);
    }
    if (rc != DTNLAB_OK && rc != DTNLAB_ERR_VERIFICATION) {
        fail("verify");
        return exit_code_for(rc);
    }
    return exit_code_for(rc);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dirichlet-to-Neumann / Robin spectral laboratory"};
    app.require_subcommand(1);

    CommonOpts so, eo, vo;
    CLI::App* spectrum = app.add_subcommand("spectrum", "eigenvalues and eigenfunction traces");
    add_common_flags(spectrum, so);
    spectrum->add_option("--operator", so.op_kind, "operator: dtn|robin");

    CLI::App* evolve = app.add_subcommand("evolve", "semigroup kernels over a time grid");
    add_common_flags(evolve, eo);
    evolve->add_option("--operator", eo.op_kind, "operator: dtn|robin");
    evolve->add_option("--times", eo.times, "time grid (strictly positive)");

    CLI::App* verify = app.add_subcommand("verify", "run the structural verification suite");
    add_common_flags(verify, vo);
    verify->add_option("--operator", vo.op_kind, "verification target: dtn|robin");
    verify->add_option("--times", vo.times, "time grid");
    verify->add_option("--p", vo.ps, "p values for the operator-norm bound (1, 2, inf)");
    verify->add_flag("--inject-asymmetry", vo.inject_asymmetry,
                     "test fixture: perturb the operator before the symmetry check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (spectrum->parsed()) {
            (void)resolve_threads(so);
            return cmd_spectrum(so);
        }
        if (evolve->parsed()) {
            for (double t : eo.times)
                if (!(t > 0.0)) {
                    std::fprintf(stderr, "error: --times must be strictly positive\n");
                    return 1;
                }
            (void)resolve_threads(eo);
            return cmd_evolve(eo);
        }
        if (verify->parsed()) {
            (void)resolve_threads(vo);
            return cmd_verify(vo);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
