/* C API for the DtN/Robin spectral laboratory.
 *
 * All functions return a status code (DTNLAB_OK on success); outputs go
 * through pointer arguments. On failure, dtnlab_last_error() returns a
 * thread-local description of what went wrong. Handles are opaque and
 * freed with the matching *_free function; operators are immutable
 * after construction and safe to query from multiple threads.
 */
#ifndef DTNLAB_H
#define DTNLAB_H

#ifdef __cplusplus
extern "C" {
#endif

#define DTNLAB_OK 0
#define DTNLAB_ERR_INVALID_ARGUMENT 1 /* bad input, I/O or validation failure */
#define DTNLAB_ERR_SPECTRAL_GATE 2    /* Dirichlet spectrum too close to zero */
#define DTNLAB_ERR_VERIFICATION 3     /* a verification check failed */
#define DTNLAB_ERR_NUMERIC 4          /* solver or eigensolver failure */

typedef struct dtnlab_mesh dtnlab_mesh;
typedef struct dtnlab_problem dtnlab_problem;
typedef struct dtnlab_operator dtnlab_operator;

const char* dtnlab_version(void);
const char* dtnlab_last_error(void);

/* --- meshes -------------------------------------------------------------- */

/* name: "square" | "disk" | "annulus" | "lshape"; resolution >= 1. */
int dtnlab_mesh_preset(const char* name, int resolution, dtnlab_mesh** out);
/* JSON schema: {"vertices":[[x,y],...], "triangles":[[i,j,k],...],
 *               "boundary_edges":[[i,j,component_id],...]} */
int dtnlab_mesh_load(const char* path, dtnlab_mesh** out);
int dtnlab_mesh_refine(const dtnlab_mesh* mesh, dtnlab_mesh** out);
int dtnlab_mesh_info(const dtnlab_mesh* mesh, int* vertices, int* triangles,
                     int* boundary_edges, int* components);
void dtnlab_mesh_free(dtnlab_mesh* mesh);

/* --- problems (mesh + coefficients, assembled forms) --------------------- */

/* coeff_json: {"a": {"preset":"identity"} | {"preset":"anisotropic",...}
 *                   | [[a11,a12,a22],...],
 *              "V": number | [...], "beta": number | [...]}.
 * NULL means identity a, V = 0, beta = 0. */
int dtnlab_problem_create(const dtnlab_mesh* mesh, const char* coeff_json,
                          dtnlab_problem** out);
void dtnlab_problem_free(dtnlab_problem* problem);

/* --- spectral operators --------------------------------------------------- */

/* kind: "dtn" (boundary Schur complement) or "robin" (A + B_beta).
 * gate_tol <= 0 selects the default 1e-8 * ||A||_max; only "dtn"
 * enforces the gate. */
int dtnlab_operator_build(const dtnlab_problem* problem, const char* kind,
                          double gate_tol, dtnlab_operator** out);
int dtnlab_operator_size(const dtnlab_operator* op, int* n);
/* Mesh vertex id of each operator coordinate; out has length n. */
int dtnlab_operator_node_ids(const dtnlab_operator* op, int* out);
/* Ascending eigenvalues; out has length n. */
int dtnlab_operator_eigenvalues(const dtnlab_operator* op, double* out);
/* i-th mass-orthonormal eigenvector; out has length n. */
int dtnlab_operator_eigenvector(const dtnlab_operator* op, int i, double* out);
/* Lumped measure weights; out has length n. */
int dtnlab_operator_weights(const dtnlab_operator* op, double* out);
/* Kernel matrix of e^{-tD} at t > 0, row-major, out has length n*n. */
int dtnlab_operator_kernel(const dtnlab_operator* op, double t, double* out);
/* Semigroup action e^{-tD} phi at t >= 0; phi and out have length n. */
int dtnlab_operator_apply(const dtnlab_operator* op, double t, const double* phi,
                          double* out);
void dtnlab_operator_free(dtnlab_operator* op);

/* --- verification suite --------------------------------------------------- */

/* options_json (may be NULL): {"target":"dtn"|"robin", "times":[...],
 *   "p":[1,2,"inf"], "seed":0, "gate_tol":0, "inject_asymmetry":false}.
 * On return *report_json is a heap string with the structured report
 * (schema 1); free it with dtnlab_string_free. Returns DTNLAB_OK when
 * every non-informational check passes, DTNLAB_ERR_VERIFICATION
 * otherwise (the report is still produced). */
int dtnlab_verify(const dtnlab_problem* problem, const char* options_json,
                  char** report_json);
void dtnlab_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* DTNLAB_H */
