#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "crlab/constants.hpp"
#include "crlab/frames.hpp"
#include "crlab/homotopy.hpp"
#include "crlab/smoothing.hpp"

namespace crlab {

// How the affine part of F at 0 is read off: least-squares quadratic fit, or the lattice's own central
// differences (which makes dbar_X Z_*(0) = 0 hold exactly for the discrete operator).
enum class OriginDerivative { Fitted, Central };

struct IterationOptions {
    HomotopyOptions homotopy;
    EstimateConstants constants;
    // flag a step when sup |defect| exceeds this fraction of sup |dbar_X Z|
    double defect_flag_fraction = 0.2;
    int taylor_radius = 3;
    OriginDerivative origin_derivative = OriginDerivative::Central;
    int contraction_max_iter = 100;
    double contraction_tol = 1e-12;
    bool check_hypotheses = true;
};

struct AlterResult {
    GridField F;      // n components on the functions grid G+
    GridField u;      // P applied to each error component, on G+
    GridField error;  // dbar_X Z on G, layout [j * N + a]
    // split of dbar_X Z_* (Z_* = Z + F) on G, layout [j * N + a]
    GridField I1;  // (I - S_t) dbar_X Z
    GridField I2;  // (dbar_M - dbar_X) S_t u
    GridField I3;  // S_t dbar_M u - dbar_M S_t u
    GridField I4;  // S_t Q (dbar_M - dbar_X) dbar_X Z
    GridField I5;  // S_t (defect + Q dbar_X dbar_X Z): defect correction
    GridField altered_error;
    GridField defect;  // phi - dbar_M P phi - Q dbar_M phi per component
    double identity_residual = 0.0;  // sup |sum I - altered| / sup |altered|
    double defect_norm = 0.0;        // sup |defect| / sup |error|
    double error_sup = 0.0;
    double error_c1 = 0.0;
    bool operator_limited = false;
    bool plumbing = false;
    int solver_iterations = 0;
};

// F = -S_t P dbar_X Z componentwise on G = op.forms_grid().
AlterResult alter(const EmbeddingState& st, double t, const HomotopyOperator& op, const Mollifier& moll,
                  double rho, double sigma, const IterationOptions& opt = {});

struct MapPair {
    GridField f2;  // f - id on the source grid, real values
    GridField g2;  // g - id on the target grid, real values
    GridPtr source;
    GridPtr target;
    double roundtrip = 0.0;     // sup |f(g(y)) - y|
    double contraction = 0.0;   // largest observed step ratio of the fixed-point iteration
    int max_iterations = 0;
    std::size_t unconverged = 0;  // target points outside D_{rho(1-sigma)} that did not converge
    double f2_origin = 0.0;     // max of |f2(0)| and its first central differences at 0
    double g2_origin = 0.0;
};

using RealMap = std::function<void(const double* x, double* y)>;

struct PointInverse {
    int iterations = 0;
    double ratio = 0.0;
    bool converged = false;
};

// Solve x + f2(x) = y by x <- y - f2(x).
PointInverse invert_point(const RealMap& f2, int dim, const double* y, double* x, int max_iter = 100,
                          double tol = 1e-12);

// Inverse of f = id + f2 on every point of f2's grid; f2 off the lattice by second-order resampling.
// Precondition |f2|_{rho,1} <= sigma/5 over dom.mask.
MapPair invert_map(const GridField& f2, const Domain& dom, double sigma, const IterationOptions& opt = {});

struct TaylorStrip {
    std::vector<cplx> K0;    // [j]
    std::vector<cplx> Ka;    // [j * N + a], coefficient of z^a
    std::vector<cplx> Kab;   // [j * N + a], coefficient of zbar^a
    std::vector<cplx> Kn;    // [j]
    double fit_residual = 0.0;
};

struct RenormResult {
    EmbeddingState state;  // on the same support, radius rho(1 - 2 sigma)
    MapPair pair;
    TaylorStrip taylor;
    GridField Zstar;       // Z + F + E on the support
    double F_c1 = 0.0;
    double f2_c1 = 0.0;
    double frame_change = 0.0;  // sup |(Df X) z' - delta|
    double error_origin = 0.0;  // |dbar_{X1} Z1(0)|
    bool nesting = false;       // D_{rho(1-2sigma)}(h1) inside D_{rho(1-sigma)}(h)
};

RenormResult renormalize(const EmbeddingState& st, const GridField& F, double sigma,
                         const IterationOptions& opt = {});

struct SequenceParams {
    double rho0 = 1.0;
    double sigma0 = 1.0 / 25.0;
    double t0 = 3e-3;
    double kappa = 1.2;
    double s = 2.0;
    double k = 1.0;
    int max_steps = 5;
    // stop once t_j < min_t_factor * spacing
    double min_t_factor = 1e-9;
    // off: inductive-hypothesis failures become "hypothesis:" flags and the run continues
    bool enforce_hypotheses = true;
    std::vector<double> delta_orders{0.0, 1.0};
    std::vector<double> n_orders{0.0, 1.0, 2.0, 3.0};
};

struct StepRecord {
    int j = 0;
    double rho = 0.0, sigma = 0.0, t = 0.0, log_t = 0.0;
    std::map<double, double> delta;  // order -> |dbar_X Z|_a on the mask
    std::map<double, double> N;      // order -> 1 + |h|_a
    double error_origin = 0.0;
    double defect = 0.0;
    double identity_residual = 0.0;
    double F_c1 = 0.0;
    double f2_c1 = 0.0;
    double roundtrip = 0.0;
    double contraction = 0.0;
    bool nesting = true;
    double h_change2 = 0.0;        // |h_{j+1} - h_j|_2 on the new mask
    double h_change_log_ratio = 0.0;  // log of h_change2 / (K_j(2) N_j(3) t_j^{s-1})
    double composition_jacobian = 0.0;  // sup |D g~_j|
    double product_bound = 0.0;         // prod (1 + |D g_i - I|_0)
    std::size_t mask_points = 0;
    std::vector<std::string> flags;
};

struct Trajectory {
    std::vector<StepRecord> steps;  // states 0..J; the last one has no step applied
    EmbeddingState final_state;
    std::string halted;  // reason
};

// Alter + renormalize with rho_{j+1} = rho_j (1 - 5 sigma_j), sigma_{j+1} = sigma_j / 5, t_{j+1} = t_j^kappa.
Trajectory run_sequence(const EmbeddingState& initial, const SequenceParams& params, const Mollifier& moll,
                        const IterationOptions& opt = {}, std::ostream* log = nullptr);

std::string to_json_line(const StepRecord& r);

}  // namespace crlab
