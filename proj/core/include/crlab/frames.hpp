#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "crlab/domain.hpp"
#include "crlab/grid.hpp"

namespace crlab {

// Real coordinates: axes 2a, 2a+1 carry z^a (a < N = n-1), axis 2N carries x^n.
inline int cr_n(int dim) { return (dim + 1) / 2; }
inline int cr_dim(int n) { return 2 * n - 1; }

// Complex vector fields X_a = sum_j c_a^j d/dx_j, coefficients at [a * dim + j].
using FrameFn = std::function<void(const double* x, cplx* c)>;

// A CR structure given by explicit (1,0) fields.
struct Structure {
    std::string name;
    int dim = 3;
    FrameFn X;
};

// names: "quadric", "cubic-bump", "random-integrable(<seed>)"
Structure make_structure(const std::string& name, int dim, double amplitude = -1.0);

// Adapted frame over the embedding Z = (z', x^n + i(|z'|^2 + h)) on dom.support().
struct EmbeddingState {
    int n = 2;
    Domain dom;
    GridField X;  // N*dim coefficients, adapted: X_a z^b = delta
};

// Coefficients relative to the tangential basis: X_a = Y_a + A_a^bbar Y_bbar + B_a d_n
struct Frame {
    int n = 2;
    GridField A;  // [a * N + b]
    GridField B;  // [a]
};

// Z components on the support: z^a, then z^n
GridField embedding(const Domain& dom);

// w_a with Y_a = d_a + w_a d_n, w_a = -(zbar^a + h_a)/(i + h_n); on the support
GridField tangential_w(const Domain& dom);
// coefficient field (N*dim) of Y_a
GridField tangential_basis(const Domain& dom);

// X_a u (conj = false) or X_abar u (conj = true) on `out`, for every component of u.
// Component layout of the result: [c * N + a].
GridField apply_fields(const GridField& fields, const GridField& u, bool conj, const GridPtr& out);

// Increasing index tuples of length q from {0..N-1}; a (0,q)-form has one component per tuple.
const std::vector<std::vector<int>>& form_indices(int N, int q);
int form_size(int N, int q);

enum class DbarKind { M, X };

// (0,q) -> (0,q+1) with the antisymmetrised expansion over the (0,1) fields conj(fields)
GridField dbar_fields(const GridField& phi, int q, const GridField& fields, const GridPtr& out);
GridField dbar(DbarKind kind, const GridField& phi, int q, const EmbeddingState& st, const GridPtr& out);

// X_abar z^j on `out`, layout [j * N + a]
GridField error_form(const EmbeddingState& st, const GridPtr& out);
inline GridField error_form(const EmbeddingState& st) { return error_form(st, st.dom.mask); }
// components j*N .. j*N+N-1 as a (0,1)-form
GridField error_component(const GridField& err, int j, int N);

// Pointwise X -> (X z)^{-1} X; DegenerateError if X z is singular.
GridField adapt(const GridField& fields, int n);

Frame frame_coefficients(const EmbeddingState& st);

// max |X_a z^b - delta| over the mask, X applied by lattice differences
double adaptedness_residual(const EmbeddingState& st);

// sup |proj_perp [X_a, X_b]| over a<b and points of `out`, relative to sup of the two terms X_a X_b, X_b X_a
double integrability_residual(const GridField& fields, int n, const GridPtr& out);

struct LeviReport {
    Eigen::MatrixXcd g;
    Eigen::VectorXd eigenvalues;
    double asymmetry = 0.0;  // |g - g*| before symmetrisation
    bool positive = false;
};

// g_ab(0) = i * (d_n component of [X_a, X_bbar](0)), from stencil-fitted Taylor data
LeviReport levi_form(const GridField& fields, int n);
LeviReport levi_form(const FrameFn& f, int dim, double spacing = 1e-3);

struct NormalizationReport {
    Eigen::MatrixXd L1;      // real linear map sending X(0) to d_a
    Eigen::MatrixXd linear;  // total linear part of the coordinate change
    Eigen::MatrixXcd S;      // z' -> S z' Levi step
    Eigen::MatrixXcd levi_before;
    std::vector<double> quadratic;  // q^i_kl, i-major, symmetric in k,l
    double quadratic_residual = 0.0;
    int m = 0;
};

// Polynomial coordinate change T(x) = y + q(y), y = linear * x
struct CoordinateChange {
    int dim = 0;
    Eigen::MatrixXd linear;
    std::vector<double> q;  // [(i * dim + k) * dim + l]

    void apply(const double* x, double* y) const;
    // Jacobian of T at x, row-major dim*dim
    void jacobian(const double* x, double* J) const;
    // Newton solve T(x) = y
    void inverse(const double* y, double* x) const;
};

// Coordinates in which X(0) = d_a, adapted, g(0) = 2 delta, A and B - i zbar vanish to second order.
struct Normalized {
    EmbeddingState state;
    CoordinateChange T;
    FrameFn fields;  // adapted frame in the new coordinates, off-lattice
    NormalizationReport report;
};

Normalized normalize_initial(const FrameFn& raw, int dim, const LatticePtr& lat, int m = 4, double rho = 1.0,
                             int halo = 2);

// Adapted frame of a structure sampled directly on a domain over the quadric (h = 0).
EmbeddingState state_from_structure(const FrameFn& raw, int dim, const LatticePtr& lat, double rho = 1.0,
                                    int halo = 2);
// Same, with every lattice point kept in the support (no mask restriction).
EmbeddingState state_on_box(const FrameFn& raw, int dim, const LatticePtr& lat, double rho = 1.0);

// Lattice scaled by rho on z' and rho^2 on x^n.
LatticePtr dilated_lattice(const Lattice& lat, double rho);
// Inverse image of `target` under the dilation.
LatticePtr source_lattice(const Lattice& target, double rho);

// Non-isotropic dilation onto the scaled lattice; mask recomputed at target_rho.
EmbeddingState dilate(const EmbeddingState& st, double rho, double target_rho = -1.0);

}  // namespace crlab
