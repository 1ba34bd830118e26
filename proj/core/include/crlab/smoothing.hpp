#pragma once

#include <vector>

#include "crlab/grid.hpp"

namespace crlab {

// Tensor product of 1D kernels chi1(z) = p(z/a) b(z/a) / a on [-a, a], a = 1/sqrt(dim),
// p even of degree 2 m_order, b(s) = exp(-1/(1-s^2)).
// Sampled at 2R+1 nodes; p is solved so the sampled moments of order 0..2m are exactly 1,0,...,0.
struct Mollifier {
    int dim = 1;
    int m_order = 4;
    int R = 8;
    double half_width = 1.0;
    std::vector<double> poly;     // coefficient of s^(2j)
    std::vector<double> nodes;    // z_q
    std::vector<double> weights;  // quadrature weight of chi1 at z_q
    std::vector<double> dweights; // same for chi1'

    double density(double z) const;
    double density_derivative(double z) const;
    // sum over the tensor kernel lattice of z^I * weight
    double moment(const std::vector<int>& I) const;
};

Mollifier build_mollifier(int dim, int m_order = 4, int R = 8);

enum class Boundary { Shrink, Renormalize };

struct SmoothOptions {
    // margin check t < rho*sigma/c_hat_margin; skipped when sigma <= 0
    double rho = 1.0;
    double sigma = 0.0;
    double c_hat_margin = 3.5355339059327378;
    Boundary boundary = Boundary::Shrink;
};

// 1D stencil on integer lattice offsets for x -> x - t z along one axis
std::vector<std::pair<int, double>> axis_stencil(const Mollifier& m, double t, double step);

GridField smooth(const GridField& u, double t, const Mollifier& m, const SmoothOptions& opt = {});

// [S_t, w d_n] u through the integrated-by-parts kernel; d_n is the last axis
GridField commutator(const GridField& u, const GridField& w, double t, const Mollifier& m,
                     const SmoothOptions& opt = {});

// S_t(w u_n) - w (S_t u)_n with lattice differences, for cross-checks
GridField commutator_by_difference(const GridField& u, const GridField& w, double t, const Mollifier& m,
                                   const SmoothOptions& opt = {});

struct CommutatorFit {
    double lhs = 0.0;       // sup |v|
    double skeleton = 0.0;  // sup |grad w| t^alpha H_alpha(u)
    double constant = 0.0;
};

CommutatorFit commutator_constant(const GridField& u, const GridField& w, double t, const Mollifier& m,
                                  double alpha = 0.5, const SmoothOptions& opt = {});

}  // namespace crlab
