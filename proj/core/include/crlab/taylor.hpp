#pragma once

#include <functional>
#include <vector>

#include "crlab/grid.hpp"

namespace crlab {

// Quadratic Taylor data at the origin: u ~ value + grad.x + x.hess.x / 2
struct TaylorFit {
    int dim = 0;
    int comps = 0;
    std::vector<cplx> value;  // [c]
    std::vector<cplx> grad;   // [c * dim + k]
    std::vector<cplx> hess;   // [(c * dim + k) * dim + l]
    double residual = 0.0;    // rms misfit over the stencil
    std::size_t points = 0;

    cplx d(int c, int k) const { return grad[c * dim + k]; }
};

// Least-squares quadratic fit over lattice points within `radius` cells of the origin.
TaylorFit fit_taylor(const GridField& u, int radius = 3);

// Same fit for a callable sampled on a local cube lattice of the given spacing.
TaylorFit fit_taylor(const std::function<void(const double*, cplx*)>& f, int dim, int comps, double spacing,
                     int radius = 3);

}  // namespace crlab

namespace crlab {

// Off-lattice evaluation by a second-order expansion of lattice data around the nearest node.
// Quadratic data is reproduced exactly where the difference stencils are central (two layers inside);
// elsewhere the error is proportional to the distance from the node.
class TaylorResampler {
public:
    explicit TaylorResampler(const GridField& u);

    int comps() const { return u_.comps; }
    int dim() const { return dim_; }
    // value[c]; grad[c * dim + k] when non-null
    void eval(const double* x, cplx* value, cplx* grad = nullptr) const;
    // grid index of the node nearest to x
    int anchor(const double* x) const;

private:
    GridField u_;
    int dim_ = 0;
    std::vector<GridField> d1_;
    std::vector<GridField> d2_;  // pairs k <= l
    std::vector<int> pair_;      // [k * dim + l] -> index into d2_
};

}  // namespace crlab
