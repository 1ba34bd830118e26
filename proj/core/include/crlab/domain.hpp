#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "crlab/constants.hpp"
#include "crlab/grid.hpp"
#include "crlab/holder.hpp"

namespace crlab {

// Sublevel set {|x|^2 + h <= rho^2} on a lattice; h is kept on the mask plus a halo.
struct Domain {
    int dim = 0;
    double rho = 1.0;
    LatticePtr lattice;
    GridField h;  // real values, on the support grid
    double spacing = 0.0;
    GridPtr mask;

    const GridPtr& support() const { return h.grid; }
};

using RealFn = std::function<double(const double*)>;

// bounding box [-sqrt2 * rho, sqrt2 * rho]^dim
LatticePtr default_lattice(int dim, double rho, int points);
int default_resolution(int dim);

// Flood fill from the origin over {psi <= rho^2}; h sampled on the mask dilated by `halo`.
Domain make_domain(LatticePtr lat, double rho, const RealFn& h, int halo = 2);
// Same, with h already sampled on a support grid containing the origin.
Domain make_domain(const GridField& h_on_support, double rho);
// New scale over the same h (mask recomputed inside the existing support).
Domain with_rho(const Domain& dom, double rho);

double psi(const double* x, const Domain& dom);

// Points of the support where psi <= r^2, connected to the origin.
GridPtr sublevel_mask(const GridField& h, double r);

struct InclusionReport {
    bool pass = false;
    bool inner_ok = false;
    bool outer_ok = false;
    double c2 = 0.0;
    // radii of the boundary {psi = rho^2} measured along rays
    double inner_radius = 0.0;
    double outer_radius = 0.0;
    // nearest lattice point outside the mask, farthest lattice point inside
    double lattice_inner = 0.0;
    double lattice_outer = 0.0;
};

// Geometry only; no hypothesis check on h.
InclusionReport measure_inclusions(const Domain& dom);
InclusionReport check_inclusions(const Domain& dom, const EstimateConstants& k = {});

struct DistanceReport {
    double distance = 0.0;
    bool bound_ok = false;
    std::size_t inner_points = 0;
    std::size_t outer_points = 0;
};

// Crossing points of {psi = r^2} on lattice edges of the support.
std::vector<Point> boundary_crossings(const Domain& dom, double r);

// Geometry only; no hypothesis check on h.
DistanceReport measure_distance(const Domain& dom, double sigma, const EstimateConstants& k = {});
DistanceReport boundary_distance(const Domain& dom, double sigma, const EstimateConstants& k = {});

double c2_norm(const Domain& dom);

// Random quadratic-plus-cubic graph function vanishing to second order at 0.
RealFn random_graph_function(int dim, std::uint64_t seed);

// Domain for lambda * h with lambda chosen so that ||lambda h||_2 on the support is at most c2_target.
Domain scaled_domain(LatticePtr lat, double rho, const RealFn& h, double c2_target, int halo = 2);

}  // namespace crlab
