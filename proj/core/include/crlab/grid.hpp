#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

namespace crlab {

using cplx = std::complex<double>;
using Point = std::vector<double>;

// Regular box lattice, possibly anisotropic.
struct Lattice {
    int dim = 0;
    std::vector<int> n;
    std::vector<double> lo;
    std::vector<double> step;

    static std::shared_ptr<const Lattice> cube(int dim, int points, double half_width);
    static std::shared_ptr<const Lattice> box(std::vector<int> n, std::vector<double> lo,
                                              std::vector<double> step);

    std::int64_t size() const;
    std::int64_t flat(const int* k) const;
    void unflat(std::int64_t f, int* k) const;
    void coords(const int* k, double* x) const;
    void coords_flat(std::int64_t f, double* x) const;
    double min_step() const;
    double max_step() const;
    // multi-index of the lattice point nearest to x; false if x lies outside the box
    bool nearest(const double* x, int* k) const;
    bool inside(const double* x, double tol = 1e-12) const;
};

using LatticePtr = std::shared_ptr<const Lattice>;

// Finite subset of lattice points with axis-neighbour tables.
class Grid {
public:
    Grid(LatticePtr lat, std::vector<std::int64_t> flats);

    static std::shared_ptr<const Grid> from_predicate(LatticePtr lat,
                                                      const std::function<bool(const double*)>& pred);
    static std::shared_ptr<const Grid> full(LatticePtr lat);

    const Lattice& lattice() const { return *lat_; }
    const LatticePtr& lattice_ptr() const { return lat_; }
    int dim() const { return lat_->dim; }
    std::size_t size() const { return flats_.size(); }
    std::int64_t flat(std::size_t i) const { return flats_[i]; }
    const std::vector<std::int64_t>& flats() const { return flats_; }
    int index_of(std::int64_t flat) const;
    bool contains(std::int64_t flat) const { return index_of(flat) >= 0; }
    // dir = -1 or +1; returns -1 when absent
    int neighbor(std::size_t i, int axis, int dir) const {
        return nbr_[i * 2 * dim() + 2 * axis + (dir > 0 ? 1 : 0)];
    }
    void point(std::size_t i, double* x) const { lat_->coords_flat(flats_[i], x); }
    Point point(std::size_t i) const;
    void multi(std::size_t i, int* k) const { lat_->unflat(flats_[i], k); }
    int index_of_origin() const;

    std::shared_ptr<const Grid> interior() const;
    std::shared_ptr<const Grid> dilate(int layers) const;
    std::shared_ptr<const Grid> subset(const std::function<bool(std::size_t)>& keep) const;
    bool subset_of(const Grid& other) const;

private:
    LatticePtr lat_;
    std::vector<std::int64_t> flats_;
    std::unordered_map<std::int64_t, int> index_;
    std::vector<int> nbr_;
};

using GridPtr = std::shared_ptr<const Grid>;

// Complex multi-component samples on a Grid; layout [point * comps + comp].
// NaN marks an undefined value (e.g. a derivative without neighbours).
struct GridField {
    GridPtr grid;
    int comps = 1;
    std::vector<cplx> v;

    GridField() = default;
    GridField(GridPtr g, int c, cplx fill = 0.0);

    std::size_t size() const { return grid ? grid->size() : 0; }
    cplx& at(std::size_t i, int c = 0) { return v[i * comps + c]; }
    const cplx& at(std::size_t i, int c = 0) const { return v[i * comps + c]; }

    GridField component(int c) const;
    void set_component(int c, const GridField& f);

    GridField& operator+=(const GridField& o);
    GridField& operator-=(const GridField& o);
    GridField& operator*=(cplx s);
};

GridField operator+(GridField a, const GridField& b);
GridField operator-(GridField a, const GridField& b);
GridField operator*(cplx s, GridField a);

bool is_defined(cplx z);

GridField sample(GridPtr g, int comps, const std::function<void(const double*, cplx*)>& f);
GridField sample_scalar(GridPtr g, const std::function<cplx(const double*)>& f);

// Derivative along an axis on the same grid: central where both neighbours are defined,
// first-order one-sided where only one is, NaN otherwise.
GridField diff(const GridField& u, int axis);
// Central derivative evaluated at the points of `out`; every point needs both neighbours in u.
GridField diff_central(const GridField& u, int axis, const GridPtr& out);

GridField restrict_to(const GridField& u, const GridPtr& sub);
// Fills points of `super` missing from u by layered linear extrapolation along axes.
GridField extend(const GridField& u, const GridPtr& super);

// Multilinear interpolation; missing cell corners are dropped and weights renormalised.
void interpolate(const GridField& u, const double* x, cplx* out);
cplx interpolate_scalar(const GridField& u, const double* x);

// sup over points of the Euclidean norm across components; NaN points skipped
double sup_norm(const GridField& u);
double value_at_origin_norm(const GridField& u);

}  // namespace crlab
