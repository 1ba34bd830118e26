#include "crlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crlab/errors.hpp"

namespace crlab {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const cplx kUndef{kNaN, kNaN};
}  // namespace

LatticePtr Lattice::cube(int dim, int points, double half_width) {
    if (dim < 1 || points < 2) throw Error("lattice needs dim >= 1 and >= 2 points per axis");
    double h = 2.0 * half_width / (points - 1);
    return box(std::vector<int>(dim, points), std::vector<double>(dim, -half_width),
               std::vector<double>(dim, h));
}

LatticePtr Lattice::box(std::vector<int> n, std::vector<double> lo, std::vector<double> step) {
    auto lat = std::make_shared<Lattice>();
    lat->dim = static_cast<int>(n.size());
    lat->n = std::move(n);
    lat->lo = std::move(lo);
    lat->step = std::move(step);
    return lat;
}

std::int64_t Lattice::size() const {
    std::int64_t s = 1;
    for (int a : n) s *= a;
    return s;
}

std::int64_t Lattice::flat(const int* k) const {
    std::int64_t f = 0;
    for (int d = 0; d < dim; ++d) f = f * n[d] + k[d];
    return f;
}

void Lattice::unflat(std::int64_t f, int* k) const {
    for (int d = dim - 1; d >= 0; --d) {
        k[d] = static_cast<int>(f % n[d]);
        f /= n[d];
    }
}

void Lattice::coords(const int* k, double* x) const {
    for (int d = 0; d < dim; ++d) x[d] = lo[d] + step[d] * k[d];
}

void Lattice::coords_flat(std::int64_t f, double* x) const {
    for (int d = dim - 1; d >= 0; --d) {
        int k = static_cast<int>(f % n[d]);
        f /= n[d];
        x[d] = lo[d] + step[d] * k;
    }
}

double Lattice::min_step() const { return *std::min_element(step.begin(), step.end()); }
double Lattice::max_step() const { return *std::max_element(step.begin(), step.end()); }

bool Lattice::nearest(const double* x, int* k) const {
    for (int d = 0; d < dim; ++d) {
        double r = (x[d] - lo[d]) / step[d];
        long q = std::lround(r);
        if (q < 0 || q >= n[d]) return false;
        k[d] = static_cast<int>(q);
    }
    return true;
}

bool Lattice::inside(const double* x, double tol) const {
    for (int d = 0; d < dim; ++d) {
        double r = (x[d] - lo[d]) / step[d];
        if (r < -tol || r > n[d] - 1 + tol) return false;
    }
    return true;
}

Grid::Grid(LatticePtr lat, std::vector<std::int64_t> flats) : lat_(std::move(lat)), flats_(std::move(flats)) {
    std::sort(flats_.begin(), flats_.end());
    flats_.erase(std::unique(flats_.begin(), flats_.end()), flats_.end());
    index_.reserve(flats_.size() * 2);
    for (std::size_t i = 0; i < flats_.size(); ++i) index_.emplace(flats_[i], static_cast<int>(i));
    const int d = lat_->dim;
    nbr_.assign(flats_.size() * 2 * d, -1);
    std::vector<int> k(d);
    for (std::size_t i = 0; i < flats_.size(); ++i) {
        lat_->unflat(flats_[i], k.data());
        for (int a = 0; a < d; ++a) {
            for (int s = 0; s < 2; ++s) {
                int kk = k[a] + (s ? 1 : -1);
                if (kk < 0 || kk >= lat_->n[a]) continue;
                int save = k[a];
                k[a] = kk;
                nbr_[i * 2 * d + 2 * a + s] = index_of(lat_->flat(k.data()));
                k[a] = save;
            }
        }
    }
}

GridPtr Grid::from_predicate(LatticePtr lat, const std::function<bool(const double*)>& pred) {
    std::vector<std::int64_t> flats;
    std::vector<double> x(lat->dim);
    const std::int64_t total = lat->size();
    for (std::int64_t f = 0; f < total; ++f) {
        lat->coords_flat(f, x.data());
        if (pred(x.data())) flats.push_back(f);
    }
    return std::make_shared<Grid>(std::move(lat), std::move(flats));
}

GridPtr Grid::full(LatticePtr lat) {
    std::vector<std::int64_t> flats(lat->size());
    for (std::int64_t f = 0; f < lat->size(); ++f) flats[f] = f;
    return std::make_shared<Grid>(std::move(lat), std::move(flats));
}

int Grid::index_of(std::int64_t flat) const {
    auto it = index_.find(flat);
    return it == index_.end() ? -1 : it->second;
}

Point Grid::point(std::size_t i) const {
    Point x(dim());
    point(i, x.data());
    return x;
}

int Grid::index_of_origin() const {
    std::vector<double> zero(dim(), 0.0);
    std::vector<int> k(dim());
    if (!lat_->nearest(zero.data(), k.data())) return -1;
    std::vector<double> x(dim());
    lat_->coords(k.data(), x.data());
    for (double c : x)
        if (std::abs(c) > 1e-9 * lat_->max_step()) return -1;
    return index_of(lat_->flat(k.data()));
}

GridPtr Grid::interior() const {
    std::vector<std::int64_t> keep;
    const int d = dim();
    for (std::size_t i = 0; i < size(); ++i) {
        bool ok = true;
        for (int j = 0; j < 2 * d && ok; ++j) ok = nbr_[i * 2 * d + j] >= 0;
        if (ok) keep.push_back(flats_[i]);
    }
    return std::make_shared<Grid>(lat_, std::move(keep));
}

GridPtr Grid::dilate(int layers) const {
    std::vector<std::int64_t> cur = flats_;
    std::unordered_map<std::int64_t, char> seen;
    seen.reserve(cur.size() * 4);
    for (auto f : cur) seen.emplace(f, 1);
    std::vector<std::int64_t> front = cur;
    const int d = dim();
    std::vector<int> k(d);
    for (int l = 0; l < layers; ++l) {
        std::vector<std::int64_t> next;
        for (auto f : front) {
            lat_->unflat(f, k.data());
            for (int a = 0; a < d; ++a) {
                for (int s = -1; s <= 1; s += 2) {
                    int kk = k[a] + s;
                    if (kk < 0 || kk >= lat_->n[a]) continue;
                    int save = k[a];
                    k[a] = kk;
                    std::int64_t g = lat_->flat(k.data());
                    k[a] = save;
                    if (seen.emplace(g, 1).second) next.push_back(g);
                }
            }
        }
        cur.insert(cur.end(), next.begin(), next.end());
        front = std::move(next);
    }
    return std::make_shared<Grid>(lat_, std::move(cur));
}

GridPtr Grid::subset(const std::function<bool(std::size_t)>& keep) const {
    std::vector<std::int64_t> out;
    for (std::size_t i = 0; i < size(); ++i)
        if (keep(i)) out.push_back(flats_[i]);
    return std::make_shared<Grid>(lat_, std::move(out));
}

bool Grid::subset_of(const Grid& other) const {
    for (auto f : flats_)
        if (!other.contains(f)) return false;
    return true;
}

GridField::GridField(GridPtr g, int c, cplx fill) : grid(std::move(g)), comps(c), v(grid->size() * c, fill) {}

GridField GridField::component(int c) const {
    GridField out(grid, 1);
    for (std::size_t i = 0; i < size(); ++i) out.v[i] = at(i, c);
    return out;
}

void GridField::set_component(int c, const GridField& f) {
    for (std::size_t i = 0; i < size(); ++i) at(i, c) = f.v[i];
}

GridField& GridField::operator+=(const GridField& o) {
    if (o.v.size() != v.size()) throw Error("field size mismatch");
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
    return *this;
}

GridField& GridField::operator-=(const GridField& o) {
    if (o.v.size() != v.size()) throw Error("field size mismatch");
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.v[i];
    return *this;
}

GridField& GridField::operator*=(cplx s) {
    for (auto& z : v) z *= s;
    return *this;
}

GridField operator+(GridField a, const GridField& b) { return a += b; }
GridField operator-(GridField a, const GridField& b) { return a -= b; }
GridField operator*(cplx s, GridField a) { return a *= s; }

bool is_defined(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

GridField sample(GridPtr g, int comps, const std::function<void(const double*, cplx*)>& f) {
    GridField out(g, comps);
    std::vector<double> x(g->dim());
    for (std::size_t i = 0; i < g->size(); ++i) {
        g->point(i, x.data());
        f(x.data(), &out.v[i * comps]);
    }
    return out;
}

GridField sample_scalar(GridPtr g, const std::function<cplx(const double*)>& f) {
    return sample(std::move(g), 1, [&](const double* x, cplx* o) { o[0] = f(x); });
}

GridField diff(const GridField& u, int axis) {
    const Grid& g = *u.grid;
    const double h = g.lattice().step[axis];
    GridField out(u.grid, u.comps);
    for (std::size_t i = 0; i < g.size(); ++i) {
        int m = g.neighbor(i, axis, -1), p = g.neighbor(i, axis, +1);
        for (int c = 0; c < u.comps; ++c) {
            cplx ui = u.at(i, c);
            bool hm = m >= 0 && is_defined(u.at(m, c));
            bool hp = p >= 0 && is_defined(u.at(p, c));
            cplx r = kUndef;
            if (hm && hp)
                r = (u.at(p, c) - u.at(m, c)) / (2 * h);
            else if (hp && is_defined(ui))
                r = (u.at(p, c) - ui) / h;
            else if (hm && is_defined(ui))
                r = (ui - u.at(m, c)) / h;
            out.at(i, c) = r;
        }
    }
    return out;
}

GridField diff_central(const GridField& u, int axis, const GridPtr& out_grid) {
    const Grid& g = *u.grid;
    const Lattice& lat = g.lattice();
    const double h = lat.step[axis];
    GridField out(out_grid, u.comps);
    std::vector<int> k(lat.dim);
    for (std::size_t i = 0; i < out_grid->size(); ++i) {
        out_grid->multi(i, k.data());
        int save = k[axis];
        k[axis] = save + 1;
        int p = (k[axis] < lat.n[axis]) ? g.index_of(lat.flat(k.data())) : -1;
        k[axis] = save - 1;
        int m = (k[axis] >= 0) ? g.index_of(lat.flat(k.data())) : -1;
        k[axis] = save;
        if (p < 0 || m < 0) throw ResolutionError("central difference needs both neighbours in the field grid");
        for (int c = 0; c < u.comps; ++c) out.at(i, c) = (u.at(p, c) - u.at(m, c)) / (2 * h);
    }
    return out;
}

GridField restrict_to(const GridField& u, const GridPtr& sub) {
    GridField out(sub, u.comps);
    for (std::size_t i = 0; i < sub->size(); ++i) {
        int j = u.grid->index_of(sub->flat(i));
        if (j < 0) throw CoverageError("restrict_to: target point missing from source grid");
        for (int c = 0; c < u.comps; ++c) out.at(i, c) = u.at(j, c);
    }
    return out;
}

GridField extend(const GridField& u, const GridPtr& super) {
    GridField out(super, u.comps, kUndef);
    const std::size_t N = super->size();
    std::vector<char> known(N, 0);
    std::vector<std::size_t> unknown;
    for (std::size_t i = 0; i < N; ++i) {
        int j = u.grid->index_of(super->flat(i));
        if (j >= 0) {
            known[i] = 1;
            for (int c = 0; c < u.comps; ++c) out.at(i, c) = u.at(j, c);
        } else {
            unknown.push_back(i);
        }
    }
    const int d = super->dim();
    std::vector<cplx> acc(u.comps), near(u.comps);
    while (!unknown.empty()) {
        std::vector<std::pair<std::size_t, std::vector<cplx>>> layer;
        std::vector<std::size_t> rest;
        for (std::size_t i : unknown) {
            int cnt = 0, ncnt = 0;
            std::fill(acc.begin(), acc.end(), 0.0);
            std::fill(near.begin(), near.end(), 0.0);
            for (int a = 0; a < d; ++a) {
                for (int s = -1; s <= 1; s += 2) {
                    int q1 = super->neighbor(i, a, s);
                    if (q1 < 0 || !known[q1]) continue;
                    ++ncnt;
                    for (int c = 0; c < u.comps; ++c) near[c] += out.at(q1, c);
                    int q2 = super->neighbor(q1, a, s);
                    if (q2 < 0 || !known[q2]) continue;
                    ++cnt;
                    for (int c = 0; c < u.comps; ++c) acc[c] += 2.0 * out.at(q1, c) - out.at(q2, c);
                }
            }
            if (cnt > 0) {
                for (auto& z : acc) z /= double(cnt);
                layer.emplace_back(i, acc);
            } else if (ncnt > 0) {
                for (auto& z : near) z /= double(ncnt);
                layer.emplace_back(i, near);
            } else {
                rest.push_back(i);
            }
        }
        if (layer.empty()) throw CoverageError("extend: target grid not connected to source grid");
        for (auto& [i, val] : layer) {
            known[i] = 1;
            for (int c = 0; c < u.comps; ++c) out.at(i, c) = val[c];
        }
        unknown = std::move(rest);
    }
    return out;
}

void interpolate(const GridField& u, const double* x, cplx* out) {
    const Grid& g = *u.grid;
    const Lattice& lat = g.lattice();
    const int d = lat.dim;
    if (!lat.inside(x, 1e-9)) throw OutOfDomain("interpolation point outside the bounding lattice");
    int base[16];
    double frac[16];
    for (int a = 0; a < d; ++a) {
        double r = (x[a] - lat.lo[a]) / lat.step[a];
        int b = static_cast<int>(std::floor(r));
        if (b >= lat.n[a] - 1) b = lat.n[a] - 2;
        if (b < 0) b = 0;
        base[a] = b;
        frac[a] = std::clamp(r - b, 0.0, 1.0);
    }
    for (int c = 0; c < u.comps; ++c) out[c] = 0.0;
    double wsum = 0.0;
    int k[16];
    const int corners = 1 << d;
    for (int m = 0; m < corners; ++m) {
        double w = 1.0;
        for (int a = 0; a < d; ++a) {
            int bit = (m >> a) & 1;
            w *= bit ? frac[a] : 1.0 - frac[a];
            k[a] = base[a] + bit;
        }
        if (w == 0.0) continue;
        int j = g.index_of(lat.flat(k));
        if (j < 0 || !is_defined(u.at(j, 0))) continue;
        wsum += w;
        for (int c = 0; c < u.comps; ++c) out[c] += w * u.at(j, c);
    }
    if (wsum < 1e-12) {
        // fall back to the nearest available corner
        double best = 2.0;
        int bj = -1;
        for (int m = 0; m < corners; ++m) {
            double dist = 0.0;
            for (int a = 0; a < d; ++a) {
                int bit = (m >> a) & 1;
                k[a] = base[a] + bit;
                double df = bit ? 1.0 - frac[a] : frac[a];
                dist += df * df;
            }
            int j = g.index_of(lat.flat(k));
            if (j >= 0 && is_defined(u.at(j, 0)) && dist < best) {
                best = dist;
                bj = j;
            }
        }
        if (bj < 0) throw CoverageError("interpolation cell has no samples");
        for (int c = 0; c < u.comps; ++c) out[c] = u.at(bj, c);
        return;
    }
    for (int c = 0; c < u.comps; ++c) out[c] /= wsum;
}

cplx interpolate_scalar(const GridField& u, const double* x) {
    cplx r;
    if (u.comps != 1) {
        std::vector<cplx> tmp(u.comps);
        interpolate(u, x, tmp.data());
        return tmp[0];
    }
    interpolate(u, x, &r);
    return r;
}

double sup_norm(const GridField& u) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        double q = 0.0;
        bool ok = true;
        for (int c = 0; c < u.comps; ++c) {
            cplx z = u.at(i, c);
            if (!is_defined(z)) {
                ok = false;
                break;
            }
            q += std::norm(z);
        }
        if (ok) s = std::max(s, std::sqrt(q));
    }
    return s;
}

double value_at_origin_norm(const GridField& u) {
    int o = u.grid->index_of_origin();
    if (o < 0) throw CoverageError("grid does not contain the origin");
    double q = 0.0;
    for (int c = 0; c < u.comps; ++c) q += std::norm(u.at(o, c));
    return std::sqrt(q);
}

}  // namespace crlab
