#include "crlab/domain.hpp"

#include <cmath>
#include <algorithm>
#include <deque>
#include <limits>
#include <random>
#include <unordered_map>

#include "crlab/errors.hpp"

namespace crlab {

namespace {

double norm2(const double* x, int d) {
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += x[a] * x[a];
    return s;
}

}  // namespace

LatticePtr default_lattice(int dim, double rho, int points) {
    if (points % 2 == 0) throw Error("resolution must be odd so the origin is a lattice point");
    return Lattice::cube(dim, points, std::sqrt(2.0) * rho);
}

int default_resolution(int dim) { return dim <= 3 ? 33 : (dim <= 5 ? 17 : 9); }

Domain make_domain(LatticePtr lat, double rho, const RealFn& h, int halo) {
    const int d = lat->dim;
    std::vector<double> zero(d, 0.0), x(d);
    std::vector<int> k(d);
    if (!lat->nearest(zero.data(), k.data())) throw OutOfDomain("origin outside lattice");
    lat->coords(k.data(), x.data());
    if (norm2(x.data(), d) > 1e-18) throw Error("origin is not a lattice point");
    std::unordered_map<std::int64_t, char> seen;
    std::vector<std::int64_t> mask;
    std::deque<std::int64_t> queue;
    std::int64_t f0 = lat->flat(k.data());
    seen[f0] = 1;
    queue.push_back(f0);
    while (!queue.empty()) {
        std::int64_t f = queue.front();
        queue.pop_front();
        lat->coords_flat(f, x.data());
        if (norm2(x.data(), d) + h(x.data()) > rho * rho) continue;
        mask.push_back(f);
        lat->unflat(f, k.data());
        for (int a = 0; a < d; ++a) {
            for (int s = -1; s <= 1; s += 2) {
                int kk = k[a] + s;
                if (kk < 0 || kk >= lat->n[a]) continue;
                int save = k[a];
                k[a] = kk;
                std::int64_t g = lat->flat(k.data());
                k[a] = save;
                if (seen.emplace(g, 1).second) queue.push_back(g);
            }
        }
    }
    Domain dom;
    dom.dim = d;
    dom.rho = rho;
    dom.lattice = lat;
    dom.spacing = lat->max_step();
    dom.mask = std::make_shared<Grid>(lat, std::move(mask));
    auto support = dom.mask->dilate(halo);
    dom.h = sample_scalar(support, [&](const double* p) { return cplx(h(p), 0.0); });
    return dom;
}

GridPtr sublevel_mask(const GridField& h, double r) {
    const Grid& g = *h.grid;
    int o = g.index_of_origin();
    if (o < 0) throw CoverageError("support grid does not contain the origin");
    const int d = g.dim();
    std::vector<char> seen(g.size(), 0);
    std::vector<double> x(d);
    std::vector<std::int64_t> out;
    std::deque<int> queue{o};
    seen[o] = 1;
    while (!queue.empty()) {
        int i = queue.front();
        queue.pop_front();
        g.point(i, x.data());
        if (norm2(x.data(), d) + h.at(i).real() > r * r) continue;
        out.push_back(g.flat(i));
        for (int a = 0; a < d; ++a)
            for (int s = -1; s <= 1; s += 2) {
                int j = g.neighbor(i, a, s);
                if (j >= 0 && !seen[j]) {
                    seen[j] = 1;
                    queue.push_back(j);
                }
            }
    }
    return std::make_shared<Grid>(g.lattice_ptr(), std::move(out));
}

Domain make_domain(const GridField& h_on_support, double rho) {
    Domain dom;
    dom.dim = h_on_support.grid->dim();
    dom.rho = rho;
    dom.lattice = h_on_support.grid->lattice_ptr();
    dom.spacing = dom.lattice->max_step();
    dom.h = h_on_support;
    dom.mask = sublevel_mask(h_on_support, rho);
    return dom;
}

Domain with_rho(const Domain& dom, double rho) { return make_domain(dom.h, rho); }

double psi(const double* x, const Domain& dom) {
    if (!dom.lattice->inside(x, 1e-9)) throw OutOfDomain("psi evaluated outside the bounding lattice");
    return norm2(x, dom.dim) + interpolate_scalar(dom.h, x).real();
}

double c2_norm(const Domain& dom) {
    GridField hr(dom.h.grid, 1);
    for (std::size_t i = 0; i < hr.size(); ++i) hr.v[i] = dom.h.v[i].real();
    return norm(hr, 2.0);
}

InclusionReport measure_inclusions(const Domain& dom) {
    InclusionReport rep;
    const Grid& sup = *dom.support();
    const int d = dom.dim;
    std::vector<double> x(d);
    rep.lattice_outer = 0.0;
    rep.lattice_inner = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sup.size(); ++i) {
        sup.point(i, x.data());
        double r = std::sqrt(norm2(x.data(), d));
        if (dom.mask->contains(sup.flat(i)))
            rep.lattice_outer = std::max(rep.lattice_outer, r);
        else
            rep.lattice_inner = std::min(rep.lattice_inner, r);
    }
    // boundary radius along rays through the mask's edge points
    const double R2 = dom.rho * dom.rho;
    rep.inner_radius = std::numeric_limits<double>::infinity();
    rep.outer_radius = 0.0;
    const Grid& m = *dom.mask;
    std::vector<double> y(d);
    for (std::size_t i = 0; i < m.size(); ++i) {
        bool edge = false;
        for (int a = 0; a < d && !edge; ++a)
            for (int s = -1; s <= 1; s += 2)
                if (m.neighbor(i, a, s) < 0) edge = true;
        if (!edge) continue;
        m.point(i, x.data());
        double r0 = std::sqrt(norm2(x.data(), d));
        if (r0 == 0.0) continue;
        auto f = [&](double r) {
            for (int a = 0; a < d; ++a) y[a] = x[a] * r / r0;
            return psi(y.data(), dom) - R2;
        };
        double lo = r0, hi = r0 + dom.spacing;
        try {
            if (f(lo) > 0) continue;
            int grow = 0;
            while (f(hi) <= 0 && grow < 8) {
                hi += dom.spacing;
                ++grow;
            }
            if (f(hi) <= 0) continue;
        } catch (const Error&) {
            continue;
        }
        for (int it = 0; it < 80; ++it) {
            double mid = 0.5 * (lo + hi);
            (f(mid) <= 0 ? lo : hi) = mid;
        }
        double r = 0.5 * (lo + hi);
        rep.inner_radius = std::min(rep.inner_radius, r);
        rep.outer_radius = std::max(rep.outer_radius, r);
    }
    rep.inner_ok = rep.lattice_inner > std::sqrt(2.0 / 3.0) * dom.rho;
    rep.outer_ok = rep.lattice_outer <= std::sqrt(2.0) * dom.rho;
    rep.pass = rep.inner_ok && rep.outer_ok;
    return rep;
}

InclusionReport check_inclusions(const Domain& dom, const EstimateConstants& k) {
    double c2 = c2_norm(dom);
    if (c2 >= k.gamma0) throw HypothesisViolation("h small in C2", "||h||_2 = " + std::to_string(c2) + " >= gamma0");
    auto rep = measure_inclusions(dom);
    rep.c2 = c2;
    return rep;
}

std::vector<Point> boundary_crossings(const Domain& dom, double r) {
    const Grid& sup = *dom.support();
    auto inside = sublevel_mask(dom.h, r);
    const int d = dom.dim;
    const double R2 = r * r;
    std::vector<Point> out;
    std::vector<double> x(d);
    for (std::size_t i = 0; i < sup.size(); ++i) {
        bool in_i = inside->contains(sup.flat(i));
        for (int a = 0; a < d; ++a) {
            int p = sup.neighbor(i, a, +1);
            if (p < 0) continue;
            bool in_p = inside->contains(sup.flat(p));
            if (in_i == in_p) continue;
            // psi is quadratic along the edge since h is linear there
            sup.point(i, x.data());
            const double hstep = sup.lattice().step[a];
            double h0 = dom.h.at(i).real(), h1 = dom.h.at(p).real();
            double A = hstep * hstep;
            double B = 2.0 * hstep * x[a] + (h1 - h0);
            double C = norm2(x.data(), d) + h0 - R2;
            double disc = B * B - 4 * A * C;
            if (disc < 0) continue;
            double sq = std::sqrt(disc);
            double best = -1.0;
            for (double s : {(-B - sq) / (2 * A), (-B + sq) / (2 * A)})
                if (s >= -1e-12 && s <= 1 + 1e-12) best = (best < 0 ? s : best);
            if (best < 0) continue;
            Point q(x.begin(), x.end());
            q[a] += std::clamp(best, 0.0, 1.0) * hstep;
            out.push_back(std::move(q));
        }
    }
    return out;
}

DistanceReport measure_distance(const Domain& dom, double sigma, const EstimateConstants& k) {
    if (!(sigma > 0.0 && sigma < 1.0)) throw Error("sigma must lie in (0,1)");
    const double r_in = dom.rho * (1.0 - sigma);
    if (sublevel_mask(dom.h, r_in)->size() <= 1) throw DegenerateError("inner sublevel set below lattice resolution");
    auto inner = boundary_crossings(dom, r_in);
    auto outer = boundary_crossings(dom, dom.rho);
    if (inner.empty() || outer.empty()) throw DegenerateError("empty sublevel boundary on the lattice");
    const int d = dom.dim;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : inner)
        for (const auto& q : outer) {
            double s = 0.0;
            for (int a = 0; a < d; ++a) s += (p[a] - q[a]) * (p[a] - q[a]);
            best = std::min(best, s);
        }
    DistanceReport rep;
    rep.distance = std::sqrt(best);
    rep.bound_ok = dom.rho * sigma <= k.c_hat * rep.distance;
    rep.inner_points = inner.size();
    rep.outer_points = outer.size();
    return rep;
}

DistanceReport boundary_distance(const Domain& dom, double sigma, const EstimateConstants& k) {
    if (c2_norm(dom) >= 0.5) throw HypothesisViolation("h small in C2", "||h||_2 >= 1/2");
    return measure_distance(dom, sigma, k);
}

RealFn random_graph_function(int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> q(dim * dim, 0.0), c(dim * dim * dim, 0.0);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) q[i * dim + j] = nd(rng);
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j)
            for (int k = j; k < dim; ++k) c[(i * dim + j) * dim + k] = nd(rng);
    return [dim, q, c](const double* x) {
        double r = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = i; j < dim; ++j) {
                r += q[i * dim + j] * x[i] * x[j];
                for (int k = j; k < dim; ++k) r += c[(i * dim + j) * dim + k] * x[i] * x[j] * x[k];
            }
        return r;
    };
}

Domain scaled_domain(LatticePtr lat, double rho, const RealFn& h, double c2_target, int halo) {
    double lambda = 0.0;
    // norm is homogeneous in h, but the mask moves with lambda, so iterate
    Domain probe = make_domain(lat, rho, [&](const double* x) { return 1e-3 * h(x); }, halo);
    double c = c2_norm(probe) / 1e-3;
    if (c == 0.0) return make_domain(lat, rho, h, halo);
    lambda = c2_target / c;
    for (int it = 0; it < 20; ++it) {
        Domain d = make_domain(lat, rho, [&](const double* x) { return lambda * h(x); }, halo);
        double m = c2_norm(d);
        if (m <= c2_target * (1 + 1e-12)) return d;
        lambda *= 0.98 * c2_target / m;
    }
    throw Error("scaled_domain: could not reach the requested C2 size");
}

}  // namespace crlab
