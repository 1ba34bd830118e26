#include "crlab/smoothing.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

#include "crlab/errors.hpp"
#include "crlab/holder.hpp"

namespace crlab {

namespace {

double bump(double s) {
    double q = 1.0 - s * s;
    return q <= 0.0 ? 0.0 : std::exp(-1.0 / q);
}

double bump_derivative(double s) {
    double q = 1.0 - s * s;
    return q <= 0.0 ? 0.0 : bump(s) * (-2.0 * s / (q * q));
}

double poly_value(const std::vector<double>& c, double s) {
    double r = 0.0, p = 1.0;
    for (double cj : c) {
        r += cj * p;
        p *= s * s;
    }
    return r;
}

double poly_derivative(const std::vector<double>& c, double s) {
    double r = 0.0;
    for (std::size_t j = 1; j < c.size(); ++j) r += c[j] * 2.0 * j * std::pow(s, 2 * j - 1);
    return r;
}

void check_margin(double t, const SmoothOptions& opt) {
    if (!(t > 0.0)) throw SupportViolation("smoothing parameter must be positive");
    if (opt.sigma > 0.0 && !(t < opt.rho * opt.sigma / opt.c_hat_margin))
        throw SupportViolation("t = " + std::to_string(t) + " violates the support margin rho*sigma/c_hat");
}

// one axis pass of a 1D stencil
GridField axis_pass(const GridField& u, int axis, const std::vector<std::pair<int, double>>& st, Boundary mode) {
    const Grid& g = *u.grid;
    const int omin = st.front().first, omax = st.back().first;
    std::vector<int> line(omax - omin + 1);
    std::vector<char> keep(g.size(), 1);
    std::vector<cplx> out(g.size() * u.comps);
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::fill(line.begin(), line.end(), -1);
        line[-omin] = static_cast<int>(i);
        int j = static_cast<int>(i);
        for (int o = 1; o <= omax && j >= 0; ++o) {
            j = g.neighbor(j, axis, +1);
            if (j >= 0) line[o - omin] = j;
        }
        j = static_cast<int>(i);
        for (int o = -1; o >= omin && j >= 0; --o) {
            j = g.neighbor(j, axis, -1);
            if (j >= 0) line[o - omin] = j;
        }
        for (int c = 0; c < u.comps; ++c) {
            cplx acc = 0.0;
            double wsum = 0.0;
            bool full = true;
            for (const auto& [o, w] : st) {
                int q = line[o - omin];
                if (q < 0 || !is_defined(u.at(q, c))) {
                    full = false;
                    continue;
                }
                acc += w * u.at(q, c);
                wsum += w;
            }
            if (mode == Boundary::Shrink) {
                if (!full) keep[i] = 0;
                out[i * u.comps + c] = acc;
            } else {
                out[i * u.comps + c] = (full ? acc : (wsum >= 0.5 ? acc / wsum : u.at(i, c)));
            }
        }
    }
    if (mode == Boundary::Renormalize) {
        GridField r(u.grid, u.comps);
        r.v = std::move(out);
        return r;
    }
    auto sub = g.subset([&](std::size_t i) { return keep[i] != 0; });
    GridField r(sub, u.comps);
    for (std::size_t k = 0; k < sub->size(); ++k) {
        int i = g.index_of(sub->flat(k));
        for (int c = 0; c < u.comps; ++c) r.at(k, c) = out[i * u.comps + c];
    }
    return r;
}

struct AxisInterp {
    int lo = 0, hi = 0;  // block offsets covered
    std::vector<int> base;
    std::vector<double> frac;
};

// apply per-axis 2-point interpolation along `axis` of a row-major block
std::vector<cplx> interp_axis(const std::vector<cplx>& in, std::vector<int>& shape, int axis, const AxisInterp& ai) {
    const int d = static_cast<int>(shape.size());
    std::size_t outer = 1, inner = 1;
    for (int a = 0; a < axis; ++a) outer *= shape[a];
    for (int a = axis + 1; a < d; ++a) inner *= shape[a];
    const int B = shape[axis];
    const int T = static_cast<int>(ai.base.size());
    std::vector<cplx> out(outer * T * inner);
    for (std::size_t o = 0; o < outer; ++o)
        for (int t = 0; t < T; ++t) {
            const int b0 = ai.base[t] - ai.lo;
            const double f = ai.frac[t];
            const cplx* s0 = &in[(o * B + b0) * inner];
            const cplx* s1 = s0 + inner;
            cplx* dst = &out[(o * T + t) * inner];
            for (std::size_t k = 0; k < inner; ++k) dst[k] = (1.0 - f) * s0[k] + f * s1[k];
        }
    shape[axis] = T;
    return out;
}

}  // namespace

double Mollifier::density(double z) const {
    double s = z / half_width;
    return poly_value(poly, s) * bump(s) / half_width;
}

double Mollifier::density_derivative(double z) const {
    double s = z / half_width;
    return (poly_derivative(poly, s) * bump(s) + poly_value(poly, s) * bump_derivative(s)) / (half_width * half_width);
}

double Mollifier::moment(const std::vector<int>& I) const {
    // the kernel is a product, but the sum is taken over the full tensor lattice on purpose
    const int d = dim;
    const int Q = static_cast<int>(nodes.size());
    std::vector<int> q(d, 0);
    double total = 0.0;
    while (true) {
        double w = 1.0, mono = 1.0;
        for (int a = 0; a < d; ++a) {
            w *= weights[q[a]];
            mono *= std::pow(nodes[q[a]], a < static_cast<int>(I.size()) ? I[a] : 0);
        }
        total += w * mono;
        int a = 0;
        while (a < d && ++q[a] == Q) q[a++] = 0;
        if (a == d) break;
    }
    return total;
}

Mollifier build_mollifier(int dim, int m_order, int R) {
    if (m_order < 1 || dim < 1 || R < 2) throw Error("mollifier needs m_order >= 1, dim >= 1, R >= 2");
    Mollifier m;
    m.dim = dim;
    m.m_order = m_order;
    m.R = R;
    m.half_width = 1.0 / std::sqrt(double(dim));
    const double ds = 1.0 / R;
    std::vector<double> s(2 * R + 1);
    for (int q = -R; q <= R; ++q) s[q + R] = q * ds;
    // even moments of the sampled bump
    const int M = m_order + 1;
    std::vector<double> mom(2 * M);
    for (int k = 0; k < 2 * M; ++k) {
        double acc = 0.0;
        for (double sq : s) acc += ds * bump(sq) * std::pow(sq, 2 * k);
        mom[k] = acc;
    }
    Eigen::MatrixXd A(M, M);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(M);
    rhs(0) = 1.0;
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) A(i, j) = mom[i + j];
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible()) throw Error("mollifier moment system is singular");
    Eigen::VectorXd c = lu.solve(rhs);
    m.poly.assign(c.data(), c.data() + M);
    for (double sq : s) {
        m.nodes.push_back(sq * m.half_width);
        m.weights.push_back(ds * poly_value(m.poly, sq) * bump(sq));
        m.dweights.push_back(ds * (poly_derivative(m.poly, sq) * bump(sq) + poly_value(m.poly, sq) * bump_derivative(sq)) /
                             m.half_width);
    }
    return m;
}

std::vector<std::pair<int, double>> axis_stencil(const Mollifier& m, double t, double step) {
    std::map<int, double> acc;
    for (std::size_t q = 0; q < m.nodes.size(); ++q) {
        if (m.weights[q] == 0.0) continue;
        double pos = -t * m.nodes[q] / step;
        double base = std::floor(pos);
        double f = pos - base;
        int b = static_cast<int>(base);
        acc[b] += m.weights[q] * (1.0 - f);
        if (f > 0.0) acc[b + 1] += m.weights[q] * f;
    }
    std::vector<std::pair<int, double>> out;
    for (auto& [o, w] : acc)
        if (w != 0.0) out.emplace_back(o, w);
    return out;
}

GridField smooth(const GridField& u, double t, const Mollifier& m, const SmoothOptions& opt) {
    check_margin(t, opt);
    if (m.dim != u.grid->dim()) throw Error("mollifier dimension differs from field dimension");
    GridField cur = u;
    for (int a = 0; a < u.grid->dim(); ++a) {
        auto st = axis_stencil(m, t, u.grid->lattice().step[a]);
        cur = axis_pass(cur, a, st, opt.boundary);
        if (cur.size() == 0) throw SupportViolation("smoothing stencil leaves the grid everywhere");
    }
    return cur;
}

GridField commutator(const GridField& u, const GridField& w, double t, const Mollifier& m, const SmoothOptions& opt) {
    check_margin(t, opt);
    const Grid& g = *u.grid;
    const Lattice& lat = g.lattice();
    const int d = lat.dim;
    if (u.comps != 1 || w.comps != 1) throw Error("commutator works on scalar fields");
    if (w.grid != u.grid) throw Error("commutator needs u and w on the same grid");
    GridField wn = diff(w, d - 1);
    const int Q = static_cast<int>(m.nodes.size());
    std::vector<AxisInterp> ai(d);
    for (int a = 0; a < d; ++a) {
        ai[a].lo = 1 << 30;
        ai[a].hi = -(1 << 30);
        for (int q = 0; q < Q; ++q) {
            double pos = -t * m.nodes[q] / lat.step[a];
            int b = static_cast<int>(std::floor(pos));
            ai[a].base.push_back(b);
            ai[a].frac.push_back(pos - b);
            ai[a].lo = std::min(ai[a].lo, b);
            ai[a].hi = std::max(ai[a].hi, b + 1);
        }
    }
    std::vector<int> bshape(d);
    std::size_t bsize = 1;
    for (int a = 0; a < d; ++a) {
        bshape[a] = ai[a].hi - ai[a].lo + 1;
        bsize *= bshape[a];
    }
    // tap weights over the tensor kernel lattice, row-major in (q_0..q_{d-1})
    std::size_t T = 1;
    for (int a = 0; a < d; ++a) T *= Q;
    std::vector<double> W(T), Wn(T);
    {
        std::vector<int> q(d, 0);
        for (std::size_t idx = 0; idx < T; ++idx) {
            std::size_t r = idx;
            for (int a = d - 1; a >= 0; --a) {
                q[a] = static_cast<int>(r % Q);
                r /= Q;
            }
            double base = 1.0;
            for (int a = 0; a < d - 1; ++a) base *= m.weights[q[a]];
            W[idx] = base * m.weights[q[d - 1]];
            Wn[idx] = base * m.dweights[q[d - 1]];
        }
    }
    std::vector<char> keep(g.size(), 0);
    std::vector<cplx> val(g.size());
    std::vector<int> k(d), kk(d), bi(d);
    std::vector<cplx> bu(bsize), bw(bsize), bwn(bsize);
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.multi(i, k.data());
        bool ok = true;
        std::fill(bi.begin(), bi.end(), 0);
        for (std::size_t b = 0; b < bsize && ok; ++b) {
            for (int a = 0; a < d; ++a) {
                kk[a] = k[a] + ai[a].lo + bi[a];
                if (kk[a] < 0 || kk[a] >= lat.n[a]) ok = false;
            }
            if (ok) {
                int j = g.index_of(lat.flat(kk.data()));
                if (j < 0 || !is_defined(u.at(j)) || !is_defined(wn.at(j)))
                    ok = false;
                else {
                    bu[b] = u.at(j);
                    bw[b] = w.at(j);
                    bwn[b] = wn.at(j);
                }
            }
            for (int a = d - 1; a >= 0; --a) {
                if (++bi[a] < bshape[a]) break;
                bi[a] = 0;
            }
        }
        if (!ok) continue;
        std::vector<int> s1 = bshape, s2 = bshape, s3 = bshape;
        std::vector<cplx> tu = bu, tw = bw, twn = bwn;
        for (int a = 0; a < d; ++a) {
            tu = interp_axis(tu, s1, a, ai[a]);
            tw = interp_axis(tw, s2, a, ai[a]);
            twn = interp_axis(twn, s3, a, ai[a]);
        }
        const cplx u0 = u.at(i), w0 = w.at(i);
        cplx acc = 0.0;
        for (std::size_t q = 0; q < T; ++q) acc += (Wn[q] / t * (tw[q] - w0) - W[q] * twn[q]) * (tu[q] - u0);
        keep[i] = 1;
        val[i] = acc;
    }
    auto sub = g.subset([&](std::size_t i) { return keep[i] != 0; });
    if (sub->size() == 0) throw SupportViolation("commutator stencil leaves the grid everywhere");
    GridField out(sub, 1);
    for (std::size_t j = 0; j < sub->size(); ++j) out.v[j] = val[g.index_of(sub->flat(j))];
    return out;
}

GridField commutator_by_difference(const GridField& u, const GridField& w, double t, const Mollifier& m,
                                   const SmoothOptions& opt) {
    const int d = u.grid->dim();
    GridField un = diff(u, d - 1);
    GridField wun = un;
    for (std::size_t i = 0; i < wun.size(); ++i) wun.v[i] *= w.v[i];
    GridField a = smooth(wun, t, m, opt);
    GridField su = smooth(u, t, m, opt);
    auto inner = su.grid->interior();
    GridField dsu = diff_central(su, d - 1, inner);
    GridField out(inner, 1);
    for (std::size_t i = 0; i < inner->size(); ++i) {
        int ia = a.grid->index_of(inner->flat(i));
        int iw = w.grid->index_of(inner->flat(i));
        out.v[i] = a.v[ia] - w.v[iw] * dsu.v[i];
    }
    return out;
}

CommutatorFit commutator_constant(const GridField& u, const GridField& w, double t, const Mollifier& m, double alpha,
                                  const SmoothOptions& opt) {
    CommutatorFit fit;
    GridField v = commutator(u, w, t, m, opt);
    fit.lhs = sup_norm(v);
    const int d = w.grid->dim();
    double gw = 0.0;
    std::vector<GridField> dw;
    for (int a = 0; a < d; ++a) dw.push_back(diff(w, a));
    for (std::size_t i = 0; i < w.size(); ++i) {
        double q = 0.0;
        for (int a = 0; a < d; ++a) q += std::norm(dw[a].v[i]);
        if (std::isfinite(q)) gw = std::max(gw, std::sqrt(q));
    }
    fit.skeleton = gw * std::pow(t, alpha) * holder_seminorm(u, alpha);
    fit.constant = fit.skeleton > 0 ? fit.lhs / fit.skeleton : 0.0;
    return fit;
}

}  // namespace crlab
