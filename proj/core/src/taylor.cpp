#include "crlab/taylor.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "crlab/errors.hpp"
#include "crlab/holder.hpp"

namespace crlab {

namespace {

// rows: offsets in lattice units scaled by step; values: comps per row
TaylorFit fit_rows(const std::vector<std::vector<double>>& xs, const std::vector<std::vector<cplx>>& vals, int dim,
                   int comps, double scale) {
    const int nq = dim * (dim + 1) / 2;
    const int nc = 1 + dim + nq;
    const int rows = static_cast<int>(xs.size());
    if (rows < nc) throw ResolutionError("taylor fit: stencil smaller than the quadratic model");
    Eigen::MatrixXd M(rows, nc);
    Eigen::MatrixXd R(rows, 2 * comps);
    for (int r = 0; r < rows; ++r) {
        const auto& x = xs[r];
        int col = 0;
        M(r, col++) = 1.0;
        for (int k = 0; k < dim; ++k) M(r, col++) = x[k] / scale;
        for (int k = 0; k < dim; ++k)
            for (int l = k; l < dim; ++l) M(r, col++) = x[k] * x[l] / (scale * scale);
        for (int c = 0; c < comps; ++c) {
            R(r, 2 * c) = vals[r][c].real();
            R(r, 2 * c + 1) = vals[r][c].imag();
        }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
    if (qr.rank() < nc) throw ResolutionError("taylor fit: degenerate stencil");
    Eigen::MatrixXd S = qr.solve(R);
    Eigen::MatrixXd res = M * S - R;

    TaylorFit fit;
    fit.dim = dim;
    fit.comps = comps;
    fit.points = rows;
    fit.residual = std::sqrt(res.squaredNorm() / std::max(1, rows * comps));
    fit.value.resize(comps);
    fit.grad.resize(static_cast<std::size_t>(comps) * dim);
    fit.hess.resize(static_cast<std::size_t>(comps) * dim * dim);
    for (int c = 0; c < comps; ++c) {
        auto coef = [&](int col) { return cplx(S(col, 2 * c), S(col, 2 * c + 1)); };
        fit.value[c] = coef(0);
        for (int k = 0; k < dim; ++k) fit.grad[c * dim + k] = coef(1 + k) / scale;
        int col = 1 + dim;
        for (int k = 0; k < dim; ++k)
            for (int l = k; l < dim; ++l, ++col) {
                cplx q = coef(col) / (scale * scale);
                if (k == l) {
                    fit.hess[(c * dim + k) * dim + k] = 2.0 * q;
                } else {
                    fit.hess[(c * dim + k) * dim + l] = q;
                    fit.hess[(c * dim + l) * dim + k] = q;
                }
            }
    }
    return fit;
}

template <class Visit>
void ball_offsets(int dim, int radius, Visit&& visit) {
    std::vector<int> k(dim, -radius);
    while (true) {
        int r2 = 0;
        for (int a : k) r2 += a * a;
        if (r2 <= radius * radius) visit(k);
        int d = 0;
        while (d < dim && ++k[d] > radius) k[d++] = -radius;
        if (d == dim) break;
    }
}

}  // namespace

TaylorFit fit_taylor(const GridField& u, int radius) {
    const auto& lat = u.grid->lattice();
    const int dim = lat.dim;
    int o = u.grid->index_of_origin();
    if (o < 0) throw CoverageError("taylor fit: grid does not contain the origin");
    std::vector<int> k0(dim), k(dim);
    u.grid->multi(o, k0.data());
    std::vector<std::vector<double>> xs;
    std::vector<std::vector<cplx>> vals;
    ball_offsets(dim, radius, [&](const std::vector<int>& off) {
        for (int d = 0; d < dim; ++d) {
            k[d] = k0[d] + off[d];
            if (k[d] < 0 || k[d] >= lat.n[d]) return;
        }
        int i = u.grid->index_of(lat.flat(k.data()));
        if (i < 0) return;
        std::vector<cplx> v(u.comps);
        for (int c = 0; c < u.comps; ++c) {
            v[c] = u.at(i, c);
            if (!is_defined(v[c])) return;
        }
        std::vector<double> x(dim);
        lat.coords(k.data(), x.data());
        xs.push_back(std::move(x));
        vals.push_back(std::move(v));
    });
    return fit_rows(xs, vals, dim, u.comps, lat.max_step() * radius);
}

TaylorFit fit_taylor(const std::function<void(const double*, cplx*)>& f, int dim, int comps, double spacing,
                     int radius) {
    std::vector<std::vector<double>> xs;
    std::vector<std::vector<cplx>> vals;
    ball_offsets(dim, radius, [&](const std::vector<int>& off) {
        std::vector<double> x(dim);
        for (int d = 0; d < dim; ++d) x[d] = spacing * off[d];
        std::vector<cplx> v(comps);
        f(x.data(), v.data());
        xs.push_back(std::move(x));
        vals.push_back(std::move(v));
    });
    return fit_rows(xs, vals, dim, comps, spacing * radius);
}

}  // namespace crlab

namespace crlab {

TaylorResampler::TaylorResampler(const GridField& u) : u_(u), dim_(u.grid->dim()) {
    const Grid& g = *u.grid;
    auto tower = derivative_tower(u, 2);
    d1_ = std::move(tower[1]);
    d2_ = std::move(tower[2]);
    pair_.assign(dim_ * dim_, -1);
    auto idx = multi_indices(dim_, 2);
    for (std::size_t m = 0; m < idx.size(); ++m) {
        pair_[idx[m][0] * dim_ + idx[m][1]] = static_cast<int>(m);
        pair_[idx[m][1] * dim_ + idx[m][0]] = static_cast<int>(m);
    }

}

int TaylorResampler::anchor(const double* x) const {
    const Grid& g = *u_.grid;
    const Lattice& lat = g.lattice();
    std::vector<int> k(dim_);
    bool in = true;
    for (int a = 0; a < dim_; ++a) {
        long q = std::lround((x[a] - lat.lo[a]) / lat.step[a]);
        if (q < 0 || q >= lat.n[a]) in = false;
        k[a] = static_cast<int>(std::clamp<long>(q, 0, lat.n[a] - 1));
    }
    if (in) {
        int j = g.index_of(lat.flat(k.data()));
        if (j >= 0) return j;
    }
    double best = std::numeric_limits<double>::infinity();
    int bj = -1;
    std::vector<double> p(dim_);
    for (std::size_t j = 0; j < g.size(); ++j) {
        g.point(j, p.data());
        double s = 0.0;
        for (int a = 0; a < dim_; ++a) s += (p[a] - x[a]) * (p[a] - x[a]);
        if (s < best) {
            best = s;
            bj = static_cast<int>(j);
        }
    }
    if (bj < 0) throw CoverageError("resampling grid is empty");
    return bj;
}

void TaylorResampler::eval(const double* x, cplx* value, cplx* grad) const {
    const int j = anchor(x);
    std::vector<double> p(dim_), dx(dim_);
    u_.grid->point(j, p.data());
    for (int a = 0; a < dim_; ++a) dx[a] = x[a] - p[a];
    // derivatives that have no stencil at the node count as zero
    auto at = [&](const GridField& f, int c) {
        cplx v = f.at(j, c);
        return is_defined(v) ? v : cplx(0.0);
    };
    for (int c = 0; c < u_.comps; ++c) {
        cplx v = u_.at(j, c);
        for (int k = 0; k < dim_; ++k) {
            cplx gk = at(d1_[k], c);
            for (int l = 0; l < dim_; ++l) gk += 0.5 * at(d2_[pair_[k * dim_ + l]], c) * dx[l];
            v += gk * dx[k];
            if (grad) {
                cplx gg = at(d1_[k], c);
                for (int l = 0; l < dim_; ++l) gg += at(d2_[pair_[k * dim_ + l]], c) * dx[l];
                grad[c * dim_ + k] = gg;
            }
        }
        value[c] = v;
    }
}

}  // namespace crlab
