#include "crlab/frames.hpp"

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <random>

#include "crlab/errors.hpp"
#include "crlab/taylor.hpp"

namespace crlab {

namespace {

const cplx I1(0.0, 1.0);

int fields_N(const GridField& fields) {
    const int dim = fields.grid->dim();
    return fields.comps / dim;
}

std::vector<GridField> gradient(const GridField& u) {
    std::vector<GridField> g;
    for (int a = 0; a < u.grid->dim(); ++a) g.push_back(diff(u, a));
    return g;
}

int index_in(const Grid& g, std::int64_t flat, const char* what) {
    int j = g.index_of(flat);
    if (j < 0) throw CoverageError(std::string(what) + ": point missing from field grid");
    return j;
}

}  // namespace

GridField embedding(const Domain& dom) {
    const int dim = dom.dim, n = cr_n(dim), N = n - 1;
    const auto& g = dom.support();
    GridField Z(g, n);
    std::vector<double> x(dim);
    for (std::size_t i = 0; i < g->size(); ++i) {
        g->point(i, x.data());
        double r2 = 0.0;
        for (int a = 0; a < N; ++a) {
            Z.at(i, a) = cplx(x[2 * a], x[2 * a + 1]);
            r2 += x[2 * a] * x[2 * a] + x[2 * a + 1] * x[2 * a + 1];
        }
        Z.at(i, N) = cplx(x[2 * N], r2 + dom.h.at(i).real());
    }
    return Z;
}

GridField tangential_w(const Domain& dom) {
    const int dim = dom.dim, N = cr_n(dim) - 1;
    const auto& g = dom.support();
    auto dh = gradient(dom.h);
    GridField w(g, N);
    std::vector<double> x(dim);
    for (std::size_t i = 0; i < g->size(); ++i) {
        g->point(i, x.data());
        cplx hn = dh[2 * N].at(i).real();
        cplx rn = I1 + hn;
        if (std::abs(rn) < 1e-6) throw DegenerateError("defining function: |r_n| vanishes");
        for (int a = 0; a < N; ++a) {
            cplx ha = 0.5 * (dh[2 * a].at(i).real() - I1 * dh[2 * a + 1].at(i).real());
            cplx zbar(x[2 * a], -x[2 * a + 1]);
            w.at(i, a) = -(zbar + ha) / rn;
        }
    }
    return w;
}

GridField tangential_basis(const Domain& dom) {
    const int dim = dom.dim, N = cr_n(dim) - 1;
    auto w = tangential_w(dom);
    GridField Y(dom.support(), N * dim);
    for (std::size_t i = 0; i < Y.size(); ++i)
        for (int a = 0; a < N; ++a) {
            Y.at(i, a * dim + 2 * a) = 0.5;
            Y.at(i, a * dim + 2 * a + 1) = -0.5 * I1;
            Y.at(i, a * dim + 2 * N) = w.at(i, a);
        }
    return Y;
}

GridField apply_fields(const GridField& fields, const GridField& u, bool conj, const GridPtr& out) {
    const int dim = u.grid->dim(), N = fields_N(fields);
    auto du = gradient(u);
    GridField r(out, u.comps * N);
    for (std::size_t i = 0; i < out->size(); ++i) {
        const std::int64_t f = out->flat(i);
        int iu = index_in(*u.grid, f, "apply_fields");
        int ic = index_in(*fields.grid, f, "apply_fields");
        for (int a = 0; a < N; ++a)
            for (int c = 0; c < u.comps; ++c) {
                cplx s = 0.0;
                for (int j = 0; j < dim; ++j) {
                    cplx k = fields.at(ic, a * dim + j);
                    if (k == cplx(0.0)) continue;
                    s += (conj ? std::conj(k) : k) * du[j].at(iu, c);
                }
                r.at(i, c * N + a) = s;
            }
    }
    return r;
}

const std::vector<std::vector<int>>& form_indices(int N, int q) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::vector<std::vector<int>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(N, q);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<std::vector<int>> out;
    if (q >= 0 && q <= N) {
        std::vector<int> t(q);
        for (int i = 0; i < q; ++i) t[i] = i;
        while (true) {
            out.push_back(t);
            int i = q - 1;
            while (i >= 0 && t[i] == N - q + i) --i;
            if (i < 0) break;
            ++t[i];
            for (int j = i + 1; j < q; ++j) t[j] = t[j - 1] + 1;
        }
    }
    return cache.emplace(key, std::move(out)).first->second;
}

int form_size(int N, int q) { return static_cast<int>(form_indices(N, q).size()); }

GridField dbar_fields(const GridField& phi, int q, const GridField& fields, const GridPtr& out) {
    const int dim = phi.grid->dim(), N = fields_N(fields);
    if (q < 0 || q >= N) throw Error("dbar: form degree out of range");
    const auto& src = form_indices(N, q);
    const auto& dst = form_indices(N, q + 1);
    if (phi.comps != static_cast<int>(src.size())) throw Error("dbar: component count does not match degree");
    std::map<std::vector<int>, int> pos;
    for (std::size_t k = 0; k < src.size(); ++k) pos[src[k]] = static_cast<int>(k);
    auto dphi = gradient(phi);
    GridField r(out, static_cast<int>(dst.size()));
    for (std::size_t i = 0; i < out->size(); ++i) {
        const std::int64_t f = out->flat(i);
        int ip = index_in(*phi.grid, f, "dbar");
        int ic = index_in(*fields.grid, f, "dbar");
        for (std::size_t b = 0; b < dst.size(); ++b) {
            const auto& B = dst[b];
            cplx s = 0.0;
            for (int k = 0; k <= q; ++k) {
                std::vector<int> A;
                for (int l = 0; l <= q; ++l)
                    if (l != k) A.push_back(B[l]);
                const int c = pos.at(A);
                cplx y = 0.0;
                for (int j = 0; j < dim; ++j) y += std::conj(fields.at(ic, B[k] * dim + j)) * dphi[j].at(ip, c);
                s += (k % 2 ? -1.0 : 1.0) * y;
            }
            r.at(i, b) = s;
        }
    }
    return r;
}

GridField dbar(DbarKind kind, const GridField& phi, int q, const EmbeddingState& st, const GridPtr& out) {
    if (kind == DbarKind::X) return dbar_fields(phi, q, st.X, out);
    return dbar_fields(phi, q, tangential_basis(st.dom), out);
}

GridField error_form(const EmbeddingState& st, const GridPtr& out) {
    return apply_fields(st.X, embedding(st.dom), true, out);
}

GridField error_component(const GridField& err, int j, int N) {
    GridField r(err.grid, N);
    for (std::size_t i = 0; i < err.size(); ++i)
        for (int a = 0; a < N; ++a) r.at(i, a) = err.at(i, j * N + a);
    return r;
}

GridField adapt(const GridField& fields, int n) {
    const int dim = cr_dim(n), N = n - 1;
    GridField r(fields.grid, fields.comps);
    Eigen::MatrixXcd M(N, N), C(N, dim);
    for (std::size_t i = 0; i < fields.size(); ++i) {
        for (int a = 0; a < N; ++a) {
            for (int j = 0; j < dim; ++j) C(a, j) = fields.at(i, a * dim + j);
            for (int b = 0; b < N; ++b) M(a, b) = C(a, 2 * b) + I1 * C(a, 2 * b + 1);
        }
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
        if (!(std::abs(lu.determinant()) > 1e-12)) throw DegenerateError("adapt: X z is singular");
        Eigen::MatrixXcd D = lu.solve(C);
        for (int a = 0; a < N; ++a)
            for (int j = 0; j < dim; ++j) r.at(i, a * dim + j) = D(a, j);
    }
    return r;
}

Frame frame_coefficients(const EmbeddingState& st) {
    const int dim = st.dom.dim, N = st.n - 1;
    auto w = tangential_w(st.dom);
    Frame fr;
    fr.n = st.n;
    fr.A = GridField(st.X.grid, N * N);
    fr.B = GridField(st.X.grid, N);
    for (std::size_t i = 0; i < st.X.size(); ++i) {
        int iw = index_in(*w.grid, st.X.grid->flat(i), "frame_coefficients");
        for (int a = 0; a < N; ++a) {
            cplx b = st.X.at(i, a * dim + 2 * N) - w.at(iw, a);
            for (int c = 0; c < N; ++c) {
                cplx A = st.X.at(i, a * dim + 2 * c) - I1 * st.X.at(i, a * dim + 2 * c + 1);
                fr.A.at(i, a * N + c) = A;
                b -= A * std::conj(w.at(iw, c));
            }
            fr.B.at(i, a) = b;
        }
    }
    return fr;
}

double adaptedness_residual(const EmbeddingState& st) {
    const int N = st.n - 1;
    auto xz = apply_fields(st.X, embedding(st.dom), false, st.dom.mask);
    double r = 0.0;
    for (std::size_t i = 0; i < xz.size(); ++i)
        for (int b = 0; b < N; ++b)
            for (int a = 0; a < N; ++a) r = std::max(r, std::abs(xz.at(i, b * N + a) - (a == b ? 1.0 : 0.0)));
    return r;
}

double integrability_residual(const GridField& fields, int n, const GridPtr& out) {
    const int dim = cr_dim(n), N = n - 1;
    if (N < 2) return 0.0;
    auto V = apply_fields(fields, fields, false, out);
    double worst = 0.0, top = 0.0;
    Eigen::MatrixXcd span(dim, N);
    Eigen::VectorXcd br(dim);
    for (std::size_t i = 0; i < out->size(); ++i) {
        int ic = index_in(*fields.grid, out->flat(i), "integrability_residual");
        for (int g = 0; g < N; ++g)
            for (int j = 0; j < dim; ++j) span(j, g) = fields.at(ic, g * dim + j);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(span);
        for (int a = 0; a < N; ++a)
            for (int b = a + 1; b < N; ++b) {
                double scale = 0.0;
                for (int j = 0; j < dim; ++j) {
                    cplx p = V.at(i, (b * dim + j) * N + a), m = V.at(i, (a * dim + j) * N + b);
                    br(j) = p - m;
                    scale += std::norm(p) + std::norm(m);
                }
                top = std::max(top, std::sqrt(scale));
                Eigen::VectorXcd res = span * qr.solve(br) - br;
                worst = std::max(worst, res.norm());
            }
    }
    return top > 0.0 ? worst / top : 0.0;
}

namespace {

LeviReport levi_from_fit(const TaylorFit& fit, int n) {
    const int dim = cr_dim(n), N = n - 1;
    auto c = [&](int a, int j) { return fit.value[a * dim + j]; };
    auto dc = [&](int a, int j, int k) { return fit.d(a * dim + j, k); };
    Eigen::MatrixXcd basis(dim, dim);
    for (int g = 0; g < N; ++g)
        for (int j = 0; j < dim; ++j) {
            basis(j, g) = c(g, j);
            basis(j, N + g) = std::conj(c(g, j));
        }
    for (int j = 0; j < dim; ++j) basis(j, 2 * N) = j == 2 * N ? 1.0 : 0.0;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(basis);
    if (lu.rank() < dim) throw DegenerateError("levi form: X, Xbar and d_n are dependent at 0");
    Eigen::MatrixXcd g(N, N);
    Eigen::VectorXcd br(dim);
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
            for (int j = 0; j < dim; ++j) {
                cplx s = 0.0;
                for (int k = 0; k < dim; ++k)
                    s += c(a, k) * std::conj(dc(b, j, k)) - std::conj(c(b, k)) * dc(a, j, k);
                br(j) = s;
            }
            Eigen::VectorXcd coef = lu.solve(br);
            g(a, b) = I1 * coef(2 * N);
        }
    LeviReport rep;
    rep.asymmetry = (g - g.adjoint()).norm();
    rep.g = 0.5 * (g + g.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rep.g);
    rep.eigenvalues = es.eigenvalues();
    rep.positive = rep.eigenvalues.minCoeff() > 0.0;
    return rep;
}

}  // namespace

LeviReport levi_form(const GridField& fields, int n) { return levi_from_fit(fit_taylor(fields), n); }

LeviReport levi_form(const FrameFn& f, int dim, double spacing) {
    const int n = cr_n(dim);
    return levi_from_fit(fit_taylor(f, dim, (n - 1) * dim, spacing), n);
}

void CoordinateChange::apply(const double* x, double* y) const {
    Eigen::Map<const Eigen::VectorXd> xv(x, dim);
    Eigen::VectorXd y1 = linear * xv;
    for (int i = 0; i < dim; ++i) {
        double s = y1(i);
        if (!q.empty())
            for (int k = 0; k < dim; ++k)
                for (int l = 0; l < dim; ++l) s += 0.5 * q[(i * dim + k) * dim + l] * y1(k) * y1(l);
        y[i] = s;
    }
}

void CoordinateChange::jacobian(const double* x, double* J) const {
    Eigen::Map<const Eigen::VectorXd> xv(x, dim);
    Eigen::VectorXd y1 = linear * xv;
    Eigen::MatrixXd D = Eigen::MatrixXd::Identity(dim, dim);
    if (!q.empty())
        for (int i = 0; i < dim; ++i)
            for (int k = 0; k < dim; ++k) {
                double s = 0.0;
                for (int l = 0; l < dim; ++l) s += q[(i * dim + k) * dim + l] * y1(l);
                D(i, k) += s;
            }
    Eigen::MatrixXd Jm = D * linear;
    for (int i = 0; i < dim; ++i)
        for (int k = 0; k < dim; ++k) J[i * dim + k] = Jm(i, k);
}

void CoordinateChange::inverse(const double* y, double* x) const {
    Eigen::Map<const Eigen::VectorXd> yv(y, dim);
    Eigen::VectorXd y1 = yv;
    if (!q.empty()) {
        for (int it = 0; it < 50; ++it) {
            Eigen::VectorXd r = y1 - yv;
            Eigen::MatrixXd D = Eigen::MatrixXd::Identity(dim, dim);
            for (int i = 0; i < dim; ++i)
                for (int k = 0; k < dim; ++k) {
                    double s = 0.0, t = 0.0;
                    for (int l = 0; l < dim; ++l) {
                        s += q[(i * dim + k) * dim + l] * y1(l);
                        t += q[(i * dim + k) * dim + l] * y1(k) * y1(l);
                    }
                    D(i, k) += s;
                    r(i) += 0.5 * t;
                }
            Eigen::VectorXd step = D.partialPivLu().solve(r);
            y1 -= step;
            if (step.norm() < 1e-15 * (1.0 + y1.norm())) break;
        }
    }
    Eigen::VectorXd xv = linear.partialPivLu().solve(y1);
    for (int i = 0; i < dim; ++i) x[i] = xv(i);
}

namespace {

// pushforward of the raw fields by T, adapted, evaluated at y
FrameFn transported(const FrameFn& raw, const CoordinateChange& T) {
    return [raw, T](const double* y, cplx* out) {
        const int dim = T.dim, N = cr_n(dim) - 1;
        std::vector<double> x(dim), J(dim * dim);
        T.inverse(y, x.data());
        T.jacobian(x.data(), J.data());
        std::vector<cplx> c(N * dim);
        raw(x.data(), c.data());
        Eigen::MatrixXcd M(N, N), C(N, dim);
        for (int a = 0; a < N; ++a)
            for (int i = 0; i < dim; ++i) {
                cplx s = 0.0;
                for (int k = 0; k < dim; ++k) s += J[i * dim + k] * c[a * dim + k];
                C(a, i) = s;
            }
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) M(a, b) = C(a, 2 * b) + I1 * C(a, 2 * b + 1);
        Eigen::MatrixXcd D = M.partialPivLu().solve(C);
        for (int a = 0; a < N; ++a)
            for (int i = 0; i < dim; ++i) out[a * dim + i] = D(a, i);
    };
}

Eigen::MatrixXd complex_block(const Eigen::MatrixXcd& S, int dim) {
    const int N = static_cast<int>(S.rows());
    Eigen::MatrixXd R = Eigen::MatrixXd::Identity(dim, dim);
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
            R(2 * a, 2 * b) = S(a, b).real();
            R(2 * a, 2 * b + 1) = -S(a, b).imag();
            R(2 * a + 1, 2 * b) = S(a, b).imag();
            R(2 * a + 1, 2 * b + 1) = S(a, b).real();
        }
    return R;
}

}  // namespace

Normalized normalize_initial(const FrameFn& raw, int dim, const LatticePtr& lat, int m, double rho, int halo) {
    const int n = cr_n(dim), N = n - 1;
    const double hfit = 1e-3;
    Normalized out;
    out.report.m = m;

    // linear step: X(0) -> d_a, transversal completed by a null vector
    auto fit0 = fit_taylor(raw, dim, N * dim, hfit);
    Eigen::MatrixXd tang(2 * N, dim);
    for (int a = 0; a < N; ++a)
        for (int j = 0; j < dim; ++j) {
            tang(2 * a, j) = fit0.value[a * dim + j].real();
            tang(2 * a + 1, j) = fit0.value[a * dim + j].imag();
        }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(tang, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(2 * N - 1) < 1e-8 * sv(0)) throw DegenerateError("normalize: X(0) and Xbar(0) are dependent");
    Eigen::VectorXd T = svd.matrixV().col(dim - 1);

    auto linear_for = [&](double sign) {
        Eigen::MatrixXd Linv(dim, dim);
        for (int a = 0; a < N; ++a) {
            Linv.col(2 * a) = 2.0 * tang.row(2 * a).transpose();
            Linv.col(2 * a + 1) = -2.0 * tang.row(2 * a + 1).transpose();
        }
        Linv.col(2 * N) = sign * T;
        return Eigen::MatrixXd(Linv.inverse());
    };

    CoordinateChange C1;
    C1.dim = dim;
    C1.linear = linear_for(1.0);
    auto levi = levi_form(transported(raw, C1), dim, hfit);
    if (levi.eigenvalues.maxCoeff() < 0.0) {
        C1.linear = linear_for(-1.0);
        levi = levi_form(transported(raw, C1), dim, hfit);
    }
    if (!levi.positive) throw DegenerateError("normalize: Levi form is not definite at 0");
    out.report.L1 = C1.linear;
    out.report.levi_before = levi.g;

    // Levi step z' -> S z' with S = conj(sqrt(g/2))
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(levi.g);
    Eigen::VectorXd lam = (0.5 * es.eigenvalues()).cwiseSqrt();
    Eigen::MatrixXcd root = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
    Eigen::MatrixXcd S = root.conjugate();
    out.report.S = S;
    CoordinateChange C2;
    C2.dim = dim;
    C2.linear = complex_block(S, dim) * C1.linear;

    // quadratic step: linear parts of A and of the d_n coefficient minus i zbar removed
    auto fit2 = fit_taylor(transported(raw, C2), dim, N * dim, hfit);
    const int nq = dim * dim * dim;
    auto residuals = [&](const std::vector<double>& Q, bool with_data) {
        std::vector<cplx> eq;
        for (int a = 0; a < N; ++a) {
            // Delta^i_l = 1/2 (Q^i_{2a,l} - i Q^i_{2a+1,l})
            auto delta = [&](int i, int l) {
                return 0.5 * (Q[(i * dim + 2 * a) * dim + l] - I1 * Q[(i * dim + 2 * a + 1) * dim + l]);
            };
            for (int l = 0; l < dim; ++l) {
                for (int b = 0; b < N; ++b) {
                    cplx v = delta(2 * b, l) - I1 * delta(2 * b + 1, l);
                    if (with_data) v += fit2.d(a * dim + 2 * b, l) - I1 * fit2.d(a * dim + 2 * b + 1, l);
                    eq.push_back(v);
                }
                cplx v = delta(2 * N, l);
                if (with_data) {
                    cplx target = l == 2 * a ? I1 : (l == 2 * a + 1 ? cplx(1.0) : cplx(0.0));
                    v += fit2.d(a * dim + 2 * N, l) - target;
                }
                eq.push_back(v);
            }
        }
        return eq;
    };
    std::vector<std::array<int, 3>> unknowns;
    for (int i = 0; i < dim; ++i)
        for (int k = 0; k < dim; ++k)
            for (int l = k; l < dim; ++l) unknowns.push_back({i, k, l});
    std::vector<double> Q(nq, 0.0);
    auto rhs = residuals(Q, true);
    const int neq = static_cast<int>(rhs.size());
    Eigen::MatrixXd Mq(2 * neq, unknowns.size());
    Eigen::VectorXd b(2 * neq);
    for (int e = 0; e < neq; ++e) {
        b(2 * e) = -rhs[e].real();
        b(2 * e + 1) = -rhs[e].imag();
    }
    for (std::size_t u = 0; u < unknowns.size(); ++u) {
        std::fill(Q.begin(), Q.end(), 0.0);
        auto [i, k, l] = unknowns[u];
        Q[(i * dim + k) * dim + l] = 1.0;
        Q[(i * dim + l) * dim + k] = 1.0;
        auto col = residuals(Q, false);
        for (int e = 0; e < neq; ++e) {
            Mq(2 * e, u) = col[e].real();
            Mq(2 * e + 1, u) = col[e].imag();
        }
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Mq);
    Eigen::VectorXd sol = cod.solve(b);
    out.report.quadratic_residual = (Mq * sol - b).norm();
    std::fill(Q.begin(), Q.end(), 0.0);
    for (std::size_t u = 0; u < unknowns.size(); ++u) {
        auto [i, k, l] = unknowns[u];
        Q[(i * dim + k) * dim + l] = sol(u);
        Q[(i * dim + l) * dim + k] = sol(u);
    }

    out.T.dim = dim;
    out.T.linear = C2.linear;
    out.T.q = Q;
    out.report.linear = C2.linear;
    out.report.quadratic = Q;

    auto final_fields = transported(raw, out.T);
    out.fields = final_fields;
    auto dom = make_domain(lat, rho, [](const double*) { return 0.0; }, halo);
    out.state.n = n;
    out.state.dom = dom;
    out.state.X = sample(dom.support(), N * dim, [&](const double* y, cplx* c) { final_fields(y, c); });
    return out;
}

EmbeddingState state_from_structure(const FrameFn& raw, int dim, const LatticePtr& lat, double rho, int halo) {
    const int n = cr_n(dim);
    EmbeddingState st;
    st.n = n;
    st.dom = make_domain(lat, rho, [](const double*) { return 0.0; }, halo);
    st.X = adapt(sample(st.dom.support(), (n - 1) * dim, raw), n);
    return st;
}

EmbeddingState state_on_box(const FrameFn& raw, int dim, const LatticePtr& lat, double rho) {
    const int n = cr_n(dim);
    EmbeddingState st;
    st.n = n;
    GridField h(Grid::full(lat), 1, 0.0);
    st.dom = make_domain(h, rho);
    st.X = adapt(sample(h.grid, (n - 1) * dim, raw), n);
    return st;
}

LatticePtr dilated_lattice(const Lattice& lat, double rho) {
    auto lo = lat.lo;
    auto step = lat.step;
    const int last = lat.dim - 1;
    for (int d = 0; d < lat.dim; ++d) {
        double s = d == last ? rho * rho : rho;
        lo[d] *= s;
        step[d] *= s;
    }
    return Lattice::box(lat.n, lo, step);
}

LatticePtr source_lattice(const Lattice& target, double rho) { return dilated_lattice(target, 1.0 / rho); }

EmbeddingState dilate(const EmbeddingState& st, double rho, double target_rho) {
    if (!(rho > 0.0)) throw Error("dilate: rho must be positive");
    const int dim = st.dom.dim, N = st.n - 1;
    auto lat = dilated_lattice(*st.dom.lattice, rho);
    auto sup = std::make_shared<Grid>(lat, st.dom.support()->flats());
    GridField h(sup, 1);
    for (std::size_t i = 0; i < h.size(); ++i) h.v[i] = rho * rho * st.dom.h.v[i].real();
    EmbeddingState out;
    out.n = st.n;
    out.dom = make_domain(h, target_rho > 0.0 ? target_rho : st.dom.rho);
    if (!out.dom.mask->subset_of(*sup->interior()))
        throw CoverageError("dilate: source lattice does not cover the pre-image of the target domain");
    out.X = GridField(sup, st.X.comps);
    for (std::size_t i = 0; i < sup->size(); ++i) {
        int j = index_in(*st.X.grid, sup->flat(i), "dilate");
        for (int a = 0; a < N; ++a)
            for (int k = 0; k < dim; ++k)
                out.X.at(i, a * dim + k) = st.X.at(j, a * dim + k) * (k == 2 * N ? rho : 1.0);
    }
    return out;
}

// ---- test structures ----

namespace {

struct ScalarFn {
    // value, and gradient into g
    std::function<double(const double*, double*)> f;
};

struct Monomial {
    double c;
    std::vector<int> e;
};

ScalarFn polynomial(std::vector<Monomial> terms, int dim) {
    return {[terms, dim](const double* x, double* g) {
        double v = 0.0;
        for (int k = 0; k < dim; ++k) g[k] = 0.0;
        for (const auto& t : terms) {
            double p = t.c;
            for (int k = 0; k < dim; ++k) p *= std::pow(x[k], t.e[k]);
            v += p;
            for (int k = 0; k < dim; ++k) {
                if (t.e[k] == 0) continue;
                double d = t.c * t.e[k];
                for (int l = 0; l < dim; ++l) d *= std::pow(x[l], l == k ? t.e[l] - 1 : t.e[l]);
                g[k] += d;
            }
        }
        return v;
    }};
}

ScalarFn bumped(const ScalarFn& p, int dim) {
    return {[p, dim](const double* x, double* g) {
        double r2 = 0.0;
        for (int k = 0; k < dim; ++k) r2 += x[k] * x[k];
        double e = std::exp(-r2 / 4.0);
        double v = p.f(x, g);
        for (int k = 0; k < dim; ++k) g[k] = (g[k] - 0.5 * x[k] * v) * e;
        return v * e;
    }};
}

// X = Dphi^{-1} Y^{h}(phi(x)) times a constant frame change G
FrameFn pullback(std::vector<ScalarFn> phi, ScalarFn h, Eigen::MatrixXcd G, int dim) {
    return [phi, h, G, dim](const double* x, cplx* out) {
        const int N = cr_n(dim) - 1;
        Eigen::MatrixXd J(dim, dim);
        std::vector<double> xi(dim), g(dim);
        for (int i = 0; i < dim; ++i) {
            xi[i] = phi[i].f(x, g.data());
            for (int k = 0; k < dim; ++k) J(i, k) = g[k];
        }
        h.f(xi.data(), g.data());
        cplx rn = I1 + g[2 * N];
        Eigen::MatrixXcd Y(dim, N);
        Y.setZero();
        for (int a = 0; a < N; ++a) {
            Y(2 * a, a) = 0.5;
            Y(2 * a + 1, a) = -0.5 * I1;
            cplx ha = 0.5 * (g[2 * a] - I1 * g[2 * a + 1]);
            Y(2 * N, a) = -(cplx(xi[2 * a], -xi[2 * a + 1]) + ha) / rn;
        }
        Eigen::MatrixXcd X = J.cast<cplx>().partialPivLu().solve(Y) * G.transpose();
        for (int a = 0; a < N; ++a)
            for (int j = 0; j < dim; ++j) out[a * dim + j] = X(j, a);
    };
}

std::vector<int> expo(int dim, std::initializer_list<std::pair<int, int>> p) {
    std::vector<int> e(dim, 0);
    for (auto [axis, pw] : p) e[axis] += pw;
    return e;
}

std::vector<ScalarFn> identity_map(int dim) {
    std::vector<ScalarFn> phi;
    for (int i = 0; i < dim; ++i) phi.push_back(polynomial({{1.0, expo(dim, {{i, 1}})}}, dim));
    return phi;
}

}  // namespace

Structure make_structure(const std::string& name, int dim, double amplitude) {
    if (dim < 3 || dim % 2 == 0) throw Error("structure: dim must be odd and at least 3");
    const int N = cr_n(dim) - 1, last = dim - 1;
    Structure s;
    s.name = name;
    s.dim = dim;
    if (name == "quadric") {
        s.X = [dim, N](const double* x, cplx* c) {
            for (int k = 0; k < N * dim; ++k) c[k] = 0.0;
            for (int a = 0; a < N; ++a) {
                c[a * dim + 2 * a] = 0.5;
                c[a * dim + 2 * a + 1] = -0.5 * I1;
                c[a * dim + 2 * N] = I1 * cplx(x[2 * a], -x[2 * a + 1]);
            }
        };
        return s;
    }
    if (name == "cubic-bump") {
        const double eps = amplitude > 0 ? amplitude : 0.3;
        auto p = bumped(polynomial({{1.0, expo(dim, {{0, 3}})},
                                    {1.0, expo(dim, {{0, 1}, {1, 2}})}},
                                   dim),
                        dim);
        std::vector<double> v(dim);
        double nv = 0.0;
        for (int j = 0; j < dim; ++j) nv += std::pow(v[j] = 1.0 / (j + 1), 2);
        for (auto& q : v) q /= std::sqrt(nv);
        std::vector<ScalarFn> phi;
        for (int i = 0; i < dim; ++i)
            phi.push_back({[p, eps, vi = v[i], i, dim](const double* x, double* g) {
                double val = p.f(x, g);
                for (int k = 0; k < dim; ++k) g[k] = 0.1 * eps * vi * g[k] + (k == i ? 1.0 : 0.0);
                return x[i] + 0.1 * eps * vi * val;
            }});
        auto h = bumped(polynomial({{eps, expo(dim, {{0, 2}, {1, 1}})},
                                    {0.5 * eps, expo(dim, {{1, 3}})}},
                                   dim),
                        dim);
        s.X = pullback(phi, h, Eigen::MatrixXcd::Identity(N, N), dim);
        return s;
    }
    const std::string pre = "random-integrable(";
    if (name.rfind(pre, 0) == 0 && name.back() == ')') {
        std::uint64_t seed = std::stoull(name.substr(pre.size(), name.size() - pre.size() - 1));
        const double amp = amplitude > 0 ? amplitude : 1.0;
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> nd;
        std::vector<ScalarFn> phi;
        for (int i = 0; i < dim; ++i) {
            std::vector<Monomial> terms;
            for (int k = 0; k < dim; ++k)
                terms.push_back({(i == k ? 1.0 : 0.0) + 0.15 * nd(rng) / std::sqrt(dim), expo(dim, {{k, 1}})});
            for (int k = 0; k < dim; ++k)
                for (int l = k; l < dim; ++l) terms.push_back({0.1 * amp * nd(rng) / dim, expo(dim, {{k, 1}, {l, 1}})});
            for (int k = 0; k < dim; ++k)
                for (int l = k; l < dim; ++l)
                    for (int r = l; r < dim; ++r)
                        terms.push_back({0.05 * amp * nd(rng) / dim, expo(dim, {{k, 1}, {l, 1}, {r, 1}})});
            phi.push_back(polynomial(terms, dim));
        }
        std::vector<Monomial> hterms;
        for (int k = 0; k < dim; ++k)
            for (int l = k; l < dim; ++l) hterms.push_back({0.1 * amp * nd(rng) / dim, expo(dim, {{k, 1}, {l, 1}})});
        for (int k = 0; k < dim; ++k)
            for (int l = k; l < dim; ++l)
                for (int r = l; r < dim; ++r)
                    hterms.push_back({0.05 * amp * nd(rng) / dim, expo(dim, {{k, 1}, {l, 1}, {r, 1}})});
        Eigen::MatrixXcd G = Eigen::MatrixXcd::Identity(N, N);
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) G(a, b) += 0.2 * cplx(nd(rng), nd(rng)) / std::sqrt(N);
        s.X = pullback(phi, polynomial(hterms, dim), G, dim);
        return s;
    }
    throw Error("unknown structure: " + name);
}

}  // namespace crlab
