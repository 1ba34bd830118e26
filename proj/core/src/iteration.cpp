#include "crlab/iteration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include "json.hpp"
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "crlab/errors.hpp"
#include "crlab/holder.hpp"
#include "crlab/taylor.hpp"

namespace crlab {

namespace {

GridField real_part(const GridField& u) {
    GridField r(u.grid, u.comps);
    for (std::size_t i = 0; i < u.v.size(); ++i) r.v[i] = u.v[i].real();
    return r;
}

double relative_sup(const GridField& a, const GridField& b) {
    double s = sup_norm(b);
    double d = sup_norm(a - b);
    return s > 0.0 ? d / s : d;
}

void put_form(GridField& dst, int j, int N, const GridField& form) {
    for (std::size_t i = 0; i < dst.size(); ++i)
        for (int a = 0; a < N; ++a) dst.at(i, j * N + a) = form.at(i, a);
}

bool subset_flats(const Grid& a, const Grid& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!b.contains(a.flat(i))) return false;
    return true;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

}  // namespace

AlterResult alter(const EmbeddingState& st, double t, const HomotopyOperator& op, const Mollifier& moll,
                  double rho, double sigma, const IterationOptions& opt) {
    const int n = st.n, N = n - 1;
    const GridPtr& G = op.forms_grid();
    SmoothOptions so;
    so.rho = rho;
    so.sigma = sigma;
    so.c_hat_margin = opt.constants.c_hat_margin;
    so.boundary = Boundary::Renormalize;
    if (!(t > 0.0) || t >= rho * sigma / so.c_hat_margin)
        throw SupportViolation("smoothing margin: t = " + fmt(t) + " not in (0, " +
                               fmt(rho * sigma / so.c_hat_margin) + ")");

    AlterResult r;
    r.plumbing = op.plumbing();
    r.error = error_form(st, G);
    r.error_sup = sup_norm(r.error);
    r.error_c1 = norm(r.error, 1.0);
    if (opt.check_hypotheses && r.error_c1 > 0.5)
        throw HypothesisViolation("error C1 bound", "|dbar_X Z|_1 = " + fmt(r.error_c1) + " > 1/2");

    const GridPtr& Gp = op.functions_grid();
    r.F = GridField(Gp, n);
    r.u = GridField(Gp, n);
    for (GridField* f : {&r.I1, &r.I2, &r.I3, &r.I4, &r.I5, &r.altered_error, &r.defect})
        *f = GridField(G, n * N);

    for (int j = 0; j < n; ++j) {
        GridField phi = error_component(r.error, j, N);
        SolveReport rp;
        GridField u = op.P(phi, &rp);
        r.solver_iterations += rp.iterations;
        GridField Su = smooth(u, t, moll, so);
        GridField DMSu = op.dbar0(Su);
        GridField DXSu = apply_fields(st.X, Su, true, G);
        GridField DMu = op.dbar0(u);
        GridField SDMu = smooth(DMu, t, moll, so);
        GridField Sphi = smooth(phi, t, moll, so);
        GridField SQd(G, N), Qd(G, N), QdX(G, N);
        if (N >= 2) {
            const GridPtr& G2 = op.two_forms_grid();
            GridField dM = dbar(DbarKind::M, phi, 1, st, G2);
            GridField dX = dbar(DbarKind::X, phi, 1, st, G2);
            SolveReport rq;
            Qd = op.Q(dM - dX, &rq);
            r.solver_iterations += rq.iterations;
            QdX = op.Q(dX, &rq);
            r.solver_iterations += rq.iterations;
            SQd = smooth(Qd, t, moll, so);
        }
        put_form(r.I1, j, N, phi - Sphi);
        put_form(r.I2, j, N, DMSu - DXSu);
        put_form(r.I3, j, N, SDMu - DMSu);
        put_form(r.I4, j, N, SQd);
        put_form(r.I5, j, N, Sphi - SDMu - SQd);
        put_form(r.altered_error, j, N, phi - DXSu);
        put_form(r.defect, j, N, phi - DMu - Qd - QdX);
        for (std::size_t i = 0; i < Gp->size(); ++i) {
            r.u.at(i, j) = u.at(i, 0);
            r.F.at(i, j) = -Su.at(i, 0);
        }
    }

    GridField sum = r.I1 + r.I2 + r.I3 + r.I4 + r.I5;
    r.identity_residual = relative_sup(sum, r.altered_error);
    double dsup = sup_norm(r.defect);
    r.defect_norm = r.error_sup > 0.0 ? dsup / r.error_sup : dsup;
    r.operator_limited = dsup > opt.defect_flag_fraction * r.error_sup && r.error_sup > 0.0;
    return r;
}

PointInverse invert_point(const RealMap& f2, int dim, const double* y, double* x, int max_iter, double tol) {
    PointInverse p;
    std::vector<double> fx(dim), xn(dim);
    for (int a = 0; a < dim; ++a) x[a] = y[a];
    double prev = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        f2(x, fx.data());
        double step = 0.0, scale = 1.0;
        for (int a = 0; a < dim; ++a) {
            xn[a] = y[a] - fx[a];
            step = std::max(step, std::abs(xn[a] - x[a]));
            scale = std::max(scale, std::abs(y[a]));
            x[a] = xn[a];
        }
        p.iterations = it + 1;
        // ratios below this level are round-off
        if (it > 0 && prev > 1e-10 * scale) p.ratio = std::max(p.ratio, step / prev);
        if (step <= tol * scale) {
            p.converged = true;
            break;
        }
        prev = step;
    }
    return p;
}

MapPair invert_map(const GridField& f2, const Domain& dom, double sigma, const IterationOptions& opt) {
    const int d = f2.grid->dim();
    if (f2.comps != d) throw Error("invert_map: f2 needs one component per axis");
    const double rho = dom.rho;
    GridField f2m = restrict_to(f2, dom.mask);
    double c1 = norm(real_part(f2m), 1.0);
    if (opt.check_hypotheses && c1 > sigma / 5.0)
        throw HypothesisViolation("inverse map size", "|f2|_1 = " + fmt(c1) + " > sigma/5 = " + fmt(sigma / 5.0));

    MapPair mp;
    mp.f2 = real_part(f2);
    mp.source = f2.grid;
    mp.target = f2.grid;
    mp.g2 = GridField(f2.grid, d);
    TaylorResampler rs(mp.f2);
    std::vector<cplx> tmp(d);
    RealMap fm = [&](const double* x, double* out) {
        rs.eval(x, tmp.data());
        for (int a = 0; a < d; ++a) out[a] = tmp[a].real();
    };
    GridPtr inner = sublevel_mask(dom.h, rho * (1.0 - sigma));
    std::vector<double> y(d), x(d), fx(d);
    for (std::size_t i = 0; i < f2.grid->size(); ++i) {
        f2.grid->point(i, y.data());
        PointInverse pi = invert_point(fm, d, y.data(), x.data(), opt.contraction_max_iter, opt.contraction_tol);
        mp.max_iterations = std::max(mp.max_iterations, pi.iterations);
        mp.contraction = std::max(mp.contraction, pi.ratio);
        if (!pi.converged) {
            if (inner->contains(f2.grid->flat(i)))
                throw Error("invert_map: contraction did not converge inside D_{rho(1-sigma)}");
            ++mp.unconverged;
        }
        fm(x.data(), fx.data());
        double rt = 0.0;
        for (int a = 0; a < d; ++a) {
            mp.g2.at(i, a) = x[a] - y[a];
            rt = std::max(rt, std::abs(x[a] + fx[a] - y[a]));
        }
        if (inner->contains(f2.grid->flat(i))) mp.roundtrip = std::max(mp.roundtrip, rt);
    }
    // |u(0)| + |first central differences at 0|
    auto origin_size = [&](const GridField& u) {
        const int o = u.grid->index_of_origin();
        double s = 0.0;
        for (int c = 0; c < d; ++c) s = std::max(s, std::abs(u.at(o, c)));
        for (int k = 0; k < d; ++k) {
            GridField dk = diff(u, k);
            for (int c = 0; c < d; ++c) s = std::max(s, std::abs(dk.at(o, c)));
        }
        return s;
    };
    mp.f2_origin = origin_size(mp.f2);
    mp.g2_origin = origin_size(mp.g2);
    return mp;
}

RenormResult renormalize(const EmbeddingState& st, const GridField& F, double sigma, const IterationOptions& opt) {
    const int n = st.n, N = n - 1;
    const Domain& dom = st.dom;
    const int d = dom.dim;
    const GridPtr& S = dom.support();
    const double rho = dom.rho;
    if (F.comps != n) throw Error("renormalize: F needs n components");

    RenormResult r;
    GridField Fs = F.grid == S ? F : extend(F, S);
    r.F_c1 = norm(restrict_to(Fs, dom.mask), 1.0);
    const double gamma1 = opt.constants.gamma1;
    if (opt.check_hypotheses && r.F_c1 > gamma1 * rho * sigma)
        throw HypothesisViolation("alteration size",
                                  "|F|_1 = " + fmt(r.F_c1) + " > gamma1 rho sigma = " + fmt(gamma1 * rho * sigma));

    TaylorFit fit = fit_taylor(Fs, opt.taylor_radius);
    if (opt.origin_derivative == OriginDerivative::Central) {
        const int o = S->index_of_origin();
        for (int j = 0; j < n; ++j) fit.value[j] = Fs.at(o, j);
        for (int k = 0; k < d; ++k) {
            GridField dk = diff(Fs, k);
            for (int j = 0; j < n; ++j) fit.grad[j * d + k] = dk.at(o, j);
        }
    }
    TaylorStrip& K = r.taylor;
    K.fit_residual = fit.residual;
    K.K0.resize(n);
    K.Kn.resize(n);
    K.Ka.resize(n * N);
    K.Kab.resize(n * N);
    const cplx I(0.0, 1.0);
    for (int j = 0; j < n; ++j) {
        K.K0[j] = fit.value[j];
        K.Kn[j] = fit.d(j, 2 * N);
        for (int a = 0; a < N; ++a) {
            K.Ka[j * N + a] = 0.5 * (fit.d(j, 2 * a) - I * fit.d(j, 2 * a + 1));
            K.Kab[j * N + a] = 0.5 * (fit.d(j, 2 * a) + I * fit.d(j, 2 * a + 1));
        }
    }

    // Z_* = Z + F + E with E cancelling the affine part of F at 0
    GridField Z = embedding(dom);
    r.Zstar = GridField(S, n);
    GridField f2(S, d), imzn(S, 1);
    std::vector<double> x(d);
    std::vector<cplx> z(N);
    for (std::size_t i = 0; i < S->size(); ++i) {
        S->point(i, x.data());
        for (int a = 0; a < N; ++a) z[a] = cplx(x[2 * a], x[2 * a + 1]);
        const cplx zn = Z.at(i, n - 1);
        for (int j = 0; j < n; ++j) {
            cplx E = -K.K0[j] - K.Kn[j] * zn;
            for (int a = 0; a < N; ++a) E -= K.Ka[j * N + a] * z[a] + K.Kab[j * N + a] * std::conj(z[a]);
            r.Zstar.at(i, j) = Z.at(i, j) + Fs.at(i, j) + E;
        }
        for (int a = 0; a < N; ++a) {
            f2.at(i, 2 * a) = r.Zstar.at(i, a).real() - x[2 * a];
            f2.at(i, 2 * a + 1) = r.Zstar.at(i, a).imag() - x[2 * a + 1];
        }
        f2.at(i, 2 * N) = r.Zstar.at(i, n - 1).real() - x[2 * N];
        imzn.at(i, 0) = r.Zstar.at(i, n - 1).imag();
    }
    r.f2_c1 = norm(restrict_to(f2, dom.mask), 1.0);

    r.pair = invert_map(f2, dom, sigma, opt);

    // new graph function and pushed-forward frame at g(y)
    TaylorResampler rz(imzn), rx(st.X), rf(r.pair.f2);
    GridField h1(S, 1), X1(S, N * d);
    std::vector<double> y(d), gy(d);
    std::vector<cplx> v1(1), xv(N * d), fv(d), fg(d * d);
    for (std::size_t i = 0; i < S->size(); ++i) {
        S->point(i, y.data());
        for (int a = 0; a < d; ++a) gy[a] = y[a] + r.pair.g2.at(i, a).real();
        rz.eval(gy.data(), v1.data());
        double zz = 0.0;
        for (int a = 0; a < 2 * N; ++a) zz += y[a] * y[a];
        h1.at(i, 0) = v1[0].real() - zz;
        rx.eval(gy.data(), xv.data());
        rf.eval(gy.data(), fv.data(), fg.data());
        for (int a = 0; a < N; ++a)
            for (int k = 0; k < d; ++k) {
                cplx c = xv[a * d + k];
                for (int l = 0; l < d; ++l) c += fg[k * d + l].real() * xv[a * d + l];
                X1.at(i, a * d + k) = c;
            }
    }
    for (std::size_t i = 0; i < dom.mask->size(); ++i) {
        int p = S->index_of(dom.mask->flat(i));
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) {
                cplx xz = X1.at(p, a * d + 2 * b) + I * X1.at(p, a * d + 2 * b + 1);
                r.frame_change = std::max(r.frame_change, std::abs(xz - (a == b ? 1.0 : 0.0)));
            }
    }

    r.state.n = n;
    r.state.dom = make_domain(h1, rho * (1.0 - 2.0 * sigma));
    r.state.X = adapt(X1, n);
    GridPtr outer = sublevel_mask(dom.h, rho * (1.0 - sigma));
    r.nesting = subset_flats(*r.state.dom.mask, *outer);
    r.error_origin = value_at_origin_norm(error_form(r.state));
    return r;
}

namespace {

double sup_operator_norm(const GridField& map2, const GridPtr& on, bool add_identity) {
    const int d = map2.grid->dim();
    std::vector<GridField> D;
    for (int a = 0; a < d; ++a) D.push_back(diff(map2, a));
    double best = 0.0;
    for (std::size_t q = 0; q < on->size(); ++q) {
        int i = map2.grid->index_of(on->flat(q));
        if (i < 0) continue;
        // max row sum
        for (int k = 0; k < d; ++k) {
            double s = 0.0;
            for (int l = 0; l < d; ++l) s += std::abs(D[l].at(i, k).real() + (add_identity && k == l ? 1.0 : 0.0));
            best = std::max(best, s);
        }
    }
    return best;
}

}  // namespace

Trajectory run_sequence(const EmbeddingState& initial, const SequenceParams& P, const Mollifier& moll,
                        const IterationOptions& opt, std::ostream* log) {
    Trajectory tr;
    EmbeddingState st = initial;
    if (std::abs(st.dom.rho - P.rho0) > 1e-15) st.dom = with_rho(st.dom, P.rho0);
    const EstimateConstants& C = opt.constants;
    double rho = P.rho0, sigma = P.sigma0, log_t = std::log(P.t0);
    const int d = st.dom.dim;
    const double spacing = st.dom.spacing;

    // accumulated g~ - id on the support
    GridField gt(st.dom.support(), d);
    double product = 1.0;

    for (int j = 0;; ++j) {
        StepRecord rec;
        rec.j = j;
        rec.rho = rho;
        rec.sigma = sigma;
        rec.log_t = log_t;
        rec.t = std::exp(log_t);
        rec.mask_points = st.dom.mask->size();
        rec.product_bound = product;
        rec.composition_jacobian = sup_operator_norm(gt, st.dom.mask, true);

        GridField err = error_form(st);
        for (double a : P.delta_orders) rec.delta[a] = norm(err, a);
        if (!rec.delta.count(P.k)) rec.delta[P.k] = norm(err, P.k);
        GridField hm = real_part(restrict_to(st.dom.h, st.dom.mask));
        for (double a : P.n_orders) rec.N[a] = 1.0 + norm(hm, a);
        if (!rec.N.count(2.0)) rec.N[2.0] = 1.0 + norm(hm, 2.0);
        rec.error_origin = value_at_origin_norm(err);
        if (rec.error_origin > 10.0 * spacing * spacing) rec.flags.push_back("origin-error");

        auto halt = [&](const std::string& why) {
            tr.halted = why;
            if (log) *log << to_json_line(rec) << "\n";
            tr.steps.push_back(rec);
        };
        auto hypothesis = [&](const std::string& why) {
            if (P.enforce_hypotheses) {
                halt(why);
                return true;
            }
            rec.flags.push_back("hypothesis: " + why);
            return false;
        };
        if (rec.N[2.0] - 1.0 > C.gamma0 &&
            hypothesis("graph bound: |h_j|_2 <= gamma0 fails (" + fmt(rec.N[2.0] - 1.0) + ")"))
            break;
        if (rec.delta[P.k] > std::exp(P.s * log_t) &&
            hypothesis("error bound: t_j^-s delta_j(k) <= 1 fails (delta = " + fmt(rec.delta[P.k]) +
                       ", t^s = " + fmt(std::exp(P.s * log_t)) + ")"))
            break;
        if (j >= P.max_steps) {
            halt("max steps");
            break;
        }
        if (rec.t < P.min_t_factor * spacing) {
            halt("t below grid scale");
            break;
        }
        if (rec.t >= rho * sigma / C.c_hat_margin) {
            halt("smoothing margin: t_j < rho_j sigma_j / c_hat fails");
            break;
        }

        try {
            HomotopyOperator op(st, st.dom.mask, opt.homotopy);
            AlterResult ar = alter(st, rec.t, op, moll, rho, sigma, opt);
            rec.defect = ar.defect_norm;
            rec.identity_residual = ar.identity_residual;
            if (ar.operator_limited) rec.flags.push_back("operator-limited");
            if (ar.plumbing) rec.flags.push_back("plumbing");
            RenormResult rr = renormalize(st, ar.F, sigma, opt);
            rec.F_c1 = rr.F_c1;
            rec.f2_c1 = rr.f2_c1;
            rec.roundtrip = rr.pair.roundtrip;
            rec.contraction = rr.pair.contraction;

            const double rho1 = rho * (1.0 - 5.0 * sigma);
            Domain next = with_rho(rr.state.dom, rho1);
            GridPtr outer = sublevel_mask(st.dom.h, rho * (1.0 - sigma));
            rec.nesting = rr.nesting && subset_flats(*next.mask, *outer);
            if (!rec.nesting) rec.flags.push_back("nesting-failed");

            GridField dh = real_part(restrict_to(rr.state.dom.h - st.dom.h, next.mask));
            rec.h_change2 = norm(dh, 2.0);
            double log_bound = std::log(C.c(2.0)) - C.s(2.0) * std::log(rho * sigma) + std::log(rec.N.count(3.0) ? rec.N[3.0] : 1.0) +
                               (P.s - 1.0) * log_t;
            rec.h_change_log_ratio = rec.h_change2 > 0.0 ? std::log(rec.h_change2) - log_bound
                                                         : -std::numeric_limits<double>::infinity();

            // g~_{j} = g~_{j-1} o g_j
            TaylorResampler rg(gt);
            GridField gt1(gt.grid, d);
            std::vector<double> y(d), gy(d);
            std::vector<cplx> v(d);
            for (std::size_t i = 0; i < gt.size(); ++i) {
                gt.grid->point(i, y.data());
                for (int a = 0; a < d; ++a) gy[a] = y[a] + rr.pair.g2.at(i, a).real();
                rg.eval(gy.data(), v.data());
                for (int a = 0; a < d; ++a) gt1.at(i, a) = gy[a] - y[a] + v[a];
            }
            gt = std::move(gt1);
            product *= 1.0 + sup_operator_norm(rr.pair.g2, next.mask, false);

            if (log) *log << to_json_line(rec) << "\n";
            tr.steps.push_back(rec);
            st.dom = next;
            st.X = rr.state.X;
        } catch (const HypothesisViolation& e) {
            halt(e.what());
            break;
        } catch (const SupportViolation& e) {
            halt(std::string("smoothing margin: ") + e.what());
            break;
        } catch (const SolverError& e) {
            halt(std::string("solver: ") + e.what());
            break;
        }
        rho *= 1.0 - 5.0 * sigma;
        sigma /= 5.0;
        log_t *= P.kappa;
    }
    tr.final_state = st;
    return tr;
}

std::string to_json_line(const StepRecord& r) {
    nlohmann::json j;
    j["j"] = r.j;
    j["rho"] = r.rho;
    j["sigma"] = r.sigma;
    j["log_t"] = r.log_t;
    nlohmann::json dl = nlohmann::json::object(), nl = nlohmann::json::object();
    for (auto& [a, v] : r.delta) dl[fmt(a)] = v;
    for (auto& [a, v] : r.N) nl[fmt(a)] = v;
    j["delta"] = dl;
    j["N"] = nl;
    j["defect"] = r.defect;
    j["flags"] = r.flags;
    j["error_origin"] = r.error_origin;
    j["identity_residual"] = r.identity_residual;
    j["F_c1"] = r.F_c1;
    j["f2_c1"] = r.f2_c1;
    j["roundtrip"] = r.roundtrip;
    j["contraction"] = r.contraction;
    j["nesting"] = r.nesting;
    j["h_change2"] = r.h_change2;
    j["h_change_log_ratio"] = std::isfinite(r.h_change_log_ratio) ? nlohmann::json(r.h_change_log_ratio) : nlohmann::json();
    j["composition_jacobian"] = r.composition_jacobian;
    j["product_bound"] = r.product_bound;
    j["mask_points"] = r.mask_points;
    return j.dump();
}

}  // namespace crlab
