#include "crlab/holder.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "crlab/errors.hpp"

namespace crlab {

namespace {

void gen_indices(int dim, int order, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == order) {
        out.push_back(cur);
        return;
    }
    for (int a = start; a < dim; ++a) {
        cur.push_back(a);
        gen_indices(dim, order, a, cur, out);
        cur.pop_back();
    }
}

// max over fields of the Hölder ratio, sharing the pair loop
double holder_ratio_max(const std::vector<const GridField*>& fields, double beta, const HolderOptions& opt) {
    if (beta <= 0.0 || fields.empty()) return 0.0;
    const GridField& f0 = *fields.front();
    const Grid& g = *f0.grid;
    const int d = g.dim();
    // gather points where every field is defined
    std::vector<std::size_t> pts;
    for (std::size_t i = 0; i < g.size(); ++i) {
        bool ok = true;
        for (const auto* f : fields)
            for (int c = 0; c < f->comps && ok; ++c) ok = is_defined(f->at(i, c));
        if (ok) pts.push_back(i);
    }
    const std::size_t N = pts.size();
    if (N < 2) return 0.0;
    std::vector<double> xs(N * d);
    for (std::size_t p = 0; p < N; ++p) g.point(pts[p], &xs[p * d]);
    double best = 0.0;
    auto pair = [&](std::size_t p, std::size_t q) {
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) {
            double t = xs[p * d + a] - xs[q * d + a];
            r2 += t * t;
        }
        if (r2 <= 0.0) return;
        double scale = std::exp(-0.5 * beta * std::log(r2));
        for (const auto* f : fields) {
            double q2 = 0.0;
            const cplx* a = &f->v[pts[p] * f->comps];
            const cplx* b = &f->v[pts[q] * f->comps];
            for (int c = 0; c < f->comps; ++c) q2 += std::norm(a[c] - b[c]);
            double r = std::sqrt(q2) * scale;
            if (r > best) best = r;
        }
    };
    if (N <= opt.exhaustive_limit) {
        for (std::size_t p = 0; p < N; ++p)
            for (std::size_t q = p + 1; q < N; ++q) pair(p, q);
    } else {
        std::mt19937_64 rng(opt.seed);
        std::uniform_int_distribution<std::size_t> pick(0, N - 1);
        for (std::size_t s = 0; s < opt.sampled_pairs; ++s) {
            std::size_t p = pick(rng), q = pick(rng);
            if (p != q) pair(p, q);
        }
    }
    return best;
}

double sup_defined(const GridField& f, bool& any) {
    double s = 0.0;
    any = false;
    for (std::size_t i = 0; i < f.size(); ++i) {
        double q = 0.0;
        bool ok = true;
        for (int c = 0; c < f.comps && ok; ++c) {
            ok = is_defined(f.at(i, c));
            if (ok) q += std::norm(f.at(i, c));
        }
        if (ok) {
            any = true;
            s = std::max(s, std::sqrt(q));
        }
    }
    return s;
}

AuditReport finish(const char* kind, double lhs, double rhs, double bound) {
    AuditReport r;
    r.kind = kind;
    r.lhs = lhs;
    r.rhs = rhs;
    r.ratio = rhs > 0.0 ? lhs / rhs : 0.0;
    r.bound = bound;
    r.pass = r.ratio <= bound;
    return r;
}

const GridField& need(const GridField* f, const char* what) {
    if (!f) throw Error(std::string("audit input missing: ") + what);
    return *f;
}

}  // namespace

std::vector<std::vector<int>> multi_indices(int dim, int order) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    gen_indices(dim, order, 0, cur, out);
    return out;
}

std::vector<std::vector<GridField>> derivative_tower(const GridField& u, int order) {
    const int d = u.grid->dim();
    std::vector<std::vector<GridField>> tower;
    tower.push_back({u});
    std::map<std::vector<int>, std::size_t> prev_index{{{}, 0}};
    for (int j = 1; j <= order; ++j) {
        auto idx = multi_indices(d, j);
        std::vector<GridField> level;
        std::map<std::vector<int>, std::size_t> cur_index;
        for (std::size_t m = 0; m < idx.size(); ++m) {
            std::vector<int> prefix(idx[m].begin(), idx[m].end() - 1);
            level.push_back(diff(tower[j - 1][prev_index.at(prefix)], idx[m].back()));
            cur_index[idx[m]] = m;
        }
        tower.push_back(std::move(level));
        prev_index = std::move(cur_index);
    }
    return tower;
}

double holder_seminorm(const GridField& u, double exponent, const HolderOptions& opt) {
    return holder_ratio_max({&u}, exponent, opt);
}

NormReport holder_norm(const GridField& u, double a, const HolderOptions& opt) {
    if (a < 0.0) throw Error("negative norm order");
    const int top = static_cast<int>(std::floor(a + 1e-12));
    const double frac = std::max(0.0, a - top);
    auto tower = derivative_tower(u, top);
    NormReport rep;
    rep.order = a;
    for (int j = 0; j <= top; ++j) {
        double s = 0.0;
        for (const auto& f : tower[j]) {
            bool any = false;
            s += sup_defined(f, any);
            if (!any) throw ResolutionError("grid too coarse for derivative order " + std::to_string(j));
        }
        rep.derivative_sups.push_back(s);
    }
    std::vector<const GridField*> tops;
    for (const auto& f : tower[top]) tops.push_back(&f);
    rep.holder_ratio = holder_ratio_max(tops, frac, opt);
    rep.value = rep.holder_ratio;
    for (double s : rep.derivative_sups) rep.value += s;
    return rep;
}

AuditReport audit_interpolation(const GridField& u, double a, double b, double lambda, double rho,
                                const EstimateConstants& k, const HolderOptions& opt) {
    if (!(a < b)) throw HypothesisViolation("order ordering", "interpolation needs a < b");
    if (!(lambda > 0.0 && lambda < 1.0)) throw HypothesisViolation("lambda range", "lambda must lie in (0,1)");
    const double c = lambda * a + (1.0 - lambda) * b;
    double lhs = norm(u, c, opt);
    double rhs = std::pow(rho, -c) * std::pow(norm(u, a, opt), lambda) * std::pow(norm(u, b, opt), 1.0 - lambda);
    return finish("interpolation", lhs, rhs, k.c(c));
}

const char* rule_name(RuleKind k) {
    switch (k) {
        case RuleKind::Convexity: return "convexity";
        case RuleKind::Product: return "product";
        case RuleKind::Chain: return "chain";
        case RuleKind::ChainFixed: return "chain_fixed";
        case RuleKind::InverseMap: return "inverse_map";
        case RuleKind::XDerivative: return "x_derivative";
    }
    return "?";
}

AuditReport audit_rule(RuleKind kind, const RuleInputs& in, const EstimateConstants& k, const HolderOptions& opt) {
    const double a = in.a;
    const double bound = in.bound > 0.0 ? in.bound : k.c(a);
    switch (kind) {
        case RuleKind::Convexity: {
            const auto& u = need(in.u, "u");
            const auto& v = need(in.v, "v");
            double l = in.lambda;
            if (!(l > 0 && l < 1) || std::abs(l * in.a1 + (1 - l) * in.a2 - in.a) > 1e-12 ||
                std::abs(l * in.b1 + (1 - l) * in.b2 - in.b) > 1e-12)
                throw HypothesisViolation("convex combination", "(a,b) is not lambda(a1,b1)+(1-lambda)(a2,b2)");
            double lhs = norm(u, in.a, opt) * norm(v, in.b, opt);
            double rhs = std::pow(in.rho, -in.a) * std::pow(in.tau, -in.b) *
                         (norm(u, in.a1, opt) * norm(v, in.b1, opt) + norm(u, in.a2, opt) * norm(v, in.b2, opt));
            return finish(rule_name(kind), lhs, rhs, bound);
        }
        case RuleKind::Product: {
            const auto& u = need(in.u, "u");
            const auto& v = need(in.v, "v");
            if (u.comps != v.comps && u.comps != 1 && v.comps != 1)
                throw Error("product audit needs matching or scalar components");
            const GridField& wide = u.comps >= v.comps ? u : v;
            const GridField& nar = u.comps >= v.comps ? v : u;
            GridField uv(u.grid, wide.comps);
            for (std::size_t i = 0; i < uv.size(); ++i)
                for (int c = 0; c < wide.comps; ++c)
                    uv.at(i, c) = wide.at(i, c) * nar.at(i, nar.comps == 1 ? 0 : c);
            double lhs = norm(uv, a, opt);
            double rhs = std::pow(in.rho, -a) * (norm(u, a, opt) * sup_norm(v) + sup_norm(u) * norm(v, a, opt));
            return finish(rule_name(kind), lhs, rhs, bound);
        }
        case RuleKind::Chain: {
            const auto& u = need(in.u, "u");
            const auto& comp = need(in.composite, "composite");
            const auto& g = need(in.g, "g");
            double g1 = norm(g, 1.0, opt);
            double K = std::pow(in.tau, -2 * a) * std::pow(in.rho, -a * a) * std::pow(1 + g1, 2 * a);
            double lhs = norm(comp, a, opt);
            double rhs = K * (norm(u, a, opt) + norm(u, 1.0, opt) * norm(g, a, opt));
            return finish(rule_name(kind), lhs, rhs, bound);
        }
        case RuleKind::ChainFixed: {
            const auto& W = need(in.g, "g");
            int N = static_cast<int>(std::lround(std::sqrt(double(W.comps))));
            if (N * N != W.comps) throw Error("chain_fixed needs a square-matrix field");
            if (sup_norm(W) > 0.5) throw HypothesisViolation("matrix field in B(1/2)", "sup |W| exceeds 1/2");
            // (I+W)^{-1} - I, so that the constant part drops out of the left side
            GridField comp(W.grid, W.comps);
            Eigen::MatrixXcd M(N, N);
            for (std::size_t i = 0; i < W.size(); ++i) {
                for (int r = 0; r < N; ++r)
                    for (int c = 0; c < N; ++c) M(r, c) = (r == c ? 1.0 : 0.0) + W.at(i, r * N + c);
                Eigen::MatrixXcd inv = M.inverse();
                for (int r = 0; r < N; ++r)
                    for (int c = 0; c < N; ++c) comp.at(i, r * N + c) = inv(r, c) - (r == c ? 1.0 : 0.0);
            }
            double lhs = norm(comp, a, opt);
            double rhs = std::pow(in.rho, -a) * std::pow(1 + sup_norm(W), a - 1) * norm(W, a, opt);
            return finish(rule_name(kind), lhs, rhs, bound);
        }
        case RuleKind::InverseMap: {
            const auto& f2 = need(in.g, "f2");
            const auto& g2 = need(in.g2, "g2");
            double f1 = norm(f2, 1.0, opt);
            if (f1 > in.sigma / 5.0)
                throw HypothesisViolation("contraction smallness", "||f_(2)||_1 exceeds sigma/5");
            double lhs = norm(g2, a, opt);
            double rhs = (a <= 2.0 ? 1.0 : std::pow(in.rho, -4 * (a + 2))) * norm(f2, a, opt);
            return finish(rule_name(kind), lhs, rhs, bound);
        }
        case RuleKind::XDerivative: {
            const auto& xu = need(in.xu, "xu");
            const auto& u = need(in.u, "u");
            const auto& e = need(in.error, "error");
            const auto& h = need(in.h, "h");
            double Kp = std::pow(in.rho, -2 * a) * (1 + sup_norm(e));
            double lhs = norm(xu, a, opt);
            double rhs = Kp * (norm(u, a + 1, opt) + (norm(e, a, opt) + norm(h, a + 1, opt)) * norm(u, 1.0, opt));
            return finish(rule_name(kind), lhs, rhs, bound);
        }
    }
    throw Error("unknown audit kind");
}

}  // namespace crlab
