#include "crlab/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "crlab/errors.hpp"

namespace crlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kLog2 = std::log(2.0);
const double kLog3 = std::log(3.0);
const double kLogHalf = std::log(0.5);

double lse(double x, double y) {
    if (x == -kInf) return y;
    if (y == -kInf) return x;
    double hi = std::max(x, y), lo = std::min(x, y);
    if (hi == kInf) return kInf;
    return hi + std::log1p(std::exp(lo - hi));
}

double lse(std::initializer_list<double> xs) {
    double r = -kInf;
    for (double x : xs) r = lse(r, x);
    return r;
}

// e * log t with 0 * (-inf) = 0
double pw(double e, double log_t) { return e == 0.0 ? 0.0 : e * log_t; }

double logK(const ScheduleParams& p, double lr, double ls, double a) {
    return std::log(p.constants.c(a)) - p.constants.s(a) * (lr + ls);
}

}  // namespace

double ScheduleParams::log_g0() const { return log_gamma0 ? *log_gamma0 : std::log(constants.gamma0); }
double ScheduleParams::log_g1() const { return log_gamma1 ? *log_gamma1 : std::log(constants.gamma1); }

AdmissibilityReport admissible(const ScheduleParams& p) {
    AdmissibilityReport r;
    auto need = [&](bool ok, const char* name) {
        if (!ok) r.violated.emplace_back(name);
    };
    const double ks = p.kappa * p.s;
    const double eta = p.m - 3.0;
    need(p.s == 2.0, "s = 2");
    need(p.kappa > 1.0, "kappa > 1");
    need(p.kappa < 1.25, "kappa < 5/4");
    need(p.mu > ks, "mu > kappa*s");
    need(ks > 2.0, "kappa*s > 2");
    need(ks < 2.5, "kappa*s < 5/2");
    need(p.k >= 1, "k >= 1");
    need(p.k <= p.m, "k <= m");
    need(p.k + p.mu <= p.m, "k + mu <= m");
    need(p.m > 3.0, "m > 3");
    need(p.kappa < (eta + 3.0 - p.k) / 2.0, "kappa < (eta + 3 - k)/2");
    need(p.mu < p.m - p.k, "mu < m - k");
    need(p.log_t0 < 0.0 && p.log_t0 > -kInf, "t0 in (0,1)");
    need(p.sigma0 > 0.0 && p.sigma0 < 0.2, "sigma0 in (0,1/5)");
    need(p.rho0 > 0.0 && p.rho0 <= 1.0, "rho0 in (0,1]");
    r.ok = r.violated.empty();
    return r;
}

double log_c_hat(const ScheduleParams& p, double a) {
    // rho_j sigma_j / (rho_{j+1} sigma_{j+1}) = 5 / (1 - 5 sigma_j) <= 5 / (1 - 5 sigma_0)
    return p.constants.s(a) * std::log(5.0 / (1.0 - 5.0 * p.sigma0));
}

Evolution evolve(const ScheduleParams& p, int J) {
    auto adm = admissible(p);
    if (!adm.ok) throw InadmissibleError("inadmissible schedule parameters", adm.violated);

    const double s = p.s, kap = p.kappa, mu = p.mu, m = p.m, beta = p.beta();
    const double k = p.k;
    const double alpha = (1.0 - kap) * s + 0.5;
    const double gam = kap * (mu - kap * s) + s;
    const double lc_m = log_c_hat(p, m);
    const double lc_2 = log_c_hat(p, 2.0);
    const double lC0 = 2.0 * log_c_hat(p, beta) + 2.0 * log_c_hat(p, m + 1.0);
    const double lg0 = p.log_g0(), lg1 = p.log_g1();
    const double l_margin = std::log(p.constants.c_hat_margin);

    const std::vector<double> n_orders{3.0, beta, k + 2.0, k + beta, k + mu + 2.0, m + 0.5, m + beta, m + 2.0, p.a + 1.0};
    const std::vector<double> k_orders{2.0, 3.0, beta, k, k + 1.0, k + 2.0, k + beta, k + mu + 2.0, m, m + 0.5, m + 1.0, m + beta, p.a, p.a + 1.0};
    const std::vector<double> d_orders{0.0, 1.0, k, k + mu, m};

    Evolution ev;
    ScheduleState st;
    st.log_rho = std::log(p.rho0);
    st.log_sigma = std::log(p.sigma0);
    st.log_t = p.log_t0;
    for (double a : n_orders) st.N[a] = 0.0;  // h_0 = 0
    const double ld0 = p.log_delta0 ? *p.log_delta0 : s * p.log_t0;
    for (double a : d_orders) st.delta[a] = ld0;

    double sumP = -kInf, B = 0.0, E = 0.0;
    for (int j = 0; j <= J; ++j) {
        st.j = j;
        st.log_t = p.log_t0 * std::pow(kap, j);
        if (!std::isfinite(st.log_t)) {
            // beyond the log range every positive power of t_j is 0 and the checks hold in the limit
            ev.verdict.extrapolated_from = j;
            break;
        }
        const double lr = st.log_rho, ls = st.log_sigma, lt = st.log_t;
        st.K.clear();
        for (double a : k_orders) st.K[a] = logK(p, lr, ls, a);
        auto K = [&](double a) { return st.K.at(a); };
        auto N = [&](double a) { return st.N.at(a); };
        auto d = [&](double a) { return st.delta.at(a); };

        Cascade& c = st.cascade;
        c.P = kLog3 + K(2.0) + N(3.0) + pw(s - 1.0, lt);
        sumP = lse(sumP, c.P);
        c.sumP = sumP;
        c.Q = kLog3 + lc_2 + K(3.0) + pw((kap - 1.0) * (s - 1.0), lt);
        c.a = kLog3 + K(m) + 2.0 * N(beta) + N(k + beta) + pw(alpha, lt);
        c.a_tilde = std::log(27.0) + lc_m + 2.0 * K(beta) + K(k + beta) + pw((kap - 1.0) * alpha, lt);
        c.C = std::log(18.0) + lc_m + 2.0 * K(beta) + 2.0 * K(m + 1.0);
        c.b = c.C + pw((kap - 1.0) * (mu - kap * s), lt);
        if (j == 0) {
            B = K(m) + 2.0 * N(beta) + pw(mu - kap * s, lt) + d(k + mu);
            E = c.C + 2.0 * N(beta) + N(k + mu + 2.0) + pw(gam, lt);
        }
        c.B = B;
        c.E = E;
        const double Cp = lC0 + 2.0 * (kLog3 + K(beta)) + K(k + mu + 2.0);
        c.e = Cp + pw((kap - 1.0) * gam, lt);
        c.f = Cp + c.C + 2.0 * N(3.0) + N(k + beta) + pw(kap * gam + s - mu - 1.5, lt);
        c.A = kLog2 + K(k + 1.0) + N(k + 2.0) + pw(s - 1.0, lt);
        c.smallness = pw(s - 0.5, lt) - 3.5 * lr - (2.0 * p.n + 1.0) * ls;

        st.failed.clear();
        auto check = [&](bool ok, const char* name) {
            if (!ok) st.failed.emplace_back(name);
        };
        check(c.a < kLogHalf, "a_j < 1/2");
        check(c.B < kLogHalf, "B_j < 1/2");
        check(c.E <= std::log(0.25), "E_j <= 1/4");
        check(c.f < std::log(0.125), "f_j < 1/8");
        check(c.b <= kLogHalf, "b_j <= 1/2");
        check(c.e < kLogHalf, "e_j < 1/2");
        check(c.sumP <= lg0, "graph bound");
        check(d(k) <= pw(s, lt), "error bound");
        check(c.smallness <= lg1, "small error");
        check(d(1.0) <= 0.0, "delta(1) <= 1");
        check(lt < lr + ls - l_margin, "smoothing margin");
        for (const auto& [a, v] : st.K)
            if (std::isnan(v)) throw Error("schedule: NaN in log K");
        for (double v : {c.P, c.a, c.B, c.E, c.e, c.f, c.b})
            if (std::isnan(v)) throw Error("schedule: NaN in log cascade");

        if (!st.failed.empty() && ev.verdict.pass) {
            ev.verdict.pass = false;
            ev.verdict.first_failure = j;
            ev.verdict.failed = st.failed;
        }
        ev.states.push_back(st);
        if (j == J) break;

        // advance the bounds
        ScheduleState nx;
        nx.log_rho = lr + std::log1p(-5.0 * std::exp(ls));
        nx.log_sigma = ls - std::log(5.0);
        for (double a : n_orders) nx.N[a] = kLog3 + logK(p, lr, ls, a) + N(a);
        const double dm_beta = lse(N(beta) + d(m), pw(s, lt) + N(m + beta));
        nx.N[m + 0.5] = logK(p, lr, ls, m + 0.5) + lse(N(m + 0.5), dm_beta);
        nx.N[m + beta] = logK(p, lr, ls, m + beta) + lse(N(m + beta), -2.0 * lt + dm_beta);

        const double dk = K(m) + 2.0 * N(beta) +
                          lse(pw(mu, lt) + d(k + mu),
                              lse({0.5 * lt, d(1.0) - 0.5 * lt, d(0.0) - lt}) + d(k) + N(k + beta));
        const double amp = lse(0.0, 2.0 * N(3.0) + d(1.0) - lt);
        const double dmu = K(m + 1.0) + amp + lse(d(k + mu), N(k + mu + 2.0) + d(1.0));
        const double dmm = K(m + 1.0) + amp + lse(d(m), N(m + 2.0) + d(1.0));
        // norms increase with the order
        nx.delta[m] = dmm;
        nx.delta[k + mu] = std::min(dmu, dmm);
        nx.delta[k] = std::min(dk, nx.delta[k + mu]);
        nx.delta[1.0] = nx.delta[k];
        nx.delta[0.0] = nx.delta[k];

        B = lse(c.b + B, c.E);
        E = lse(c.e + E, c.f);
        st = std::move(nx);
    }

    const ScheduleState& s0 = ev.states.front();
    const double budget_B = kLogHalf - (s0.K.at(m) + 2.0 * s0.N.at(beta) + pw(mu - kap * s, p.log_t0));
    ev.verdict.log_delta0_budget = std::min(s * p.log_t0, budget_B);
    return ev;
}

T0Search find_t0(const ScheduleParams& p, int J, double log_floor) {
    T0Search r;
    auto pass = [&](double lt0) {
        ScheduleParams q = p;
        q.log_t0 = lt0;
        bool ok = evolve(q, J).verdict.pass;
        ++r.evaluations;
        r.samples.emplace_back(lt0, ok);
        return ok;
    };
    ScheduleParams probe = p;
    probe.log_t0 = -1.0;
    auto adm = admissible(probe);
    if (!adm.ok) throw InadmissibleError("inadmissible schedule parameters", adm.violated);

    double fail = -1e-12;
    if (pass(fail)) {
        r.log_t0 = fail;
    } else {
        double x = -1.0;
        while (!pass(x)) {
            fail = x;
            x *= 2.0;
            if (x < log_floor) throw InfeasibleError("schedule infeasible under supplied constants");
        }
        double ok = x;
        while (ok - fail < -1e-3 || fail - ok > 1e-3) {
            double mid = 0.5 * (ok + fail);
            if (pass(mid)) ok = mid;
            else fail = mid;
        }
        r.log_t0 = ok;
    }
    // pass must persist below the returned value
    for (double f : {1.0 + 1e-6, 1.001, 1.1, 1.5, 2.0, 10.0}) {
        if (!pass(r.log_t0 * f)) r.monotone = false;
    }
    auto sorted = r.samples;
    std::sort(sorted.begin(), sorted.end());
    // any fail strictly below a pass breaks monotonicity
    double lowest_pass_above = kInf;
    for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
        if (it->second) lowest_pass_above = it->first;
        else if (lowest_pass_above < kInf) r.monotone = false;
    }
    return r;
}

namespace {

void finish(SeriesVerdict& v) {
    const auto& r = v.log_ratio;
    v.onset = -1;
    if (!r.empty() && r.back() < 0.0) {
        int j0 = static_cast<int>(r.size()) - 1;
        while (j0 > 0 && r[j0 - 1] < 0.0) --j0;
        v.onset = j0;
    }
    v.limiting_log_ratio = r.empty() ? 0.0 : r.back();
    v.converges = v.onset >= 0 && !v.boundary;
}

}  // namespace

ConvergenceReport convergence_report(const ScheduleParams& p, const Evolution& ev) {
    const double s = p.s, kap = p.kappa, m = p.m, beta = p.beta(), k = p.k, a = p.a, b = p.b;
    ConvergenceReport rep;
    const auto& S = ev.states;
    const std::size_t n = S.empty() ? 0 : S.size() - 1;

    auto K = [&](const ScheduleState& st, double o) { return logK(p, st.log_rho, st.log_sigma, o); };

    SeriesVerdict s1{"K(a)N(a+1)t^(s-1/2)"}, s2{"K(a)N(k+2)t^(k-a+s)"};
    s2.boundary = s + k - a <= 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const auto& st = S[j];
        const double lt = st.log_t;
        s2.log_ratio.push_back(kLog2 + log_c_hat(p, a) + K(st, k + 2.0) + pw((kap - 1.0) * (s + k - a), lt));
        const double tail = pw(k - a - 1.0 + s, lt) + st.N.at(k + 2.0) - st.N.at(a + 1.0);
        s1.log_ratio.push_back(log_c_hat(p, a) + K(st, a + 1.0) + pw((kap - 1.0) * (s - 0.5), lt) + lse(0.0, tail));
    }

    const double span = m + 0.5 - a;
    rep.lambda = span > 0.0 ? (m + 0.5 - b) / span : 0.0;
    SeriesVerdict interp{"interpolation (A/A)^l (B/B)^(1-l)"};
    interp.boundary = rep.lambda <= 0.0 || rep.lambda > 1.0;
    const double lam = std::clamp(rep.lambda, 0.0, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
        const auto& st = S[j];
        const double Ar = kLog3 + log_c_hat(p, k + 1.0) + K(st, k + 2.0) + pw((kap - 1.0) * (s - 1.0), st.log_t);
        const double Br = std::log(16.0) + log_c_hat(p, m + 0.5) + K(st, m + beta) + K(st, beta) + st.N.at(beta);
        interp.log_ratio.push_back(pw(lam, Ar) + pw(1.0 - lam, Br));
    }

    // composition sums: |g_j(2)|_k terms, the N(3) delta(1) N(m+1/2) product, and the f~ ratio bound
    SeriesVerdict g{"composition |g_j(2)|_k"}, fe{"composition K N(3) delta(1) N(m+1/2)"}, fc{"composition f~ ratio"};
    auto gterm = [&](const ScheduleState& st) { return K(st, k) + pw(s - 0.5, st.log_t) + st.N.at(k + 2.0); };
    auto feterm = [&](const ScheduleState& st) {
        return K(st, b) + st.N.at(3.0) + st.delta.at(1.0) + st.N.at(m + 0.5);
    };
    for (std::size_t j = 0; j < n; ++j) {
        const auto& st = S[j];
        g.log_ratio.push_back(gterm(S[j + 1]) - gterm(st));
        fe.log_ratio.push_back(feterm(S[j + 1]) - feterm(st));
        const double Kh = K(st, m + 0.5);
        const double B13 = lse({kLog2 + Kh + st.N.at(m + 0.5), Kh + st.N.at(beta) + st.delta.at(m),
                                Kh + st.N.at(m + beta) + pw(s, st.log_t)});
        fc.log_ratio.push_back(log_c_hat(p, b) + kLog3 + K(st, 3.0) + pw((kap - 1.0) * s, st.log_t) +
                               lse(0.0, Kh + B13));
    }

    for (SeriesVerdict* v : {&s1, &s2, &interp, &g, &fe, &fc}) {
        finish(*v);
        rep.all_converge = rep.all_converge && v->converges;
        rep.series.push_back(std::move(*v));
    }
    return rep;
}

ConvergenceReport convergence_report(const ScheduleParams& p, int J) { return convergence_report(p, evolve(p, J)); }

void write_schedule_csv(std::ostream& os, const Evolution& ev) {
    os << "j,log_rho,log_sigma,log_t,log_P,log_sumP,log_Q,log_a,log_a_tilde,log_B,log_b,log_E,log_e,log_f,log_A,"
          "log_smallness,log_delta_1,failed\n";
    char buf[64];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    for (const auto& st : ev.states) {
        const auto& c = st.cascade;
        const double dk = st.delta.at(1.0);
        os << st.j;
        for (double x : {st.log_rho, st.log_sigma, st.log_t, c.P, c.sumP, c.Q, c.a, c.a_tilde, c.B, c.b, c.E, c.e,
                         c.f, c.A, c.smallness, dk})
            os << "," << num(x);
        os << ",";
        for (std::size_t i = 0; i < st.failed.size(); ++i) os << (i ? ";" : "") << st.failed[i];
        os << "\n";
    }
}

}  // namespace crlab
