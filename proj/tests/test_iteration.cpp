#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "crlab/errors.hpp"
#include "crlab/holder.hpp"
#include "crlab/iteration.hpp"
#include "crlab/taylor.hpp"
#include "json.hpp"

using namespace crlab;

namespace {

EmbeddingState structure_state(const std::string& name, int dim, int pts, double amp = -1.0) {
    return state_from_structure(make_structure(name, dim, amp).X, dim, default_lattice(dim, 1.0, pts));
}

GridField constant_field(const GridPtr& g, const std::vector<cplx>& c) {
    GridField f(g, static_cast<int>(c.size()));
    for (std::size_t i = 0; i < g->size(); ++i)
        for (std::size_t k = 0; k < c.size(); ++k) f.at(i, static_cast<int>(k)) = c[k];
    return f;
}

// sum over the tensor kernel of |weight|, an upper bound for sup |S_t u| / sup |u|
double smoothing_bound(const Mollifier& m, double t, double step, int dim) {
    double s = 0.0;
    for (auto& [o, w] : axis_stencil(m, t, step)) s += std::abs(w);
    return std::pow(s, dim);
}

// 1/(2 eps) (sqrt(1 + 4 eps y) - 1) as a power series: sum (-1)^k C_k eps^k y^(k+1)
double series_inverse(double eps, double y) {
    double sum = 0.0, catalan = 1.0, p = y;
    for (int k = 0; k < 60; ++k) {
        sum += (k % 2 ? -1.0 : 1.0) * catalan * p;
        catalan = catalan * 2.0 * (2.0 * k + 1.0) / (k + 2.0);
        p *= eps * y;
    }
    return sum;
}

GridField random_map(const GridPtr& g, std::mt19937& rng, double size) {
    const int d = g->dim();
    std::normal_distribution<double> nd;
    std::vector<double> a(d * d * d), k(d * d);
    for (auto& v : a) v = nd(rng);
    for (auto& v : k) v = nd(rng);
    GridField f = sample(g, d, [&](const double* x, cplx* out) {
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int l = 0; l < d; ++l)
                for (int m = 0; m < d; ++m) s += a[(i * d + l) * d + m] * x[l] * x[m];
            double w = 0.0;
            for (int l = 0; l < d; ++l) w += k[i * d + l] * x[l];
            out[i] = s * std::cos(w);
        }
    });
    double c1 = norm(f, 1.0);
    return (size / c1) * f;
}

}  // namespace

TEST(Alter, ExactQuadricGivesZero) {
    auto st = structure_state("quadric", 3, 17);
    auto moll = build_mollifier(3);
    HomotopyOperator op(st, st.dom.mask);
    auto r = alter(st, 1e-3, op, moll, 1.0, 0.04);
    EXPECT_LT(sup_norm(r.error), 1e-13);
    EXPECT_LT(sup_norm(r.F), 1e-13);
}

TEST(Alter, MarginViolationThrows) {
    auto st = structure_state("quadric", 3, 17);
    auto moll = build_mollifier(3);
    HomotopyOperator op(st, st.dom.mask);
    EXPECT_THROW(alter(st, 0.02, op, moll, 1.0, 0.04), SupportViolation);
}

TEST(Alter, LargeErrorViolatesHypothesis) {
    auto st = structure_state("cubic-bump", 3, 17, 3.0);
    auto moll = build_mollifier(3);
    HomotopyOperator op(st, st.dom.mask);
    EXPECT_THROW(alter(st, 1e-3, op, moll, 1.0, 0.04), HypothesisViolation);
}

TEST(Alter, FirstTermVanishesAsTShrinks) {
    auto st = structure_state("cubic-bump", 3, 17, 0.01);
    auto moll = build_mollifier(3);
    HomotopyOperator op(st, st.dom.mask);
    double prev = std::numeric_limits<double>::infinity(), first = 0.0;
    for (double t : {0.16, 0.08, 0.04}) {
        auto r = alter(st, t, op, moll, 1.0, 1.0);
        double i1 = sup_norm(r.I1);
        EXPECT_LT(i1, prev) << "t = " << t;
        if (first == 0.0) first = i1;
        prev = i1;
    }
    // at least first order in t (boundary renormalisation limits the rate)
    EXPECT_GT(first / prev, 3.0);
}

TEST(Alter, FourTermSplitWithinDefect) {
    auto st = structure_state("cubic-bump", 3, 33, 0.01);
    auto moll = build_mollifier(3);
    HomotopyOperator op(st, st.dom.mask);
    const double t = 0.05;
    auto r = alter(st, t, op, moll, 1.0, 1.0);
    EXPECT_LT(r.identity_residual, 1e-12);
    GridField four = r.I1 + r.I2 + r.I3 + r.I4;
    double gap = sup_norm(four - r.altered_error);
    // plumbing mode: no Q, the gap is S_t of the homotopy defect
    double defect = 0.0;
    for (int j = 0; j < st.n; ++j)
        defect = std::max(defect, sup_norm(homotopy_defect(error_component(r.error, j, st.n - 1), op).defect));
    EXPECT_LE(gap, smoothing_bound(moll, t, st.dom.spacing, 3) * defect * (1 + 1e-9) + 1e-15);
}

TEST(Alter, FourTermIdentityDim5) {
    auto st = structure_state("cubic-bump", 5, 9, 0.01);
    auto moll = build_mollifier(5);
    HomotopyOperator op(st, st.dom.mask);
    auto r = alter(st, 1e-3, op, moll, 1.0, 0.04);
    EXPECT_TRUE(r.plumbing);
    EXPECT_LT(r.identity_residual, 1e-12);
    EXPECT_GT(sup_norm(r.I4), 0.0);
    EXPECT_LT(r.defect_norm, 0.2);
    EXPECT_FALSE(r.operator_limited);
}

TEST(InvertPoint, SeriesInverseOracle) {
    const double eps = 0.05;
    RealMap f2 = [&](const double* x, double* y) { y[0] = eps * x[0] * x[0]; };
    for (double y : {-0.9, -0.3, 0.0, 0.2, 0.7, 1.0}) {
        double x = 0.0;
        auto p = invert_point(f2, 1, &y, &x);
        EXPECT_TRUE(p.converged);
        EXPECT_NEAR(x, series_inverse(eps, y), 1e-12) << y;
    }
}

TEST(InvertMap, IdentityGivesIdentity) {
    auto st = structure_state("quadric", 3, 17);
    GridField f2(st.dom.support(), 3);
    auto mp = invert_map(f2, st.dom, 0.04);
    EXPECT_EQ(sup_norm(mp.g2), 0.0);
    EXPECT_EQ(mp.roundtrip, 0.0);
}

TEST(InvertMap, LatticeRouteMatchesSeries) {
    auto st = structure_state("quadric", 3, 33);
    const double eps = 0.002;
    GridField f2 = sample(st.dom.support(), 3, [&](const double* x, cplx* out) {
        out[0] = eps * x[0] * x[0];
        out[1] = out[2] = 0.0;
    });
    auto mp = invert_map(f2, st.dom, 0.04);
    GridPtr inner = sublevel_mask(st.dom.h, 0.96);
    double worst = 0.0;
    std::vector<double> y(3);
    for (std::size_t i = 0; i < inner->size(); ++i) {
        inner->point(i, y.data());
        int k = mp.g2.grid->index_of(inner->flat(i));
        double g = y[0] + mp.g2.at(k, 0).real();
        worst = std::max(worst, std::abs(g - series_inverse(eps, y[0])));
        EXPECT_EQ(mp.g2.at(k, 1), 0.0);
    }
    EXPECT_LT(worst, 1e-8);
    EXPECT_LT(mp.f2_origin, 1e-15);
    EXPECT_LT(mp.g2_origin, 10.0 * eps * eps);
}

TEST(InvertMap, ContractionWithinSigmaOverFive) {
    auto st = structure_state("quadric", 3, 17);
    std::mt19937 rng(11);
    const double sigma = 0.04;
    for (int trial = 0; trial < 10; ++trial) {
        GridField f2 = random_map(st.dom.mask, rng, 0.9 * sigma / 5.0);
        f2 = extend(f2, st.dom.support());
        auto mp = invert_map(f2, st.dom, sigma);
        EXPECT_LE(mp.contraction, sigma / 5.0);
        EXPECT_LE(mp.roundtrip, 10.0 * st.dom.spacing);
    }
}

TEST(InvertMap, OversizedMapViolatesHypothesis) {
    auto st = structure_state("quadric", 3, 17);
    std::mt19937 rng(5);
    GridField f2 = extend(random_map(st.dom.mask, rng, 0.05), st.dom.support());
    EXPECT_THROW(invert_map(f2, st.dom, 0.04), HypothesisViolation);
}

TEST(Resampler, ReproducesQuadratics) {
    auto g = Grid::full(Lattice::cube(3, 9, 1.0));
    GridField u = sample_scalar(g, [](const double* x) { return cplx(1 + x[0] - 2 * x[1] * x[2], x[2] * x[2]); });
    TaylorResampler rs(u);
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> ud(-0.6, 0.6);
    for (int k = 0; k < 50; ++k) {
        double x[3] = {ud(rng), ud(rng), ud(rng)};
        cplx v, gr[3];
        rs.eval(x, &v, gr);
        EXPECT_NEAR(std::abs(v - cplx(1 + x[0] - 2 * x[1] * x[2], x[2] * x[2])), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(gr[1] - cplx(-2 * x[2], 0.0)), 0.0, 1e-12);
    }
}

TEST(Renormalize, ConstantFLeavesStateUnchanged) {
    auto st = structure_state("cubic-bump", 3, 17, 0.01);
    GridField F = constant_field(st.dom.mask->dilate(1), {cplx(1e-5, 2e-5), cplx(-3e-5, 1e-5)});
    auto r = renormalize(st, F, 0.04);
    EXPECT_LT(sup_norm(r.pair.g2), 1e-15);
    EXPECT_LT(sup_norm(r.state.dom.h - st.dom.h), 1e-14);
    EXPECT_LT(sup_norm(r.state.X - st.X), 1e-14);
    EXPECT_LT(sup_norm(r.Zstar - embedding(st.dom)), 1e-15);
}

TEST(Renormalize, LinearNormalTermKeepsOriginCondition) {
    const std::vector<cplx> Kn{cplx(2e-5, -1e-5), cplx(1e-5, 3e-5)};
    std::vector<double> e0, hs;
    for (int pts : {17, 33}) {
        auto st = structure_state("quadric", 3, pts);
        GridField F = sample(st.dom.mask->dilate(1), 2, [&](const double* x, cplx* out) {
            out[0] = Kn[0] * x[2];
            out[1] = Kn[1] * x[2];
        });
        auto r = renormalize(st, F, 0.04);
        GridField Z = embedding(st.dom);
        double worst = 0.0;
        for (std::size_t i = 0; i < Z.size(); ++i)
            for (int j = 0; j < 2; ++j) {
                cplx yn = Z.at(i, 1).imag();
                worst = std::max(worst, std::abs(r.Zstar.at(i, j) - (Z.at(i, j) - cplx(0, 1) * Kn[j] * yn)));
            }
        EXPECT_LT(worst, 1e-15);
        EXPECT_TRUE(r.nesting);
        const double h = st.dom.spacing;
        EXPECT_LE(r.error_origin, 10.0 * h * h * std::abs(Kn[1]));
        e0.push_back(r.error_origin);
        hs.push_back(h);
    }
    // the residue at 0 is the lattice's O(h^2) chain-rule error
    EXPECT_GT(e0[0] / e0[1], 3.0);
}

TEST(Renormalize, AlteredStepKeepsOriginAndNesting) {
    for (int dim : {3, 5}) {
        auto st = structure_state("cubic-bump", dim, dim == 3 ? 33 : 11, 1e-5);
        auto moll = build_mollifier(dim);
        HomotopyOperator op(st, st.dom.mask);
        auto a = alter(st, 1e-3, op, moll, 1.0, 0.04);
        auto r = renormalize(st, a.F, 0.04);
        const double h = st.dom.spacing;
        EXPECT_LE(r.error_origin, 10.0 * h * h) << dim;
        EXPECT_TRUE(r.nesting) << dim;
        EXPECT_LE(r.pair.roundtrip, 10.0 * h);
        EXPECT_LT(norm(error_form(r.state), 0.0), norm(error_form(st), 0.0)) << dim;
        EXPECT_LT(adaptedness_residual(r.state), 1e-12);
    }
}

TEST(Renormalize, OversizedAlterationViolatesHypothesis) {
    auto st = structure_state("quadric", 3, 17);
    GridField F = sample(st.dom.mask->dilate(1), 2, [&](const double* x, cplx* out) {
        out[0] = 0.01 * x[0] * x[1];
        out[1] = 0.0;
    });
    EXPECT_THROW(renormalize(st, F, 0.04), HypothesisViolation);
}

TEST(Sequence, ExactQuadricIsStationary) {
    auto st = structure_state("quadric", 3, 17);
    SequenceParams P;
    P.max_steps = 3;
    auto tr = run_sequence(st, P, build_mollifier(3));
    ASSERT_EQ(tr.steps.size(), 4u);
    for (auto& r : tr.steps) {
        EXPECT_LT(r.delta.at(0.0), 1e-13);
        EXPECT_LT(r.delta.at(1.0), 1e-12);
    }
    EXPECT_EQ(tr.halted, "max steps");
}

TEST(Sequence, ScheduleRecurrence) {
    auto st = structure_state("quadric", 3, 17);
    SequenceParams P;
    P.max_steps = 2;
    auto tr = run_sequence(st, P, build_mollifier(3));
    EXPECT_DOUBLE_EQ(tr.steps[1].rho, 0.8);
    EXPECT_DOUBLE_EQ(tr.steps[1].sigma, 1.0 / 125.0);
    EXPECT_NEAR(tr.steps[2].log_t, 1.2 * 1.2 * std::log(P.t0), 1e-12);
}

TEST(Sequence, PerturbedQuadricConvergesDim3) {
    auto st = structure_state("cubic-bump", 3, 33, 1e-6);
    SequenceParams P;
    P.max_steps = 3;
    std::ostringstream log;
    auto tr = run_sequence(st, P, build_mollifier(3), {}, &log);
    ASSERT_EQ(tr.steps.size(), 4u) << tr.halted;
    EXPECT_EQ(tr.halted, "max steps");
    for (std::size_t j = 1; j < tr.steps.size(); ++j) {
        EXPECT_LT(tr.steps[j].delta.at(1.0), tr.steps[j - 1].delta.at(1.0)) << j;
        EXPECT_LE(tr.steps[j].error_origin, 10.0 * st.dom.spacing * st.dom.spacing);
        EXPECT_TRUE(tr.steps[j - 1].nesting);
        EXPECT_TRUE(tr.steps[j].flags.empty() || tr.steps[j].flags == std::vector<std::string>{"plumbing"});
    }
    // superlinear: the last contraction is much stronger than the first
    double r1 = tr.steps[1].delta.at(1.0) / tr.steps[0].delta.at(1.0);
    double r3 = tr.steps[3].delta.at(1.0) / tr.steps[2].delta.at(1.0);
    EXPECT_LT(r3, 0.1 * r1);

    std::istringstream in(log.str());
    std::string line;
    int count = 0;
    while (std::getline(in, line)) {
        auto j = nlohmann::json::parse(line);
        EXPECT_EQ(j["j"].get<int>(), count);
        EXPECT_TRUE(j.contains("delta") && j.contains("N") && j.contains("defect") && j.contains("flags"));
        ++count;
    }
    EXPECT_EQ(count, 4);
}

TEST(Sequence, HypothesisFailureHalts) {
    auto st = structure_state("cubic-bump", 3, 17, 1e-3);
    SequenceParams P;
    auto tr = run_sequence(st, P, build_mollifier(3));
    ASSERT_EQ(tr.steps.size(), 1u);
    EXPECT_NE(tr.halted.find("error bound"), std::string::npos) << tr.halted;
}

TEST(Sequence, UnenforcedHypothesesAreFlagged) {
    auto st = structure_state("cubic-bump", 3, 17, 1e-5);
    SequenceParams P;
    P.max_steps = 1;
    P.enforce_hypotheses = false;
    auto tr = run_sequence(st, P, build_mollifier(3));
    ASSERT_EQ(tr.steps.size(), 2u) << tr.halted;
    bool flagged = false;
    for (auto& f : tr.steps[0].flags) flagged |= f.rfind("hypothesis:", 0) == 0;
    EXPECT_TRUE(flagged);
}
