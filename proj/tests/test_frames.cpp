#include <gtest/gtest.h>

#include <cmath>

#include "crlab/domain.hpp"
#include "crlab/errors.hpp"
#include "crlab/frames.hpp"
#include "crlab/holder.hpp"

using namespace crlab;

namespace {

const cplx I1(0.0, 1.0);

double radius(const Point& x) {
    double r = 0.0;
    for (double v : x) r += v * v;
    return std::sqrt(r);
}

// least-squares slope of log y against log x
double slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += std::pow(std::log(x[i]) - mx, 2);
    }
    return sxy / sxx;
}

Domain perturbed_domain(int dim, int pts, std::uint64_t seed) {
    return scaled_domain(default_lattice(dim, 1.0, pts), 1.0, random_graph_function(dim, seed), 0.3);
}

EmbeddingState quadric_state(int dim, int pts) {
    return state_from_structure(make_structure("quadric", dim).X, dim, default_lattice(dim, 1.0, pts));
}

}  // namespace

TEST(Tangential, QuadricBasis) {
    auto dom = make_domain(default_lattice(3, 1.0, 17), 1.0, [](const double*) { return 0.0; });
    auto Y = tangential_basis(dom);
    for (std::size_t i = 0; i < Y.size(); ++i) {
        auto x = Y.grid->point(i);
        EXPECT_NEAR(std::abs(Y.at(i, 0) - 0.5), 0.0, 1e-15);
        EXPECT_NEAR(std::abs(Y.at(i, 1) + 0.5 * I1), 0.0, 1e-15);
        EXPECT_NEAR(std::abs(Y.at(i, 2) - I1 * cplx(x[0], -x[1])), 0.0, 1e-14);
    }
}

TEST(Tangential, HolomorphicCoordinatesExact) {
    auto dom = perturbed_domain(5, 9, 2);
    auto Y = tangential_basis(dom);
    auto yz = apply_fields(Y, embedding(dom), false, dom.mask);
    for (std::size_t i = 0; i < yz.size(); ++i)
        for (int b = 0; b < 2; ++b)
            for (int a = 0; a < 2; ++a) EXPECT_NEAR(std::abs(yz.at(i, b * 2 + a) - (a == b ? 1.0 : 0.0)), 0.0, 1e-12);
}

TEST(Tangential, ZnIsCR) {
    // w is built from the same lattice differences of h, so Y_abar z^n vanishes exactly
    auto dom = perturbed_domain(3, 17, 4);
    auto v = apply_fields(tangential_basis(dom), embedding(dom).component(1), true, dom.mask);
    EXPECT_LT(sup_norm(v), 1e-12);
}

TEST(Dbar, HolomorphicPolynomialOnQuadric) {
    std::vector<double> err;
    for (int pts : {17, 33}) {
        auto st = quadric_state(3, pts);
        auto Z = embedding(st.dom);
        GridField f(Z.grid, 1);
        for (std::size_t i = 0; i < f.size(); ++i) f.v[i] = Z.at(i, 0) * Z.at(i, 1) + Z.at(i, 1) * Z.at(i, 1);
        err.push_back(sup_norm(dbar(DbarKind::M, f, 0, st, st.dom.mask)));
    }
    EXPECT_LT(err[1], err[0] / 3.5);
    EXPECT_LT(err[1], 0.05);
}

TEST(Dbar, QuadricFrameMatchesTangentialOperator) {
    auto st = quadric_state(5, 9);
    GridField u = sample_scalar(st.dom.support(), [](const double* x) { return cplx(std::sin(x[0] + x[3]), x[4] * x[1]); });
    auto a = dbar(DbarKind::M, u, 0, st, st.dom.mask);
    auto b = dbar(DbarKind::X, u, 0, st, st.dom.mask);
    for (std::size_t i = 0; i < a.v.size(); ++i) EXPECT_NEAR(std::abs(a.v[i] - b.v[i]), 0.0, 1e-12);
}

TEST(Dbar, SquareVanishesUnderRefinement) {
    // (0,2)-forms need n >= 3, so this runs in dimension 5
    auto run = [](int pts, bool perturbed, int field) {
        Domain dom = perturbed ? perturbed_domain(5, pts, 9)
                               : make_domain(default_lattice(5, 1.0, pts), 1.0, [](const double*) { return 0.0; });
        EmbeddingState st;
        st.n = 3;
        st.dom = dom;
        auto u = sample_scalar(dom.support(), [field](const double* x) {
            double c = 1.0 + 0.3 * field;
            return cplx(std::sin(c * x[0] + x[2]) * std::cos(x[4]), std::cos(x[1] - c * x[3]) * x[4]);
        });
        auto d1 = dbar(DbarKind::M, u, 0, st, dom.support());
        return sup_norm(dbar(DbarKind::M, d1, 1, st, dom.mask));
    };
    for (bool perturbed : {false, true})
        for (int field = 0; field < 3; ++field) {
            double e1 = run(9, perturbed, field), e2 = run(17, perturbed, field);
            if (!perturbed) {
                EXPECT_LT(e2, 1e-10);
                continue;
            }
            EXPECT_GE(std::log2(e1 / e2), 1.0) << "field " << field;
        }
}

TEST(Frame, AdaptednessAndZeroCoefficientsOnQuadric) {
    auto st = quadric_state(3, 33);
    EXPECT_LE(adaptedness_residual(st), 10 * st.dom.spacing * st.dom.spacing);
    auto fr = frame_coefficients(st);
    EXPECT_LT(sup_norm(fr.A), 1e-14);
    EXPECT_LT(sup_norm(fr.B), 1e-14);
    EXPECT_LT(sup_norm(error_form(st)), 1e-13);
}

TEST(Frame, IntegrabilityProxy) {
    auto s = make_structure("random-integrable(3)", 5);
    auto st = state_from_structure(s.X, 5, default_lattice(5, 1.0, 13));
    EXPECT_LE(integrability_residual(st.X, 3, st.dom.mask), 0.1);
    // X_2 = d_2 + x_0 d_n: [X_1, X_2] = 1/2 d_n, outside the span
    auto bad = sample(st.dom.support(), 10, [](const double* x, cplx* c) {
        for (int k = 0; k < 10; ++k) c[k] = 0.0;
        c[0] = 0.5;
        c[1] = -0.5 * I1;
        c[5 + 2] = 0.5;
        c[5 + 3] = -0.5 * I1;
        c[5 + 4] = x[0];
    });
    EXPECT_GT(integrability_residual(bad, 3, st.dom.mask), 0.3);
}

TEST(Levi, QuadricIsTwoDelta) {
    for (int dim : {3, 5, 7}) {
        auto L = levi_form(make_structure("quadric", dim).X, dim);
        int N = cr_n(dim) - 1;
        EXPECT_NEAR((L.g - 2.0 * Eigen::MatrixXcd::Identity(N, N)).norm(), 0.0, 1e-8);
        EXPECT_TRUE(L.positive);
    }
    auto st = quadric_state(3, 33);
    EXPECT_NEAR(levi_form(st.X, 2).g(0, 0).real(), 2.0, 1e-9);
}

TEST(Levi, UnitaryCovariance) {
    auto s = make_structure("random-integrable(5)", 5);
    Eigen::MatrixXcd U(2, 2);
    const double th = 0.7;
    U << std::cos(th), I1 * std::sin(th), I1 * std::sin(th), std::cos(th);
    U *= std::exp(I1 * 0.3);
    FrameFn rotated = [&](const double* x, cplx* c) {
        cplx raw[10];
        s.X(x, raw);
        for (int a = 0; a < 2; ++a)
            for (int j = 0; j < 5; ++j) c[a * 5 + j] = U(a, 0) * raw[j] + U(a, 1) * raw[5 + j];
    };
    auto g = levi_form(s.X, 5).g;
    auto gu = levi_form(rotated, 5).g;
    EXPECT_NEAR((gu - U * g * U.adjoint()).norm(), 0.0, 1e-7);
}

TEST(Levi, SmallPerturbationNearTwo) {
    for (int dim : {3, 5}) {
        auto L = levi_form(make_structure("cubic-bump", dim, 0.1).X, dim);
        for (int k = 0; k < L.eigenvalues.size(); ++k) EXPECT_NEAR(L.eigenvalues(k), 2.0, 0.2);
    }
}

TEST(Normalize, QuadricIsFixed) {
    auto nz = normalize_initial(make_structure("quadric", 3).X, 3, default_lattice(3, 1.0, 17));
    EXPECT_NEAR((nz.T.linear - Eigen::MatrixXd::Identity(3, 3)).norm(), 0.0, 1e-8);
    for (double q : nz.T.q) EXPECT_NEAR(q, 0.0, 1e-6);
    EXPECT_LT(sup_norm(error_form(nz.state)), 1e-6);
}

TEST(Normalize, DoubledFrameHalvesCoordinates) {
    auto q = make_structure("quadric", 5);
    FrameFn twice = [&](const double* x, cplx* c) {
        q.X(x, c);
        for (int k = 0; k < 10; ++k) c[k] *= 2.0;
    };
    auto nz = normalize_initial(twice, 5, default_lattice(5, 1.0, 9));
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(nz.report.L1(k, k), 0.5, 1e-8);
    EXPECT_NEAR(std::abs(nz.report.L1(4, 4)), 1.0, 1e-8);
    // the Levi step restores the scale: 2x the frame is the same structure
    EXPECT_NEAR((nz.T.linear - Eigen::MatrixXd::Identity(5, 5)).norm(), 0.0, 1e-6);
}

TEST(Normalize, LeviAndOriginConditions) {
    for (int dim : {3, 5}) {
        auto nz = normalize_initial(make_structure("random-integrable(11)", dim).X, dim,
                                    default_lattice(dim, 1.0, dim == 3 ? 33 : 13));
        int N = cr_n(dim) - 1;
        auto L = levi_form(nz.fields, dim);
        EXPECT_NEAR((L.g - 2.0 * Eigen::MatrixXcd::Identity(N, N)).norm(), 0.0, 1e-5);
        EXPECT_LT(nz.report.quadratic_residual, 1e-4);
        EXPECT_LE(adaptedness_residual(nz.state), 10 * nz.state.dom.spacing * nz.state.dom.spacing);
        EXPECT_LT(value_at_origin_norm(error_form(nz.state)), 1e-6);
    }
}

TEST(Normalize, CoefficientsVanishToSecondOrder) {
    for (std::string name : {"cubic-bump", "random-integrable(7)"}) {
        auto nz = normalize_initial(make_structure(name, 3).X, 3, default_lattice(3, 1.0, 65));
        auto fr = frame_coefficients(nz.state);
        std::vector<double> rs, vs;
        for (double r : {0.1, 0.15, 0.2, 0.3, 0.4}) {
            double m = 0.0;
            for (std::size_t i = 0; i < fr.A.size(); ++i) {
                double ri = radius(fr.A.grid->point(i));
                if (std::abs(ri - r) > 0.025) continue;
                m = std::max(m, std::abs(fr.A.at(i)) + std::abs(fr.B.at(i)));
            }
            rs.push_back(r);
            vs.push_back(m);
        }
        EXPECT_GE(slope(rs, vs), 1.8) << name;
    }
}

TEST(Dilate, QuadricFixedPoint) {
    auto st = state_on_box(make_structure("quadric", 3).X, 3, source_lattice(*default_lattice(3, 1.0, 17), 4.0));
    auto d = dilate(st, 4.0);
    auto fr = frame_coefficients(d);
    EXPECT_LT(sup_norm(fr.A), 1e-13);
    EXPECT_LT(sup_norm(fr.B), 1e-13);
    EXPECT_LT(sup_norm(error_form(d)), 1e-12);
}

TEST(Dilate, GroupoidAction) {
    auto s = make_structure("cubic-bump", 3);
    auto st = state_on_box(s.X, 3, source_lattice(*default_lattice(3, 1.0, 17), 6.0));
    auto a = dilate(dilate(st, 2.0, 0.1), 3.0, 1.0);
    auto b = dilate(st, 6.0);
    ASSERT_EQ(a.X.size(), b.X.size());
    for (std::size_t i = 0; i < a.X.v.size(); ++i) EXPECT_NEAR(std::abs(a.X.v[i] - b.X.v[i]), 0.0, 1e-12);
    for (int d = 0; d < 3; ++d) EXPECT_NEAR(a.dom.lattice->step[d], b.dom.lattice->step[d], 1e-14);
    EXPECT_EQ(a.dom.mask->size(), b.dom.mask->size());
}

TEST(Dilate, CoverageError) {
    auto st = state_on_box(make_structure("quadric", 3).X, 3, source_lattice(*default_lattice(3, 1.0, 17), 2.0));
    EXPECT_THROW(dilate(st, 2.0, 1.5), CoverageError);
}

TEST(Dilate, CoefficientDecay) {
    auto s = make_structure("cubic-bump", 3);
    auto target = default_lattice(3, 1.0, 17);
    std::vector<double> rhos{2, 4, 8, 16}, a, b, e;
    for (double rho : rhos) {
        auto d = dilate(state_on_box(s.X, 3, source_lattice(*target, rho)), rho);
        auto fr = frame_coefficients(d);
        a.push_back(sup_norm(restrict_to(fr.A, d.dom.mask)));
        b.push_back(sup_norm(restrict_to(fr.B, d.dom.mask)));
        e.push_back(sup_norm(error_form(d)));
    }
    EXPECT_NEAR(slope(rhos, a), -2.0, 0.2);
    EXPECT_NEAR(slope(rhos, b), -1.0, 0.2);
    EXPECT_NEAR(slope(rhos, e), -1.0, 0.2);
}
