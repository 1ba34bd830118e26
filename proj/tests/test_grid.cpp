#include <gtest/gtest.h>

#include <cmath>

#include "crlab/errors.hpp"
#include "crlab/grid.hpp"

using namespace crlab;

namespace {

GridPtr ball(int dim, int points, double r) {
    auto lat = Lattice::cube(dim, points, 1.0);
    return Grid::from_predicate(lat, [&](const double* x) {
        double s = 0;
        for (int a = 0; a < dim; ++a) s += x[a] * x[a];
        return s <= r * r + 1e-12;
    });
}

}  // namespace

TEST(Lattice, FlatRoundTrip) {
    auto lat = Lattice::box({3, 4, 5}, {0, 0, 0}, {1, 1, 1});
    int k[3], back[3];
    for (std::int64_t f = 0; f < lat->size(); ++f) {
        lat->unflat(f, k);
        EXPECT_EQ(lat->flat(k), f);
        lat->unflat(lat->flat(k), back);
        EXPECT_EQ(back[2], k[2]);
    }
}

TEST(Grid, NeighborsAndOrigin) {
    auto g = ball(3, 11, 0.8);
    int o = g->index_of_origin();
    ASSERT_GE(o, 0);
    for (int a = 0; a < 3; ++a) {
        int p = g->neighbor(o, a, +1);
        ASSERT_GE(p, 0);
        EXPECT_NEAR(g->point(p)[a], 0.2, 1e-12);
        EXPECT_EQ(g->neighbor(p, a, -1), o);
    }
}

TEST(Grid, InteriorAndDilate) {
    auto g = ball(2, 21, 0.7);
    auto in = g->interior();
    EXPECT_TRUE(in->subset_of(*g));
    EXPECT_LT(in->size(), g->size());
    auto big = g->dilate(1);
    EXPECT_TRUE(g->subset_of(*big));
    EXPECT_TRUE(big->interior()->size() >= g->size() - 0);
}

TEST(Field, CentralDifferenceExactOnQuadratic) {
    auto g = ball(3, 17, 1.0);
    auto u = sample_scalar(g, [](const double* x) { return x[0] * x[0] + 3.0 * x[1] * x[2]; });
    auto in = g->interior();
    auto d0 = diff_central(u, 0, in);
    auto d1 = diff_central(u, 1, in);
    for (std::size_t i = 0; i < in->size(); ++i) {
        auto x = in->point(i);
        EXPECT_NEAR(d0.v[i].real(), 2 * x[0], 1e-12);
        EXPECT_NEAR(d1.v[i].real(), 3 * x[2], 1e-12);
    }
}

TEST(Field, OneSidedAtBoundary) {
    auto lat = Lattice::box({5}, {0.0}, {1.0});
    auto g = Grid::full(lat);
    auto u = sample_scalar(g, [](const double* x) { return x[0] * x[0]; });
    auto du = diff(u, 0);
    EXPECT_NEAR(du.v[0].real(), 1.0, 1e-12);  // forward difference (1-0)/1
    EXPECT_NEAR(du.v[2].real(), 4.0, 1e-12);
    EXPECT_NEAR(du.v[4].real(), 7.0, 1e-12);  // backward (16-9)/1
}

TEST(Field, ExtendReproducesLinear) {
    auto g = ball(3, 17, 0.6);
    auto big = g->dilate(3);
    auto lin = [](const double* x) { return cplx(1.0 + 2 * x[0] - x[1] + 0.5 * x[2], x[0]); };
    auto u = sample_scalar(g, lin);
    auto e = extend(u, big);
    for (std::size_t i = 0; i < big->size(); ++i) {
        auto x = big->point(i);
        EXPECT_NEAR(std::abs(e.v[i] - lin(x.data())), 0.0, 1e-12);
    }
}

TEST(Field, InterpolationExactOnMultilinear) {
    auto lat = Lattice::cube(3, 9, 1.0);
    auto g = Grid::full(lat);
    auto f = [](const double* x) { return cplx(x[0] * x[1] * x[2] + x[0] - 2 * x[2], 0.0); };
    auto u = sample_scalar(g, f);
    double p[3] = {0.137, -0.411, 0.73};
    EXPECT_NEAR(std::abs(interpolate_scalar(u, p) - f(p)), 0.0, 1e-12);
    double out[3] = {1.5, 0, 0};
    EXPECT_THROW(interpolate_scalar(u, out), OutOfDomain);
}

TEST(Field, SupNormSkipsUndefined) {
    auto lat = Lattice::box({3}, {0.0}, {1.0});
    auto g = Grid::full(lat);
    GridField u(g, 2);
    u.at(0, 0) = 3.0;
    u.at(0, 1) = 4.0;
    u.at(1, 0) = cplx(std::nan(""), 0.0);
    u.at(2, 0) = 1.0;
    EXPECT_DOUBLE_EQ(sup_norm(u), 5.0);
}
