#include "crlab/homotopy.hpp"

#include <cmath>
#include <map>
#include <random>

#include "crlab/errors.hpp"
#include "crlab/holder.hpp"

namespace crlab {

namespace {

using Trip = Eigen::Triplet<cplx>;

double max_row_norm2(const SparseC& A) {
    double m = 0.0;
    for (int r = 0; r < A.outerSize(); ++r) {
        double s = 0.0;
        for (SparseC::InnerIterator it(A, r); it; ++it) s += std::norm(it.value());
        m = std::max(m, s);
    }
    return m;
}

Eigen::VectorXcd as_vector(const GridField& u) {
    Eigen::VectorXcd x(u.v.size());
    for (std::size_t i = 0; i < u.v.size(); ++i) x(i) = u.v[i];
    return x;
}

// rows: for each point of `out` and each increasing (q+1)-tuple; columns: points of `in` times q-tuples
SparseC dbar_matrix(const GridField& Y, int N, int q, const GridPtr& in, const GridPtr& out) {
    const int dim = in->dim();
    const auto& src = form_indices(N, q);
    const auto& dst = form_indices(N, q + 1);
    std::map<std::vector<int>, int> pos;
    for (std::size_t k = 0; k < src.size(); ++k) pos[src[k]] = static_cast<int>(k);
    const int cs = static_cast<int>(src.size()), cd = static_cast<int>(dst.size());
    const Lattice& lat = in->lattice();
    std::vector<Trip> trips;
    std::vector<int> k(dim);
    for (std::size_t i = 0; i < out->size(); ++i) {
        int iy = Y.grid->index_of(out->flat(i));
        if (iy < 0) throw CoverageError("dbar matrix: tangential basis missing at a form point");
        out->multi(i, k.data());
        for (int j = 0; j < dim; ++j) {
            int save = k[j];
            k[j] = save + 1;
            int p = k[j] < lat.n[j] ? in->index_of(lat.flat(k.data())) : -1;
            k[j] = save - 1;
            int m = k[j] >= 0 ? in->index_of(lat.flat(k.data())) : -1;
            k[j] = save;
            if (p < 0 || m < 0) throw ResolutionError("dbar matrix: central difference leaves the input grid");
            const double inv = 1.0 / (2.0 * lat.step[j]);
            for (int b = 0; b < cd; ++b) {
                const auto& B = dst[b];
                for (int l = 0; l <= q; ++l) {
                    cplx c = std::conj(Y.at(iy, B[l] * dim + j));
                    if (c == cplx(0.0)) continue;
                    std::vector<int> A;
                    for (int r = 0; r <= q; ++r)
                        if (r != l) A.push_back(B[r]);
                    const int col = pos.at(A);
                    const double sign = l % 2 ? -1.0 : 1.0;
                    const int row = static_cast<int>(i) * cd + b;
                    trips.emplace_back(row, p * cs + col, sign * c * inv);
                    trips.emplace_back(row, m * cs + col, -sign * c * inv);
                }
            }
        }
    }
    SparseC A(static_cast<int>(out->size()) * cd, static_cast<int>(in->size()) * cs);
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

}  // namespace

std::vector<cplx> to_vector(const GridField& u) { return u.v; }

GridField from_vector(const GridPtr& g, int comps, const Eigen::VectorXcd& x) {
    GridField u(g, comps);
    for (std::size_t i = 0; i < u.v.size(); ++i) u.v[i] = x(i);
    return u;
}

Eigen::VectorXcd cgls(const SparseC& A, const Eigen::VectorXcd& b, double ridge, const HomotopyOptions& opt,
                      SolveReport* rep) {
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(A.cols());
    SolveReport local;
    SolveReport& R = rep ? *rep : local;
    R = SolveReport{};
    const double bn = b.norm();
    if (bn == 0.0) return x;
    Eigen::VectorXcd r = b;
    Eigen::VectorXcd s = A.adjoint() * r;
    const double s0 = s.norm();
    Eigen::VectorXcd p = s;
    double gamma = s.squaredNorm();
    int it = 0;
    double rel = s.norm() / s0;
    for (; it < opt.max_iter && rel > opt.tol; ++it) {
        Eigen::VectorXcd q = A * p;
        double delta = q.squaredNorm() + ridge * p.squaredNorm();
        if (delta <= 0.0) break;
        double alpha = gamma / delta;
        x += alpha * p;
        r -= alpha * q;
        s = A.adjoint() * r - ridge * x;
        double gnew = s.squaredNorm();
        rel = std::sqrt(gnew) / s0;
        p = s + (gnew / gamma) * p;
        gamma = gnew;
        if (it % 10 == 0) R.history.push_back(rel);
    }
    R.iterations = it;
    R.normal_residual = rel;
    R.relative_residual = (A * x - b).norm() / bn;
    R.history.push_back(rel);
    if (rel > opt.tol) throw SolverError("cgls: no convergence within max_iter", R.history);
    return x;
}

HomotopyOperator::HomotopyOperator(const EmbeddingState& st, GridPtr G, HomotopyOptions opt)
    : n_(st.n), N_(st.n - 1), g1_(std::move(G)), opt_(opt) {
    g0_ = g1_->dilate(1);
    g2_ = g1_->interior();
    auto Y = tangential_basis(st.dom);
    d0_ = dbar_matrix(Y, N_, 0, g0_, g1_);
    ridge0_ = opt_.ridge_factor * max_row_norm2(d0_);
    if (N_ >= 2) {
        d1_ = dbar_matrix(Y, N_, 1, g1_, g2_);
        ridge1_ = opt_.ridge_factor * max_row_norm2(d1_);
    }
}

GridField HomotopyOperator::dbar0(const GridField& u) const {
    return from_vector(g1_, N_, d0_ * as_vector(restrict_to(u, g0_)));
}

GridField HomotopyOperator::dbar1(const GridField& phi) const {
    const int c2 = form_size(N_, 2);
    if (c2 == 0) return GridField(g2_, 0);
    return from_vector(g2_, c2, d1_ * as_vector(restrict_to(phi, g1_)));
}

GridField HomotopyOperator::P(const GridField& phi, SolveReport* rep) const {
    auto x = cgls(d0_, as_vector(restrict_to(phi, g1_)), ridge0_, opt_, rep);
    return from_vector(g0_, 1, x);
}

GridField HomotopyOperator::Q(const GridField& psi, SolveReport* rep) const {
    if (form_size(N_, 2) == 0) {
        if (rep) *rep = SolveReport{};
        return GridField(g1_, N_);
    }
    auto x = cgls(d1_, as_vector(restrict_to(psi, g2_)), ridge1_, opt_, rep);
    return from_vector(g1_, N_, x);
}

DefectReport homotopy_defect(const GridField& phi, const HomotopyOperator& op) {
    DefectReport rep;
    auto f = restrict_to(phi, op.forms_grid());
    auto u = op.P(f, &rep.p);
    auto v = op.Q(op.dbar1(f), &rep.q);
    rep.defect = f - op.dbar0(u) - v;
    double fn = sup_norm(f);
    rep.relative_norm = fn > 0.0 ? sup_norm(rep.defect) / fn : 0.0;
    return rep;
}

std::vector<ContractRow> contract_audit(const HomotopyOperator& op, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    const int dim = op.functions_grid()->dim();
    std::vector<ContractRow> rows;
    for (int id = 0; id < count; ++id) {
        // random trigonometric potential of low frequency
        std::vector<double> k1(dim), k2(dim);
        for (auto& v : k1) v = 1.5 * nd(rng);
        for (auto& v : k2) v = 1.5 * nd(rng);
        cplx c1(nd(rng), nd(rng)), c2(nd(rng), nd(rng));
        auto u0 = sample_scalar(op.functions_grid(), [&](const double* x) {
            double a = 0, b = 0;
            for (int d = 0; d < dim; ++d) {
                a += k1[d] * x[d];
                b += k2[d] * x[d];
            }
            return c1 * std::sin(a) + c2 * std::cos(b);
        });
        auto phi = op.dbar0(u0);
        auto u = op.P(phi);
        ContractRow row;
        row.form_id = id;
        row.lhs = norm(u, 0.5);
        row.rhs_skeleton = sup_norm(phi);
        row.fitted_constant = row.rhs_skeleton > 0 ? row.lhs / row.rhs_skeleton : 0.0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace crlab
