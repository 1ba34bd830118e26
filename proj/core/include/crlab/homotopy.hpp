#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <string>
#include <vector>

#include "crlab/frames.hpp"

namespace crlab {

struct HomotopyOptions {
    double ridge_factor = 1e-8;  // ridge = factor * (max row norm)^2
    int max_iter = 20000;
    double tol = 1e-8;           // normal-equation residual relative to |A^H b|
};

struct SolveReport {
    int iterations = 0;
    double relative_residual = 0.0;  // |A x - b| / |b|
    double normal_residual = 0.0;
    std::vector<double> history;
};

using SparseC = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

// Ridge least squares: min |A x - b|^2 + ridge |x|^2 by conjugate gradients on the normal equations.
Eigen::VectorXcd cgls(const SparseC& A, const Eigen::VectorXcd& b, double ridge, const HomotopyOptions& opt,
                      SolveReport* rep = nullptr);

// Model solution operators for the tangential complex over the quadric-graph domain:
// functions on G+ = dilate(G) -> (0,1)-forms on G -> (0,2)-forms on interior(G).
class HomotopyOperator {
public:
    HomotopyOperator(const EmbeddingState& st, GridPtr G, HomotopyOptions opt = {});

    const GridPtr& functions_grid() const { return g0_; }
    const GridPtr& forms_grid() const { return g1_; }
    const GridPtr& two_forms_grid() const { return g2_; }
    int N() const { return N_; }
    // the identity is only claimed for 0 < q < n - 2
    bool plumbing() const { return n_ < 4; }
    double ridge_P() const { return ridge0_; }
    double ridge_Q() const { return ridge1_; }
    void set_ridge_P(double r) { ridge0_ = r; }

    GridField dbar0(const GridField& u) const;    // on G+ -> on G
    GridField dbar1(const GridField& phi) const;  // on G -> on interior(G)

    GridField P(const GridField& phi, SolveReport* rep = nullptr) const;
    GridField Q(const GridField& psi, SolveReport* rep = nullptr) const;

    const SparseC& D0() const { return d0_; }
    const SparseC& D1() const { return d1_; }

private:
    int n_, N_;
    GridPtr g0_, g1_, g2_;
    SparseC d0_, d1_;
    double ridge0_ = 0.0, ridge1_ = 0.0;
    HomotopyOptions opt_;
};

struct DefectReport {
    GridField defect;
    double relative_norm = 0.0;
    SolveReport p, q;
};

// phi - dbar P phi - Q dbar phi on G
DefectReport homotopy_defect(const GridField& phi, const HomotopyOperator& op);

struct ContractRow {
    int form_id = 0;
    double a = 0.5;
    double lhs = 0.0;           // |P phi|_{1/2}
    double rhs_skeleton = 0.0;  // |phi|_0
    double fitted_constant = 0.0;
};

// |P phi|_{1/2} / |phi|_0 over random exact (hence closed) forms
std::vector<ContractRow> contract_audit(const HomotopyOperator& op, int count, std::uint64_t seed);

std::vector<cplx> to_vector(const GridField& u);
GridField from_vector(const GridPtr& g, int comps, const Eigen::VectorXcd& x);

}  // namespace crlab
