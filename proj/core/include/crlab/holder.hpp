#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crlab/constants.hpp"
#include "crlab/grid.hpp"

namespace crlab {

struct NormReport {
    double order = 0.0;
    double value = 0.0;
    // derivative_sups[j] = sum over |I| = j of sup |d^I u|
    std::vector<double> derivative_sups;
    double holder_ratio = 0.0;
};

struct HolderOptions {
    std::size_t exhaustive_limit = 20000;
    std::size_t sampled_pairs = 1000000;
    std::uint64_t seed = 0x5eed;
};

// Multi-indices of length `order` as non-decreasing axis lists.
std::vector<std::vector<int>> multi_indices(int dim, int order);

// All derivative fields d^I u with |I| <= order, in multi_indices order per level.
std::vector<std::vector<GridField>> derivative_tower(const GridField& u, int order);

double holder_seminorm(const GridField& u, double exponent, const HolderOptions& opt = {});

NormReport holder_norm(const GridField& u, double a, const HolderOptions& opt = {});

inline double norm(const GridField& u, double a, const HolderOptions& opt = {}) {
    return holder_norm(u, a, opt).value;
}

struct AuditReport {
    std::string kind;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    double bound = 0.0;
    bool pass = false;
};

// ||u||_c against rho^{-c} ||u||_a^lambda ||u||_b^{1-lambda}, c = lambda a + (1-lambda) b
AuditReport audit_interpolation(const GridField& u, double a, double b, double lambda, double rho,
                                const EstimateConstants& k = {}, const HolderOptions& opt = {});

enum class RuleKind { Convexity, Product, Chain, ChainFixed, InverseMap, XDerivative };

const char* rule_name(RuleKind k);

// Inputs are plain sampled fields; callers evaluate compositions and X-derivatives.
struct RuleInputs {
    const GridField* u = nullptr;
    const GridField* v = nullptr;
    // u o g sampled on the source domain (chain kinds)
    const GridField* composite = nullptr;
    // map deviation g - id (chain), matrix field W (chain_fixed), f_(2) (inverse_map)
    const GridField* g = nullptr;
    // g_(2) on the shrunk domain (inverse_map)
    const GridField* g2 = nullptr;
    // X_abar u for every abar (x_derivative), components indexed by abar
    const GridField* xu = nullptr;
    const GridField* error = nullptr;
    const GridField* h = nullptr;
    double a = 0.0, b = 0.0;
    double a1 = 0.0, b1 = 0.0, a2 = 0.0, b2 = 0.0;
    double lambda = 0.5;
    double rho = 1.0;
    double tau = 1.0;
    double sigma = 0.0;
    double bound = 0.0;  // 0 means c_a from the constants
};

AuditReport audit_rule(RuleKind kind, const RuleInputs& in, const EstimateConstants& k = {},
                       const HolderOptions& opt = {});

}  // namespace crlab
