#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "crlab/iteration.hpp"
#include "crlab/schedule.hpp"

namespace crlab::exp {

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

// Plain table with a CSV rendering; numbers printed with %.17g.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
    std::string csv() const;
};
std::string num(double x);

struct Outcome {
    bool pass = false;
    std::string summary;
    Table table;
    std::map<std::string, double> metrics;
};

EmbeddingState structure_state(const std::string& name, int dim, int points, double amplitude = -1.0);

// sup/C^2 norms of dbar_X Z and of the frame coefficients A, B after dilation by each rho
Outcome dilation_study(const std::string& structure, int dim, int points, const std::vector<double>& rhos);

// moments of the m_order = 4 kernel for dim 1..max_dim and degree-7 reproduction on nodes
Outcome mollifier_contract(int max_dim);

// slopes of |S_t u|_a and |(I - S_t) u|_a against t on oscillatory fields of exact regularity b
Outcome smoothing_exponents(int fields, std::uint64_t seed);

// inclusions and boundary distance on random graphs with |h|_2 <= c2
Outcome domain_audit(int count, int dim, int points, double c2, double sigma, std::uint64_t seed);

// random admissible f2 at |f2|_1 = 0.9 sigma/5, plus the one-dimensional series inverse on the lattice route
Outcome inverse_map_audit(int count, int points, std::uint64_t seed);

// (dbar_M)^2 under 2x refinement at dim 5 on quadric and perturbed quadric
Outcome complex_refinement(int fields);

// homotopy defect on exact (0,1)-forms
Outcome homotopy_audit(int count, int dim, int points, std::uint64_t seed);

// one alter + renormalize step: origin condition and nesting
Outcome renormalization_step(int dim, int points, double amplitude);

// interpolation inequality on smooth sample fields
Outcome interpolation_audit(int points, std::uint64_t seed);

// fitted commutator constant under refinement
Outcome commutator_audit();

struct ToyRun {
    EmbeddingState initial;
    Trajectory trajectory;
    std::string log;  // JSON lines
};
ToyRun toy_iteration(const std::string& structure, int dim, int points, double amplitude, int steps,
                     bool enforce, double t0 = 3e-3);

// criterion-style checks on a trajectory
bool delta_decreasing(const Trajectory& tr, int steps);
bool origin_and_nesting(const Trajectory& tr, double spacing, std::string* detail = nullptr);
bool has_flag(const Trajectory& tr, const std::string& flag);

// schedule pieces
Outcome schedule_certificate(const ScheduleParams& p, int J);
Outcome schedule_graph_bound(const ScheduleParams& p, int J);
Outcome schedule_norm_growth(const ScheduleParams& p, int J);

// descriptive audit ids for the CLI
const std::vector<std::string>& audit_ids();
Outcome run_audit(const std::string& id, int resolution, std::uint64_t seed);

}  // namespace crlab::exp
