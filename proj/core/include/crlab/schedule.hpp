#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crlab/constants.hpp"

namespace crlab {

// All schedule quantities are natural logarithms. t0 is carried as log_t0 because admissible starting
// values under c_a = 1 lie far below the smallest double.
struct ScheduleParams {
    double s = 2.0;
    double kappa = 1.2;
    double mu = 2.5;
    int k = 1;
    double a = 2.0;  // target regularity of the C^a convergence
    double b = 3.25;  // interpolation order, a < b <= m + 1/2
    double m = 4.0;
    double log_t0 = -1.0;
    double sigma0 = 1.0 / 25.0;
    double rho0 = 1.0;
    EstimateConstants constants;
    int n = 4;  // complex dimension in the small-error condition
    double eps = 0.5;
    // log delta_0(a) for every tracked order; unset means the budget s log t0
    std::optional<double> log_delta0;
    // overrides of log gamma0 / log gamma1 (constants are used when unset)
    std::optional<double> log_gamma0;
    std::optional<double> log_gamma1;

    double log_g0() const;
    double log_g1() const;
    double beta() const { return constants.beta; }
};

struct AdmissibilityReport {
    bool ok = true;
    std::vector<std::string> violated;
};

AdmissibilityReport admissible(const ScheduleParams& p);

// log of the step ratio bound K_{j+1}(a) / K_j(a) <= c_hat_a, uniform in j
double log_c_hat(const ScheduleParams& p, double a);

struct Cascade {
    double P = 0, sumP = 0, Q = 0;
    double a = 0, a_tilde = 0;
    double B = 0, b = 0, C = 0;
    double E = 0, e = 0, f = 0;
    double A = 0;
    double smallness = 0;  // t^{s-1/2} rho^{-7/2} sigma^{-2n-1}
};

struct ScheduleState {
    int j = 0;
    double log_rho = 0, log_sigma = 0, log_t = 0;
    std::map<double, double> K;      // order -> log K_j(a)
    std::map<double, double> N;      // order -> log bound of N_j(a)
    std::map<double, double> delta;  // order -> log bound of delta_j(a)
    Cascade cascade;
    std::vector<std::string> failed;  // names of the checks that fail at j
};

struct Verdict {
    bool pass = true;
    int first_failure = -1;
    std::vector<std::string> failed;  // at the first failing j
    double log_delta0_budget = 0.0;   // largest log delta_0(k) that the starting checks allow
    int extrapolated_from = -1;       // first j whose log t_j leaves the double range
};

struct Evolution {
    std::vector<ScheduleState> states;  // j = 0..J
    Verdict verdict;
};

// Runs the bound recursions for j = 0..J. Throws InadmissibleError.
Evolution evolve(const ScheduleParams& p, int J);

struct T0Search {
    double log_t0 = 0.0;
    int evaluations = 0;
    bool monotone = true;  // sampled pass at t < t0 for every checked pair
    std::vector<std::pair<double, bool>> samples;  // (log t0, verdict)
};

// Largest t0 (as log) with a passing verdict, bisected in log t0 to 1e-3 absolute.
// Throws InfeasibleError when even the bracket floor fails.
T0Search find_t0(const ScheduleParams& p, int J, double log_floor = -1e250);

struct SeriesVerdict {
    std::string name;
    std::vector<double> log_ratio;  // per j
    int onset = -1;                 // first j0 with log_ratio < 0 for all j >= j0
    double limiting_log_ratio = 0.0;
    bool converges = false;
    bool boundary = false;  // endpoint where the test is inconclusive
};

struct ConvergenceReport {
    std::vector<SeriesVerdict> series;
    double lambda = 0.0;
    bool all_converge = true;
};

ConvergenceReport convergence_report(const ScheduleParams& p, const Evolution& ev);
ConvergenceReport convergence_report(const ScheduleParams& p, int J);

void write_schedule_csv(std::ostream& os, const Evolution& ev);

}  // namespace crlab
