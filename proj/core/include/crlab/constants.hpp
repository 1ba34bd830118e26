#pragma once

#include <cmath>
#include <map>
#include <vector>

namespace crlab {

struct EstimateConstants {
    double gamma0 = 0.45;
    double gamma1 = 1.0 / 45.0;
    // boundary-distance constant
    double c_hat = 3.0 * std::sqrt(2.0);
    // mollifier support margin t < rho*sigma/c_hat_margin
    double c_hat_margin = 5.0 / std::sqrt(2.0);
    double beta = 2.5;
    double alpha = 0.5;
    // c_a by order; missing orders fall back to c_default
    std::map<double, double> c_table;
    double c_default = 1.0;
    // s(a) = sum s_poly[i] a^i
    std::vector<double> s_poly{8.0, 7.0, 1.0};

    double c(double a) const {
        auto it = c_table.find(a);
        return it == c_table.end() ? c_default : it->second;
    }
    double s(double a) const {
        double r = 0.0, p = 1.0;
        for (double q : s_poly) {
            r += q * p;
            p *= a;
        }
        return r;
    }
};

}  // namespace crlab
