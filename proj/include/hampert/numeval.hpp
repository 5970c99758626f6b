#pragma once

// Numeric evaluation of differential polynomials: the bridge from the exact
// symbolic layer to the solvers.  Bindings supply the value of u, the jet
// values u_x, u_xx, ..., and every coefficient symbol S^(j).

#include "hampert/diffalg.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace hampert::numeval {

struct Bindings {
    double u = 0.0;
    std::vector<double> jets;  // jets[n-1] = value of u^(n)
    std::function<double(std::uint32_t symbol, std::uint32_t order)> symbol;
};

inline double eval(const diffalg::DiffPoly& p, const Bindings& b) {
    double total = 0.0;
    for (const auto& [m, c] : p.terms()) {
        double term = static_cast<double>(c);
        for (const auto& [v, e] : m) {
            double base;
            if (v == diffalg::kLogVar) {
                if (b.jets.empty() || b.jets[0] <= 0.0)
                    throw std::domain_error("eval: log(ux) needs ux > 0");
                base = std::log(b.jets[0]);
            } else if (diffalg::is_jet_var(v)) {
                std::uint32_t n = diffalg::jet_order(v);
                if (n > b.jets.size()) throw std::out_of_range("eval: missing jet value");
                base = b.jets[n - 1];
            } else if (diffalg::coef_symbol(v) == 0) {
                base = b.u;
            } else {
                if (!b.symbol) throw std::logic_error("eval: no symbol binding");
                base = b.symbol(diffalg::coef_symbol(v), diffalg::coef_order(v));
            }
            term *= std::pow(base, e);
        }
        total += term;
    }
    return total;
}

inline double eval(const diffalg::EpsSeries& s, const Bindings& b, double eps) {
    double total = 0.0;
    for (const auto& [k, p] : s.components()) total += std::pow(eps, k) * eval(p, b);
    return total;
}

}  // namespace hampert::numeval
