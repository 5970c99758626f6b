#pragma once

// Shared helpers for the unit tests: deterministic random differential
// polynomials and small conveniences.

#include "hampert/diffalg.hpp"

#include <random>
#include <string>

namespace testsupport {

using hampert::Rat;
using namespace hampert::diffalg;

struct RandomPolyGen {
    std::mt19937_64 rng;
    bool with_log = true;
    bool with_negative_ux = true;
    int max_jet = 5;

    explicit RandomPolyGen(std::uint64_t seed) : rng(seed) {}

    Rat rand_rat() {
        std::uniform_int_distribution<int> num(-6, 6);
        std::uniform_int_distribution<int> den(1, 8);
        int n = num(rng);
        if (n == 0) n = 1;
        return Rat(n, den(rng));
    }

    DiffPoly rand_monomial() {
        std::uniform_int_distribution<int> nfac(0, 3);
        std::uniform_int_distribution<int> kind(0, 5);
        std::uniform_int_distribution<int> jet(1, max_jet);
        std::uniform_int_distribution<int> ord(0, 2);
        std::uniform_int_distribution<int> expo(1, 3);
        DiffPoly m = DiffPoly::constant(rand_rat());
        int n = nfac(rng);
        for (int i = 0; i < n; ++i) {
            switch (kind(rng)) {
                case 0:
                    m = m * DiffPoly::u();
                    break;
                case 1:
                    m = m * DiffPoly::symbol("c", static_cast<std::uint32_t>(ord(rng)));
                    break;
                case 2:
                    m = m * DiffPoly::symbol("f", static_cast<std::uint32_t>(ord(rng)));
                    break;
                case 3:
                    m = m * DiffPoly::jet(static_cast<std::uint32_t>(jet(rng)), expo(rng));
                    break;
                case 4:
                    if (with_negative_ux) {
                        m = m * DiffPoly::jet(1, -expo(rng));
                        break;
                    }
                    [[fallthrough]];
                default:
                    if (with_log)
                        m = m * DiffPoly::log_ux();
                    else
                        m = m * DiffPoly::jet(1);
                    break;
            }
        }
        return m;
    }

    DiffPoly rand_poly(int max_terms = 4) {
        std::uniform_int_distribution<int> nterms(1, max_terms);
        DiffPoly p;
        int n = nterms(rng);
        for (int i = 0; i < n; ++i) p = p + rand_monomial();
        return p;
    }
};

}  // namespace testsupport
