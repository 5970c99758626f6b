#pragma once

// Builders for every density, generator, map, operator, and constraint of the
// perturbation family, over the exact jet algebra.  Each transcribed rational
// constant is routed through a Mutator so the verification engine can probe
// single-coefficient sensitivity.

#include "hampert/diffalg.hpp"
#include "hampert/exprfn.hpp"
#include "hampert/mutation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hampert::models {

using diffalg::DiffPoly;
using diffalg::EpsSeries;
using diffalg::PoissonOperator;

// ---------------------------------------------------------------------------
// Mutation hooks live in mutation.hpp; builders accept an optional Mutator.

using hampert::CollectingMutator;
using hampert::Mutator;
using hampert::ScaleNthMutator;
using hampert::ScaleValueMutator;

namespace detail {
using hampert::mutation_detail::mut;
}  // namespace detail

// ---------------------------------------------------------------------------
// Functional parameters.  c, p, s are coefficient-only polynomials: either a
// pure registered symbol (fully formal) or a composite such as the constraint
// value of p.  Derivatives are taken with the algebra's u-derivation.

enum class SChoice { Zero, Free, Theorem2 };  // s = 0 | formal s(u) | c c'''/3456

inline DiffPoly s_of_choice(SChoice choice, const DiffPoly& c, Mutator* m = nullptr) {
    switch (choice) {
        case SChoice::Zero: return DiffPoly::zero();
        case SChoice::Free: return DiffPoly::symbol("s");
        case SChoice::Theorem2:
            return detail::mut(m, "s", 1, 3456) * c * diffalg::du(diffalg::du(diffalg::du(c)));
    }
    return DiffPoly::zero();
}

// ---------------------------------------------------------------------------
// h_f: the commuting Hamiltonian density for an arbitrary function f(u).
//
//   h_f = f - eps^2/24 c f''' ux^2
//         + eps^4 [ (p f''' + c^2 f4 / 480) uxx^2
//                   - ( c c'' f4 /1152 + c c' f5 /1152 + c^2 f6 /3456
//                       + p' f4 /6 + p f5 /6 - s f''' ) ux^4 ]

inline EpsSeries build_hf_density(const DiffPoly& c, const DiffPoly& p, const DiffPoly& s,
                                  const DiffPoly& f, const std::string& site_tag = "f",
                                  int max_order = 4, Mutator* m = nullptr) {
    using diffalg::du;
    const std::string site = "hf." + site_tag;
    auto R = [&](long long n, long long d) { return detail::mut(m, site, n, d); };
    std::vector<DiffPoly> fd{f};
    for (int j = 1; j <= 6; ++j) fd.push_back(du(fd.back()));
    auto F = [&](std::uint32_t j) { return fd[j]; };
    const DiffPoly ux2 = DiffPoly::jet(1, 2);
    const DiffPoly ux4 = DiffPoly::jet(1, 4);
    const DiffPoly uxx2 = DiffPoly::jet(2, 2);
    const DiffPoly c1 = du(c), c2 = du(du(c));
    const DiffPoly p1 = du(p);

    EpsSeries h(max_order);
    h.set(0, F(0));
    h.add(2, R(-1, 24) * c * F(3) * ux2);
    DiffPoly quad = (p * F(3) + R(1, 480) * c * c * F(4)) * uxx2;
    DiffPoly quart = R(1, 1152) * c * c2 * F(4) + R(1, 1152) * c * c1 * F(5) +
                     R(1, 3456) * c * c * F(6) + R(1, 6) * p1 * F(4) + R(1, 6) * p * F(5) -
                     s * F(3);
    h.add(4, quad - quart * ux4);
    return h;
}

// ---------------------------------------------------------------------------
// The perturbed Riemann-wave flow, i.e. the characteristic d_x(dH/du) for
// f = u^3/6, as printed:
//
//   u ux + eps^2/24 [2c uxxx + 4c' ux uxx + c'' ux^3]
//        + eps^4 [2p u5 + 2p'(5 uxx uxxx + 3 ux uxxxx)
//                 + p''(7 ux uxx^2 + 6 ux^2 uxxx) + 2p''' ux^3 uxx]

inline EpsSeries build_riem2_rhs(const DiffPoly& c, const DiffPoly& p, int max_order = 4,
                                 Mutator* m = nullptr) {
    using diffalg::du;
    auto R = [&](long long n, long long d = 1) { return detail::mut(m, "riem2", n, d); };
    auto J = [](std::uint32_t n, std::int32_t e = 1) { return DiffPoly::jet(n, e); };
    const DiffPoly c1 = du(c), c2 = du(du(c));
    const DiffPoly p1 = du(p), p2 = du(p1), p3 = du(p2);

    EpsSeries rhs(max_order);
    rhs.set(0, DiffPoly::u() * J(1));
    rhs.add(2, R(1, 24) * (R(2) * c * J(3) + R(4) * c1 * J(1) * J(2) + c2 * J(1, 3)));
    rhs.add(4, R(2) * p * J(5) +
                   R(2) * p1 * (R(5) * J(2) * J(3) + R(3) * J(1) * J(4)) +
                   p2 * (R(7) * J(1) * J(2, 2) + R(6) * J(1, 2) * J(3)) +
                   R(2) * p3 * J(1, 3) * J(2));
    return rhs;
}

// ---------------------------------------------------------------------------
// K: the quasitriviality generator.
//
//   K = int [ eps/24 c ux log ux
//             + eps^3 ( c^2/5760 uxx^3/ux^3 - p/4 uxx^2/ux ) ] dx

inline EpsSeries build_K_generator(const DiffPoly& c, const DiffPoly& p, int max_order = 5,
                                   Mutator* m = nullptr) {
    auto R = [&](long long n, long long d) { return detail::mut(m, "K", n, d); };
    auto J = [](std::uint32_t n, std::int32_t e = 1) { return DiffPoly::jet(n, e); };
    EpsSeries k(max_order);
    k.set(1, R(1, 24) * c * J(1) * DiffPoly::log_ux());
    k.add(3, R(1, 5760) * c * c * J(2, 3) * J(1, -3) - R(1, 4) * p * J(2, 2) * J(1, -1));
    return k;
}

// ---------------------------------------------------------------------------
// The printed quasitriviality substitution (image of the coordinate; the
// jets here are conventionally the v-jets of the unperturbed solution):
//
//   v + eps^2/24 d_x ( c vxx/vx + c' vx )
//     + eps^4 d_x [ c^2 (vxx^3/360vx^4 - 7 vxx vxxx/1920vx^3 + vxxxx/1152vx^2)_x
//                   + c c' (47vxx^3/5760vx^3 - 37 vxx vxxx/2880vx^2 + 5vxxxx/1152vx)
//                   + c'^2 (vxxx/384 - vxx^2/5760vx)
//                   + c c'' (vxxx/144 - vxx^2/360vx)
//                   + 1/1152 (7c'c'' vx vxx + c''^2 vx^3 + 6cc''' vx vxx
//                             + c'c''' vx^3 + c c4 vx^3)
//                   + p (vxx^3/2vx^3 - vxx vxxx/vx^2 + vxxxx/2vx)
//                   + p' vxxx + p'' vx vxx / 2 ]

inline EpsSeries build_quasitriviality_map(const DiffPoly& c, const DiffPoly& p,
                                           int max_order = 5, Mutator* m = nullptr) {
    using diffalg::du;
    using diffalg::total_derivative;
    auto R = [&](long long n, long long d = 1) { return detail::mut(m, "quasi", n, d); };
    auto J = [](std::uint32_t n, std::int32_t e = 1) { return DiffPoly::jet(n, e); };
    const DiffPoly c1 = du(c), c2 = du(c1), c3 = du(c2), c4 = du(c3);
    const DiffPoly p1 = du(p), p2 = du(p1);

    EpsSeries map(max_order);
    map.set(0, DiffPoly::u());
    map.add(2, R(1, 24) * total_derivative(c * J(2) * J(1, -1) + c1 * J(1)));

    DiffPoly inner = c * c *
                     total_derivative(R(1, 360) * J(2, 3) * J(1, -4) -
                                      R(7, 1920) * J(2) * J(3) * J(1, -3) +
                                      R(1, 1152) * J(4) * J(1, -2));
    inner = inner + c * c1 *
                        (R(47, 5760) * J(2, 3) * J(1, -3) - R(37, 2880) * J(2) * J(3) * J(1, -2) +
                         R(5, 1152) * J(4) * J(1, -1));
    inner = inner + c1 * c1 * (R(1, 384) * J(3) - R(1, 5760) * J(2, 2) * J(1, -1));
    inner = inner + c * c2 * (R(1, 144) * J(3) - R(1, 360) * J(2, 2) * J(1, -1));
    inner = inner + R(1, 1152) * (R(7) * c1 * c2 * J(1) * J(2) + c2 * c2 * J(1, 3) +
                                  R(6) * c * c3 * J(1) * J(2) + c1 * c3 * J(1, 3) +
                                  c * c4 * J(1, 3));
    inner = inner + p * (R(1, 2) * J(2, 3) * J(1, -3) - J(2) * J(3) * J(1, -2) +
                         R(1, 2) * J(4) * J(1, -1));
    inner = inner + p1 * J(3) + R(1, 2) * p2 * J(1) * J(2);
    map.add(4, total_derivative(inner));
    return map;
}

// ---------------------------------------------------------------------------
// The bihamiltonian constraint p = c^2/960 (5 c'/c - q''/q'), written without
// the removable division by c:  p = c c'/192 - c^2 q'' / (960 q').
//
// Symbolic version: q must be a pure registered symbol so that 1/q' exists in
// the ring.  Expression version: for concrete functions of u.

inline DiffPoly p_from_cq_symbolic(const DiffPoly& c, const std::string& q = "q",
                                   Mutator* m = nullptr) {
    auto R = [&](long long n, long long d) { return detail::mut(m, "cons", n, d); };
    DiffPoly q1inv = DiffPoly::var(diffalg::coef_var(diffalg::sym(q), 1), -1);
    DiffPoly q2 = DiffPoly::symbol(q, 2);
    return R(1, 192) * c * diffalg::du(c) - R(1, 960) * c * c * q2 * q1inv;
}

inline exprfn::Expr p_from_cq(const exprfn::Expr& c, const exprfn::Expr& q) {
    using namespace exprfn;
    Expr c1 = derivative(c);
    Expr q1 = derivative(q);
    Expr q2 = derivative(q1);
    return sub(div(mul(c, c1), lit(192)), div(mul(pow(c, 2), q2), mul(lit(960), q1)));
}

// ---------------------------------------------------------------------------
// The second Poisson structure of the pencil, transcribed order by order:
// { u(x), u(y) }_2 = sum_k eps^k sum_j A_{k,j} delta^(j)(x - y), with formal
// c(u), q(u) and the formal inverse of q'.

inline PoissonOperator build_second_poisson(int max_order = 4, Mutator* m = nullptr) {
    using diffalg::du;
    auto R = [&](long long n, long long d = 1) { return detail::mut(m, "L2", n, d); };
    auto J = [](std::uint32_t n, std::int32_t e = 1) { return DiffPoly::jet(n, e); };
    auto C = [](std::uint32_t j) { return DiffPoly::symbol("c", j); };
    auto Q = [](std::uint32_t j) { return DiffPoly::symbol("q", j); };
    // negative powers of q'
    auto Qi = [](std::int32_t k) {
        return DiffPoly::var(diffalg::coef_var(diffalg::sym("q"), 1), -k);
    };

    PoissonOperator op;
    op.add(0, 1, Q(0));
    op.add(0, 0, R(1, 2) * Q(1) * J(1));
    if (max_order < 2) return op;

    // eps^2
    op.add(2, 3, R(1, 8) * C(0) * Q(1));
    op.add(2, 2, R(3, 16) * du(C(0) * Q(1)) * J(1));
    op.add(2, 1,
           (R(1, 16) * C(2) * Q(1) + R(1, 6) * C(1) * Q(2) + R(5, 48) * C(0) * Q(3)) * J(1, 2) +
               (R(1, 16) * C(1) * Q(1) + R(7, 48) * C(0) * Q(2)) * J(2));
    op.add(2, 0,
           (R(1, 48) * C(2) * Q(2) + R(1, 24) * C(1) * Q(3) + R(1, 48) * C(0) * Q(4)) * J(1, 3) +
               R(1, 12) * (C(1) * Q(2) + C(0) * Q(3)) * J(1) * J(2) +
               R(1, 24) * C(0) * Q(2) * J(3));
    if (max_order < 4) return op;

    // eps^4
    const DiffPoly lead = R(3) * C(0) * C(1) * Q(1) + C(0) * C(0) * Q(2);
    op.add(4, 5, R(1, 192) * lead);
    op.add(4, 4, R(5, 384) * du(lead) * J(1));

    {  // delta'''
        DiffPoly gx2 = R(3, 32) * C(1) * C(2) * Q(1) + R(1, 32) * C(0) * C(3) * Q(1) +
                       R(3, 32) * C(1) * C(1) * Q(2) + R(5, 48) * C(0) * C(2) * Q(2) -
                       R(1, 240) * C(0) * C(1) * Q(2) * Q(2) * Qi(1) +
                       R(1, 480) * C(0) * C(0) * Q(2).pow(3) * Qi(2) +
                       R(19, 192) * C(0) * C(1) * Q(3) -
                       R(3, 640) * C(0) * C(0) * Q(2) * Q(3) * Qi(1) +
                       R(1, 64) * C(0) * C(0) * Q(4);
        DiffPoly gxx = R(3, 64) * C(1) * C(1) * Q(1) + R(3, 64) * C(0) * C(2) * Q(1) +
                       R(17, 192) * C(0) * C(1) * Q(2) -
                       R(1, 480) * C(0) * C(0) * Q(2) * Q(2) * Qi(1) +
                       R(19, 960) * C(0) * C(0) * Q(3);
        op.add(4, 3, gx2 * J(1, 2) + gxx * J(2));
    }

    {  // delta''
        DiffPoly gx3 = R(3, 128) * C(2) * C(2) * Q(1) + R(1, 32) * C(1) * C(3) * Q(1) +
                       R(1, 128) * C(0) * C(4) * Q(1) + R(19, 128) * C(1) * C(2) * Q(2) +
                       R(23, 384) * C(0) * C(3) * Q(2) + R(5, 64) * C(0) * C(1) * Q(4) +
                       R(7, 64) * C(0) * C(2) * Q(3) + R(1, 96) * C(0) * C(0) * Q(5) +
                       R(3, 32) * C(1) * C(1) * Q(3) -
                       R(1, 160) * C(1) * C(1) * Q(2) * Q(2) * Qi(1) -
                       R(1, 160) * C(0) * C(2) * Q(2) * Q(2) * Qi(1) +
                       R(1, 80) * C(0) * C(1) * Q(2).pow(3) * Qi(2) -
                       R(1, 160) * C(0) * C(0) * Q(2).pow(4) * Qi(3) -
                       R(17, 640) * C(0) * C(1) * Q(2) * Q(3) * Qi(1) +
                       R(21, 1280) * C(0) * C(0) * Q(2) * Q(2) * Q(3) * Qi(2) -
                       R(9, 1280) * C(0) * C(0) * Q(3) * Q(3) * Qi(1) -
                       R(9, 1280) * C(0) * C(0) * Q(2) * Q(4) * Qi(1);
        DiffPoly gxxx = R(9, 64) * C(1) * C(2) * Q(1) + R(3, 64) * C(0) * C(3) * Q(1) +
                        R(11, 64) * C(1) * C(1) * Q(2) + R(13, 64) * C(0) * C(2) * Q(2) -
                        R(3, 160) * C(0) * C(1) * Q(2) * Q(2) * Qi(1) +
                        R(3, 320) * C(0) * C(0) * Q(2).pow(3) * Qi(2) +
                        R(69, 320) * C(0) * C(1) * Q(3) -
                        R(13, 640) * C(0) * C(0) * Q(2) * Q(3) * Qi(1) +
                        R(3, 80) * C(0) * C(0) * Q(4);
        DiffPoly g3 = R(1, 32) * C(1) * C(1) * Q(1) + R(1, 32) * C(0) * C(2) * Q(1) +
                      R(13, 192) * C(0) * C(1) * Q(2) -
                      R(1, 320) * C(0) * C(0) * Q(2) * Q(2) * Qi(1) +
                      R(1, 60) * C(0) * C(0) * Q(3);
        op.add(4, 2, gx3 * J(1, 3) + gxxx * J(1) * J(2) + g3 * J(3));
    }

    {  // delta'
        DiffPoly gx4 = R(1, 48) * C(2) * C(2) * Q(2) + R(1, 32) * C(1) * C(3) * Q(2) +
                       R(1, 96) * C(0) * C(4) * Q(2) -
                       R(1, 160) * C(1) * C(2) * Q(2) * Q(2) * Qi(1) -
                       R(1, 480) * C(0) * C(3) * Q(2) * Q(2) * Qi(1) +
                       R(1, 160) * C(1) * C(1) * Q(2).pow(3) * Qi(2) +
                       R(1, 160) * C(0) * C(2) * Q(2).pow(3) * Qi(2) -
                       R(1, 80) * C(0) * C(1) * Q(2).pow(4) * Qi(3) +
                       R(1, 160) * C(0) * C(0) * Q(2).pow(5) * Qi(4) +
                       R(35, 384) * C(1) * C(2) * Q(3) + R(5, 128) * C(0) * C(3) * Q(3) -
                       R(9, 640) * C(1) * C(1) * Q(2) * Q(3) * Qi(1) -
                       R(9, 640) * C(0) * C(2) * Q(2) * Q(3) * Qi(1) +
                       R(11, 320) * C(0) * C(1) * Q(2) * Q(2) * Q(3) * Qi(2) -
                       R(13, 640) * C(0) * C(0) * Q(2).pow(3) * Q(3) * Qi(3) -
                       R(1, 64) * C(0) * C(1) * Q(3) * Q(3) * Qi(1) +
                       R(19, 1280) * C(0) * C(0) * Q(2) * Q(3) * Q(3) * Qi(2) +
                       R(17, 384) * C(1) * C(1) * Q(4) + R(5, 96) * C(0) * C(2) * Q(4) -
                       R(1, 64) * C(0) * C(1) * Q(2) * Q(4) * Qi(1) +
                       R(17, 1920) * C(0) * C(0) * Q(2) * Q(2) * Q(4) * Qi(2) -
                       R(11, 1280) * C(0) * C(0) * Q(3) * Q(4) * Qi(1) +
                       R(35, 1152) * C(0) * C(1) * Q(5) -
                       R(11, 3840) * C(0) * C(0) * Q(2) * Q(5) * Qi(1) +
                       R(1, 288) * C(0) * C(0) * Q(6);
        DiffPoly gx2xx = R(3, 128) * C(2) * C(2) * Q(1) + R(1, 32) * C(1) * C(3) * Q(1) +
                         R(1, 128) * C(0) * C(4) * Q(1) + R(91, 384) * C(1) * C(2) * Q(2) +
                         R(37, 384) * C(0) * C(3) * Q(2) -
                         R(1, 60) * C(1) * C(1) * Q(2) * Q(2) * Qi(1) -
                         R(1, 60) * C(0) * C(2) * Q(2) * Q(2) * Qi(1) +
                         R(1, 30) * C(0) * C(1) * Q(2).pow(3) * Qi(2) -
                         R(1, 60) * C(0) * C(0) * Q(2).pow(4) * Qi(3) +
                         R(59, 320) * C(1) * C(1) * Q(3) + R(53, 240) * C(0) * C(2) * Q(3) -
                         R(47, 640) * C(0) * C(1) * Q(2) * Q(3) * Qi(1) +
                         R(173, 3840) * C(0) * C(0) * Q(2) * Q(2) * Q(3) * Qi(2) -
                         R(77, 3840) * C(0) * C(0) * Q(3) * Q(3) * Qi(1) +
                         R(169, 960) * C(0) * C(1) * Q(4) -
                         R(77, 3840) * C(0) * C(0) * Q(2) * Q(4) * Qi(1) +
                         R(73, 2880) * C(0) * C(0) * Q(5);
        DiffPoly gxx2 = R(3, 128) * C(1) * C(2) * Q(1) + R(1, 128) * C(0) * C(3) * Q(1) +
                        R(5, 96) * C(1) * C(1) * Q(2) + R(1, 16) * C(0) * C(2) * Q(2) -
                        R(1, 80) * C(0) * C(1) * Q(2) * Q(2) * Qi(1) +
                        R(1, 160) * C(0) * C(0) * Q(2).pow(3) * Qi(2) +
                        R(157, 1920) * C(0) * C(1) * Q(3) -
                        R(5, 384) * C(0) * C(0) * Q(2) * Q(3) * Qi(1) +
                        R(31, 1920) * C(0) * C(0) * Q(4);
        DiffPoly gxxxx = R(3, 64) * C(1) * C(2) * Q(1) + R(1, 64) * C(0) * C(3) * Q(1) +
                         R(1, 12) * C(1) * C(1) * Q(2) + R(3, 32) * C(0) * C(2) * Q(2) -
                         R(1, 60) * C(0) * C(1) * Q(2) * Q(2) * Qi(1) +
                         R(1, 120) * C(0) * C(0) * Q(2).pow(3) * Qi(2) +
                         R(19, 160) * C(0) * C(1) * Q(3) -
                         R(11, 640) * C(0) * C(0) * Q(2) * Q(3) * Qi(1) +
                         R(11, 480) * C(0) * C(0) * Q(4);
        DiffPoly g4 = R(1, 128) * C(1) * C(1) * Q(1) + R(1, 128) * C(0) * C(2) * Q(1) +
                      R(11, 384) * C(0) * C(1) * Q(2) -
                      R(1, 320) * C(0) * C(0) * Q(2) * Q(2) * Qi(1) +
                      R(17, 1920) * C(0) * C(0) * Q(3);
        op.add(4, 1, gx4 * J(1, 4) + gx2xx * J(1, 2) * J(2) + gxx2 * J(2, 2) +
                         gxxxx * J(1) * J(3) + g4 * J(4));
    }

    {  // delta
        DiffPoly gx5 = R(1, 192) * C(2) * C(2) * Q(3) + R(1, 128) * C(1) * C(3) * Q(3) +
                       R(1, 384) * C(0) * C(4) * Q(3) -
                       R(1, 640) * C(1) * C(2) * Q(2) * Q(3) * Qi(1) -
                       R(1, 1920) * C(0) * C(3) * Q(2) * Q(3) * Qi(1) +
                       R(1, 640) * C(1) * C(1) * Q(2) * Q(2) * Q(3) * Qi(2) +
                       R(1, 640) * C(0) * C(2) * Q(2) * Q(2) * Q(3) * Qi(2) -
                       R(1, 320) * C(0) * C(1) * Q(2).pow(3) * Q(3) * Qi(3) +
                       R(1, 640) * C(0) * C(0) * Q(2).pow(4) * Q(3) * Qi(4) -
                       R(1, 640) * C(1) * C(1) * Q(3) * Q(3) * Qi(1) -
                       R(1, 640) * C(0) * C(2) * Q(3) * Q(3) * Qi(1) +
                       R(3, 640) * C(0) * C(1) * Q(2) * Q(3) * Q(3) * Qi(2) -
                       R(1, 320) * C(0) * C(0) * Q(2) * Q(2) * Q(3) * Q(3) * Qi(3) +
                       R(1, 1280) * C(0) * C(0) * Q(3).pow(3) * Qi(2) +
                       R(7, 384) * C(1) * C(2) * Q(4) + R(1, 128) * C(0) * C(3) * Q(4) -
                       R(1, 640) * C(1) * C(1) * Q(2) * Q(4) * Qi(1) -
                       R(1, 640) * C(0) * C(2) * Q(2) * Q(4) * Qi(1) +
                       R(1, 320) * C(0) * C(1) * Q(2) * Q(2) * Q(4) * Qi(2) -
                       R(1, 640) * C(0) * C(0) * Q(2).pow(3) * Q(4) * Qi(3) -
                       R(3, 640) * C(0) * C(1) * Q(3) * Q(4) * Qi(1) +
                       R(13, 3840) * C(0) * C(0) * Q(2) * Q(3) * Q(4) * Qi(2) -
                       R(1, 1280) * C(0) * C(0) * Q(4) * Q(4) * Qi(1) +
                       R(17, 2304) * C(1) * C(1) * Q(5) + R(5, 576) * C(0) * C(2) * Q(5) -
                       R(1, 640) * C(0) * C(1) * Q(2) * Q(5) * Qi(1) +
                       R(1, 1280) * C(0) * C(0) * Q(2) * Q(2) * Q(5) * Qi(2) -
                       R(1, 960) * C(0) * C(0) * Q(3) * Q(5) * Qi(1) +
                       R(5, 1152) * C(0) * C(1) * Q(6) -
                       R(1, 3840) * C(0) * C(0) * Q(2) * Q(6) * Qi(1) +
                       R(1, 2304) * C(0) * C(0) * Q(7);
        DiffPoly gx3xx = R(1, 64) * C(2) * C(2) * Q(2) + R(1, 48) * C(1) * C(3) * Q(2) +
                         R(1, 192) * C(0) * C(4) * Q(2) -
                         R(1, 160) * C(1) * C(2) * Q(2) * Q(2) * Qi(1) -
                         R(1, 480) * C(0) * C(3) * Q(2) * Q(2) * Qi(1) +
                         R(1, 160) * C(1) * C(1) * Q(2).pow(3) * Qi(2) +
                         R(1, 160) * C(0) * C(2) * Q(2).pow(3) * Qi(2) -
                         R(1, 80) * C(0) * C(1) * Q(2).pow(4) * Qi(3) +
                         R(1, 160) * C(0) * C(0) * Q(2).pow(5) * Qi(4) +
                         R(97, 960) * C(1) * C(2) * Q(3) + R(13, 320) * C(0) * C(3) * Q(3) -
                         R(1, 60) * C(1) * C(1) * Q(2) * Q(3) * Qi(1) -
                         R(1, 60) * C(0) * C(2) * Q(2) * Q(3) * Qi(1) +
                         R(19, 480) * C(0) * C(1) * Q(2) * Q(2) * Q(3) * Qi(2) -
                         R(11, 480) * C(0) * C(0) * Q(2).pow(3) * Q(3) * Qi(3) -
                         R(1, 48) * C(0) * C(1) * Q(3) * Q(3) * Qi(1) +
                         R(3, 160) * C(0) * C(0) * Q(2) * Q(3) * Q(3) * Qi(2) +
                         R(19, 320) * C(1) * C(1) * Q(4) + R(67, 960) * C(0) * C(2) * Q(4) -
                         R(1, 48) * C(0) * C(1) * Q(2) * Q(4) * Qi(1) +
                         R(11, 960) * C(0) * C(0) * Q(2) * Q(2) * Q(4) * Qi(2) -
                         R(1, 80) * C(0) * C(0) * Q(3) * Q(4) * Qi(1) +
                         R(131, 2880) * C(0) * C(1) * Q(5) -
                         R(1, 240) * C(0) * C(0) * Q(2) * Q(5) * Qi(1) +
                         R(1, 180) * C(0) * C(0) * Q(6);
        DiffPoly gxxx2 = R(7, 128) * C(1) * C(2) * Q(2) + R(7, 384) * C(0) * C(3) * Q(2) -
                         R(7, 960) * C(1) * C(1) * Q(2) * Q(2) * Qi(1) -
                         R(7, 960) * C(0) * C(2) * Q(2) * Q(2) * Qi(1) +
                         R(7, 480) * C(0) * C(1) * Q(2).pow(3) * Qi(2) -
                         R(7, 960) * C(0) * C(0) * Q(2).pow(4) * Qi(3) +
                         R(59, 960) * C(1) * C(1) * Q(3) + R(23, 320) * C(0) * C(2) * Q(3) -
                         R(1, 30) * C(0) * C(1) * Q(2) * Q(3) * Qi(1) +
                         R(13, 640) * C(0) * C(0) * Q(2) * Q(2) * Q(3) * Qi(2) -
                         R(3, 320) * C(0) * C(0) * Q(3) * Q(3) * Qi(1) +
                         R(131, 1920) * C(0) * C(1) * Q(4) -
                         R(3, 320) * C(0) * C(0) * Q(2) * Q(4) * Qi(1) +
                         R(31, 2880) * C(0) * C(0) * Q(5);
        DiffPoly gx2x3 = R(3, 64) * C(1) * C(2) * Q(2) + R(1, 64) * C(0) * C(3) * Q(2) -
                         R(1, 160) * C(1) * C(1) * Q(2) * Q(2) * Qi(1) -
                         R(1, 160) * C(0) * C(2) * Q(2) * Q(2) * Qi(1) +
                         R(1, 80) * C(0) * C(1) * Q(2).pow(3) * Qi(2) -
                         R(1, 160) * C(0) * C(0) * Q(2).pow(4) * Qi(3) +
                         R(47, 960) * C(1) * C(1) * Q(3) + R(13, 240) * C(0) * C(2) * Q(3) -
                         R(13, 480) * C(0) * C(1) * Q(2) * Q(3) * Qi(1) +
                         R(1, 60) * C(0) * C(0) * Q(2) * Q(2) * Q(3) * Qi(2) -
                         R(7, 960) * C(0) * C(0) * Q(3) * Q(3) * Qi(1) +
                         R(49, 960) * C(0) * C(1) * Q(4) -
                         R(7, 960) * C(0) * C(0) * Q(2) * Q(4) * Qi(1) +
                         R(23, 2880) * C(0) * C(0) * Q(5);
        DiffPoly gxxxxx = R(5, 192) * C(1) * C(1) * Q(2) + R(5, 192) * C(0) * C(2) * Q(2) -
                          R(1, 96) * C(0) * C(1) * Q(2) * Q(2) * Qi(1) +
                          R(1, 192) * C(0) * C(0) * Q(2).pow(3) * Qi(2) +
                          R(3, 64) * C(0) * C(1) * Q(3) -
                          R(1, 96) * C(0) * C(0) * Q(2) * Q(3) * Qi(1) +
                          R(1, 96) * C(0) * C(0) * Q(4);
        DiffPoly gxxxxxx = R(1, 64) * C(1) * C(1) * Q(2) + R(1, 64) * C(0) * C(2) * Q(2) -
                           R(1, 160) * C(0) * C(1) * Q(2) * Q(2) * Qi(1) +
                           R(1, 320) * C(0) * C(0) * Q(2).pow(3) * Qi(2) +
                           R(9, 320) * C(0) * C(1) * Q(3) -
                           R(1, 160) * C(0) * C(0) * Q(2) * Q(3) * Qi(1) +
                           R(1, 160) * C(0) * C(0) * Q(4);
        DiffPoly g5 = R(1, 192) * C(0) * C(1) * Q(2) -
                      R(1, 960) * C(0) * C(0) * Q(2) * Q(2) * Qi(1) +
                      R(1, 480) * C(0) * C(0) * Q(3);
        op.add(4, 0, gx5 * J(1, 5) + gx3xx * J(1, 3) * J(2) + gxxx2 * J(1) * J(2, 2) +
                         gx2x3 * J(1, 2) * J(3) + gxxxxx * J(2) * J(3) +
                         gxxxxxx * J(1) * J(4) + g5 * J(5));
    }
    return op;
}

// ---------------------------------------------------------------------------
// The string-equation right-hand side, for constant c0, p0:
//
//   x = t a(u) + b(u)
//       + c0 eps^2/24 { t [2a'' uxx + a''' ux^2] + [2b'' uxx + b''' ux^2] }
//       + eps^4 { [2p0 (ta''+b'') + c0^2/240 (ta'''+b''')] uxxxx
//                 + [4p0 (ta'''+b''') + c0^2/120 (ta4+b4)] uxxx ux
//                 + [3p0 (ta'''+b''') + c0^2/160 (ta4+b4)] uxx^2
//                 + [4p0 (ta4+b4) + 11 c0^2/1440 (ta5+b5)] uxx ux^2
//                 + [1/2 p0 (ta5+b5) + c0^2/1152 (ta6+b6)] ux^4 }
//
// Returned as an EpsSeries in the u-jets with `t` a formal constant symbol.
// The uxx^2 group is required for the right-hand side to be the variational
// derivative t dH_{f'}/du + dH_{g'}/du; see the cross-check in the tests.

namespace detail {
// The per-function block: S(sym) with the coefficients above, no t yet.
inline EpsSeries string_block(const DiffPoly& c0, const DiffPoly& p0, const std::string& s,
                              int max_order, Mutator* m) {
    auto R = [&](long long n, long long d = 1) { return mut(m, "string", n, d); };
    auto F = [&](std::uint32_t j) { return DiffPoly::symbol(s, j); };
    auto J = [](std::uint32_t n, std::int32_t e = 1) { return DiffPoly::jet(n, e); };
    EpsSeries g(max_order);
    g.set(0, F(0));
    g.add(2, R(1, 24) * c0 * (R(2) * F(2) * J(2) + F(3) * J(1, 2)));
    g.add(4, (R(2) * p0 * F(2) + R(1, 240) * c0 * c0 * F(3)) * J(4) +
                 (R(4) * p0 * F(3) + R(1, 120) * c0 * c0 * F(4)) * J(3) * J(1) +
                 (R(3) * p0 * F(3) + R(1, 160) * c0 * c0 * F(4)) * J(2, 2) +
                 (R(4) * p0 * F(4) + R(11, 1440) * c0 * c0 * F(5)) * J(2) * J(1, 2) +
                 (R(1, 2) * p0 * F(5) + R(1, 1152) * c0 * c0 * F(6)) * J(1, 4));
    return g;
}
}  // namespace detail

inline EpsSeries build_string_density(const DiffPoly& c0, const DiffPoly& p0,
                                      const std::string& a = "a", const std::string& b = "b",
                                      int max_order = 4, Mutator* m = nullptr) {
    diffalg::const_sym("t");  // t is a parameter, not a function of u
    DiffPoly t = DiffPoly::symbol("t");
    EpsSeries ga = detail::string_block(c0, p0, a, max_order, m);
    EpsSeries gb = detail::string_block(c0, p0, b, max_order, m);
    EpsSeries out(max_order);
    for (const auto& [k, pol] : ga.components()) out.add(k, t * pol);
    return out + gb;
}

// ---------------------------------------------------------------------------
// Parameter specializations

struct Specialization {
    std::string name;
    exprfn::Expr c, p, q, s;
    std::string note;
};

inline std::vector<Specialization> specializations() {
    using exprfn::parse;
    std::vector<Specialization> out;
    out.push_back({"kdv", parse("1"), parse("0"), parse("u"), parse("0"),
                   "c is an arbitrary constant (normalized to 1 here); the flow is the "
                   "Korteweg-de Vries equation"});
    out.push_back({"volterra", parse("2"), parse("-1/240"), parse("1 - exp(u)"), parse("1/4320"),
                   "continuum limit of the Volterra lattice (difference KdV)"});
    out.push_back({"camassa-holm", parse("8*u"), parse("u/3"), parse("u"), parse("0"),
                   "Camassa-Holm hierarchy after reduction to the standard first bracket"});
    return out;
}

}  // namespace hampert::models
