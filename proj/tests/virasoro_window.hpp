#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "cforge/brackets.hpp"
#include "cforge/model.hpp"

namespace testsupport {

using namespace cforge;

struct ComplexPair {
    Expr re, im;
};

// Brute-force search for the largest W such that {phi(k), phi(l)} = sign i (k-l) phi(k+l)
// holds on every |k|, |l|, |k+l| <= W once terms beyond mode W are dropped.
inline int exact_window(const PhaseSpaceModel& m, int cutoff, const std::string& tag, int sign) {
    auto find = [&](const std::string& n) {
        for (const auto& p : m.primaries)
            if (p.name == n) return p.expr;
        throw std::runtime_error("missing constraint " + n);
    };
    auto phi = [&](int k) -> ComplexPair {
        if (std::abs(k) > cutoff) return {};
        ComplexPair c{find(tag + "r" + std::to_string(std::abs(k))),
                      k == 0 ? Expr() : find(tag + "i" + std::to_string(std::abs(k)))};
        if (k < 0) c.im = -c.im;
        return c;
    };
    auto pb = [&](const Expr& a, const Expr& b) { return poisson_bracket(a, b, m); };
    auto holds = [&](int w) {
        for (int k = -w; k <= w; ++k)
            for (int l = -w; l <= w; ++l) {
                if (std::abs(k + l) > w) continue;
                ComplexPair a = phi(k), b = phi(l), t = phi(k + l);
                Expr re = pb(a.re, b.re) - pb(a.im, b.im) + Expr(sign * (k - l)) * t.im;
                Expr im = pb(a.re, b.im) + pb(a.im, b.re) - Expr(sign * (k - l)) * t.re;
                if (!project_to_window(re, m.table(), w).is_zero() || !project_to_window(im, m.table(), w).is_zero())
                    return false;
            }
        return true;
    };
    int best = 0;
    for (int w = 1; w <= cutoff; ++w)
        if (holds(w)) best = w;
    return best;
}

}  // namespace testsupport
