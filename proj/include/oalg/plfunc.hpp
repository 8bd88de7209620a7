#pragma once

#include "oalg/error.hpp"
#include "oalg/rational.hpp"

#include <algorithm>
#include <type_traits>
#include <vector>

namespace oalg {

/// Piecewise-linear function on [0,1] with exact rational breakpoints and
/// values; linear between breakpoints, constant continuation outside [0,1].
struct PLFunc {
    std::vector<Rat> xs;  // strictly increasing, first 0, last 1
    std::vector<Rat> ys;

    PLFunc() : xs{Rat(0), Rat(1)}, ys{Rat(0), Rat(0)} {}
    PLFunc(std::vector<Rat> x, std::vector<Rat> y) : xs(std::move(x)), ys(std::move(y)) {
        if (xs.size() != ys.size() || xs.size() < 2 || xs.front() != 0 || xs.back() != 1)
            throw Error("bad piecewise-linear data");
        normalize();
    }

    static PLFunc constant(Rat c) { return PLFunc({Rat(0), Rat(1)}, {c, c}); }
    static PLFunc identity() { return PLFunc({Rat(0), Rat(1)}, {Rat(0), Rat(1)}); }

    /// Drops interior breakpoints where the two adjacent segments are collinear.
    void normalize() {
        std::vector<Rat> nx{xs.front()}, ny{ys.front()};
        for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
            const Rat& x0 = nx.back();
            const Rat& y0 = ny.back();
            // collinear iff (y1-y0)(x2-x1) == (y2-y1)(x1-x0)
            if ((ys[i] - y0) * (xs[i + 1] - xs[i]) == (ys[i + 1] - ys[i]) * (xs[i] - x0))
                continue;
            nx.push_back(xs[i]);
            ny.push_back(ys[i]);
        }
        nx.push_back(xs.back());
        ny.push_back(ys.back());
        xs = std::move(nx);
        ys = std::move(ny);
    }

    Rat operator()(const Rat& x) const {
        if (x <= xs.front()) return ys.front();
        if (x >= xs.back()) return ys.back();
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t i = static_cast<std::size_t>(it - xs.begin());  // xs[i-1] <= x < xs[i]
        return ys[i - 1] + (ys[i] - ys[i - 1]) * (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    }

    friend bool operator==(const PLFunc& f, const PLFunc& g) {
        return f.xs == g.xs && f.ys == g.ys;
    }
};

inline std::vector<Rat> merged_breakpoints(const PLFunc& f, const PLFunc& g) {
    std::vector<Rat> m;
    std::merge(f.xs.begin(), f.xs.end(), g.xs.begin(), g.xs.end(), std::back_inserter(m));
    m.erase(std::unique(m.begin(), m.end()), m.end());
    return m;
}

template <class Op>
PLFunc pointwise(const PLFunc& f, const PLFunc& g, Op op) {
    auto m = merged_breakpoints(f, g);
    std::vector<Rat> y;
    y.reserve(m.size());
    for (const auto& x : m) y.push_back(op(f(x), g(x)));
    return PLFunc(std::move(m), std::move(y));
}

inline PLFunc operator+(const PLFunc& f, const PLFunc& g) {
    return pointwise(f, g, [](const Rat& a, const Rat& b) { return a + b; });
}
inline PLFunc operator-(const PLFunc& f, const PLFunc& g) {
    return pointwise(f, g, [](const Rat& a, const Rat& b) { return a - b; });
}
// templated so unrelated multiplications never probe a conversion to Rat
template <class S, std::enable_if_t<std::is_same_v<S, Rat>, int> = 0>
inline PLFunc operator*(const S& c, const PLFunc& f) {
    PLFunc r = f;
    for (auto& y : r.ys) y *= c;
    r.normalize();
    return r;
}

/// Exact sup norm: a PL function attains its maximum modulus at a breakpoint.
inline Rat sup_abs(const PLFunc& f) {
    Rat m = 0;
    for (const auto& y : f.ys) {
        Rat a = rat_abs(y);
        if (a > m) m = a;
    }
    return m;
}

inline Rat sup_diff(const PLFunc& f, const PLFunc& g) { return sup_abs(f - g); }

/// Exact composition g(lam(x)); the inner function is expected to take values
/// in [0,1] (values outside use g's constant continuation).
inline PLFunc compose(const PLFunc& g, const PLFunc& lam) {
    std::vector<Rat> bx{lam.xs.front()};
    for (std::size_t s = 0; s + 1 < lam.xs.size(); ++s) {
        const Rat &x0 = lam.xs[s], &x1 = lam.xs[s + 1];
        const Rat &v0 = lam.ys[s], &v1 = lam.ys[s + 1];
        if (v0 != v1) {
            // preimages of g's breakpoints inside this segment
            for (const auto& b : g.xs) {
                if ((b > v0 && b < v1) || (b > v1 && b < v0)) {
                    Rat x = x0 + (b - v0) / (v1 - v0) * (x1 - x0);
                    bx.push_back(x);
                }
            }
        }
        bx.push_back(x1);
    }
    std::sort(bx.begin(), bx.end());
    bx.erase(std::unique(bx.begin(), bx.end()), bx.end());
    std::vector<Rat> by;
    by.reserve(bx.size());
    for (const auto& x : bx) by.push_back(g(lam(x)));
    return PLFunc(std::move(bx), std::move(by));
}

}  // namespace oalg
