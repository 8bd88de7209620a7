#pragma once

#include "oalg/error.hpp"
#include "oalg/matrix.hpp"
#include "oalg/plfunc.hpp"
#include "oalg/rational.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

namespace oalg {

struct ShapeError : Error {
    ShapeError() : Error("incompatible map shapes") {}
};
struct NotOnGrid : Error {
    NotOnGrid() : Error("entry is not a multiple of the stage grid") {}
};
struct NotRepresentingForm : Error {
    NotRepresentingForm() : Error("map lacks the identity-row normal form") {}
};
struct StageError : Error {
    StageError() : Error("stage index out of range") {}
};
struct EmptyPartition : Error {
    EmptyPartition() : Error("empty partition family") {}
};

using RMat = Mat<Rat>;

/// Row-stochastic rational matrix: a positive linear map taking the order
/// unit (1,...,1) of the domain to the order unit of the codomain.
struct OrderUnitMap {
    std::size_t rows = 0, cols = 0;
    std::vector<Rat> a;

    OrderUnitMap() = default;
    OrderUnitMap(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c) {}

    Rat& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    const Rat& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    static OrderUnitMap identity(std::size_t n) {
        OrderUnitMap m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    void validate() const {
        for (std::size_t i = 0; i < rows; ++i) {
            Rat sum = 0;
            for (std::size_t j = 0; j < cols; ++j) {
                if ((*this)(i, j) < 0) throw ShapeError();
                sum += (*this)(i, j);
            }
            if (sum != 1) throw ShapeError();
        }
    }

    friend bool operator==(const OrderUnitMap& x, const OrderUnitMap& y) {
        return x.rows == y.rows && x.cols == y.cols && x.a == y.a;
    }
};

/// Applies the maps in sequence (first element first); exact product.
inline OrderUnitMap compose(const std::vector<OrderUnitMap>& maps) {
    if (maps.empty()) throw ShapeError();
    OrderUnitMap acc = maps.front();
    for (std::size_t k = 1; k < maps.size(); ++k) {
        const OrderUnitMap& m = maps[k];
        if (m.cols != acc.rows) throw ShapeError();
        OrderUnitMap r(m.rows, acc.cols);
        for (std::size_t i = 0; i < m.rows; ++i)
            for (std::size_t l = 0; l < m.cols; ++l) {
                if (m(i, l) == 0) continue;
                for (std::size_t j = 0; j < acc.cols; ++j) r(i, j) += m(i, l) * acc(l, j);
            }
        acc = std::move(r);
    }
    return acc;
}

/// Exact sup-norm operator norm of a rational matrix: max row abs sum
/// (attained at a +-1 vertex of the domain cube).
inline Rat opnorm_inf(std::size_t rows, std::size_t cols, const std::vector<Rat>& a) {
    Rat best = 0;
    for (std::size_t i = 0; i < rows; ++i) {
        Rat s = 0;
        for (std::size_t j = 0; j < cols; ++j) s += rat_abs(a[i * cols + j]);
        if (s > best) best = s;
    }
    return best;
}

inline Rat map_distance(const OrderUnitMap& x, const OrderUnitMap& y) {
    if (x.rows != y.rows || x.cols != y.cols) throw ShapeError();
    std::vector<Rat> d(x.a.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = x.a[i] - y.a[i];
    return opnorm_inf(x.rows, x.cols, d);
}

/// Column data of a Choquet simplex presentation: for each n <= depth, a
/// probability vector (a_1n, ..., a_nn).
struct RepresentingMatrix {
    std::vector<std::vector<Rat>> columns;  // columns[n-1] has n entries
    std::size_t depth() const { return columns.size(); }
};

/// Level-n step map (x_1..x_n) -> (x_1..x_n, sum a_i x_i) with the appended
/// row on the 2^{-2n} grid.
struct GridMap {
    std::size_t level = 0;
    std::vector<Rat> last_row;

    void validate() const {
        if (last_row.size() != level) throw ShapeError();
        Rat grid = Rat(1, BigInt(1) << (2 * level));
        Rat sum = 0;
        for (const auto& e : last_row) {
            if (e < 0 || denominator(Rat(e / grid)) != 1) throw NotOnGrid();
            sum += e;
        }
        if (sum != 1) throw NotOnGrid();
    }

    OrderUnitMap to_map() const {
        OrderUnitMap m(level + 1, level);
        for (std::size_t i = 0; i < level; ++i) m(i, i) = 1;
        for (std::size_t j = 0; j < level; ++j) m(level, j) = last_row[j];
        return m;
    }

    friend bool operator==(const GridMap& x, const GridMap& y) {
        return x.level == y.level && x.last_row == y.last_row;
    }
};

struct DirectSystem {
    std::vector<std::size_t> dims;
    std::vector<OrderUnitMap> maps;  // maps[k]: R^{dims[k]} -> R^{dims[k+1]}

    void validate() const {
        if (maps.size() + 1 != dims.size()) throw ShapeError();
        for (std::size_t k = 0; k < maps.size(); ++k) {
            if (maps[k].cols != dims[k] || maps[k].rows != dims[k + 1]) throw ShapeError();
            maps[k].validate();
        }
    }
};

struct Polytope {
    std::size_t ambient = 0;
    std::vector<std::vector<Rat>> vertices;
    bool is_simplex = false;
};

// ---------------------------------------------------------------------------
// Parameterization conversions
// ---------------------------------------------------------------------------

inline RepresentingMatrix lambda3_to_lambda2(const std::vector<GridMap>& steps) {
    RepresentingMatrix r;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        if (steps[k].level != k + 1) throw ShapeError();
        steps[k].validate();
        r.columns.push_back(steps[k].last_row);
    }
    return r;
}

/// Emits the canonical system with dims 1, 2, ..., T+1 whose step n appends
/// the inner product with column n.
inline DirectSystem lambda2_to_lambda(const RepresentingMatrix& r, std::size_t T) {
    if (T > r.depth()) throw StageError();
    DirectSystem d;
    for (std::size_t n = 1; n <= T + 1; ++n) d.dims.push_back(n);
    for (std::size_t n = 1; n <= T; ++n) {
        if (r.columns[n - 1].size() != n) throw ShapeError();
        OrderUnitMap m(n + 1, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
        for (std::size_t j = 0; j < n; ++j) m(n, j) = r.columns[n - 1][j];
        d.maps.push_back(std::move(m));
    }
    return d;
}

// ---------------------------------------------------------------------------
// Grid factorization
// ---------------------------------------------------------------------------

/// Rounds a probability vector to multiples of `grid` preserving the exact
/// sum 1: floor everything, then give one grid unit to the largest remainders
/// (lowest index on ties). Entrywise error stays below `grid`.
inline std::vector<Rat> round_to_grid(const std::vector<Rat>& row, const Rat& grid) {
    const std::size_t n = row.size();
    std::vector<BigInt> fl(n);
    std::vector<Rat> rem(n);
    BigInt total = numerator(Rat(1) / grid);  // grid units that must be distributed
    BigInt used = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Rat scaled = row[i] / grid;
        fl[i] = numerator(scaled) / denominator(scaled);
        rem[i] = scaled - Rat(fl[i]);
        used += fl[i];
    }
    BigInt missing = total - used;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return rem[x] > rem[y]; });
    std::vector<Rat> out(n);
    for (std::size_t r = 0; r < n; ++r) {
        BigInt units = fl[order[r]] + (BigInt(r) < missing ? 1 : 0);
        out[order[r]] = Rat(units) * grid;
    }
    return out;
}

struct GridFactorization {
    std::vector<GridMap> steps;          // levels m .. n-1
    std::vector<std::size_t> row_perm;   // row_perm[i] = source row of permuted row i
    std::vector<Rat> per_step_error;     // entrywise max error of each rounded row
    Rat bound;                           // exact sup-operator-norm distance to the permuted map
    OrderUnitMap permuted;               // the normal-form arrangement of the input
};

/// Decomposes a normal-form map R^m -> R^n into elementary one-row extensions
/// with grid-rounded appended rows, per the canonical construction.
inline GridFactorization grid_factor(const OrderUnitMap& phi, std::size_t m, std::size_t n) {
    if (phi.cols != m || phi.rows != n || m >= n) throw ShapeError();
    phi.validate();
    // locate the identity rows e_1, ..., e_m
    std::vector<std::size_t> id_row(m, SIZE_MAX);
    std::vector<bool> taken(n, false);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t r = 0; r < n; ++r) {
            if (taken[r]) continue;
            bool is_ei = true;
            for (std::size_t j = 0; j < m; ++j)
                if (phi(r, j) != Rat(j == i ? 1 : 0)) {
                    is_ei = false;
                    break;
                }
            if (is_ei) {
                id_row[i] = r;
                taken[r] = true;
                break;
            }
        }
        if (id_row[i] == SIZE_MAX) throw NotRepresentingForm();
    }
    GridFactorization out;
    out.row_perm = id_row;
    for (std::size_t r = 0; r < n; ++r)
        if (!taken[r]) out.row_perm.push_back(r);
    out.permuted = OrderUnitMap(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) out.permuted(i, j) = phi(out.row_perm[i], j);

    for (std::size_t k = m; k < n; ++k) {
        std::vector<Rat> row(k);
        for (std::size_t j = 0; j < m; ++j) row[j] = out.permuted(k, j);  // rest stay 0
        Rat grid = Rat(1, BigInt(1) << (2 * k));
        GridMap step;
        step.level = k;
        step.last_row = round_to_grid(row, grid);
        Rat err = 0;
        for (std::size_t j = 0; j < k; ++j) {
            Rat e = rat_abs(step.last_row[j] - row[j]);
            if (e > err) err = e;
        }
        out.per_step_error.push_back(err);
        out.steps.push_back(std::move(step));
    }

    std::vector<OrderUnitMap> chain;
    for (const auto& s : out.steps) chain.push_back(s.to_map());
    OrderUnitMap composed = compose(chain);
    out.bound = map_distance(composed, out.permuted);
    return out;
}

// ---------------------------------------------------------------------------
// Finite-stage simplexes
// ---------------------------------------------------------------------------

struct StageSimplex {
    Polytope polytope;                      // probability simplex at the stage
    std::optional<OrderUnitMap> dual_step;  // transpose of the next step map
};

/// Stage N (1-based) of the dual inverse system: the probability simplex in
/// R^{f(N)} and the affine surjection from stage N+1 given by the transpose.
inline StageSimplex finite_stage_simplex(const DirectSystem& d, std::size_t N) {
    if (N < 1 || N > d.dims.size()) throw StageError();
    StageSimplex out;
    out.polytope.ambient = d.dims[N - 1];
    out.polytope.is_simplex = true;
    for (std::size_t v = 0; v < out.polytope.ambient; ++v) {
        std::vector<Rat> vert(out.polytope.ambient);
        vert[v] = 1;
        out.polytope.vertices.push_back(std::move(vert));
    }
    if (N < d.dims.size()) {
        const OrderUnitMap& psi = d.maps[N - 1];
        OrderUnitMap t(psi.cols, psi.rows);
        for (std::size_t i = 0; i < psi.rows; ++i)
            for (std::size_t j = 0; j < psi.cols; ++j) t(j, i) = psi(i, j);
        out.dual_step = std::move(t);  // column-stochastic action on probability vectors
    }
    return out;
}

inline bool is_probability_vector(const std::vector<Rat>& x) {
    Rat s = 0;
    for (const auto& v : x) {
        if (v < 0) return false;
        s += v;
    }
    return s == 1;
}

inline std::vector<Rat> apply_dual(const OrderUnitMap& t, const std::vector<Rat>& x) {
    if (x.size() != t.cols) throw ShapeError();
    std::vector<Rat> y(t.rows);
    for (std::size_t i = 0; i < t.rows; ++i)
        for (std::size_t j = 0; j < t.cols; ++j) y[i] += t(i, j) * x[j];
    return y;
}

// ---------------------------------------------------------------------------
// Peaked partitions of unity
// ---------------------------------------------------------------------------

/// Checks the partition axioms on sampled values: pointwise sum 1, peaks of
/// height 1, nonnegativity, each within tol.
inline bool ppu_check(const std::vector<std::vector<Rat>>& samples, const Rat& tol) {
    if (samples.empty()) throw EmptyPartition();
    const std::size_t g = samples.front().size();
    for (const auto& f : samples)
        if (f.size() != g) throw ShapeError();
    for (std::size_t t = 0; t < g; ++t) {
        Rat sum = 0;
        for (const auto& f : samples) {
            if (f[t] < -tol) return false;
            sum += f[t];
        }
        if (rat_abs(sum - 1) > tol) return false;
    }
    for (const auto& f : samples) {
        Rat peak = 0;
        for (const auto& v : f)
            if (rat_abs(v) > peak) peak = rat_abs(v);
        if (rat_abs(peak - 1) > tol) return false;
    }
    return true;
}

inline std::vector<Rat> sample_grid(const PLFunc& f, std::size_t grid) {
    std::vector<Rat> s;
    s.reserve(grid);
    for (std::size_t t = 0; t < grid; ++t) s.push_back(f(Rat(t, grid - 1)));
    return s;
}

namespace detail {

/// Exact least squares for the grid fit: solves the normal equations over the
/// rationals; returns nothing when the system is singular.
inline std::optional<std::vector<Rat>> rational_least_squares(
    const std::vector<std::vector<Rat>>& cols, const std::vector<Rat>& y) {
    const std::size_t k = cols.size(), g = y.size();
    std::vector<std::vector<Rat>> m(k, std::vector<Rat>(k + 1));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t t = 0; t < g; ++t) m[i][j] += cols[i][t] * cols[j][t];
        for (std::size_t t = 0; t < g; ++t) m[i][k] += cols[i][t] * y[t];
    }
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t piv = c;
        while (piv < k && m[piv][c] == 0) ++piv;
        if (piv == k) return std::nullopt;
        std::swap(m[c], m[piv]);
        for (std::size_t r = 0; r < k; ++r) {
            if (r == c || m[r][c] == 0) continue;
            Rat f = m[r][c] / m[c][c];
            for (std::size_t j = c; j <= k; ++j) m[r][j] -= f * m[c][j];
        }
    }
    std::vector<Rat> sol(k);
    for (std::size_t c = 0; c < k; ++c) sol[c] = m[c][k] / m[c][c];
    return sol;
}

inline Rat fit_residual(const std::vector<std::vector<Rat>>& cols, const std::vector<Rat>& y,
                        const std::vector<Rat>& coef) {
    Rat worst = 0;
    for (std::size_t t = 0; t < y.size(); ++t) {
        Rat v = y[t];
        for (std::size_t i = 0; i < cols.size(); ++i) v -= coef[i] * cols[i][t];
        if (rat_abs(v) > worst) worst = rat_abs(v);
    }
    return worst;
}

/// Coordinate-descent refinement of the max residual in doubles; the caller
/// re-verifies the returned coefficients exactly.
inline std::vector<double> chebyshev_descent(const std::vector<std::vector<double>>& cols,
                                             const std::vector<double>& y,
                                             std::vector<double> coef, std::size_t passes = 40) {
    const std::size_t k = cols.size(), g = y.size();
    auto resid = [&](const std::vector<double>& c) {
        double worst = 0;
        for (std::size_t t = 0; t < g; ++t) {
            double v = y[t];
            for (std::size_t i = 0; i < k; ++i) v -= c[i] * cols[i][t];
            worst = std::max(worst, std::fabs(v));
        }
        return worst;
    };
    for (std::size_t pass = 0; pass < passes; ++pass) {
        for (std::size_t i = 0; i < k; ++i) {
            double lo = coef[i] - 1.0, hi = coef[i] + 1.0;
            for (int it = 0; it < 60; ++it) {  // ternary search on the convex slice
                double a = lo + (hi - lo) / 3, b = hi - (hi - lo) / 3;
                std::vector<double> ca = coef, cb = coef;
                ca[i] = a;
                cb[i] = b;
                if (resid(ca) < resid(cb)) hi = b;
                else lo = a;
            }
            coef[i] = (lo + hi) / 2;
        }
    }
    return coef;
}

}  // namespace detail

struct RefineResult {
    bool ok = false;
    Rat residual;  // best exactly verified grid max residual over the family
};

/// Every member of P must be within eps (grid sup norm) of the span of Pp.
/// Coefficients come from an exact least-squares fit, refined by Chebyshev
/// coordinate descent when needed; residuals are re-verified exactly.
inline RefineResult ppu_refines(const std::vector<PLFunc>& P, const std::vector<PLFunc>& Pp,
                                const Rat& eps, std::size_t grid = 257) {
    if (P.empty() || Pp.empty()) throw EmptyPartition();
    std::vector<std::vector<Rat>> cols;
    for (const auto& f : Pp) cols.push_back(sample_grid(f, grid));
    std::vector<std::vector<double>> dcols(cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i)
        for (const auto& v : cols[i]) dcols[i].push_back(to_double(v));

    RefineResult out;
    out.ok = true;
    for (const auto& f : P) {
        auto y = sample_grid(f, grid);
        Rat best;
        bool have = false;
        if (auto ls = detail::rational_least_squares(cols, y)) {
            best = detail::fit_residual(cols, y, *ls);
            have = true;
        }
        if (!have || best > eps) {
            std::vector<double> dy;
            for (const auto& v : y) dy.push_back(to_double(v));
            std::vector<double> start(cols.size(), 0.0);
            auto dc = detail::chebyshev_descent(dcols, dy, start);
            std::vector<Rat> rc;
            for (double c : dc) rc.push_back(Rat(c));
            Rat r = detail::fit_residual(cols, y, rc);
            if (!have || r < best) best = r;
        }
        if (best > out.residual) out.residual = best;
        if (best > eps) out.ok = false;
    }
    return out;
}

/// Constant system at the probability simplex over a finite point set.
inline DirectSystem bauer_from_finite(std::size_t points, std::size_t depth) {
    if (points < 1 || depth < 1) throw ShapeError();
    DirectSystem d;
    for (std::size_t i = 0; i < depth; ++i) d.dims.push_back(points);
    for (std::size_t i = 0; i + 1 < depth; ++i) d.maps.push_back(OrderUnitMap::identity(points));
    return d;
}

}  // namespace oalg
