#pragma once

#include "oalg/choquet.hpp"
#include "oalg/enumerations.hpp"
#include "oalg/error.hpp"
#include "oalg/plfunc.hpp"
#include "oalg/supernatural.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace oalg {

struct SearchExhausted : Error {
    explicit SearchExhausted(const std::string& what) : Error("search exhausted: " + what) {}
};
struct CertNotFound : Error {
    CertNotFound() : Error("no simplicity certificate within the stage bound") {}
};

// ---------------------------------------------------------------------------
// Hat partitions and node maps
// ---------------------------------------------------------------------------

/// Nodal interpolant through the n uniform nodes i/(n-1); n = 1 gives the
/// constant with the single coordinate.
inline PLFunc node_interp(const std::vector<Rat>& coords) {
    const std::size_t n = coords.size();
    if (n == 0) throw ShapeError();
    if (n == 1) return PLFunc::constant(coords[0]);
    std::vector<Rat> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(Rat(i, n - 1));
    return PLFunc(std::move(xs), coords);
}

/// Node evaluation f -> (f(i/(n-1)))_i; the left inverse of node_interp.
inline std::vector<Rat> node_eval(const PLFunc& f, std::size_t n) {
    if (n == 0) throw ShapeError();
    if (n == 1) return {f(Rat(0))};
    std::vector<Rat> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(f(Rat(i, n - 1)));
    return out;
}

/// The peaked partition of unity of hat functions at the n uniform nodes.
inline std::vector<PLFunc> hat_partition(std::size_t n) {
    if (n == 0) throw ShapeError();
    if (n == 1) return {PLFunc::constant(Rat(1))};
    std::vector<PLFunc> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<Rat> e(n);
        e[i] = 1;
        out.push_back(node_interp(e));
    }
    return out;
}

// ---------------------------------------------------------------------------
// The frozen function dictionary and dense test sequence
// ---------------------------------------------------------------------------

/// Dictionary entry t >= 1. Entry 1 is the identity; even entries run through
/// the rational constants in [0,1] with infinite repetition; odd entries >= 3
/// run through the interpolants on dyadic grids with dyadic values, level by
/// level in lexicographic value order.
inline PLFunc lambda_fn(std::uint64_t t) {
    if (t == 0) throw Error("dictionary indices start at 1");
    if (t == 1) return PLFunc::identity();
    if (t % 2 == 0) {
        auto [rep, idx] = unpair2(BigInt(t / 2 - 1));
        (void)rep;
        return PLFunc::constant(unit_rational(to_u64(idx)));
    }
    BigInt pos = (t - 3) / 2;
    for (std::uint64_t r = 1;; ++r) {
        const std::uint64_t nodes = (std::uint64_t{1} << r) + 1;
        BigInt base = nodes;  // value grid 0, 2^-r, ..., 1 has `nodes` levels
        BigInt count = 1;
        for (std::uint64_t i = 0; i < nodes; ++i) count *= base;
        if (pos >= count) {
            pos -= count;
            continue;
        }
        std::vector<Rat> ys(nodes);
        for (std::uint64_t i = nodes; i-- > 0;) {
            ys[i] = Rat(pos % base, BigInt(1) << r);
            pos /= base;
        }
        std::vector<Rat> xs;
        for (std::uint64_t i = 0; i < nodes; ++i) xs.push_back(Rat(i, nodes - 1));
        return PLFunc(std::move(xs), std::move(ys));
    }
}

/// Dense test sequence g_j, j >= 1: a pairing code picks a dyadic grid level
/// and a packed tuple of rational node values (trailing zero codes give the
/// value 1, so large levels stay sparse). g_1 is the constant 1. The family
/// is closed under composition with the dictionary.
inline PLFunc g_fn(std::uint64_t j) {
    if (j == 0) throw Error("test function indices start at 1");
    auto [rbig, code] = unpair2(BigInt(j - 1));
    const std::uint64_t r = to_u64(rbig);
    const BigInt nodes = (BigInt(1) << r) + 1;
    std::vector<BigInt> head;
    BigInt c = code;
    while (c != 0 && BigInt(head.size()) + 1 < nodes) {
        auto [a, rest] = unpair2(c);
        head.push_back(a);
        c = rest;
    }
    if (BigInt(head.size()) + 1 == nodes) head.push_back(c);
    const BigInt den = BigInt(1) << r;
    std::vector<Rat> xs, ys;
    BigInt last = nodes - 1;
    BigInt explicit_to = head.size() < last ? BigInt(head.size()) : last;
    for (BigInt i = 0; i <= explicit_to; ++i) {
        xs.push_back(Rat(i, den));
        ys.push_back(i < BigInt(head.size()) ? value_rational(to_u64(head[to_u64(i)])) : Rat(1));
    }
    if (xs.back() != 1) {
        xs.push_back(1);
        ys.push_back(1);
    }
    return PLFunc(std::move(xs), std::move(ys));
}

// ---------------------------------------------------------------------------
// Standard homomorphisms and affine endomorphisms
// ---------------------------------------------------------------------------

struct StandardHom {
    std::uint64_t n = 1, m = 1;
    std::vector<std::uint64_t> t;  // dictionary indices, length m/n

    void validate() const {
        if (n == 0 || m % n != 0 || t.size() != m / n) throw ShapeError();
        for (auto i : t)
            if (i == 0) throw ShapeError();
    }
};

/// Unital positive endomorphism of the function space, given by its action.
struct AffineEndo {
    std::function<PLFunc(const PLFunc&)> act;
    PLFunc operator()(const PLFunc& g) const { return act(g); }
};

inline AffineEndo identity_endo() {
    return {[](const PLFunc& g) { return g; }};
}

/// eta_{rows} after the step matrix after beta_{cols}: the lifted system step.
inline AffineEndo lift_system_step(const OrderUnitMap& psi) {
    psi.validate();
    return {[psi](const PLFunc& g) {
        auto x = node_eval(g, psi.cols);
        std::vector<Rat> y(psi.rows);
        for (std::size_t i = 0; i < psi.rows; ++i)
            for (std::size_t j = 0; j < psi.cols; ++j) y[i] += psi(i, j) * x[j];
        return node_interp(y);
    }};
}

/// Trace-space action of a standard homomorphism: the normalized sum of
/// compositions with the characteristic functions.
inline AffineEndo induced_affine(const StandardHom& sh) {
    sh.validate();
    return {[sh](const PLFunc& g) {
        PLFunc acc = PLFunc::constant(Rat(0));
        for (auto i : sh.t) acc = acc + compose(g, lambda_fn(i));
        return Rat(sh.n, sh.m) * acc;
    }};
}

// ---------------------------------------------------------------------------
// Standard-homomorphism approximation search
// ---------------------------------------------------------------------------

struct SearchBounds {
    std::uint64_t max_m = 0;           // 0: defaults to 5000 * n
    std::uint64_t dict_depth = 2000;   // free tuple entries range over 1..dict_depth
    std::uint64_t witness_scan = 200000;
};

struct StandardApprox {
    std::uint64_t m = 0;
    std::vector<std::uint64_t> t;
};

namespace detail {

struct DoublePL {
    std::vector<double> xs, ys;
    explicit DoublePL(const PLFunc& f) {
        for (const auto& x : f.xs) xs.push_back(to_double(x));
        for (const auto& y : f.ys) ys.push_back(to_double(y));
    }
    double operator()(double x) const {
        if (x <= xs.front()) return ys.front();
        if (x >= xs.back()) return ys.back();
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t i = static_cast<std::size_t>(it - xs.begin());
        return ys[i - 1] + (ys[i] - ys[i - 1]) * (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    }
};

}  // namespace detail

/// Searches for the least tuple representing psi as a standard homomorphism
/// within eps on the grid: least admissible length first, then lexicographic.
/// The first two entries are pinned to the identity and the constant at 2N.
/// Accepted tuples are verified with exact arithmetic at the grid points.
inline StandardApprox approx_standard(const AffineEndo& psi, std::uint64_t n, std::uint64_t k,
                                      const Rat& eps, const std::vector<PLFunc>& F,
                                      std::uint64_t N, SearchBounds bounds = {},
                                      std::size_t grid = 513) {
    if (bounds.max_m == 0) bounds.max_m = 5000 * n;
    if (k == 0 || n == 0 || eps <= 0) throw ShapeError();
    const std::size_t nf = F.size();
    const double eps_d = to_double(eps);

    // exact targets and their double samples
    std::vector<PLFunc> targets;
    std::vector<std::vector<double>> target_s(nf, std::vector<double>(grid));
    for (std::size_t a = 0; a < nf; ++a) {
        targets.push_back(psi(F[a]));
        detail::DoublePL dt(targets.back());
        for (std::size_t x = 0; x < grid; ++x)
            target_s[a][x] = dt(static_cast<double>(x) / (grid - 1));
    }

    // dictionary samples: lam_s[t][x], plus per-function contribution samples
    const std::uint64_t D = bounds.dict_depth;
    std::vector<std::vector<double>> lam_s(D + 1, std::vector<double>(grid));
    for (std::uint64_t t = 1; t <= D; ++t) {
        detail::DoublePL dl(lambda_fn(t));
        for (std::size_t x = 0; x < grid; ++x)
            lam_s[t][x] = dl(static_cast<double>(x) / (grid - 1));
    }
    const PLFunc forced = lambda_fn(2 * N);  // a rational constant
    const double forced_v = to_double(forced(Rat(0)));

    std::vector<detail::DoublePL> fd;
    for (const auto& f : F) fd.emplace_back(f);
    // contribution of dictionary entry t to function a at grid point x
    std::vector<std::vector<std::vector<double>>> contrib(
        nf, std::vector<std::vector<double>>(D + 1, std::vector<double>(grid)));
    std::vector<std::vector<double>> cmin(nf, std::vector<double>(grid, 1e300));
    std::vector<std::vector<double>> cmax(nf, std::vector<double>(grid, -1e300));
    for (std::size_t a = 0; a < nf; ++a)
        for (std::uint64_t t = 1; t <= D; ++t)
            for (std::size_t x = 0; x < grid; ++x) {
                double v = fd[a](lam_s[t][x]);
                contrib[a][t][x] = v;
                cmin[a][x] = std::min(cmin[a][x], v);
                cmax[a][x] = std::max(cmax[a][x], v);
            }
    std::vector<double> forced_c(nf);
    for (std::size_t a = 0; a < nf; ++a) forced_c[a] = fd[a](forced_v);

    // exact range of each test function (attained at breakpoints): the value
    // envelope reachable by any composition with a [0,1]-valued inner function
    std::vector<Rat> gmin(nf), gmax(nf);
    for (std::size_t a = 0; a < nf; ++a) {
        gmin[a] = gmax[a] = F[a].ys.front();
        for (const auto& y : F[a].ys) {
            if (y < gmin[a]) gmin[a] = y;
            if (y > gmax[a]) gmax[a] = y;
        }
    }
    const Rat forced_val = forced(Rat(0));

    // exact per-length infeasibility: with the two pinned entries in place, if
    // even the ideal envelope leaves a residual >= eps somewhere, skip L
    auto root_feasible_exact = [&](std::uint64_t L) {
        const Rat q(L - 2);
        for (std::size_t a = 0; a < nf; ++a)
            for (std::size_t x = 0; x < grid; ++x) {
                Rat p(x, grid - 1);
                Rat part = F[a](p) + F[a](forced_val);  // identity entry + pinned constant
                Rat needed = Rat(L) * targets[a](p) - part;
                Rat lb1 = (needed - q * gmax[a]) / L;
                Rat lb2 = (q * gmin[a] - needed) / L;
                Rat lb = lb1 > lb2 ? lb1 : lb2;
                if (lb >= eps) return false;
            }
        return true;
    };

    auto exact_verify = [&](std::uint64_t L, const std::vector<std::uint64_t>& t) {
        for (std::size_t a = 0; a < nf; ++a) {
            PLFunc sum = PLFunc::constant(Rat(0));
            for (auto ti : t) sum = sum + compose(F[a], lambda_fn(ti));
            PLFunc approxf = Rat(1, L) * sum;
            for (std::size_t x = 0; x < grid; ++x) {
                Rat p(x, grid - 1);
                if (rat_abs(targets[a](p) - approxf(p)) >= eps) return false;
            }
        }
        return true;
    };

    const double slack = 1e-9;
    for (std::uint64_t L = k; L * n <= bounds.max_m; L += k) {
        if (L < 2) continue;
        if (!root_feasible_exact(L)) continue;
        std::vector<std::uint64_t> t(L, 1);
        t[1] = 2 * N;
        std::vector<std::vector<double>> part(nf, std::vector<double>(grid));
        for (std::size_t a = 0; a < nf; ++a)
            for (std::size_t x = 0; x < grid; ++x)
                part[a][x] = contrib[a][1][x] + forced_c[a];

        // feasible(pos): can positions pos..L-1 still reach every target?
        auto feasible = [&](std::size_t pos) {
            const double q = static_cast<double>(L - pos);
            for (std::size_t a = 0; a < nf; ++a)
                for (std::size_t x = 0; x < grid; ++x) {
                    double needed = L * target_s[a][x] - part[a][x];
                    double lb = std::max(needed - q * cmax[a][x], q * cmin[a][x] - needed) / L;
                    if (lb > eps_d + slack) return false;
                }
            return true;
        };
        auto ones_ok = [&](std::size_t pos) {  // all-ones completion within eps on samples
            const double q = static_cast<double>(L - pos);
            for (std::size_t a = 0; a < nf; ++a)
                for (std::size_t x = 0; x < grid; ++x) {
                    double v = (part[a][x] + q * contrib[a][1][x]) / L;
                    if (std::fabs(v - target_s[a][x]) > eps_d + slack) return false;
                }
            return true;
        };

        std::function<bool(std::size_t)> dfs = [&](std::size_t pos) -> bool {
            if (ones_ok(pos)) {
                for (std::size_t p = pos; p < L; ++p) t[p] = 1;
                if (exact_verify(L, t)) return true;
            }
            if (pos == L) return false;
            for (std::uint64_t idx = 1; idx <= bounds.dict_depth; ++idx) {
                t[pos] = idx;
                for (std::size_t a = 0; a < nf; ++a)
                    for (std::size_t x = 0; x < grid; ++x) part[a][x] += contrib[a][idx][x];
                bool done = feasible(pos + 1) && dfs(pos + 1);
                if (done) return true;
                for (std::size_t a = 0; a < nf; ++a)
                    for (std::size_t x = 0; x < grid; ++x) part[a][x] -= contrib[a][idx][x];
            }
            t[pos] = 1;
            return false;
        };

        if (feasible(2) && dfs(2)) return {L * n, t};
    }
    throw SearchExhausted("standard homomorphism approximation at m <= " +
                          std::to_string(bounds.max_m));
}

// ---------------------------------------------------------------------------
// The stage recursion
// ---------------------------------------------------------------------------

/// Prime multiplicity stream 2, 2, 3, 2, 3, 5, ...: the b-th block lists the
/// first b primes, so every prime occurs infinitely often.
inline std::uint64_t q_stream(std::uint64_t i) {  // 1-based
    std::uint64_t b = 1;
    while (i > b) {
        i -= b;
        ++b;
    }
    return nth_prime(i);
}

struct AISystem {
    std::size_t stages = 0;
    std::vector<std::uint64_t> d, bold_d, G;   // index 0 holds stage 1
    std::vector<std::vector<std::uint64_t>> s;  // s[0] is empty
    std::vector<Rat> delta;                     // delta[i] is the stage-(i+1) tolerance
    std::vector<std::uint64_t> q;               // multiplicity stream prefix

    void validate() const {
        if (stages == 0 || d.empty() || d[0] != 1 || G[0] != 1 || !s[0].empty())
            throw Error("malformed stage record");
        for (std::size_t i = 1; i < stages; ++i) {
            if (d[i] % d[i - 1] != 0) throw Error("stage dimensions do not divide");
            std::uint64_t bd = d[i] / d[i - 1];
            if (bd != bold_d[i] || bd != s[i].size()) throw Error("multiplicity mismatch");
            std::uint64_t kprod = 1;
            for (std::size_t l = 0; l + 1 < i + 1; ++l) kprod *= q[l];
            if (bd % kprod != 0) throw Error("prime block does not divide the multiplicity");
            if (s[i][0] != 1 || s[i][1] != 2 * G[i]) throw Error("pinned indices violated");
        }
    }
};

/// Least index of a test function within tolerance of the target, full
/// sup-norm, exact arithmetic.
inline std::uint64_t least_witness(const PLFunc& target, const Rat& tol, std::uint64_t scan_cap) {
    for (std::uint64_t j = 1; j <= scan_cap; ++j)
        if (sup_diff(target, g_fn(j)) <= tol) return j;
    throw SearchExhausted("test-function witness within " + rat_str(tol));
}

/// Runs the stage recursion: base record, then per stage the saturation index,
/// the approximation search against the accumulated prime block, and the
/// bookkeeping of dimensions and tuples. sigma[i] is the stage-(i+1) map.
inline AISystem build_system(const std::vector<AffineEndo>& sigma,
                             const std::vector<Rat>& delta, std::size_t K,
                             SearchBounds bounds = {}) {
    if (K == 0 || sigma.size() < K || delta.size() < K) throw ShapeError();
    AISystem A;
    A.stages = 1;
    A.d = {1};
    A.bold_d = {1};
    A.G = {1};
    A.s = {{}};
    A.delta = delta;
    for (std::size_t N = 1; N < K; ++N) {
        // saturation: witnesses below the new index for the normalized sums
        // and the composed images of every earlier stage
        std::uint64_t floor_k = std::max<std::uint64_t>(A.G[N - 1], N + 1);
        std::uint64_t need = floor_k;
        for (std::size_t i = 2; i <= N; ++i) {
            const auto& si = A.s[i - 1];
            for (std::uint64_t j = 1; j <= A.G[N - 1]; ++j) {
                PLFunc gj = g_fn(j);
                PLFunc avg = PLFunc::constant(Rat(0));
                for (auto l : si) avg = avg + compose(gj, lambda_fn(l));
                avg = Rat(1, si.size()) * avg;
                need = std::max(need, least_witness(avg, delta[N - 1], bounds.witness_scan));
                PLFunc im = sigma[i - 1](gj);
                for (auto l : si)
                    need = std::max(need, least_witness(compose(im, lambda_fn(l)),
                                                        delta[N - 1], bounds.witness_scan));
            }
        }
        std::uint64_t Gn = need;
        std::uint64_t kprod = 1;
        for (std::size_t i = 1; i <= N; ++i) {
            A.q.resize(std::max<std::size_t>(A.q.size(), i));
            A.q[i - 1] = q_stream(i);
            kprod *= A.q[i - 1];
        }
        std::vector<PLFunc> F;
        for (std::uint64_t j = 1; j <= Gn; ++j) F.push_back(g_fn(j));
        StandardApprox ap;
        try {
            ap = approx_standard(sigma[N], A.d[N - 1], kprod, delta[N], F, Gn, bounds);
        } catch (const SearchExhausted& e) {
            throw SearchExhausted("stage " + std::to_string(N + 1) + ": " + e.what());
        }
        A.G.push_back(Gn);
        A.d.push_back(ap.m);
        A.bold_d.push_back(ap.m / A.d[N - 1]);
        A.s.push_back(ap.t);
        A.stages = N + 1;
    }
    return A;
}

inline SupernaturalNumber k0(const AISystem& A) {
    std::vector<std::uint64_t> mults(A.bold_d.begin(), A.bold_d.end());
    return supernatural_of_multiplicities(mults);
}

// ---------------------------------------------------------------------------
// Simplicity certificate and trace-system checks
// ---------------------------------------------------------------------------

struct SimplicityCert {
    std::uint64_t stage = 0;
    Rat constant;   // value c with f(c) != 0, injected as a constant summand
    Rat value;      // f(c)
};

/// Finds a stage whose pinned constant dictionary entry evaluates f to a
/// nonzero value; such a constant becomes a direct summand of the composed
/// image, so the image is nonzero at every point, including the given t.
inline SimplicityCert simplicity_cert(const AISystem& A, const PLFunc& f, const Rat& t,
                                      std::uint64_t max_stage) {
    (void)t;
    bool nonzero = false;
    for (const auto& y : f.ys)
        if (y != 0) nonzero = true;
    if (!nonzero) throw Error("zero function has no certificate");
    for (std::size_t j = 1; j < A.stages; ++j) {
        if (A.s[j].size() < 2 || A.s[j][1] != 2 * A.G[j])
            throw Error("pinned constant index violated at stage " + std::to_string(j + 1));
    }
    std::uint64_t last = std::min<std::uint64_t>(max_stage, A.stages);
    for (std::uint64_t j = 1; j <= last; ++j) {
        Rat c = j == 1 ? Rat(0) : lambda_fn(2 * A.G[j - 1])(Rat(0));
        Rat v = f(c);
        if (v != 0) return {j, c, v};
    }
    throw CertNotFound();
}

struct TraceCheckReport {
    bool pass = true;
    std::string first_failure;
    std::size_t stage = 0;
};

/// Checks the intertwining hypotheses for two stage sequences of affine maps
/// over nested finite test sets: nesting, a declared dense-prefix proxy,
/// forward approximability, and the stagewise closeness bound.
inline TraceCheckReport trace_intertwining_check(const std::vector<AffineEndo>& phi,
                                                 const std::vector<AffineEndo>& sigma,
                                                 const std::vector<std::vector<PLFunc>>& F,
                                                 const std::vector<Rat>& delta,
                                                 std::uint64_t dense_prefix = 1) {
    TraceCheckReport rep;
    const std::size_t K = F.size();
    if (phi.size() < K || sigma.size() < K || delta.size() < K) throw ShapeError();
    auto fail = [&](std::string what, std::size_t k) {
        rep.pass = false;
        rep.first_failure = std::move(what);
        rep.stage = k;
        return rep;
    };
    auto contains = [](const std::vector<PLFunc>& set, const PLFunc& f) {
        for (const auto& g : set)
            if (sup_diff(g, f) == 0) return true;
        return false;
    };
    for (std::size_t k = 0; k + 1 < K; ++k)
        for (const auto& f : F[k])
            if (!contains(F[k + 1], f)) return fail("nesting", k + 1);
    for (std::uint64_t j = 1; j <= dense_prefix; ++j)
        if (!contains(F.back(), g_fn(j))) return fail("dense prefix", K);
    for (std::size_t k = 0; k + 1 < K; ++k)
        for (const auto& f : F[k])
            for (std::size_t i = 0; i <= k; ++i) {
                bool okp = false, oks = false;
                for (const auto& g : F[k + 1]) {
                    if (sup_diff(phi[i](f), g) <= delta[k + 1]) okp = true;
                    if (sup_diff(sigma[i](f), g) <= delta[k + 1]) oks = true;
                }
                if (!okp) return fail("forward approximation (first sequence)", k + 1);
                if (!oks) return fail("forward approximation (second sequence)", k + 1);
            }
    for (std::size_t k = 0; k < K; ++k)
        for (const auto& f : F[k])
            if (sup_diff(phi[k](f), sigma[k](f)) > delta[k]) return fail("closeness", k + 1);
    return rep;
}

}  // namespace oalg
