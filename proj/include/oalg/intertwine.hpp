#pragma once

#include "oalg/error.hpp"
#include "oalg/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace oalg {

struct NoUnitaryFound : Error {
    explicit NoUnitaryFound(std::size_t stage)
        : Error("no admissible unitary at stage " + std::to_string(stage)), stage(stage) {}
    std::size_t stage;
};

struct OutOfScope : Error {
    OutOfScope() : Error("element is not among the recorded sets at that stage") {}
};

/// Conjugation endomorphism a -> u a u*.
struct ConjHom {
    CMat u;
    CMat operator()(const CMat& a) const { return u * a * u.adjoint(); }
};

/// Deterministic infinite unitary stream: index 1 is the identity, then a
/// finite base list (planted entries, permutations, diagonal phases, seeded
/// pseudo-random unitaries) repeated cyclically so that any entry recurs with
/// arbitrarily large indices.
struct UnitaryDict {
    std::size_t dim = 0;
    std::vector<CMat> base;

    UnitaryDict() = default;
    UnitaryDict(std::size_t d, std::uint64_t seed, std::size_t random_count = 64,
                std::vector<CMat> planted = {})
        : dim(d) {
        for (auto& p : planted) base.push_back(std::move(p));
        // permutation unitaries
        std::vector<std::size_t> perm(d);
        for (std::size_t i = 0; i < d; ++i) perm[i] = i;
        std::size_t guard = 0;
        do {
            CMat p = CMat::Zero(d, d);
            for (std::size_t i = 0; i < d; ++i) p(perm[i], i) = 1.0;
            base.push_back(std::move(p));
        } while (std::next_permutation(perm.begin(), perm.end()) && ++guard < 720);
        // diagonal phases on the eighth-roots grid
        for (std::size_t pat = 1; pat < 16 && pat < (std::size_t{1} << d); ++pat) {
            CMat ph = CMat::Identity(d, d);
            for (std::size_t i = 0; i < d; ++i)
                if (pat & (std::size_t{1} << i)) ph(i, i) = std::exp(Cx(0.0, M_PI / 4.0));
            base.push_back(std::move(ph));
        }
        // seeded pseudo-random unitaries via QR
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss;
        for (std::size_t k = 0; k < random_count; ++k) {
            CMat g(d, d);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) g(i, j) = Cx(gauss(rng), gauss(rng));
            Eigen::HouseholderQR<CMat> qr(g);
            base.push_back(CMat(qr.householderQ()));
        }
    }

    CMat at(std::size_t idx) const {  // 1-based
        if (idx == 0) throw Error("unitary indices start at 1");
        if (idx == 1) return CMat::Identity(dim, dim);
        return base[(idx - 2) % base.size()];
    }
};

/// One side of the intertwining: a fixed ambient matrix algebra with a dense
/// element stream and a unitary stream.
struct Tower {
    std::size_t dim = 0;
    std::vector<CMat> elements;  // cycled as the dense stream x_1, x_2, ...
    UnitaryDict units;

    CMat element(std::size_t k) const {  // 1-based
        return elements[(k - 1) % elements.size()];
    }
};

struct StageRecord {
    std::size_t stage = 0;
    std::vector<CMat> F, G;  // finite sets on the two sides
    std::size_t n_idx = 1, m_idx = 1;
    double eps = 0.0;
    double resid_eta = 0.0, resid_iota = 0.0;
};

struct IntertwineRecord {
    std::size_t dim_a = 0, dim_b = 0;
    ConjHom base_iota, base_eta;
    std::vector<StageRecord> stages;  // stages[0] is stage 1 (base)
    std::vector<double> eps;          // tolerance schedule for the run stages
    bool capped = false;

    const StageRecord& at_stage(std::size_t k) const {  // 1-based
        if (k == 0 || k > stages.size()) throw OutOfScope();
        return stages[k - 1];
    }
    ConjHom eta_at(std::size_t k, const Tower& ta) const {
        return ConjHom{ta.units.at(at_stage(k).n_idx).eval() * base_eta.u};
    }
};

namespace detail {

inline bool mat_in(const std::vector<CMat>& set, const CMat& a, double tol) {
    for (const auto& b : set)
        if (opnorm(a - b) <= tol) return true;
    return false;
}

inline void add_unique(std::vector<CMat>& set, const CMat& a) {
    if (!mat_in(set, a, 1e-12)) set.push_back(a);
}

}  // namespace detail

/// The two-tower recursion: grows the finite sets, then at each stage picks
/// the least strictly-larger unitary indices closing the two triangles within
/// the stage tolerance on those sets.
inline IntertwineRecord run_intertwining(const Tower& ta, const Tower& tb, const ConjHom& iota,
                                         const ConjHom& eta, const std::vector<double>& eps,
                                         std::size_t stage_cap, std::size_t dict_span = 4096) {
    if (ta.dim != tb.dim) throw Error("ambient dimensions must agree");
    IntertwineRecord rec;
    rec.dim_a = ta.dim;
    rec.dim_b = tb.dim;
    rec.base_iota = iota;
    rec.base_eta = eta;
    rec.eps = eps;

    StageRecord base;
    base.stage = 1;
    rec.stages.push_back(base);

    std::vector<CMat> F, G;
    std::size_t n_prev = 1, m_prev = 1;
    CMat eta_u = eta.u, iota_u = iota.u;  // current stage maps (stage 1: the bases)

    for (std::size_t k = 2; k <= stage_cap; ++k) {
        if (k - 2 >= eps.size()) {
            rec.capped = true;
            break;
        }
        const double ek = eps[k - 2];
        ConjHom eta_prev{eta_u}, iota_prev{iota_u};

        detail::add_unique(F, ta.element(k - 1));
        std::vector<CMat> etaG;
        for (const auto& b : G) etaG.push_back(eta_prev(b));
        for (const auto& a : etaG) detail::add_unique(F, a);

        detail::add_unique(G, tb.element(k - 1));
        // iota_{k-1} applied to the freshly grown F
        for (const auto& a : F) detail::add_unique(G, iota_prev(a));

        StageRecord sr;
        sr.stage = k;
        sr.F = F;
        sr.G = G;
        sr.eps = ek;

        // step: least n > previous with Ad(u_n) after the base eta closing the
        // first triangle on F within the tolerance
        bool found = false;
        for (std::size_t n = n_prev + 1; n <= n_prev + dict_span; ++n) {
            CMat u = ta.units.at(n);
            double worst = 0.0;
            for (const auto& a : F) {
                CMat img = u * eta.u * (iota_prev(a)) * eta.u.adjoint() * u.adjoint();
                worst = std::max(worst, opnorm(img - a));
            }
            if (worst <= ek + 1e-9) {
                sr.n_idx = n;
                sr.resid_eta = worst;
                eta_u = u * eta.u;
                found = true;
                break;
            }
        }
        if (!found) throw NoUnitaryFound(k);

        ConjHom eta_k{eta_u};
        found = false;
        for (std::size_t m = m_prev + 1; m <= m_prev + dict_span; ++m) {
            CMat v = tb.units.at(m);
            double worst = 0.0;
            for (const auto& b : G) {
                CMat img = v * iota.u * (eta_k(b)) * iota.u.adjoint() * v.adjoint();
                worst = std::max(worst, opnorm(img - b));
            }
            if (worst <= ek + 1e-9) {
                sr.m_idx = m;
                sr.resid_iota = worst;
                iota_u = v * iota.u;
                found = true;
                break;
            }
        }
        if (!found) throw NoUnitaryFound(k);

        n_prev = sr.n_idx;
        m_prev = sr.m_idx;
        rec.stages.push_back(sr);
    }
    if (rec.stages.size() == stage_cap && stage_cap < eps.size() + 1) rec.capped = true;
    return rec;
}

/// Canned instance: two embeddings of the 2x2 algebra into the 4x4 matrices
/// differing by a fixed permutation. The first base map applies the
/// permutation, the second is trivial, so each stage must recover an inverse
/// from the unitary stream.
struct M2M4Instance {
    Tower ta, tb;
    ConjHom iota, eta;
};

inline M2M4Instance m2_in_m4_instance(std::uint64_t seed) {
    M2M4Instance inst;
    CMat p = CMat::Identity(4, 4);  // transposes the middle coordinates
    p(1, 1) = p(2, 2) = 0.0;
    p(1, 2) = p(2, 1) = 1.0;

    auto embed = [](const CMat& a) { return kron(CMat::Identity(2, 2), a); };
    CMat e11 = CMat::Zero(2, 2), sx = CMat::Zero(2, 2), sz = CMat::Zero(2, 2);
    e11(0, 0) = 1.0;
    sx(0, 1) = 1.0;
    sx(1, 0) = 1.0;
    sz(0, 0) = 1.0;
    sz(1, 1) = -1.0;

    inst.ta.dim = inst.tb.dim = 4;
    for (const auto& a : {e11, sx, sz}) {
        inst.ta.elements.push_back(embed(a));
        inst.tb.elements.push_back(p * embed(a) * p.adjoint());
    }
    inst.ta.units = UnitaryDict(4, seed);
    inst.tb.units = UnitaryDict(4, seed + 1);
    inst.iota = ConjHom{p};
    inst.eta = ConjHom{CMat::Identity(4, 4)};
    return inst;
}

/// Image of a recorded element under the stage-K map toward the limit, with
/// the accumulated tail bound of the tolerance schedule (the remainder past
/// the recorded stages is charged one extra copy of the last tolerance).
inline std::pair<CMat, double> limit_map(const IntertwineRecord& rec, const Tower& ta,
                                         const Tower& tb, const CMat& a, std::size_t K) {
    const StageRecord& sr = rec.at_stage(K);
    bool known = detail::mat_in(sr.G, a, 1e-9) ||
                 opnorm(a - CMat::Identity(rec.dim_b, rec.dim_b)) <= 1e-12;
    if (!known) throw OutOfScope();
    CMat u = ta.units.at(sr.n_idx);
    CMat img = u * rec.base_eta.u * a * rec.base_eta.u.adjoint() * u.adjoint();
    double bound = 0.0;
    for (std::size_t j = K; j <= rec.stages.size(); ++j)
        if (j >= 2) bound += rec.eps[j - 2];
    if (!rec.stages.empty() && rec.stages.size() >= 2) bound += rec.eps[rec.stages.size() - 2];
    (void)tb;
    return {img, bound};
}

}  // namespace oalg
