#pragma once

#include "oalg/error.hpp"
#include "oalg/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace oalg {

struct InvalidRational : Error {
    InvalidRational() : Error("rational with zero denominator") {}
};

/// Sequence of naturals: explicit prefix, then the linear tail a*i + b.
struct ExpSeq {
    std::vector<std::uint64_t> prefix;
    std::uint64_t slope = 0;
    std::uint64_t intercept = 0;

    BigInt at(std::uint64_t i) const {
        if (i < prefix.size()) return prefix[i];
        return BigInt(slope) * i + intercept;
    }
};

inline bool operator==(const ExpSeq& f, const ExpSeq& g) {  // structural
    return f.prefix == g.prefix && f.slope == g.slope && f.intercept == g.intercept;
}

/// f(i) <= g(i) for all i, decided exactly: the prefix region pointwise, then
/// the joint tail by slope (equal slopes compare intercepts; a smaller slope
/// makes the difference decreasing, so the boundary point decides).
inline bool pointwise_leq(const ExpSeq& f, const ExpSeq& g) {
    const std::uint64_t M = std::max(f.prefix.size(), g.prefix.size());
    for (std::uint64_t i = 0; i <= M; ++i)
        if (f.at(i) > g.at(i)) return false;
    if (f.slope > g.slope) return false;
    if (f.slope == g.slope) return f.intercept <= g.intercept;
    return true;  // smaller slope: max of f-g on the tail is at i = M, already checked
}

struct LeqInftyResult {
    bool holds = false;
    std::uint64_t witness = 0;   // least m with f(i) <= g(i)+m for all i, when holds
    std::string refutation;      // why f(i)-g(i) is unbounded, otherwise
};

/// The shifted domination f <=^infty g: exists m with f(i) <= g(i)+m for all i.
/// With linear tails this holds iff slope(f) <= slope(g); the least witness is
/// sup(f-g) over the prefix region and the tail boundary.
inline LeqInftyResult leq_infty(const ExpSeq& f, const ExpSeq& g) {
    LeqInftyResult r;
    if (f.slope > g.slope) {
        r.refutation = "f(i)-g(i) grows like " + rat_str(Rat(BigInt(f.slope) - g.slope)) +
                       "*i on the tail";
        return r;
    }
    r.holds = true;
    const std::uint64_t M = std::max(f.prefix.size(), g.prefix.size());
    BigInt sup = 0;
    for (std::uint64_t i = 0; i <= M; ++i) {
        BigInt d = f.at(i) - g.at(i);
        if (d > sup) sup = d;
    }
    // equal slopes: the tail difference is the constant checked at i = M;
    // strictly smaller slope: the tail difference decreases from i = M
    r.witness = sup.convert_to<std::uint64_t>();
    return r;
}

/// Bounded semi-decision for raw prefixes: only answers whether some m <= max_m
/// works on the first `terms` coordinates; sound for refutation up to the
/// inspected window, not a decision of the full relation.
inline bool bounded_leq_oracle(const ExpSeq& f, const ExpSeq& g, std::uint64_t terms,
                               std::uint64_t max_m) {
    BigInt sup = 0;
    for (std::uint64_t i = 0; i < terms; ++i) {
        BigInt d = f.at(i) - g.at(i);
        if (d > sup) sup = d;
    }
    return sup <= max_m;
}

inline bool cf_embeds(const ExpSeq& f, const ExpSeq& g) { return leq_infty(f, g).holds; }

inline bool cf_biembed(const ExpSeq& f, const ExpSeq& g) {
    return cf_embeds(f, g) && cf_embeds(g, f);
}

/// UHF isomorphism: pointwise equality of the exponent sequences (two linear
/// tails agreeing at the two points past the prefixes agree everywhere).
inline bool uhf_iso(const ExpSeq& f, const ExpSeq& g) {
    const std::uint64_t M = std::max(f.prefix.size(), g.prefix.size());
    for (std::uint64_t i = 0; i <= M + 1; ++i)
        if (f.at(i) != g.at(i)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Supernatural numbers
// ---------------------------------------------------------------------------

inline std::uint64_t nth_prime(std::size_t n) {  // 1-based: p1 = 2
    std::vector<std::uint64_t> ps;
    for (std::uint64_t c = 2; ps.size() < n; ++c) {
        bool prime = true;
        for (auto p : ps) {
            if (p * p > c) break;
            if (c % p == 0) {
                prime = false;
                break;
            }
        }
        if (prime) ps.push_back(c);
    }
    return ps[n - 1];
}

struct SupernaturalNumber {
    static constexpr std::uint64_t kInf = UINT64_MAX;
    std::uint64_t default_exp = 0;
    std::map<std::uint64_t, std::uint64_t> exceptions;  // prime -> exponent (kInf = infinity)

    std::uint64_t exponent(std::uint64_t prime) const {
        auto it = exceptions.find(prime);
        return it == exceptions.end() ? default_exp : it->second;
    }
    void set(std::uint64_t prime, std::uint64_t e) {
        if (e == default_exp) exceptions.erase(prime);
        else exceptions[prime] = e;
    }
};

inline std::map<std::uint64_t, std::uint64_t> factorize(BigInt n) {
    std::map<std::uint64_t, std::uint64_t> f;
    for (std::uint64_t p = 2; BigInt(p) * p <= n; p += (p == 2 ? 1 : 2))
        while (n % p == 0) {
            ++f[p];
            n /= p;
        }
    if (n > 1) ++f[n.convert_to<std::uint64_t>()];
    return f;
}

/// Factors the running product of stage multiplicities. A prime is promoted to
/// the infinite exponent when its exponent exceeds inf_threshold and grew at
/// strictly increasing stages more than inf_threshold times.
inline SupernaturalNumber supernatural_of_multiplicities(
    const std::vector<std::uint64_t>& mults, std::uint64_t inf_threshold = UINT64_MAX) {
    SupernaturalNumber s;
    std::map<std::uint64_t, std::uint64_t> growth_stages;
    for (auto m : mults)
        for (auto [p, e] : factorize(BigInt(m))) {
            s.set(p, s.exponent(p) + e);
            ++growth_stages[p];
        }
    if (inf_threshold != UINT64_MAX)
        for (auto [p, stages] : growth_stages)
            if (s.exponent(p) > inf_threshold && stages > inf_threshold)
                s.set(p, SupernaturalNumber::kInf);
    return s;
}

/// q (in lowest terms) lies in the K0 group iff every prime power in its
/// denominator is dominated by the supernatural number.
inline bool k0_contains(const Rat& q, const SupernaturalNumber& s) {
    if (denominator(q) == 0) throw InvalidRational();
    for (auto [p, e] : factorize(denominator(q))) {
        std::uint64_t have = s.exponent(p);
        if (have != SupernaturalNumber::kInf && e > have) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Text codec: prefix=[3,1,4];tail=2*i+1
// ---------------------------------------------------------------------------

inline std::string expseq_str(const ExpSeq& f) {
    std::string s = "prefix=[";
    for (std::size_t i = 0; i < f.prefix.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(f.prefix[i]);
    }
    s += "];tail=" + std::to_string(f.slope) + "*i+" + std::to_string(f.intercept);
    return s;
}

inline ExpSeq parse_expseq(const std::string& text) {
    ExpSeq f;
    auto lb = text.find('['), rb = text.find(']');
    auto tail = text.find("tail=");
    if (lb == std::string::npos || rb == std::string::npos || tail == std::string::npos)
        throw Error("bad sequence literal: " + text);
    std::string body = text.substr(lb + 1, rb - lb - 1);
    std::istringstream ps(body);
    std::string tok;
    while (std::getline(ps, tok, ','))
        if (!tok.empty()) f.prefix.push_back(std::stoull(tok));
    std::string t = text.substr(tail + 5);
    auto star = t.find("*i+");
    if (star == std::string::npos) throw Error("bad tail formula: " + t);
    f.slope = std::stoull(t.substr(0, star));
    f.intercept = std::stoull(t.substr(star + 3));
    return f;
}

}  // namespace oalg
