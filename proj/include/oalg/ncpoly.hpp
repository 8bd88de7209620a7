#pragma once

#include "oalg/enumerations.hpp"
#include "oalg/error.hpp"
#include "oalg/matrix.hpp"
#include "oalg/rational.hpp"

#include <algorithm>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace oalg {

struct UnboundVariable : Error {
    explicit UnboundVariable(std::size_t var)
        : Error("polynomial variable x" + std::to_string(var + 1) + " exceeds tuple length") {}
};

struct LengthMismatch : Error {
    LengthMismatch() : Error("norm code and state code lengths differ") {}
};

// ---------------------------------------------------------------------------
// Words over the letters x1, x1*, x2, x2*, ...  Letter 2k encodes x_{k+1},
// letter 2k+1 encodes x_{k+1}*.  The empty word stands for the unit.
// ---------------------------------------------------------------------------

using Word = std::vector<std::uint32_t>;

inline Word star_word(const Word& w) {
    Word r(w.rbegin(), w.rend());
    for (auto& l : r) l ^= 1u;
    return r;
}

inline std::size_t word_degree(const Word& w) { return w.size(); }

inline std::size_t word_maxvar(const Word& w) {  // 1-based; 0 for the empty word
    std::size_t v = 0;
    for (auto l : w) v = std::max<std::size_t>(v, l / 2 + 1);
    return v;
}

/// Frozen word order: by degree+maxvar, then degree, then letterwise.
inline bool word_less(const Word& a, const Word& b) {
    auto ka = word_degree(a) + word_maxvar(a);
    auto kb = word_degree(b) + word_maxvar(b);
    if (ka != kb) return ka < kb;
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

namespace detail {

inline BigInt pow_big(std::uint64_t base, std::uint64_t e) {
    BigInt r = 1;
    for (std::uint64_t i = 0; i < e; ++i) r *= base;
    return r;
}

/// Number of length-d words over 2v letters whose maxvar is exactly v.
inline BigInt word_block_size(std::uint64_t d, std::uint64_t v) {
    return pow_big(2 * v, d) - pow_big(2 * v - 2, d);
}

/// Rank of w inside its (degree, maxvar) block, lex over the 2v-letter alphabet.
inline BigInt word_block_rank(const Word& w) {
    const std::uint64_t v = word_maxvar(w);
    const std::uint64_t d = w.size();
    const std::uint32_t hi = static_cast<std::uint32_t>(2 * v - 2);  // letters >= hi touch var v
    BigInt rank = 0;
    bool seen_hi = false;
    for (std::uint64_t pos = 0; pos < d; ++pos) {
        const std::uint64_t rem = d - pos - 1;
        for (std::uint32_t l = 0; l < w[pos]; ++l) {
            if (seen_hi || l >= hi) rank += pow_big(2 * v, rem);
            else rank += word_block_size(rem, v);  // must still pick up var v later
        }
        if (w[pos] >= hi) seen_hi = true;
    }
    return rank;
}

inline Word word_block_unrank(std::uint64_t d, std::uint64_t v, BigInt rank) {
    const std::uint32_t hi = static_cast<std::uint32_t>(2 * v - 2);
    Word w(d);
    bool seen_hi = false;
    for (std::uint64_t pos = 0; pos < d; ++pos) {
        const std::uint64_t rem = d - pos - 1;
        for (std::uint32_t l = 0; l < 2 * v; ++l) {
            BigInt cnt = (seen_hi || l >= hi) ? pow_big(2 * v, rem) : word_block_size(rem, v);
            if (rank < cnt) {
                w[pos] = l;
                if (l >= hi) seen_hi = true;
                break;
            }
            rank -= cnt;
        }
    }
    return w;
}

}  // namespace detail

/// Index of a nonempty word in the frozen enumeration.
inline BigInt word_index(const Word& w) {
    const std::uint64_t d = w.size();
    const std::uint64_t v = word_maxvar(w);
    const std::uint64_t key = d + v;
    BigInt off = 0;
    for (std::uint64_t k = 2; k < key; ++k)
        for (std::uint64_t dd = 1; dd < k; ++dd) off += detail::word_block_size(dd, k - dd);
    for (std::uint64_t dd = 1; dd < d; ++dd) off += detail::word_block_size(dd, key - dd);
    return off + detail::word_block_rank(w);
}

inline Word word_of_index(BigInt idx) {
    for (std::uint64_t key = 2;; ++key) {
        for (std::uint64_t d = 1; d < key; ++d) {
            BigInt sz = detail::word_block_size(d, key - d);
            if (idx < sz) return detail::word_block_unrank(d, key - d, idx);
            idx -= sz;
        }
    }
}

// ---------------------------------------------------------------------------
// Polynomials
// ---------------------------------------------------------------------------

struct Term {
    RatCx coeff;
    Word word;
};

/// Formal *-polynomial over the complex rationals, kept in canonical form:
/// terms sorted by the frozen word order, distinct words, no zero coefficients.
/// When `unital` is false the empty word may not occur.
struct NCPolynomial {
    std::vector<Term> terms;
    bool unital = false;

    bool is_zero() const { return terms.empty(); }

    void canonicalize() {
        std::sort(terms.begin(), terms.end(),
                  [](const Term& a, const Term& b) { return word_less(a.word, b.word); });
        std::vector<Term> out;
        for (auto& t : terms) {
            if (!out.empty() && out.back().word == t.word) out.back().coeff = out.back().coeff + t.coeff;
            else out.push_back(t);
        }
        std::erase_if(out, [](const Term& t) { return t.coeff.is_zero(); });
        terms = std::move(out);
        if (!unital) {
            for (const auto& t : terms)
                if (t.word.empty()) throw std::logic_error("constant term in a non-unital polynomial");
        }
    }

    static NCPolynomial variable(std::size_t k) {  // 1-based, x_k
        NCPolynomial p;
        p.terms.push_back({RatCx(Rat(1)), Word{static_cast<std::uint32_t>(2 * (k - 1))}});
        return p;
    }
    static NCPolynomial constant(RatCx c) {
        NCPolynomial p;
        p.unital = true;
        if (!c.is_zero()) p.terms.push_back({std::move(c), Word{}});
        return p;
    }

    NCPolynomial star() const {
        NCPolynomial r;
        r.unital = unital;
        for (const auto& t : terms) r.terms.push_back({t.coeff.conj(), star_word(t.word)});
        r.canonicalize();
        return r;
    }

    friend NCPolynomial operator+(const NCPolynomial& a, const NCPolynomial& b) {
        NCPolynomial r;
        r.unital = a.unital || b.unital;
        r.terms = a.terms;
        r.terms.insert(r.terms.end(), b.terms.begin(), b.terms.end());
        r.canonicalize();
        return r;
    }
    friend NCPolynomial operator-(const NCPolynomial& a) {
        NCPolynomial r = a;
        for (auto& t : r.terms) t.coeff = -t.coeff;
        return r;
    }
    friend NCPolynomial operator-(const NCPolynomial& a, const NCPolynomial& b) { return a + (-b); }
    friend NCPolynomial operator*(const NCPolynomial& a, const NCPolynomial& b) {
        NCPolynomial r;
        r.unital = a.unital || b.unital;
        for (const auto& s : a.terms)
            for (const auto& t : b.terms) {
                Word w = s.word;
                w.insert(w.end(), t.word.begin(), t.word.end());
                r.terms.push_back({s.coeff * t.coeff, std::move(w)});
            }
        r.canonicalize();
        return r;
    }
    friend bool operator==(const NCPolynomial& a, const NCPolynomial& b) {
        if (a.terms.size() != b.terms.size()) return false;
        for (std::size_t i = 0; i < a.terms.size(); ++i)
            if (a.terms[i].coeff != b.terms[i].coeff || a.terms[i].word != b.terms[i].word)
                return false;
        return true;
    }
};

// ---------------------------------------------------------------------------
// The frozen enumeration of constant-free polynomials (and the unital variant).
//
// Index layout (all bijective):
//   even j = 2t       -> one term; t even: word t/2 with coefficient 1,
//                        t odd: (word w, coeff code c+1) with (w,c) = unpair((t-1)/2)
//   odd  j = 2M+1     -> k >= 2 terms; (k-2, payload) = unpair(M), payload packs
//                        word-index gaps and coefficient codes as a 2k-tuple.
// ---------------------------------------------------------------------------

namespace detail {

inline Term term_of_code(const BigInt& t, bool unital) {
    BigInt w;
    RatCx coeff;
    if ((t & 1) == 0) {
        w = t / 2;
        coeff = RatCx(Rat(1));
    } else {
        auto [wi, c] = unpair2((t - 1) / 2);
        w = wi;
        coeff = coeff_of_code(c + 1);  // code 0 is reserved for the bare-word form
    }
    Word word;
    if (unital) {
        if (w > 0) word = word_of_index(w - 1);
    } else {
        word = word_of_index(w);
    }
    return {coeff, std::move(word)};
}

inline BigInt code_of_term(const Term& t, bool unital) {
    BigInt w = t.word.empty() ? BigInt(0) : word_index(t.word) + (unital ? 1 : 0);
    if (!unital && t.word.empty()) throw std::logic_error("empty word without unit");
    BigInt c = code_of_coeff(t.coeff);
    if (c == 0) return 2 * w;
    return 2 * pair2(w, c - 1) + 1;
}

inline NCPolynomial poly_of_index(const BigInt& j, bool unital) {
    NCPolynomial p;
    p.unital = unital;
    if ((j & 1) == 0) {
        p.terms.push_back(term_of_code(j / 2, unital));
    } else {
        auto [k2, payload] = unpair2((j - 1) / 2);
        std::size_t k = to_u64(k2) + 2;
        auto tup = unpack_tuple(payload, 2 * k);
        BigInt w = 0;
        for (std::size_t i = 0; i < k; ++i) {
            w += tup[2 * i] + (i == 0 ? 0 : 1);
            Word word;
            if (unital) {
                if (w > 0) word = word_of_index(w - 1);
            } else {
                word = word_of_index(w);
            }
            p.terms.push_back({coeff_of_code(tup[2 * i + 1]), std::move(word)});
        }
    }
    return p;
}

inline BigInt index_of_poly(const NCPolynomial& p, bool unital) {
    if (p.terms.empty()) throw std::invalid_argument("the zero polynomial has no index");
    if (p.terms.size() == 1) return 2 * code_of_term(p.terms[0], unital);
    std::vector<BigInt> tup;
    BigInt prev = 0;
    for (std::size_t i = 0; i < p.terms.size(); ++i) {
        BigInt w = p.terms[i].word.empty() ? BigInt(0) : word_index(p.terms[i].word) + (unital ? 1 : 0);
        tup.push_back(i == 0 ? w : w - prev - 1);
        tup.push_back(code_of_coeff(p.terms[i].coeff));
        prev = w;
    }
    return 2 * pair2(BigInt(p.terms.size()) - 2, pack_tuple(tup)) + 1;
}

}  // namespace detail

inline NCPolynomial enum_poly(const BigInt& j) { return detail::poly_of_index(j, false); }
inline NCPolynomial enum_poly_unital(const BigInt& j) { return detail::poly_of_index(j, true); }
inline BigInt index_of(const NCPolynomial& p) { return detail::index_of_poly(p, false); }
inline BigInt index_of_unital(const NCPolynomial& p) { return detail::index_of_poly(p, true); }

/// index_of for sums/products that may leave the enumeration window; zero maps
/// to nullopt (the enumeration contains only nonzero polynomials).
inline std::optional<BigInt> try_index_of(const NCPolynomial& p) {
    if (p.is_zero()) return std::nullopt;
    for (const auto& t : p.terms)
        if (t.word.empty()) return std::nullopt;
    return detail::index_of_poly(p, false);
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Finite tuple of square matrices of a common dimension.
struct MatrixTuple {
    std::size_t dim = 0;
    std::vector<CMat> entries;
};

struct RatMatrixTuple {
    std::size_t dim = 0;
    std::vector<RatMat> entries;
};

namespace detail {

template <class M, class Tuple, class Ident, class Adj, class Scale>
M eval_impl(const NCPolynomial& p, const Tuple& gamma, std::size_t d, Ident ident, Adj adj,
            Scale scale) {
    M acc = scale(RatCx(Rat(0)), ident(d));
    for (const auto& t : p.terms) {
        M prod = ident(d);
        for (auto l : t.word) {
            std::size_t var = l / 2;
            if (var >= gamma.size()) throw UnboundVariable(var);
            prod = prod * ((l & 1) ? adj(gamma[var]) : gamma[var]);
        }
        acc = acc + scale(t.coeff, prod);
    }
    return acc;
}

}  // namespace detail

inline CMat eval(const NCPolynomial& p, const MatrixTuple& gamma) {
    return detail::eval_impl<CMat>(
        p, gamma.entries, gamma.dim,
        [](std::size_t d) { return CMat(CMat::Identity(d, d)); },
        [](const CMat& m) { return CMat(m.adjoint()); },
        [](const RatCx& c, const CMat& m) { return CMat(to_complex(c) * m); });
}

inline RatMat eval(const NCPolynomial& p, const RatMatrixTuple& gamma) {
    return detail::eval_impl<RatMat>(
        p, gamma.entries, gamma.dim, [](std::size_t d) { return RatMat::identity(d); },
        [](const RatMat& m) { return adjoint(m); },
        [](const RatCx& c, const RatMat& m) { return c * m; });
}

// ---------------------------------------------------------------------------
// Norm codes and state codes
// ---------------------------------------------------------------------------

/// Truncated norm sequence: delta(j) is the operator norm of the j-th
/// enumerated polynomial evaluated on some tuple.
struct NormCode {
    std::vector<double> delta;
    std::size_t length() const { return delta.size(); }
};

struct StateCode {
    std::vector<Cx> phi;
    std::size_t length() const { return phi.size(); }
};

inline NormCode xi_code(const MatrixTuple& gamma, std::size_t L) {
    NormCode nc;
    nc.delta.reserve(L);
    for (std::size_t j = 0; j < L; ++j) nc.delta.push_back(opnorm(eval(enum_poly(j), gamma)));
    return nc;
}

/// Relations among the first L enumerated polynomials, detected symbolically.
struct IndexRelations {
    // (k, m, n) with p_k = p_m + p_n, all < L
    std::vector<std::array<std::size_t, 3>> sums;
    // (k, m, n) with p_k = p_m * p_n, all < L
    std::vector<std::array<std::size_t, 3>> products;
    // (k, j) with p_k = p_j^* p_j, both < L
    std::vector<std::array<std::size_t, 2>> squares;
};

inline IndexRelations scan_relations(std::size_t L) {
    IndexRelations rel;
    std::vector<NCPolynomial> ps;
    ps.reserve(L);
    for (std::size_t j = 0; j < L; ++j) ps.push_back(enum_poly(j));
    auto in_range = [&](const NCPolynomial& q) -> std::optional<std::size_t> {
        auto idx = try_index_of(q);
        if (idx && *idx < L) return to_u64(*idx);
        return std::nullopt;
    };
    for (std::size_t m = 0; m < L; ++m) {
        if (auto k = in_range(ps[m].star() * ps[m])) rel.squares.push_back({*k, m});
        for (std::size_t n = m; n < L; ++n) {
            if (auto k = in_range(ps[m] + ps[n])) rel.sums.push_back({*k, m, n});
            if (auto k = in_range(ps[m] * ps[n])) rel.products.push_back({*k, m, n});
            if (n != m) {
                if (auto k = in_range(ps[n] * ps[m])) rel.products.push_back({*k, n, m});
            }
        }
    }
    return rel;
}

struct NormCodeViolation {
    std::string kind;
    std::size_t index = 0;
};

/// Checks the C*-identity and triangle inequality relations inside a norm code.
inline std::optional<NormCodeViolation> check_norm_code(const NormCode& nc, double tol,
                                                        const IndexRelations& rel) {
    for (auto [k, j] : rel.squares)
        if (std::abs(nc.delta[k] - nc.delta[j] * nc.delta[j]) > tol)
            return NormCodeViolation{"cstar_identity", k};
    for (auto [k, m, n] : rel.sums)
        if (nc.delta[k] > nc.delta[m] + nc.delta[n] + tol)
            return NormCodeViolation{"triangle", k};
    for (auto [k, m, n] : rel.products)
        if (nc.delta[k] > nc.delta[m] * nc.delta[n] + tol)
            return NormCodeViolation{"submultiplicative", k};
    return std::nullopt;
}

struct StateCheckResult {
    bool accepted = true;
    int condition = 0;       // 1, 2 or 3; 0 when accepted
    std::size_t index = 0;   // first violating index
};

/// Validates a functional sequence against a norm code: boundedness,
/// additivity along detected sum relations, positivity on squares.
inline StateCheckResult check_state(const NormCode& delta, const StateCode& phi, double tol,
                                    const IndexRelations& rel) {
    if (delta.length() != phi.length()) throw LengthMismatch();
    for (std::size_t k = 0; k < phi.length(); ++k)
        if (std::abs(phi.phi[k]) > delta.delta[k] + tol) return {false, 1, k};
    for (auto [k, m, n] : rel.sums)
        if (std::abs(phi.phi[k] - phi.phi[m] - phi.phi[n]) > tol) return {false, 2, k};
    for (auto [k, j] : rel.squares)
        if (phi.phi[k].real() < -tol || std::abs(phi.phi[k].imag()) > tol) return {false, 3, k};
    return {};
}

// ---------------------------------------------------------------------------
// Text codecs
// ---------------------------------------------------------------------------

inline std::string word_str(const Word& w) {
    if (w.empty()) return "1";
    std::string s;
    for (auto l : w) {
        if (!s.empty()) s += ' ';
        s += 'x' + std::to_string(l / 2 + 1) + ((l & 1) ? "*" : "");
    }
    return s;
}

inline std::string poly_str(const NCPolynomial& p) {
    if (p.terms.empty()) return "0";
    std::string s;
    for (const auto& t : p.terms) {
        if (!s.empty()) s += " + ";
        s += ratcx_str(t.coeff) + " * " + word_str(t.word);
    }
    return s;
}

inline NCPolynomial parse_poly(const std::string& text, bool unital = false) {
    NCPolynomial p;
    p.unital = unital;
    if (text == "0") return p;
    std::string s = text;
    std::size_t pos = 0;
    while (pos < s.size()) {
        auto next = s.find(" + ", pos);
        std::string chunk = s.substr(pos, next == std::string::npos ? next : next - pos);
        pos = next == std::string::npos ? s.size() : next + 3;
        auto starp = chunk.find(" * ");
        if (starp == std::string::npos) throw std::invalid_argument("bad term: " + chunk);
        RatCx coeff = parse_ratcx(chunk.substr(0, starp));
        Word w;
        std::istringstream ws(chunk.substr(starp + 3));
        std::string tok;
        while (ws >> tok) {
            if (tok == "1") continue;
            bool star = tok.back() == '*';
            if (star) tok.pop_back();
            if (tok.empty() || tok[0] != 'x') throw std::invalid_argument("bad letter: " + tok);
            std::uint32_t k = static_cast<std::uint32_t>(std::stoul(tok.substr(1)));
            w.push_back(2 * (k - 1) + (star ? 1 : 0));
        }
        p.terms.push_back({coeff, std::move(w)});
    }
    p.canonicalize();
    return p;
}

}  // namespace oalg
