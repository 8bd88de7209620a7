#pragma once

#include "oalg/rational.hpp"

#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace oalg {

// Cantor pairing pi(x,y) = (x+y)(x+y+1)/2 + y; pi(0,0)=0, pi(1,0)=1.
inline BigInt pair2(const BigInt& x, const BigInt& y) {
    BigInt s = x + y;
    return s * (s + 1) / 2 + y;
}

inline std::pair<BigInt, BigInt> unpair2(const BigInt& z) {
    // s = floor((sqrt(8z+1)-1)/2)
    BigInt s = boost::multiprecision::sqrt(BigInt(8 * z + 1));
    s = (s - 1) / 2;
    while (s * (s + 1) / 2 > z) --s;
    while ((s + 1) * (s + 2) / 2 <= z) ++s;
    BigInt y = z - s * (s + 1) / 2;
    return {s - y, y};
}

/// Encodes a fixed-arity tuple by right-nested pairing.
inline BigInt pack_tuple(const std::vector<BigInt>& xs) {
    if (xs.empty()) return 0;
    BigInt acc = xs.back();
    for (std::size_t i = xs.size() - 1; i-- > 0;) acc = pair2(xs[i], acc);
    return acc;
}

inline std::vector<BigInt> unpack_tuple(BigInt code, std::size_t arity) {
    std::vector<BigInt> out(arity);
    for (std::size_t i = 0; i + 1 < arity; ++i) {
        auto [a, rest] = unpair2(code);
        out[i] = a;
        code = rest;
    }
    if (arity > 0) out[arity - 1] = code;
    return out;
}

// Calkin-Wilf bijection between positive integers and positive rationals.
// Node 1 is 1/1; node 2n is a/(a+b), node 2n+1 is (a+b)/b.
inline Rat calkin_wilf(const BigInt& n) {
    std::vector<bool> bits;
    for (BigInt m = n; m > 1; m /= 2) bits.push_back((m & 1) != 0);
    BigInt a = 1, b = 1;
    for (auto it = bits.rbegin(); it != bits.rend(); ++it) {
        if (*it) a += b;   // right child
        else b += a;       // left child
    }
    return Rat(a, b);
}

inline BigInt calkin_wilf_index(const Rat& q) {
    BigInt a = numerator(q), b = denominator(q);
    std::vector<bool> bits;
    while (!(a == 1 && b == 1)) {
        if (a > b) {
            BigInt k = (a - 1) / b;  // k consecutive right steps
            for (BigInt i = 0; i < k; ++i) bits.push_back(true);
            a -= k * b;
        } else {
            BigInt k = (b - 1) / a;
            for (BigInt i = 0; i < k; ++i) bits.push_back(false);
            b -= k * a;
        }
    }
    BigInt n = 1;
    for (auto it = bits.rbegin(); it != bits.rend(); ++it) n = 2 * n + (*it ? 1 : 0);
    return n;
}

/// Bijection between naturals and rationals: 0 -> 0, 2k+1 -> +cw(k+1), 2k+2 -> -cw(k+1).
inline Rat rat_of_code(const BigInt& c) {
    if (c == 0) return 0;
    BigInt k = (c - 1) / 2;
    Rat q = calkin_wilf(k + 1);
    return (c & 1) != 0 ? q : Rat(-q);
}

inline BigInt code_of_rat(const Rat& q) {
    if (q == 0) return 0;
    BigInt n = calkin_wilf_index(rat_abs(q));
    return q > 0 ? 2 * (n - 1) + 1 : 2 * (n - 1) + 2;
}

/// Bijection between naturals and nonzero complex rationals; code 0 is 1.
inline RatCx coeff_of_code(const BigInt& c) {
    auto [x, y] = unpair2(c + 1);
    return {rat_of_code(x), rat_of_code(y)};
}

inline BigInt code_of_coeff(const RatCx& z) {
    return pair2(code_of_rat(z.re), code_of_rat(z.im)) - 1;
}

/// Graded enumeration of rationals in [0,1]: 0, 1, 1/2, 1/3, 2/3, 1/4, 3/4, ...
/// (by denominator, then numerator, reduced fractions only). Total, with repeats
/// impossible; used for the unit-interval constant dictionary.
inline Rat unit_rational(std::size_t idx) {
    if (idx == 0) return 0;
    if (idx == 1) return 1;
    std::size_t seen = 2;
    for (std::uint64_t den = 2;; ++den) {
        for (std::uint64_t num = 1; num < den; ++num) {
            if (std::gcd(num, den) != 1) continue;
            if (seen == idx) return Rat(num, den);
            ++seen;
        }
    }
}

/// Graded enumeration of all rationals used for test-function values:
/// 1, 0, -1, 2, -2, 1/2, -1/2, 3, -3, 1/3, -1/3, ...
/// (weight |num|+den ascending; within a weight, numerator descending;
/// code 0 is 1 so the first test function is the constant 1).
inline Rat value_rational(std::size_t idx) {
    if (idx == 0) return 1;
    if (idx == 1) return 0;
    if (idx == 2) return -1;
    std::size_t seen = 3;
    for (std::uint64_t w = 3;; ++w) {
        for (std::uint64_t num = w - 1; num >= 1; --num) {
            std::uint64_t den = w - num;
            if (std::gcd(num, den) != 1) continue;
            if (seen == idx) return Rat(num, den);
            ++seen;
            if (seen == idx) return Rat(-Rat(num, den));
            ++seen;
        }
    }
}

inline std::uint64_t to_u64(const BigInt& b) { return b.convert_to<std::uint64_t>(); }

}  // namespace oalg
