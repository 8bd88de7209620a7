#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace oalg {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const Rat& r) { return r.convert_to<double>(); }

inline Rat rat_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

/// Parses "a/b" or "a" with optional sign; exact.
inline Rat parse_rat(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rat(BigInt(s));
    BigInt num(s.substr(0, slash));
    BigInt den(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("rational with zero denominator: " + s);
    return Rat(num, den);
}

inline std::string rat_str(const Rat& r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

/// Complex number with exact rational real/imaginary parts.
struct RatCx {
    Rat re{0};
    Rat im{0};

    RatCx() = default;
    RatCx(Rat r) : re(std::move(r)) {}
    RatCx(Rat r, Rat i) : re(std::move(r)), im(std::move(i)) {}

    bool is_zero() const { return re == 0 && im == 0; }
    RatCx conj() const { return {re, -im}; }

    friend RatCx operator+(const RatCx& a, const RatCx& b) { return {a.re + b.re, a.im + b.im}; }
    friend RatCx operator-(const RatCx& a, const RatCx& b) { return {a.re - b.re, a.im - b.im}; }
    friend RatCx operator-(const RatCx& a) { return {-a.re, -a.im}; }
    friend RatCx operator*(const RatCx& a, const RatCx& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend bool operator==(const RatCx& a, const RatCx& b) { return a.re == b.re && a.im == b.im; }
    friend bool operator!=(const RatCx& a, const RatCx& b) { return !(a == b); }
};

inline std::complex<double> to_complex(const RatCx& z) {
    return {to_double(z.re), to_double(z.im)};
}

/// Text form "re+im i" with rational parts, e.g. "1/2+-3/4i".
inline std::string ratcx_str(const RatCx& z) {
    return rat_str(z.re) + "+" + rat_str(z.im) + "i";
}

inline RatCx parse_ratcx(const std::string& s) {
    auto ipos = s.rfind('i');
    if (ipos == std::string::npos) return RatCx(parse_rat(s));
    // split at the '+' separating re and im (not a leading sign, not inside "/")
    std::string body = s.substr(0, ipos);
    for (std::size_t k = body.size(); k-- > 1;) {
        if (body[k] == '+' && body[k - 1] != '/' && body[k - 1] != '+') {
            return {parse_rat(body.substr(0, k)), parse_rat(body.substr(k + 1))};
        }
    }
    throw std::invalid_argument("bad complex rational: " + s);
}

}  // namespace oalg
