#pragma once

// Exact arithmetic primitives shared by all modules: arbitrary-precision
// rationals for weights and identities, small integer vectors for lattice
// sites, and a fraction-free determinant.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace rwde {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// Lattice sites and steps. Coordinates stay far below 2^63 in every
// supported experiment (hard step cap 1e7).
using IVec = std::vector<std::int64_t>;

inline std::int64_t dot(const IVec& a, const IVec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    std::int64_t s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline std::int64_t norm_sq(const IVec& a) { return dot(a, a); }

inline IVec add(const IVec& a, const IVec& b) {
    IVec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline IVec sub(const IVec& a, const IVec& b) {
    IVec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline IVec scale(std::int64_t k, const IVec& a) {
    IVec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = k * a[i];
    return r;
}

inline IVec negate(const IVec& a) { return scale(-1, a); }

inline bool is_zero(const IVec& a) {
    for (auto c : a)
        if (c != 0) return false;
    return true;
}

inline std::string ivec_str(const IVec& a) {
    std::string s = "(";
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(a[i]);
    }
    return s + ")";
}

inline double rat_to_double(const Rat& r) { return r.convert_to<double>(); }

inline std::string rat_str(const Rat& r) {
    const Int num = boost::multiprecision::numerator(r);
    const Int den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

namespace detail {

// Decimal integer parse; cpp_int alone would read a leading 0 as octal.
inline Int parse_decimal_int(std::string s, const std::string& original) {
    bool negative = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
        negative = s[0] == '-';
        s.erase(0, 1);
    }
    const auto first = s.find_first_not_of('0');
    s.erase(0, first == std::string::npos ? s.size() : first);
    if (s.empty()) s = "0";
    if (s.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument("bad rational literal '" + original + "'");
    Int v{s};
    return negative ? Int(-v) : v;
}

}  // namespace detail

// Accepts "3", "-2", "3/2", "0.25", "-1.5e2".
inline Rat parse_rational(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty rational literal");
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
        const Int num = detail::parse_decimal_int(text.substr(0, slash), text);
        const Int den = detail::parse_decimal_int(text.substr(slash + 1), text);
        if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
        return Rat(num, den);
    }
    std::string s = text;
    int exp10 = 0;
    const auto epos = s.find_first_of("eE");
    if (epos != std::string::npos) {
        exp10 = std::stoi(s.substr(epos + 1));
        s = s.substr(0, epos);
    }
    const auto point = s.find('.');
    if (point != std::string::npos) {
        exp10 -= static_cast<int>(s.size() - point - 1);
        s.erase(point, 1);
    }
    Rat r{detail::parse_decimal_int(s, text)};
    Int pow10 = 1;
    for (int i = 0; i < std::abs(exp10); ++i) pow10 *= 10;
    if (exp10 >= 0)
        r *= pow10;
    else
        r /= pow10;
    return r;
}

// Determinant by fraction-free (Bareiss) elimination. Rows are copied; the
// matrix must be square.
inline Int det_bareiss(std::vector<std::vector<Int>> m) {
    const std::size_t n = m.size();
    for (const auto& row : m)
        if (row.size() != n) throw std::invalid_argument("det: matrix not square");
    if (n == 0) return 1;
    Int sign = 1;
    Int prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m[k][k] == 0) {
            std::size_t p = k + 1;
            while (p < n && m[p][k] == 0) ++p;
            if (p == n) return 0;
            std::swap(m[k], m[p]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j)
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
        prev = m[k][k];
    }
    return sign * m[n - 1][n - 1];
}

// |det(cols...)| for integer column vectors.
inline Int abs_det_columns(const std::vector<IVec>& cols) {
    const std::size_t n = cols.size();
    std::vector<std::vector<Int>> m(n, std::vector<Int>(n));
    for (std::size_t j = 0; j < n; ++j) {
        if (cols[j].size() != n) throw std::invalid_argument("det: column dimension mismatch");
        for (std::size_t i = 0; i < n; ++i) m[i][j] = cols[j][i];
    }
    Int d = det_bareiss(std::move(m));
    return d < 0 ? Int(-d) : d;
}

}  // namespace rwde
