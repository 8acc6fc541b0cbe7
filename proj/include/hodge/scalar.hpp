#pragma once

// Scalar layers: exact rationals, Gaussian rationals Q(i), and complex
// doubles.  Every algorithm in the library is templated over one of these
// through the field<> traits; conversions from exact to float exist, the
// reverse direction deliberately does not.

#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hodge {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using Complex = std::complex<double>;

inline Int num(const Rational& x) { return boost::multiprecision::numerator(x); }
inline Int den(const Rational& x) { return boost::multiprecision::denominator(x); }

inline double to_double(const Rational& x) { return x.convert_to<double>(); }

// "p/q" (or "p") with optional sign, used by instance files and reports.
inline std::string rational_str(const Rational& x)
{
    std::string s = num(x).str();
    if (den(x) != 1) s += "/" + den(x).str();
    return s;
}

inline Rational parse_rational(const std::string& s)
{
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(Int(s));
        Int p(s.substr(0, slash)), q(s.substr(slash + 1));
        if (q == 0) throw std::invalid_argument("zero denominator");
        return Rational(p, q);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a rational: '" + s + "'");
    }
}

struct GaussianRational {
    Rational re, im;

    GaussianRational() = default;
    GaussianRational(Rational r) : re(std::move(r)) {}
    GaussianRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
    GaussianRational(int n) : re(n) {}

    bool is_zero() const { return re == 0 && im == 0; }
    bool is_real() const { return im == 0; }

    GaussianRational conj() const { return {re, -im}; }
    Rational norm() const { return re * re + im * im; }  // |z|^2

    GaussianRational operator-() const { return {-re, -im}; }
    GaussianRational& operator+=(const GaussianRational& o) { re += o.re; im += o.im; return *this; }
    GaussianRational& operator-=(const GaussianRational& o) { re -= o.re; im -= o.im; return *this; }

    friend GaussianRational operator+(const GaussianRational& a, const GaussianRational& b)
    { return {a.re + b.re, a.im + b.im}; }
    friend GaussianRational operator-(const GaussianRational& a, const GaussianRational& b)
    { return {a.re - b.re, a.im - b.im}; }
    friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b)
    { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
    friend GaussianRational operator/(const GaussianRational& a, const GaussianRational& b)
    {
        Rational n = b.norm();
        if (n == 0) throw std::domain_error("division by zero in Q(i)");
        GaussianRational c = a * b.conj();
        return {c.re / n, c.im / n};
    }
    GaussianRational& operator*=(const GaussianRational& o) { return *this = *this * o; }
    GaussianRational& operator/=(const GaussianRational& o) { return *this = *this / o; }

    friend bool operator==(const GaussianRational& a, const GaussianRational& b)
    { return a.re == b.re && a.im == b.im; }
    friend bool operator!=(const GaussianRational& a, const GaussianRational& b) { return !(a == b); }
};

using GQ = GaussianRational;

inline GQ gq_i() { return GQ(Rational(0), Rational(1)); }
inline Complex to_complex(const GQ& z) { return {to_double(z.re), to_double(z.im)}; }
inline Complex to_complex(const Complex& z) { return z; }

// ---- field traits ---------------------------------------------------------

template <class K> struct field;

// Ring layer only: matrices over Int use +,*,==, never elimination.
template <> struct field<Int> {
    static constexpr bool exact = true;
    static Int conj(const Int& x) { return x; }
    static bool is_zero(const Int& x, double = 0) { return x == 0; }
    static double mag(const Int& x) { return std::abs(x.convert_to<double>()); }
    static Int from_int(long n) { return Int(n); }
};

template <> struct field<Rational> {
    static constexpr bool exact = true;
    static Rational conj(const Rational& x) { return x; }
    static bool is_zero(const Rational& x, double = 0) { return x == 0; }
    static double mag(const Rational& x) { return std::abs(to_double(x)); }
    static Rational from_int(long n) { return Rational(n); }
};

template <> struct field<GQ> {
    static constexpr bool exact = true;
    static GQ conj(const GQ& x) { return x.conj(); }
    static bool is_zero(const GQ& x, double = 0) { return x.is_zero(); }
    static double mag(const GQ& x) { return std::sqrt(to_double(x.norm())); }
    static GQ from_int(long n) { return GQ(Rational(n)); }
};

template <> struct field<Complex> {
    static constexpr bool exact = false;
    static Complex conj(const Complex& x) { return std::conj(x); }
    static bool is_zero(const Complex& x, double tol) { return std::abs(x) <= tol; }
    static double mag(const Complex& x) { return std::abs(x); }
    static Complex from_int(long n) { return Complex(double(n), 0.0); }
};

// Default pivot tolerance for float-layer elimination.
inline constexpr double kFloatTol = 1e-10;

struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace hodge
