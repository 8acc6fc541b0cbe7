#pragma once

// Small dense matrices over an arbitrary field<K>.  Exact layers get the
// canonical reduced row echelon form (first-nonzero pivoting, deterministic);
// the float layer pivots by magnitude with a tolerance.

#include "hodge/scalar.hpp"

#include <algorithm>
#include <cassert>
#include <optional>
#include <vector>

namespace hodge {

template <class K>
using Vec = std::vector<K>;

template <class K>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows_(r), cols_(c), a_(r * c, K(0)) {}
    Matrix(std::size_t r, std::size_t c, std::vector<K> data)
        : rows_(r), cols_(c), a_(std::move(data))
    { assert(a_.size() == rows_ * cols_); }

    static Matrix identity(std::size_t n)
    {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = K(1);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    K& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const K& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    Vec<K> row(std::size_t i) const
    { return Vec<K>(a_.begin() + i * cols_, a_.begin() + (i + 1) * cols_); }

    void set_row(std::size_t i, const Vec<K>& v)
    { std::copy(v.begin(), v.end(), a_.begin() + i * cols_); }

    Matrix transposed() const
    {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix conjugated() const
    {
        Matrix c = *this;
        for (auto& x : c.a_) x = field<K>::conj(x);
        return c;
    }

    bool is_zero(double tol = 0) const
    {
        for (const auto& x : a_)
            if (!field<K>::is_zero(x, tol)) return false;
        return true;
    }

    friend Matrix operator+(const Matrix& x, const Matrix& y)
    {
        assert(x.rows_ == y.rows_ && x.cols_ == y.cols_);
        Matrix r = x;
        for (std::size_t i = 0; i < r.a_.size(); ++i) r.a_[i] += y.a_[i];
        return r;
    }
    friend Matrix operator-(const Matrix& x, const Matrix& y)
    {
        assert(x.rows_ == y.rows_ && x.cols_ == y.cols_);
        Matrix r = x;
        for (std::size_t i = 0; i < r.a_.size(); ++i) r.a_[i] -= y.a_[i];
        return r;
    }
    friend Matrix operator*(const K& c, const Matrix& m)
    {
        Matrix r = m;
        for (auto& x : r.a_) x = c * x;
        return r;
    }
    friend Matrix operator*(const Matrix& x, const Matrix& y)
    {
        assert(x.cols_ == y.rows_);
        Matrix r(x.rows_, y.cols_);
        for (std::size_t i = 0; i < x.rows_; ++i)
            for (std::size_t k = 0; k < x.cols_; ++k) {
                const K& v = x(i, k);
                if (field<K>::is_zero(v, 0)) continue;
                for (std::size_t j = 0; j < y.cols_; ++j) r(i, j) += v * y(k, j);
            }
        return r;
    }
    friend bool operator==(const Matrix& x, const Matrix& y)
    { return x.rows_ == y.rows_ && x.cols_ == y.cols_ && x.a_ == y.a_; }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<K> a_;
};

template <class K>
Vec<K> matvec(const Matrix<K>& m, const Vec<K>& v)
{
    assert(v.size() == m.cols());
    Vec<K> r(m.rows(), K(0));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (!field<K>::is_zero(m(i, j), 0)) r[i] += m(i, j) * v[j];
    return r;
}

template <class K>
Vec<K> vec_add(Vec<K> a, const Vec<K>& b)
{
    assert(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

template <class K>
Vec<K> vec_sub(Vec<K> a, const Vec<K>& b)
{
    assert(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

template <class K>
Vec<K> vec_scale(const K& c, Vec<K> a)
{
    for (auto& x : a) x = c * x;
    return a;
}

template <class K>
bool vec_is_zero(const Vec<K>& v, double tol = 0)
{
    for (const auto& x : v)
        if (!field<K>::is_zero(x, tol)) return false;
    return true;
}

// u^T Q v (no conjugation).
template <class K>
K bilinear(const Matrix<K>& q, const Vec<K>& u, const Vec<K>& v)
{
    K acc(0);
    for (std::size_t i = 0; i < q.rows(); ++i) {
        if (field<K>::is_zero(u[i], 0)) continue;
        K s(0);
        for (std::size_t j = 0; j < q.cols(); ++j) s += q(i, j) * v[j];
        acc += u[i] * s;
    }
    return acc;
}

// u^T Q conj(v).
template <class K>
K bilinear_conj(const Matrix<K>& q, const Vec<K>& u, const Vec<K>& v)
{
    Vec<K> vc = v;
    for (auto& x : vc) x = field<K>::conj(x);
    return bilinear(q, u, vc);
}

// In-place reduction to the reduced row echelon form.  Returns pivot columns.
// Exact layer: first nonzero pivot (canonical).  Float: magnitude pivoting.
template <class K>
std::vector<std::size_t> rref(Matrix<K>& m, double tol = kFloatTol)
{
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
        std::size_t p = m.rows();
        if constexpr (field<K>::exact) {
            for (std::size_t i = r; i < m.rows(); ++i)
                if (!field<K>::is_zero(m(i, c), 0)) { p = i; break; }
        } else {
            double best = tol;
            for (std::size_t i = r; i < m.rows(); ++i)
                if (field<K>::mag(m(i, c)) > best) { best = field<K>::mag(m(i, c)); p = i; }
        }
        if (p == m.rows()) continue;
        if (p != r)
            for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(r, j));
        K inv = K(1) / m(r, c);
        for (std::size_t j = c; j < m.cols(); ++j) m(r, j) = inv * m(r, j);
        m(r, c) = K(1);
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i == r) continue;
            K f = m(i, c);
            if (field<K>::is_zero(f, field<K>::exact ? 0 : tol / 10)) { m(i, c) = K(0); continue; }
            for (std::size_t j = c; j < m.cols(); ++j) m(i, j) -= f * m(r, j);
            m(i, c) = K(0);
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

template <class K>
std::size_t rank(Matrix<K> m, double tol = kFloatTol)
{
    return rref(m, tol).size();
}

// Basis (as rows) of the right kernel {x : M x = 0}.
template <class K>
Matrix<K> kernel(Matrix<K> m, double tol = kFloatTol)
{
    std::size_t n = m.cols();
    auto piv = rref(m, tol);
    std::vector<bool> is_piv(n, false);
    for (auto c : piv) is_piv[c] = true;
    Matrix<K> ker(n - piv.size(), n);
    std::size_t row = 0;
    for (std::size_t c = 0; c < n; ++c) {
        if (is_piv[c]) continue;
        ker(row, c) = K(1);
        for (std::size_t i = 0; i < piv.size(); ++i) ker(row, piv[i]) = -m(i, c);
        ++row;
    }
    return ker;
}

// One solution of M x = b, if any.
template <class K>
std::optional<Vec<K>> solve(const Matrix<K>& m, const Vec<K>& b, double tol = kFloatTol)
{
    Matrix<K> aug(m.rows(), m.cols() + 1);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) aug(i, j) = m(i, j);
        aug(i, m.cols()) = b[i];
    }
    auto piv = rref(aug, tol);
    if (!piv.empty() && piv.back() == m.cols()) return std::nullopt;  // inconsistent
    Vec<K> x(m.cols(), K(0));
    for (std::size_t i = 0; i < piv.size(); ++i) x[piv[i]] = aug(i, m.cols());
    return x;
}

template <class K>
std::optional<Matrix<K>> inverse(const Matrix<K>& m, double tol = kFloatTol)
{
    assert(m.rows() == m.cols());
    std::size_t n = m.rows();
    Matrix<K> aug(n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
        aug(i, n + i) = K(1);
    }
    auto piv = rref(aug, tol);
    if (piv.size() < n || piv.back() >= n) return std::nullopt;
    Matrix<K> inv(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
    return inv;
}

template <class K>
K det(Matrix<K> m, double tol = kFloatTol)
{
    assert(m.rows() == m.cols());
    std::size_t n = m.rows();
    K d(1);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = n;
        if constexpr (field<K>::exact) {
            for (std::size_t i = c; i < n; ++i)
                if (!field<K>::is_zero(m(i, c), 0)) { p = i; break; }
        } else {
            double best = tol;
            for (std::size_t i = c; i < n; ++i)
                if (field<K>::mag(m(i, c)) > best) { best = field<K>::mag(m(i, c)); p = i; }
        }
        if (p == n) return K(0);
        if (p != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m(p, j), m(c, j));
            d = -d;
        }
        d *= m(c, c);
        K inv = K(1) / m(c, c);
        for (std::size_t i = c + 1; i < n; ++i) {
            K f = inv * m(i, c);
            if (field<K>::is_zero(f, 0)) continue;
            for (std::size_t j = c; j < n; ++j) m(i, j) -= f * m(c, j);
        }
    }
    return d;
}

// Exponential of a nilpotent operator, summed until the power vanishes
// (exact) or up to the ambient dimension (float).
template <class K>
Matrix<K> exp_nilpotent(const Matrix<K>& n, double tol = 0)
{
    std::size_t dim = n.rows();
    Matrix<K> acc = Matrix<K>::identity(dim), pw = Matrix<K>::identity(dim);
    K fact(1);
    for (std::size_t k = 1; k <= dim; ++k) {
        pw = pw * n;
        if (pw.is_zero(tol)) break;
        fact = fact * K(long(k));
        acc = acc + (K(1) / fact) * pw;
    }
    return acc;
}

template <class K>
Matrix<Complex> to_complex_matrix(const Matrix<K>& m)
{
    Matrix<Complex> r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = to_complex(m(i, j));
    return r;
}

inline Matrix<Complex> to_complex_matrix(const Matrix<Rational>& m)
{
    Matrix<Complex> r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = Complex(to_double(m(i, j)), 0.0);
    return r;
}

inline Matrix<GQ> to_gq_matrix(const Matrix<Rational>& m)
{
    Matrix<GQ> r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = GQ(m(i, j));
    return r;
}

template <class K>
Vec<Complex> to_complex_vec(const Vec<K>& v)
{
    Vec<Complex> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = to_complex(v[i]);
    return r;
}

inline Vec<Complex> to_complex_vec(const Vec<Rational>& v)
{
    Vec<Complex> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = Complex(to_double(v[i]), 0.0);
    return r;
}

inline Vec<GQ> to_gq_vec(const Vec<Rational>& v)
{
    Vec<GQ> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = GQ(v[i]);
    return r;
}

inline double vec_norm(const Vec<Complex>& v)
{
    double s = 0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s);
}

// Frobenius norm, used for float-layer operator estimates.
inline double frobenius(const Matrix<Complex>& m)
{
    double s = 0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) s += std::norm(m(i, j));
    return std::sqrt(s);
}

} // namespace hodge
