#pragma once

// Integer lattices in Z^n: canonical Hermite bases, Smith normal form,
// integer kernels (always saturated), saturation certificates, and
// completion of a saturated basis to a determinant-one matrix.

#include "hodge/matrix.hpp"
#include "hodge/subspace.hpp"

#include <tuple>

namespace hodge {

using IMat = Matrix<Int>;

inline Int ifloor_div(const Int& a, const Int& b)
{
    Int q = a / b, r = a % b;
    if (r != 0 && ((r < 0) != (b < 0))) --q;
    return q;
}

// Canonical row-style Hermite normal form: rows span the same lattice,
// pivots positive, entries above each pivot reduced into [0, pivot).
// Zero rows are dropped.
inline IMat hnf_rows(IMat m)
{
    const std::size_t rows = m.rows(), cols = m.cols();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        for (;;) {
            std::size_t p = rows;
            Int best = 0;
            for (std::size_t i = r; i < rows; ++i) {
                Int v = m(i, c) < 0 ? Int(-m(i, c)) : m(i, c);
                if (v != 0 && (p == rows || v < best)) { p = i; best = v; }
            }
            if (p == rows) break;
            if (p != r)
                for (std::size_t j = 0; j < cols; ++j) std::swap(m(p, j), m(r, j));
            bool clean = true;
            for (std::size_t i = r + 1; i < rows; ++i) {
                if (m(i, c) == 0) continue;
                Int q = ifloor_div(m(i, c), m(r, c));
                for (std::size_t j = 0; j < cols; ++j) m(i, j) -= q * m(r, j);
                if (m(i, c) != 0) clean = false;
            }
            if (clean) break;
        }
        if (m(r, c) == 0) continue;
        if (m(r, c) < 0)
            for (std::size_t j = 0; j < cols; ++j) m(r, j) = -m(r, j);
        for (std::size_t i = 0; i < r; ++i) {
            Int q = ifloor_div(m(i, c), m(r, c));
            if (q == 0) continue;
            for (std::size_t j = 0; j < cols; ++j) m(i, j) -= q * m(r, j);
        }
        ++r;
    }
    IMat out(r, cols);
    for (std::size_t i = 0; i < r; ++i) out.set_row(i, m.row(i));
    return out;
}

// Smith normal form: returns (d, u, v) with u*m*v diagonal = diag(d),
// u, v unimodular, and d_1 | d_2 | ... all nonnegative.
struct SmithForm {
    std::vector<Int> diag;
    IMat u, v;
};

inline SmithForm smith_form(IMat m)
{
    const std::size_t rows = m.rows(), cols = m.cols();
    IMat u = IMat::identity(rows), v = IMat::identity(cols);
    auto row_sub = [&](std::size_t i, std::size_t k, const Int& q) {
        for (std::size_t j = 0; j < cols; ++j) m(i, j) -= q * m(k, j);
        for (std::size_t j = 0; j < rows; ++j) u(i, j) -= q * u(k, j);
    };
    auto col_sub = [&](std::size_t j, std::size_t k, const Int& q) {
        for (std::size_t i = 0; i < rows; ++i) m(i, j) -= q * m(i, k);
        for (std::size_t i = 0; i < cols; ++i) v(i, j) -= q * v(i, k);
    };
    auto row_swap = [&](std::size_t i, std::size_t k) {
        for (std::size_t j = 0; j < cols; ++j) std::swap(m(i, j), m(k, j));
        for (std::size_t j = 0; j < rows; ++j) std::swap(u(i, j), u(k, j));
    };
    auto col_swap = [&](std::size_t j, std::size_t k) {
        for (std::size_t i = 0; i < rows; ++i) std::swap(m(i, j), m(i, k));
        for (std::size_t i = 0; i < cols; ++i) std::swap(v(i, j), v(i, k));
    };

    std::size_t t = 0;
    while (t < rows && t < cols) {
        std::size_t pi = rows, pj = cols;
        Int best = 0;
        for (std::size_t i = t; i < rows; ++i)
            for (std::size_t j = t; j < cols; ++j) {
                Int a = m(i, j) < 0 ? Int(-m(i, j)) : m(i, j);
                if (a != 0 && (pi == rows || a < best)) { pi = i; pj = j; best = a; }
            }
        if (pi == rows) break;
        if (pi != t) row_swap(pi, t);
        if (pj != t) col_swap(pj, t);
        bool dirty = false;
        for (std::size_t i = t + 1; i < rows; ++i)
            if (m(i, t) != 0) { row_sub(i, t, ifloor_div(m(i, t), m(t, t))); dirty |= m(i, t) != 0; }
        for (std::size_t j = t + 1; j < cols; ++j)
            if (m(t, j) != 0) { col_sub(j, t, ifloor_div(m(t, j), m(t, t))); dirty |= m(t, j) != 0; }
        if (dirty) continue;
        // Enforce divisibility d_t | m(i,j).
        bool fixed = true;
        for (std::size_t i = t + 1; i < rows && fixed; ++i)
            for (std::size_t j = t + 1; j < cols && fixed; ++j)
                if (m(i, j) % m(t, t) != 0) {
                    row_sub(t, i, Int(-1));  // add row i into row t, then restart
                    fixed = false;
                }
        if (!fixed) continue;
        if (m(t, t) < 0) {
            for (std::size_t j = 0; j < cols; ++j) m(t, j) = -m(t, j);
            for (std::size_t j = 0; j < rows; ++j) u(t, j) = -u(t, j);
        }
        ++t;
    }
    SmithForm s;
    s.diag.resize(t);
    for (std::size_t i = 0; i < t; ++i) s.diag[i] = m(i, i);
    s.u = std::move(u);
    s.v = std::move(v);
    return s;
}

inline Int det_int(const IMat& m)
{
    Matrix<Rational> q(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) q(i, j) = Rational(m(i, j));
    Rational d = det(q);
    return num(d) / den(d);
}

inline std::optional<IMat> inverse_unimodular(const IMat& m)
{
    Matrix<Rational> q(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) q(i, j) = Rational(m(i, j));
    auto inv = inverse(q);
    if (!inv) return std::nullopt;
    IMat r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (den((*inv)(i, j)) != 1) return std::nullopt;
            r(i, j) = num((*inv)(i, j));
        }
    return r;
}

// A finitely generated subgroup of Z^n, stored by its canonical Hermite
// basis (rows are generators, first nonzero entry of each generator
// positive).  Construction does not saturate.
class IntLattice {
public:
    IntLattice() = default;
    explicit IntLattice(std::size_t ambient) : ambient_(ambient), basis_(0, ambient) {}

    static IntLattice from_rows(IMat rows)
    {
        IntLattice l(rows.cols());
        l.basis_ = hnf_rows(std::move(rows));
        return l;
    }

    static IntLattice full(std::size_t n) { return from_rows(IMat::identity(n)); }

    std::size_t ambient() const { return ambient_; }
    std::size_t rank() const { return basis_.rows(); }
    const IMat& basis() const { return basis_; }
    Vec<Int> generator(std::size_t i) const { return basis_.row(i); }

    bool contains(const Vec<Int>& v) const
    {
        Vec<Int> r = v;
        for (std::size_t i = 0; i < basis_.rows(); ++i) {
            std::size_t p = 0;
            while (p < ambient_ && basis_(i, p) == 0) ++p;
            if (p == ambient_ || r[p] % basis_(i, p) != 0) continue;
            Int q = r[p] / basis_(i, p);
            for (std::size_t j = 0; j < ambient_; ++j) r[j] -= q * basis_(i, j);
        }
        for (const auto& x : r)
            if (x != 0) return false;
        return true;
    }

    // Saturation witness: an integral vector in (L tensor Q) \ L, if any.
    std::optional<Vec<Int>> saturation_witness() const
    {
        if (rank() == 0) return std::nullopt;
        SmithForm s = smith_form(basis_.transposed());  // basis as columns
        auto uinv = inverse_unimodular(s.u);
        for (std::size_t i = 0; i < s.diag.size(); ++i) {
            if (s.diag[i] == 1) continue;
            Vec<Int> w(ambient_);
            for (std::size_t j = 0; j < ambient_; ++j) w[j] = (*uinv)(j, i);
            return w;
        }
        return std::nullopt;
    }

    bool saturated() const { return !saturation_witness().has_value(); }

    IntLattice saturate() const
    {
        if (rank() == 0) return *this;
        // Saturation = Z^n intersect span_Q(basis) = integer kernel of any
        // matrix whose kernel is that span.
        Matrix<Rational> rows(basis_.rows(), ambient_);
        for (std::size_t i = 0; i < basis_.rows(); ++i)
            for (std::size_t j = 0; j < ambient_; ++j) rows(i, j) = Rational(basis_(i, j));
        Matrix<Rational> ann = kernel(rows);  // rows annihilating the span
        IMat c(ann.rows(), ambient_);
        for (std::size_t i = 0; i < ann.rows(); ++i) {
            Int lcm = 1;
            for (std::size_t j = 0; j < ambient_; ++j)
                lcm = boost::multiprecision::lcm(lcm, den(ann(i, j)));
            for (std::size_t j = 0; j < ambient_; ++j) {
                Rational v = Rational(lcm) * ann(i, j);
                c(i, j) = num(v);
            }
        }
        return kernel_of(c);
    }

    // Integer kernel {a : M a = 0}; saturated by construction.
    static IntLattice kernel_of(const IMat& m)
    {
        const std::size_t nr = m.rows(), n = m.cols();
        IMat aug(n, nr + n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < nr; ++j) aug(i, j) = m(j, i);
            aug(i, nr + i) = 1;
        }
        IMat h = hnf_rows(std::move(aug));
        std::vector<Vec<Int>> ker;
        for (std::size_t i = 0; i < h.rows(); ++i) {
            bool zero = true;
            for (std::size_t j = 0; j < nr; ++j)
                if (h(i, j) != 0) { zero = false; break; }
            if (!zero) continue;
            Vec<Int> v(n);
            for (std::size_t j = 0; j < n; ++j) v[j] = h(i, nr + j);
            ker.push_back(std::move(v));
        }
        IMat rows(ker.size(), n);
        for (std::size_t i = 0; i < ker.size(); ++i) rows.set_row(i, ker[i]);
        return from_rows(std::move(rows));
    }

    friend bool operator==(const IntLattice& a, const IntLattice& b)
    { return a.ambient_ == b.ambient_ && a.basis_ == b.basis_; }

private:
    std::size_t ambient_ = 0;
    IMat basis_;
};

// Integer kernel of a rational matrix (denominators cleared row by row).
inline IntLattice kernel_lattice(const Matrix<Rational>& m)
{
    IMat c(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Int lcm = 1;
        for (std::size_t j = 0; j < m.cols(); ++j)
            lcm = boost::multiprecision::lcm(lcm, den(m(i, j)));
        for (std::size_t j = 0; j < m.cols(); ++j) {
            Rational v = Rational(lcm) * m(i, j);
            c(i, j) = num(v);
        }
    }
    return IntLattice::kernel_of(c);
}

// Integral points of a rational subspace (a saturated lattice of the same
// rank).
inline IntLattice integral_points(const Subspace<Rational>& s)
{
    if (s.dim() == 0) return IntLattice(s.ambient());
    Matrix<Rational> ann = kernel(s.basis());
    if (ann.rows() == 0) return IntLattice::full(s.ambient());
    return kernel_lattice(ann);
}

struct saturation_error : validation_error {
    Vec<Int> witness;
    explicit saturation_error(Vec<Int> w)
        : validation_error("lattice is not saturated"), witness(std::move(w)) {}
};

// For a saturated lattice L of rank k in Z^n, a matrix A in SL_n(Z) whose
// last k columns form a basis of L (the canonical Hermite basis).  L = Z^n
// and L = 0 both yield the identity.
inline IMat unimodular_completion(const IntLattice& l)
{
    if (auto w = l.saturation_witness()) throw saturation_error(*w);
    const std::size_t n = l.ambient(), k = l.rank();
    if (k == 0 || k == n) return IMat::identity(n);

    IMat g = l.basis().transposed();  // n x k, columns generate L
    SmithForm s = smith_form(g);
    IMat uinv = *inverse_unimodular(s.u);

    IMat a(n, n);
    for (std::size_t j = 0; j < n - k; ++j)
        for (std::size_t i = 0; i < n; ++i) a(i, j) = uinv(i, k + j);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < n; ++i) a(i, n - k + j) = g(i, j);
    if (det_int(a) < 0)
        for (std::size_t i = 0; i < n; ++i) a(i, 0) = -a(i, 0);
    return a;
}

} // namespace hodge
