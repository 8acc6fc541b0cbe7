#pragma once

// Subspaces of K^n stored as canonical reduced-row-echelon bases (rows).
// On exact layers the representation is unique, so equality of subspaces is
// equality of the stored matrices.

#include "hodge/matrix.hpp"

#include <stdexcept>

namespace hodge {

template <class K>
class Subspace {
public:
    Subspace() = default;
    explicit Subspace(std::size_t ambient) : ambient_(ambient), basis_(0, ambient) {}

    static Subspace from_rows(Matrix<K> rows, double tol = kFloatTol)
    {
        Subspace s(rows.cols());
        auto piv = rref(rows, tol);
        Matrix<K> b(piv.size(), rows.cols());
        for (std::size_t i = 0; i < piv.size(); ++i) b.set_row(i, rows.row(i));
        s.basis_ = std::move(b);
        return s;
    }

    static Subspace full(std::size_t n) { return from_rows(Matrix<K>::identity(n)); }
    static Subspace zero(std::size_t n) { return Subspace(n); }

    static Subspace span_of(const std::vector<Vec<K>>& vecs, std::size_t ambient,
                            double tol = kFloatTol)
    {
        Matrix<K> m(vecs.size(), ambient);
        for (std::size_t i = 0; i < vecs.size(); ++i) m.set_row(i, vecs[i]);
        return from_rows(std::move(m), tol);
    }

    std::size_t ambient() const { return ambient_; }
    std::size_t dim() const { return basis_.rows(); }
    const Matrix<K>& basis() const { return basis_; }
    Vec<K> basis_vector(std::size_t i) const { return basis_.row(i); }

    bool contains(const Vec<K>& v, double tol = kFloatTol) const
    {
        // Reduce v by the echelon basis and test the residual.
        Vec<K> r = v;
        for (std::size_t i = 0; i < basis_.rows(); ++i) {
            std::size_t p = pivot_col(i);
            K f = r[p];
            if (field<K>::is_zero(f, field<K>::exact ? 0 : tol)) continue;
            for (std::size_t j = 0; j < ambient_; ++j) r[j] -= f * basis_(i, j);
        }
        double scale = 1.0;
        if constexpr (!field<K>::exact) {
            for (const auto& x : v) scale = std::max(scale, field<K>::mag(x));
        }
        return vec_is_zero(r, field<K>::exact ? 0 : tol * scale);
    }

    bool contains(const Subspace& other, double tol = kFloatTol) const
    {
        for (std::size_t i = 0; i < other.dim(); ++i)
            if (!contains(other.basis_vector(i), tol)) return false;
        return true;
    }

    // Coefficients c with v = sum_i c_i basis_i, or nullopt.
    std::optional<Vec<K>> coordinates(const Vec<K>& v, double tol = kFloatTol) const
    {
        return solve(basis_.transposed(), v, tol);
    }

    Subspace sum(const Subspace& other, double tol = kFloatTol) const
    {
        assert(ambient_ == other.ambient_);
        Matrix<K> m(dim() + other.dim(), ambient_);
        for (std::size_t i = 0; i < dim(); ++i) m.set_row(i, basis_.row(i));
        for (std::size_t i = 0; i < other.dim(); ++i) m.set_row(dim() + i, other.basis_.row(i));
        return from_rows(std::move(m), tol);
    }

    Subspace intersect(const Subspace& other, double tol = kFloatTol) const
    {
        assert(ambient_ == other.ambient_);
        if (dim() == 0 || other.dim() == 0) return zero(ambient_);
        // x in both spans iff x = u^T A = v^T B; kernel of [A^T | -B^T].
        Matrix<K> m(ambient_, dim() + other.dim());
        for (std::size_t j = 0; j < dim(); ++j)
            for (std::size_t i = 0; i < ambient_; ++i) m(i, j) = basis_(j, i);
        for (std::size_t j = 0; j < other.dim(); ++j)
            for (std::size_t i = 0; i < ambient_; ++i) m(i, dim() + j) = -other.basis_(j, i);
        Matrix<K> ker = kernel(m, tol);
        Matrix<K> rows(ker.rows(), ambient_);
        for (std::size_t r = 0; r < ker.rows(); ++r) {
            Vec<K> x(ambient_, K(0));
            for (std::size_t j = 0; j < dim(); ++j)
                for (std::size_t i = 0; i < ambient_; ++i) x[i] += ker(r, j) * basis_(j, i);
            rows.set_row(r, x);
        }
        return from_rows(std::move(rows), tol);
    }

    // Complex conjugate of the subspace.  Only meaningful when the basis is
    // exact; on the float layer pivot choices do not commute with
    // conjugation, so this is rejected.
    Subspace conjugated() const
    {
        if constexpr (!field<K>::exact)
            throw validation_error("conjugate of a float-backed subspace is not defined");
        return from_rows(basis_.conjugated());
    }

    // Image of the subspace under the operator M (columns convention).
    Subspace apply(const Matrix<K>& m, double tol = kFloatTol) const
    {
        assert(m.cols() == ambient_);
        return from_rows(basis_ * m.transposed(), tol);
    }

    friend bool operator==(const Subspace& a, const Subspace& b)
    {
        static_assert(field<K>::exact, "subspace equality is exact-layer only");
        return a.ambient_ == b.ambient_ && a.basis_ == b.basis_;
    }
    friend bool operator!=(const Subspace& a, const Subspace& b) { return !(a == b); }

private:
    std::size_t pivot_col(std::size_t i) const
    {
        for (std::size_t j = 0; j < ambient_; ++j)
            if (!field<K>::is_zero(basis_(i, j), kFloatTol / 100)) return j;
        return ambient_;
    }

    std::size_t ambient_ = 0;
    Matrix<K> basis_;
};

enum class SubspaceOp { intersect, sum, conjugate, apply };

// Checked entry point used by callers that dispatch on an operation tag.
template <class K>
Subspace<K> subspace_algebra(SubspaceOp op, const Subspace<K>& a, const Subspace<K>& b)
{
    switch (op) {
    case SubspaceOp::intersect: return a.intersect(b);
    case SubspaceOp::sum: return a.sum(b);
    case SubspaceOp::conjugate: return a.conjugated();
    default: throw std::invalid_argument("apply needs a matrix operand");
    }
}

} // namespace hodge
