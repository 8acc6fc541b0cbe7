#pragma once

// Weight-zero polarized Hodge structures: bilinear relations, the
// decomposition H^{p,-p} = F^p cap conj(F^{-p}), Hodge norms, the pairing
// functional against F^1, and enumeration of integral classes with bounded
// self-pairing and bounded functional norm.

#include "hodge/lattice.hpp"
#include "hodge/matrix.hpp"
#include "hodge/subspace.hpp"

#include <cmath>
#include <map>
#include <string>

namespace hodge {

struct PolarizedLattice {
    std::size_t rank = 0;
    Matrix<Rational> q;
    bool integral = true;  // Q declared to take integer values on the lattice

    // Empty string when well formed.
    std::string validate() const
    {
        if (rank == 0) return "rank must be positive";
        if (q.rows() != rank || q.cols() != rank) return "Q has wrong dimensions";
        for (std::size_t i = 0; i < rank; ++i)
            for (std::size_t j = i; j < rank; ++j) {
                if (q(i, j) != q(j, i)) return "Q is not symmetric";
                if (integral && (den(q(i, j)) != 1 || den(q(j, i)) != 1))
                    return "Q declared integral but has a non-integer entry";
            }
        if (det(q) == 0) return "Q is degenerate";
        return {};
    }
};

// Decreasing filtration; pieces are stored for p in [lo, hi], everything
// below lo is the full space and everything above hi is zero.
template <class K>
struct HodgeFiltration {
    int lo = 0, hi = -1;
    std::vector<Subspace<K>> pieces;
    std::size_t ambient = 0;

    static HodgeFiltration from_pieces(int lo, std::vector<Subspace<K>> ps, std::size_t ambient)
    {
        HodgeFiltration f;
        f.lo = lo;
        f.hi = lo + int(ps.size()) - 1;
        f.pieces = std::move(ps);
        f.ambient = ambient;
        return f;
    }

    Subspace<K> at(int p) const
    {
        if (p < lo) return Subspace<K>::full(ambient);
        if (p > hi) return Subspace<K>::zero(ambient);
        return pieces[std::size_t(p - lo)];
    }
};

template <class K>
struct PureHodgeStructure {
    PolarizedLattice lattice;
    HodgeFiltration<K> filt;
    Matrix<K> q;                                         // polarization over K
    std::vector<std::pair<int, Subspace<K>>> components; // nonzero H^{p,-p}, p descending
    Matrix<K> comp_basis;                                // columns: component bases in order
    Matrix<K> comp_basis_inv;
    std::vector<int> col_level;

    std::size_t rank() const { return lattice.rank; }

    Subspace<K> component(int p) const
    {
        for (const auto& [lvl, s] : components)
            if (lvl == p) return s;
        return Subspace<K>::zero(rank());
    }

    // v as a sum of components; keys are the levels p with v^{p,-p} != 0.
    std::map<int, Vec<K>> decompose(const Vec<K>& v) const
    {
        Vec<K> c = matvec(comp_basis_inv, v);
        std::map<int, Vec<K>> out;
        for (std::size_t j = 0; j < c.size(); ++j) {
            if (field<K>::is_zero(c[j], kFloatTol)) continue;
            auto& comp = out.try_emplace(col_level[j], Vec<K>(rank(), K(0))).first->second;
            for (std::size_t i = 0; i < rank(); ++i) comp[i] += c[j] * comp_basis(i, j);
        }
        return out;
    }
};

namespace detail {

// Conjugate span, built from the conjugated generator matrix.  Usable on
// both layers (unlike the public canonical-form conjugation, which is
// exact-only).
template <class K>
Subspace<K> conj_span(const Subspace<K>& s)
{
    return Subspace<K>::from_rows(s.basis().conjugated());
}

// Positive definiteness of the Hermitian form (u, w) -> sign * Q(u, conj w)
// on the span of the rows of `basis`.  Returns a witness vector v != 0 with
// form(v, v) <= 0 if the form is not positive definite.
template <class K>
std::optional<Vec<K>> not_positive_definite_witness(const Matrix<K>& q, const Matrix<K>& basis,
                                                    int sign, double tol = kFloatTol)
{
    const std::size_t k = basis.rows(), n = basis.cols();
    Matrix<K> t = basis;  // rows are progressively Q-orthogonalized
    auto herm = [&](std::size_t i, std::size_t j) {
        K v = bilinear_conj(q, t.row(i), t.row(j));
        return sign < 0 ? -v : v;
    };
    for (std::size_t step = 0; step < k; ++step) {
        K pivot = herm(step, step);
        bool pos;
        if constexpr (field<K>::exact) {
            if constexpr (std::is_same_v<K, GQ>) pos = pivot.im == 0 && pivot.re > 0;
            else pos = pivot > 0;
        } else {
            pos = to_complex(pivot).real() > tol;
        }
        if (!pos) return t.row(step);
        for (std::size_t i = step + 1; i < k; ++i) {
            K f = herm(i, step) / pivot;
            if (field<K>::is_zero(f, 0)) continue;
            for (std::size_t j = 0; j < n; ++j) t(i, j) -= f * t(step, j);
        }
    }
    return std::nullopt;
}

inline Matrix<GQ> lift_q(const Matrix<Rational>& q, const Subspace<GQ>&) { return to_gq_matrix(q); }
inline Matrix<Complex> lift_q(const Matrix<Rational>& q, const Subspace<Complex>&)
{ return to_complex_matrix(q); }

} // namespace detail

template <class K>
struct HodgeValidation {
    bool ok = false;
    std::string diagnostic;
    std::optional<std::pair<int, int>> relation;  // failed bilinear relation (p, q)
    std::optional<std::pair<int, Vec<K>>> witness;  // positivity witness at level p
    std::map<int, std::size_t> hodge_numbers;
    std::optional<PureHodgeStructure<K>> hs;
};

// Checks, in order: shape of Q, filtration inclusions, the first bilinear
// relation Q(F^p, F^q) = 0 for p+q > 0, the direct sum decomposition, the
// conjugation symmetry of the components, and positivity of
// (-1)^p Q(v, conj v) on each H^{p,-p}.
template <class K>
HodgeValidation<K> validate_polarized_hs(const PolarizedLattice& lat,
                                         const HodgeFiltration<K>& filt,
                                         double tol = kFloatTol)
{
    HodgeValidation<K> out;
    if (auto msg = lat.validate(); !msg.empty()) {
        out.diagnostic = msg;
        return out;
    }
    if (filt.ambient != lat.rank) {
        out.diagnostic = "filtration ambient dimension does not match the lattice rank";
        return out;
    }
    for (const auto& s : filt.pieces)
        if (s.ambient() != lat.rank) {
            out.diagnostic = "filtration piece has wrong ambient dimension";
            return out;
        }

    Matrix<K> q = detail::lift_q(lat.q, Subspace<K>());

    for (int p = filt.lo - 1; p <= filt.hi; ++p)
        if (!filt.at(p).contains(filt.at(p + 1), tol)) {
            out.diagnostic = "filtration is not decreasing at level " + std::to_string(p + 1);
            return out;
        }

    for (int p = filt.lo - 1; p <= filt.hi; ++p)
        for (int r = std::max(filt.lo - 1, 1 - p); r <= filt.hi; ++r) {
            Subspace<K> fp = filt.at(p), fr = filt.at(r);
            for (std::size_t i = 0; i < fp.dim(); ++i)
                for (std::size_t j = 0; j < fr.dim(); ++j) {
                    K v = bilinear(q, fp.basis_vector(i), fr.basis_vector(j));
                    if (!field<K>::is_zero(v, tol)) {
                        out.diagnostic = "first bilinear relation fails";
                        out.relation = std::make_pair(p, r);
                        return out;
                    }
                }
        }

    const int pmax = std::max({filt.hi, -filt.lo, 0});
    PureHodgeStructure<K> hs;
    hs.lattice = lat;
    hs.filt = filt;
    hs.q = q;
    std::size_t total = 0;
    for (int p = pmax; p >= -pmax; --p) {
        Subspace<K> comp = filt.at(p).intersect(detail::conj_span(filt.at(-p)), tol);
        if (comp.dim() == 0) continue;
        total += comp.dim();
        out.hodge_numbers[p] = comp.dim();
        hs.components.emplace_back(p, std::move(comp));
    }
    if (total != lat.rank) {
        out.diagnostic = "components do not span: total dimension "
                       + std::to_string(total) + " of " + std::to_string(lat.rank);
        return out;
    }

    hs.comp_basis = Matrix<K>(lat.rank, lat.rank);
    std::size_t col = 0;
    for (const auto& [p, s] : hs.components)
        for (std::size_t i = 0; i < s.dim(); ++i, ++col) {
            hs.col_level.push_back(p);
            for (std::size_t r = 0; r < lat.rank; ++r) hs.comp_basis(r, col) = s.basis()(i, r);
        }
    auto inv = inverse(hs.comp_basis, tol);
    if (!inv) {
        out.diagnostic = "components are not in direct sum";
        return out;
    }
    hs.comp_basis_inv = std::move(*inv);

    for (const auto& [p, s] : hs.components) {
        if constexpr (field<K>::exact) {
            if (!(detail::conj_span(s) == hs.component(-p))) {
                out.diagnostic = "conjugation does not map level " + std::to_string(p)
                               + " onto level " + std::to_string(-p);
                return out;
            }
        } else {
            if (s.dim() != hs.component(-p).dim()) {
                out.diagnostic = "conjugate component dimensions differ at level " + std::to_string(p);
                return out;
            }
        }
    }

    for (const auto& [p, s] : hs.components) {
        int sign = (p % 2 == 0) ? +1 : -1;
        if (auto w = detail::not_positive_definite_witness(q, s.basis(), sign, tol)) {
            out.diagnostic = "positivity fails on a component";
            out.witness = std::make_pair(p, *w);
            return out;
        }
    }

    out.ok = true;
    out.hs = std::move(hs);
    return out;
}

inline Rational real_part_exact(const GQ& z)
{
    if (z.im != 0) throw std::logic_error("expected a real value");
    return z.re;
}

// Sum of components and the Hodge norm square
// sum_p (-1)^p Q(h^{p,-p}, conj h^{p,-p}).
template <class K>
std::pair<std::map<int, Vec<K>>, K> hodge_decompose_and_norm(const PureHodgeStructure<K>& hs,
                                                             const Vec<K>& h)
{
    auto comps = hs.decompose(h);
    K norm2(0);
    for (const auto& [p, vp] : comps) {
        K term = bilinear_conj(hs.q, vp, vp);
        norm2 += (p % 2 == 0) ? term : -term;
    }
    return {std::move(comps), std::move(norm2)};
}

template <class K>
K hodge_norm2(const PureHodgeStructure<K>& hs, const Vec<K>& h)
{
    return hodge_decompose_and_norm(hs, h).second;
}

// Component of h in the sum of the strictly negative levels.  Pairing
// against F^1 kills exactly this part, which is why its Hodge norm is the
// natural size of the functional below.
template <class K>
Vec<K> negative_part(const PureHodgeStructure<K>& hs, const Vec<K>& h)
{
    Vec<K> acc(hs.rank(), K(0));
    for (const auto& [p, vp] : hs.decompose(h))
        if (p <= -1) acc = vec_add(acc, vp);
    return acc;
}

template <class K>
K epsilon_norm2(const PureHodgeStructure<K>& hs, const Vec<K>& h)
{
    return hodge_norm2(hs, negative_part(hs, h));
}

// The functional Q(h, -) restricted to F^1, as coefficients against the
// stored basis of F^1.
template <class K>
Vec<K> epsilon_functional(const PureHodgeStructure<K>& hs, const Vec<K>& h)
{
    Subspace<K> f1 = hs.filt.at(1);
    Vec<K> coeffs(f1.dim(), K(0));
    for (std::size_t i = 0; i < f1.dim(); ++i)
        coeffs[i] = bilinear(hs.q, h, f1.basis_vector(i));
    return coeffs;
}

// Gram matrix of the Hodge inner product on the rational lattice basis;
// real, symmetric, positive definite.
inline Matrix<Rational> hodge_gram(const PureHodgeStructure<GQ>& hs)
{
    const std::size_t n = hs.rank();
    std::vector<std::map<int, Vec<GQ>>> cols(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec<GQ> e(n, GQ(0));
        e[i] = GQ(1);
        cols[i] = hs.decompose(e);
    }
    Matrix<Rational> g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            GQ acc(0);
            for (const auto& [p, vp] : cols[i]) {
                auto it = cols[j].find(p);
                if (it == cols[j].end()) continue;
                GQ term = bilinear_conj(hs.q, vp, it->second);
                acc += (p % 2 == 0) ? term : -term;
            }
            g(i, j) = real_part_exact(acc);
        }
    return g;
}

// Integer points x with x^T S x <= c2, for S rational positive definite.
// Float Cholesky with a small slack prunes the search; callers apply their
// own exact acceptance filters.
inline std::vector<Vec<Int>> ball_lattice_points(const Matrix<Rational>& s, const Rational& c2)
{
    const std::size_t n = s.rows();
    Matrix<Complex> sf = to_complex_matrix(s);
    // Upper-triangular Cholesky factor R with S = R^T R.
    Matrix<Complex> r(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double d = sf(i, i).real();
        for (std::size_t k = 0; k < i; ++k) d -= r(k, i).real() * r(k, i).real();
        if (d <= 0) throw validation_error("Hodge metric Gram matrix is numerically indefinite");
        double rii = std::sqrt(d);
        r(i, i) = rii;
        for (std::size_t j = i + 1; j < n; ++j) {
            double v = sf(i, j).real();
            for (std::size_t k = 0; k < i; ++k) v -= r(k, i).real() * r(k, j).real();
            r(i, j) = v / rii;
        }
    }
    const double budget = to_double(c2) * (1 + 1e-9) + 1e-6;
    std::vector<Vec<Int>> out;
    std::vector<long> x(n, 0);
    auto walk = [&](auto&& self, std::size_t lvl, double rem) -> void {
        std::size_t i = lvl - 1;
        double off = 0;
        for (std::size_t j = i + 1; j < n; ++j) off += r(i, j).real() * x[j];
        double rii = r(i, i).real();
        double half = std::sqrt(std::max(rem, 0.0));
        long lo = long(std::ceil((-half - off) / rii - 1e-12));
        long hi = long(std::floor((half - off) / rii + 1e-12));
        for (long v = lo; v <= hi; ++v) {
            double term = rii * v + off;
            term *= term;
            if (term > rem + 1e-9) continue;
            x[i] = v;
            if (i == 0) {
                Vec<Int> pt(n);
                for (std::size_t k = 0; k < n; ++k) pt[k] = Int(x[k]);
                out.push_back(std::move(pt));
            } else {
                self(self, i, rem - term);
            }
        }
        x[i] = 0;
    };
    if (n == 0) return {Vec<Int>{}};
    walk(walk, n, budget);
    std::sort(out.begin(), out.end());
    return out;
}

// All integral classes h with |Q(h,h)| <= K and ||eps(h)||^2 <= R^2.  The
// search ball ||h||^2 <= K + 4 R^2 comes from the fiber bound; acceptance is
// exact.
inline std::vector<Vec<Int>> enumerate_bounded_classes(const PureHodgeStructure<GQ>& hs,
                                                       const Rational& K, const Rational& R)
{
    if (K < 0 || R < 0) throw validation_error("bounds must be nonnegative");
    Matrix<Rational> s = hodge_gram(hs);
    Rational c2 = K + 4 * R * R;
    Rational r2 = R * R;
    std::vector<Vec<Int>> out;
    for (auto& x : ball_lattice_points(s, c2)) {
        Vec<Rational> xq(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) xq[i] = Rational(x[i]);
        Rational qv = bilinear(hs.lattice.q, xq, xq);
        if (qv < 0) qv = -qv;
        if (qv > K) continue;
        Vec<GQ> xg = to_gq_vec(xq);
        if (real_part_exact(epsilon_norm2(hs, xg)) > r2) continue;
        out.push_back(std::move(x));
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace hodge
