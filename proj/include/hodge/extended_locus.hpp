#pragma once

// Boundary structure of the locus of integral classes with bounded
// self-pairing: stabilizer lattices of a class under the monodromy cone, the
// explicit equation system cutting out the closure of the class locus over a
// boundary point, and enumeration of the integral classes that can survive
// to that boundary point.
//
// The equation system lives in the translated-class chart
//   z  |->  ( s, v )  with  s_j = e^{2 pi i (z_j - w_j)}  and
//   v = (e^{-sum (z_j - w_j) N_j} - id) h,
// after recentering the limit filtration by e^{sum w_j N_j}.  The pairing
// coordinates of the class against the twisted frame are recovered from
// (s, v) by a fiberwise linear isomorphism, so the closure is computed here.

#include "hodge/binomials.hpp"
#include "hodge/orbits.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <set>

namespace hodge {

// S(h) = {a, integral : sum_j a_j N_j h = 0}, the saturated integer kernel
// of a |-> sum a_j N_j h.  The quotient of the full integer lattice by S(h)
// embeds into the ambient space, hence is free.
inline IntLattice stabilizer_lattice(const std::vector<Matrix<Rational>>& ops,
                                     const Vec<Rational>& h)
{
    if (ops.empty()) throw validation_error("at least one monodromy operator is required");
    const std::size_t dim = h.size();
    for (const auto& op : ops)
        if (op.rows() != dim || op.cols() != dim)
            throw validation_error("operator and vector dimensions do not match");
    Matrix<Rational> m(dim, ops.size());
    for (std::size_t j = 0; j < ops.size(); ++j) {
        Vec<Rational> c = matvec(ops[j], h);
        for (std::size_t i = 0; i < dim; ++i) m(i, j) = c[i];
    }
    return kernel_lattice(m);
}

// The filtration e^{sum w_j N_j} F, exact for exact w.
inline HodgeFiltration<GQ> recentered_filtration(const PeriodNormalForm& p, const Vec<GQ>& w)
{
    if (w.size() != p.vars())
        throw validation_error("recentering vector has the wrong arity");
    Matrix<GQ> zn(p.rank(), p.rank());
    for (std::size_t j = 0; j < w.size(); ++j)
        zn = zn + w[j] * detail::lift_rational<GQ>(p.ops[j]);
    return orbit_filtration<GQ>(p, exp_nilpotent(zn));
}

// Deligne splitting of the pair (weight filtration of the cone, recentered
// limit filtration).
inline MixedHodgeData limit_splitting(const PeriodNormalForm& p, const Vec<GQ>& w)
{
    std::vector<Rational> ones(p.vars(), Rational(1));
    WeightFiltration wf = weight_filtration(p.ops, ones);
    DeligneResult dr = deligne_splitting(wf, recentered_filtration(p, w));
    if (!dr.ok)
        throw validation_error("limit filtration pair is invalid: " + dr.diagnostic);
    return *dr.mhs;
}

// Equations for the closure of the image of z |-> (s, v) over the boundary.
// The change of basis a is unimodular: its last n-r columns span the
// stabilizer of h, and the operators N'_k = sum_j a(j,k) N_j built from the
// first r columns have linearly independent images N'_k h.  The functionals
// phi_j vanish on every bigraded piece except I^{-1,-1} and satisfy
// phi_j(N'_k h) = delta_{jk}.
//
// The system consists of
//   (closure-1)  P_{-p,-p} v = (1/p!) (sum_k phi_k(v) N'_k)^p h, 1 <= p <= pmax,
//                plus vanishing of v outside the diagonal pieces, and
//   (closure-2)  f(sigma) = 0 for each emitted binomial f of the toric ideal
//                of the monomial map with exponent rows a(j, r..n-1), where
//                sigma_j = s_j prod_{k<r} e^{2 pi i a(j,k) phi_k(v)}.
struct ClosureSystem {
    Vec<Int> h;
    Vec<GQ> w;                             // recentering, applied exactly
    IMat a;                                // unimodular; last n-r columns span the stabilizer
    std::size_t r = 0;                     // rank of the integer lattice modulo the stabilizer
    std::vector<Matrix<Rational>> nprime;  // N'_k = sum_j a(j,k) N_j
    Matrix<GQ> phi;                        // r x rank, row j = phi_j on the ambient space
    int pmax = 0;                          // deepest p with I^{-p,-p} != 0
    MixedHodgeData limit;                  // splitting of the recentered limit pair
    BinomialSystem toric;                  // binomials in the twisted disk coordinates
    bool torus_exact = false;  // degree cap truncated the completion pass: the system is
                               // certified on the torus only, a superset off it

    std::size_t vars() const { return a.rows(); }
    std::size_t rank() const { return limit.rank; }
};

inline ClosureSystem closure_equation_system(const PeriodNormalForm& p, const Vec<Int>& h,
                                             const Vec<GQ>& w, int degree_cap = 8)
{
    const std::size_t n = p.vars(), dim = p.rank();
    if (h.size() != dim) throw validation_error("class vector has the wrong dimension");

    ClosureSystem sys;
    sys.h = h;
    sys.w = w;
    sys.limit = limit_splitting(p, w);

    Vec<Rational> hq(dim);
    for (std::size_t i = 0; i < dim; ++i) hq[i] = Rational(h[i]);

    // Hypothesis: each N_j h lands in I^{-1,-1} of the recentered splitting.
    Subspace<GQ> i11 = sys.limit.piece(-1, -1);
    for (std::size_t j = 0; j < n; ++j) {
        Vec<GQ> njh = to_gq_vec(matvec(p.ops[j], hq));
        if (!i11.contains(njh))
            throw validation_error("the hypothesis fails at variable " + std::to_string(j + 1) +
                                   ": N h is not of type (-1,-1) in the limit splitting");
    }

    // Deeper words must stay on the diagonal; otherwise the diagonal
    // equations below would not cut the image.
    {
        Matrix<Rational> hrow(1, dim);
        for (std::size_t i = 0; i < dim; ++i) hrow(0, i) = hq[i];
        Subspace<Rational> u = Subspace<Rational>::from_rows(hrow);
        for (int depth = 1;; ++depth) {
            Subspace<Rational> next = Subspace<Rational>::zero(dim);
            for (std::size_t j = 0; j < n; ++j) {
                Matrix<Rational> img(u.dim(), dim);
                for (std::size_t i = 0; i < u.dim(); ++i)
                    img.set_row(i, matvec(p.ops[j], u.basis_vector(i)));
                next = next.sum(Subspace<Rational>::from_rows(img));
            }
            if (next.dim() == 0) break;
            Subspace<GQ> target = sys.limit.piece(-depth, -depth);
            for (std::size_t i = 0; i < next.dim(); ++i)
                if (!target.contains(to_gq_vec(next.basis_vector(i))))
                    throw validation_error(
                        "monodromy words of depth " + std::to_string(depth) +
                        " leave the diagonal of the limit splitting");
            u = next;
        }
    }

    for (const auto& pc : sys.limit.pieces)
        if (pc.p == pc.q && pc.p <= -1) sys.pmax = std::max(sys.pmax, -pc.p);

    IntLattice stab = stabilizer_lattice(p.ops, hq);
    sys.a = unimodular_completion(stab);
    sys.r = n - stab.rank();

    sys.nprime.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        Matrix<Rational> nk(dim, dim);
        for (std::size_t j = 0; j < n; ++j) nk = nk + Rational(sys.a(j, k)) * p.ops[j];
        sys.nprime.push_back(std::move(nk));
    }

    Matrix<Rational> images(sys.r, dim);
    for (std::size_t k = 0; k < sys.r; ++k) images.set_row(k, matvec(sys.nprime[k], hq));
    if (Subspace<Rational>::from_rows(images).dim() != sys.r)
        throw validation_error("stabilizer completion failed to produce independent images");
    for (std::size_t k = sys.r; k < n; ++k)
        if (!vec_is_zero(matvec(sys.nprime[k], hq)))
            throw validation_error("stabilizer completion failed to annihilate the class");

    // Dual functionals: swap the I^{-1,-1} columns of the splitting basis
    // for N'_1 h .. N'_r h followed by a completion inside the piece; the
    // matching rows of the inverse are the phi_j.
    if (sys.r > 0) {
        std::vector<std::size_t> slots;
        for (std::size_t c = 0; c < dim; ++c)
            if (sys.limit.col_pq[c] == std::make_pair(-1, -1)) slots.push_back(c);
        Matrix<GQ> cols(i11.dim(), dim);
        for (std::size_t k = 0; k < sys.r; ++k) cols.set_row(k, to_gq_vec(images.row(k)));
        Subspace<GQ> got = Subspace<GQ>::from_rows(to_gq_matrix(images));
        std::size_t filled = sys.r;
        for (std::size_t i = 0; i < i11.dim() && filled < i11.dim(); ++i) {
            Vec<GQ> cand = i11.basis_vector(i);
            if (got.contains(cand)) continue;
            cols.set_row(filled++, cand);
            Matrix<GQ> acc(filled, dim);
            for (std::size_t t = 0; t < filled; ++t) acc.set_row(t, cols.row(t));
            got = Subspace<GQ>::from_rows(acc);
        }
        if (filled != i11.dim())
            throw validation_error("failed to complete a basis of the (-1,-1) piece");
        Matrix<GQ> c = sys.limit.basis;
        for (std::size_t t = 0; t < slots.size(); ++t)
            for (std::size_t i = 0; i < dim; ++i) c(i, slots[t]) = cols(t, i);
        auto cinv = inverse(c);
        if (!cinv) throw validation_error("splitting basis replacement is singular");
        sys.phi = Matrix<GQ>(sys.r, dim);
        for (std::size_t j = 0; j < sys.r; ++j) sys.phi.set_row(j, cinv->row(slots[j]));
    } else {
        sys.phi = Matrix<GQ>(0, dim);
    }

    IMat expo(n, n - sys.r);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n - sys.r; ++k) expo(j, k) = sys.a(j, sys.r + k);
    sys.toric = lattice_ideal_binomials(expo, degree_cap);
    sys.torus_exact = sys.toric.capped;
    return sys;
}

// A point of the translated-class chart: recentered disk coordinates and
// the translated class.
struct ClosurePoint {
    Vec<Complex> s;
    Vec<Complex> v;
};

inline ClosurePoint closure_image_point(const ClosureSystem& sys, const PeriodNormalForm& p,
                                        const Vec<Complex>& z)
{
    const std::size_t n = sys.vars(), dim = sys.rank();
    if (z.size() != n)
        throw validation_error("point dimension does not match the number of variables");
    ClosurePoint pt;
    pt.s.resize(n);
    Matrix<Complex> zn(dim, dim);
    for (std::size_t j = 0; j < n; ++j) {
        Complex u = z[j] - to_complex(sys.w[j]);
        pt.s[j] = std::exp(Complex(0, 2 * std::numbers::pi) * u);
        zn = zn + (-u) * detail::lift_rational<Complex>(p.ops[j]);
    }
    Matrix<Complex> carrier = exp_nilpotent(zn);
    pt.v.assign(dim, Complex(0));
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t k = 0; k < dim; ++k)
            pt.v[i] += carrier(i, k) * Complex(to_double(Rational(sys.h[k])), 0);
        pt.v[i] -= Complex(to_double(Rational(sys.h[i])), 0);
    }
    return pt;
}

struct ClosureResiduals {
    double diagonal = 0;      // closure-1 family
    double off_diagonal = 0;  // components of v outside the diagonal pieces
    double binomial = 0;      // closure-2 family in the twisted coordinates

    double max() const { return std::max(diagonal, std::max(off_diagonal, binomial)); }
};

inline ClosureResiduals closure_residuals(const ClosureSystem& sys, const ClosurePoint& pt)
{
    const std::size_t n = sys.vars(), dim = sys.rank();
    if (pt.s.size() != n || pt.v.size() != dim)
        throw validation_error("point dimensions do not match the system");
    ClosureResiduals res;

    Vec<Complex> c(sys.r, Complex(0));
    for (std::size_t j = 0; j < sys.r; ++j)
        for (std::size_t i = 0; i < dim; ++i) c[j] += to_complex(sys.phi(j, i)) * pt.v[i];

    Matrix<Complex> m(dim, dim);
    for (std::size_t k = 0; k < sys.r; ++k)
        m = m + c[k] * detail::lift_rational<Complex>(sys.nprime[k]);

    Vec<Complex> hands(dim);
    for (std::size_t i = 0; i < dim; ++i) hands[i] = Complex(to_double(Rational(sys.h[i])), 0);
    Vec<Complex> diag_sum(dim, Complex(0));
    Vec<Complex> term = hands;
    for (int p = 1; p <= sys.pmax; ++p) {
        term = matvec(m, term);
        for (auto& x : term) x /= double(p);
        Matrix<Complex> proj = detail::lift_exact<Complex>(sys.limit.projector(-p, -p));
        Vec<Complex> vp = matvec(proj, pt.v);
        for (std::size_t i = 0; i < dim; ++i) {
            res.diagonal = std::max(res.diagonal, std::abs(vp[i] - term[i]));
            diag_sum[i] += vp[i];
        }
    }
    for (std::size_t i = 0; i < dim; ++i)
        res.off_diagonal = std::max(res.off_diagonal, std::abs(pt.v[i] - diag_sum[i]));

    Vec<Complex> twisted(n);
    for (std::size_t j = 0; j < n; ++j) {
        Complex t = pt.s[j];
        for (std::size_t k = 0; k < sys.r; ++k)
            t *= std::exp(Complex(0, 2 * std::numbers::pi) * double(sys.a(j, k).convert_to<long>()) *
                          c[k]);
        twisted[j] = t;
    }
    for (const auto& u : sys.toric.binomials)
        res.binomial = std::max(res.binomial, std::abs(eval_binomial(u, twisted)));
    return res;
}

// Every emitted binomial vanishes identically on the monomial map; this is
// the algebraic half of the certificate and is exact.
inline bool closure_binomials_exact(const ClosureSystem& sys)
{
    for (const auto& u : sys.toric.binomials)
        if (!binomial_vanishes_on_map(sys.toric.exponents, u)) return false;
    return true;
}

struct ClosureCertificate {
    std::size_t points = 0;
    double max_residual = 0;
    bool ok = false;
};

// Samples image points over the recentering point and evaluates every
// equation of the system on them.
inline ClosureCertificate closure_certificate(const ClosureSystem& sys,
                                              const PeriodNormalForm& p, std::size_t count = 200,
                                              unsigned long seed = 0, double tol = 1e-8)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(-2.0, 2.0), uy(1.0, 6.0);
    ClosureCertificate cert;
    cert.points = count;
    for (std::size_t t = 0; t < count; ++t) {
        Vec<Complex> z(sys.vars());
        for (auto& zj : z) zj = ux(rng) + Complex(0, 1) * uy(rng);
        for (std::size_t j = 0; j < z.size(); ++j) z[j] += to_complex(sys.w[j]);
        ClosureResiduals res = closure_residuals(sys, closure_image_point(sys, p, z));
        cert.max_residual = std::max(cert.max_residual, res.max());
    }
    cert.ok = closure_binomials_exact(sys) && cert.max_residual <= tol;
    return cert;
}

namespace detail {

// One stratum of the graded limit metric: representatives of a graded basis
// of gr_level, the positive definite Gram matrix in those coordinates, and a
// basis of the next lower weight space for peeling.
struct GradedMetricLevel {
    int level = 0;
    Matrix<Rational> lift_cols;  // dim x r, representatives of the graded basis
    Matrix<Rational> gram;       // r x r positive definite
    Matrix<Rational> lower_cols; // dim x dim W_{level-1}
};

// Even strata carry the Hodge metric of the polarized graded quotient,
// negative levels transported along the matching power of the cone element
// (an isometry by convention); odd strata fall back to the coordinate
// metric of their canonical integral graded basis.
inline std::vector<GradedMetricLevel> graded_metric_levels(const PeriodNormalForm& p,
                                                           const Vec<GQ>& w,
                                                           const WeightFiltration& wf)
{
    const std::size_t dim = p.rank();
    PeriodNormalForm p0{p.lat, recentered_filtration(p, w), p.ops, {}};
    std::set<std::size_t> all;
    for (std::size_t j = 0; j < p.vars(); ++j) all.insert(j);
    Matrix<Rational> ncone(dim, dim);
    for (const auto& op : p.ops) ncone = ncone + op;

    std::vector<GradedMetricLevel> out;
    for (int l = 0; l >= wf.lo; --l) {
        const Subspace<Rational>& upper = wf.at(l);
        const Subspace<Rational>& lower = wf.at(l - 1);
        const std::size_t grk = upper.dim() - lower.dim();
        if (grk == 0) continue;
        GradedMetricLevel lev;
        lev.level = l;
        lev.lower_cols = Matrix<Rational>(dim, lower.dim());
        for (std::size_t i = 0; i < lower.dim(); ++i) {
            Vec<Rational> v = lower.basis_vector(i);
            for (std::size_t r = 0; r < dim; ++r) lev.lower_cols(r, i) = v[r];
        }
        if (l % 2 == 0) {
            QuotientVariation qv = quotient_variation(p0, all, -l);
            auto val = validate_polarized_hs(qv.form.lat, qv.form.f);
            if (!val.ok)
                throw validation_error("graded piece at level " + std::to_string(l) +
                                       " is not polarized: " + val.diagnostic);
            lev.gram = hodge_gram(*val.hs);
            Matrix<Rational> npow = Matrix<Rational>::identity(dim);
            for (int t = 0; t < -l; ++t) npow = npow * ncone;
            lev.lift_cols = Matrix<Rational>(dim, grk);
            for (std::size_t t = 0; t < grk; ++t) {
                Vec<Rational> col = matvec(npow, qv.lift.row(t));
                for (std::size_t r = 0; r < dim; ++r) lev.lift_cols(r, t) = col[r];
            }
        } else {
            IntLattice ll = integral_points(upper);
            IntLattice llow = integral_points(lower);
            Matrix<Rational> span_rows(ll.rank(), dim);
            for (std::size_t i = 0; i < ll.rank(); ++i)
                for (std::size_t j = 0; j < dim; ++j) span_rows(i, j) = Rational(ll.basis()(i, j));
            IMat coords(llow.rank(), ll.rank());
            for (std::size_t i = 0; i < llow.rank(); ++i) {
                Vec<Rational> gen(dim);
                for (std::size_t j = 0; j < dim; ++j) gen[j] = Rational(llow.basis()(i, j));
                auto sol = solve(span_rows.transposed(), gen);
                if (!sol) throw validation_error("weight filtration lattices are inconsistent");
                for (std::size_t j = 0; j < ll.rank(); ++j) {
                    if (den((*sol)[j]) != 1)
                        throw validation_error("weight filtration lattices are inconsistent");
                    coords(i, j) = num((*sol)[j]);
                }
            }
            IMat a = unimodular_completion(IntLattice::from_rows(coords));
            lev.gram = Matrix<Rational>::identity(grk);
            lev.lift_cols = Matrix<Rational>(dim, grk);
            for (std::size_t t = 0; t < grk; ++t)
                for (std::size_t j = 0; j < dim; ++j) {
                    Rational acc(0);
                    for (std::size_t s = 0; s < ll.rank(); ++s)
                        acc += Rational(a(s, t)) * Rational(ll.basis()(s, j));
                    lev.lift_cols(j, t) = acc;
                }
        }
        out.push_back(std::move(lev));
    }
    return out;
}

// Gram matrix of the graded limit metric on the given vectors of W_0.
inline Matrix<Rational> graded_gram(const std::vector<GradedMetricLevel>& levels,
                                    const Matrix<Rational>& vectors)
{
    const std::size_t count = vectors.rows(), dim = vectors.cols();
    std::vector<std::vector<Vec<Rational>>> coords(count);
    for (std::size_t i = 0; i < count; ++i) {
        Vec<Rational> x = vectors.row(i);
        for (const auto& lev : levels) {
            const std::size_t grk = lev.lift_cols.cols();
            Matrix<Rational> cols(dim, grk + lev.lower_cols.cols());
            for (std::size_t r = 0; r < dim; ++r) {
                for (std::size_t c = 0; c < grk; ++c) cols(r, c) = lev.lift_cols(r, c);
                for (std::size_t c = 0; c < lev.lower_cols.cols(); ++c)
                    cols(r, grk + c) = lev.lower_cols(r, c);
            }
            auto sol = solve(cols, x);
            if (!sol) throw validation_error("graded peel failed on a weight-zero vector");
            Vec<Rational> c(grk);
            for (std::size_t t = 0; t < grk; ++t) c[t] = (*sol)[t];
            for (std::size_t r = 0; r < dim; ++r)
                for (std::size_t t = 0; t < grk; ++t) x[r] -= lev.lift_cols(r, t) * c[t];
            coords[i].push_back(std::move(c));
        }
        if (!vec_is_zero(x))
            throw validation_error("graded peel failed on a weight-zero vector");
    }
    Matrix<Rational> g(count, count);
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < count; ++j) {
            Rational acc(0);
            for (std::size_t l = 0; l < levels.size(); ++l)
                acc += bilinear(levels[l].gram, coords[i][l], coords[j][l]);
            g(i, j) = acc;
        }
    return g;
}

} // namespace detail

struct LimitCandidate {
    Vec<Int> h;
    Vec<Int> a;  // strictly positive, sum_j a_j N_j h = 0
};

// Integral classes that can survive to the boundary point under the
// recentered limit filtration: h of weight <= 0 with |Q(h,h)| <= K, each
// N_k h of weight <= -2 and inside F^{-1} of the recentered filtration,
// the pairing vector against the F^1 basis bounded by R, and a strictly
// positive integer relation sum a_j N_j h = 0.
//
// The search domain is the ball ||h||^2 <= K + 4 R^2 in the graded limit
// metric, restricted to the integral points of W_0.  Fiber metrics on the
// ray above the point degenerate as the class acquires lower weight, so the
// ball is taken in the metric of the associated graded instead: even strata
// carry the Hodge metric of their polarized quotient, odd strata the
// coordinate metric of a canonical integral basis.  The radius is the fiber
// inequality bound relating the norm, the self-pairing and the functional
// norm.  Acceptance of each point is exact.
inline std::vector<LimitCandidate> limit_hodge_candidates(const PeriodNormalForm& p,
                                                          const Rational& K, const Vec<GQ>& w,
                                                          const Rational& R, long a_max = 20)
{
    if (K < 0 || R < 0) throw validation_error("bounds must be nonnegative");
    if (a_max < 1) throw validation_error("the relation box must contain positive vectors");
    const std::size_t n = p.vars(), dim = p.rank();
    MixedHodgeData limit = limit_splitting(p, w);

    IntLattice l0 = integral_points(limit.w.at(0));
    std::vector<LimitCandidate> out;
    if (l0.rank() == 0) {
        out.push_back({Vec<Int>(dim, Int(0)), Vec<Int>(n, Int(1))});
        return out;
    }

    auto levels = detail::graded_metric_levels(p, w, limit.w);
    Matrix<Rational> b(l0.rank(), dim);
    for (std::size_t i = 0; i < l0.rank(); ++i)
        for (std::size_t j = 0; j < dim; ++j) b(i, j) = Rational(l0.basis()(i, j));
    Matrix<Rational> s = detail::graded_gram(levels, b);

    Subspace<GQ> f1 = limit.f.at(1);
    Subspace<GQ> fm1 = limit.f.at(-1);
    Matrix<GQ> qg = to_gq_matrix(p.lat.q);
    Rational r2 = R * R;

    for (const auto& cvec : ball_lattice_points(s, K + 4 * R * R)) {
        Vec<Int> h(dim, Int(0));
        for (std::size_t i = 0; i < l0.rank(); ++i)
            for (std::size_t j = 0; j < dim; ++j) h[j] += cvec[i] * l0.basis()(i, j);
        Vec<Rational> hq(dim);
        for (std::size_t j = 0; j < dim; ++j) hq[j] = Rational(h[j]);

        Rational qv = bilinear(p.lat.q, hq, hq);
        if (qv < 0) qv = -qv;
        if (qv > K) continue;

        bool img_ok = true;
        for (std::size_t k = 0; k < n && img_ok; ++k) {
            Vec<Rational> nkh = matvec(p.ops[k], hq);
            if (!limit.w.at(-2).contains(nkh) || !fm1.contains(to_gq_vec(nkh))) img_ok = false;
        }
        if (!img_ok) continue;

        Vec<GQ> hg = to_gq_vec(hq);
        Rational eps2(0);
        for (std::size_t i = 0; i < f1.dim(); ++i) {
            GQ e = bilinear(qg, hg, f1.basis_vector(i));
            eps2 += e.re * e.re + e.im * e.im;
        }
        if (eps2 > r2) continue;

        IntLattice stab = stabilizer_lattice(p.ops, hq);
        std::optional<Vec<Int>> rel;
        if (stab.rank() == n) {
            rel = Vec<Int>(n, Int(1));
        } else if (stab.rank() > 0) {
            Vec<Int> a(n, Int(1));
            for (;;) {
                if (stab.contains(a)) {
                    rel = a;
                    break;
                }
                std::size_t j = n;
                while (j > 0 && a[j - 1] == a_max) a[--j] = Int(1);
                if (j == 0) break;
                a[j - 1] += 1;
            }
        }
        if (!rel) continue;  // empty positive orthant: not a candidate
        out.push_back({std::move(h), std::move(*rel)});
    }

    std::sort(out.begin(), out.end(),
              [](const LimitCandidate& x, const LimitCandidate& y) { return x.h < y.h; });
    return out;
}

} // namespace hodge
