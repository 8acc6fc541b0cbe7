#pragma once

// Period mappings in normal form e^{sum z_j N_j} e^{Gamma(s)} F, their
// canonical-extension sections (including the pole family N_k v / s_k), the
// epsilon-tilde coordinate record, truncation to nilpotent orbits, and
// quotient variations on the graded pieces of a marked weight filtration.

#include "hodge/filtrations.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <set>

namespace hodge {

struct GammaTerm {
    std::vector<int> exponent;  // one entry per variable, all >= 0
    Matrix<GQ> coeff;
};

struct PeriodNormalForm {
    PolarizedLattice lat;
    HodgeFiltration<GQ> f;               // limit filtration
    std::vector<Matrix<Rational>> ops;   // commuting nilpotent monodromy logarithms
    std::vector<GammaTerm> gamma;        // polynomial twist, Gamma(0) = 0

    std::size_t rank() const { return lat.rank; }
    std::size_t vars() const { return ops.size(); }
};

namespace detail {

// Matrix-valued polynomials in the disk coordinates, keyed by multi-exponent.
using PolyMat = std::map<std::vector<int>, Matrix<GQ>>;

inline PolyMat gamma_poly(const PeriodNormalForm& p)
{
    PolyMat g;
    for (const auto& t : p.gamma) {
        if (t.coeff.is_zero()) continue;
        auto it = g.find(t.exponent);
        if (it == g.end()) g.emplace(t.exponent, t.coeff);
        else it->second = it->second + t.coeff;
    }
    for (auto it = g.begin(); it != g.end();)
        it = it->second.is_zero() ? g.erase(it) : std::next(it);
    return g;
}

inline PolyMat poly_mul(const PolyMat& a, const PolyMat& b)
{
    PolyMat out;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) {
            std::vector<int> e(ea.size());
            for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
            Matrix<GQ> prod = ca * cb;
            if (prod.is_zero()) continue;
            auto it = out.find(e);
            if (it == out.end()) out.emplace(std::move(e), std::move(prod));
            else it->second = it->second + prod;
        }
    for (auto it = out.begin(); it != out.end();)
        it = it->second.is_zero() ? out.erase(it) : std::next(it);
    return out;
}

inline PolyMat poly_exp(const PolyMat& g, std::size_t n, std::size_t vars)
{
    PolyMat out, term;
    std::vector<int> zero(vars, 0);
    out.emplace(zero, Matrix<GQ>::identity(n));
    term = out;
    Rational fact(1);
    for (std::size_t k = 1; k <= n + 1; ++k) {
        term = poly_mul(term, g);
        if (term.empty()) return out;
        if (k == n + 1) throw validation_error("Gamma is not nilpotent");
        fact *= Rational(long(k));
        GQ inv(Rational(1) / fact);
        for (const auto& [e, c] : term) {
            Matrix<GQ> scaled = inv * c;
            auto it = out.find(e);
            if (it == out.end()) out.emplace(e, std::move(scaled));
            else it->second = it->second + scaled;
        }
    }
    return out;
}

template <class K>
Matrix<K> lift_rational(const Matrix<Rational>& m)
{
    if constexpr (std::is_same_v<K, GQ>) return to_gq_matrix(m);
    else return to_complex_matrix(m);
}

template <class K>
Matrix<K> lift_exact(const Matrix<GQ>& m)
{
    if constexpr (std::is_same_v<K, GQ>) return m;
    else return to_complex_matrix(m);
}

template <class K>
K monomial_value(const std::vector<int>& e, const Vec<K>& s)
{
    K v = field<K>::from_int(1);
    for (std::size_t j = 0; j < e.size(); ++j)
        for (int i = 0; i < e[j]; ++i) v = v * s[j];
    return v;
}

} // namespace detail

template <class K>
Matrix<K> gamma_value(const PeriodNormalForm& p, const Vec<K>& s)
{
    Matrix<K> g(p.rank(), p.rank());
    for (const auto& t : p.gamma)
        g = g + detail::monomial_value(t.exponent, s) * detail::lift_exact<K>(t.coeff);
    return g;
}

// e^{sum z_j N_j} e^{Gamma(s)}.  Callers pass matching (z, s); the float
// entry points derive s = e^{2 pi i z}.
template <class K>
Matrix<K> period_factor(const PeriodNormalForm& p, const Vec<K>& z, const Vec<K>& s)
{
    Matrix<K> zn(p.rank(), p.rank());
    for (std::size_t j = 0; j < p.vars(); ++j)
        zn = zn + z[j] * detail::lift_rational<K>(p.ops[j]);
    return exp_nilpotent(zn) * exp_nilpotent(gamma_value(p, s));
}

template <class K>
HodgeFiltration<K> orbit_filtration(const PeriodNormalForm& p, const Matrix<K>& carrier)
{
    std::vector<Subspace<K>> pieces;
    for (int lvl = p.f.lo; lvl <= p.f.hi; ++lvl) {
        Matrix<GQ> basis = p.f.at(lvl).basis();
        if constexpr (std::is_same_v<K, GQ>) {
            pieces.push_back(Subspace<GQ>::from_rows(basis * carrier.transposed()));
        } else {
            pieces.push_back(
                Subspace<Complex>::from_rows(to_complex_matrix(basis) * carrier.transposed()));
        }
    }
    return HodgeFiltration<K>::from_pieces(p.f.lo, std::move(pieces), p.rank());
}

struct OrbitPoint {
    Vec<Complex> z, s;
    Matrix<Complex> carrier;  // e^{sum z N} e^{Gamma(s)}
    HodgeFiltration<Complex> filt;
};

inline Vec<Complex> disk_coordinates(const Vec<Complex>& z)
{
    Vec<Complex> s(z.size());
    for (std::size_t j = 0; j < z.size(); ++j)
        s[j] = std::exp(Complex(0, 2 * std::numbers::pi) * z[j]);
    return s;
}

inline OrbitPoint evaluate_period(const PeriodNormalForm& p, const Vec<Complex>& z)
{
    if (z.size() != p.vars())
        throw validation_error("point dimension does not match the number of variables");
    for (const Complex& zj : z)
        if (!(zj.imag() > 0)) throw validation_error("points must lie in the upper half plane");
    OrbitPoint pt;
    pt.z = z;
    pt.s = disk_coordinates(z);
    pt.carrier = period_factor(p, z, pt.s);
    pt.filt = orbit_filtration(p, pt.carrier);
    return pt;
}

struct HorizontalityResult {
    bool ok = true;
    struct Witness {
        std::size_t j;              // offending variable
        std::vector<int> monomial;  // first monomial of the reduced commutator
    };
    std::vector<Witness> failures;
};

// [N_j, e^{Gamma}] must vanish identically on {s_j = 0}: every monomial of
// the commutator with zero s_j-exponent must have zero matrix coefficient.
inline HorizontalityResult horizontality_check(const PeriodNormalForm& p)
{
    HorizontalityResult out;
    detail::PolyMat eg = detail::poly_exp(detail::gamma_poly(p), p.rank(), p.vars());
    for (std::size_t j = 0; j < p.vars(); ++j) {
        Matrix<GQ> nj = to_gq_matrix(p.ops[j]);
        for (const auto& [e, c] : eg) {
            if (e[j] != 0) continue;
            if ((nj * c - c * nj).is_zero()) continue;
            out.ok = false;
            out.failures.push_back({j, e});
            break;  // first offending monomial in lexicographic order
        }
    }
    return out;
}

enum class SectionKind { plain, pole };

// Canonical-extension section evaluator: sigma_v(z) = e^{sum zN} e^{Gamma} v,
// or its pole companion sigma_{v,k}(z) = e^{sum zN} e^{Gamma} N_k v / s_k.
struct Section {
    PeriodNormalForm form;
    Vec<GQ> v;
    SectionKind kind = SectionKind::plain;
    std::size_t k = 0;

    Vec<Complex> operator()(const Vec<Complex>& z) const
    {
        Vec<Complex> s = disk_coordinates(z);
        Matrix<Complex> carrier = period_factor(form, z, s);
        Vec<Complex> w = to_complex_vec(v);
        if (kind == SectionKind::pole) {
            w = matvec(to_complex_matrix(form.ops[k]), w);
            w = vec_scale(Complex(1, 0) / s[k], w);
        }
        return matvec(carrier, w);
    }

    Vec<GQ> value_exact(const Vec<GQ>& z, const Vec<GQ>& s) const
    {
        Matrix<GQ> carrier = period_factor(form, z, s);
        Vec<GQ> w = v;
        if (kind == SectionKind::pole) {
            w = matvec(to_gq_matrix(form.ops[k]), w);
            w = vec_scale(GQ(1) / s[k], w);
        }
        return matvec(carrier, w);
    }
};

inline Section extension_section(const PeriodNormalForm& p, const Vec<GQ>& v, SectionKind kind,
                                 std::size_t k = 0)
{
    if (v.size() != p.rank()) throw validation_error("section vector has the wrong dimension");
    if (kind == SectionKind::pole) {
        if (k >= p.vars()) throw validation_error("pole index out of range");
        if (!p.f.at(2).contains(v))
            throw validation_error("pole sections require a vector in F^2");
    }
    return Section{p, v, kind, k};
}

// Residual of the pole-section derivative identity
//   d sigma_v / d s_k = e^{sum zN} e^{Gamma} (d Gamma / d s_k) v
//                       + (2 pi i)^{-1} sigma_{v,k},
// checked in the z_k coordinate (both sides multiplied by 2 pi i s_k, which
// turns the left side into d sigma_v / d z_k) with central differences.
inline double pole_derivative_residual(const PeriodNormalForm& p, const Vec<GQ>& v, std::size_t k,
                                       const Vec<Complex>& z, double step = 1e-5)
{
    Section plain = extension_section(p, v, SectionKind::plain);
    Section pole = extension_section(p, v, SectionKind::pole, k);

    Vec<Complex> zp = z, zm = z;
    zp[k] += step;
    zm[k] -= step;
    Vec<Complex> up = plain(zp), um = plain(zm);
    Vec<Complex> lhs(up.size());
    for (std::size_t i = 0; i < up.size(); ++i) lhs[i] = (up[i] - um[i]) / (2 * step);

    Vec<Complex> s = disk_coordinates(z);
    Matrix<Complex> carrier = period_factor(p, z, s);
    Matrix<Complex> dgamma(p.rank(), p.rank());
    const Complex two_pi_i(0, 2 * std::numbers::pi);
    for (const auto& t : p.gamma) {
        if (t.exponent[k] == 0) continue;
        Complex c = two_pi_i * double(t.exponent[k]) * detail::monomial_value(t.exponent, s);
        dgamma = dgamma + c * to_complex_matrix(t.coeff);
    }
    Vec<Complex> rhs = matvec(carrier * dgamma, to_complex_vec(v));
    rhs = vec_add(rhs, vec_scale(s[k], pole(z)));

    double r = 0;
    for (std::size_t i = 0; i < lhs.size(); ++i) r = std::max(r, std::abs(lhs[i] - rhs[i]));
    return r;
}

struct EpsilonTildeRecord {
    Vec<Complex> s;
    Vec<Complex> f1_block;                // Q(h, carrier v_i) over the F^1 basis
    std::vector<Vec<Complex>> pole_blocks;  // [k][i]: Q(h, sigma_{v_i,k}) over the F^2 basis
};

inline EpsilonTildeRecord epsilon_tilde(const PeriodNormalForm& p, const Vec<Complex>& z,
                                        const Vec<Int>& h)
{
    OrbitPoint pt = evaluate_period(p, z);
    Matrix<Complex> q = to_complex_matrix(p.lat.q);
    Vec<Complex> hv(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) hv[i] = Complex(to_double(Rational(h[i])), 0.0);

    EpsilonTildeRecord rec;
    rec.s = pt.s;
    const auto& f1 = p.f.at(1);
    for (std::size_t i = 0; i < f1.dim(); ++i) {
        Vec<Complex> sv = matvec(pt.carrier, to_complex_vec(f1.basis_vector(i)));
        rec.f1_block.push_back(bilinear(q, hv, sv));
    }
    const auto& f2 = p.f.at(2);
    for (std::size_t k = 0; k < p.vars(); ++k) {
        Vec<Complex> block;
        Matrix<Complex> nk = to_complex_matrix(p.ops[k]);
        for (std::size_t i = 0; i < f2.dim(); ++i) {
            Vec<Complex> w = matvec(nk, to_complex_vec(f2.basis_vector(i)));
            w = vec_scale(Complex(1, 0) / pt.s[k], w);
            block.push_back(bilinear(q, hv, matvec(pt.carrier, w)));
        }
        rec.pole_blocks.push_back(std::move(block));
    }
    return rec;
}

// e^{sum a_j N_j} for an integer translation a; integral and unipotent.
inline Matrix<Rational> deck_transform(const PeriodNormalForm& p, const std::vector<long>& a)
{
    if (a.size() != p.vars()) throw validation_error("translation has the wrong dimension");
    Matrix<Rational> zn(p.rank(), p.rank());
    for (std::size_t j = 0; j < p.vars(); ++j) zn = zn + Rational(a[j]) * p.ops[j];
    return exp_nilpotent(zn);
}

inline bool nilpotent_in(const PeriodNormalForm& p, const std::set<std::size_t>& marked)
{
    for (const auto& t : p.gamma) {
        if (t.coeff.is_zero()) continue;
        for (std::size_t j : marked)
            if (t.exponent[j] > 0) return false;
    }
    return true;
}

// Drop every Gamma monomial that involves a marked variable; the result is a
// nilpotent orbit in those variables.
inline PeriodNormalForm truncate_gamma(const PeriodNormalForm& p,
                                       const std::set<std::size_t>& marked)
{
    PeriodNormalForm out = p;
    out.gamma.clear();
    for (const auto& t : p.gamma) {
        bool drop = false;
        for (std::size_t j : marked)
            if (j < t.exponent.size() && t.exponent[j] > 0) drop = true;
        if (!drop) out.gamma.push_back(t);
    }
    return out;
}

// Frobenius norm of e^{sum zN} (e^{Gamma} e^{-Gamma_1} - id) e^{-sum zN},
// the conjugated defect between the map and its truncation.
inline double truncation_defect_norm(const PeriodNormalForm& p,
                                     const std::set<std::size_t>& marked, const Vec<Complex>& z)
{
    PeriodNormalForm trunc = truncate_gamma(p, marked);
    Vec<Complex> s = disk_coordinates(z);
    Matrix<Complex> zn(p.rank(), p.rank());
    for (std::size_t j = 0; j < p.vars(); ++j)
        zn = zn + z[j] * to_complex_matrix(p.ops[j]);
    Matrix<Complex> e = exp_nilpotent(zn);
    Matrix<Complex> einv = exp_nilpotent(Complex(-1, 0) * zn);
    Matrix<Complex> inner = exp_nilpotent(gamma_value(p, s))
                          * exp_nilpotent(Complex(-1, 0) * gamma_value(trunc, s))
                          - Matrix<Complex>::identity(p.rank());
    return frobenius(e * inner * einv);
}

// Component sum of X over g^{p,q} with p <= -1.
inline Matrix<GQ> g_negative_part(const MixedHodgeData& m, const Matrix<GQ>& x)
{
    int pmin = 0, pmax = 0, qmin = 0, qmax = 0;
    for (const auto& pc : m.pieces) {
        pmin = std::min(pmin, pc.p);
        pmax = std::max(pmax, pc.p);
        qmin = std::min(qmin, pc.q);
        qmax = std::max(qmax, pc.q);
    }
    Matrix<GQ> acc(m.rank, m.rank);
    for (int dp = pmin - pmax; dp <= -1; ++dp)
        for (int dq = qmin - qmax; dq <= qmax - qmin; ++dq)
            acc = acc + g_component(m, x, dp, dq);
    return acc;
}

// Full validation of a period normal form: polarization shape, commuting
// nilpotent isometries with integral unipotent exponentials, Gamma(0) = 0
// with coefficients in the negative part of the limit algebra, and
// horizontality along the divisor.  Returns an empty string when valid.
inline std::string validate_normal_form(const PeriodNormalForm& p)
{
    if (auto d = p.lat.validate(); !d.empty()) return d;
    if (p.ops.empty()) return "at least one monodromy operator is required";
    const std::size_t n = p.rank();
    if (p.f.ambient != n) return "filtration ambient dimension does not match the rank";
    for (const auto& op : p.ops) {
        if (op.rows() != n || op.cols() != n) return "monodromy operator has the wrong dimensions";
        if (!is_infinitesimal_isometry(p.lat.q, op))
            return "monodromy operator is not an infinitesimal isometry";
        Matrix<Rational> pw = Matrix<Rational>::identity(n);
        for (std::size_t i = 0; i < n; ++i) pw = pw * op;
        if (!pw.is_zero()) return "monodromy operator is not nilpotent";
        // integral lattices carry integer monodromy logs; the unipotent
        // exponential itself may pick up factorial denominators, cleared by
        // passing to a finite-index translation sublattice
        if (p.lat.integral)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (den(op(i, j)) != 1) return "monodromy log is not integral";
    }
    for (std::size_t i = 0; i < p.ops.size(); ++i)
        for (std::size_t j = i + 1; j < p.ops.size(); ++j)
            if (!(p.ops[i] * p.ops[j] == p.ops[j] * p.ops[i]))
                return "monodromy operators do not commute";

    for (const auto& t : p.gamma) {
        if (t.exponent.size() != p.vars()) return "Gamma exponent has the wrong arity";
        for (int e : t.exponent)
            if (e < 0) return "Gamma exponents must be nonnegative";
        if (t.coeff.rows() != n || t.coeff.cols() != n)
            return "Gamma coefficient has the wrong dimensions";
        bool origin = true;
        for (int e : t.exponent)
            if (e != 0) origin = false;
        if (origin && !t.coeff.is_zero()) return "Gamma must vanish at the origin";
    }

    WeightFiltration w = weight_filtration(p.ops, std::vector<Rational>(p.vars(), Rational(1)));
    auto split = deligne_splitting(w, p.f);
    if (!split.ok) return "limit filtration pair is invalid: " + split.diagnostic;
    for (const auto& t : p.gamma)
        if (!(g_negative_part(*split.mhs, t.coeff) == t.coeff))
            return "Gamma coefficient is outside the negative part of the limit algebra";

    auto hz = horizontality_check(p);
    if (!hz.ok) {
        std::string msg = "horizontality fails at variable "
                        + std::to_string(hz.failures[0].j + 1) + " with monomial (";
        for (std::size_t i = 0; i < hz.failures[0].monomial.size(); ++i)
            msg += (i ? "," : "") + std::to_string(hz.failures[0].monomial[i]);
        return msg + ")";
    }
    return {};
}

struct QuotientVariation {
    PeriodNormalForm form;        // induced normal form, Tate-twisted back to weight zero
    int level = 0;                // graded weight it was taken at
    Matrix<Rational> lift;        // rows: integral vectors projecting to the quotient basis
    Matrix<Rational> projection;  // quotient coordinates of any vector of W_level
};

namespace detail {

// Primitive-stratum decomposition of a lift x in W_level: x = sum_j N^j u_j + w
// with u_j in ker N^{level+2j+1} cap W_{level+2j} and w in W_{level-1}.
struct LefschetzSplit {
    std::vector<Vec<Rational>> primitive;  // u_j per stratum
};

inline LefschetzSplit lefschetz_split(const Vec<Rational>& x,
                                      const std::vector<Matrix<Rational>>& npow,
                                      const WeightFiltration& w, int level, int jmax)
{
    const std::size_t n = x.size();
    std::vector<Subspace<Rational>> strata;
    std::size_t total = 0;
    for (int j = 0; j <= jmax; ++j) {
        std::size_t kp = std::size_t(level + 2 * j + 1);
        Subspace<Rational> ker = kp < npow.size()
                                     ? Subspace<Rational>::from_rows(kernel(npow[kp]))
                                     : Subspace<Rational>::full(n);
        strata.push_back(ker.intersect(w.at(level + 2 * j)));
        total += strata.back().dim();
    }
    const Subspace<Rational>& low = w.at(level - 1);
    Matrix<Rational> cols(n, total + low.dim());
    std::size_t off = 0;
    for (int j = 0; j <= jmax; ++j) {
        const Matrix<Rational>& nj = npow[std::size_t(j)];
        for (std::size_t i = 0; i < strata[std::size_t(j)].dim(); ++i, ++off) {
            Vec<Rational> col = matvec(nj, strata[std::size_t(j)].basis_vector(i));
            for (std::size_t r = 0; r < n; ++r) cols(r, off) = col[r];
        }
    }
    for (std::size_t i = 0; i < low.dim(); ++i, ++off) {
        Vec<Rational> col = low.basis_vector(i);
        for (std::size_t r = 0; r < n; ++r) cols(r, off) = col[r];
    }
    auto sol = solve(cols, x);
    if (!sol) throw validation_error("Lefschetz decomposition failed on the graded piece");

    LefschetzSplit out;
    off = 0;
    for (int j = 0; j <= jmax; ++j) {
        Vec<Rational> u(n, Rational(0));
        for (std::size_t i = 0; i < strata[std::size_t(j)].dim(); ++i, ++off)
            u = vec_add(u, vec_scale((*sol)[off], strata[std::size_t(j)].basis_vector(i)));
        out.primitive.push_back(std::move(u));
    }
    return out;
}

inline HodgeFiltration<GQ> normalize_filtration(int lo, std::vector<Subspace<GQ>> pieces,
                                                std::size_t ambient)
{
    while (!pieces.empty() && pieces.front().dim() == ambient) {
        pieces.erase(pieces.begin());
        ++lo;
    }
    while (!pieces.empty() && pieces.back().dim() == 0) pieces.pop_back();
    return HodgeFiltration<GQ>::from_pieces(lo, std::move(pieces), ambient);
}

} // namespace detail

// Quotient variation on gr_{level} of the weight filtration of the marked
// cone, polarized through the Lefschetz decomposition of the chosen cone
// element and Tate-twisted back to weight zero (even levels only).
inline QuotientVariation quotient_variation(const PeriodNormalForm& p,
                                            const std::set<std::size_t>& marked, int level,
                                            std::vector<Rational> cone = {})
{
    const std::size_t n = p.rank();
    if (marked.empty()) throw validation_error("the marked index set must be nonempty");
    for (std::size_t j : marked)
        if (j >= p.vars()) throw validation_error("marked index out of range");
    if (!nilpotent_in(p, marked))
        throw validation_error("the normal form still depends on a marked variable");
    if (cone.empty()) cone.assign(marked.size(), Rational(1));
    if (cone.size() != marked.size())
        throw validation_error("cone coefficient count does not match the marked set");

    std::vector<Matrix<Rational>> marked_ops;
    for (std::size_t j : marked) marked_ops.push_back(p.ops[j]);
    WeightFiltration w = weight_filtration(marked_ops, cone);

    if (level < w.lo || level > w.hi)
        throw validation_error("weight level is outside the filtration range");
    if (level < 0)
        throw validation_error("negative weight levels are not supported; use the opposite level");
    if (level % 2 != 0)
        throw validation_error("odd weight levels do not admit the even pairing convention");

    Matrix<Rational> ncone(n, n);
    {
        std::size_t i = 0;
        for (std::size_t j : marked) ncone = ncone + cone[i++] * p.ops[j];
    }

    IntLattice ll = integral_points(w.at(level));
    IntLattice llow = integral_points(w.at(level - 1));
    const std::size_t r2 = ll.rank(), r1 = llow.rank();
    if (r2 == r1) throw validation_error("the graded piece at the requested level is zero");
    const std::size_t grk = r2 - r1;

    // coordinates of the lower lattice inside the level lattice
    Matrix<Rational> llb(r2, n);
    for (std::size_t i = 0; i < r2; ++i)
        for (std::size_t j = 0; j < n; ++j) llb(i, j) = Rational(ll.basis()(i, j));
    IMat c(r1, r2);
    for (std::size_t i = 0; i < r1; ++i) {
        Vec<Rational> row(n);
        for (std::size_t j = 0; j < n; ++j) row[j] = Rational(llow.basis()(i, j));
        auto sol = solve(llb.transposed(), row);
        if (!sol) throw validation_error("weight filtration lattices are inconsistent");
        for (std::size_t j = 0; j < r2; ++j) {
            if (den((*sol)[j]) != 1)
                throw validation_error("weight filtration lattices are inconsistent");
            c(i, j) = num((*sol)[j]);
        }
    }
    IMat a = unimodular_completion(IntLattice::from_rows(c));

    // basis of the level lattice whose tail spans the lower lattice
    QuotientVariation out;
    out.level = level;
    out.lift = Matrix<Rational>(grk, n);
    Matrix<Rational> smat(n, n);
    for (std::size_t i = 0; i < r2; ++i) {
        Vec<Rational> b(n, Rational(0));
        for (std::size_t t = 0; t < r2; ++t)
            b = vec_add(b, vec_scale(Rational(a(t, i)), llb.row(t)));
        for (std::size_t r = 0; r < n; ++r) smat(r, i) = b[r];
        if (i < grk) out.lift.set_row(i, b);
    }
    IMat comp = unimodular_completion(ll);
    for (std::size_t i = 0; i + r2 < n; ++i)
        for (std::size_t r = 0; r < n; ++r) smat(r, r2 + i) = Rational(comp(r, i));
    auto sinv = inverse(smat);
    if (!sinv) throw validation_error("quotient basis assembly failed");
    out.projection = Matrix<Rational>(grk, n);
    for (std::size_t i = 0; i < grk; ++i) out.projection.set_row(i, sinv->row(i));

    auto induced = [&](const Matrix<Rational>& m) {
        if (!w.at(level).contains(w.at(level).apply(m)) ||
            !w.at(level - 1).contains(w.at(level - 1).apply(m)))
            throw validation_error("operator does not preserve the weight filtration");
        return out.projection * m * out.lift.transposed();
    };

    out.form.ops.clear();
    for (const auto& op : p.ops) out.form.ops.push_back(induced(op));

    // graded polarization: diagonal primitive pairings against the cone power
    std::vector<Matrix<Rational>> npow = {Matrix<Rational>::identity(n)};
    while (!npow.back().is_zero()) npow.push_back(npow.back() * ncone);
    int jmax = (w.hi - level) / 2;
    std::vector<detail::LefschetzSplit> splits;
    for (std::size_t i = 0; i < grk; ++i)
        splits.push_back(detail::lefschetz_split(out.lift.row(i), npow, w, level, jmax));
    Matrix<Rational> qt(grk, grk);
    for (std::size_t i = 0; i < grk; ++i)
        for (std::size_t j = 0; j < grk; ++j) {
            Rational acc(0);
            for (int jd = 0; jd <= jmax; ++jd) {
                std::size_t power = std::size_t(level + 2 * jd);
                if (power >= npow.size()) continue;
                acc += bilinear(p.lat.q, splits[i].primitive[std::size_t(jd)],
                                matvec(npow[power], splits[j].primitive[std::size_t(jd)]));
            }
            qt(i, j) = acc;
        }
    out.form.lat.rank = grk;
    out.form.lat.q = qt;
    out.form.lat.integral = true;
    for (std::size_t i = 0; i < grk; ++i)
        for (std::size_t j = 0; j < grk; ++j)
            if (den(qt(i, j)) != 1) out.form.lat.integral = false;

    // induced filtration, Tate-twisted down by level/2
    Matrix<GQ> prg = to_gq_matrix(out.projection);
    Subspace<GQ> wl = lift_gq(w.at(level));
    std::vector<Subspace<GQ>> pieces;
    for (int lvl = p.f.lo; lvl <= p.f.hi; ++lvl)
        pieces.push_back(p.f.at(lvl).intersect(wl).apply(prg));
    out.form.f = detail::normalize_filtration(p.f.lo - level / 2, std::move(pieces), grk);

    for (const auto& t : p.gamma) {
        Matrix<GQ> cf = t.coeff;
        Subspace<GQ> wlq = lift_gq(w.at(level)), wlow = lift_gq(w.at(level - 1));
        if (!wlq.contains(wlq.apply(cf)) || !wlow.contains(wlow.apply(cf)))
            throw validation_error("Gamma does not descend to the quotient");
        Matrix<GQ> ind = prg * cf * to_gq_matrix(out.lift.transposed());
        if (ind.is_zero()) continue;
        out.form.gamma.push_back({t.exponent, std::move(ind)});
    }
    return out;
}

} // namespace hodge
