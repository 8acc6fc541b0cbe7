#pragma once

// Monodromy weight filtrations of commuting nilpotent cones, Deligne
// splittings of mixed Hodge structures, grading operators, and the exact
// kernel test for real classes congruent to kernel vectors mod e^{iN}F^l.

#include "hodge/polarized.hpp"

namespace hodge {

// Increasing filtration of Q^n, centered at zero: W_k = 0 below lo and
// W_k = H at and above hi.
struct WeightFiltration {
    int lo = 0, hi = 0;
    std::vector<Subspace<Rational>> pieces;  // k in [lo, hi]
    std::size_t ambient = 0;

    Subspace<Rational> at(int k) const
    {
        if (k < lo) return Subspace<Rational>::zero(ambient);
        if (k > hi) return Subspace<Rational>::full(ambient);
        return pieces[std::size_t(k - lo)];
    }

    // W[delta], the filtration with W[delta]_k = W_{k+delta}.
    WeightFiltration shifted(int delta) const
    {
        WeightFiltration s = *this;
        s.lo -= delta;
        s.hi -= delta;
        return s;
    }

    friend bool operator==(const WeightFiltration& a, const WeightFiltration& b)
    {
        if (a.ambient != b.ambient) return false;
        int lo = std::min(a.lo, b.lo), hi = std::max(a.hi, b.hi);
        for (int k = lo; k <= hi; ++k)
            if (!(a.at(k) == b.at(k))) return false;
        return true;
    }
};

inline Subspace<GQ> lift_gq(const Subspace<Rational>& s)
{
    return Subspace<GQ>::from_rows(to_gq_matrix(s.basis()));
}

// The common weight filtration of the cone spanned by the given commuting
// nilpotent operators, computed from N = sum coeff_j op_j via
// W_k = sum_{j >= max(0,-k)} ker N^{k+j+1} cap im N^j.
inline WeightFiltration weight_filtration(const std::vector<Matrix<Rational>>& ops,
                                          const std::vector<Rational>& coeffs)
{
    if (ops.empty()) throw validation_error("weight filtration needs at least one operator");
    if (coeffs.size() != ops.size())
        throw validation_error("coefficient count does not match operator count");
    const std::size_t n = ops[0].rows();
    if (n == 0) throw validation_error("weight filtration needs a positive ambient dimension");
    for (const auto& op : ops)
        if (op.rows() != n || op.cols() != n)
            throw validation_error("operators must be square and of equal size");
    for (const auto& c : coeffs)
        if (c <= 0) throw validation_error("cone coefficients must be strictly positive");
    for (std::size_t i = 0; i < ops.size(); ++i)
        for (std::size_t j = i + 1; j < ops.size(); ++j)
            if (!(ops[i] * ops[j] == ops[j] * ops[i]))
                throw validation_error("operators do not commute");
    for (const auto& op : ops) {
        Matrix<Rational> p = Matrix<Rational>::identity(n);
        for (std::size_t k = 0; k < n; ++k) p = p * op;
        if (!p.is_zero()) throw validation_error("operator is not nilpotent");
    }

    Matrix<Rational> nsum(n, n);
    for (std::size_t j = 0; j < ops.size(); ++j) nsum = nsum + coeffs[j] * ops[j];

    std::vector<Matrix<Rational>> pw = {Matrix<Rational>::identity(n)};
    while (!pw.back().is_zero()) pw.push_back(pw.back() * nsum);
    const int d = int(pw.size()) - 1;  // smallest d with N^d = 0

    auto ker_of = [&](int m) {
        if (m >= d) return Subspace<Rational>::full(n);
        return Subspace<Rational>::from_rows(kernel(pw[std::size_t(m)]));
    };
    auto im_of = [&](int m) {
        if (m >= int(pw.size())) return Subspace<Rational>::zero(n);
        return Subspace<Rational>::from_rows(pw[std::size_t(m)].transposed());
    };

    std::vector<Subspace<Rational>> w;
    for (int k = -(d - 1); k <= d - 1; ++k) {
        Subspace<Rational> acc = Subspace<Rational>::zero(n);
        for (int j = std::max(0, -k); j < d; ++j)
            acc = acc.sum(ker_of(k + j + 1).intersect(im_of(j)));
        w.push_back(std::move(acc));
    }

    WeightFiltration out;
    out.ambient = n;
    int lo = -(d - 1), hi = d - 1;
    std::size_t first = 0, last = w.size() - 1;
    while (first < last && w[first].dim() == 0) { ++first; ++lo; }
    while (last > first && w[last - 1].dim() == n) { --last; --hi; }
    out.lo = lo;
    out.hi = hi;
    out.pieces.assign(w.begin() + long(first), w.begin() + long(last) + 1);
    return out;
}

// Deligne's bigrading of a mixed Hodge structure.
struct MixedHodgeData {
    WeightFiltration w;
    HodgeFiltration<GQ> f;
    struct Piece {
        int p, q;
        Subspace<GQ> space;
    };
    std::vector<Piece> pieces;  // nonzero I^{p,q}, ordered by p+q desc, then p desc
    Matrix<GQ> basis, basis_inv;
    std::vector<std::pair<int, int>> col_pq;
    Matrix<GQ> y;  // grading operator: multiplication by p+q on I^{p,q}
    bool r_split = false;
    std::size_t rank = 0;

    Subspace<GQ> piece(int p, int q) const
    {
        for (const auto& pc : pieces)
            if (pc.p == p && pc.q == q) return pc.space;
        return Subspace<GQ>::zero(rank);
    }

    Matrix<GQ> projector(int p, int q) const
    {
        Matrix<GQ> sel(rank, rank);
        for (std::size_t c = 0; c < rank; ++c)
            if (col_pq[c] == std::make_pair(p, q)) sel(c, c) = GQ(1);
        return basis * sel * basis_inv;
    }

    std::map<std::pair<int, int>, Vec<GQ>> decompose(const Vec<GQ>& v) const
    {
        Vec<GQ> c = matvec(basis_inv, v);
        std::map<std::pair<int, int>, Vec<GQ>> out;
        for (std::size_t j = 0; j < rank; ++j) {
            if (c[j].is_zero()) continue;
            auto& comp = out.try_emplace(col_pq[j], Vec<GQ>(rank, GQ(0))).first->second;
            for (std::size_t i = 0; i < rank; ++i) comp[i] += c[j] * basis(i, j);
        }
        return out;
    }
};

struct DeligneResult {
    bool ok = false;
    std::string diagnostic;
    std::optional<MixedHodgeData> mhs;
};

inline DeligneResult deligne_splitting(const WeightFiltration& w, const HodgeFiltration<GQ>& f)
{
    DeligneResult out;
    if (w.ambient != f.ambient) {
        out.diagnostic = "weight and Hodge filtrations have different ambient dimensions";
        return out;
    }
    const std::size_t n = w.ambient;

    MixedHodgeData m;
    m.w = w;
    m.f = f;
    m.rank = n;

    const int phi = f.hi, plo = std::min(f.lo, w.lo - f.hi);
    std::size_t total = 0;
    for (int s = w.hi + 1; s >= w.lo; --s)  // weight p+q descending
        for (int p = phi; p >= plo; --p) {
            int q = s - p;
            if (q < plo || q > phi) continue;
            Subspace<GQ> left = f.at(p).intersect(lift_gq(w.at(s)));
            Subspace<GQ> right = detail::conj_span(f.at(q)).intersect(lift_gq(w.at(s)));
            for (int j = 1; j <= s - w.lo; ++j)
                right = right.sum(
                    detail::conj_span(f.at(q - j)).intersect(lift_gq(w.at(s - j - 1))));
            Subspace<GQ> ipq = left.intersect(right);
            if (ipq.dim() == 0) continue;
            total += ipq.dim();
            m.pieces.push_back({p, q, std::move(ipq)});
        }

    auto not_mhs = [&](const std::string& detail) {
        out.diagnostic = "(W,F) is not a mixed Hodge structure: " + detail;
        return out;
    };

    if (total != n) return not_mhs("bigraded pieces have total dimension " + std::to_string(total));

    m.basis = Matrix<GQ>(n, n);
    std::size_t col = 0;
    for (const auto& pc : m.pieces)
        for (std::size_t i = 0; i < pc.space.dim(); ++i, ++col) {
            m.col_pq.emplace_back(pc.p, pc.q);
            for (std::size_t r = 0; r < n; ++r) m.basis(r, col) = pc.space.basis()(i, r);
        }
    auto inv = inverse(m.basis);
    if (!inv) return not_mhs("bigraded pieces are not in direct sum");
    m.basis_inv = std::move(*inv);

    for (int k = w.lo - 1; k <= w.hi; ++k) {
        Subspace<GQ> acc = Subspace<GQ>::zero(n);
        for (const auto& pc : m.pieces)
            if (pc.p + pc.q <= k) acc = acc.sum(pc.space);
        if (!(acc == lift_gq(w.at(k))))
            return not_mhs("weight filtration is not recovered at level " + std::to_string(k));
    }
    for (int k = f.lo; k <= f.hi; ++k) {
        Subspace<GQ> acc = Subspace<GQ>::zero(n);
        for (const auto& pc : m.pieces)
            if (pc.p >= k) acc = acc.sum(pc.space);
        if (!(acc == f.at(k)))
            return not_mhs("Hodge filtration is not recovered at level " + std::to_string(k));
    }

    m.r_split = true;
    for (const auto& pc : m.pieces)
        if (!(detail::conj_span(pc.space) == m.piece(pc.q, pc.p))) {
            m.r_split = false;
            break;
        }

    m.y = Matrix<GQ>(n, n);
    for (const auto& pc : m.pieces) {
        GQ s(Rational(pc.p + pc.q));
        m.y = m.y + s * m.projector(pc.p, pc.q);
    }

    out.ok = true;
    out.mhs = std::move(m);
    return out;
}

inline DeligneResult deligne_splitting(const WeightFiltration&, const HodgeFiltration<Complex>&)
{
    throw validation_error("the Deligne splitting requires exact-layer filtrations");
}

inline Matrix<GQ> grading_operator(const MixedHodgeData& m) { return m.y; }

template <class K>
Subspace<K> eigenspace(const Matrix<K>& y, long l)
{
    Matrix<K> shifted = y;
    for (std::size_t i = 0; i < y.rows(); ++i) shifted(i, i) -= field<K>::from_int(l);
    return Subspace<K>::from_rows(kernel(shifted));
}

// Component of X in g^{p,q}: the part mapping each I^{a,b} into I^{a+p,b+q}.
inline Matrix<GQ> g_component(const MixedHodgeData& m, const Matrix<GQ>& x, int p, int q)
{
    Matrix<GQ> acc(m.rank, m.rank);
    for (const auto& pc : m.pieces)
        acc = acc + m.projector(pc.p + p, pc.q + q) * x * m.projector(pc.p, pc.q);
    return acc;
}

template <class K>
bool is_infinitesimal_isometry(const Matrix<K>& q, const Matrix<K>& x)
{
    return (x.transposed() * q + q * x).is_zero();
}

// Commuting multi-variable gradings: partial sums Y_1 + ... + Y_k must grade
// the k-th weight filtration.  Returns an empty string when valid.
inline std::string validate_multi_grading(const std::vector<Matrix<Rational>>& ys,
                                          const std::vector<WeightFiltration>& ws)
{
    if (ys.size() != ws.size()) return "grading and filtration counts differ";
    for (std::size_t i = 0; i < ys.size(); ++i)
        for (std::size_t j = i + 1; j < ys.size(); ++j)
            if (!(ys[i] * ys[j] == ys[j] * ys[i]))
                return "grading operators " + std::to_string(i) + " and " + std::to_string(j)
                     + " do not commute";
    for (std::size_t k = 0; k < ys.size(); ++k) {
        const std::size_t n = ws[k].ambient;
        if (ys[k].rows() != n || ys[k].cols() != n)
            return "grading operator " + std::to_string(k) + " has the wrong dimensions";
        Matrix<Rational> partial(n, n);
        for (std::size_t j = 0; j <= k; ++j) partial = partial + ys[j];
        std::size_t total = 0;
        for (int l = ws[k].lo - int(n); l <= ws[k].hi + int(n); ++l)
            total += eigenspace(partial, l).dim();
        if (total != n)
            return "partial grading " + std::to_string(k + 1) + " is not semisimple with integer spectrum";
        for (int l = ws[k].lo - 1; l <= ws[k].hi; ++l) {
            Subspace<Rational> acc = Subspace<Rational>::zero(n);
            for (int e = ws[k].lo - int(n); e <= l; ++e) acc = acc.sum(eigenspace(partial, e));
            if (!(acc == ws[k].at(l)))
                return "partial grading " + std::to_string(k + 1)
                     + " does not grade its weight filtration at level " + std::to_string(l);
        }
    }
    return {};
}

enum class MhsKernelStatus { precondition_failed, pass, fail };

struct MhsKernelResult {
    MhsKernelStatus status = MhsKernelStatus::precondition_failed;
    std::string note;
    Vec<GQ> b;       // kernel part of the congruence
    Vec<GQ> f_part;  // f with h = b + e^{iN} f, f in F^l
};

// Exact check of: h real in W_{2l} with h = b mod e^{iN}F^l for some
// b in E_{2l}(Y) cap ker N implies h in E_{2l}(Y) cap ker N.
inline MhsKernelResult mhs_kernel_test(const MixedHodgeData& m, const Matrix<Rational>& n,
                                       const Vec<Rational>& h, const Vec<GQ>& b, int l)
{
    if (!m.r_split)
        throw validation_error("kernel test requires an R-split mixed Hodge structure");
    Matrix<GQ> ng = to_gq_matrix(n);
    if (!(g_component(m, ng, -1, -1) == ng))
        throw validation_error("operator is not a (-1,-1)-morphism of the splitting");

    Vec<GQ> hg = to_gq_vec(h);
    const Vec<GQ>& bg = b;
    GQ two_l(Rational(2 * l));
    if (!vec_is_zero(matvec(ng, bg)) || !vec_is_zero(vec_sub(matvec(m.y, bg), vec_scale(two_l, bg))))
        throw validation_error("b must lie in E_{2l}(Y) and in ker N");

    MhsKernelResult out;
    out.b = bg;
    if (!lift_gq(m.w.at(2 * l)).contains(hg)) {
        out.note = "h is not in W_{2l}";
        return out;
    }
    Matrix<GQ> ein = exp_nilpotent(gq_i() * ng);
    Subspace<GQ> s = m.f.at(l).apply(ein);
    Vec<GQ> diff = vec_sub(hg, bg);
    if (!s.contains(diff)) {
        out.note = "h - b is not in e^{iN} F^l";
        return out;
    }
    out.f_part = matvec(exp_nilpotent((-gq_i()) * ng), diff);

    bool in_e = vec_is_zero(vec_sub(matvec(m.y, hg), vec_scale(two_l, hg)));
    bool in_ker = vec_is_zero(matvec(ng, hg));
    out.status = (in_e && in_ker) ? MhsKernelStatus::pass : MhsKernelStatus::fail;
    if (out.status == MhsKernelStatus::fail)
        out.note = in_ker ? "h is not an eigenvector of Y" : "N h is nonzero";
    return out;
}

// A kernel vector b with h = b mod e^{iN}F^l, if one exists.
inline std::optional<Vec<GQ>> find_congruent_kernel_part(const MixedHodgeData& m,
                                                         const Matrix<Rational>& n,
                                                         const Vec<Rational>& h, int l)
{
    Matrix<GQ> ng = to_gq_matrix(n);
    Subspace<GQ> e = eigenspace(m.y, 2 * l).intersect(Subspace<GQ>::from_rows(kernel(ng)));
    Subspace<GQ> s = m.f.at(l).apply(exp_nilpotent(gq_i() * ng));
    if (e.dim() + s.dim() == 0) {
        if (vec_is_zero(to_gq_vec(h))) return Vec<GQ>(m.rank, GQ(0));
        return std::nullopt;
    }
    Matrix<GQ> cols(m.rank, e.dim() + s.dim());
    for (std::size_t j = 0; j < e.dim(); ++j)
        for (std::size_t i = 0; i < m.rank; ++i) cols(i, j) = e.basis()(j, i);
    for (std::size_t j = 0; j < s.dim(); ++j)
        for (std::size_t i = 0; i < m.rank; ++i) cols(i, e.dim() + j) = s.basis()(j, i);
    auto x = solve(cols, to_gq_vec(h));
    if (!x) return std::nullopt;
    Vec<GQ> b(m.rank, GQ(0));
    for (std::size_t j = 0; j < e.dim(); ++j)
        for (std::size_t i = 0; i < m.rank; ++i) b[i] += (*x)[j] * e.basis()(j, i);
    return b;
}

} // namespace hodge
