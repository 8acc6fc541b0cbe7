#pragma once

// Binomial equations for the closure of a monomial map.  Given an exponent
// matrix E (rows index target coordinates, columns index torus parameters),
// the lattice L = {u : u^T E = 0} yields binomials s^{u+} - s^{u-} that
// vanish identically on the parametrization.  A basis of L cuts out the
// closure on the torus; a degree-capped completion pass (binomial Buchberger
// with common factors stripped, which performs the saturation by the
// coordinate product) adds boundary equations.  If the cap truncates the
// pass, the zero set may be a superset of the closure off the torus and the
// system is flagged.

#include "hodge/lattice.hpp"

#include <deque>
#include <set>

namespace hodge {

namespace detail {

inline Vec<Int> vplus(const Vec<Int>& u)
{
    Vec<Int> r(u.size(), 0);
    for (std::size_t i = 0; i < u.size(); ++i)
        if (u[i] > 0) r[i] = u[i];
    return r;
}

inline Vec<Int> vminus(const Vec<Int>& u)
{
    Vec<Int> r(u.size(), 0);
    for (std::size_t i = 0; i < u.size(); ++i)
        if (u[i] < 0) r[i] = -u[i];
    return r;
}

inline Int deg1(const Vec<Int>& e)
{
    Int s = 0;
    for (const auto& x : e) s += x;
    return s;
}

// Graded lexicographic comparison of monomial exponents.
inline int cmp_monomial(const Vec<Int>& a, const Vec<Int>& b)
{
    Int da = deg1(a), db = deg1(b);
    if (da != db) return da < db ? -1 : 1;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    return 0;
}

// Orient so the leading monomial is u+.
inline bool orient(Vec<Int>& u)
{
    int c = cmp_monomial(vplus(u), vminus(u));
    if (c == 0) return false;  // u = 0
    if (c < 0)
        for (auto& x : u) x = -x;
    return true;
}

inline bool divides(const Vec<Int>& a, const Vec<Int>& b)
{
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i]) return false;
    return true;
}

} // namespace detail

struct BinomialSystem {
    IMat exponents;                   // the monomial map (n x c)
    std::vector<Vec<Int>> binomials;  // lattice vectors u, meaning s^{u+} - s^{u-}
    bool capped = false;              // true: torus-exact, boundary possibly a superset
    int degree_cap = 8;
};

// Exact check that s^{u+} - s^{u-} vanishes identically once s_j is
// substituted by the monomial t^{E_j}.
inline bool binomial_vanishes_on_map(const IMat& e, const Vec<Int>& u)
{
    for (std::size_t k = 0; k < e.cols(); ++k) {
        Int s = 0;
        for (std::size_t j = 0; j < e.rows(); ++j) s += u[j] * e(j, k);
        if (s != 0) return false;
    }
    return true;
}

inline Complex eval_binomial(const Vec<Int>& u, const Vec<Complex>& s)
{
    Complex a(1, 0), b(1, 0);
    for (std::size_t j = 0; j < u.size(); ++j) {
        long e = u[j].convert_to<long>();
        for (long k = 0; k < e; ++k) a *= s[j];
        for (long k = 0; k < -e; ++k) b *= s[j];
    }
    return a - b;
}

inline BinomialSystem lattice_ideal_binomials(const IMat& e, int degree_cap = 8)
{
    using namespace detail;
    BinomialSystem sys;
    sys.exponents = e;
    sys.degree_cap = degree_cap;

    IntLattice lat = IntLattice::kernel_of(e.transposed());
    if (lat.rank() == 0) return sys;  // injective on the torus: no relations

    const Int cap(degree_cap);
    auto deg = [&](const Vec<Int>& u) {
        Int d1 = deg1(vplus(u)), d2 = deg1(vminus(u));
        return d1 > d2 ? d1 : d2;
    };

    std::vector<Vec<Int>> gens;
    std::set<Vec<Int>> seen;
    for (std::size_t i = 0; i < lat.rank(); ++i) {
        Vec<Int> u = lat.generator(i);
        orient(u);
        if (seen.insert(u).second) gens.push_back(u);
    }

    auto reduce = [&](Vec<Int> u) -> Vec<Int> {
        for (;;) {
            if (!orient(u)) return u;  // zero
            bool step = false;
            Vec<Int> up = vplus(u);
            for (const auto& g : gens) {
                if (g == u) continue;
                if (divides(vplus(g), up)) {
                    u = vec_sub(u, g);
                    step = true;
                    break;
                }
            }
            if (!step) return u;
        }
    };

    std::deque<std::pair<std::size_t, std::size_t>> queue;
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (std::size_t j = i + 1; j < gens.size(); ++j) queue.emplace_back(i, j);

    while (!queue.empty()) {
        auto [i, j] = queue.front();
        queue.pop_front();
        Vec<Int> lcm = vplus(gens[i]);
        Vec<Int> gp = vplus(gens[j]);
        for (std::size_t k = 0; k < lcm.size(); ++k)
            if (gp[k] > lcm[k]) lcm[k] = gp[k];
        if (deg1(lcm) > cap) { sys.capped = true; continue; }
        Vec<Int> w = reduce(vec_sub(gens[i], gens[j]));
        if (vec_is_zero(w)) continue;
        if (deg(w) > cap) { sys.capped = true; continue; }
        if (!seen.insert(w).second) continue;
        for (std::size_t k = 0; k < gens.size(); ++k) queue.emplace_back(k, gens.size());
        gens.push_back(w);
    }

    std::sort(gens.begin(), gens.end(), [](const Vec<Int>& a, const Vec<Int>& b) {
        int c = cmp_monomial(vplus(a), vplus(b));
        if (c != 0) return c < 0;
        return cmp_monomial(vminus(a), vminus(b)) < 0;
    });
    sys.binomials = std::move(gens);
    return sys;
}

} // namespace hodge
