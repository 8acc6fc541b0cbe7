#pragma once

// Deterministic random generators shared by the test suites and the
// acceptance harness.  Everything draws from an explicitly seeded mt19937_64
// so failures are reproducible.

#include "hodge/lattice.hpp"
#include "hodge/matrix.hpp"
#include "hodge/subspace.hpp"

#include <random>

namespace hodge::gen {

using Rng = std::mt19937_64;

inline long rand_int(Rng& rng, long lo, long hi)
{
    return std::uniform_int_distribution<long>(lo, hi)(rng);
}

inline Rational rand_rational(Rng& rng, long max_num = 5, long max_den = 3)
{
    long d = rand_int(rng, 1, max_den);
    return Rational(rand_int(rng, -max_num, max_num), d);
}

inline GQ rand_gq(Rng& rng, long max_num = 5, long max_den = 3)
{
    return GQ(rand_rational(rng, max_num, max_den), rand_rational(rng, max_num, max_den));
}

template <class K, class F>
Matrix<K> rand_matrix(Rng& rng, std::size_t r, std::size_t c, F&& entry)
{
    Matrix<K> m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = entry(rng);
    return m;
}

// Product of random elementary matrices: unimodular with entries kept small.
inline IMat rand_unimodular(Rng& rng, std::size_t n, int steps = 12)
{
    IMat u = IMat::identity(n);
    if (n < 2) return u;
    for (int s = 0; s < steps; ++s) {
        std::size_t i = std::size_t(rand_int(rng, 0, long(n) - 1));
        std::size_t j = std::size_t(rand_int(rng, 0, long(n) - 1));
        if (i == j) continue;
        Int c(rand_int(rng, -2, 2));
        for (std::size_t k = 0; k < n; ++k) u(i, k) += c * u(j, k);
    }
    return u;
}

template <class K>
Matrix<K> to_field_matrix(const IMat& m)
{
    Matrix<K> r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = K(Rational(m(i, j)));
    return r;
}

template <class K>
Subspace<K> rand_subspace(Rng& rng, std::size_t ambient, std::size_t dim)
{
    Matrix<K> m = rand_matrix<K>(rng, dim, ambient, [](Rng& g) {
        if constexpr (std::is_same_v<K, GQ>) return rand_gq(g);
        else return K(rand_rational(g));
    });
    return Subspace<K>::from_rows(std::move(m));
}

} // namespace hodge::gen
