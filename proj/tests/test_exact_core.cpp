#include <catch2/catch_amalgamated.hpp>

#include "hodge/binomials.hpp"
#include "hodge/lattice.hpp"
#include "hodge/matrix.hpp"
#include "hodge/scalar.hpp"
#include "hodge/subspace.hpp"

#include "support/gen.hpp"

using namespace hodge;

namespace {

IMat imat(std::size_t r, std::size_t c, std::initializer_list<long> v)
{
    IMat m(r, c);
    auto it = v.begin();
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = Int(*it++);
    return m;
}

Vec<Int> ivec(std::initializer_list<long> v)
{
    Vec<Int> r;
    for (long x : v) r.emplace_back(x);
    return r;
}

Matrix<Rational> qmat(std::size_t r, std::size_t c, std::initializer_list<Rational> v)
{
    Matrix<Rational> m(r, c);
    auto it = v.begin();
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = *it++;
    return m;
}

// Cofactor expansion, kept separate from the elimination-based det.
Rational det3_cofactor(const Matrix<Rational>& m)
{
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
         - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
         + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

Int ipow(Int b, Int e)
{
    Int r = 1;
    for (Int k = 0; k < e; ++k) r *= b;
    return r;
}

// Exact evaluation of s^{u+} - s^{u-} at an integer point.
Int eval_binomial_int(const Vec<Int>& u, const Vec<Int>& s)
{
    Int a = 1, b = 1;
    for (std::size_t j = 0; j < u.size(); ++j) {
        if (u[j] > 0) a *= ipow(s[j], u[j]);
        if (u[j] < 0) b *= ipow(s[j], -u[j]);
    }
    return a - b;
}

} // namespace

TEST_CASE("rational strings round trip and reject malformed input")
{
    REQUIRE(rational_str(Rational(-7, 3)) == "-7/3");
    REQUIRE(rational_str(Rational(4)) == "4");
    REQUIRE(parse_rational("-7/3") == Rational(-7, 3));
    REQUIRE(parse_rational("0") == 0);
    REQUIRE(parse_rational("6/4") == Rational(3, 2));
    REQUIRE_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
    REQUIRE_THROWS_AS(parse_rational("x"), std::invalid_argument);
    REQUIRE_THROWS_AS(parse_rational("1.5"), std::invalid_argument);
}

TEST_CASE("Gaussian rational field operations")
{
    GQ z(Rational(1, 2), Rational(-3));
    GQ w(Rational(2), Rational(5, 7));
    REQUIRE((z * w) / w == z);
    REQUIRE(z * z.conj() == GQ(z.norm()));
    REQUIRE(gq_i() * gq_i() == GQ(-1));
    REQUIRE_THROWS_AS(z / GQ(0), std::domain_error);
    Complex c = to_complex(z);
    REQUIRE(c.real() == Catch::Approx(0.5));
    REQUIRE(c.imag() == Catch::Approx(-3.0));
}

TEST_CASE("rref is canonical: invariant under row operations")
{
    gen::Rng rng(11);
    for (int trial = 0; trial < 25; ++trial) {
        auto m = gen::rand_matrix<Rational>(rng, 4, 6, [](gen::Rng& g) { return gen::rand_rational(g); });
        IMat u = gen::rand_unimodular(rng, 4);
        Matrix<Rational> um = gen::to_field_matrix<Rational>(u) * m;
        Matrix<Rational> a = m, b = um;
        rref(a);
        rref(b);
        REQUIRE(a == b);
    }
}

TEST_CASE("kernel rows annihilate and have complementary rank")
{
    gen::Rng rng(12);
    for (int trial = 0; trial < 25; ++trial) {
        auto m = gen::rand_matrix<GQ>(rng, 3, 5, [](gen::Rng& g) { return gen::rand_gq(g); });
        auto ker = kernel(m);
        REQUIRE(ker.rows() + rank(m) == m.cols());
        for (std::size_t i = 0; i < ker.rows(); ++i)
            REQUIRE(vec_is_zero(matvec(m, ker.row(i))));
    }
}

TEST_CASE("solve finds solutions exactly when consistent")
{
    gen::Rng rng(13);
    for (int trial = 0; trial < 25; ++trial) {
        auto m = gen::rand_matrix<Rational>(rng, 4, 3, [](gen::Rng& g) { return gen::rand_rational(g); });
        Vec<Rational> x0 = {gen::rand_rational(rng), gen::rand_rational(rng), gen::rand_rational(rng)};
        Vec<Rational> b = matvec(m, x0);
        auto x = solve(m, b);
        REQUIRE(x.has_value());
        REQUIRE(vec_is_zero(vec_sub(matvec(m, *x), b)));
    }
    // x + y = 0 and x + y = 1 cannot both hold.
    auto none = solve(qmat(2, 2, {1, 1, 1, 1}), Vec<Rational>{Rational(0), Rational(1)});
    REQUIRE(!none.has_value());
}

TEST_CASE("determinant matches cofactor expansion and is multiplicative")
{
    gen::Rng rng(14);
    for (int trial = 0; trial < 25; ++trial) {
        auto a = gen::rand_matrix<Rational>(rng, 3, 3, [](gen::Rng& g) { return gen::rand_rational(g); });
        auto b = gen::rand_matrix<Rational>(rng, 3, 3, [](gen::Rng& g) { return gen::rand_rational(g); });
        REQUIRE(det(a) == det3_cofactor(a));
        REQUIRE(det(a * b) == det(a) * det(b));
        if (det(a) != 0) {
            auto inv = inverse(a);
            REQUIRE(inv.has_value());
            REQUIRE(a * *inv == Matrix<Rational>::identity(3));
        }
    }
}

TEST_CASE("exponential of a nilpotent operator is the truncated series")
{
    Matrix<Rational> n(3, 3);
    n(0, 1) = 1;
    n(1, 2) = 1;
    auto e = exp_nilpotent(n);
    auto expect = qmat(3, 3, {1, 1, Rational(1, 2), 0, 1, 1, 0, 0, 1});
    REQUIRE(e == expect);
    // exp(N) exp(-N) = 1 for random strictly upper triangular N.
    gen::Rng rng(15);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix<Rational> m(4, 4);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = i + 1; j < 4; ++j) m(i, j) = gen::rand_rational(rng);
        REQUIRE(exp_nilpotent(m) * exp_nilpotent(Rational(-1) * m) == Matrix<Rational>::identity(4));
    }
}

TEST_CASE("conjugate-split lines meet in zero")
{
    // span{e0 + i e1} and span{e0 - i e1} in dimension 3.
    Matrix<GQ> a(1, 3), b(1, 3);
    a(0, 0) = GQ(1); a(0, 1) = gq_i();
    b(0, 0) = GQ(1); b(0, 1) = -gq_i();
    auto sa = Subspace<GQ>::from_rows(a);
    auto sb = Subspace<GQ>::from_rows(b);
    REQUIRE(sa.intersect(sb).dim() == 0);
    REQUIRE(sa.sum(sb).dim() == 2);
    REQUIRE(sa.conjugated() == sb);
    REQUIRE(subspace_algebra(SubspaceOp::intersect, sa, sb).dim() == 0);
    REQUIRE(subspace_algebra(SubspaceOp::sum, sa, sb).dim() == 2);
    REQUIRE(subspace_algebra(SubspaceOp::conjugate, sa, sb) == sb);
    REQUIRE_THROWS_AS(subspace_algebra(SubspaceOp::apply, sa, sb), std::invalid_argument);
}

TEST_CASE("subspace laws on random data")
{
    gen::Rng rng(16);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = gen::rand_subspace<GQ>(rng, 5, 2);
        auto b = gen::rand_subspace<GQ>(rng, 5, 3);
        auto c = gen::rand_subspace<GQ>(rng, 5, 2);
        auto cap = a.intersect(b);
        REQUIRE(a.contains(cap));
        REQUIRE(b.contains(cap));
        REQUIRE(a.sum(b).contains(a));
        REQUIRE(cap.dim() + a.sum(b).dim() == a.dim() + b.dim());
        // (A cap B) + C lies inside (A + C) cap (B + C).
        REQUIRE(a.sum(c).intersect(b.sum(c)).contains(cap.sum(c)));
        // Conjugation distributes over intersection and sum.
        REQUIRE(a.conjugated().intersect(b.conjugated()) == cap.conjugated());
        REQUIRE(a.conjugated().sum(b.conjugated()) == a.sum(b).conjugated());
        // An invertible operator commutes with the lattice operations.
        IMat u = gen::rand_unimodular(rng, 5);
        Matrix<GQ> g = gen::to_field_matrix<GQ>(u);
        REQUIRE(a.apply(g).intersect(b.apply(g)) == cap.apply(g));
    }
}

TEST_CASE("subspace coordinates invert the span")
{
    gen::Rng rng(17);
    auto a = gen::rand_subspace<GQ>(rng, 4, 2);
    Vec<GQ> v = vec_add(vec_scale(GQ(Rational(2, 3)), a.basis_vector(0)),
                        vec_scale(GQ(Rational(0), Rational(5)), a.basis_vector(1)));
    REQUIRE(a.contains(v));
    auto co = a.coordinates(v);
    REQUIRE(co.has_value());
    Vec<GQ> back(4, GQ(0));
    for (std::size_t i = 0; i < a.dim(); ++i)
        back = vec_add(back, vec_scale((*co)[i], a.basis_vector(i)));
    REQUIRE(back == v);
    Vec<GQ> outside(4, GQ(0));
    outside[3] = GQ(1);
    if (!a.contains(outside)) REQUIRE(!a.coordinates(outside).has_value());
}

TEST_CASE("conjugating a float-backed subspace is rejected")
{
    Matrix<Complex> m(1, 2);
    m(0, 0) = Complex(1, 0);
    m(0, 1) = Complex(0, 1);
    auto s = Subspace<Complex>::from_rows(m);
    REQUIRE_THROWS_AS(s.conjugated(), validation_error);
    REQUIRE(s.contains(Vec<Complex>{Complex(2, 0), Complex(0, 2)}));
    REQUIRE(!s.contains(Vec<Complex>{Complex(1, 0), Complex(0, -1)}));
}

TEST_CASE("Hermite form is a canonical lattice representative")
{
    gen::Rng rng(18);
    for (int trial = 0; trial < 25; ++trial) {
        IMat m = gen::rand_matrix<Int>(rng, 3, 4, [](gen::Rng& g) { return Int(gen::rand_int(g, -4, 4)); });
        IMat u = gen::rand_unimodular(rng, 3);
        REQUIRE(hnf_rows(m) == hnf_rows(u * m));
    }
}

TEST_CASE("Smith form diagonalizes with unimodular transforms")
{
    gen::Rng rng(19);
    for (int trial = 0; trial < 25; ++trial) {
        std::size_t r = std::size_t(gen::rand_int(rng, 1, 4));
        std::size_t c = std::size_t(gen::rand_int(rng, 1, 4));
        IMat m = gen::rand_matrix<Int>(rng, r, c, [](gen::Rng& g) { return Int(gen::rand_int(g, -6, 6)); });
        SmithForm s = smith_form(m);
        Int du = det_int(s.u), dv = det_int(s.v);
        REQUIRE((du == 1 || du == -1));
        REQUIRE((dv == 1 || dv == -1));
        IMat d = s.u * m * s.v;
        for (std::size_t i = 0; i < d.rows(); ++i)
            for (std::size_t j = 0; j < d.cols(); ++j) {
                if (i == j && i < s.diag.size()) REQUIRE(d(i, j) == s.diag[i]);
                else REQUIRE(d(i, j) == 0);
            }
        for (std::size_t i = 0; i + 1 < s.diag.size(); ++i) {
            REQUIRE(s.diag[i] > 0);
            REQUIRE(s.diag[i + 1] % s.diag[i] == 0);
        }
    }
}

TEST_CASE("integer kernel of a 1x2 map, against brute force")
{
    IMat m = imat(1, 2, {1, 2});
    IntLattice k = IntLattice::kernel_of(m);
    REQUIRE(k.rank() == 1);
    REQUIRE(k.generator(0) == ivec({2, -1}));
    // Brute force: membership on a box must coincide with M a = 0.
    for (long a0 = -6; a0 <= 6; ++a0)
        for (long a1 = -6; a1 <= 6; ++a1) {
            bool in = k.contains(ivec({a0, a1}));
            bool zero = (a0 + 2 * a1) == 0;
            REQUIRE(in == zero);
        }
    REQUIRE(k.saturated());
}

TEST_CASE("integer kernels are saturated on random matrices")
{
    gen::Rng rng(20);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t r = std::size_t(gen::rand_int(rng, 1, 3));
        IMat m = gen::rand_matrix<Int>(rng, r, 4, [](gen::Rng& g) { return Int(gen::rand_int(g, -5, 5)); });
        IntLattice k = IntLattice::kernel_of(m);
        REQUIRE(k.saturated());
        for (std::size_t i = 0; i < k.rank(); ++i) {
            Vec<Int> v = k.generator(i);
            for (std::size_t row = 0; row < m.rows(); ++row) {
                Int s = 0;
                for (std::size_t j = 0; j < 4; ++j) s += m(row, j) * v[j];
                REQUIRE(s == 0);
            }
        }
        // Rank check through the rational kernel.
        Matrix<Rational> q(m.rows(), m.cols());
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j) q(i, j) = Rational(m(i, j));
        REQUIRE(k.rank() == kernel(q).rows());
    }
}

TEST_CASE("saturation witness and saturate")
{
    IntLattice l = IntLattice::from_rows(imat(1, 2, {2, 0}));
    auto w = l.saturation_witness();
    REQUIRE(w.has_value());
    REQUIRE(!l.contains(*w));
    bool multiple_inside = false;
    Vec<Int> acc(2, Int(0));
    for (int mlt = 2; mlt <= 12 && !multiple_inside; ++mlt) {
        acc = vec_add(acc, *w);
        if (mlt >= 2) multiple_inside = l.contains(vec_scale(Int(mlt), *w));
    }
    REQUIRE(multiple_inside);
    REQUIRE(l.saturate() == IntLattice::from_rows(imat(1, 2, {1, 0})));
    REQUIRE(IntLattice::from_rows(imat(1, 2, {2, 1})).saturated());
}

TEST_CASE("integral points of a rational line")
{
    auto s = Subspace<Rational>::from_rows(qmat(1, 2, {Rational(1, 2), Rational(1, 3)}));
    IntLattice pts = integral_points(s);
    REQUIRE(pts.rank() == 1);
    REQUIRE(pts.generator(0) == ivec({3, 2}));
    REQUIRE(pts.saturated());
}

TEST_CASE("unimodular completion of a saturated lattice")
{
    gen::Rng rng(21);
    for (int trial = 0; trial < 25; ++trial) {
        std::size_t n = std::size_t(gen::rand_int(rng, 2, 5));
        std::size_t k = std::size_t(gen::rand_int(rng, 1, long(n)));
        // Last k rows of a unimodular matrix span a saturated rank-k lattice.
        IMat u = gen::rand_unimodular(rng, n);
        IMat rows(k, n);
        for (std::size_t i = 0; i < k; ++i) rows.set_row(i, u.row(n - k + i));
        IntLattice l = IntLattice::from_rows(rows);
        REQUIRE(l.rank() == k);
        REQUIRE(l.saturated());
        IMat a = unimodular_completion(l);
        REQUIRE(det_int(a) == 1);
        // Last k columns must be exactly the canonical basis of L.
        IMat lastk(k, n);
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t i = 0; i < n; ++i) lastk(j, i) = a(i, n - k + j);
        REQUIRE(IntLattice::from_rows(lastk) == l);
        REQUIRE(hnf_rows(lastk) == l.basis());
    }
    REQUIRE_THROWS_AS(unimodular_completion(IntLattice::from_rows(imat(1, 2, {2, 0}))),
                      saturation_error);
    try {
        unimodular_completion(IntLattice::from_rows(imat(1, 3, {0, 3, 6})));
        FAIL("expected a saturation failure");
    } catch (const saturation_error& e) {
        IntLattice l = IntLattice::from_rows(imat(1, 3, {0, 3, 6}));
        REQUIRE(!l.contains(e.witness));
        REQUIRE(l.contains(vec_scale(Int(3), e.witness)));
    }
}

TEST_CASE("binomials of the parabola map")
{
    // s1 = t^2, s2 = t.
    BinomialSystem sys = lattice_ideal_binomials(imat(2, 1, {2, 1}));
    REQUIRE(sys.binomials.size() == 1);
    REQUIRE(sys.binomials[0] == ivec({-1, 2}));  // s2^2 - s1, leading term first
    REQUIRE(!sys.capped);
    REQUIRE(binomial_vanishes_on_map(sys.exponents, sys.binomials[0]));
    Vec<Complex> pt = {Complex(9, 0), Complex(3, 0)};
    REQUIRE(std::abs(eval_binomial(sys.binomials[0], pt)) == 0.0);
    Vec<Complex> off = {Complex(2, 0), Complex(4, 0)};
    REQUIRE(std::abs(eval_binomial(sys.binomials[0], off)) == Catch::Approx(14.0));
}

TEST_CASE("binomials of the twisted cubic cut exactly the curve on a grid")
{
    BinomialSystem sys = lattice_ideal_binomials(imat(3, 1, {1, 2, 3}));
    REQUIRE(!sys.capped);
    REQUIRE(!sys.binomials.empty());
    for (const auto& u : sys.binomials)
        REQUIRE(binomial_vanishes_on_map(sys.exponents, u));
    // Independent description of the curve on positive integers:
    // (s1, s2, s3) = (t, t^2, t^3).
    for (long s1 = 1; s1 <= 8; ++s1)
        for (long s2 = 1; s2 <= 8; ++s2)
            for (long s3 = 1; s3 <= 8; ++s3) {
                bool on_curve = (s2 == s1 * s1) && (s3 == s1 * s1 * s1);
                bool all_vanish = true;
                for (const auto& u : sys.binomials)
                    if (eval_binomial_int(u, ivec({s1, s2, s3})) != 0) { all_vanish = false; break; }
                REQUIRE(all_vanish == on_curve);
            }
}

TEST_CASE("empty exponent matrix forces every coordinate to one")
{
    BinomialSystem sys = lattice_ideal_binomials(IMat(3, 0));
    REQUIRE(sys.binomials.size() == 3);
    std::set<Vec<Int>> got(sys.binomials.begin(), sys.binomials.end());
    REQUIRE(got.count(ivec({1, 0, 0})) == 1);
    REQUIRE(got.count(ivec({0, 1, 0})) == 1);
    REQUIRE(got.count(ivec({0, 0, 1})) == 1);
    for (const auto& u : sys.binomials) {
        Vec<Complex> ones(3, Complex(1, 0));
        REQUIRE(std::abs(eval_binomial(u, ones)) == 0.0);
    }
}

TEST_CASE("injective monomial maps have no relations")
{
    BinomialSystem sys = lattice_ideal_binomials(imat(2, 2, {1, 0, 0, 1}));
    REQUIRE(sys.binomials.empty());
    REQUIRE(!sys.capped);
}

TEST_CASE("degree cap is reported")
{
    BinomialSystem loose = lattice_ideal_binomials(imat(3, 1, {1, 2, 3}), 8);
    REQUIRE(!loose.capped);
    BinomialSystem tight = lattice_ideal_binomials(imat(3, 1, {1, 2, 3}), 2);
    REQUIRE(tight.capped);
    for (const auto& u : tight.binomials)
        REQUIRE(binomial_vanishes_on_map(tight.exponents, u));
}

TEST_CASE("binomial systems vanish numerically along the monomial map")
{
    gen::Rng rng(22);
    for (int trial = 0; trial < 10; ++trial) {
        std::size_t n = std::size_t(gen::rand_int(rng, 2, 4));
        std::size_t d = std::size_t(gen::rand_int(rng, 1, 2));
        IMat e = gen::rand_matrix<Int>(rng, n, d, [](gen::Rng& g) { return Int(gen::rand_int(g, 0, 3)); });
        BinomialSystem sys = lattice_ideal_binomials(e, 6);
        for (const auto& u : sys.binomials)
            REQUIRE(binomial_vanishes_on_map(e, u));
        // Sample the torus and evaluate.
        for (int pt = 0; pt < 5; ++pt) {
            Vec<Complex> t(d);
            for (auto& x : t)
                x = Complex(0.3 + 0.1 * gen::rand_int(rng, 0, 9), 0.1 * gen::rand_int(rng, -5, 5));
            Vec<Complex> s(n, Complex(1, 0));
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < d; ++k) {
                    long ex = e(j, k).convert_to<long>();
                    for (long q = 0; q < ex; ++q) s[j] *= t[k];
                }
            for (const auto& u : sys.binomials)
                REQUIRE(std::abs(eval_binomial(u, s)) < 1e-9);
        }
    }
}
