#pragma once

// Lab for degenerating rays z(m) = i A t(m) + w(m): growth schedules with
// their direction operators T_k, harmless error certificates, the rescaling
// operators e(m) attached to a compatible family of gradings, scaled limits
// of the period map, and an end-to-end verifier that checks the boundedness
// conclusions on a sampled window.  Exact data stays exact (the schedule
// matrix, kernels, projectors, eigenspaces); floats enter only through the
// sampled trajectories and the fitted rates.  "Bounded" always means a fitted
// growth exponent below an explicit threshold on the window: the lab checks
// conclusions on the instance, it does not decide limits.

#include "hodge/extended_locus.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace hodge {

using TimeRule = std::function<Vec<double>(long)>;
using PointRule = std::function<Vec<Complex>(long)>;
using ClassRule = std::function<Vec<Int>(long)>;
using VectorRule = std::function<Vec<Complex>(long)>;

// Geometric sampling of [1, m_max]: powers of two plus the endpoint.
inline std::vector<long> geometric_samples(long m_max)
{
    if (m_max < 1) throw validation_error("the sample horizon must be positive");
    std::vector<long> out;
    for (long m = 1; m < m_max; m *= 2) out.push_back(m);
    out.push_back(m_max);
    return out;
}

namespace detail {

struct LineFit {
    double slope = 0;
    double intercept = 0;
    std::size_t count = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    LineFit f;
    if (x.size() != y.size() || x.size() < 2) return f;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double n = double(x.size());
    const double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-12) return f;
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / n;
    f.count = x.size();
    return f;
}

// Fitted slope of log g against log t1, skipping vanishing samples.  A series
// that never rises above zero reports exponent 0.
inline double growth_exponent(const std::vector<double>& t1, const std::vector<double>& g)
{
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < g.size() && i < t1.size(); ++i)
        if (g[i] > 1e-300 && t1[i] > 0) {
            xs.push_back(std::log(t1[i]));
            ys.push_back(std::log(g[i]));
        }
    LineFit f = fit_line(xs, ys);
    return f.count >= 2 ? f.slope : 0.0;
}

inline double to_d(const Int& v) { return v.convert_to<double>(); }

inline Vec<Rational> rational_vec(const Vec<Int>& v)
{
    Vec<Rational> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = Rational(v[i]);
    return out;
}

// Exact orthogonal projector onto a rational subspace under the standard
// inner product.
inline Matrix<Rational> orthogonal_projector(const Subspace<Rational>& s)
{
    const std::size_t n = s.ambient();
    if (s.dim() == 0) return Matrix<Rational>(n, n);
    const Matrix<Rational>& b = s.basis();
    auto gi = inverse(b * b.transposed());
    if (!gi) throw validation_error("projector Gram matrix is singular");
    return b.transposed() * (*gi) * b;
}

// Orthonormal spanning set of the row span, two passes of modified
// Gram-Schmidt for stability.
inline std::vector<Vec<Complex>> onb_rows(const Matrix<Complex>& rows, double tol = 1e-12)
{
    std::vector<Vec<Complex>> q;
    for (std::size_t i = 0; i < rows.rows(); ++i) {
        Vec<Complex> v = rows.row(i);
        double scale = vec_norm(v);
        if (scale > 0)
            for (auto& x : v) x /= scale;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : q) {
                Complex c(0);
                for (std::size_t j = 0; j < v.size(); ++j) c += std::conj(u[j]) * v[j];
                for (std::size_t j = 0; j < v.size(); ++j) v[j] -= c * u[j];
            }
        double nn = vec_norm(v);
        if (nn < tol) continue;
        for (auto& x : v) x /= nn;
        q.push_back(std::move(v));
    }
    return q;
}

inline double projection_residual(const Vec<Complex>& x, const std::vector<Vec<Complex>>& onb)
{
    Vec<Complex> r = x;
    for (const auto& u : onb) {
        Complex c(0);
        for (std::size_t j = 0; j < r.size(); ++j) c += std::conj(u[j]) * r[j];
        for (std::size_t j = 0; j < r.size(); ++j) r[j] -= c * u[j];
    }
    return vec_norm(r);
}

} // namespace detail

// Principal-angle distance between the row spans: Frobenius norm of the
// difference of the orthogonal projectors.
inline double grassmann_distance(const Matrix<Complex>& a, const Matrix<Complex>& b)
{
    auto projector = [](const Matrix<Complex>& rows) {
        std::vector<Vec<Complex>> q = detail::onb_rows(rows);
        Matrix<Complex> p(rows.cols(), rows.cols());
        for (const auto& u : q)
            for (std::size_t r = 0; r < u.size(); ++r)
                for (std::size_t c = 0; c < u.size(); ++c) p(r, c) += u[r] * std::conj(u[c]);
        return p;
    };
    return frobenius(projector(a) - projector(b));
}

struct ScheduleParams {
    long m_max = 10000;
    double ratio_threshold = 50;  // final t_k / t_{k+1} must have climbed past this
    double fiber_tol = kFloatTol; // tolerance when validating the recentering fibers
};

// A degenerating ray z(m) = i A t(m) + w(m).  A is rational and nonnegative
// with the support of each row a trailing block of directions, so every
// variable enters at a well defined first direction and the operators
// T_k = sum_j a(j,k) N_j are interior elements of the cone generated by the
// variables seen so far.  By convention t_{d+1}(m) = 1.
struct GrowthSchedule {
    Matrix<Rational> a;                // vars x dirs
    std::vector<std::size_t> entry;    // first direction where each variable moves
    std::vector<Matrix<Rational>> tk;  // direction operators T_1..T_d
    TimeRule t;
    PointRule w;
    std::vector<long> sample;          // validated window
    double w_tail = 0;                 // final step of the recentering sequence

    std::size_t vars() const { return a.rows(); }
    std::size_t dirs() const { return a.cols(); }

    Vec<double> times(long m) const
    {
        Vec<double> out = t(m);
        if (out.size() != dirs()) throw validation_error("time rule has the wrong arity");
        return out;
    }

    Vec<Complex> point(long m) const
    {
        Vec<Complex> out = w(m);
        if (out.size() != vars()) throw validation_error("recentering rule has the wrong arity");
        return out;
    }

    Vec<Complex> z(long m) const
    {
        Vec<double> tm = times(m);
        Vec<Complex> out = point(m);
        for (std::size_t j = 0; j < vars(); ++j) {
            double y = 0;
            for (std::size_t k = 0; k < dirs(); ++k) y += to_double(a(j, k)) * tm[k];
            out[j] += Complex(0, y);
        }
        return out;
    }
};

inline GrowthSchedule build_schedule(const Matrix<Rational>& a, TimeRule t, PointRule w,
                                     const PeriodNormalForm& p, const ScheduleParams& params = {})
{
    const std::size_t n = p.vars();
    const std::size_t d = a.cols();
    if (a.rows() != n)
        throw validation_error("schedule matrix must have one row per monodromy variable");
    if (d == 0) throw validation_error("schedule needs at least one direction");

    GrowthSchedule s;
    s.a = a;
    s.entry.assign(n, d);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < d; ++k) {
            if (a(j, k) < 0) throw validation_error("schedule entries must be nonnegative");
            if (a(j, k) != 0 && s.entry[j] == d) s.entry[j] = k;
            if (a(j, k) == 0 && s.entry[j] < d)
                throw validation_error("the support of variable " + std::to_string(j + 1) +
                                       " is not a trailing block of directions");
        }
        if (s.entry[j] == d)
            throw validation_error("variable " + std::to_string(j + 1) +
                                   " does not move in any direction");
    }
    for (std::size_t k = 0; k < d; ++k) {
        Matrix<Rational> m(p.rank(), p.rank());
        for (std::size_t j = 0; j < n; ++j)
            if (a(j, k) != 0) m = m + a(j, k) * p.ops[j];
        s.tk.push_back(std::move(m));
    }
    s.t = std::move(t);
    s.w = std::move(w);
    s.sample = geometric_samples(params.m_max);
    const std::size_t ns = s.sample.size();
    const std::size_t tail = ns / 2;

    std::vector<Vec<double>> ts;
    for (long m : s.sample) {
        Vec<double> tm = s.times(m);
        for (std::size_t k = 0; k < d; ++k)
            if (!(tm[k] > 0))
                throw validation_error("time rule is not positive in direction " +
                                       std::to_string(k + 1) + " at m=" + std::to_string(m));
        ts.push_back(std::move(tm));
    }
    for (std::size_t k = 0; k < d; ++k) {
        auto ratio = [&](std::size_t i) {
            return ts[i][k] / (k + 1 < d ? ts[i][k + 1] : 1.0);
        };
        for (std::size_t i = tail; i + 1 < ns; ++i)
            if (!(ratio(i + 1) > ratio(i)))
                throw validation_error("ratio of direction " + std::to_string(k + 1) +
                                       " to direction " + std::to_string(k + 2) +
                                       " stops increasing at m=" + std::to_string(s.sample[i + 1]));
        if (!(ratio(ns - 1) > params.ratio_threshold))
            throw validation_error("ratio of direction " + std::to_string(k + 1) +
                                   " to direction " + std::to_string(k + 2) +
                                   " stays below the divergence threshold");
    }

    std::vector<double> steps;
    for (std::size_t i = 0; i + 1 < ns; ++i)
        steps.push_back(vec_norm(vec_sub(s.point(s.sample[i + 1]), s.point(s.sample[i]))));
    for (std::size_t i = tail; i + 1 < steps.size(); ++i)
        if (steps[i + 1] > steps[i] + params.fiber_tol)
            throw validation_error("the recentering sequence does not settle on the sampled window");
    s.w_tail = steps.empty() ? 0.0 : steps.back();

    for (long m : s.sample) {
        Vec<Complex> wm = s.point(m);
        Matrix<Complex> carrier = period_factor(p, wm, disk_coordinates(wm));
        auto val = validate_polarized_hs(p.lat, orbit_filtration(p, carrier), params.fiber_tol);
        if (!val.ok)
            throw validation_error("the recentering fiber at m=" + std::to_string(m) +
                                   " leaves the period domain: " + val.diagnostic);
    }
    return s;
}

struct HarmlessParams {
    long m_max = 10000;
    double alpha_min = 1e-3;        // smallest admissible decay rate
    double growth_threshold = 0.15; // growth exponent above which a series counts as unbounded
};

// Certificate that a sampled error sequence is harmless for a schedule.  The
// components b_0..b_d are cut out by iterated orthogonal projection onto the
// nested kernels ker T_1 cap ... cap ker T_k, the rate alpha is fitted from
// the decay of |T_k b(m)| against t_k(m), and the certified bound is
// sup_m |b(m)| + sum_k e^{alpha t_k(m)} |T_k b(m)| over the window.
struct HarmlessCertificate {
    bool ok = false;
    std::string diagnostic;
    double alpha = 0;
    double sup_bound = 0;
    std::vector<long> sample;
    std::vector<Vec<double>> times;
    std::vector<std::vector<Vec<Complex>>> parts;  // parts[i][k] = b_k at sample i
    std::vector<double> part_bound;                // sup of |b_k| e^{alpha t_{k+1}}
    std::vector<Matrix<Rational>> projectors;      // P_k onto ker T_1 cap .. cap ker T_k
    VectorRule rule;
};

inline HarmlessCertificate harmless_decompose(const GrowthSchedule& s, VectorRule b,
                                              const HarmlessParams& params = {})
{
    if (s.tk.empty()) throw validation_error("the schedule is not bound to a normal form");
    const std::size_t d = s.dirs();
    const std::size_t dim = s.tk[0].rows();

    HarmlessCertificate cert;
    cert.rule = b;
    cert.sample = geometric_samples(params.m_max);

    Subspace<Rational> kk = Subspace<Rational>::full(dim);
    for (std::size_t k = 0; k < d; ++k) {
        kk = kk.intersect(Subspace<Rational>::from_rows(kernel(s.tk[k])));
        cert.projectors.push_back(detail::orthogonal_projector(kk));
    }
    std::vector<Matrix<Complex>> proj;
    proj.push_back(Matrix<Complex>::identity(dim));
    for (const auto& pm : cert.projectors) proj.push_back(to_complex_matrix(pm));
    std::vector<Matrix<Complex>> tkc;
    for (const auto& tm : s.tk) tkc.push_back(to_complex_matrix(tm));

    std::vector<double> t1, bnorm;
    std::vector<std::vector<double>> tknorm(d);
    for (long m : cert.sample) {
        Vec<Complex> bm = b(m);
        if (bm.size() != dim) throw validation_error("error rule has the wrong arity");
        Vec<double> tm = s.times(m);
        std::vector<Vec<Complex>> comps;
        for (std::size_t k = 0; k <= d; ++k) {
            Vec<Complex> upper = matvec(proj[k], bm);
            Vec<Complex> lower = k < d ? matvec(proj[k + 1], bm) : Vec<Complex>(dim, Complex(0));
            comps.push_back(vec_sub(upper, lower));
        }
        cert.parts.push_back(std::move(comps));
        t1.push_back(tm[0]);
        bnorm.push_back(vec_norm(bm));
        for (std::size_t k = 0; k < d; ++k) tknorm[k].push_back(vec_norm(matvec(tkc[k], bm)));
        cert.times.push_back(std::move(tm));
    }

    double alpha = std::numeric_limits<double>::infinity();
    std::string reject;
    for (std::size_t k = 0; k < d; ++k) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < cert.sample.size(); ++i)
            if (tknorm[k][i] > 1e-300) {
                xs.push_back(cert.times[i][k]);
                ys.push_back(std::log(tknorm[k][i]));
            }
        if (xs.size() < 2) continue;  // the direction already annihilates the sequence
        double rate = -detail::fit_line(xs, ys).slope;
        alpha = std::min(alpha, rate);
        if (rate < params.alpha_min && reject.empty())
            reject = "no admissible decay rate fits direction " + std::to_string(k + 1);
    }
    if (!std::isfinite(alpha)) alpha = 1.0;

    double rho = detail::growth_exponent(t1, bnorm);
    if (rho > params.growth_threshold && reject.empty())
        reject = "the error sequence grows like t1^" + std::to_string(rho) + " on the window";

    cert.alpha = alpha;
    cert.ok = reject.empty() && alpha >= params.alpha_min;
    if (!cert.ok && reject.empty())
        reject = "fitted decay rate falls below the admissible minimum";
    cert.diagnostic = cert.ok ? std::string{} : reject;

    cert.part_bound.assign(d + 1, 0.0);
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cert.sample.size(); ++i) {
        double total = bnorm[i];
        for (std::size_t k = 0; k < d; ++k) {
            if (tknorm[k][i] <= 0) continue;
            double le = cert.alpha * cert.times[i][k] + std::log(tknorm[k][i]);
            total += le > 700 ? inf : std::exp(le);
        }
        cert.sup_bound = std::max(cert.sup_bound, total);
        for (std::size_t k = 0; k <= d; ++k) {
            double nb = vec_norm(cert.parts[i][k]);
            if (nb <= 0) continue;
            double le = cert.alpha * (k < d ? cert.times[i][k] : 1.0) + std::log(nb);
            cert.part_bound[k] = std::max(cert.part_bound[k], le > 700 ? inf : std::exp(le));
        }
    }
    return cert;
}

// Simultaneous eigenspace decomposition of a commuting family of rational
// semisimple operators with integer spectrum.  Projectors are exact spectral
// projectors, not orthogonal ones.
struct MultiGrading {
    std::size_t dim = 0;
    std::vector<Vec<Int>> level;
    std::vector<Matrix<Rational>> projector;

    std::optional<std::size_t> index_of(const Vec<Int>& l) const
    {
        for (std::size_t i = 0; i < level.size(); ++i)
            if (level[i] == l) return i;
        return std::nullopt;
    }
};

inline MultiGrading common_grading(const std::vector<Matrix<Rational>>& ys,
                                   const std::vector<WeightFiltration>& ws)
{
    if (ys.empty()) throw validation_error("a grading needs at least one operator");
    if (std::string msg = validate_multi_grading(ys, ws); !msg.empty())
        throw validation_error(msg);
    const std::size_t n = ys[0].rows();

    struct Piece {
        Vec<Int> level;
        Subspace<Rational> space;
    };
    std::vector<Piece> pieces{{{}, Subspace<Rational>::full(n)}};
    for (const auto& y : ys) {
        Rational bound(0);
        for (std::size_t i = 0; i < n; ++i) {
            Rational row(0);
            for (std::size_t j = 0; j < n; ++j) row += y(i, j) < 0 ? -y(i, j) : y(i, j);
            if (row > bound) bound = row;
        }
        const long lmax = long(to_double(bound)) + 1;
        std::vector<Piece> next;
        for (const auto& pc : pieces)
            for (long l = -lmax; l <= lmax; ++l) {
                Subspace<Rational> cut = pc.space.intersect(eigenspace(y, l));
                if (cut.dim() == 0) continue;
                Vec<Int> lv = pc.level;
                lv.push_back(Int(l));
                next.push_back({std::move(lv), std::move(cut)});
            }
        pieces = std::move(next);
    }
    std::size_t total = 0;
    for (const auto& pc : pieces) total += pc.space.dim();
    if (total != n)
        throw validation_error("grading operators are not simultaneously diagonalizable "
                               "with integer spectrum");

    MultiGrading g;
    g.dim = n;
    Matrix<Rational> stacked(n, n);
    std::vector<std::pair<std::size_t, std::size_t>> span;
    std::size_t at = 0;
    for (const auto& pc : pieces) {
        span.push_back({at, pc.space.dim()});
        for (std::size_t r = 0; r < pc.space.dim(); ++r)
            stacked.set_row(at++, pc.space.basis().row(r));
    }
    auto inv = inverse(stacked.transposed());
    if (!inv) throw validation_error("graded pieces do not span the ambient space");
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        auto [off, len] = span[i];
        Matrix<Rational> left(n, len);
        Matrix<Rational> right(len, n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < len; ++c) left(r, c) = stacked(off + c, r);
        for (std::size_t r = 0; r < len; ++r) right.set_row(r, inv->row(off + r));
        g.level.push_back(pieces[i].level);
        g.projector.push_back(left * right);
    }
    return g;
}

// e(t) = exp(1/2 sum_k log(t_k) Y_k): acts on the joint (l_1..l_d) eigenspace
// by prod_k t_k^{l_k/2}.  sign = -1 gives the inverse.
inline Matrix<Complex> scaling_operator(const MultiGrading& g, const Vec<double>& t, int sign = 1)
{
    Matrix<Complex> out(g.dim, g.dim);
    for (std::size_t i = 0; i < g.level.size(); ++i) {
        double f = 1;
        for (std::size_t k = 0; k < g.level[i].size() && k < t.size(); ++k)
            f *= std::pow(t[k], 0.5 * double(sign) * detail::to_d(g.level[i][k]));
        Matrix<Complex> pc = to_complex_matrix(g.projector[i]);
        for (std::size_t r = 0; r < g.dim; ++r)
            for (std::size_t c = 0; c < g.dim; ++c) out(r, c) += f * pc(r, c);
    }
    return out;
}

// Exact evaluation at rational times; defined when every eigenvalue is even.
inline std::optional<Matrix<Rational>> scaling_operator_exact(const MultiGrading& g,
                                                              const Vec<Rational>& t, int sign = 1)
{
    Matrix<Rational> out(g.dim, g.dim);
    for (std::size_t i = 0; i < g.level.size(); ++i) {
        Rational f(1);
        for (std::size_t k = 0; k < g.level[i].size() && k < t.size(); ++k) {
            Int l = g.level[i][k];
            if (l % 2 != 0) return std::nullopt;
            Int e = (l / 2) * sign;
            Rational base = t[k];
            if (e < 0) {
                if (base == 0) return std::nullopt;
                base = 1 / base;
                e = -e;
            }
            for (Int s(0); s < e; ++s) f *= base;
        }
        out = out + f * g.projector[i];
    }
    return out;
}

namespace detail {

// Applies e(m) to each piece and normalizes the rows; spans are unchanged by
// the normalization, which keeps the float layer well conditioned uniformly
// in m.
inline HodgeFiltration<Complex> scaled_filtration(const HodgeFiltration<Complex>& f,
                                                  const Matrix<Complex>& em)
{
    std::vector<Subspace<Complex>> pieces;
    for (const auto& piece : f.pieces) {
        const Matrix<Complex>& b = piece.basis();
        Matrix<Complex> rows(b.rows(), b.cols());
        for (std::size_t r = 0; r < b.rows(); ++r) {
            Vec<Complex> v = matvec(em, b.row(r));
            double nn = vec_norm(v);
            if (nn > 0)
                for (auto& x : v) x /= nn;
            rows.set_row(r, v);
        }
        pieces.push_back(Subspace<Complex>::from_rows(std::move(rows)));
    }
    return HodgeFiltration<Complex>::from_pieces(f.lo, std::move(pieces), f.ambient);
}

} // namespace detail

struct FlagConvergence {
    std::vector<long> sample;
    std::vector<double> step;            // distance between consecutive scaled flags
    double tail = 0;
    bool converged = false;
    std::vector<Matrix<Complex>> basis;  // final scaled basis rows per level
    std::optional<double> closed_form;   // distance to exp(i T_1) F for split one-variable data
};

struct ScalingData {
    MultiGrading grading;
    FlagConvergence flag;
};

// Scaled limit of the period map along the schedule: e(m) Phi(z(m)) tracked
// on the sampled window with a Cauchy-tail convergence report.  For a single
// variable with a split limit the flag limit has the closed form e^{i T_1} F
// and the distance to it is reported as well.
inline ScalingData scaling_and_limit(const GrowthSchedule& s, const PeriodNormalForm& p,
                                     const std::vector<Matrix<Rational>>& ys,
                                     long m_max = 10000, double tol = 1e-6)
{
    std::vector<WeightFiltration> ws;
    for (std::size_t k = 0; k < s.dirs(); ++k)
        ws.push_back(weight_filtration({s.tk[k]}, {Rational(1)}));
    ScalingData out{common_grading(ys, ws), {}};
    for (const auto& y : ys)
        if (!is_infinitesimal_isometry(p.lat.q, y))
            throw validation_error("a grading operator is not an infinitesimal isometry "
                                   "of the pairing");

    FlagConvergence& fc = out.flag;
    fc.sample = geometric_samples(m_max);
    std::vector<Matrix<Complex>> prev;
    for (long m : fc.sample) {
        Vec<Complex> zm = s.z(m);
        Matrix<Complex> carrier = period_factor(p, zm, disk_coordinates(zm));
        HodgeFiltration<Complex> scaled =
            detail::scaled_filtration(orbit_filtration(p, carrier),
                                      scaling_operator(out.grading, s.times(m)));
        std::vector<Matrix<Complex>> cur;
        for (const auto& piece : scaled.pieces) cur.push_back(piece.basis());
        if (!prev.empty()) {
            double dm = 0;
            for (std::size_t i = 0; i < cur.size() && i < prev.size(); ++i)
                dm = std::max(dm, grassmann_distance(cur[i], prev[i]));
            fc.step.push_back(dm);
        }
        prev = std::move(cur);
    }
    fc.basis = std::move(prev);
    fc.tail = fc.step.empty() ? 0.0 : fc.step.back();
    fc.converged = fc.tail < tol;

    if (p.vars() == 1) {
        DeligneResult dr = deligne_splitting(weight_filtration(p.ops, {Rational(1)}), p.f);
        if (dr.ok && dr.mhs->r_split) {
            Matrix<Complex> turn(p.rank(), p.rank());
            for (std::size_t r = 0; r < p.rank(); ++r)
                for (std::size_t c = 0; c < p.rank(); ++c)
                    turn(r, c) = Complex(0, to_double(s.tk[0](r, c)));
            Matrix<Complex> rotate = exp_nilpotent(turn);
            double dist = 0;
            for (std::size_t i = 0; i < p.f.pieces.size() && i < fc.basis.size(); ++i) {
                const Matrix<GQ>& gb = p.f.pieces[i].basis();
                Matrix<Complex> rows(gb.rows(), gb.cols());
                for (std::size_t r = 0; r < gb.rows(); ++r) {
                    Vec<Complex> v(gb.cols());
                    for (std::size_t c = 0; c < gb.cols(); ++c) v[c] = to_complex(gb(r, c));
                    rows.set_row(r, matvec(rotate, v));
                }
                dist = std::max(dist, grassmann_distance(rows, fc.basis[i]));
            }
            fc.closed_form = dist;
        }
    }
    return out;
}

struct TrajectoryRow {
    long m = 0;
    Vec<double> t;
    double q_value = 0;     // |Q(h, h)|
    double hodge_norm = 0;  // Hodge norm of h at the sampled fiber
    double scaled_norm = 0; // euclidean norm of e(m) h, when a grading is available
    Vec<double> tk_norm;    // |T_k h|
    double f1_block = 0;    // norm of the bounded pairing block
    double pole_block = 0;  // largest pole block norm
    double congruence = 0;  // relative residual of h - b against F^0(z(m))
};

struct SixStepTrace {
    bool ran = false;
    double norm_margin = 0;       // max of |h|^2 - K - 4 |b|^2 over the window
    bool norm_bound_ok = false;
    bool w0_ok = false;           // h(m) lies in W_0 exactly on the tail
    bool h0_annihilated = false;  // T_1 kills the weight-zero part of the stable class
    double decay_rate = 0;        // fitted decay rate of |e(m) T_1 h(m)|
    bool decay_ok = false;
};

struct VerifyParams {
    Rational k_bound = Rational(10);
    long m_max = 10000;
    double fiber_tol = kFloatTol;
    double growth_threshold = 0.15;
    double congruence_tol = 1e-9;
    double limit_tol = 1e-6;
    HarmlessParams harmless;
};

struct DegenerationReport {
    std::vector<long> sample;   // samples retained for the statistics
    std::vector<long> dropped;  // samples whose fiber failed validation
    std::vector<TrajectoryRow> rows;

    bool pairing_ok = true;
    long pairing_fail_m = -1;
    bool congruence_ok = true;
    long congruence_fail_m = -1;
    HarmlessCertificate harmless;
    bool hypothesis_ok = false;
    std::string flag;

    bool has_grading = false;
    double q_growth = 0;
    double hodge_growth = 0;
    double scaled_growth = 0;
    double eps_growth = 0;
    bool q_bounded = true;
    bool hodge_bounded = true;
    bool scaled_bounded = true;
    bool indicators_agree = true;

    std::optional<Vec<Int>> position;  // lex-largest level with a nonzero tail component

    bool limit_checked = false;
    double limit_residual = 0;  // discrepancy of the stabilized graded pieces
    double limit_tail = 0;      // final norm of the off-level remainder of e(m) b(m)
    bool limit_ok = false;
    Vec<Complex> limit_vector;

    bool tail_constant = false;
    Vec<Int> stable_class;
    bool cone_annihilates = false;

    SixStepTrace trace;
};

// Checks the boundedness conclusions for a sampled class sequence h(m) with
// error sequence b(m).  The hypothesis (pairing bound, congruence
// h = b mod F^0(z(m)), harmless b) is verified on the window; failures flag
// the report, they do not abort it.  Gradings may be supplied; for a single
// direction the grading of the limit mixed Hodge structure is derived when it
// is rational.  Hodge norms are evaluated through the rescaled fiber
// e(m) Phi(z(m)) when a grading is present, which is an exact isometry and
// stays well conditioned along the whole ray.
inline DegenerationReport verify_degeneration(const GrowthSchedule& s, const PeriodNormalForm& p,
                                              ClassRule h, VectorRule b,
                                              std::vector<Matrix<Rational>> ys = {},
                                              VerifyParams params = {})
{
    DegenerationReport rep;
    const std::size_t dim = p.rank();
    const std::size_t d = s.dirs();
    params.harmless.m_max = params.m_max;
    const std::vector<long> samples = geometric_samples(params.m_max);

    if (ys.empty() && d == 1) {
        DeligneResult dr = deligne_splitting(weight_filtration({s.tk[0]}, {Rational(1)}), p.f);
        if (dr.ok) {
            Matrix<Rational> y(dim, dim);
            bool rational_y = true;
            for (std::size_t r = 0; r < dim && rational_y; ++r)
                for (std::size_t c = 0; c < dim && rational_y; ++c) {
                    const GQ& e = dr.mhs->y(r, c);
                    if (e.im != 0) rational_y = false;
                    else y(r, c) = e.re;
                }
            if (rational_y) ys = {y};
        }
    }
    std::optional<MultiGrading> grading;
    if (!ys.empty()) {
        std::vector<WeightFiltration> ws;
        for (std::size_t k = 0; k < d; ++k)
            ws.push_back(weight_filtration({s.tk[k]}, {Rational(1)}));
        grading = common_grading(ys, ws);
        for (const auto& y : ys)
            if (!is_infinitesimal_isometry(p.lat.q, y))
                throw validation_error("a grading operator is not an infinitesimal isometry "
                                       "of the pairing");
        rep.has_grading = true;
    }

    rep.harmless = harmless_decompose(s, b, params.harmless);

    std::vector<Matrix<Complex>> tkc;
    for (const auto& tm : s.tk) tkc.push_back(to_complex_matrix(tm));
    const double kd = to_double(params.k_bound);

    std::vector<double> t1, qvals, hvals, svals, evals, margins;
    std::vector<Vec<double>> tms;
    std::vector<Vec<Int>> series;
    for (long m : samples) {
        Vec<Int> hm = h(m);
        if (hm.size() != dim) throw validation_error("class rule has the wrong arity");
        Vec<Complex> bm = b(m);
        if (bm.size() != dim) throw validation_error("error rule has the wrong arity");

        Vec<Rational> hq = detail::rational_vec(hm);
        Rational qq = bilinear(p.lat.q, hq, hq);
        Rational aq = qq < 0 ? -qq : qq;
        if (aq > params.k_bound && rep.pairing_ok) {
            rep.pairing_ok = false;
            rep.pairing_fail_m = m;
        }

        Vec<double> tm = s.times(m);
        Vec<Complex> zm = s.z(m);
        Matrix<Complex> carrier = period_factor(p, zm, disk_coordinates(zm));
        HodgeFiltration<Complex> filt = orbit_filtration(p, carrier);
        Vec<Complex> hc = to_complex_vec(hq);

        TrajectoryRow row;
        row.m = m;
        row.t = tm;
        row.q_value = std::abs(to_double(qq));
        for (std::size_t k = 0; k < d; ++k) row.tk_norm.push_back(vec_norm(matvec(tkc[k], hc)));
        EpsilonTildeRecord eps = epsilon_tilde(p, zm, hm);
        row.f1_block = vec_norm(eps.f1_block);
        for (const auto& block : eps.pole_blocks)
            row.pole_block = std::max(row.pole_block, vec_norm(block));

        Vec<Complex> x = vec_sub(hc, bm);
        row.congruence =
            detail::projection_residual(x, detail::onb_rows(filt.at(0).basis())) /
            std::max(1.0, vec_norm(x));
        if (row.congruence > params.congruence_tol && rep.congruence_ok) {
            rep.congruence_ok = false;
            rep.congruence_fail_m = m;
        }

        bool fiber_ok = false;
        double hn = 0, bn2 = 0, sn = 0;
        if (grading) {
            Matrix<Complex> em = scaling_operator(*grading, tm);
            HodgeFiltration<Complex> scaled = detail::scaled_filtration(filt, em);
            auto val = validate_polarized_hs(p.lat, scaled, params.fiber_tol);
            if (val.ok) {
                Vec<Complex> eh = matvec(em, hc);
                hn = std::sqrt(std::abs(hodge_norm2(*val.hs, eh).real()));
                bn2 = std::abs(hodge_norm2(*val.hs, matvec(em, bm)).real());
                sn = vec_norm(eh);
                fiber_ok = true;
            }
        } else {
            auto val = validate_polarized_hs(p.lat, filt, params.fiber_tol);
            if (val.ok) {
                hn = std::sqrt(std::abs(hodge_norm2(*val.hs, hc).real()));
                bn2 = std::abs(hodge_norm2(*val.hs, bm).real());
                fiber_ok = true;
            }
        }
        if (!fiber_ok) {
            rep.dropped.push_back(m);
            continue;
        }
        row.hodge_norm = hn;
        row.scaled_norm = sn;
        rep.rows.push_back(row);
        rep.sample.push_back(m);
        series.push_back(std::move(hm));
        tms.push_back(tm);
        t1.push_back(tm[0]);
        qvals.push_back(row.q_value);
        hvals.push_back(hn);
        svals.push_back(sn);
        evals.push_back(row.f1_block);
        margins.push_back(hn * hn - kd - 4 * bn2);
    }
    if (rep.sample.size() < 2)
        throw validation_error("too few usable samples: the sampled fibers failed validation");

    std::string why;
    auto add_reason = [&why](const std::string& r) {
        if (!why.empty()) why += "; ";
        why += r;
    };
    if (!rep.pairing_ok)
        add_reason("the pairing bound fails at m=" + std::to_string(rep.pairing_fail_m));
    if (!rep.congruence_ok)
        add_reason("the congruence against F^0(z(m)) fails at m=" +
                   std::to_string(rep.congruence_fail_m));
    if (!rep.harmless.ok)
        add_reason("the error sequence is not harmless (" + rep.harmless.diagnostic + ")");
    rep.hypothesis_ok = why.empty();
    rep.flag = rep.hypothesis_ok ? "hypothesis holds on the sampled window"
                                 : "hypothesis not satisfied - no conclusion: " + why;

    rep.q_growth = detail::growth_exponent(t1, qvals);
    rep.hodge_growth = detail::growth_exponent(t1, hvals);
    rep.eps_growth = detail::growth_exponent(t1, evals);
    rep.q_bounded = rep.q_growth < params.growth_threshold;
    rep.hodge_bounded = rep.hodge_growth < params.growth_threshold;
    if (grading) {
        rep.scaled_growth = detail::growth_exponent(t1, svals);
        rep.scaled_bounded = rep.scaled_growth < params.growth_threshold;
        rep.indicators_agree = rep.q_bounded == rep.hodge_bounded &&
                               rep.q_bounded == rep.scaled_bounded;
    } else {
        rep.indicators_agree = rep.q_bounded == rep.hodge_bounded;
    }

    const std::size_t tail = rep.sample.size() / 2;
    if (grading) {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < grading->level.size(); ++i) {
            bool seen = false;
            for (std::size_t j = tail; j < series.size() && !seen; ++j)
                seen = !vec_is_zero(matvec(grading->projector[i],
                                           detail::rational_vec(series[j])));
            if (!seen) continue;
            if (!best || std::lexicographical_compare(grading->level[*best].begin(),
                                                      grading->level[*best].end(),
                                                      grading->level[i].begin(),
                                                      grading->level[i].end()))
                best = i;
        }
        if (best) rep.position = grading->level[*best];
    }

    // Limit formula for the error: lim e(m) b(m) equals the limit of the
    // grade-zero piece of b_d(m).  The grade-zero pieces of both sides are
    // compared at the end of the window; the off-level remainder of
    // e(m) b(m) converges at a polynomial rate, so it is checked as a
    // non-increasing tail rather than against the tolerance.
    if (grading && rep.harmless.sample.size() >= 2) {
        auto zero_idx = grading->index_of(Vec<Int>(d, Int(0)));
        Matrix<Complex> p0 = zero_idx ? to_complex_matrix(grading->projector[*zero_idx])
                                      : Matrix<Complex>(dim, dim);
        std::vector<double> off;
        for (std::size_t i = 0; i < rep.harmless.sample.size(); ++i) {
            long m = rep.harmless.sample[i];
            Vec<Complex> bm = b(m);
            Vec<Complex> eb = matvec(scaling_operator(*grading, s.times(m)), bm);
            Vec<Complex> target = matvec(p0, rep.harmless.parts[i].back());
            off.push_back(vec_norm(vec_sub(eb, target)));
            if (i + 1 == rep.harmless.sample.size()) {
                rep.limit_residual = vec_norm(vec_sub(matvec(p0, bm), target));
                rep.limit_vector = std::move(target);
            }
        }
        bool settles = true;
        for (std::size_t i = off.size() / 2; i + 1 < off.size(); ++i)
            if (off[i + 1] > off[i] + params.limit_tol) settles = false;
        rep.limit_tail = off.back();
        rep.limit_checked = true;
        rep.limit_ok = rep.limit_residual < params.limit_tol &&
                       (settles || rep.limit_tail < params.limit_tol);
    }

    rep.tail_constant = true;
    for (std::size_t j = tail + 1; j < series.size(); ++j)
        if (!(series[j] == series[tail])) {
            rep.tail_constant = false;
            break;
        }
    if (rep.tail_constant) {
        rep.stable_class = series[tail];
        rep.cone_annihilates = true;
        Vec<Rational> hq = detail::rational_vec(rep.stable_class);
        for (const auto& tk : s.tk)
            if (!vec_is_zero(matvec(tk, hq))) {
                rep.cone_annihilates = false;
                break;
            }
    }

    if (p.vars() == 1 && grading) {
        SixStepTrace& tr = rep.trace;
        tr.ran = true;
        tr.norm_margin = -std::numeric_limits<double>::infinity();
        for (double mg : margins) tr.norm_margin = std::max(tr.norm_margin, mg);
        tr.norm_bound_ok = tr.norm_margin <= 1e-6;
        Subspace<Rational> w0 = weight_filtration(p.ops, {Rational(1)}).at(0);
        tr.w0_ok = true;
        for (std::size_t j = tail; j < series.size(); ++j)
            if (!w0.contains(detail::rational_vec(series[j]))) {
                tr.w0_ok = false;
                break;
            }
        if (rep.tail_constant) {
            auto idx = grading->index_of(Vec<Int>(1, Int(0)));
            if (idx) {
                Vec<Rational> h0 = matvec(grading->projector[*idx],
                                          detail::rational_vec(rep.stable_class));
                tr.h0_annihilated = vec_is_zero(matvec(s.tk[0], h0));
            } else {
                tr.h0_annihilated = true;
            }
        }
        std::vector<double> xs, ds;
        bool all_zero = true;
        for (std::size_t i = 0; i < series.size(); ++i) {
            Vec<Complex> th = matvec(tkc[0], to_complex_vec(detail::rational_vec(series[i])));
            double g = vec_norm(matvec(scaling_operator(*grading, tms[i]), th));
            if (g > 1e-300) {
                all_zero = false;
                xs.push_back(tms[i][0]);
                ds.push_back(std::log(g));
            }
        }
        if (all_zero) {
            tr.decay_rate = std::numeric_limits<double>::infinity();
            tr.decay_ok = true;
        } else {
            tr.decay_rate = -detail::fit_line(xs, ds).slope;
            tr.decay_ok = xs.size() >= 2 && tr.decay_rate >= params.harmless.alpha_min;
        }
    }
    return rep;
}

enum class TransportKind { exp_zn, exp_gamma, subquotient };

// Pushes a certified harmless sequence through the operators that appear
// along the ray: e^{sum z_j(m) N_j}, the twist e^{Gamma(s(m))}, or the
// orthogonal projection onto a weight level of a marked variable subset.
// The transported sequence is re-certified, which may fit a smaller rate.
// The subquotient transport requires the twist to be independent of the
// marked variables, and its components must land in the marked weight level.
inline HarmlessCertificate harmless_transport(const GrowthSchedule& s, const PeriodNormalForm& p,
                                              const HarmlessCertificate& cert, TransportKind kind,
                                              const std::set<std::size_t>& marked = {},
                                              int w_level = 0, const HarmlessParams& params = {})
{
    if (!cert.rule) throw validation_error("the certificate does not carry an evaluable rule");
    const VectorRule base = cert.rule;

    if (kind == TransportKind::exp_zn) {
        GrowthSchedule sc = s;
        PeriodNormalForm pc = p;
        VectorRule next = [base, sc, pc](long m) {
            Vec<Complex> zm = sc.z(m);
            Matrix<Complex> nz(pc.rank(), pc.rank());
            for (std::size_t j = 0; j < pc.vars(); ++j) {
                Matrix<Complex> nj = to_complex_matrix(pc.ops[j]);
                for (std::size_t r = 0; r < nz.rows(); ++r)
                    for (std::size_t c = 0; c < nz.cols(); ++c) nz(r, c) += zm[j] * nj(r, c);
            }
            return matvec(exp_nilpotent(nz), base(m));
        };
        return harmless_decompose(s, next, params);
    }
    if (kind == TransportKind::exp_gamma) {
        GrowthSchedule sc = s;
        PeriodNormalForm pc = p;
        VectorRule next = [base, sc, pc](long m) {
            Matrix<Complex> g = gamma_value(pc, disk_coordinates(sc.z(m)));
            return matvec(exp_nilpotent(g), base(m));
        };
        return harmless_decompose(s, next, params);
    }

    if (marked.empty())
        throw validation_error("the subquotient transport needs a marked variable set");
    for (std::size_t j : marked)
        if (j >= p.vars()) throw validation_error("marked variable index is out of range");
    for (const auto& term : p.gamma) {
        if (term.coeff.is_zero()) continue;
        for (std::size_t j : marked)
            if (term.exponent[j] != 0)
                throw validation_error("the normal form still depends on a marked variable");
    }
    std::vector<Matrix<Rational>> ops;
    for (std::size_t j : marked) ops.push_back(p.ops[j]);
    Subspace<Rational> w =
        weight_filtration(ops, std::vector<Rational>(ops.size(), Rational(1))).at(w_level);
    Matrix<Complex> proj = to_complex_matrix(detail::orthogonal_projector(w));
    VectorRule next = [base, proj](long m) { return matvec(proj, base(m)); };
    HarmlessCertificate out = harmless_decompose(s, next, params);
    Subspace<Complex> wc = Subspace<Complex>::from_rows(to_complex_matrix(w.basis()));
    for (const auto& comps : out.parts)
        for (const auto& part : comps)
            if (!wc.contains(part, 1e-8)) {
                out.ok = false;
                out.diagnostic = "transported components leave the marked weight level";
                return out;
            }
    return out;
}

inline std::string trajectory_csv(const DegenerationReport& r)
{
    std::ostringstream os;
    os << std::setprecision(17);
    const std::size_t d = r.rows.empty() ? 0 : r.rows[0].t.size();
    os << "m";
    for (std::size_t k = 0; k < d; ++k) os << ",t" << k + 1;
    os << ",q,hodge,scaled";
    for (std::size_t k = 0; k < d; ++k) os << ",T" << k + 1 << "h";
    os << ",f1,pole,congruence\n";
    for (const auto& row : r.rows) {
        os << row.m;
        for (double t : row.t) os << "," << t;
        os << "," << row.q_value << "," << row.hodge_norm << "," << row.scaled_norm;
        for (double t : row.tk_norm) os << "," << t;
        os << "," << row.f1_block << "," << row.pole_block << "," << row.congruence << "\n";
    }
    return os.str();
}

} // namespace hodge
