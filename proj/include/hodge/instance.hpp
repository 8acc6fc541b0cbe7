#pragma once

// Instance files: one JSON document describing a polarized lattice, a
// filtration over Q(i), monodromy and twist data, and optionally a growth
// schedule, sampled class/error sequences, split data and tool parameters.
// Exact rationals travel as "p/q" strings, Gaussian rationals as
// {"re": "p/q", "im": "p/q"} objects.  Parse failures name the offending
// field.

#include "hodge/degeneration_lab.hpp"

#include <json.hpp>

#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace hodge {

using Json = nlohmann::json;

inline std::string rational_string(const Rational& x)
{
    std::ostringstream os;
    os << num(x);
    if (den(x) != 1) os << "/" << den(x);
    return os.str();
}

inline Json gq_json(const GQ& z)
{
    return Json{{"re", rational_string(z.re)}, {"im", rational_string(z.im)}};
}

inline Json complex_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

inline Json rational_matrix_json(const Matrix<Rational>& m)
{
    Json rows = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(rational_string(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Json gq_matrix_json(const Matrix<GQ>& m)
{
    Json rows = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(gq_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Json int_vec_json(const Vec<Int>& v)
{
    Json out = Json::array();
    for (const auto& x : v) out.push_back(x.convert_to<long long>());
    return out;
}

namespace detail {

inline Int parse_integer(const Json& v, const std::string& where)
{
    try {
        if (v.is_number_integer()) return Int(v.get<long long>());
        if (v.is_string()) return Int(v.get<std::string>());
    } catch (const std::exception&) {
    }
    throw validation_error(where + ": expected an integer");
}

inline Rational parse_rational(const Json& v, const std::string& where)
{
    if (v.is_number_integer()) return Rational(v.get<long long>());
    if (!v.is_string())
        throw validation_error(where + ": expected a rational \"p/q\" string");
    const std::string s = v.get<std::string>();
    try {
        auto slash = s.find('/');
        if (slash == std::string::npos) return Rational(Int(s));
        Int nu(s.substr(0, slash));
        Int de(s.substr(slash + 1));
        if (de == 0) throw std::runtime_error("zero denominator");
        return Rational(nu, de);
    } catch (const std::exception&) {
        throw validation_error(where + ": malformed rational \"" + s + "\"");
    }
}

inline GQ parse_gq(const Json& v, const std::string& where)
{
    if (v.is_object()) {
        GQ out;
        if (v.contains("re")) out.re = parse_rational(v.at("re"), where + ".re");
        if (v.contains("im")) out.im = parse_rational(v.at("im"), where + ".im");
        return out;
    }
    return GQ(parse_rational(v, where));
}

inline const Json& expect_array(const Json& v, std::size_t len, const std::string& where)
{
    if (!v.is_array() || v.size() != len)
        throw validation_error(where + ": expected an array of length " + std::to_string(len));
    return v;
}

inline Matrix<Rational> parse_rational_matrix(const Json& v, std::size_t r, std::size_t c,
                                              const std::string& where)
{
    expect_array(v, r, where);
    Matrix<Rational> m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
        const Json& row = v.at(i);
        expect_array(row, c, where + "[" + std::to_string(i) + "]");
        for (std::size_t j = 0; j < c; ++j)
            m(i, j) = parse_rational(row.at(j),
                                     where + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
    }
    return m;
}

inline Matrix<GQ> parse_gq_matrix(const Json& v, std::size_t r, std::size_t c,
                                  const std::string& where)
{
    expect_array(v, r, where);
    Matrix<GQ> m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
        const Json& row = v.at(i);
        expect_array(row, c, where + "[" + std::to_string(i) + "]");
        for (std::size_t j = 0; j < c; ++j)
            m(i, j) = parse_gq(row.at(j),
                               where + "[" + std::to_string(i) + "][" + std::to_string(j) + "]");
    }
    return m;
}

inline HodgeFiltration<GQ> parse_filtration(const Json& v, std::size_t rank,
                                            const std::string& where)
{
    if (!v.is_object() || !v.contains("lo") || !v.contains("levels"))
        throw validation_error(where + ": expected {lo, levels}");
    if (!v.at("lo").is_number_integer())
        throw validation_error(where + ".lo: expected an integer");
    int lo = v.at("lo").get<int>();
    const Json& levels = v.at("levels");
    if (!levels.is_array() || levels.empty())
        throw validation_error(where + ".levels: expected a nonempty array");
    std::vector<Subspace<GQ>> pieces;
    for (std::size_t l = 0; l < levels.size(); ++l) {
        const Json& rows = levels.at(l);
        std::string here = where + ".levels[" + std::to_string(l) + "]";
        if (!rows.is_array()) throw validation_error(here + ": expected an array of rows");
        Matrix<GQ> m(rows.size(), rank);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const Json& row = rows.at(i);
            expect_array(row, rank, here + "[" + std::to_string(i) + "]");
            for (std::size_t j = 0; j < rank; ++j)
                m(i, j) = parse_gq(row.at(j), here + "[" + std::to_string(i) + "][" +
                                                  std::to_string(j) + "]");
        }
        pieces.push_back(Subspace<GQ>::from_rows(std::move(m)));
    }
    return HodgeFiltration<GQ>::from_pieces(lo, std::move(pieces), rank);
}

} // namespace detail

struct InstanceParameters {
    Rational k_bound = Rational(10);
    Rational r_bound = Rational(2);
    double alpha_min = 1e-3;
    long m_max = 10000;
    int degree_cap = 8;
    long a_max = 20;
};

struct ScheduleSpec {
    Matrix<Rational> a;
    std::vector<long> t_exponent;  // t_k(m) = m^{e_k}
    Vec<GQ> w_value;
    std::vector<bool> w_over_m;    // entry j is w_j / m instead of w_j
};

struct SequenceSpec {
    Vec<Int> h_class;
    std::string h_scale = "1";  // "1" or "m"
    Vec<GQ> b_value;
    std::string b_scale = "1";  // "1", "m" or "exp(-m)"
};

struct Instance {
    int schema = 1;
    PeriodNormalForm form;
    std::vector<Matrix<Rational>> yk;
    std::optional<HodgeFiltration<GQ>> f_hat;
    std::vector<Matrix<Rational>> t_hat;
    std::optional<ScheduleSpec> schedule;
    std::optional<SequenceSpec> sequences;
    InstanceParameters params;

    Vec<Complex> base_point() const
    {
        return Vec<Complex>(form.vars(), Complex(0, 1));
    }
};

inline Instance parse_instance(const Json& doc)
{
    if (!doc.is_object()) throw validation_error("instance: expected a JSON object");
    if (doc.contains("schema") && doc.at("schema") != 1)
        throw validation_error("instance.schema: only version 1 is supported");
    if (!doc.contains("rank") || !doc.at("rank").is_number_integer())
        throw validation_error("instance.rank: expected an integer");
    const long rank_l = doc.at("rank").get<long>();
    if (rank_l < 1) throw validation_error("instance.rank: must be positive");
    const std::size_t rank = std::size_t(rank_l);

    Instance inst;
    inst.form.lat.rank = rank;
    if (!doc.contains("Q")) throw validation_error("instance.Q: missing");
    inst.form.lat.q = detail::parse_rational_matrix(doc.at("Q"), rank, rank, "instance.Q");
    if (std::string msg = inst.form.lat.validate(); !msg.empty())
        throw validation_error("instance.Q: " + msg);

    if (!doc.contains("F")) throw validation_error("instance.F: missing");
    inst.form.f = detail::parse_filtration(doc.at("F"), rank, "instance.F");

    if (!doc.contains("N") || !doc.at("N").is_array() || doc.at("N").empty())
        throw validation_error("instance.N: expected a nonempty array of matrices");
    for (std::size_t k = 0; k < doc.at("N").size(); ++k)
        inst.form.ops.push_back(detail::parse_rational_matrix(
            doc.at("N").at(k), rank, rank, "instance.N[" + std::to_string(k) + "]"));
    const std::size_t vars = inst.form.ops.size();

    if (doc.contains("Gamma")) {
        const Json& gs = doc.at("Gamma");
        if (!gs.is_array()) throw validation_error("instance.Gamma: expected an array");
        for (std::size_t t = 0; t < gs.size(); ++t) {
            const Json& term = gs.at(t);
            std::string here = "instance.Gamma[" + std::to_string(t) + "]";
            if (!term.is_object() || !term.contains("exponent") || !term.contains("coeff"))
                throw validation_error(here + ": expected {exponent, coeff}");
            detail::expect_array(term.at("exponent"), vars, here + ".exponent");
            GammaTerm g;
            for (std::size_t j = 0; j < vars; ++j) {
                Int e = detail::parse_integer(term.at("exponent").at(j),
                                              here + ".exponent[" + std::to_string(j) + "]");
                if (e < 0) throw validation_error(here + ".exponent: must be nonnegative");
                g.exponent.push_back(int(e.convert_to<long>()));
            }
            g.coeff = detail::parse_gq_matrix(term.at("coeff"), rank, rank, here + ".coeff");
            inst.form.gamma.push_back(std::move(g));
        }
    }

    if (doc.contains("Yk")) {
        const Json& ys = doc.at("Yk");
        if (!ys.is_array()) throw validation_error("instance.Yk: expected an array");
        for (std::size_t k = 0; k < ys.size(); ++k)
            inst.yk.push_back(detail::parse_rational_matrix(
                ys.at(k), rank, rank, "instance.Yk[" + std::to_string(k) + "]"));
    }
    if (doc.contains("F_hat"))
        inst.f_hat = detail::parse_filtration(doc.at("F_hat"), rank, "instance.F_hat");
    if (doc.contains("T_hat")) {
        const Json& ts = doc.at("T_hat");
        if (!ts.is_array()) throw validation_error("instance.T_hat: expected an array");
        for (std::size_t k = 0; k < ts.size(); ++k)
            inst.t_hat.push_back(detail::parse_rational_matrix(
                ts.at(k), rank, rank, "instance.T_hat[" + std::to_string(k) + "]"));
    }

    if (doc.contains("schedule")) {
        const Json& sc = doc.at("schedule");
        if (!sc.is_object() || !sc.contains("A") || !sc.contains("t_rule") ||
            !sc.contains("w_rule"))
            throw validation_error("instance.schedule: expected {A, t_rule, w_rule}");
        ScheduleSpec spec;
        const Json& a = sc.at("A");
        if (!a.is_array() || a.empty() || !a.at(0).is_array() || a.at(0).empty())
            throw validation_error("instance.schedule.A: expected a nonempty matrix");
        const std::size_t dirs = a.at(0).size();
        spec.a = detail::parse_rational_matrix(a, vars, dirs, "instance.schedule.A");
        const Json& tr = sc.at("t_rule");
        detail::expect_array(tr, dirs, "instance.schedule.t_rule");
        for (std::size_t k = 0; k < dirs; ++k) {
            std::string here = "instance.schedule.t_rule[" + std::to_string(k) + "]";
            if (!tr.at(k).is_string()) throw validation_error(here + ": expected \"m\" or \"m^k\"");
            std::string s = tr.at(k).get<std::string>();
            long e = 0;
            if (s == "m") e = 1;
            else if (s.rfind("m^", 0) == 0) {
                try {
                    e = std::stol(s.substr(2));
                } catch (const std::exception&) {
                    e = 0;
                }
            }
            if (e < 1) throw validation_error(here + ": expected \"m\" or \"m^k\" with k >= 1");
            spec.t_exponent.push_back(e);
        }
        const Json& wr = sc.at("w_rule");
        detail::expect_array(wr, vars, "instance.schedule.w_rule");
        for (std::size_t j = 0; j < vars; ++j) {
            std::string here = "instance.schedule.w_rule[" + std::to_string(j) + "]";
            spec.w_value.push_back(detail::parse_gq(wr.at(j), here));
            bool over = wr.at(j).is_object() && wr.at(j).contains("over_m") &&
                        wr.at(j).at("over_m").is_boolean() && wr.at(j).at("over_m").get<bool>();
            spec.w_over_m.push_back(over);
        }
        inst.schedule = std::move(spec);
    }

    if (doc.contains("sequences")) {
        const Json& sq = doc.at("sequences");
        if (!sq.is_object()) throw validation_error("instance.sequences: expected an object");
        SequenceSpec spec;
        if (sq.contains("h_rule")) {
            detail::expect_array(sq.at("h_rule"), rank, "instance.sequences.h_rule");
            for (std::size_t i = 0; i < rank; ++i)
                spec.h_class.push_back(detail::parse_integer(
                    sq.at("h_rule").at(i), "instance.sequences.h_rule[" + std::to_string(i) + "]"));
        }
        if (sq.contains("h_scale")) {
            spec.h_scale = sq.at("h_scale").get<std::string>();
            if (spec.h_scale != "1" && spec.h_scale != "m")
                throw validation_error("instance.sequences.h_scale: expected \"1\" or \"m\"");
        }
        if (sq.contains("b_rule")) {
            detail::expect_array(sq.at("b_rule"), rank, "instance.sequences.b_rule");
            for (std::size_t i = 0; i < rank; ++i)
                spec.b_value.push_back(detail::parse_gq(
                    sq.at("b_rule").at(i), "instance.sequences.b_rule[" + std::to_string(i) + "]"));
        }
        if (sq.contains("b_scale")) {
            spec.b_scale = sq.at("b_scale").get<std::string>();
            if (spec.b_scale != "1" && spec.b_scale != "m" && spec.b_scale != "exp(-m)")
                throw validation_error(
                    "instance.sequences.b_scale: expected \"1\", \"m\" or \"exp(-m)\"");
        }
        inst.sequences = std::move(spec);
    }

    if (doc.contains("parameters")) {
        const Json& pm = doc.at("parameters");
        if (!pm.is_object()) throw validation_error("instance.parameters: expected an object");
        if (pm.contains("K"))
            inst.params.k_bound = detail::parse_rational(pm.at("K"), "instance.parameters.K");
        if (pm.contains("R"))
            inst.params.r_bound = detail::parse_rational(pm.at("R"), "instance.parameters.R");
        if (pm.contains("alpha_min")) {
            if (!pm.at("alpha_min").is_number())
                throw validation_error("instance.parameters.alpha_min: expected a number");
            inst.params.alpha_min = pm.at("alpha_min").get<double>();
        }
        if (pm.contains("m_max")) {
            if (!pm.at("m_max").is_number_integer() || pm.at("m_max").get<long>() < 1)
                throw validation_error("instance.parameters.m_max: expected a positive integer");
            inst.params.m_max = pm.at("m_max").get<long>();
        }
        if (pm.contains("degree_cap")) {
            if (!pm.at("degree_cap").is_number_integer())
                throw validation_error("instance.parameters.degree_cap: expected an integer");
            inst.params.degree_cap = pm.at("degree_cap").get<int>();
        }
        if (pm.contains("a_max")) {
            if (!pm.at("a_max").is_number_integer() || pm.at("a_max").get<long>() < 1)
                throw validation_error("instance.parameters.a_max: expected a positive integer");
            inst.params.a_max = pm.at("a_max").get<long>();
        }
    }
    return inst;
}

inline Instance load_instance(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open instance file " + path);
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw validation_error(path + ": " + e.what());
    }
    return parse_instance(doc);
}

inline TimeRule make_time_rule(const ScheduleSpec& spec)
{
    std::vector<long> exps = spec.t_exponent;
    return [exps](long m) {
        Vec<double> out;
        for (long e : exps) out.push_back(std::pow(double(m), double(e)));
        return out;
    };
}

inline PointRule make_point_rule(const ScheduleSpec& spec)
{
    Vec<Complex> w;
    for (const auto& z : spec.w_value) w.push_back(to_complex(z));
    std::vector<bool> over = spec.w_over_m;
    return [w, over](long m) {
        Vec<Complex> out = w;
        for (std::size_t j = 0; j < out.size(); ++j)
            if (over[j]) out[j] /= double(m);
        return out;
    };
}

inline ClassRule make_class_rule(const SequenceSpec& spec)
{
    Vec<Int> h = spec.h_class;
    bool scaled = spec.h_scale == "m";
    return [h, scaled](long m) {
        Vec<Int> out = h;
        if (scaled)
            for (auto& x : out) x *= m;
        return out;
    };
}

inline VectorRule make_vector_rule(const SequenceSpec& spec)
{
    Vec<Complex> b;
    for (const auto& z : spec.b_value) b.push_back(to_complex(z));
    std::string scale = spec.b_scale;
    return [b, scale](long m) {
        double f = 1.0;
        if (scale == "m") f = double(m);
        else if (scale == "exp(-m)") f = std::exp(double(-m));
        Vec<Complex> out = b;
        for (auto& x : out) x *= f;
        return out;
    };
}

} // namespace hodge
