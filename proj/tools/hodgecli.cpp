// Batch tool over instance files: structural validation, weight filtrations,
// Deligne splittings, Hodge norms, class enumeration, closure systems, limit
// candidates, and sampled degeneration runs.  All output is deterministic
// for a fixed instance and seed; exact values print as "p/q" strings and
// complex floats as [re, im] pairs.

#include "hodge/instance.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace hodge;

namespace {

struct Options {
    std::string instance_path;
    std::string out_dir;
    std::string format = "text";
    long seed = 0;
    long m_max = 0;    // 0: use the instance value
    double tol = 0;    // 0: use the library default
    std::string k_bound;
};

void add_common(CLI::App* sub, Options& opt)
{
    sub->add_option("--instance", opt.instance_path, "instance JSON file")->required();
    sub->add_option("--out", opt.out_dir, "directory for report artifacts");
    sub->add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"json", "csv", "text"}));
    sub->add_option("--seed", opt.seed, "seed echoed into the report");
    sub->add_option("--m-max", opt.m_max, "override the sample horizon");
    sub->add_option("--tol", opt.tol, "override the fiber tolerance");
    sub->add_option("-K,--pairing-bound", opt.k_bound, "override the pairing bound");
}

Rational effective_k(const Instance& inst, const Options& opt)
{
    if (opt.k_bound.empty()) return inst.params.k_bound;
    return hodge::detail::parse_rational(Json(opt.k_bound), "-K");
}

double effective_tol(const Options& opt) { return opt.tol > 0 ? opt.tol : kFloatTol; }

long effective_m_max(const Instance& inst, const Options& opt)
{
    return opt.m_max > 0 ? opt.m_max : inst.params.m_max;
}

void write_artifact(const Options& opt, const std::string& name, const std::string& body)
{
    if (opt.out_dir.empty()) return;
    std::filesystem::create_directories(opt.out_dir);
    std::ofstream out(std::filesystem::path(opt.out_dir) / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + name + " under " + opt.out_dir);
    out << body;
}

void emit(const Options& opt, const Json& report, const std::string& text)
{
    if (opt.format == "json") std::cout << report.dump(2) << "\n";
    else std::cout << text;
    write_artifact(opt, "report.json", report.dump(2) + "\n");
}

// The exact fiber over the base point, available when the twist is trivial.
std::optional<HodgeValidation<GQ>> exact_fiber(const Instance& inst)
{
    if (!inst.form.gamma.empty()) return std::nullopt;
    Vec<GQ> z(inst.form.vars(), GQ(Rational(0), Rational(1)));
    Vec<GQ> s(inst.form.vars(), GQ(0));
    Matrix<GQ> carrier = period_factor(inst.form, z, s);
    return validate_polarized_hs(inst.form.lat, orbit_filtration(inst.form, carrier));
}

HodgeValidation<Complex> float_fiber(const Instance& inst, double tol)
{
    Vec<Complex> z = inst.base_point();
    Matrix<Complex> carrier = period_factor(inst.form, z, disk_coordinates(z));
    return validate_polarized_hs(inst.form.lat, orbit_filtration(inst.form, carrier), tol);
}

int cmd_validate(const Instance& inst, const Options& opt)
{
    auto val = float_fiber(inst, effective_tol(opt));
    Json report{{"schema", 1},
                {"command", "validate"},
                {"seed", opt.seed},
                {"ok", val.ok},
                {"diagnostic", val.diagnostic}};
    Json hn = Json::object();
    for (auto& [p, d] : val.hodge_numbers) hn[std::to_string(p)] = d;
    report["hodge_numbers"] = hn;
    std::ostringstream text;
    if (val.ok) {
        text << "valid polarized HS\n";
        for (auto& [p, d] : val.hodge_numbers)
            text << "  h(" << p << "," << -p << ") = " << d << "\n";
    } else {
        text << "invalid: " << val.diagnostic << "\n";
    }
    emit(opt, report, text.str());
    return val.ok ? 0 : 2;
}

int cmd_wf(const Instance& inst, const Options& opt)
{
    WeightFiltration w = weight_filtration(
        inst.form.ops, std::vector<Rational>(inst.form.vars(), Rational(1)));
    Json report{{"schema", 1}, {"command", "wf"}, {"seed", opt.seed}, {"lo", w.lo}, {"hi", w.hi}};
    Json levels = Json::array();
    std::ostringstream text;
    text << "weight filtration of the coefficient-sum operator\n";
    for (int k = w.lo; k <= w.hi; ++k) {
        Subspace<Rational> piece = w.at(k);
        levels.push_back(Json{{"level", k},
                              {"dim", piece.dim()},
                              {"basis", rational_matrix_json(piece.basis())}});
        text << "  W_" << k << ": dim " << piece.dim() << "\n";
    }
    report["levels"] = levels;
    emit(opt, report, text.str());
    return 0;
}

int cmd_deligne(const Instance& inst, const Options& opt)
{
    WeightFiltration w = weight_filtration(
        inst.form.ops, std::vector<Rational>(inst.form.vars(), Rational(1)));
    DeligneResult dr = deligne_splitting(w, inst.form.f);
    Json report{{"schema", 1},
                {"command", "deligne"},
                {"seed", opt.seed},
                {"ok", dr.ok},
                {"diagnostic", dr.diagnostic}};
    std::ostringstream text;
    if (!dr.ok) {
        text << "no splitting: " << dr.diagnostic << "\n";
        emit(opt, report, text.str());
        return 2;
    }
    const MixedHodgeData& md = *dr.mhs;
    Json pieces = Json::array();
    text << (md.r_split ? "splitting is defined over R\n" : "splitting is not R-split\n");
    for (const auto& pc : md.pieces) {
        pieces.push_back(Json{{"p", pc.p}, {"q", pc.q}, {"dim", pc.space.dim()}});
        text << "  I(" << pc.p << "," << pc.q << "): dim " << pc.space.dim() << "\n";
    }
    report["pieces"] = pieces;
    report["r_split"] = md.r_split;
    report["y"] = gq_matrix_json(md.y);
    emit(opt, report, text.str());
    return 0;
}

int cmd_norm(const Instance& inst, const Options& opt)
{
    Json report{{"schema", 1}, {"command", "norm"}, {"seed", opt.seed}};
    std::ostringstream text;
    const std::size_t n = inst.form.rank();
    if (auto exact = exact_fiber(inst)) {
        if (!exact->ok) {
            report["ok"] = false;
            report["diagnostic"] = exact->diagnostic;
            emit(opt, report, "invalid fiber: " + exact->diagnostic + "\n");
            return 2;
        }
        Json norms = Json::array();
        text << "Hodge norms over the base point (exact)\n";
        for (std::size_t j = 0; j < n; ++j) {
            Vec<GQ> ej(n, GQ(0));
            ej[j] = GQ(1);
            GQ n2 = hodge_norm2(*exact->hs, ej);
            norms.push_back(rational_string(n2.re));
            text << "  |e" << j << "|^2 = " << rational_string(n2.re) << "\n";
        }
        report["ok"] = true;
        report["exact"] = true;
        report["norm2"] = norms;
    } else {
        auto val = float_fiber(inst, effective_tol(opt));
        if (!val.ok) {
            report["ok"] = false;
            report["diagnostic"] = val.diagnostic;
            emit(opt, report, "invalid fiber: " + val.diagnostic + "\n");
            return 2;
        }
        Json norms = Json::array();
        text << "Hodge norms over the base point (float: twisted instance)\n";
        std::ostringstream line;
        line << std::setprecision(17);
        for (std::size_t j = 0; j < n; ++j) {
            Vec<Complex> ej(n, Complex(0));
            ej[j] = Complex(1, 0);
            double n2 = std::abs(hodge_norm2(*val.hs, ej).real());
            norms.push_back(n2);
            line.str("");
            line << n2;
            text << "  |e" << j << "|^2 = " << line.str() << "\n";
        }
        report["ok"] = true;
        report["exact"] = false;
        report["norm2"] = norms;
    }
    emit(opt, report, text.str());
    return 0;
}

int cmd_enumerate(const Instance& inst, const Options& opt)
{
    auto exact = exact_fiber(inst);
    if (!exact)
        throw validation_error("enumeration needs a twist-free instance (Gamma = [])");
    if (!exact->ok) throw validation_error("base fiber is not polarized: " + exact->diagnostic);
    Rational k = effective_k(inst, opt);
    auto classes = enumerate_bounded_classes(*exact->hs, k, inst.params.r_bound);
    Json report{{"schema", 1},
                {"command", "enumerate"},
                {"seed", opt.seed},
                {"K", rational_string(k)},
                {"R", rational_string(inst.params.r_bound)},
                {"count", classes.size()}};
    Json list = Json::array();
    std::ostringstream text;
    text << classes.size() << " classes\n";
    for (const auto& h : classes) {
        list.push_back(int_vec_json(h));
        text << "  (";
        for (std::size_t i = 0; i < h.size(); ++i) text << (i ? ", " : "") << h[i];
        text << ")\n";
    }
    report["classes"] = list;
    emit(opt, report, text.str());
    return 0;
}

Vec<GQ> recentering_of(const Instance& inst)
{
    if (inst.schedule) return inst.schedule->w_value;
    return Vec<GQ>(inst.form.vars(), GQ(0));
}

int cmd_closure(const Instance& inst, const Options& opt)
{
    if (!inst.sequences || inst.sequences->h_class.empty())
        throw validation_error("closure needs sequences.h_rule in the instance");
    ClosureSystem sys = closure_equation_system(inst.form, inst.sequences->h_class,
                                                recentering_of(inst), inst.params.degree_cap);
    Json report{{"schema", 1}, {"command", "closure"}, {"seed", opt.seed}};
    report["h"] = int_vec_json(sys.h);
    Json w = Json::array();
    for (const auto& z : sys.w) w.push_back(gq_json(z));
    report["w"] = w;
    Json a = Json::array();
    for (std::size_t i = 0; i < sys.a.rows(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < sys.a.cols(); ++j)
            row.push_back(sys.a(i, j).convert_to<long long>());
        a.push_back(std::move(row));
    }
    report["a"] = a;
    report["r"] = sys.r;
    report["pmax"] = sys.pmax;
    report["torus_exact"] = sys.torus_exact;
    Json nprime = Json::array();
    for (const auto& m : sys.nprime) nprime.push_back(rational_matrix_json(m));
    report["nprime"] = nprime;
    report["phi"] = gq_matrix_json(sys.phi);
    Json exps = Json::array();
    for (std::size_t i = 0; i < sys.toric.exponents.rows(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < sys.toric.exponents.cols(); ++j)
            row.push_back(sys.toric.exponents(i, j).convert_to<long long>());
        exps.push_back(std::move(row));
    }
    Json bins = Json::array();
    for (const auto& u : sys.toric.binomials) bins.push_back(int_vec_json(u));
    report["toric"] = Json{{"exponents", exps},
                           {"binomials", bins},
                           {"capped", sys.toric.capped},
                           {"degree_cap", sys.toric.degree_cap}};

    ClosureCertificate cert =
        closure_certificate(sys, inst.form, 200, (unsigned long)(opt.seed));
    report["certificate"] = Json{
        {"points", cert.points}, {"max_residual", cert.max_residual}, {"ok", cert.ok}};

    std::ostringstream text;
    text << "closure system: lattice rank " << sys.r << ", depth " << sys.pmax << ", "
         << sys.toric.binomials.size() << " binomials\n"
         << "certificate over " << cert.points
         << " samples: max residual " << cert.max_residual << (cert.ok ? " (ok)" : " (FAIL)")
         << "\n";
    emit(opt, report, text.str());
    return 0;
}

Json candidates_json(const std::vector<LimitCandidate>& cands, const Instance& inst)
{
    Json list = Json::array();
    for (const auto& c : cands) {
        Vec<Rational> hq(c.h.size());
        for (std::size_t i = 0; i < c.h.size(); ++i) hq[i] = Rational(c.h[i]);
        Rational qq = bilinear(inst.form.lat.q, hq, hq);
        list.push_back(Json{{"h", int_vec_json(c.h)},
                            {"self_pairing", rational_string(qq)},
                            {"a", int_vec_json(c.a)}});
    }
    return list;
}

int cmd_candidates(const Instance& inst, const Options& opt)
{
    Rational k = effective_k(inst, opt);
    auto cands = limit_hodge_candidates(inst.form, k, recentering_of(inst),
                                        inst.params.r_bound, inst.params.a_max);
    Json report{{"schema", 1},
                {"command", "candidates"},
                {"seed", opt.seed},
                {"K", rational_string(k)},
                {"R", rational_string(inst.params.r_bound)},
                {"count", cands.size()},
                {"candidates", candidates_json(cands, inst)}};
    std::ostringstream text;
    text << cands.size() << " limit candidates\n";
    for (const auto& c : cands) {
        Vec<Rational> hq(c.h.size());
        for (std::size_t i = 0; i < c.h.size(); ++i) hq[i] = Rational(c.h[i]);
        text << "  (";
        for (std::size_t i = 0; i < c.h.size(); ++i) text << (i ? ", " : "") << c.h[i];
        text << ") self-pairing " << rational_string(bilinear(inst.form.lat.q, hq, hq)) << "\n";
    }
    emit(opt, report, text.str());
    return 0;
}

// JSON has no infinities; keep them readable instead of null.
Json finite_or_string(double x)
{
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

Json report_of(const DegenerationReport& rep, const Options& opt, const char* command)
{
    Json report{{"schema", 1}, {"command", command}, {"seed", opt.seed}};
    report["flag"] = rep.flag;
    report["hypothesis_ok"] = rep.hypothesis_ok;
    report["pairing_ok"] = rep.pairing_ok;
    report["congruence_ok"] = rep.congruence_ok;
    report["samples"] = rep.sample;
    report["dropped"] = rep.dropped;
    report["harmless"] = Json{{"ok", rep.harmless.ok},
                              {"diagnostic", rep.harmless.diagnostic},
                              {"alpha", finite_or_string(rep.harmless.alpha)},
                              {"sup_bound", finite_or_string(rep.harmless.sup_bound)}};
    report["indicators"] = Json{{"q_growth", rep.q_growth},
                                {"hodge_growth", rep.hodge_growth},
                                {"scaled_growth", rep.scaled_growth},
                                {"eps_growth", rep.eps_growth},
                                {"q_bounded", rep.q_bounded},
                                {"hodge_bounded", rep.hodge_bounded},
                                {"scaled_bounded", rep.scaled_bounded},
                                {"agree", rep.indicators_agree},
                                {"has_grading", rep.has_grading}};
    if (rep.position) report["position"] = int_vec_json(*rep.position);
    report["tail_constant"] = rep.tail_constant;
    if (rep.tail_constant) report["stable_class"] = int_vec_json(rep.stable_class);
    report["cone_annihilates"] = rep.cone_annihilates;
    Json lv = Json::array();
    for (const auto& x : rep.limit_vector) lv.push_back(complex_json(x));
    report["limit"] = Json{{"checked", rep.limit_checked},
                           {"ok", rep.limit_ok},
                           {"residual", rep.limit_residual},
                           {"tail", rep.limit_tail},
                           {"vector", lv}};
    report["trace"] = Json{{"ran", rep.trace.ran},
                           {"norm_margin", rep.trace.norm_margin},
                           {"norm_bound_ok", rep.trace.norm_bound_ok},
                           {"w0_ok", rep.trace.w0_ok},
                           {"h0_annihilated", rep.trace.h0_annihilated},
                           {"decay_rate", finite_or_string(rep.trace.decay_rate)},
                           {"decay_ok", rep.trace.decay_ok}};
    return report;
}

DegenerationReport run_degeneration(const Instance& inst, const Options& opt,
                                    GrowthSchedule& s_out)
{
    if (!inst.schedule)
        throw validation_error("this command needs a schedule block in the instance");
    if (!inst.sequences || inst.sequences->h_class.empty())
        throw validation_error("this command needs sequences.h_rule in the instance");
    if (inst.sequences->b_value.empty())
        throw validation_error("this command needs sequences.b_rule in the instance");

    ScheduleParams sp;
    sp.m_max = effective_m_max(inst, opt);
    sp.fiber_tol = effective_tol(opt);
    GrowthSchedule s = build_schedule(inst.schedule->a, make_time_rule(*inst.schedule),
                                      make_point_rule(*inst.schedule), inst.form, sp);
    VerifyParams vp;
    vp.k_bound = effective_k(inst, opt);
    vp.m_max = sp.m_max;
    vp.fiber_tol = sp.fiber_tol;
    vp.harmless.m_max = sp.m_max;
    vp.harmless.alpha_min = inst.params.alpha_min;
    DegenerationReport rep =
        verify_degeneration(s, inst.form, make_class_rule(*inst.sequences),
                            make_vector_rule(*inst.sequences), inst.yk, vp);
    s_out = std::move(s);
    return rep;
}

std::string degeneration_text(const DegenerationReport& rep)
{
    std::ostringstream text;
    text << rep.flag << "\n";
    text << "  pairing " << (rep.pairing_ok ? "ok" : "violated") << ", congruence "
         << (rep.congruence_ok ? "ok" : "violated") << ", error "
         << (rep.harmless.ok ? "harmless" : "not harmless") << "\n";
    text << "  indicators: Q " << (rep.q_bounded ? "bounded" : "unbounded") << ", Hodge norm "
         << (rep.hodge_bounded ? "bounded" : "unbounded");
    if (rep.has_grading)
        text << ", scaled " << (rep.scaled_bounded ? "bounded" : "unbounded");
    text << (rep.indicators_agree ? " (agree)" : " (DISAGREE)") << "\n";
    if (rep.position) {
        text << "  position (";
        for (std::size_t i = 0; i < rep.position->size(); ++i)
            text << (i ? ", " : "") << (*rep.position)[i];
        text << ")\n";
    }
    if (rep.tail_constant) {
        text << "  stable class (";
        for (std::size_t i = 0; i < rep.stable_class.size(); ++i)
            text << (i ? ", " : "") << rep.stable_class[i];
        text << ")" << (rep.cone_annihilates ? ", annihilated by the cone" : "") << "\n";
    }
    return text.str();
}

int cmd_simulate(const Instance& inst, const Options& opt)
{
    GrowthSchedule s;
    DegenerationReport rep = run_degeneration(inst, opt, s);
    Json report = report_of(rep, opt, "simulate");
    if (!inst.yk.empty()) {
        ScalingData sd = scaling_and_limit(s, inst.form, inst.yk, effective_m_max(inst, opt));
        Json scaling{{"converged", sd.flag.converged}, {"tail", sd.flag.tail}};
        if (sd.flag.closed_form) scaling["closed_form_distance"] = *sd.flag.closed_form;
        report["scaling"] = scaling;
    }
    std::string csv = trajectory_csv(rep);
    write_artifact(opt, "trajectory.csv", csv);
    if (opt.format == "csv") {
        std::cout << csv;
        write_artifact(opt, "report.json", report.dump(2) + "\n");
        return 0;
    }
    emit(opt, report, degeneration_text(rep));
    return 0;
}

int cmd_verify(const Instance& inst, const Options& opt)
{
    GrowthSchedule s;
    DegenerationReport rep = run_degeneration(inst, opt, s);
    Json report = report_of(rep, opt, "verify");

    Rational k = effective_k(inst, opt);
    auto cands = limit_hodge_candidates(inst.form, k, recentering_of(inst),
                                        inst.params.r_bound, inst.params.a_max);
    report["limit_candidates"] = candidates_json(cands, inst);

    const Vec<Int>& h = inst.sequences->h_class;
    bool listed = false;
    for (const auto& c : cands) {
        Vec<Int> minus(h.size());
        for (std::size_t i = 0; i < h.size(); ++i) minus[i] = -h[i];
        if (c.h == h || c.h == minus) listed = true;
    }
    report["class_listed_as_candidate"] = listed;
    Vec<Rational> hq(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) hq[i] = Rational(h[i]);
    Rational qq = bilinear(inst.form.lat.q, hq, hq);
    report["class_self_pairing"] = rational_string(qq);

    std::string csv = trajectory_csv(rep);
    write_artifact(opt, "trajectory.csv", csv);
    if (opt.format == "csv") {
        std::cout << csv;
        write_artifact(opt, "report.json", report.dump(2) + "\n");
        return 0;
    }
    std::ostringstream text;
    text << degeneration_text(rep);
    text << "  class self-pairing " << rational_string(qq) << ", "
         << (listed ? "listed" : "not listed") << " among " << cands.size()
         << " limit candidates\n";
    emit(opt, report, text.str());
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"exact tools for polarized Hodge structures and degenerations"};
    app.require_subcommand(1);
    Options opt;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"validate", "check that the instance defines a polarized Hodge structure"},
        {"wf", "weight filtration of the monodromy cone"},
        {"deligne", "Deligne splitting of the limit mixed Hodge structure"},
        {"norm", "Hodge norms of the coordinate classes over the base point"},
        {"enumerate", "integral classes with bounded pairing and functional norm"},
        {"closure", "boundary closure equations for the marked class"},
        {"candidates", "integral classes that can survive to the boundary"},
        {"simulate", "sample a degenerating ray and certify the error"},
        {"verify", "check the boundedness conclusions along the ray"},
    };
    for (const auto& [name, desc] : commands) add_common(app.add_subcommand(name, desc), opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        Instance inst = load_instance(opt.instance_path);
        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "validate") return cmd_validate(inst, opt);
        if (cmd == "wf") return cmd_wf(inst, opt);
        if (cmd == "deligne") return cmd_deligne(inst, opt);
        if (cmd == "norm") return cmd_norm(inst, opt);
        if (cmd == "enumerate") return cmd_enumerate(inst, opt);
        if (cmd == "closure") return cmd_closure(inst, opt);
        if (cmd == "candidates") return cmd_candidates(inst, opt);
        if (cmd == "simulate") return cmd_simulate(inst, opt);
        if (cmd == "verify") return cmd_verify(inst, opt);
        std::cerr << "error: unknown command " << cmd << "\n";
        return 2;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
