// Command-line surface for the QFA toolkit: simulation, piecewise-testable
// compilation, closure constructions, classical checks, equivalence, and the
// example gallery.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "qfa/classical.hpp"
#include "qfa/constructions.hpp"
#include "qfa/io.hpp"
#include "qfa/ptest.hpp"

namespace {

using namespace qfa;

std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

const char* yes_no(bool b) { return b ? "yes" : "no"; }

void print_cert(const Certificate& c) {
    std::printf("certificate: cut=%s margin=%s max_margin=%s end_decisive=%s "
                "co_end_decisive=%s one_sided=%s positive_amplitude=%s\n",
                num(c.cut_point).c_str(), num(c.margin).c_str(), num(c.max_margin).c_str(),
                yes_no(c.end_decisive), yes_no(c.co_end_decisive),
                c.one_sided == OneSided::Positive   ? "positive"
                : c.one_sided == OneSided::Negative ? "negative"
                                                    : "none",
                yes_no(c.positive_amplitude));
}

std::string show_word(const std::string& w) { return w.empty() ? "(empty)" : w; }

MmQfa as_mm(const AutomatonFile& f) {
    if (f.kind == "mm") return f.mm.value();
    throw std::runtime_error("expected an mm automaton, found kind '" + f.kind + "'");
}

CertifiedMm as_certified(const AutomatonFile& f) {
    MmQfa m = as_mm(f);
    if (!f.cert) throw std::runtime_error("this construction requires a certificate block");
    return {std::move(m), *f.cert};
}

int cmd_run(const std::string& path, const std::string& word, bool trace) {
    AutomatonFile f = load_file(path);
    if (f.kind == "mo") {
        double p = mo_accept_prob(f.mo.value(), word);
        std::printf("p_acc=%s p_rej=%s leftover=%s\n", num(p).c_str(), num(1.0 - p).c_str(),
                    num(0.0).c_str());
        return 0;
    }
    if (f.kind == "mm") {
        MmRunResult r = mm_accept_prob(f.mm.value(), word);
        if (trace) {
            for (size_t i = 0; i < r.trace.size(); ++i) {
                const RunStep& s = r.trace[i];
                std::printf("step %zu '%c': p_acc=%s p_rej=%s leftover=%s\n", i + 1, s.symbol,
                            num(s.p_acc).c_str(), num(s.p_rej).c_str(),
                            num(norm_sq(s.vec)).c_str());
            }
        }
        std::printf("p_acc=%s p_rej=%s leftover=%s\n", num(r.p_acc).c_str(), num(r.p_rej).c_str(),
                    num(r.leftover).c_str());
        return 0;
    }
    if (f.kind == "pfa") {
        double p = pfa_accept_prob(f.pfa.value(), word);
        std::printf("p_acc=%s cut=%s verdict=%s\n", num(p).c_str(),
                    num(f.pfa->cut_point).c_str(), p > f.pfa->cut_point ? "accept" : "reject");
        return 0;
    }
    throw std::runtime_error("run: unsupported kind '" + f.kind + "'");
}

int cmd_prob_table(const std::string& path, int max_len) {
    AutomatonFile f = load_file(path);
    std::string alphabet;
    if (f.kind == "mo") alphabet = f.mo->alphabet;
    else if (f.kind == "mm") alphabet = f.mm->alphabet;
    else if (f.kind == "pfa") alphabet = f.pfa->alphabet;
    else throw std::runtime_error("prob-table: unsupported kind '" + f.kind + "'");
    for (const std::string& w : all_words(alphabet, max_len)) {
        if (f.kind == "mo") {
            std::printf("%s\t%s\n", show_word(w).c_str(), num(mo_accept_prob(*f.mo, w)).c_str());
        } else if (f.kind == "mm") {
            MmRunResult r = mm_accept_prob(*f.mm, w);
            std::printf("%s\tp_acc=%s p_rej=%s leftover=%s\n", show_word(w).c_str(),
                        num(r.p_acc).c_str(), num(r.p_rej).c_str(), num(r.leftover).c_str());
        } else {
            std::printf("%s\t%s\n", show_word(w).c_str(),
                        num(pfa_accept_prob(*f.pfa, w)).c_str());
        }
    }
    return 0;
}

int cmd_compile(const std::string& alphabet, const std::string& expr_text,
                const std::string& out_path) {
    PtestExpr expr = parse_expr(expr_text, alphabet);
    CompileResult res = compile(expr, alphabet);
    for (const std::string& line : res.report) std::printf("%s\n", line.c_str());
    print_cert(res.automaton.cert);
    std::printf("states=%d\n", res.automaton.aut.n_states);
    if (!out_path.empty()) save_file(out_path, wrap(res.automaton.aut, res.automaton.cert));
    return 0;
}

int cmd_check(const std::string& path, bool po, bool gfa, bool rfa, bool irr) {
    AutomatonFile f = load_file(path);
    if (f.kind != "dfa") throw std::runtime_error("check: expected a dfa file");
    const Dfa& d = f.dfa.value();
    if (gfa) {
        bool ok = check_gfa(d);
        std::printf("gfa: %s\n", ok ? "true" : "false");
        return ok ? 0 : 1;
    }
    if (rfa) {
        bool ok = check_rfa(d);
        std::printf("rfa: %s\n", ok ? "true" : "false");
        return ok ? 0 : 1;
    }
    if (irr) {
        IrrResult r = check_irreversible(d);
        if (r.present) {
            std::printf("irreversible: present q1=%d q2=%d x=%s y=%s z=%s\n", r.witness->q1,
                        r.witness->q2, show_word(r.witness->x).c_str(),
                        show_word(r.witness->y).c_str(), show_word(r.witness->z).c_str());
            return 1;
        }
        std::printf("irreversible: absent\n");
        return 0;
    }
    if (po) {
        PoResult r = check_partial_order(d);
        if (r.satisfied) {
            std::printf("partial-order: satisfied\n");
            return 0;
        }
        std::printf("partial-order: violated q1=%d q2=%d x=%s y=%s z=%s\n", r.witness->q1,
                    r.witness->q2, show_word(r.witness->x).c_str(),
                    show_word(r.witness->y).c_str(), show_word(r.witness->z).c_str());
        return 1;
    }
    throw CLI::ValidationError("check", "choose one of --partial-order --gfa --rfa --irreversible");
}

int cmd_equiv(const std::string& a_path, const std::string& b_path, double tol) {
    AutomatonFile fa = load_file(a_path);
    AutomatonFile fb = load_file(b_path);
    EquivResult r;
    if (fa.kind == "mo" && fb.kind == "mo")
        r = moqfa_equiv(fa.mo.value(), fb.mo.value(), tol);
    else if (fa.kind == "linsys" && fb.kind == "linsys")
        r = linsys_equiv(fa.linsys.value(), fb.linsys.value(), tol);
    else
        throw std::runtime_error("equiv: expected two mo (or two linsys) files");
    if (r.equivalent) {
        std::printf("equivalent\n");
        return 0;
    }
    std::printf("not equivalent; separating word: %s\n", show_word(*r.separating_word).c_str());
    return 1;
}

int cmd_to_pfa(const std::string& path, const std::string& out_path, double cut) {
    AutomatonFile f = load_file(path);
    if (f.kind != "mo") throw std::runtime_error("to-pfa: expected an mo file");
    Pfa p = moqfa_to_pfa(f.mo.value(), cut);
    std::printf("pfa: states=%d cut=%s shift=%s\n", p.n_states, num(p.cut_point).c_str(),
                num(p.norm_shift).c_str());
    if (!out_path.empty()) save_file(out_path, wrap(p));
    return 0;
}

int cmd_example(const std::string& name, const std::string& out_path) {
    AutomatonFile f;
    if (name == "rotation") f = wrap(example_rotation());
    else if (name == "free-group") f = wrap(example_free_group());
    else if (name == "parity") f = wrap(example_parity());
    else if (name == "endmark-demo") f = example_endmark_demo();
    else throw CLI::ValidationError("example", "unknown example '" + name + "'");
    save_file(out_path, f);
    std::printf("wrote %s (%s)\n", out_path.c_str(), f.kind.c_str());
    return 0;
}

int cmd_validate(const std::string& path) {
    AutomatonFile f = load_file(path);
    std::vector<std::string> diags;
    if (f.kind == "mo") diags = validate(f.mo.value());
    else if (f.kind == "mm") diags = validate(f.mm.value());
    else if (f.kind == "dfa") diags = validate(f.dfa.value());
    else if (f.kind == "pfa") diags = validate(f.pfa.value());
    else if (f.kind == "linsys") diags = {};
    if (f.cert) {
        auto cd = validate_certificate(*f.cert);
        diags.insert(diags.end(), cd.begin(), cd.end());
    }
    if (diags.empty()) {
        std::printf("ok\n");
        return 0;
    }
    for (const std::string& d : diags) std::printf("%s\n", d.c_str());
    return 3;
}

struct ConstructArgs {
    std::string op;
    std::vector<std::string> inputs;
    std::string out;
    std::vector<std::string> hom_pairs;
    std::string word;
    std::string side = "left";
    std::string cent_path;
    int k = 1;
    int s = 0, t = 0;
    bool one_sided = false;
};

int cmd_construct(const ConstructArgs& a) {
    auto need_inputs = [&](size_t n) {
        if (a.inputs.size() != n)
            throw std::runtime_error("construct " + a.op + ": expected " + std::to_string(n) +
                                     " input file(s)");
    };
    AutomatonFile out;
    std::optional<Certificate> cert_to_print;
    if (a.op == "complement") {
        need_inputs(1);
        AutomatonFile f = load_file(a.inputs[0]);
        if (a.one_sided) {
            CertifiedMm r = mm_complement_one_sided(as_certified(f));
            cert_to_print = r.cert;
            out = wrap(r.aut, r.cert);
        } else {
            MmQfa m = mm_complement(as_mm(f));
            std::optional<Certificate> c;
            if (f.cert) {
                c = mm_complement(*f.cert);
                cert_to_print = c;
            }
            out = wrap(m, c);
        }
    } else if (a.op == "inverse-hom") {
        need_inputs(1);
        AutomatonFile f = load_file(a.inputs[0]);
        Homomorphism h;
        for (const std::string& pair : a.hom_pairs) {
            auto eq = pair.find('=');
            if (eq != 1) throw std::runtime_error("--map expects entries like a=xy (or a= )");
            h[pair[0]] = pair.substr(2);
        }
        MmQfa m = mm_inverse_hom(as_mm(f), h);
        out = wrap(m, f.cert);  // distribution-preserving
        cert_to_print = f.cert;
    } else if (a.op == "quotient") {
        need_inputs(1);
        AutomatonFile f = load_file(a.inputs[0]);
        QuotientSide side = a.side == "right" ? QuotientSide::Right : QuotientSide::Left;
        MmQfa m = word_quotient(as_mm(f), a.word, side);
        out = wrap(m, f.cert);
        cert_to_print = f.cert;
    } else if (a.op == "strip-endmarker") {
        need_inputs(1);
        AutomatonFile f = load_file(a.inputs[0]);
        CMatrix cent;
        if (!a.cent_path.empty()) {
            AutomatonFile cf = load_file(a.cent_path);
            if (!cf.cent) throw std::runtime_error("cent file carries no 'cent' matrix");
            cent = *cf.cent;
        } else if (f.cent) {
            cent = *f.cent;
        } else {
            throw std::runtime_error("no cent matrix given (use --cent-matrix or embed 'cent')");
        }
        if (f.kind == "mo") out = wrap(mo_strip_left_endmarker(f.mo.value(), cent));
        else out = wrap(mm_strip_left_endmarker(as_mm(f), cent), f.cert);
    } else if (a.op == "tensor" || a.op == "union" || a.op == "intersect") {
        need_inputs(2);
        CertifiedMm m1 = as_certified(load_file(a.inputs[0]));
        CertifiedMm m2 = as_certified(load_file(a.inputs[1]));
        CertifiedMm r;
        if (a.op == "tensor") {
            r = mm_tensor(m1, m2);
        } else if (a.op == "union") {
            std::optional<std::pair<int, int>> powers;
            if (a.s > 0 && a.t > 0) powers = {a.s, a.t};
            std::pair<int, int> chosen;
            r = mm_union(m1, m2, powers, &chosen);
            std::printf("powers: s=%d t=%d\n", chosen.first, chosen.second);
        } else {
            int k = 0;
            r = mm_intersect(m1, m2, &k);
            std::printf("power: k=%d\n", k);
        }
        cert_to_print = r.cert;
        out = wrap(r.aut, r.cert);
    } else if (a.op == "power") {
        need_inputs(1);
        CertifiedMm m = as_certified(load_file(a.inputs[0]));
        CertifiedMm r = mm_power(m, a.k);
        cert_to_print = r.cert;
        out = wrap(r.aut, r.cert);
    } else {
        throw CLI::ValidationError("construct", "unknown operation '" + a.op + "'");
    }
    if (!a.out.empty()) save_file(a.out, out);
    if (cert_to_print) print_cert(*cert_to_print);
    std::printf("states=%d\n", out.mm ? out.mm->n_states : (out.mo ? out.mo->n_states : 0));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"measure-once / measure-many quantum finite automata toolkit"};
    app.require_subcommand(1);

    std::string path, word, out_path, alphabet, expr_text, example_name, b_path;
    bool trace = false;
    int max_len = 3;
    double tol = kDefaultTol;
    double cut = 0.5;
    bool po = false, gfa = false, rfa = false, irr = false;
    ConstructArgs cargs;

    auto* run = app.add_subcommand("run", "run an automaton on a word");
    run->add_option("file", path)->required();
    run->add_option("--word", word)->default_val("");
    run->add_flag("--trace", trace, "print one line per step");

    auto* table = app.add_subcommand("prob-table", "acceptance probabilities for all short words");
    table->add_option("file", path)->required();
    table->add_option("--max-len", max_len)->required();

    auto* comp = app.add_subcommand("compile", "compile a piecewise testable expression");
    comp->add_option("--alphabet", alphabet)->required();
    comp->add_option("--expr", expr_text)->required();
    comp->add_option("-o,--out", out_path);

    auto* cons = app.add_subcommand("construct", "closure and composition constructions");
    cons->add_option("op", cargs.op)->required();
    cons->add_option("inputs", cargs.inputs, "input automaton file(s)");
    cons->add_option("-o,--out", cargs.out);
    cons->add_option("--map", cargs.hom_pairs, "homomorphism entries a=xy");
    cons->add_option("--word", cargs.word);
    cons->add_option("--side", cargs.side)->check(CLI::IsMember({"left", "right"}));
    cons->add_option("--cent-matrix", cargs.cent_path);
    cons->add_option("--k", cargs.k);
    cons->add_option("--s", cargs.s);
    cons->add_option("--t", cargs.t);
    cons->add_flag("--one-sided", cargs.one_sided, "one-sided complement construction");

    auto* check = app.add_subcommand("check", "classical automaton conditions");
    check->add_option("file", path)->required();
    check->add_flag("--partial-order", po);
    check->add_flag("--gfa", gfa);
    check->add_flag("--rfa", rfa);
    check->add_flag("--irreversible", irr);

    auto* equiv = app.add_subcommand("equiv", "decide measure-once equivalence");
    equiv->add_option("a", path)->required();
    equiv->add_option("b", b_path)->required();
    equiv->add_option("--tol", tol);

    auto* topfa = app.add_subcommand("to-pfa", "convert a measure-once automaton to a PFA");
    topfa->add_option("file", path)->required();
    topfa->add_option("-o,--out", out_path);
    topfa->add_option("--cut", cut, "source cut-point (default 0.5)");

    auto* ex = app.add_subcommand("example", "emit a gallery automaton");
    ex->add_option("name", example_name)
        ->required()
        ->check(CLI::IsMember({"rotation", "free-group", "parity", "endmark-demo"}));
    ex->add_option("-o,--out", out_path)->required();

    auto* val = app.add_subcommand("validate", "structural diagnostics");
    val->add_option("file", path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return cmd_run(path, word, trace);
        if (table->parsed()) return cmd_prob_table(path, max_len);
        if (comp->parsed()) return cmd_compile(alphabet, expr_text, out_path);
        if (cons->parsed()) return cmd_construct(cargs);
        if (check->parsed()) return cmd_check(path, po, gfa, rfa, irr);
        if (equiv->parsed()) return cmd_equiv(path, b_path, tol);
        if (topfa->parsed()) return cmd_to_pfa(path, out_path, cut);
        if (ex->parsed()) return cmd_example(example_name, out_path);
        if (val->parsed()) return cmd_validate(path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 2;
}
