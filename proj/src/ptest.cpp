#include "qfa/ptest.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace qfa {

namespace {

struct Parser {
    const std::string& text;
    const std::string& alphabet;
    size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    PtestExpr expr() {
        PtestExpr left = term();
        while (peek() == '|') {
            ++pos;
            PtestExpr right = term();
            if (left.kind == PtestExpr::Kind::Or) {
                left.children.push_back(std::move(right));
            } else {
                PtestExpr node;
                node.kind = PtestExpr::Kind::Or;
                node.children.push_back(std::move(left));
                node.children.push_back(std::move(right));
                left = std::move(node);
            }
        }
        return left;
    }

    PtestExpr term() {
        PtestExpr left = factor();
        while (peek() == '&') {
            ++pos;
            PtestExpr right = factor();
            if (left.kind == PtestExpr::Kind::And) {
                left.children.push_back(std::move(right));
            } else {
                PtestExpr node;
                node.kind = PtestExpr::Kind::And;
                node.children.push_back(std::move(left));
                node.children.push_back(std::move(right));
                left = std::move(node);
            }
        }
        return left;
    }

    PtestExpr factor() {
        char c = peek();
        if (c == '!') {
            ++pos;
            PtestExpr node;
            node.kind = PtestExpr::Kind::Not;
            node.children.push_back(factor());
            return node;
        }
        if (c == '(') {
            ++pos;
            PtestExpr inner = expr();
            if (peek() != ')') throw ParseError("expected ')'", pos);
            ++pos;
            return inner;
        }
        if (c == '"') return atom();
        throw ParseError(std::string("expected '!', '(' or a quoted atom"), pos);
    }

    PtestExpr atom() {
        ++pos;  // opening quote
        size_t start = pos;
        PtestExpr node;
        node.kind = PtestExpr::Kind::Atom;
        while (pos < text.size() && text[pos] != '"') {
            char c = text[pos];
            if (c == kEndMarker) throw ParseError("atom contains the end-marker", pos);
            if (alphabet.find(c) == std::string::npos)
                throw ParseError(std::string("symbol '") + c + "' outside the alphabet", pos);
            ++pos;
        }
        if (pos >= text.size()) throw ParseError("unterminated atom", start - 1);
        node.atom = text.substr(start, pos - start);
        ++pos;  // closing quote
        return node;
    }
};

// Negation normal form over atom literals.
struct Literal {
    std::string atom;
    bool negated = false;
    bool operator<(const Literal& o) const {
        return std::tie(negated, atom) < std::tie(o.negated, o.atom);
    }
};

using Clause = std::set<Literal>;  // conjunction of literals

std::vector<Clause> to_dnf(const PtestExpr& e, bool negated) {
    switch (e.kind) {
        case PtestExpr::Kind::Atom:
            return {Clause{Literal{e.atom, negated}}};
        case PtestExpr::Kind::Not:
            return to_dnf(e.children[0], !negated);
        case PtestExpr::Kind::And:
        case PtestExpr::Kind::Or: {
            bool conjunction = (e.kind == PtestExpr::Kind::And) != negated;
            if (!conjunction) {
                std::vector<Clause> out;
                for (const auto& ch : e.children)
                    for (auto& cl : to_dnf(ch, negated)) out.push_back(std::move(cl));
                return out;
            }
            std::vector<Clause> acc{Clause{}};
            for (const auto& ch : e.children) {
                std::vector<Clause> next;
                for (const auto& left : acc)
                    for (const auto& right : to_dnf(ch, negated)) {
                        Clause merged = left;
                        merged.insert(right.begin(), right.end());
                        next.push_back(std::move(merged));
                    }
                acc = std::move(next);
            }
            return acc;
        }
    }
    return {};
}

std::string quoted(const std::string& z) { return "\"" + z + "\""; }

CertifiedMm accept_all(const std::string& alphabet) {
    MmQfa m;
    m.alphabet = alphabet;
    m.n_states = 2;
    m.kind = {StateKind::NonHalting, StateKind::Accepting};
    for (char c : alphabet) m.trans[c] = identity(2);
    m.trans[kEndMarker] = permutation_matrix({1, 0});
    m.init_vector = {Amplitude(1.0), Amplitude(0.0)};
    Certificate cert;
    cert.one_sided = OneSided::Positive;
    cert.end_decisive = true;
    cert.co_end_decisive = true;
    cert.positive_amplitude = true;
    cert.margin = cert.cut_point = 63.0 / 128.0;
    cert.max_margin = 1.0 - cert.cut_point;
    return {std::move(m), cert};
}

}  // namespace

PtestExpr parse_expr(const std::string& text, const std::string& alphabet) {
    Parser p{text, alphabet};
    PtestExpr e = p.expr();
    p.skip_ws();
    if (p.pos != text.size()) throw ParseError("trailing input", p.pos);
    return e;
}

CanonicalForm canonicalize(const PtestExpr& e) {
    CanonicalForm out;
    std::set<std::pair<std::vector<std::string>, std::vector<std::string>>> seen;
    for (const Clause& cl : to_dnf(e, false)) {
        Implicant imp;
        for (const Literal& lit : cl)
            (lit.negated ? imp.negatives : imp.positives).push_back(lit.atom);
        auto key = std::make_pair(imp.positives, imp.negatives);
        if (seen.insert(key).second) out.push_back(std::move(imp));
    }
    return out;
}

bool subseq_oracle(const std::string& z, const std::string& w) {
    size_t i = 0;
    for (char c : w) {
        if (i < z.size() && z[i] == c) ++i;
    }
    return i == z.size();
}

bool eval_expr(const PtestExpr& e, const std::string& word) {
    switch (e.kind) {
        case PtestExpr::Kind::Atom: return subseq_oracle(e.atom, word);
        case PtestExpr::Kind::Not: return !eval_expr(e.children[0], word);
        case PtestExpr::Kind::And:
            return std::all_of(e.children.begin(), e.children.end(),
                               [&](const PtestExpr& c) { return eval_expr(c, word); });
        case PtestExpr::Kind::Or:
            return std::any_of(e.children.begin(), e.children.end(),
                               [&](const PtestExpr& c) { return eval_expr(c, word); });
    }
    return false;
}

CertifiedMm compile_atom(const std::string& z, const std::string& alphabet) {
    for (char c : z)
        if (alphabet.find(c) == std::string::npos)
            throw std::invalid_argument(std::string("compile_atom: symbol '") + c +
                                        "' outside the alphabet");
    if (z.empty()) return accept_all(alphabet);

    const int n = static_cast<int>(z.size()) - 1;
    const int dim = 2 * n + 5;
    MmQfa m;
    m.alphabet = alphabet;
    m.n_states = dim;
    m.kind.assign(dim, StateKind::NonHalting);
    m.kind[2 * n + 1] = StateKind::Accepting;
    m.kind[2 * n + 3] = StateKind::Rejecting;
    m.junk.insert(2 * n + 4);
    m.kind[2 * n + 4] = StateKind::Rejecting;
    for (int i = 1; i < 2 * n; i += 2) {
        m.kind[i] = StateKind::Rejecting;
        m.junk.insert(i);
    }

    double h = 0.5, r2 = 1.0 / std::sqrt(2.0);
    CMatrix avg(3, 3);  // the trigger block
    avg.at(0, 0) = h;  avg.at(0, 1) = r2;  avg.at(0, 2) = h;
    avg.at(1, 0) = r2; avg.at(1, 1) = 0.0; avg.at(1, 2) = -r2;
    avg.at(2, 0) = h;  avg.at(2, 1) = -r2; avg.at(2, 2) = h;
    // Sign-fixed variant used at the end-marker so the accept state receives
    // (beta - alpha)/sqrt(2) >= 0.
    CMatrix avg_flipped = avg;
    avg_flipped.at(1, 0) = -r2;
    avg_flipped.at(1, 2) = r2;

    // First trigger: for |z| = 1 the swap dumps q0 into the junk state
    // q_{2n+4} instead of q1 (which is the decisive accept state when n=0),
    // keeping the automaton end-decisive.
    int swap_target = (n == 0) ? 2 * n + 4 : 1;
    std::vector<int> sw(dim);
    for (int i = 0; i < dim; ++i) sw[i] = i;
    std::swap(sw[0], sw[swap_target]);
    CMatrix s_matrix = permutation_matrix(sw);

    for (char sym : alphabet) {
        CMatrix u = identity(dim);
        for (int i = 0; i <= n; ++i) {
            CMatrix factor = identity(dim);
            if (i == 0 && z[0] == sym) factor = s_matrix;
            else if (i >= 1 && z[i] == sym)
                factor = embed_block(avg, {2 * i - 2, 2 * i - 1, 2 * i}, dim);
            u = (i == 0) ? factor : mat_mul(u, factor);
        }
        m.trans[sym] = u;
    }

    // End-marker: trigger the final link, then route everything left alive
    // into junk and the decisive reject state.
    std::vector<int> route(dim);
    for (int i = 0; i < n; ++i) {
        route[2 * i] = 2 * i + 1;
        route[2 * i + 1] = 2 * i;
    }
    route[2 * n] = 2 * n + 4;
    route[2 * n + 1] = 2 * n + 1;
    route[2 * n + 2] = 2 * n + 3;
    route[2 * n + 3] = 2 * n + 2;
    route[2 * n + 4] = 2 * n;
    m.trans[kEndMarker] = mat_mul(permutation_matrix(route),
                                  embed_block(avg_flipped, {2 * n, 2 * n + 1, 2 * n + 2}, dim));

    double c0 = 1.0 / std::sqrt(n + 2.0);
    m.init_vector.assign(dim, Amplitude(0.0));
    for (int i = 0; i <= 2 * n + 2; i += 2) m.init_vector[i] = c0;

    Certificate cert;
    cert.end_decisive = true;
    cert.co_end_decisive = false;
    cert.one_sided = OneSided::Positive;
    cert.positive_amplitude = true;
    double member_lo, env_hi;
    if (n >= 1) {
        member_lo = (1.0 / (n + 2.0)) * std::pow(0.5, 2 * n + 3);
        // The reservoir state holds exactly c0 at the end-marker and the
        // whole live vector has norm at most 1, so the final trigger's
        // accept amplitude is at most (c0 + sqrt(1 - c0^2))/sqrt(2).
        double spread = c0 + std::sqrt(1.0 - c0 * c0);
        env_hi = std::min(1.0, spread * spread / 2.0);
    } else {
        // |z| = 1 deviates from the literal chain; its bounds come from
        // enumerating short words directly.
        double min_p = 1.0, max_p = 0.0;
        for (const std::string& w : all_words(alphabet, 3)) {
            if (!subseq_oracle(z, w)) continue;
            double p = mm_accept_prob(m, w).p_acc;
            min_p = std::min(min_p, p);
            max_p = std::max(max_p, p);
        }
        member_lo = min_p * 63.0 / 64.0;
        env_hi = max_p;
    }
    cert.cut_point = cert.margin = member_lo / 2.0;
    cert.max_margin = std::max({cert.margin, env_hi - cert.cut_point, cert.cut_point});
    return {std::move(m), cert};
}

CompileResult compile(const PtestExpr& e, const std::string& alphabet) {
    CompileResult res;
    auto note = [&](const std::string& what, const Certificate& c) {
        std::ostringstream os;
        os.precision(12);
        os << what << ": cut=" << c.cut_point << " margin=" << c.margin
           << " max_margin=" << c.max_margin
           << (c.one_sided == OneSided::Positive ? " one-sided-positive" : "");
        res.report.push_back(os.str());
    };

    CanonicalForm form = canonicalize(e);
    std::vector<CertifiedMm> implicants;
    for (const Implicant& imp : form) {
        std::optional<CertifiedMm> pos;
        for (const std::string& z : imp.positives) {
            CertifiedMm atom = compile_atom(z, alphabet);
            note("atom " + quoted(z), atom.cert);
            if (pos) {
                pos = mm_tensor(*pos, atom);
                note("tensor up to " + quoted(z), pos->cert);
            } else {
                pos = std::move(atom);
            }
        }
        std::optional<CertifiedMm> neg;
        if (!imp.negatives.empty()) {
            std::optional<CertifiedMm> uni;
            for (const std::string& z : imp.negatives) {
                CertifiedMm atom = compile_atom(z, alphabet);
                note("atom " + quoted(z), atom.cert);
                if (uni) {
                    std::pair<int, int> st;
                    uni = mm_union(*uni, atom, std::nullopt, &st);
                    note("union up to " + quoted(z) + " (powers " + std::to_string(st.first) +
                             "," + std::to_string(st.second) + ")",
                         uni->cert);
                } else {
                    uni = std::move(atom);
                }
            }
            neg = mm_complement_one_sided(*uni);
            note("one-sided complement", neg->cert);
        }
        CertifiedMm built = [&] {
            if (pos && neg) {
                int k = 0;
                CertifiedMm r = mm_intersect(*neg, *pos, &k);
                note("intersect (power " + std::to_string(k) + ")", r.cert);
                return r;
            }
            if (pos) return std::move(*pos);
            if (neg) return std::move(*neg);
            CertifiedMm r = accept_all(alphabet);
            note("accept-all implicant", r.cert);
            return r;
        }();
        implicants.push_back(std::move(built));
    }

    CertifiedMm total = std::move(implicants.front());
    for (size_t i = 1; i < implicants.size(); ++i) {
        std::pair<int, int> st;
        total = mm_union(total, implicants[i], std::nullopt, &st);
        note("union of implicants " + std::to_string(i + 1) + "/" +
                 std::to_string(implicants.size()) + " (powers " + std::to_string(st.first) +
                 "," + std::to_string(st.second) + ")",
             total.cert);
    }
    note("result", total.cert);
    res.automaton = std::move(total);
    return res;
}

}  // namespace qfa
