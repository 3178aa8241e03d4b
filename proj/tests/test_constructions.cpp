#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "qfa/constructions.hpp"
#include "qfa/io.hpp"
#include "qfa/ptest.hpp"

using namespace qfa;

namespace {

std::mt19937_64 rng(4242);

CMatrix random_unitary(int n) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<CVector> cols(n, CVector(n));
    for (auto& c : cols)
        for (auto& x : c) x = Amplitude(g(rng), g(rng));
    for (int i = 0; i < n; ++i) {
        for (int pass = 0; pass < 2; ++pass)
            for (int j = 0; j < i; ++j) {
                Amplitude dot = 0.0;
                for (int k = 0; k < n; ++k) dot += std::conj(cols[j][k]) * cols[i][k];
                for (int k = 0; k < n; ++k) cols[i][k] -= dot * cols[j][k];
            }
        double len = std::sqrt(norm_sq(cols[i]));
        for (auto& x : cols[i]) x /= len;
    }
    CMatrix u(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) u.at(i, j) = cols[j][i];
    return u;
}

bool matrices_equal(const CMatrix& a, const CMatrix& b, double tol = 1e-12) {
    return a.rows == b.rows && a.cols == b.cols && max_abs_diff(a, b) <= tol;
}

// Simulates an automaton that notionally has a left end-marker: the cent
// matrix is applied (and measured, for MM) before the word.
double mo_two_marker_prob(const MoQfa& m, const CMatrix& cent, const std::string& word) {
    CVector v = mat_vec(cent, m.initial);
    for (char c : word) v = mat_vec(m.matrix(c), v);
    v = mat_vec(m.matrix(kEndMarker), v);
    double p = 0.0;
    for (int q : m.accepting) p += std::norm(v[q]);
    return p;
}

MmRunResult mm_two_marker_run(const MmQfa& m, const CMatrix& cent, const std::string& word) {
    MmTriple st{m.init_vector, m.init_p_acc, m.init_p_rej};
    st = mm_step(st, cent, m.kind);
    MmRunResult res;
    for (char c : word) st = mm_step(st, m.matrix(c), m.kind);
    st = mm_step(st, m.matrix(kEndMarker), m.kind);
    res.p_acc = st.p_acc;
    res.p_rej = st.p_rej;
    res.leftover = norm_sq(st.vec);
    return res;
}

}  // namespace

TEST_CASE("mm_complement is an involution and swaps the probabilities") {
    for (const std::string& z : {std::string("a"), std::string("ab")}) {
        CertifiedMm atom = compile_atom(z, "ab");
        MmQfa comp = mm_complement(atom.aut);
        MmQfa back = mm_complement(comp);
        CHECK(back.n_states == atom.aut.n_states);
        CHECK(back.kind == atom.aut.kind);
        CHECK(back.junk == atom.aut.junk);
        for (const auto& [c, u] : atom.aut.trans) CHECK(matrices_equal(back.trans.at(c), u));
        for (const std::string& w : all_words("ab", 5)) {
            MmRunResult orig = mm_accept_prob(atom.aut, w);
            MmRunResult flip = mm_accept_prob(comp, w);
            CHECK(flip.p_acc == doctest::Approx(orig.p_rej).epsilon(1e-12));
            CHECK(flip.p_rej == doctest::Approx(orig.p_acc).epsilon(1e-12));
        }
    }
    // Certificate transform mirrors the cut-point.
    CertifiedMm atom = compile_atom("a", "ab");
    Certificate cc = mm_complement(atom.cert);
    CHECK(cc.cut_point == doctest::Approx(1.0 - atom.cert.cut_point));
    CHECK(cc.one_sided == OneSided::Negative);
    CHECK(cc.co_end_decisive == atom.cert.end_decisive);
}

TEST_CASE("complement of the z=a automaton accepts b with certainty") {
    CertifiedMm atom = compile_atom("a", "ab");
    MmQfa comp = mm_complement(atom.aut);
    MmRunResult r = mm_accept_prob(comp, "b");
    CHECK(r.p_acc == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("inverse homomorphism") {
    CertifiedMm atom = compile_atom("ab", "ab");
    SUBCASE("identity homomorphism preserves every probability") {
        Homomorphism h{{'a', "a"}, {'b', "b"}};
        MmQfa m2 = mm_inverse_hom(atom.aut, h);
        CHECK(validate(m2).empty());
        for (const std::string& w : all_words("ab", 4)) {
            MmRunResult orig = mm_accept_prob(atom.aut, w);
            MmRunResult mapped = mm_accept_prob(m2, w);
            CHECK(mapped.p_acc == doctest::Approx(orig.p_acc).epsilon(1e-9));
            CHECK(mapped.p_rej == doctest::Approx(orig.p_rej).epsilon(1e-9));
        }
    }
    SUBCASE("p_{M'}(w) = p_M(h(w)) including empty images") {
        Homomorphism h{{'a', "ab"}, {'b', ""}};
        MmQfa m2 = mm_inverse_hom(atom.aut, h);
        CHECK(validate(m2).empty());
        for (const std::string& w : all_words("ab", 4)) {
            std::string hw;
            for (char c : w) hw += h.at(c);
            CHECK(mm_accept_prob(m2, w).p_acc ==
                  doctest::Approx(mm_accept_prob(atom.aut, hw).p_acc).epsilon(1e-9));
        }
    }
    SUBCASE("state count follows n + m(n - n_non)") {
        // z="ab" has 7 states, 3 non-halting; image length 2 gives 7 + 2*4.
        Homomorphism h{{'a', "ab"}, {'b', "ba"}};
        MmQfa m2 = mm_inverse_hom(atom.aut, h);
        CHECK(m2.n_states == 7 + 2 * 4);
    }
}

TEST_CASE("mo_strip_left_endmarker") {
    SUBCASE("identity cent matrix leaves the automaton unchanged") {
        MoQfa rot = example_rotation();
        MoQfa stripped = mo_strip_left_endmarker(rot, identity(2));
        for (const auto& [c, u] : rot.trans) CHECK(matrices_equal(stripped.trans.at(c), u));
    }
    SUBCASE("word probabilities match the two-marker automaton") {
        for (int rep = 0; rep < 5; ++rep) {
            MoQfa m;
            m.alphabet = "ab";
            m.n_states = 3;
            for (char c : std::string("ab") + kEndMarker) m.trans[c] = random_unitary(3);
            m.initial = {1.0, 0.0, 0.0};
            m.accepting = {1};
            CMatrix cent = random_unitary(3);
            MoQfa stripped = mo_strip_left_endmarker(m, cent);
            CHECK(validate(stripped).empty());
            for (const std::string& w : all_words("ab", 5))
                CHECK(mo_accept_prob(stripped, w) ==
                      doctest::Approx(mo_two_marker_prob(m, cent, w)).epsilon(1e-9));
        }
    }
    SUBCASE("matrix composition law U'(x$) = U(cent x$)") {
        MoQfa m;
        m.alphabet = "ab";
        m.n_states = 3;
        for (char c : std::string("ab") + kEndMarker) m.trans[c] = random_unitary(3);
        m.initial = {1.0, 0.0, 0.0};
        m.accepting = {0};
        CMatrix cent = random_unitary(3);
        MoQfa s = mo_strip_left_endmarker(m, cent);
        std::string x = "aba";
        CMatrix lhs = s.trans.at(kEndMarker);
        CMatrix rhs = m.trans.at(kEndMarker);
        for (auto it = x.rbegin(); it != x.rend(); ++it) {
            lhs = mat_mul(lhs, s.trans.at(*it));
            rhs = mat_mul(rhs, m.trans.at(*it));
        }
        rhs = mat_mul(rhs, cent);
        CHECK(matrices_equal(lhs, rhs, 1e-11));
    }
}

TEST_CASE("mm_strip_left_endmarker") {
    AutomatonFile demo = example_endmark_demo();
    const MmQfa& m = *demo.mm;
    SUBCASE("state count is 2n - n_non") {
        MmQfa stripped = mm_strip_left_endmarker(m, identity(4));
        CHECK(stripped.n_states == 2 * 4 - 2);

        // Five states, three of them non-halting, give 2*5 - 3 = 7.
        MmQfa five;
        five.alphabet = "a";
        five.n_states = 5;
        five.kind = {StateKind::NonHalting, StateKind::NonHalting, StateKind::NonHalting,
                     StateKind::Accepting, StateKind::Rejecting};
        five.trans['a'] = random_unitary(5);
        five.trans[kEndMarker] = random_unitary(5);
        five.init_vector = {1.0, 0.0, 0.0, 0.0, 0.0};
        CHECK(mm_strip_left_endmarker(five, identity(5)).n_states == 7);
    }
    SUBCASE("identity cent matrix preserves word probabilities") {
        MmQfa stripped = mm_strip_left_endmarker(m, identity(4));
        CHECK(validate(stripped).empty());
        for (const std::string& w : all_words("ab", 4)) {
            MmRunResult a = mm_accept_prob(m, w);
            MmRunResult b = mm_accept_prob(stripped, w);
            CHECK(b.p_acc == doctest::Approx(a.p_acc).epsilon(1e-9));
            CHECK(b.p_rej == doctest::Approx(a.p_rej).epsilon(1e-9));
        }
    }
    SUBCASE("stripped automaton agrees with the two-marker run") {
        MmQfa stripped = mm_strip_left_endmarker(m, *demo.cent);
        CHECK(validate(stripped).empty());
        for (const std::string& w : all_words("ab", 5)) {
            MmRunResult two = mm_two_marker_run(m, *demo.cent, w);
            MmRunResult one = mm_accept_prob(stripped, w);
            CHECK(one.p_acc == doctest::Approx(two.p_acc).epsilon(1e-9));
            CHECK(one.p_rej == doctest::Approx(two.p_rej).epsilon(1e-9));
        }
    }
    SUBCASE("probability is conserved at every step") {
        MmQfa stripped = mm_strip_left_endmarker(m, *demo.cent);
        for (const std::string& w : {std::string("abab"), std::string("bbaa")}) {
            MmRunResult r = mm_accept_prob(stripped, w);
            for (const RunStep& s : r.trace)
                CHECK(std::abs(norm_sq(s.vec) + s.p_acc + s.p_rej - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("word quotient") {
    CertifiedMm atom = compile_atom("ab", "ab");
    SUBCASE("empty word leaves behavior unchanged") {
        for (QuotientSide side : {QuotientSide::Left, QuotientSide::Right}) {
            MmQfa q = word_quotient(atom.aut, "", side);
            for (const std::string& w : all_words("ab", 4))
                CHECK(mm_accept_prob(q, w).p_acc ==
                      doctest::Approx(mm_accept_prob(atom.aut, w).p_acc).epsilon(1e-9));
        }
    }
    SUBCASE("left quotient by a") {
        MmQfa q = word_quotient(atom.aut, "a", QuotientSide::Left);
        CHECK(mm_accept_prob(q, "b").p_acc ==
              doctest::Approx(mm_accept_prob(atom.aut, "ab").p_acc).epsilon(1e-9));
        for (const std::string& w : all_words("ab", 4))
            CHECK(mm_accept_prob(q, w).p_acc ==
                  doctest::Approx(mm_accept_prob(atom.aut, "a" + w).p_acc).epsilon(1e-9));
    }
    SUBCASE("right quotient by b") {
        MmQfa q = word_quotient(atom.aut, "b", QuotientSide::Right);
        CHECK(validate(q).empty());
        CHECK(mm_accept_prob(q, "a").p_acc ==
              doctest::Approx(mm_accept_prob(atom.aut, "ab").p_acc).epsilon(1e-9));
        for (const std::string& w : all_words("ab", 4))
            CHECK(mm_accept_prob(q, w).p_acc ==
                  doctest::Approx(mm_accept_prob(atom.aut, w + "b").p_acc).epsilon(1e-9));
    }
}

TEST_CASE("mm_tensor") {
    CertifiedMm a = compile_atom("a", "ab");
    CertifiedMm b = compile_atom("b", "ab");
    SUBCASE("product law and certificate bound") {
        CertifiedMm prod = mm_tensor(a, b);
        CHECK(validate(prod.aut).empty());
        CHECK(prod.aut.n_states == a.aut.n_states * b.aut.n_states);
        for (const std::string& w : all_words("ab", 4)) {
            double pa = mm_accept_prob(a.aut, w).p_acc;
            double pb = mm_accept_prob(b.aut, w).p_acc;
            double pp = mm_accept_prob(prod.aut, w).p_acc;
            CHECK(pp == doctest::Approx(pa * pb).epsilon(1e-9));
            if (subseq_oracle("a", w) && subseq_oracle("b", w))
                CHECK(pp >= a.cert.member_lower() * b.cert.member_lower());
        }
    }
    SUBCASE("tensor with the accept-all automaton is the identity of the product") {
        CertifiedMm all = compile_atom("", "ab");
        CertifiedMm prod = mm_tensor(a, all);
        for (const std::string& w : all_words("ab", 4))
            CHECK(mm_accept_prob(prod.aut, w).p_acc ==
                  doctest::Approx(mm_accept_prob(a.aut, w).p_acc).epsilon(1e-9));
    }
    SUBCASE("tensor with a never-halting automaton zeroes acceptance, keeps rejection") {
        MmQfa idle;
        idle.alphabet = "ab";
        idle.n_states = 1;
        idle.kind = {StateKind::NonHalting};
        for (char c : std::string("ab") + kEndMarker) idle.trans[c] = identity(1);
        idle.init_vector = {1.0};
        Certificate idle_cert;
        idle_cert.end_decisive = true;
        CertifiedMm prod = mm_tensor(a, {idle, idle_cert});
        for (const std::string& w : all_words("ab", 3)) {
            MmRunResult orig = mm_accept_prob(a.aut, w);
            MmRunResult r = mm_accept_prob(prod.aut, w);
            CHECK(r.p_acc == doctest::Approx(0.0));
            CHECK(r.p_rej == doctest::Approx(orig.p_rej).epsilon(1e-9));
        }
    }
    SUBCASE("non-end-decisive inputs are refused") {
        Certificate broken = a.cert;
        broken.end_decisive = false;
        CHECK_THROWS_AS((void)mm_tensor({a.aut, broken}, b), std::invalid_argument);
    }
}

TEST_CASE("mm_power") {
    CertifiedMm a = compile_atom("a", "ab");
    SUBCASE("k = 1 is behaviorally identical") {
        CertifiedMm p1 = mm_power(a, 1);
        for (const std::string& w : all_words("ab", 4))
            CHECK(mm_accept_prob(p1.aut, w).p_acc ==
                  doctest::Approx(mm_accept_prob(a.aut, w).p_acc).epsilon(1e-12));
    }
    SUBCASE("k = 2 squares the acceptance probability") {
        CertifiedMm p2 = mm_power(a, 2);
        double single = mm_accept_prob(a.aut, "a").p_acc;
        CHECK(mm_accept_prob(p2.aut, "a").p_acc == doctest::Approx(single * single).epsilon(1e-9));
        CHECK(p2.aut.n_states == a.aut.n_states * a.aut.n_states);
    }
    CHECK_THROWS_AS((void)mm_power(a, 0), std::invalid_argument);
}

TEST_CASE("mm_union") {
    CertifiedMm a = compile_atom("a", "ab");
    CertifiedMm b = compile_atom("b", "ab");
    SUBCASE("M union M with explicit s = t = 1 keeps the probabilities") {
        CertifiedMm u = mm_union(a, a, std::make_pair(1, 1));
        for (const std::string& w : all_words("ab", 4))
            CHECK(mm_accept_prob(u.aut, w).p_acc ==
                  doctest::Approx(mm_accept_prob(a.aut, w).p_acc).epsilon(1e-9));
    }
    SUBCASE("z=a union z=b") {
        std::pair<int, int> st{0, 0};
        CertifiedMm u = mm_union(a, b, std::nullopt, &st);
        CHECK(validate(u.aut).empty());
        CHECK(st.first == 1);
        CHECK(st.second == 1);
        CHECK(mm_accept_prob(u.aut, "").p_acc == doctest::Approx(0.0));
        double half = 0.5 * mm_accept_prob(a.aut, "a").p_acc;
        CHECK(mm_accept_prob(u.aut, "a").p_acc == doctest::Approx(half).epsilon(1e-9));
        // Member-of-both lower bound from the composition analysis.
        double bound = (std::pow(a.cert.member_lower(), st.first) +
                        std::pow(b.cert.member_lower(), st.second)) / 2.0;
        CHECK(mm_accept_prob(u.aut, "ab").p_acc >= bound);
    }
}

TEST_CASE("mm_complement_one_sided") {
    CertifiedMm a = compile_atom("a", "ab");
    CertifiedMm comp = mm_complement_one_sided(a);
    CHECK(validate(comp.aut).empty());
    CHECK(comp.aut.n_states == a.aut.n_states + 3);

    SUBCASE("non-members of L get exactly a*c^2/2; members strictly less") {
        // Complement language: words without an 'a'.
        double member_value = 0.5 * 0.5;  // a=1 reservoir at 1/sqrt(2), squared / 2
        CHECK(mm_accept_prob(comp.aut, "b").p_acc == doctest::Approx(member_value).epsilon(1e-12));
        CHECK(mm_accept_prob(comp.aut, "bb").p_acc == doctest::Approx(member_value).epsilon(1e-12));
        double worst_member = 0.0;
        for (const std::string& w : all_words("ab", 5)) {
            double p = mm_accept_prob(comp.aut, w).p_acc;
            if (subseq_oracle("a", w)) worst_member = std::max(worst_member, p);
            else CHECK(p == doctest::Approx(member_value).epsilon(1e-12));
        }
        CHECK(worst_member < member_value - comp.cert.margin);
    }
    SUBCASE("emitted certificate verifies against the complement oracle") {
        VerifyReport rep = verify_certificate(
            comp.aut, comp.cert, [](const std::string& w) { return !subseq_oracle("a", w); }, 5);
        CHECK(rep.ok);
    }
    SUBCASE("averaging arithmetic puts (alpha-beta)/sqrt(2) into the accept state") {
        // On a word with 'a': beta = scaled accept amplitude 1/(2 sqrt 2),
        // alpha = reservoir 1/sqrt(2); accept amplitude (alpha-beta)/sqrt(2).
        double alpha = 1.0 / std::sqrt(2.0);
        double beta = 0.5 * alpha;
        double expect = (alpha - beta) / std::sqrt(2.0);
        CHECK(mm_accept_prob(comp.aut, "a").p_acc == doctest::Approx(expect * expect).epsilon(1e-12));
    }
    SUBCASE("preconditions are enforced") {
        Certificate not_one_sided = a.cert;
        not_one_sided.one_sided = OneSided::None;
        CHECK_THROWS_AS((void)mm_complement_one_sided({a.aut, not_one_sided}),
                        std::invalid_argument);
    }
}

TEST_CASE("mm_intersect") {
    CertifiedMm a = compile_atom("a", "ab");
    CertifiedMm b = compile_atom("b", "ab");
    SUBCASE("one-sided inputs need k = 1") {
        int k = 0;
        CertifiedMm both = mm_intersect(a, b, &k);
        CHECK(k == 1);
        CHECK(validate(both.aut).empty());
    }
    SUBCASE("complement(b) intersect atom(a)") {
        CertifiedMm cb = mm_complement_one_sided(b);
        int k = 0;
        CertifiedMm inter = mm_intersect(cb, a, &k);
        CHECK(validate(inter.aut).empty());
        double cut = inter.cert.cut_point;
        CHECK(mm_accept_prob(inter.aut, "a").p_acc > cut);
        CHECK(mm_accept_prob(inter.aut, "ab").p_acc < cut);
        CHECK(mm_accept_prob(inter.aut, "b").p_acc == doctest::Approx(0.0).epsilon(1e-12));
        for (const std::string& w : all_words("ab", 4)) {
            bool in_lang = subseq_oracle("a", w) && !subseq_oracle("b", w);
            double p = mm_accept_prob(inter.aut, w).p_acc;
            CHECK((p > cut) == in_lang);
            if (!subseq_oracle("a", w)) CHECK(p == doctest::Approx(0.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("auto-selection failures are explicit errors") {
    // A certificate too weak to separate: the bad bound stays above half of
    // the good bound at every power.
    MmQfa idle;
    idle.alphabet = "ab";
    idle.n_states = 1;
    idle.kind = {StateKind::NonHalting};
    for (char c : std::string("ab") + kEndMarker) idle.trans[c] = identity(1);
    idle.init_vector = {1.0};
    Certificate weak;
    weak.cut_point = 0.5;
    weak.margin = 1e-3;
    weak.max_margin = 2e-3;
    weak.end_decisive = true;
    CertifiedMm stub{idle, weak};
    CHECK_THROWS_WITH_AS((void)mm_union(stub, stub), doctest::Contains("no powers"),
                         std::runtime_error);
    Certificate one_sided;
    one_sided.cut_point = one_sided.margin = 1e-4;
    one_sided.max_margin = 0.9;
    one_sided.one_sided = OneSided::Positive;
    one_sided.end_decisive = true;
    CHECK_THROWS_WITH_AS((void)mm_intersect(stub, {idle, one_sided}),
                         doctest::Contains("no power k"), std::runtime_error);
}

TEST_CASE("tensor blowup past the dense cap is refused") {
    CertifiedMm a = compile_atom("a", "ab");  // 5 states
    CHECK_THROWS_WITH_AS((void)mm_power(a, 6), doctest::Contains("cap"), std::invalid_argument);
}

TEST_CASE("construction outputs verify their emitted certificates") {
    CertifiedMm a = compile_atom("a", "ab");
    CertifiedMm b = compile_atom("ab", "ab");
    struct Case {
        CertifiedMm m;
        std::function<bool(const std::string&)> member;
    };
    std::vector<Case> cases;
    cases.push_back({mm_tensor(a, b), [](const std::string& w) {
                         return subseq_oracle("a", w) && subseq_oracle("ab", w);
                     }});
    cases.push_back({mm_union(a, b), [](const std::string& w) {
                         return subseq_oracle("a", w) || subseq_oracle("ab", w);
                     }});
    cases.push_back({mm_power(a, 2), [](const std::string& w) { return subseq_oracle("a", w); }});
    cases.push_back({mm_complement_one_sided(a),
                     [](const std::string& w) { return !subseq_oracle("a", w); }});
    for (const auto& c : cases) {
        CHECK(validate(c.m.aut).empty());
        VerifyReport rep = verify_certificate(c.m.aut, c.m.cert, c.member, 5);
        INFO(rep.first_violation);
        CHECK(rep.ok);
    }
}
