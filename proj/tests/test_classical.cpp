#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "qfa/classical.hpp"
#include "qfa/io.hpp"

using namespace qfa;

namespace {

std::mt19937_64 rng(777);

// Minimal DFA of {a,b}*b: state 1 is reached exactly after a trailing b.
Dfa last_is_b() {
    Dfa d;
    d.n_states = 2;
    d.alphabet = "ab";
    d.delta = {{0, 1}, {0, 1}};
    d.start = 0;
    d.accepting = {1};
    return d;
}

// Chain DFA of the subsequence language of z.
Dfa subsequence_dfa(const std::string& z, const std::string& alphabet) {
    Dfa d;
    d.n_states = static_cast<int>(z.size()) + 1;
    d.alphabet = alphabet;
    d.delta.assign(d.n_states, std::vector<int>(alphabet.size(), 0));
    for (int q = 0; q < d.n_states; ++q)
        for (size_t s = 0; s < alphabet.size(); ++s) {
            if (q < static_cast<int>(z.size()) && z[q] == alphabet[s]) d.delta[q][s] = q + 1;
            else d.delta[q][s] = q;
        }
    d.start = 0;
    d.accepting = {static_cast<int>(z.size())};
    return d;
}

Dfa random_dfa(int max_states, const std::string& alphabet) {
    std::uniform_int_distribution<int> pick_n(1, max_states);
    int n = pick_n(rng);
    Dfa d;
    d.n_states = n;
    d.alphabet = alphabet;
    d.delta.assign(n, std::vector<int>(alphabet.size(), 0));
    std::uniform_int_distribution<int> pick_state(0, n - 1);
    std::bernoulli_distribution coin(0.5);
    for (int q = 0; q < n; ++q)
        for (size_t s = 0; s < alphabet.size(); ++s) d.delta[q][s] = pick_state(rng);
    d.start = 0;
    for (int q = 0; q < n; ++q)
        if (coin(rng)) d.accepting.insert(q);
    return d;
}

bool same_language(const Dfa& a, const Dfa& b, int max_len) {
    for (const std::string& w : all_words(a.alphabet, max_len))
        if (a.accepts(w) != b.accepts(w)) return false;
    return true;
}

Dfa product_intersection(const Dfa& a, const Dfa& b) {
    Dfa d;
    d.n_states = a.n_states * b.n_states;
    d.alphabet = a.alphabet;
    d.delta.assign(d.n_states, std::vector<int>(d.alphabet.size(), 0));
    for (int i = 0; i < a.n_states; ++i)
        for (int j = 0; j < b.n_states; ++j)
            for (size_t s = 0; s < d.alphabet.size(); ++s)
                d.delta[i * b.n_states + j][s] = a.delta[i][s] * b.n_states + b.delta[j][s];
    d.start = a.start * b.n_states + b.start;
    for (int i : a.accepting)
        for (int j : b.accepting) d.accepting.insert(i * b.n_states + j);
    return d;
}

}  // namespace

TEST_CASE("dfa_minimize") {
    SUBCASE("already-minimal parity automaton keeps its size") {
        Dfa p = example_parity();
        Dfa m = dfa_minimize(p);
        CHECK(m.n_states == 2);
        CHECK(same_language(p, m, 6));
    }
    SUBCASE("equivalent states are merged") {
        // States 1 and 2 behave identically.
        Dfa d;
        d.n_states = 4;
        d.alphabet = "ab";
        d.delta = {{1, 2}, {3, 3}, {3, 3}, {3, 3}};
        d.start = 0;
        d.accepting = {3};
        Dfa m = dfa_minimize(d);
        CHECK(m.n_states == 3);
        CHECK(same_language(d, m, 6));
    }
    SUBCASE("unreachable states are dropped") {
        Dfa d;
        d.n_states = 3;
        d.alphabet = "a";
        d.delta = {{0}, {2}, {1}};
        d.start = 0;
        d.accepting = {0, 1};
        Dfa m = dfa_minimize(d);
        CHECK(m.n_states == 1);
        CHECK(same_language(d, m, 6));
    }
    SUBCASE("random automata keep their language") {
        for (int rep = 0; rep < 25; ++rep) {
            Dfa d = random_dfa(5, "ab");
            Dfa m = dfa_minimize(d);
            CHECK(m.n_states <= d.n_states);
            CHECK(same_language(d, m, 6));
        }
    }
}

TEST_CASE("check_partial_order") {
    SUBCASE("the last-symbol language violates the condition") {
        PoResult r = check_partial_order(last_is_b());
        REQUIRE_FALSE(r.satisfied);
        REQUIRE(r.witness.has_value());
        const PoWitness& w = *r.witness;
        CHECK(w.x == "b");
        CHECK(w.y == "a");
        // Re-simulate the witness against the minimized automaton.
        Dfa d = dfa_minimize(last_is_b());
        CHECK(d.run(w.q1, w.x) == w.q2);
        CHECK(d.run(w.q2, w.x) == w.q2);
        CHECK(d.run(w.q2, w.y) == w.q1);
        CHECK(d.accepting.count(d.run(w.q1, w.z)) != d.accepting.count(d.run(w.q2, w.z)));
    }
    SUBCASE("subsequence languages satisfy the condition") {
        for (const std::string& z : {std::string("a"), std::string("ab"), std::string("aba")})
            CHECK(check_partial_order(subsequence_dfa(z, "ab")).satisfied);
    }
    SUBCASE("one-state automata satisfy trivially") {
        Dfa d;
        d.n_states = 1;
        d.alphabet = "ab";
        d.delta = {{0, 0}};
        d.start = 0;
        CHECK(check_partial_order(d).satisfied);
    }
}

TEST_CASE("check_gfa") {
    CHECK(check_gfa(example_parity()));
    Dfa sink;
    sink.n_states = 2;
    sink.alphabet = "a";
    sink.delta = {{1}, {1}};
    sink.start = 0;
    CHECK_FALSE(check_gfa(sink));
    CHECK_FALSE(check_gfa(last_is_b()));
}

TEST_CASE("check_rfa") {
    CHECK(check_rfa(example_parity()));  // every GFA is an RFA
    // End-trigger automaton with a spin accept state.
    Dfa spin;
    spin.n_states = 2;
    spin.alphabet = "abc";
    spin.delta = {{0, 0, 1}, {1, 1, 1}};
    spin.start = 0;
    spin.accepting = {1};
    CHECK(check_rfa(spin));
    CHECK_FALSE(check_rfa(last_is_b()));
}

TEST_CASE("check_irreversible") {
    SUBCASE("the last-symbol language contains the construction") {
        IrrResult r = check_irreversible(last_is_b());
        REQUIRE(r.present);
        const IrrWitness& w = *r.witness;
        Dfa d = dfa_minimize(last_is_b());
        CHECK(d.run(w.q1, w.x) == w.q2);
        CHECK(d.run(w.q2, w.x) == w.q2);
        CHECK(d.accepting.count(d.run(w.q2, w.y)) == 1);
        CHECK(d.accepting.count(d.run(w.q2, w.z)) == 0);
    }
    SUBCASE("permutation automata admit no merging string") {
        CHECK_FALSE(check_irreversible(example_parity()).present);
    }
    SUBCASE("an accepting sink has no rejecting continuation") {
        Dfa d;
        d.n_states = 2;
        d.alphabet = "ab";
        d.delta = {{1, 1}, {1, 1}};
        d.start = 0;
        d.accepting = {0, 1};
        CHECK_FALSE(check_irreversible(d).present);
    }
}

TEST_CASE("gfa_to_moqfa") {
    SUBCASE("parity automaton accepts with certainty") {
        Dfa p = example_parity();
        MoQfa m = gfa_to_moqfa(p);
        CHECK(validate(m).empty());
        for (const std::string& w : all_words("a", 8)) {
            double prob = mo_accept_prob(m, w);
            CHECK((prob == 0.0 || prob == 1.0));
            CHECK((prob == 1.0) == p.accepts(w));
        }
    }
    SUBCASE("one accepting state on a loop") {
        Dfa d;
        d.n_states = 1;
        d.alphabet = "a";
        d.delta = {{0}};
        d.start = 0;
        d.accepting = {0};
        MoQfa m = gfa_to_moqfa(d);
        for (const std::string& w : all_words("a", 5))
            CHECK(mo_accept_prob(m, w) == 1.0);
    }
    SUBCASE("three-cycle has period three") {
        Dfa d;
        d.n_states = 3;
        d.alphabet = "a";
        d.delta = {{1}, {2}, {0}};
        d.start = 0;
        d.accepting = {0};
        MoQfa m = gfa_to_moqfa(d);
        CHECK(mo_accept_prob(m, "aaa") == mo_accept_prob(m, ""));
        CHECK(mo_accept_prob(m, "aaa") == 1.0);
    }
    CHECK_THROWS_AS((void)gfa_to_moqfa(last_is_b()), std::invalid_argument);
}

TEST_CASE("bilinearize") {
    SUBCASE("one-state automaton evaluates to a constant") {
        MoQfa m;
        m.alphabet = "a";
        m.n_states = 1;
        m.trans['a'] = identity(1);
        m.trans[kEndMarker] = identity(1);
        m.initial = {1.0};
        m.accepting = {0};
        LinearSystem s = bilinearize(m);
        CHECK(s.dim == 1);
        CHECK(s.eval("") == doctest::Approx(1.0));
        CHECK(s.eval("aaa") == doctest::Approx(1.0));
    }
    SUBCASE("rotation automaton") {
        LinearSystem s = bilinearize(example_rotation());
        CHECK(s.dim == 4);
        CHECK(s.eval("a") == doctest::Approx(0.64).epsilon(1e-12));
    }
    SUBCASE("evaluation equals direct simulation on random words") {
        MoQfa rot = example_rotation();
        MoQfa fg = example_free_group();
        LinearSystem srot = bilinearize(rot);
        LinearSystem sfg = bilinearize(fg);
        std::uniform_int_distribution<int> len(0, 6);
        for (int rep = 0; rep < 200; ++rep) {
            auto pick = [&](const std::string& alphabet) {
                std::uniform_int_distribution<int> sym(0, static_cast<int>(alphabet.size()) - 1);
                std::string w;
                int l = len(rng);
                for (int i = 0; i < l; ++i) w.push_back(alphabet[sym(rng)]);
                return w;
            };
            std::string w1 = pick("ab");
            CHECK(srot.eval(w1) == doctest::Approx(mo_accept_prob(rot, w1)).epsilon(1e-9));
            std::string w2 = pick("aAbB");
            CHECK(sfg.eval(w2) == doctest::Approx(mo_accept_prob(fg, w2)).epsilon(1e-9));
            CHECK(sfg.eval(w2) >= -1e-9);
            CHECK(sfg.eval(w2) <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("linsys_equiv and moqfa_equiv") {
    MoQfa rot = example_rotation();
    SUBCASE("a system equals itself") {
        LinearSystem s = bilinearize(rot);
        CHECK(linsys_equiv(s, s).equivalent);
    }
    SUBCASE("rotation by -alpha is equivalent") {
        MoQfa neg = example_rotation(3.0 / 5.0, -4.0 / 5.0);
        EquivResult r = moqfa_equiv(rot, neg);
        CHECK(r.equivalent);
    }
    SUBCASE("rotation by 2*alpha is separated by the word a") {
        double c2 = 2.0 * (3.0 / 5.0) * (3.0 / 5.0) - 1.0;  // cos(2a)
        double s2 = 2.0 * (4.0 / 5.0) * (3.0 / 5.0);        // sin(2a)
        MoQfa dbl = example_rotation(c2, s2);
        CHECK(mo_accept_prob(rot, "a") == doctest::Approx(0.64));
        CHECK(mo_accept_prob(dbl, "a") == doctest::Approx(0.9216));
        EquivResult r = moqfa_equiv(rot, dbl);
        REQUIRE_FALSE(r.equivalent);
        CHECK(*r.separating_word == "a");
    }
    SUBCASE("verdicts agree with exhaustive evaluation to the length bound") {
        MoQfa neg = example_rotation(3.0 / 5.0, -4.0 / 5.0);
        MoQfa dbl = example_rotation(-7.0 / 25.0, 24.0 / 25.0);
        auto exhaustive = [&](const MoQfa& a, const MoQfa& b) {
            LinearSystem sa = bilinearize(a), sb = bilinearize(b);
            for (const std::string& w : all_words("ab", sa.dim + sb.dim - 1 > 7 ? 7 : sa.dim + sb.dim - 1))
                if (std::abs(mo_accept_prob(a, w) - mo_accept_prob(b, w)) > 1e-9) return false;
            return true;
        };
        CHECK(moqfa_equiv(rot, neg).equivalent == exhaustive(rot, neg));
        CHECK(moqfa_equiv(rot, dbl).equivalent == exhaustive(rot, dbl));
    }
    SUBCASE("state-permuted copies are equivalent") {
        MoQfa perm;
        perm.alphabet = rot.alphabet;
        perm.n_states = 2;
        CMatrix p = permutation_matrix({1, 0});
        for (const auto& [c, u] : rot.trans)
            perm.trans[c] = mat_mul(p, mat_mul(u, conjugate_transpose(p)));
        perm.initial = mat_vec(p, rot.initial);
        perm.accepting = {0};
        CHECK(moqfa_equiv(rot, perm).equivalent);
    }
    SUBCASE("a group-language automaton matches its compiled minimal DFA") {
        Dfa three;
        three.n_states = 3;
        three.alphabet = "a";
        three.delta = {{1}, {2}, {0}};
        three.start = 0;
        three.accepting = {0};
        // The same language entered through a relabeled permutation automaton.
        Dfa relabeled;
        relabeled.n_states = 3;
        relabeled.alphabet = "a";
        relabeled.delta = {{2}, {0}, {1}};
        relabeled.start = 0;
        relabeled.accepting = {0};
        CHECK(moqfa_equiv(gfa_to_moqfa(three), gfa_to_moqfa(dfa_minimize(relabeled))).equivalent);
        for (const std::string& w : all_words("a", 8))
            CHECK(mo_accept_prob(gfa_to_moqfa(three), w) ==
                  doctest::Approx(mo_accept_prob(gfa_to_moqfa(relabeled), w)));
    }
}

TEST_CASE("every group automaton is reversible") {
    int gfas = 0;
    for (int rep = 0; rep < 200; ++rep) {
        Dfa d = random_dfa(4, "ab");
        if (check_gfa(d)) {
            ++gfas;
            CHECK(check_rfa(d));
        }
    }
    CHECK(gfas > 0);  // the sample actually exercised the implication
}

TEST_CASE("product of partial-order languages keeps the condition") {
    int done = 0;
    while (done < 20) {
        Dfa a = random_dfa(4, "ab");
        Dfa b = random_dfa(4, "ab");
        if (!check_partial_order(a).satisfied || !check_partial_order(b).satisfied) continue;
        ++done;
        Dfa prod = dfa_minimize(product_intersection(a, b));
        CHECK(check_partial_order(prod).satisfied);
    }
}

TEST_CASE("moqfa_to_pfa") {
    SUBCASE("rotation automaton at cut-point zero") {
        MoQfa rot = example_rotation();
        Pfa p = moqfa_to_pfa(rot, 0.0);
        CHECK(validate(p).empty());
        for (const std::string& w : all_words("ab", 6)) {
            int na = 0, nb = 0;
            for (char c : w) (c == 'a' ? na : nb)++;
            bool member = na != nb;
            // Nonempty words sitting exactly on the source cut-point are
            // boundary cases; their transformed sign is not defined.  The
            // empty word is classified discretely by the accepting set.
            if (!w.empty() && std::abs(mo_accept_prob(rot, w) - 0.0) < 1e-12) {
                CHECK_FALSE(member);
                CHECK(std::abs(pfa_accept_prob(p, w) - p.cut_point) < 1e-12);
                continue;
            }
            CHECK((pfa_accept_prob(p, w) > p.cut_point) == member);
        }
    }
    SUBCASE("GFA-compiled automata classify like the DFA") {
        Dfa three;
        three.n_states = 3;
        three.alphabet = "ab";
        three.delta = {{1, 0}, {2, 1}, {0, 2}};
        three.start = 0;
        three.accepting = {0};
        for (const Dfa& d : {example_parity(), three}) {
            MoQfa m = gfa_to_moqfa(d);
            Pfa p = moqfa_to_pfa(m, 0.5);
            CHECK(validate(p).empty());
            for (const std::string& w : all_words(d.alphabet, 6))
                CHECK((pfa_accept_prob(p, w) > p.cut_point) == d.accepts(w));
        }
    }
    SUBCASE("rows are stochastic and entries nonnegative") {
        Pfa p = moqfa_to_pfa(example_free_group(), 0.5);
        CHECK(validate(p).empty());
        for (const auto& [c, m] : p.trans)
            for (int i = 0; i < m.rows; ++i) {
                double row = 0.0;
                for (int j = 0; j < m.cols; ++j) {
                    CHECK(m.at(i, j) >= 0.0);
                    row += m.at(i, j);
                }
                CHECK(row == doctest::Approx(1.0).epsilon(1e-9));
            }
    }
    SUBCASE("empty-word classification is preserved") {
        Dfa d = example_parity();  // accepts the empty word
        Pfa p = moqfa_to_pfa(gfa_to_moqfa(d), 0.5);
        CHECK(pfa_accept_prob(p, "") > p.cut_point);
        Dfa odd = d;
        odd.accepting = {1};  // rejects the empty word
        Pfa p2 = moqfa_to_pfa(gfa_to_moqfa(odd), 0.5);
        CHECK_FALSE(pfa_accept_prob(p2, "") > p2.cut_point);
    }
}

TEST_CASE("free-group automaton accepts identity words with certainty") {
    MoQfa fg = example_free_group();
    CHECK(validate(fg).empty());
    CHECK(mo_accept_prob(fg, "") == doctest::Approx(1.0));
    CHECK(mo_accept_prob(fg, "aA") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mo_accept_prob(fg, "bB") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mo_accept_prob(fg, "abBA") == doctest::Approx(1.0).epsilon(1e-12));
    // Non-identity words are rejected with non-zero probability.
    CHECK(mo_accept_prob(fg, "a") < 1.0 - 1e-3);
    CHECK(mo_accept_prob(fg, "ab") < 1.0 - 1e-3);
    CHECK(mo_accept_prob(fg, "abab") < 1.0 - 1e-6);
}
