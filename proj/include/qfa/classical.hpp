#ifndef QFA_CLASSICAL_HPP
#define QFA_CLASSICAL_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qfa/qfa_core.hpp"

namespace qfa {

struct Dfa {
    int n_states = 0;
    std::string alphabet;
    std::vector<std::vector<int>> delta;  // [state][symbol index]
    int start = 0;
    std::set<int> accepting;

    int symbol_index(char c) const;
    int step(int state, char c) const { return delta[state][symbol_index(c)]; }
    int run(int state, const std::string& w) const;
    bool accepts(const std::string& w) const;
};

std::vector<std::string> validate(const Dfa& d);

// Language-equivalent minimal DFA with canonical BFS state order.
Dfa dfa_minimize(const Dfa& d);

struct PoWitness {
    int q1 = 0, q2 = 0;
    std::string x, y, z;
};

struct PoResult {
    bool satisfied = true;
    std::optional<PoWitness> witness;
};

// Partial order condition: no distinguishable q1,q2 with a nonempty x
// merging both into q2 and a nonempty y returning q2 to q1.  Minimizes
// internally.
PoResult check_partial_order(const Dfa& d);

struct IrrWitness {
    int q1 = 0, q2 = 0;
    std::string x, y, z;
};

struct IrrResult {
    bool present = false;
    std::optional<IrrWitness> witness;
};

// Irreversible construction: distinct q1,q2 merged into q2 by some x, with
// both acceptance outcomes reachable from q2.  Minimizes internally.
IrrResult check_irreversible(const Dfa& d);

// Every symbol's transition map is a permutation of the states.
bool check_gfa(const Dfa& d);

// Any state with in-degree >= 2 under some symbol must be a spin state.
bool check_rfa(const Dfa& d);

// Permutation matrices per symbol, identity end-marker, basis start vector;
// accepts the DFA's language with certainty.
MoQfa gfa_to_moqfa(const Dfa& d);

// Real dense matrix.
struct DMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    DMatrix() = default;
    DMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}
    double& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    const double& at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
};

struct Pfa {
    int n_states = 0;
    std::string alphabet;                // end-marker already folded in
    std::map<char, DMatrix> trans;       // row-stochastic
    std::vector<double> start;           // probability distribution
    std::set<int> accepting;
    double cut_point = 0.5;
    // Normalization constants kept for auditability.
    double norm_shift = 0.0;
    int norm_dim = 0;
};

std::vector<std::string> validate(const Pfa& p);

double pfa_accept_prob(const Pfa& p, const std::string& word);

// Generalized stochastic system: evaluation of w is
// initial * M(w_1) * ... * M(w_k) * M($) * final, reported as a real number.
struct LinearSystem {
    int dim = 0;
    std::string alphabet;            // end-marker excluded; '$' keyed in trans
    std::map<char, CMatrix> trans;   // including '$'
    CVector initial_row;
    CVector final_col;

    double eval(const std::string& word) const;
};

// Conjugate-tensor lift: evaluation equals mo_accept_prob on every word.
LinearSystem bilinearize(const MoQfa& m);

struct EquivResult {
    bool equivalent = true;
    std::optional<std::string> separating_word;
};

// Spanning-basis decision procedure on the difference system; agrees with
// exhaustive evaluation up to the d_a + d_b - 1 word-length bound.
EquivResult linsys_equiv(const LinearSystem& a, const LinearSystem& b, double tol = kDefaultTol);

EquivResult moqfa_equiv(const MoQfa& m1, const MoQfa& m2, double tol = kDefaultTol);

// Bilinearize, realify, and normalize into a PFA whose cut-point
// classification matches the source automaton's at cut-point `lambda`.
Pfa moqfa_to_pfa(const MoQfa& m, double lambda = 0.5);

}  // namespace qfa

#endif
