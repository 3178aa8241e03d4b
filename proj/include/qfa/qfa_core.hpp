#ifndef QFA_QFA_CORE_HPP
#define QFA_QFA_CORE_HPP

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qfa/numerics.hpp"

namespace qfa {

// The end-marker terminates every input; it is never part of a word.
inline constexpr char kEndMarker = '$';

enum class StateKind { NonHalting, Accepting, Rejecting };

enum class OneSided { Positive, Negative, None };

// Measure-once automaton: one projective measurement after the end-marker.
struct MoQfa {
    std::string alphabet;               // input symbols, end-marker excluded
    int n_states = 0;
    std::map<char, CMatrix> trans;      // keyed by symbol, including '$'
    CVector initial;                    // unit vector
    std::set<int> accepting;

    const CMatrix& matrix(char symbol) const;
};

// Measure-many automaton in the triple representation: a live vector over
// the non-halting states plus cumulative halting probabilities.
struct MmQfa {
    std::string alphabet;
    int n_states = 0;
    std::map<char, CMatrix> trans;      // keyed by symbol, including '$'
    std::vector<StateKind> kind;        // one label per state
    CVector init_vector;
    double init_p_acc = 0.0;
    double init_p_rej = 0.0;
    std::set<int> junk;                 // subset of the halting states

    const CMatrix& matrix(char symbol) const;
    std::set<int> states_of(StateKind k) const;
    int count_of(StateKind k) const;
};

struct MmTriple {
    CVector vec;
    double p_acc = 0.0;
    double p_rej = 0.0;
};

struct RunStep {
    char symbol = 0;
    CVector vec;      // post-measurement live vector (not renormalized)
    double p_acc = 0.0;
    double p_rej = 0.0;
    double step_acc_gain = 0.0;  // probability measured accepting at this step
    double step_rej_gain = 0.0;
};

using RunTrace = std::vector<RunStep>;

struct MmRunResult {
    double p_acc = 0.0;
    double p_rej = 0.0;
    double leftover = 0.0;  // live mass remaining after the end-marker
    RunTrace trace;
};

// Cut-point acceptance data carried through every construction.
// Words in the language satisfy p_acc > cut_point + margin; words outside
// satisfy p_acc < cut_point - margin (p_acc = 0 exactly for one-sided
// positive automata).  max_margin is the envelope half-width: every word
// satisfies max(0, cut-max_margin) <= p_acc <= cut+max_margin.
struct Certificate {
    double cut_point = 0.5;
    double margin = 0.0;
    double max_margin = 0.0;
    bool end_decisive = false;
    bool co_end_decisive = false;
    OneSided one_sided = OneSided::None;
    bool positive_amplitude = false;

    double member_lower() const { return cut_point + margin; }
    double nonmember_upper() const { return cut_point - margin; }
    double envelope_hi() const { return std::min(1.0, cut_point + max_margin); }
    double envelope_lo() const { return std::max(0.0, cut_point - max_margin); }
};

std::vector<std::string> validate_certificate(const Certificate& c);

// Probability of the MO automaton accepting `word` (end-marker implicit).
double mo_accept_prob(const MoQfa& m, const std::string& word);

// One transition of the measure-many evolution: apply u, measure, fold the
// halting mass into the cumulative probabilities.  The retained vector is
// not renormalized.
MmTriple mm_step(const MmTriple& state, const CMatrix& u, const std::vector<StateKind>& kind);

MmRunResult mm_accept_prob(const MmQfa& m, const std::string& word);

// Structural diagnostics; empty means all type invariants hold at `tol`.
std::vector<std::string> validate(const MoQfa& m, double tol = kDefaultTol);
std::vector<std::string> validate(const MmQfa& m, double tol = kDefaultTol);

struct VerifyReport {
    bool ok = true;
    long words_checked = 0;
    std::string first_violation;  // empty on success
};

// Exhaustively audits a certificate against a boolean language oracle on
// every word of length <= max_len.
VerifyReport verify_certificate(const MmQfa& m, const Certificate& cert,
                                const std::function<bool(const std::string&)>& member,
                                int max_len, double tol = kDefaultTol);

// Shortlex enumeration of all words over `alphabet` up to max_len.
std::vector<std::string> all_words(const std::string& alphabet, int max_len);

}  // namespace qfa

#endif
