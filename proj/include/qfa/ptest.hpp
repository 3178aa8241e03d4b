#ifndef QFA_PTEST_HPP
#define QFA_PTEST_HPP

#include <memory>
#include <string>
#include <vector>

#include "qfa/constructions.hpp"

namespace qfa {

// Boolean combination of subsequence atoms.
// Grammar:  expr := term ('|' term)*
//           term := factor ('&' factor)*
//           factor := '!' factor | '(' expr ')' | '"' symbols '"'
struct PtestExpr {
    enum class Kind { Atom, And, Or, Not };
    Kind kind = Kind::Atom;
    std::string atom;
    std::vector<PtestExpr> children;
};

struct ParseError : std::runtime_error {
    size_t position;
    ParseError(const std::string& msg, size_t pos)
        : std::runtime_error(msg + " at position " + std::to_string(pos)), position(pos) {}
};

PtestExpr parse_expr(const std::string& text, const std::string& alphabet);

// One union term: the intersection of the positive atoms minus the union of
// the negative ones.
struct Implicant {
    std::vector<std::string> positives;
    std::vector<std::string> negatives;
};

using CanonicalForm = std::vector<Implicant>;

CanonicalForm canonicalize(const PtestExpr& e);

// Greedy left-to-right subsequence test; the empty z matches everything.
bool subseq_oracle(const std::string& z, const std::string& w);

// Boolean evaluation of an expression under the subsequence semantics.
bool eval_expr(const PtestExpr& e, const std::string& word);

// Trigger-chain acceptor for the words containing z as a subsequence.
CertifiedMm compile_atom(const std::string& z, const std::string& alphabet);

struct CompileResult {
    CertifiedMm automaton;
    std::vector<std::string> report;  // one line per construction step
};

CompileResult compile(const PtestExpr& e, const std::string& alphabet);

}  // namespace qfa

#endif
