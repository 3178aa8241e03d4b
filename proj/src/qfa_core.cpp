#include "qfa/qfa_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qfa {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

const CMatrix& lookup(const std::map<char, CMatrix>& trans, char symbol) {
    auto it = trans.find(symbol);
    if (it == trans.end())
        throw std::invalid_argument(std::string("unknown symbol '") + symbol + "'");
    return it->second;
}

void check_word(const std::string& alphabet, const std::string& word) {
    for (char c : word) {
        if (c == kEndMarker)
            throw std::invalid_argument("word must not contain the end-marker");
        if (alphabet.find(c) == std::string::npos)
            throw std::invalid_argument(std::string("unknown symbol '") + c + "'");
    }
}

}  // namespace

const CMatrix& MoQfa::matrix(char symbol) const { return lookup(trans, symbol); }
const CMatrix& MmQfa::matrix(char symbol) const { return lookup(trans, symbol); }

std::set<int> MmQfa::states_of(StateKind k) const {
    std::set<int> out;
    for (int i = 0; i < n_states; ++i)
        if (kind[i] == k) out.insert(i);
    return out;
}

int MmQfa::count_of(StateKind k) const {
    return static_cast<int>(std::count(kind.begin(), kind.end(), k));
}

std::vector<std::string> validate_certificate(const Certificate& c) {
    std::vector<std::string> out;
    if (c.cut_point < 0.0 || c.cut_point > 1.0)
        out.push_back("certificate: cut-point " + fmt(c.cut_point) + " outside [0,1]");
    if (c.margin < 0.0) out.push_back("certificate: negative margin");
    if (c.max_margin < c.margin)
        out.push_back("certificate: max margin " + fmt(c.max_margin) + " below margin " + fmt(c.margin));
    if (c.cut_point - c.margin < -kDefaultTol)
        out.push_back("certificate: cut-point minus margin is negative");
    if (c.cut_point + c.margin > 1.0 + kDefaultTol)
        out.push_back("certificate: cut-point plus margin exceeds 1");
    if (c.one_sided == OneSided::Positive && std::abs(c.cut_point - c.margin) > kDefaultTol)
        out.push_back("certificate: one-sided positive requires cut-point = margin");
    return out;
}

double mo_accept_prob(const MoQfa& m, const std::string& word) {
    check_word(m.alphabet, word);
    CVector v = m.initial;
    for (char c : word) v = mat_vec(m.matrix(c), v);
    v = mat_vec(m.matrix(kEndMarker), v);
    double p = 0.0;
    for (int i : m.accepting) p += std::norm(v[i]);
    return p;
}

MmTriple mm_step(const MmTriple& state, const CMatrix& u, const std::vector<StateKind>& kind) {
    if (u.cols != static_cast<int>(state.vec.size()) ||
        u.rows != static_cast<int>(kind.size()))
        throw std::invalid_argument("mm_step: dimension mismatch");
    CVector next = mat_vec(u, state.vec);
    MmTriple out;
    out.vec.assign(next.size(), Amplitude(0.0));
    out.p_acc = state.p_acc;
    out.p_rej = state.p_rej;
    for (size_t i = 0; i < next.size(); ++i) {
        switch (kind[i]) {
            case StateKind::NonHalting: out.vec[i] = next[i]; break;
            case StateKind::Accepting: out.p_acc += std::norm(next[i]); break;
            case StateKind::Rejecting: out.p_rej += std::norm(next[i]); break;
        }
    }
    return out;
}

MmRunResult mm_accept_prob(const MmQfa& m, const std::string& word) {
    check_word(m.alphabet, word);
    MmTriple st{m.init_vector, m.init_p_acc, m.init_p_rej};
    MmRunResult res;
    auto consume = [&](char c) {
        double pa = st.p_acc, pr = st.p_rej;
        st = mm_step(st, m.matrix(c), m.kind);
        RunStep step;
        step.symbol = c;
        step.vec = st.vec;
        step.p_acc = st.p_acc;
        step.p_rej = st.p_rej;
        step.step_acc_gain = st.p_acc - pa;
        step.step_rej_gain = st.p_rej - pr;
        res.trace.push_back(std::move(step));
    };
    for (char c : word) consume(c);
    consume(kEndMarker);
    res.p_acc = st.p_acc;
    res.p_rej = st.p_rej;
    res.leftover = norm_sq(st.vec);
    return res;
}

std::vector<std::string> validate(const MoQfa& m, double tol) {
    std::vector<std::string> out;
    if (m.n_states <= 0) out.push_back("mo: state count must be positive");
    if (m.alphabet.find(kEndMarker) != std::string::npos)
        out.push_back("mo: alphabet must not list the end-marker explicitly");
    for (char c : std::string(m.alphabet) + kEndMarker) {
        auto it = m.trans.find(c);
        if (it == m.trans.end()) {
            out.push_back(std::string("mo: missing transition matrix for symbol '") + c + "'");
            continue;
        }
        const CMatrix& u = it->second;
        if (u.rows != m.n_states || u.cols != m.n_states)
            out.push_back(std::string("mo: matrix for '") + c + "' has wrong shape");
        else if (!is_unitary(u, tol))
            out.push_back(std::string("mo: matrix for '") + c + "' is not unitary at tol " + fmt(tol));
    }
    if (static_cast<int>(m.initial.size()) != m.n_states)
        out.push_back("mo: initial vector dimension mismatch");
    else if (std::abs(norm_sq(m.initial) - 1.0) > tol)
        out.push_back("mo: initial vector norm^2 = " + fmt(norm_sq(m.initial)) + ", expected 1");
    for (int q : m.accepting)
        if (q < 0 || q >= m.n_states)
            out.push_back("mo: accepting state " + std::to_string(q) + " out of range");
    return out;
}

std::vector<std::string> validate(const MmQfa& m, double tol) {
    std::vector<std::string> out;
    if (m.n_states <= 0) out.push_back("mm: state count must be positive");
    if (static_cast<int>(m.kind.size()) != m.n_states)
        out.push_back("mm: partition must label every state");
    if (m.alphabet.find(kEndMarker) != std::string::npos)
        out.push_back("mm: alphabet must not list the end-marker explicitly");
    for (char c : std::string(m.alphabet) + kEndMarker) {
        auto it = m.trans.find(c);
        if (it == m.trans.end()) {
            out.push_back(std::string("mm: missing transition matrix for symbol '") + c + "'");
            continue;
        }
        const CMatrix& u = it->second;
        if (u.rows != m.n_states || u.cols != m.n_states)
            out.push_back(std::string("mm: matrix for '") + c + "' has wrong shape");
        else if (!is_unitary(u, tol))
            out.push_back(std::string("mm: matrix for '") + c + "' is not unitary at tol " + fmt(tol));
    }
    if (static_cast<int>(m.init_vector.size()) != m.n_states) {
        out.push_back("mm: initial vector dimension mismatch");
        return out;
    }
    double total = norm_sq(m.init_vector) + m.init_p_acc + m.init_p_rej;
    if (std::abs(total - 1.0) > tol)
        out.push_back("mm: initial triple total = " + fmt(total) + ", expected 1");
    if (m.init_p_acc < -tol || m.init_p_rej < -tol)
        out.push_back("mm: negative initial halting probability");
    for (int i = 0; i < m.n_states && i < static_cast<int>(m.kind.size()); ++i) {
        if (m.kind[i] != StateKind::NonHalting && std::abs(m.init_vector[i]) > tol)
            out.push_back("mm: initial vector has support on halting state " + std::to_string(i));
    }
    bool junk_acc = false, junk_rej = false;
    for (int q : m.junk) {
        if (q < 0 || q >= m.n_states) {
            out.push_back("mm: junk state " + std::to_string(q) + " out of range");
            continue;
        }
        switch (m.kind[q]) {
            case StateKind::NonHalting:
                out.push_back("mm: junk state " + std::to_string(q) + " is non-halting");
                break;
            case StateKind::Accepting: junk_acc = true; break;
            case StateKind::Rejecting: junk_rej = true; break;
        }
    }
    // End-decisive automata carry rejecting junk, co-end-decisive accepting
    // junk; a mix can belong to neither.
    if (junk_acc && junk_rej)
        out.push_back("mm: junk states carry both accept and reject labels");
    return out;
}

VerifyReport verify_certificate(const MmQfa& m, const Certificate& cert,
                                const std::function<bool(const std::string&)>& member,
                                int max_len, double tol) {
    VerifyReport rep;
    auto fail = [&](const std::string& why) {
        if (rep.ok) {
            rep.ok = false;
            rep.first_violation = why;
        }
    };
    for (const auto& diag : validate_certificate(cert)) {
        fail(diag);
        return rep;
    }
    for (const std::string& w : all_words(m.alphabet, max_len)) {
        if (!rep.ok) break;
        ++rep.words_checked;
        MmRunResult r = mm_accept_prob(m, w);
        const std::string wd = w.empty() ? std::string("(empty)") : w;
        if (member(w)) {
            if (!(r.p_acc > cert.member_lower()))
                fail("margin violation on member '" + wd + "': p_acc " + fmt(r.p_acc) +
                     " <= cut+margin " + fmt(cert.member_lower()));
            if (r.p_acc > cert.envelope_hi() + tol)
                fail("envelope violation on member '" + wd + "': p_acc " + fmt(r.p_acc) +
                     " > cut+max_margin " + fmt(cert.envelope_hi()));
        } else {
            if (cert.one_sided == OneSided::Positive) {
                if (r.p_acc > tol)
                    fail("one-sided violation on non-member '" + wd + "': p_acc " + fmt(r.p_acc));
            } else if (!(r.p_acc < cert.nonmember_upper())) {
                fail("margin violation on non-member '" + wd + "': p_acc " + fmt(r.p_acc) +
                     " >= cut-margin " + fmt(cert.nonmember_upper()));
            }
            if (r.p_acc < cert.envelope_lo() - tol)
                fail("envelope violation on non-member '" + wd + "': p_acc " + fmt(r.p_acc) +
                     " < cut-max_margin " + fmt(cert.envelope_lo()));
        }
        if (cert.end_decisive) {
            for (size_t s = 0; s + 1 < r.trace.size(); ++s)
                if (r.trace[s].step_acc_gain > tol)
                    fail("end-decisiveness violation on '" + wd + "' at step " + std::to_string(s) +
                         ": accept probability " + fmt(r.trace[s].step_acc_gain) +
                         " accrued before the end-marker");
        }
        if (cert.co_end_decisive) {
            for (size_t s = 0; s + 1 < r.trace.size(); ++s)
                if (r.trace[s].step_rej_gain > tol)
                    fail("co-end-decisiveness violation on '" + wd + "' at step " + std::to_string(s));
        }
        if (cert.positive_amplitude) {
            // Accepting amplitudes are observed on the pre-measurement vector.
            MmTriple st{m.init_vector, m.init_p_acc, m.init_p_rej};
            std::string in = w + kEndMarker;
            for (char c : in) {
                CVector pre = mat_vec(m.matrix(c), st.vec);
                for (int i = 0; i < m.n_states; ++i) {
                    if (m.kind[i] != StateKind::Accepting) continue;
                    if (pre[i].real() < -tol || std::abs(pre[i].imag()) > tol)
                        fail("positive-amplitude violation on '" + wd + "' in state " +
                             std::to_string(i));
                }
                st = mm_step(st, m.matrix(c), m.kind);
            }
        }
    }
    return rep;
}

std::vector<std::string> all_words(const std::string& alphabet, int max_len) {
    std::vector<std::string> out;
    std::vector<std::string> layer{""};
    out.push_back("");
    for (int len = 1; len <= max_len; ++len) {
        std::vector<std::string> next;
        next.reserve(layer.size() * alphabet.size());
        for (const auto& w : layer)
            for (char c : alphabet) {
                next.push_back(w + c);
                out.push_back(next.back());
            }
        layer = std::move(next);
    }
    return out;
}

}  // namespace qfa
