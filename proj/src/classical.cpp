#include "qfa/classical.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <stdexcept>

namespace qfa {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// BFS over an arbitrary labeled graph, returning the lexicographically
// least shortest word from `src` into `goal` (expanding symbols in order).
// `min_steps` of 1 excludes the empty path.
template <typename NextFn, typename GoalFn>
std::optional<std::string> bfs_word(int n_nodes, int src, NextFn next, GoalFn goal,
                                    const std::string& alphabet, int min_steps) {
    if (min_steps == 0 && goal(src)) return std::string();
    std::vector<int> parent(n_nodes, -1);
    std::vector<char> via(n_nodes, 0);
    std::vector<bool> seen(n_nodes, false);
    std::deque<int> queue;
    seen[src] = true;
    queue.push_back(src);
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (char c : alphabet) {
            int v = next(u, c);
            if (seen[v]) continue;
            seen[v] = true;
            parent[v] = u;
            via[v] = c;
            if (goal(v)) {
                std::string w;
                for (int cur = v; cur != src || w.empty(); cur = parent[cur]) {
                    w.push_back(via[cur]);
                    if (parent[cur] == src) break;
                }
                std::reverse(w.begin(), w.end());
                return w;
            }
            queue.push_back(v);
        }
    }
    return std::nullopt;
}

}  // namespace

int Dfa::symbol_index(char c) const {
    auto p = alphabet.find(c);
    require(p != std::string::npos, std::string("dfa: unknown symbol '") + c + "'");
    return static_cast<int>(p);
}

int Dfa::run(int state, const std::string& w) const {
    for (char c : w) state = step(state, c);
    return state;
}

bool Dfa::accepts(const std::string& w) const { return accepting.count(run(start, w)) > 0; }

std::vector<std::string> validate(const Dfa& d) {
    std::vector<std::string> out;
    if (d.n_states <= 0) out.push_back("dfa: state count must be positive");
    if (d.alphabet.empty()) out.push_back("dfa: empty alphabet");
    if (static_cast<int>(d.delta.size()) != d.n_states)
        out.push_back("dfa: transition table must cover every state");
    for (int q = 0; q < static_cast<int>(d.delta.size()); ++q) {
        if (d.delta[q].size() != d.alphabet.size()) {
            out.push_back("dfa: state " + std::to_string(q) + " row is not total");
            continue;
        }
        for (int t : d.delta[q])
            if (t < 0 || t >= d.n_states)
                out.push_back("dfa: state " + std::to_string(q) + " has target out of range");
    }
    if (d.start < 0 || d.start >= d.n_states) out.push_back("dfa: start state out of range");
    for (int q : d.accepting)
        if (q < 0 || q >= d.n_states) out.push_back("dfa: accepting state out of range");
    return out;
}

Dfa dfa_minimize(const Dfa& d) {
    int na = static_cast<int>(d.alphabet.size());
    // Reachable states only.
    std::vector<int> order;
    std::vector<int> index(d.n_states, -1);
    order.push_back(d.start);
    index[d.start] = 0;
    for (size_t i = 0; i < order.size(); ++i)
        for (int s = 0; s < na; ++s) {
            int t = d.delta[order[i]][s];
            if (index[t] < 0) {
                index[t] = static_cast<int>(order.size());
                order.push_back(t);
            }
        }
    int n = static_cast<int>(order.size());

    // Moore partition refinement on the reachable part.
    std::vector<int> cls(n);
    for (int i = 0; i < n; ++i) cls[i] = d.accepting.count(order[i]) ? 1 : 0;
    for (;;) {
        std::map<std::vector<int>, int> sig_to_cls;
        std::vector<int> next_cls(n);
        for (int i = 0; i < n; ++i) {
            std::vector<int> sig{cls[i]};
            for (int s = 0; s < na; ++s) sig.push_back(cls[index[d.delta[order[i]][s]]]);
            auto [it, fresh] = sig_to_cls.emplace(sig, static_cast<int>(sig_to_cls.size()));
            next_cls[i] = it->second;
        }
        if (next_cls == cls) break;
        cls = std::move(next_cls);
    }

    // Canonical BFS numbering of the classes from the start class.
    int n_classes = *std::max_element(cls.begin(), cls.end()) + 1;
    std::vector<int> class_rep(n_classes, -1);
    for (int i = 0; i < n; ++i)
        if (class_rep[cls[i]] < 0) class_rep[cls[i]] = i;
    std::vector<int> renum(n_classes, -1);
    std::vector<int> bfs;
    renum[cls[0]] = 0;
    bfs.push_back(cls[0]);
    for (size_t i = 0; i < bfs.size(); ++i) {
        int rep = class_rep[bfs[i]];
        for (int s = 0; s < na; ++s) {
            int target = cls[index[d.delta[order[rep]][s]]];
            if (renum[target] < 0) {
                renum[target] = static_cast<int>(bfs.size());
                bfs.push_back(target);
            }
        }
    }

    Dfa out;
    out.n_states = n_classes;
    out.alphabet = d.alphabet;
    out.start = 0;
    out.delta.assign(n_classes, std::vector<int>(na, 0));
    for (int c = 0; c < n_classes; ++c) {
        int rep = class_rep[c];
        for (int s = 0; s < na; ++s)
            out.delta[renum[c]][s] = renum[cls[index[d.delta[order[rep]][s]]]];
        if (d.accepting.count(order[rep])) out.accepting.insert(renum[c]);
    }
    return out;
}

PoResult check_partial_order(const Dfa& d_in) {
    Dfa d = dfa_minimize(d_in);
    int n = d.n_states;
    auto pair_id = [n](int a, int b) { return a * n + b; };
    for (int q1 = 0; q1 < n; ++q1) {
        for (int q2 = 0; q2 < n; ++q2) {
            if (q1 == q2) continue;
            // In a minimal DFA every distinct pair is distinguishable.
            auto x = bfs_word(
                n * n, pair_id(q1, q2),
                [&](int p, char c) { return pair_id(d.step(p / n, c), d.step(p % n, c)); },
                [&](int p) { return p == pair_id(q2, q2); }, d.alphabet, 1);
            if (!x) continue;
            auto y = bfs_word(
                n, q2, [&](int q, char c) { return d.step(q, c); },
                [&](int q) { return q == q1; }, d.alphabet, 1);
            if (!y) continue;
            auto z = bfs_word(
                n * n, pair_id(q1, q2),
                [&](int p, char c) { return pair_id(d.step(p / n, c), d.step(p % n, c)); },
                [&](int p) { return d.accepting.count(p / n) != d.accepting.count(p % n); },
                d.alphabet, 0);
            PoWitness w;
            w.q1 = q1;
            w.q2 = q2;
            w.x = *x;
            w.y = *y;
            w.z = z.value_or("");
            return {false, w};
        }
    }
    return {true, std::nullopt};
}

IrrResult check_irreversible(const Dfa& d_in) {
    Dfa d = dfa_minimize(d_in);
    int n = d.n_states;
    auto pair_id = [n](int a, int b) { return a * n + b; };
    for (int q1 = 0; q1 < n; ++q1) {
        for (int q2 = 0; q2 < n; ++q2) {
            if (q1 == q2) continue;
            auto x = bfs_word(
                n * n, pair_id(q1, q2),
                [&](int p, char c) { return pair_id(d.step(p / n, c), d.step(p % n, c)); },
                [&](int p) { return p == pair_id(q2, q2); }, d.alphabet, 1);
            if (!x) continue;
            auto y = bfs_word(
                n, q2, [&](int q, char c) { return d.step(q, c); },
                [&](int q) { return d.accepting.count(q) > 0; }, d.alphabet, 0);
            if (!y) continue;
            auto z = bfs_word(
                n, q2, [&](int q, char c) { return d.step(q, c); },
                [&](int q) { return d.accepting.count(q) == 0; }, d.alphabet, 0);
            if (!z) continue;
            IrrWitness w;
            w.q1 = q1;
            w.q2 = q2;
            w.x = *x;
            w.y = *y;
            w.z = *z;
            return {true, w};
        }
    }
    return {false, std::nullopt};
}

bool check_gfa(const Dfa& d) {
    for (size_t s = 0; s < d.alphabet.size(); ++s) {
        std::vector<bool> hit(d.n_states, false);
        for (int q = 0; q < d.n_states; ++q) {
            int t = d.delta[q][s];
            if (hit[t]) return false;
            hit[t] = true;
        }
    }
    return true;
}

bool check_rfa(const Dfa& d) {
    for (size_t s = 0; s < d.alphabet.size(); ++s) {
        std::vector<int> indeg(d.n_states, 0);
        for (int q = 0; q < d.n_states; ++q) ++indeg[d.delta[q][s]];
        for (int q = 0; q < d.n_states; ++q) {
            if (indeg[q] < 2) continue;
            for (size_t s2 = 0; s2 < d.alphabet.size(); ++s2)
                if (d.delta[q][s2] != q) return false;
        }
    }
    return true;
}

MoQfa gfa_to_moqfa(const Dfa& d) {
    require(check_gfa(d), "gfa_to_moqfa: transition maps are not all permutations");
    MoQfa m;
    m.alphabet = d.alphabet;
    m.n_states = d.n_states;
    for (size_t s = 0; s < d.alphabet.size(); ++s) {
        std::vector<int> perm(d.n_states);
        for (int q = 0; q < d.n_states; ++q) perm[q] = d.delta[q][s];
        m.trans[d.alphabet[s]] = permutation_matrix(perm);
    }
    m.trans[kEndMarker] = identity(d.n_states);
    m.initial.assign(d.n_states, Amplitude(0.0));
    m.initial[d.start] = 1.0;
    m.accepting = d.accepting;
    return m;
}

std::vector<std::string> validate(const Pfa& p) {
    std::vector<std::string> out;
    if (p.n_states <= 0) out.push_back("pfa: state count must be positive");
    double s = std::accumulate(p.start.begin(), p.start.end(), 0.0);
    if (static_cast<int>(p.start.size()) != p.n_states)
        out.push_back("pfa: start distribution dimension mismatch");
    else if (std::abs(s - 1.0) > kDefaultTol)
        out.push_back("pfa: start distribution sums to " + std::to_string(s));
    for (char c : p.alphabet) {
        auto it = p.trans.find(c);
        if (it == p.trans.end()) {
            out.push_back(std::string("pfa: missing matrix for symbol '") + c + "'");
            continue;
        }
        const DMatrix& m = it->second;
        if (m.rows != p.n_states || m.cols != p.n_states) {
            out.push_back(std::string("pfa: matrix for '") + c + "' has wrong shape");
            continue;
        }
        for (int i = 0; i < m.rows; ++i) {
            double row = 0.0;
            for (int j = 0; j < m.cols; ++j) {
                if (m.at(i, j) < -kDefaultTol)
                    out.push_back(std::string("pfa: negative entry in matrix '") + c + "' row " +
                                  std::to_string(i));
                row += m.at(i, j);
            }
            if (std::abs(row - 1.0) > kDefaultTol)
                out.push_back(std::string("pfa: matrix '") + c + "' row " + std::to_string(i) +
                              " sums to " + std::to_string(row));
        }
    }
    return out;
}

double pfa_accept_prob(const Pfa& p, const std::string& word) {
    std::vector<double> v = p.start;
    for (char c : word) {
        auto it = p.trans.find(c);
        require(it != p.trans.end(), std::string("pfa: unknown symbol '") + c + "'");
        const DMatrix& m = it->second;
        std::vector<double> next(p.n_states, 0.0);
        for (int i = 0; i < p.n_states; ++i) {
            if (v[i] == 0.0) continue;
            for (int j = 0; j < p.n_states; ++j) next[j] += v[i] * m.at(i, j);
        }
        v = std::move(next);
    }
    double acc = 0.0;
    for (int q : p.accepting) acc += v[q];
    return acc;
}

double LinearSystem::eval(const std::string& word) const {
    CVector v = initial_row;
    auto step = [&](char c) {
        auto it = trans.find(c);
        require(it != trans.end(), std::string("linsys: unknown symbol '") + c + "'");
        const CMatrix& m = it->second;
        CVector next(m.cols, Amplitude(0.0));
        for (int i = 0; i < m.rows; ++i) {
            if (v[i] == Amplitude(0.0)) continue;
            for (int j = 0; j < m.cols; ++j) next[j] += v[i] * m.at(i, j);
        }
        v = std::move(next);
    };
    for (char c : word) step(c);
    step(kEndMarker);
    Amplitude out = 0.0;
    for (int i = 0; i < dim; ++i) out += v[i] * final_col[i];
    if (std::abs(out.imag()) > kDefaultTol)
        throw std::runtime_error("linsys: evaluation has non-negligible imaginary part");
    return out.real();
}

LinearSystem bilinearize(const MoQfa& m) {
    int n = m.n_states;
    LinearSystem sys;
    sys.dim = n * n;
    sys.alphabet = m.alphabet;
    for (const auto& [c, u] : m.trans) {
        CMatrix conj_u(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) conj_u.at(i, j) = std::conj(u.at(i, j));
        // Row-vector convention, hence the transpose of U (x) conj(U).
        sys.trans[c] = conjugate_transpose(tensor_product(conj_u, u));
    }
    sys.initial_row.assign(sys.dim, Amplitude(0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            sys.initial_row[i * n + j] = m.initial[i] * std::conj(m.initial[j]);
    sys.final_col.assign(sys.dim, Amplitude(0.0));
    for (int q : m.accepting) sys.final_col[q * n + q] = 1.0;
    return sys;
}

EquivResult linsys_equiv(const LinearSystem& a, const LinearSystem& b, double tol) {
    require(a.alphabet == b.alphabet, "linsys_equiv: alphabet mismatch");
    int d = a.dim + b.dim;
    // Difference system with the end-marker folded into the functional.
    std::map<char, CMatrix> trans;
    for (char c : a.alphabet) {
        CMatrix m(d, d);
        const CMatrix& ma = a.trans.at(c);
        const CMatrix& mb = b.trans.at(c);
        for (int i = 0; i < a.dim; ++i)
            for (int j = 0; j < a.dim; ++j) m.at(i, j) = ma.at(i, j);
        for (int i = 0; i < b.dim; ++i)
            for (int j = 0; j < b.dim; ++j) m.at(a.dim + i, a.dim + j) = mb.at(i, j);
        trans[c] = std::move(m);
    }
    CVector functional(d, Amplitude(0.0));
    {
        const CMatrix& da = a.trans.at(kEndMarker);
        for (int i = 0; i < a.dim; ++i) {
            Amplitude acc = 0.0;
            for (int j = 0; j < a.dim; ++j) acc += da.at(i, j) * a.final_col[j];
            functional[i] = acc;
        }
        const CMatrix& db = b.trans.at(kEndMarker);
        for (int i = 0; i < b.dim; ++i) {
            Amplitude acc = 0.0;
            for (int j = 0; j < b.dim; ++j) acc += db.at(i, j) * b.final_col[j];
            functional[a.dim + i] = -acc;
        }
    }
    CVector root(d, Amplitude(0.0));
    for (int i = 0; i < a.dim; ++i) root[i] = a.initial_row[i];
    for (int i = 0; i < b.dim; ++i) root[a.dim + i] = b.initial_row[i];

    auto apply = [&](const CVector& v, char c) {
        const CMatrix& m = trans.at(c);
        CVector next(d, Amplitude(0.0));
        for (int i = 0; i < d; ++i) {
            if (v[i] == Amplitude(0.0)) continue;
            for (int j = 0; j < d; ++j) next[j] += v[i] * m.at(i, j);
        }
        return next;
    };
    auto dot_functional = [&](const CVector& v) {
        Amplitude out = 0.0;
        for (int i = 0; i < d; ++i) out += v[i] * functional[i];
        return out;
    };

    std::vector<CVector> basis;
    std::deque<std::pair<CVector, std::string>> queue;
    queue.emplace_back(root, "");
    while (!queue.empty()) {
        auto [v, word] = std::move(queue.front());
        queue.pop_front();
        // Project out the current span.
        CVector residual = v;
        for (const CVector& bvec : basis) {
            Amplitude coef = 0.0;
            for (int i = 0; i < d; ++i) coef += std::conj(bvec[i]) * residual[i];
            for (int i = 0; i < d; ++i) residual[i] -= coef * bvec[i];
        }
        double len = std::sqrt(norm_sq(residual));
        if (len <= 1e-9 * std::max(1.0, std::sqrt(norm_sq(v)))) continue;
        if (std::abs(dot_functional(v)) > tol) return {false, word};
        for (auto& x : residual) x /= len;
        basis.push_back(std::move(residual));
        for (char c : a.alphabet) queue.emplace_back(apply(v, c), word + c);
        if (static_cast<int>(basis.size()) > d) break;  // numerical safety stop
    }
    return {true, std::nullopt};
}

EquivResult moqfa_equiv(const MoQfa& m1, const MoQfa& m2, double tol) {
    require(m1.alphabet == m2.alphabet, "moqfa_equiv: alphabet mismatch");
    return linsys_equiv(bilinearize(m1), bilinearize(m2), tol);
}

Pfa moqfa_to_pfa(const MoQfa& m, double lambda) {
    LinearSystem sys = bilinearize(m);
    int d0 = sys.dim + 1;  // extra coordinate computing the constant -lambda

    // Row system over the plain alphabet with the end-marker folded in:
    // eval(w) = r * A(w) * g = p(w) - lambda.
    std::map<char, CMatrix> a_mats;
    for (char c : sys.alphabet) {
        CMatrix mm(d0, d0);
        const CMatrix& src = sys.trans.at(c);
        for (int i = 0; i < sys.dim; ++i)
            for (int j = 0; j < sys.dim; ++j) mm.at(i, j) = src.at(i, j);
        mm.at(sys.dim, sys.dim) = 1.0;
        a_mats[c] = std::move(mm);
    }
    CVector r(d0, Amplitude(0.0));
    for (int i = 0; i < sys.dim; ++i) r[i] = sys.initial_row[i];
    r[sys.dim] = -lambda;
    CVector g(d0, Amplitude(0.0));
    {
        const CMatrix& dm = sys.trans.at(kEndMarker);
        for (int i = 0; i < sys.dim; ++i) {
            Amplitude acc = 0.0;
            for (int j = 0; j < sys.dim; ++j) acc += dm.at(i, j) * sys.final_col[j];
            g[i] = acc;
        }
        g[sys.dim] = 1.0;
    }

    // Realify: complex rows become [Re | Im] with block matrices
    // [[Re M, Im M], [-Im M, Re M]]; skipped when everything is real.
    bool complex_entries = false;
    auto scan = [&](const Amplitude& x) {
        if (std::abs(x.imag()) > 1e-12) complex_entries = true;
    };
    for (const auto& [c, mm] : a_mats)
        for (const auto& x : mm.a) scan(x);
    for (const auto& x : r) scan(x);
    for (const auto& x : g) scan(x);

    int dr = complex_entries ? 2 * d0 : d0;
    std::map<char, DMatrix> real_mats;
    std::vector<double> rr(dr, 0.0), gg(dr, 0.0);
    for (const auto& [c, mm] : a_mats) {
        DMatrix out(dr, dr);
        for (int i = 0; i < d0; ++i)
            for (int j = 0; j < d0; ++j) {
                out.at(i, j) = mm.at(i, j).real();
                if (complex_entries) {
                    out.at(i, d0 + j) = mm.at(i, j).imag();
                    out.at(d0 + i, j) = -mm.at(i, j).imag();
                    out.at(d0 + i, d0 + j) = mm.at(i, j).real();
                }
            }
        real_mats[c] = std::move(out);
    }
    for (int i = 0; i < d0; ++i) {
        rr[i] = r[i].real();
        gg[i] = g[i].real();
        if (complex_entries) {
            rr[d0 + i] = r[i].imag();
            gg[d0 + i] = -g[i].imag();
        }
    }

    // Border states absorbing the initial row and the functional:
    // source state 0, answer state dr+1; e_src B(w) e_ans = eval(w).
    int db = dr + 2;
    int src = 0, ans = dr + 1;
    std::map<char, DMatrix> b_mats;
    for (const auto& [c, am] : real_mats) {
        DMatrix b(db, db);
        for (int j = 0; j < dr; ++j) {
            double acc = 0.0;
            for (int i = 0; i < dr; ++i) acc += rr[i] * am.at(i, j);
            b.at(src, 1 + j) = acc;
        }
        for (int i = 0; i < dr; ++i)
            for (int j = 0; j < dr; ++j) b.at(1 + i, 1 + j) = am.at(i, j);
        double rag = 0.0;
        for (int j = 0; j < dr; ++j) rag += b.at(src, 1 + j) * gg[j];
        b.at(src, ans) = rag;
        for (int i = 0; i < dr; ++i) {
            double acc = 0.0;
            for (int j = 0; j < dr; ++j) acc += am.at(i, j) * gg[j];
            b.at(1 + i, ans) = acc;
        }
        b_mats[c] = std::move(b);
    }

    // Two more states making all row and column sums zero: a trap absorbing
    // the row balance (its own row is zero) and an unreachable state holding
    // the column balance.
    int dz = db + 2;
    int trap = db, ghost = db + 1;
    std::map<char, DMatrix> z_mats;
    double min_entry = 0.0;
    for (const auto& [c, b] : b_mats) {
        DMatrix z(dz, dz);
        for (int i = 0; i < db; ++i)
            for (int j = 0; j < db; ++j) z.at(i, j) = b.at(i, j);
        double total = 0.0;
        for (int i = 0; i < db; ++i) {
            double row = 0.0;
            for (int j = 0; j < db; ++j) row += b.at(i, j);
            z.at(i, trap) = -row;
            total += row;
        }
        for (int j = 0; j < db; ++j) {
            double col = 0.0;
            for (int i = 0; i < db; ++i) col += b.at(i, j);
            z.at(ghost, j) = -col;
        }
        z.at(ghost, trap) = total;
        for (const double& x : z.a) min_entry = std::min(min_entry, x);
        z_mats[c] = std::move(z);
    }

    // Uniform shift and row rescale to stochasticity.
    double shift = 1.0 + std::max(0.0, -min_entry);
    double denom = shift * dz;
    Pfa pfa;
    pfa.n_states = dz;
    pfa.alphabet = sys.alphabet;
    for (auto& [c, z] : z_mats) {
        DMatrix p(dz, dz);
        for (int i = 0; i < dz; ++i)
            for (int j = 0; j < dz; ++j) p.at(i, j) = (z.at(i, j) + shift) / denom;
        pfa.trans[c] = std::move(p);
    }
    pfa.start.assign(dz, 0.0);
    pfa.start[src] = 1.0;
    pfa.accepting.insert(ans);
    // The empty word never leaves the source state; classify it by making
    // the source accepting exactly when the automaton accepts the empty word.
    if (mo_accept_prob(m, "") > lambda) pfa.accepting.insert(src);
    pfa.cut_point = static_cast<double>(pfa.accepting.size()) / dz;
    pfa.norm_shift = shift;
    pfa.norm_dim = dz;
    return pfa;
}

}  // namespace qfa
