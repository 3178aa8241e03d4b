#include "qfa/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qfa {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// Margin certificate from a strict member lower bound and a non-member
// upper bound, plus a closed probability envelope [0, env_hi].
Certificate bounds_to_cert(double member_lo, double nonmember_hi, double env_hi) {
    Certificate c;
    nonmember_hi = std::max(0.0, nonmember_hi);
    env_hi = clamp01(env_hi);
    c.cut_point = clamp01((member_lo + nonmember_hi) / 2.0);
    c.margin = std::max(0.0, (member_lo - nonmember_hi) / 2.0);
    c.max_margin = std::max({c.margin, env_hi - c.cut_point, c.cut_point});
    return c;
}

CMatrix shift_ring_matrix(int n_non, int halt, int sets) {
    // Cyclic shift over `sets`+1 halting blocks of size `halt`; block 0 sits
    // at the original halting positions.
    int dim = n_non + (sets + 1) * halt;
    std::vector<int> perm(dim);
    for (int i = 0; i < n_non; ++i) perm[i] = i;
    for (int j = 0; j <= sets; ++j)
        for (int k = 0; k < halt; ++k) {
            int from = n_non + j * halt + k;
            int to = n_non + ((j + 1) % (sets + 1)) * halt + k;
            perm[from] = to;
        }
    return permutation_matrix(perm);
}

// Shared body of inverse homomorphism and right word quotient: replicate
// the halting states `sets` times and map every symbol through
// V(x) = V_{x_k}...V_{x_1},  V_x = U_shift (U_x (+) I).
struct ShiftPipeline {
    MmQfa base;          // canonical order, non-halting first
    int n_non = 0;
    int halt = 0;
    int sets = 0;
    CMatrix shift;

    explicit ShiftPipeline(const MmQfa& m, int sets_) {
        base = renumber_states(m, nonhalting_first_order(m));
        n_non = base.count_of(StateKind::NonHalting);
        halt = base.n_states - n_non;
        sets = sets_;
        shift = shift_ring_matrix(n_non, halt, sets);
    }

    int dim() const { return n_non + (sets + 1) * halt; }

    CMatrix sub_transition(char symbol) const {
        return mat_mul(shift, direct_sum(base.matrix(symbol), identity(sets * halt)));
    }

    CMatrix pipeline(const std::string& word) const {
        CMatrix u = shift;  // empty image still fires one shift
        bool first = true;
        for (char c : word) {
            CMatrix v = sub_transition(c);
            u = first ? v : mat_mul(v, u);
            first = false;
        }
        return u;
    }

    MmQfa skeleton() const {
        MmQfa out;
        out.alphabet = base.alphabet;
        out.n_states = dim();
        out.kind.assign(out.n_states, StateKind::NonHalting);
        for (int i = 0; i < base.n_states; ++i) out.kind[i] = base.kind[i];
        for (int j = 1; j <= sets; ++j)
            for (int k = 0; k < halt; ++k)
                out.kind[n_non + j * halt + k] = base.kind[n_non + k];
        out.init_vector = base.init_vector;
        out.init_vector.resize(out.n_states, Amplitude(0.0));
        out.init_p_acc = base.init_p_acc;
        out.init_p_rej = base.init_p_rej;
        out.junk = base.junk;
        for (int q : base.junk)
            for (int j = 1; j <= sets; ++j) out.junk.insert(n_non + j * halt + (q - n_non));
        return out;
    }
};

}  // namespace

MmQfa renumber_states(const MmQfa& m, const std::vector<int>& to_new) {
    require(static_cast<int>(to_new.size()) == m.n_states, "renumber_states: bad permutation size");
    CMatrix p = permutation_matrix(to_new);
    CMatrix pt = conjugate_transpose(p);
    MmQfa out;
    out.alphabet = m.alphabet;
    out.n_states = m.n_states;
    for (const auto& [c, u] : m.trans) out.trans[c] = mat_mul(p, mat_mul(u, pt));
    out.kind.assign(m.n_states, StateKind::NonHalting);
    for (int i = 0; i < m.n_states; ++i) out.kind[to_new[i]] = m.kind[i];
    out.init_vector = mat_vec(p, m.init_vector);
    out.init_p_acc = m.init_p_acc;
    out.init_p_rej = m.init_p_rej;
    for (int q : m.junk) out.junk.insert(to_new[q]);
    return out;
}

std::vector<int> nonhalting_first_order(const MmQfa& m) {
    std::vector<int> to_new(m.n_states);
    int next = 0;
    for (int i = 0; i < m.n_states; ++i)
        if (m.kind[i] == StateKind::NonHalting) to_new[i] = next++;
    for (int i = 0; i < m.n_states; ++i)
        if (m.kind[i] != StateKind::NonHalting) to_new[i] = next++;
    return to_new;
}

MmQfa mm_complement(const MmQfa& m) {
    MmQfa out = m;
    for (auto& k : out.kind) {
        if (k == StateKind::Accepting) k = StateKind::Rejecting;
        else if (k == StateKind::Rejecting) k = StateKind::Accepting;
    }
    std::swap(out.init_p_acc, out.init_p_rej);
    return out;
}

Certificate mm_complement(const Certificate& c) {
    Certificate out = c;
    out.cut_point = 1.0 - c.cut_point;
    out.end_decisive = c.co_end_decisive;
    out.co_end_decisive = c.end_decisive;
    if (c.one_sided == OneSided::Positive) out.one_sided = OneSided::Negative;
    else if (c.one_sided == OneSided::Negative) out.one_sided = OneSided::Positive;
    // Nothing is known about the sign of amplitude entering the new accept
    // states (the old reject states).
    out.positive_amplitude = false;
    return out;
}

MmQfa mm_inverse_hom(const MmQfa& m, const Homomorphism& h) {
    int max_len = 1;
    for (const auto& [sym, image] : h) {
        require(m.alphabet.find(sym) != std::string::npos,
                std::string("mm_inverse_hom: symbol '") + sym + "' not in the alphabet");
        require(image.find(kEndMarker) == std::string::npos,
                "mm_inverse_hom: image contains the end-marker");
        for (char c : image)
            require(m.alphabet.find(c) != std::string::npos,
                    std::string("mm_inverse_hom: image symbol '") + c + "' not in the alphabet");
        max_len = std::max(max_len, static_cast<int>(image.size()));
    }
    ShiftPipeline pipe(m, max_len);
    MmQfa out = pipe.skeleton();
    for (char sym : m.alphabet) {
        auto it = h.find(sym);
        require(it != h.end(), std::string("mm_inverse_hom: no image for symbol '") + sym + "'");
        out.trans[sym] = pipe.pipeline(it->second);
    }
    out.trans[kEndMarker] = pipe.sub_transition(kEndMarker);
    return out;
}

MoQfa mo_strip_left_endmarker(const MoQfa& m, const CMatrix& cent) {
    require(cent.rows == m.n_states && cent.cols == m.n_states,
            "mo_strip_left_endmarker: cent matrix shape mismatch");
    require(is_unitary(cent, kDefaultTol), "mo_strip_left_endmarker: cent matrix not unitary");
    CMatrix cent_inv = conjugate_transpose(cent);
    MoQfa out = m;
    for (char c : m.alphabet)
        out.trans[c] = mat_mul(cent_inv, mat_mul(m.matrix(c), cent));
    out.trans[kEndMarker] = mat_mul(m.matrix(kEndMarker), cent);
    return out;
}

MmQfa mm_strip_left_endmarker(const MmQfa& m, const CMatrix& cent) {
    require(cent.rows == m.n_states && cent.cols == m.n_states,
            "mm_strip_left_endmarker: cent matrix shape mismatch");
    require(is_unitary(cent, kDefaultTol), "mm_strip_left_endmarker: cent matrix not unitary");
    MmQfa base = renumber_states(m, nonhalting_first_order(m));
    // cent is given in the original state order; express it in the same
    // canonical order as `base`.
    CMatrix p = permutation_matrix(nonhalting_first_order(m));
    CMatrix cent_c = mat_mul(p, mat_mul(cent, conjugate_transpose(p)));
    int n = base.n_states;
    int n_non = base.count_of(StateKind::NonHalting);
    int mh = n - n_non;
    int dim = n + mh;

    std::vector<int> perm(dim);
    for (int i = 0; i < n_non; ++i) perm[i] = i;
    for (int k = 0; k < mh; ++k) {
        perm[n_non + k] = n + k;  // old halting slot -> new state
        perm[n + k] = n_non + k;  // and back
    }
    CMatrix sweep = permutation_matrix(perm);

    CMatrix cent_b = direct_sum(cent_c, identity(mh));
    CMatrix cent_inv_b = direct_sum(conjugate_transpose(cent_c), identity(mh));

    MmQfa out;
    out.alphabet = base.alphabet;
    out.n_states = dim;
    out.kind.assign(dim, StateKind::NonHalting);
    for (int k = 0; k < mh; ++k) out.kind[n + k] = base.kind[n_non + k];
    for (char c : base.alphabet) {
        CMatrix u = direct_sum(base.matrix(c), identity(mh));
        out.trans[c] = mat_mul(cent_inv_b, mat_mul(sweep, mat_mul(u, cent_b)));
    }
    out.trans[kEndMarker] =
        mat_mul(sweep, mat_mul(direct_sum(base.matrix(kEndMarker), identity(mh)), cent_b));
    out.init_vector = base.init_vector;
    out.init_vector.resize(dim, Amplitude(0.0));
    out.init_p_acc = base.init_p_acc;
    out.init_p_rej = base.init_p_rej;
    for (int q : base.junk) out.junk.insert(n + (q - n_non));
    return out;
}

MmQfa word_quotient(const MmQfa& m, const std::string& u, QuotientSide side) {
    for (char c : u)
        require(m.alphabet.find(c) != std::string::npos,
                std::string("word_quotient: symbol '") + c + "' not in the alphabet");
    if (side == QuotientSide::Left) {
        MmQfa out = m;
        MmTriple st{m.init_vector, m.init_p_acc, m.init_p_rej};
        for (char c : u) st = mm_step(st, m.matrix(c), m.kind);
        out.init_vector = st.vec;
        out.init_p_acc = st.p_acc;
        out.init_p_rej = st.p_rej;
        return out;
    }
    // Right quotient: every symbol keeps single-step shifting; the
    // end-marker transition runs the pipeline for u then $.
    ShiftPipeline pipe(m, static_cast<int>(u.size()) + 1);
    MmQfa out = pipe.skeleton();
    for (char sym : m.alphabet) out.trans[sym] = pipe.sub_transition(sym);
    CMatrix dollar = pipe.sub_transition(kEndMarker);
    CMatrix acc = pipe.pipeline(u);
    out.trans[kEndMarker] = mat_mul(dollar, acc);
    return out;
}

CertifiedMm mm_tensor(const CertifiedMm& m1, const CertifiedMm& m2) {
    require(m1.cert.end_decisive && m2.cert.end_decisive,
            "mm_tensor: both inputs must be end-decisive (the composition lemma's hypothesis)");
    require(m1.aut.alphabet == m2.aut.alphabet, "mm_tensor: alphabet mismatch");
    require(std::abs(m1.aut.init_p_acc) < kDefaultTol && std::abs(m1.aut.init_p_rej) < kDefaultTol &&
                std::abs(m2.aut.init_p_acc) < kDefaultTol && std::abs(m2.aut.init_p_rej) < kDefaultTol,
            "mm_tensor: initial halting probability must be zero");
    const MmQfa& a = m1.aut;
    const MmQfa& b = m2.aut;
    MmQfa out;
    out.alphabet = a.alphabet;
    out.n_states = a.n_states * b.n_states;
    for (char c : std::string(a.alphabet) + kEndMarker)
        out.trans[c] = tensor_product(a.matrix(c), b.matrix(c));
    out.kind.assign(out.n_states, StateKind::NonHalting);
    for (int i = 0; i < a.n_states; ++i)
        for (int j = 0; j < b.n_states; ++j) {
            int q = i * b.n_states + j;
            if (a.kind[i] == StateKind::Rejecting || b.kind[j] == StateKind::Rejecting) {
                out.kind[q] = StateKind::Rejecting;
                if (a.junk.count(i) || b.junk.count(j)) out.junk.insert(q);
            } else if (a.kind[i] == StateKind::Accepting && b.kind[j] == StateKind::Accepting) {
                out.kind[q] = StateKind::Accepting;
            }
        }
    out.init_vector = tensor_product(a.init_vector, b.init_vector);

    const Certificate& c1 = m1.cert;
    const Certificate& c2 = m2.cert;
    double lo = c1.member_lower() * c2.member_lower();
    double hi = std::max({std::max(0.0, c1.nonmember_upper()) * c2.envelope_hi(),
                          c1.envelope_hi() * std::max(0.0, c2.nonmember_upper()),
                          std::max(0.0, c1.nonmember_upper()) * std::max(0.0, c2.nonmember_upper())});
    Certificate cert = bounds_to_cert(lo, hi, c1.envelope_hi() * c2.envelope_hi());
    cert.end_decisive = true;
    cert.co_end_decisive = c1.co_end_decisive && c2.co_end_decisive;
    cert.positive_amplitude = c1.positive_amplitude && c2.positive_amplitude;
    if (c1.one_sided == OneSided::Positive && c2.one_sided == OneSided::Positive) {
        cert.one_sided = OneSided::Positive;
        cert.cut_point = cert.margin = lo / 2.0;
    }
    return {std::move(out), cert};
}

CertifiedMm mm_power(const CertifiedMm& m, int k) {
    require(k >= 1, "mm_power: k must be positive");
    CertifiedMm acc = m;
    for (int i = 1; i < k; ++i) acc = mm_tensor(acc, m);
    const Certificate& c = m.cert;
    double lo = std::pow(c.member_lower(), k);
    double hi = std::pow(std::max(0.0, c.nonmember_upper()), k);
    Certificate cert = bounds_to_cert(lo, hi, std::pow(c.envelope_hi(), k));
    cert.end_decisive = c.end_decisive;
    cert.co_end_decisive = c.co_end_decisive;
    cert.positive_amplitude = c.positive_amplitude;
    if (c.one_sided == OneSided::Positive) {
        cert.one_sided = OneSided::Positive;
        cert.cut_point = cert.margin = lo / 2.0;
    }
    acc.cert = cert;
    return acc;
}

CertifiedMm mm_union(const CertifiedMm& m1, const CertifiedMm& m2,
                     std::optional<std::pair<int, int>> powers, std::pair<int, int>* chosen) {
    require(m1.cert.end_decisive && m2.cert.end_decisive,
            "mm_union: both inputs must be end-decisive");
    require(m1.aut.alphabet == m2.aut.alphabet, "mm_union: alphabet mismatch");
    double ml1 = m1.cert.member_lower(), ml2 = m2.cert.member_lower();
    double nm1 = std::max(0.0, m1.cert.nonmember_upper());
    double nm2 = std::max(0.0, m2.cert.nonmember_upper());

    int s = 0, t = 0;
    if (powers) {
        s = powers->first;
        t = powers->second;
        require(s >= 1 && t >= 1, "mm_union: powers must be positive");
    } else {
        // Smallest (s,t) with (cut-eps)^s + (cut'-eps')^t <= min((cut+eps)^s,(cut'+eps')^t)/2.
        for (int total = 2; total <= 32 && !s; ++total)
            for (int si = 1; si < total && !s; ++si) {
                int ti = total - si;
                if (si > 16 || ti > 16) continue;
                double bad = std::pow(nm1, si) + std::pow(nm2, ti);
                double good = std::min(std::pow(ml1, si), std::pow(ml2, ti));
                if (bad <= good / 2.0) {
                    s = si;
                    t = ti;
                }
            }
        if (!s) {
            std::ostringstream os;
            os << "mm_union: no powers s,t <= 16 satisfy (" << nm1 << ")^s + (" << nm2
               << ")^t <= min((" << ml1 << ")^s, (" << ml2 << ")^t)/2";
            throw std::runtime_error(os.str());
        }
    }

    if (chosen) *chosen = {s, t};
    CertifiedMm a = mm_power(m1, s);
    CertifiedMm b = mm_power(m2, t);
    const MmQfa& x = a.aut;
    const MmQfa& y = b.aut;
    MmQfa out;
    out.alphabet = x.alphabet;
    out.n_states = x.n_states + y.n_states;
    for (char c : std::string(x.alphabet) + kEndMarker)
        out.trans[c] = direct_sum(x.matrix(c), y.matrix(c));
    out.kind = x.kind;
    out.kind.insert(out.kind.end(), y.kind.begin(), y.kind.end());
    out.junk = x.junk;
    for (int q : y.junk) out.junk.insert(x.n_states + q);
    double r = 1.0 / std::sqrt(2.0);
    out.init_vector.assign(out.n_states, Amplitude(0.0));
    for (int i = 0; i < x.n_states; ++i) out.init_vector[i] = x.init_vector[i] * r;
    for (int i = 0; i < y.n_states; ++i) out.init_vector[x.n_states + i] = y.init_vector[i] * r;
    out.init_p_acc = (x.init_p_acc + y.init_p_acc) / 2.0;
    out.init_p_rej = (x.init_p_rej + y.init_p_rej) / 2.0;

    double lo = std::min(std::pow(ml1, s), std::pow(ml2, t)) / 2.0;
    double hi = (std::pow(nm1, s) + std::pow(nm2, t)) / 2.0;
    double env = (std::pow(m1.cert.envelope_hi(), s) + std::pow(m2.cert.envelope_hi(), t)) / 2.0;
    Certificate cert = bounds_to_cert(lo, hi, env);
    cert.end_decisive = true;
    cert.co_end_decisive = m1.cert.co_end_decisive && m2.cert.co_end_decisive;
    cert.positive_amplitude = m1.cert.positive_amplitude && m2.cert.positive_amplitude;
    if (m1.cert.one_sided == OneSided::Positive && m2.cert.one_sided == OneSided::Positive) {
        cert.one_sided = OneSided::Positive;
        cert.cut_point = cert.margin = lo / 2.0;
    }
    return {std::move(out), cert};
}

CertifiedMm mm_complement_one_sided(const CertifiedMm& m) {
    const Certificate& c = m.cert;
    require(c.end_decisive, "mm_complement_one_sided: input must be end-decisive");
    require(c.one_sided == OneSided::Positive,
            "mm_complement_one_sided: input must accept with positive one-sided error");
    require(c.positive_amplitude, "mm_complement_one_sided: input must accept with positive amplitude");
    require(std::abs(m.aut.init_p_acc) < kDefaultTol && std::abs(m.aut.init_p_rej) < kDefaultTol,
            "mm_complement_one_sided: initial halting probability must be zero");

    const MmQfa& in = m.aut;
    std::set<int> acc_set = in.states_of(StateKind::Accepting);
    std::vector<int> acc(acc_set.begin(), acc_set.end());
    int a = static_cast<int>(acc.size());
    require(a >= 1, "mm_complement_one_sided: input has no accepting states");
    int n = in.n_states;
    int dim = n + 3 * a;
    double scale = 1.0 / std::sqrt(1.0 + a);

    MmQfa out;
    out.alphabet = in.alphabet;
    out.n_states = dim;
    out.kind.assign(dim, StateKind::NonHalting);
    for (int i = 0; i < n; ++i)
        out.kind[i] = (in.kind[i] == StateKind::Accepting) ? StateKind::Rejecting : in.kind[i];
    for (int i = 0; i < a; ++i) {
        out.kind[n + 3 * i] = StateKind::Accepting;
        out.kind[n + 3 * i + 1] = StateKind::NonHalting;  // reservoir
        out.kind[n + 3 * i + 2] = StateKind::Rejecting;
    }
    out.junk = in.junk;

    // Averaging then cleanup on (old accept, new accept, reservoir, new reject).
    double h = 0.5, r2 = 1.0 / std::sqrt(2.0);
    CMatrix avg(4, 4);
    avg.at(0, 0) = h;   avg.at(0, 1) = r2;  avg.at(0, 2) = h;
    avg.at(1, 0) = -r2; avg.at(1, 1) = 0.0; avg.at(1, 2) = r2;
    avg.at(2, 0) = h;   avg.at(2, 1) = -r2; avg.at(2, 2) = h;
    avg.at(3, 3) = 1.0;
    CMatrix cleanup = permutation_matrix({0, 1, 3, 2});
    CMatrix block = mat_mul(cleanup, avg);

    CMatrix mixer = identity(dim);
    for (int i = 0; i < a; ++i) {
        std::vector<int> where{acc[i], n + 3 * i, n + 3 * i + 1, n + 3 * i + 2};
        mixer = mat_mul(embed_block(block, where, dim), mixer);
    }

    for (char sym : in.alphabet) out.trans[sym] = direct_sum(in.matrix(sym), identity(3 * a));
    // The averaging must see the end-marker's deposits in the old accept
    // states, so the mixer is applied after U_$.
    out.trans[kEndMarker] = mat_mul(mixer, direct_sum(in.matrix(kEndMarker), identity(3 * a)));

    out.init_vector.assign(dim, Amplitude(0.0));
    for (int i = 0; i < n; ++i) out.init_vector[i] = in.init_vector[i] * scale;
    for (int i = 0; i < a; ++i) out.init_vector[n + 3 * i + 1] = scale;

    // Non-members of the complement trigger a drop of at least
    // c*beta - beta^2/2 below the members' exact value a*c^2/2.
    double beta_min = scale * std::sqrt(c.member_lower() / a);
    double drop = scale * beta_min - beta_min * beta_min / 2.0;
    double m_hi = a * scale * scale / 2.0;
    double m_lo = m_hi - drop;
    double guard = drop / 64.0;
    Certificate cert = bounds_to_cert(m_hi - guard, m_lo, m_hi);
    cert.end_decisive = true;
    cert.co_end_decisive = false;
    cert.one_sided = OneSided::None;
    cert.positive_amplitude = true;
    return {std::move(out), cert};
}

CertifiedMm mm_intersect(const CertifiedMm& m1, const CertifiedMm& m2, int* chosen_k) {
    require(m1.cert.end_decisive && m2.cert.end_decisive,
            "mm_intersect: both inputs must be end-decisive");
    require(m1.cert.margin > 0.0, "mm_intersect: first input must accept with bounded error");
    require(m2.cert.one_sided == OneSided::Positive,
            "mm_intersect: second input must accept with positive one-sided error");
    double ml1 = m1.cert.member_lower(), nm1 = std::max(0.0, m1.cert.nonmember_upper());
    double ml2 = m2.cert.member_lower(), eh2 = m2.cert.envelope_hi();
    int k = 0;
    for (int ki = 1; ki <= 16; ++ki) {
        if (2.0 * std::pow(nm1, ki) * eh2 <= std::pow(ml1, ki) * ml2) {
            k = ki;
            break;
        }
    }
    if (!k) {
        std::ostringstream os;
        os << "mm_intersect: no power k <= 16 satisfies 2*(" << nm1 << ")^k*(" << eh2 << ") <= ("
           << ml1 << ")^k*(" << ml2 << ")";
        throw std::runtime_error(os.str());
    }
    if (chosen_k) *chosen_k = k;
    CertifiedMm result = mm_tensor(mm_power(m1, k), m2);
    double lo = std::pow(ml1, k) * ml2;
    double hi = std::pow(nm1, k) * eh2;
    Certificate cert = bounds_to_cert(lo, hi, std::pow(m1.cert.envelope_hi(), k) * eh2);
    cert.end_decisive = true;
    cert.co_end_decisive = false;
    cert.positive_amplitude = m1.cert.positive_amplitude && m2.cert.positive_amplitude;
    if (hi == 0.0) {
        cert.one_sided = OneSided::Positive;
        cert.cut_point = cert.margin = lo / 2.0;
    }
    result.cert = cert;
    return result;
}

}  // namespace qfa
