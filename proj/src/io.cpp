#include "qfa/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qfa {

namespace {

using nlohmann::json;

json complex_to_json(const Amplitude& x) { return json::array({x.real(), x.imag()}); }

Amplitude complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2)
        throw std::runtime_error("file: complex entries must be [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

json matrix_to_json(const CMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols; ++j) row.push_back(complex_to_json(m.at(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

CMatrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw std::runtime_error("file: matrix must be a row array");
    int rows = static_cast<int>(j.size());
    int cols = static_cast<int>(j[0].size());
    CMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(j[i].size()) != cols)
            throw std::runtime_error("file: ragged matrix");
        for (int jj = 0; jj < cols; ++jj) m.at(i, jj) = complex_from_json(j[i][jj]);
    }
    return m;
}

json vector_to_json(const CVector& v) {
    json out = json::array();
    for (const auto& x : v) out.push_back(complex_to_json(x));
    return out;
}

CVector vector_from_json(const json& j) {
    CVector out;
    for (const auto& x : j) out.push_back(complex_from_json(x));
    return out;
}

json dmatrix_to_json(const DMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols; ++j) row.push_back(m.at(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

DMatrix dmatrix_from_json(const json& j) {
    int rows = static_cast<int>(j.size());
    int cols = static_cast<int>(j[0].size());
    DMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int jj = 0; jj < cols; ++jj) m.at(i, jj) = j[i][jj].get<double>();
    return m;
}

json trans_to_json(const std::map<char, CMatrix>& trans) {
    json out = json::object();
    for (const auto& [c, m] : trans) out[std::string(1, c)] = matrix_to_json(m);
    return out;
}

std::map<char, CMatrix> trans_from_json(const json& j) {
    std::map<char, CMatrix> out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key().size() != 1) throw std::runtime_error("file: symbols must be single characters");
        out[it.key()[0]] = matrix_from_json(it.value());
    }
    return out;
}

const char* kind_name(StateKind k) {
    switch (k) {
        case StateKind::NonHalting: return "non";
        case StateKind::Accepting: return "acc";
        case StateKind::Rejecting: return "rej";
    }
    return "non";
}

StateKind kind_from_name(const std::string& s) {
    if (s == "non") return StateKind::NonHalting;
    if (s == "acc") return StateKind::Accepting;
    if (s == "rej") return StateKind::Rejecting;
    throw std::runtime_error("file: unknown state kind '" + s + "'");
}

json cert_to_json(const Certificate& c) {
    json j;
    j["cut_point"] = c.cut_point;
    j["margin"] = c.margin;
    j["max_margin"] = c.max_margin;
    j["end_decisive"] = c.end_decisive;
    j["co_end_decisive"] = c.co_end_decisive;
    j["one_sided"] = c.one_sided == OneSided::Positive   ? "positive"
                     : c.one_sided == OneSided::Negative ? "negative"
                                                         : "none";
    j["positive_amplitude"] = c.positive_amplitude;
    return j;
}

Certificate cert_from_json(const json& j) {
    Certificate c;
    c.cut_point = j.at("cut_point").get<double>();
    c.margin = j.at("margin").get<double>();
    c.max_margin = j.at("max_margin").get<double>();
    c.end_decisive = j.at("end_decisive").get<bool>();
    c.co_end_decisive = j.at("co_end_decisive").get<bool>();
    std::string os = j.at("one_sided").get<std::string>();
    c.one_sided = os == "positive" ? OneSided::Positive
                  : os == "negative" ? OneSided::Negative
                                     : OneSided::None;
    c.positive_amplitude = j.at("positive_amplitude").get<bool>();
    return c;
}

}  // namespace

std::string serialize(const AutomatonFile& f) {
    json j;
    j["format"] = "qfa-automaton";
    j["version"] = 1;
    j["kind"] = f.kind;
    if (f.kind == "mo") {
        const MoQfa& m = f.mo.value();
        j["alphabet"] = m.alphabet;
        j["n_states"] = m.n_states;
        j["transitions"] = trans_to_json(m.trans);
        j["initial"] = vector_to_json(m.initial);
        j["accepting"] = m.accepting;
    } else if (f.kind == "mm") {
        const MmQfa& m = f.mm.value();
        j["alphabet"] = m.alphabet;
        j["n_states"] = m.n_states;
        j["transitions"] = trans_to_json(m.trans);
        json part = json::array();
        for (StateKind k : m.kind) part.push_back(kind_name(k));
        j["partition"] = std::move(part);
        j["initial"] = {{"vector", vector_to_json(m.init_vector)},
                        {"p_acc", m.init_p_acc},
                        {"p_rej", m.init_p_rej}};
        j["junk"] = m.junk;
    } else if (f.kind == "dfa") {
        const Dfa& d = f.dfa.value();
        j["alphabet"] = d.alphabet;
        j["n_states"] = d.n_states;
        json trans = json::object();
        for (size_t s = 0; s < d.alphabet.size(); ++s) {
            json row = json::array();
            for (int q = 0; q < d.n_states; ++q) row.push_back(d.delta[q][s]);
            trans[std::string(1, d.alphabet[s])] = std::move(row);
        }
        j["transitions"] = std::move(trans);
        j["start"] = d.start;
        j["accepting"] = d.accepting;
    } else if (f.kind == "pfa") {
        const Pfa& p = f.pfa.value();
        j["alphabet"] = p.alphabet;
        j["n_states"] = p.n_states;
        json trans = json::object();
        for (const auto& [c, m] : p.trans) trans[std::string(1, c)] = dmatrix_to_json(m);
        j["transitions"] = std::move(trans);
        j["start"] = p.start;
        j["accepting"] = p.accepting;
        j["cut_point"] = p.cut_point;
        j["normalization"] = {{"shift", p.norm_shift}, {"dim", p.norm_dim}};
    } else if (f.kind == "linsys") {
        const LinearSystem& s = f.linsys.value();
        j["alphabet"] = s.alphabet;
        j["dim"] = s.dim;
        j["transitions"] = trans_to_json(s.trans);
        j["initial"] = vector_to_json(s.initial_row);
        j["final"] = vector_to_json(s.final_col);
    } else {
        throw std::runtime_error("serialize: unknown kind '" + f.kind + "'");
    }
    if (f.cert) j["certificate"] = cert_to_json(*f.cert);
    if (f.cent) j["cent"] = matrix_to_json(*f.cent);
    return j.dump(2) + "\n";
}

AutomatonFile deserialize(const std::string& text) {
    json j = json::parse(text);
    if (j.value("format", "") != "qfa-automaton")
        throw std::runtime_error("file: not a qfa-automaton document");
    if (j.value("version", 0) != 1) throw std::runtime_error("file: unsupported version");
    AutomatonFile f;
    f.kind = j.at("kind").get<std::string>();
    if (f.kind == "mo") {
        MoQfa m;
        m.alphabet = j.at("alphabet").get<std::string>();
        m.n_states = j.at("n_states").get<int>();
        m.trans = trans_from_json(j.at("transitions"));
        m.initial = vector_from_json(j.at("initial"));
        for (int q : j.at("accepting")) m.accepting.insert(q);
        f.mo = std::move(m);
    } else if (f.kind == "mm") {
        MmQfa m;
        m.alphabet = j.at("alphabet").get<std::string>();
        m.n_states = j.at("n_states").get<int>();
        m.trans = trans_from_json(j.at("transitions"));
        for (const auto& k : j.at("partition")) m.kind.push_back(kind_from_name(k));
        m.init_vector = vector_from_json(j.at("initial").at("vector"));
        m.init_p_acc = j.at("initial").at("p_acc").get<double>();
        m.init_p_rej = j.at("initial").at("p_rej").get<double>();
        for (int q : j.at("junk")) m.junk.insert(q);
        f.mm = std::move(m);
    } else if (f.kind == "dfa") {
        Dfa d;
        d.alphabet = j.at("alphabet").get<std::string>();
        d.n_states = j.at("n_states").get<int>();
        d.delta.assign(d.n_states, std::vector<int>(d.alphabet.size(), 0));
        const json& trans = j.at("transitions");
        for (size_t s = 0; s < d.alphabet.size(); ++s) {
            const json& row = trans.at(std::string(1, d.alphabet[s]));
            for (int q = 0; q < d.n_states; ++q) d.delta[q][s] = row.at(q).get<int>();
        }
        d.start = j.at("start").get<int>();
        for (int q : j.at("accepting")) d.accepting.insert(q);
        f.dfa = std::move(d);
    } else if (f.kind == "pfa") {
        Pfa p;
        p.alphabet = j.at("alphabet").get<std::string>();
        p.n_states = j.at("n_states").get<int>();
        const json& trans = j.at("transitions");
        for (auto it = trans.begin(); it != trans.end(); ++it)
            p.trans[it.key()[0]] = dmatrix_from_json(it.value());
        p.start = j.at("start").get<std::vector<double>>();
        for (int q : j.at("accepting")) p.accepting.insert(q);
        p.cut_point = j.at("cut_point").get<double>();
        if (j.contains("normalization")) {
            p.norm_shift = j["normalization"].value("shift", 0.0);
            p.norm_dim = j["normalization"].value("dim", 0);
        }
        f.pfa = std::move(p);
    } else if (f.kind == "linsys") {
        LinearSystem s;
        s.alphabet = j.at("alphabet").get<std::string>();
        s.dim = j.at("dim").get<int>();
        s.trans = trans_from_json(j.at("transitions"));
        s.initial_row = vector_from_json(j.at("initial"));
        s.final_col = vector_from_json(j.at("final"));
        f.linsys = std::move(s);
    } else {
        throw std::runtime_error("file: unknown kind '" + f.kind + "'");
    }
    if (j.contains("certificate")) f.cert = cert_from_json(j["certificate"]);
    if (j.contains("cent")) f.cent = matrix_from_json(j["cent"]);
    return f;
}

void save_file(const std::string& path, const AutomatonFile& f) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << serialize(f);
}

AutomatonFile load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
}

AutomatonFile wrap(const MoQfa& m) {
    AutomatonFile f;
    f.kind = "mo";
    f.mo = m;
    return f;
}

AutomatonFile wrap(const MmQfa& m, std::optional<Certificate> cert) {
    AutomatonFile f;
    f.kind = "mm";
    f.mm = m;
    f.cert = std::move(cert);
    return f;
}

AutomatonFile wrap(const Dfa& d) {
    AutomatonFile f;
    f.kind = "dfa";
    f.dfa = d;
    return f;
}

AutomatonFile wrap(const Pfa& p) {
    AutomatonFile f;
    f.kind = "pfa";
    f.pfa = p;
    return f;
}

AutomatonFile wrap(const LinearSystem& s) {
    AutomatonFile f;
    f.kind = "linsys";
    f.linsys = s;
    return f;
}

MoQfa example_rotation(double ca, double sa) {
    MoQfa m;
    m.alphabet = "ab";
    m.n_states = 2;
    CMatrix ua(2, 2);
    ua.at(0, 0) = ca;  ua.at(0, 1) = sa;
    ua.at(1, 0) = -sa; ua.at(1, 1) = ca;
    m.trans['a'] = ua;
    m.trans['b'] = conjugate_transpose(ua);
    m.trans[kEndMarker] = identity(2);
    m.initial = {Amplitude(1.0), Amplitude(0.0)};
    m.accepting = {1};
    return m;
}

MoQfa example_rotation() { return example_rotation(3.0 / 5.0, 4.0 / 5.0); }

MoQfa example_free_group() {
    // Rotations by arccos(3/5) about the z and x axes, with inverses; a
    // known free pair in SO(3).  Identity words return to the start state
    // with certainty.
    double c = 3.0 / 5.0, s = 4.0 / 5.0;
    CMatrix rz(3, 3), rx(3, 3);
    rz.at(0, 0) = c;  rz.at(0, 1) = -s; rz.at(2, 2) = 1.0;
    rz.at(1, 0) = s;  rz.at(1, 1) = c;
    rx.at(0, 0) = 1.0;
    rx.at(1, 1) = c;  rx.at(1, 2) = -s;
    rx.at(2, 1) = s;  rx.at(2, 2) = c;
    MoQfa m;
    m.alphabet = "aAbB";  // a, b generators; A, B their inverses
    m.n_states = 3;
    m.trans['a'] = rz;
    m.trans['A'] = conjugate_transpose(rz);
    m.trans['b'] = rx;
    m.trans['B'] = conjugate_transpose(rx);
    m.trans[kEndMarker] = identity(3);
    m.initial = {Amplitude(1.0), Amplitude(0.0), Amplitude(0.0)};
    m.accepting = {0};
    return m;
}

Dfa example_parity() {
    Dfa d;
    d.n_states = 2;
    d.alphabet = "a";
    d.delta = {{1}, {0}};
    d.start = 0;
    d.accepting = {0};  // even number of a's
    return d;
}

AutomatonFile example_endmark_demo() {
    // A 4-state two-marker MM automaton: the left marker rotates the live
    // pair before the word is read.
    MmQfa m;
    m.alphabet = "ab";
    m.n_states = 4;
    m.kind = {StateKind::NonHalting, StateKind::NonHalting, StateKind::Accepting,
              StateKind::Rejecting};
    double c = 3.0 / 5.0, s = 4.0 / 5.0;
    CMatrix rot(4, 4);
    rot.at(0, 0) = c;  rot.at(0, 1) = -s;
    rot.at(1, 0) = s;  rot.at(1, 1) = c;
    rot.at(2, 2) = 1.0;
    rot.at(3, 3) = 1.0;
    CMatrix ua(4, 4);  // partial halt: q1 leaks into the reject state
    double r = 1.0 / std::sqrt(2.0);
    ua.at(0, 0) = 1.0;
    ua.at(1, 1) = r;  ua.at(1, 3) = r;
    ua.at(3, 1) = r;  ua.at(3, 3) = -r;
    ua.at(2, 2) = 1.0;
    CMatrix dollar = permutation_matrix({2, 3, 0, 1});  // q0->acc, q1->rej
    m.trans['a'] = ua;
    m.trans['b'] = rot;
    m.trans[kEndMarker] = dollar;
    m.init_vector = {Amplitude(1.0), Amplitude(0.0), Amplitude(0.0), Amplitude(0.0)};
    AutomatonFile f = wrap(m);
    CMatrix cent(4, 4);
    cent.at(0, 0) = c;  cent.at(0, 1) = s;
    cent.at(1, 0) = -s; cent.at(1, 1) = c;
    cent.at(2, 2) = 1.0;
    cent.at(3, 3) = 1.0;
    f.cent = cent;
    return f;
}

}  // namespace qfa
