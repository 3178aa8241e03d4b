#include "qfa/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace qfa {

namespace {

// Tensor and power constructions can blow up; refuse anything a desk
// machine cannot hold as a dense matrix (2048^2 complex entries = 64 MiB).
constexpr long kMaxDim = 1 << 11;

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

CMatrix identity(int n) {
    CMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

CMatrix zero_matrix(int rows, int cols) { return CMatrix(rows, cols); }

CMatrix permutation_matrix(const std::vector<int>& perm) {
    int n = static_cast<int>(perm.size());
    std::vector<bool> seen(n, false);
    CMatrix m(n, n);
    for (int i = 0; i < n; ++i) {
        require(perm[i] >= 0 && perm[i] < n && !seen[perm[i]], "permutation_matrix: not a permutation");
        seen[perm[i]] = true;
        m.at(perm[i], i) = 1.0;
    }
    return m;
}

CVector mat_vec(const CMatrix& m, const CVector& v) {
    require(m.cols == static_cast<int>(v.size()),
            "mat_vec: dimension mismatch (" + std::to_string(m.cols) + " cols vs vector of dim " +
                std::to_string(v.size()) + ")");
    CVector out(m.rows, Amplitude(0.0));
    for (int i = 0; i < m.rows; ++i) {
        Amplitude acc = 0.0;
        for (int j = 0; j < m.cols; ++j) acc += m.at(i, j) * v[j];
        out[i] = acc;
    }
    check_finite(out, "mat_vec");
    return out;
}

CMatrix mat_mul(const CMatrix& a, const CMatrix& b) {
    require(a.cols == b.rows, "mat_mul: dimension mismatch (" + std::to_string(a.cols) + " vs " +
                                  std::to_string(b.rows) + ")");
    CMatrix out(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        for (int k = 0; k < a.cols; ++k) {
            Amplitude aik = a.at(i, k);
            if (aik == Amplitude(0.0)) continue;
            for (int j = 0; j < b.cols; ++j) out.at(i, j) += aik * b.at(k, j);
        }
    }
    check_finite(out, "mat_mul");
    return out;
}

CMatrix tensor_product(const CMatrix& a, const CMatrix& b) {
    long rr = static_cast<long>(a.rows) * b.rows;
    long cc = static_cast<long>(a.cols) * b.cols;
    require(rr <= kMaxDim && cc <= kMaxDim,
            "tensor_product: dimension product " + std::to_string(rr) + "x" + std::to_string(cc) +
                " exceeds the dense-matrix cap");
    CMatrix out(static_cast<int>(rr), static_cast<int>(cc));
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) {
            Amplitude aij = a.at(i, j);
            if (aij == Amplitude(0.0)) continue;
            for (int k = 0; k < b.rows; ++k)
                for (int l = 0; l < b.cols; ++l)
                    out.at(i * b.rows + k, j * b.cols + l) = aij * b.at(k, l);
        }
    return out;
}

CVector tensor_product(const CVector& u, const CVector& v) {
    long n = static_cast<long>(u.size()) * v.size();
    require(n <= kMaxDim, "tensor_product: vector dimension exceeds the cap");
    CVector out(n);
    for (size_t i = 0; i < u.size(); ++i)
        for (size_t j = 0; j < v.size(); ++j) out[i * v.size() + j] = u[i] * v[j];
    return out;
}

CMatrix direct_sum(const CMatrix& a, const CMatrix& b) {
    require(a.square() && b.square(), "direct_sum: both blocks must be square");
    int n = a.rows + b.rows;
    CMatrix out(n, n);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) out.at(i, j) = a.at(i, j);
    for (int i = 0; i < b.rows; ++i)
        for (int j = 0; j < b.cols; ++j) out.at(a.rows + i, a.cols + j) = b.at(i, j);
    return out;
}

CMatrix conjugate_transpose(const CMatrix& a) {
    CMatrix out(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) out.at(j, i) = std::conj(a.at(i, j));
    return out;
}

bool is_unitary(const CMatrix& a, double tol) {
    if (!a.square()) return false;
    CMatrix g = mat_mul(conjugate_transpose(a), a);
    return max_abs_diff(g, identity(a.rows)) <= tol;
}

CMatrix projector(const std::set<int>& indices, int dim) {
    CMatrix p(dim, dim);
    for (int i : indices) {
        require(i >= 0 && i < dim, "projector: index " + std::to_string(i) + " out of range [0," +
                                       std::to_string(dim) + ")");
        p.at(i, i) = 1.0;
    }
    return p;
}

double norm_sq(const CVector& v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return s;
}

double variation_distance(const std::vector<double>& p, const std::vector<double>& q) {
    require(p.size() == q.size(), "variation_distance: length mismatch");
    double sp = 0.0, sq = 0.0, d = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        require(p[i] >= -kDefaultTol && q[i] >= -kDefaultTol,
                "variation_distance: negative probability at index " + std::to_string(i));
        sp += p[i];
        sq += q[i];
        d += std::abs(p[i] - q[i]);
    }
    require(std::abs(sp - 1.0) <= kDefaultTol && std::abs(sq - 1.0) <= kDefaultTol,
            "variation_distance: inputs must sum to 1");
    return 0.5 * d;
}

int find_stabilizing_power(const CMatrix& u, double eps, long cap) {
    require(eps > 0.0, "find_stabilizing_power: eps must be positive");
    require(is_unitary(u, kDefaultTol), "find_stabilizing_power: matrix is not unitary");
    int n = u.rows;
    // Basis-vector check; the all-vectors bound inflates by dim^2.
    double per_basis = eps / (static_cast<double>(n) * n);
    CMatrix pw = u;
    for (long k = 1; k <= cap; ++k) {
        double worst = 0.0;
        for (int j = 0; j < n; ++j) {
            double col = 0.0;
            for (int i = 0; i < n; ++i) {
                Amplitude want = (i == j) ? Amplitude(1.0) : Amplitude(0.0);
                col += std::norm(want - pw.at(i, j));
            }
            worst = std::max(worst, col);
        }
        if (worst < per_basis) return static_cast<int>(k);
        pw = mat_mul(pw, u);
    }
    throw std::runtime_error("find_stabilizing_power: bounded search exhausted at cap " +
                             std::to_string(cap));
}

double max_abs_diff(const CMatrix& a, const CMatrix& b) {
    if (a.rows != b.rows || a.cols != b.cols) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (size_t i = 0; i < a.a.size(); ++i) worst = std::max(worst, std::abs(a.a[i] - b.a[i]));
    return worst;
}

CMatrix embed_block(const CMatrix& block, const std::vector<int>& where, int dim) {
    require(block.square() && block.rows == static_cast<int>(where.size()),
            "embed_block: block shape does not match index list");
    CMatrix out = identity(dim);
    for (size_t i = 0; i < where.size(); ++i) {
        require(where[i] >= 0 && where[i] < dim, "embed_block: index out of range");
        out.at(where[i], where[i]) = 0.0;
    }
    for (size_t i = 0; i < where.size(); ++i)
        for (size_t j = 0; j < where.size(); ++j) out.at(where[i], where[j]) = block.at(i, j);
    return out;
}

void check_finite(const CMatrix& m, const char* what) {
    for (const auto& x : m.a)
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
            throw std::runtime_error(std::string(what) + ": non-finite amplitude");
}

void check_finite(const CVector& v, const char* what) {
    for (const auto& x : v)
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
            throw std::runtime_error(std::string(what) + ": non-finite amplitude");
}

}  // namespace qfa
