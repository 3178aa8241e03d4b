#ifndef QFA_NUMERICS_HPP
#define QFA_NUMERICS_HPP

#include <complex>
#include <cstddef>
#include <set>
#include <vector>

namespace qfa {

using Amplitude = std::complex<double>;

// Default tolerance for structural checks (unitarity, norms, partitions).
inline constexpr double kDefaultTol = 1e-9;

using CVector = std::vector<Amplitude>;

// Dense row-major complex matrix.
struct CMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<Amplitude> a;

    CMatrix() = default;
    CMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}

    Amplitude& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    const Amplitude& at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    bool square() const { return rows == cols; }
};

CMatrix identity(int n);
CMatrix zero_matrix(int rows, int cols);

// Permutation matrix P with P*e_i = e_{perm[i]}.
CMatrix permutation_matrix(const std::vector<int>& perm);

CVector mat_vec(const CMatrix& m, const CVector& v);
CMatrix mat_mul(const CMatrix& a, const CMatrix& b);

// Kronecker product; entry convention (i*rowsB + k, j*colsB + l) = A(i,j)*B(k,l).
CMatrix tensor_product(const CMatrix& a, const CMatrix& b);
CVector tensor_product(const CVector& u, const CVector& v);

// Block-diagonal sum of two square matrices.
CMatrix direct_sum(const CMatrix& a, const CMatrix& b);

CMatrix conjugate_transpose(const CMatrix& a);

// Max-entry deviation of A†A from the identity is <= tol.
bool is_unitary(const CMatrix& a, double tol = kDefaultTol);

// Diagonal 0/1 matrix selecting the given state indices.
CMatrix projector(const std::set<int>& indices, int dim);

double norm_sq(const CVector& v);

// Total variation distance (1/2)*sum|p_i - q_i| between two distributions.
double variation_distance(const std::vector<double>& p, const std::vector<double>& q);

// Least n <= cap such that ||(I - U^n)x||^2 < eps for every unit vector x.
// Checked on the standard basis with the bound tightened by dim^2; throws
// if no such n is found within cap.
int find_stabilizing_power(const CMatrix& u, double eps, long cap = 1000000);

// Largest |entry| difference between two equally shaped matrices.
double max_abs_diff(const CMatrix& a, const CMatrix& b);

// Embeds a k x k block into identity(dim) at the (not necessarily
// contiguous) state indices `where`, in order.
CMatrix embed_block(const CMatrix& block, const std::vector<int>& where, int dim);

void check_finite(const CMatrix& m, const char* what);
void check_finite(const CVector& v, const char* what);

}  // namespace qfa

#endif
