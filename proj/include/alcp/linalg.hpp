#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace alcp {

using Vec = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row.
struct SparseMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::size_t> row_offsets{0};
    std::vector<std::size_t> col_indices;
    Vec values;

    std::size_t nnz() const { return values.size(); }
    /// Entry (i, j), zero when not stored.
    double at(std::size_t i, std::size_t j) const;
    Vec diagonal() const;
    /// Row-major dense copy, for tests and small oracles.
    std::vector<Vec> to_dense() const;
};

/// Builds CSR from triplets, summing duplicates.
SparseMatrix assemble_from_triplets(std::span<const Triplet> triplets, std::size_t n_rows,
                                    std::size_t n_cols);

Vec spmv(const SparseMatrix& a, std::span<const double> x);

/// alpha·A + beta·B on the union sparsity pattern.
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha = 1.0, double beta = 1.0);

/// A + diag(d). The result keeps A's pattern plus any missing diagonal entries.
SparseMatrix add_diagonal(const SparseMatrix& a, std::span<const double> d);

/// Appends scale·A shifted by (row_offset, col_offset); used to build block systems.
void append_block(const SparseMatrix& a, std::size_t row_offset, std::size_t col_offset, double scale,
                  std::vector<Triplet>& out);

enum class SolveMethod { cg, bicgstab, direct, dense_lu };
enum class Preconditioner { none, jacobi };

struct SolveConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    std::size_t max_iter = 0;  // 0 selects 10·n
    SolveMethod method = SolveMethod::cg;
    Preconditioner preconditioner = Preconditioner::jacobi;
};

struct SolveResult {
    Vec x;
    std::size_t iterations = 0;
    double residual = 0.0;
};

/// Raised when an iterative solve misses its tolerance. Carries the iterate
/// with the smallest true residual seen.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, Vec best, double residual, std::size_t iterations)
        : std::runtime_error(what), best_(std::move(best)), residual_(residual), iterations_(iterations) {}
    const Vec& best_iterate() const { return best_; }
    double residual() const { return residual_; }
    std::size_t iterations() const { return iterations_; }

private:
    Vec best_;
    double residual_;
    std::size_t iterations_;
};

/// Solves A x = b. On success ‖Ax − b‖₂ ≤ max(rel_tol·‖b‖₂, abs_tol) holds for
/// the returned x and the reported residual is that true residual.
/// `direct` is a sparse LU; `dense_lu` is limited to n ≤ 200.
SolveResult solve(const SparseMatrix& a, std::span<const double> b, const SolveConfig& cfg = {});

/// Gaussian elimination with partial pivoting on a dense row-major matrix.
Vec dense_lu_solve(std::vector<Vec> a, Vec b);

}  // namespace alcp
