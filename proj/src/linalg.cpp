#include "alcp/linalg.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace alcp {

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
    const auto first = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[i]);
    const auto last = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return values[static_cast<std::size_t>(it - col_indices.begin())];
}

Vec SparseMatrix::diagonal() const {
    Vec d(std::min(n_rows, n_cols), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
    return d;
}

std::vector<Vec> SparseMatrix::to_dense() const {
    std::vector<Vec> dense(n_rows, Vec(n_cols, 0.0));
    for (std::size_t i = 0; i < n_rows; ++i) {
        for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) dense[i][col_indices[k]] = values[k];
    }
    return dense;
}

SparseMatrix assemble_from_triplets(std::span<const Triplet> triplets, std::size_t n_rows,
                                    std::size_t n_cols) {
    for (const auto& t : triplets) {
        if (t.row >= n_rows || t.col >= n_cols) {
            throw std::invalid_argument("assemble_from_triplets: index out of range");
        }
    }
    // Counting sort by row, then a stable sort by column inside each row keeps
    // the summation order (and therefore the bits) deterministic.
    std::vector<std::size_t> count(n_rows + 1, 0);
    for (const auto& t : triplets) ++count[t.row + 1];
    std::partial_sum(count.begin(), count.end(), count.begin());
    std::vector<std::size_t> order(triplets.size());
    {
        auto next = count;
        for (std::size_t k = 0; k < triplets.size(); ++k) order[next[triplets[k].row]++] = k;
    }

    SparseMatrix a;
    a.n_rows = n_rows;
    a.n_cols = n_cols;
    a.row_offsets.assign(n_rows + 1, 0);
    a.col_indices.reserve(triplets.size());
    a.values.reserve(triplets.size());
    for (std::size_t i = 0; i < n_rows; ++i) {
        auto first = order.begin() + static_cast<std::ptrdiff_t>(count[i]);
        auto last = order.begin() + static_cast<std::ptrdiff_t>(count[i + 1]);
        std::stable_sort(first, last, [&](std::size_t p, std::size_t q) { return triplets[p].col < triplets[q].col; });
        for (auto it = first; it != last;) {
            const std::size_t col = triplets[*it].col;
            double sum = 0.0;
            for (; it != last && triplets[*it].col == col; ++it) sum += triplets[*it].value;
            a.col_indices.push_back(col);
            a.values.push_back(sum);
        }
        a.row_offsets[i + 1] = a.col_indices.size();
    }
    return a;
}

Vec spmv(const SparseMatrix& a, std::span<const double> x) {
    if (x.size() != a.n_cols) throw std::invalid_argument("spmv: dimension mismatch");
    Vec y(a.n_rows, 0.0);
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        double s = 0.0;
        for (std::size_t k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) s += a.values[k] * x[a.col_indices[k]];
        y[i] = s;
    }
    return y;
}

void append_block(const SparseMatrix& a, std::size_t row_offset, std::size_t col_offset, double scale,
                  std::vector<Triplet>& out) {
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        for (std::size_t k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
            out.push_back({row_offset + i, col_offset + a.col_indices[k], scale * a.values[k]});
        }
    }
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha, double beta) {
    if (a.n_rows != b.n_rows || a.n_cols != b.n_cols) throw std::invalid_argument("add: dimension mismatch");
    std::vector<Triplet> t;
    t.reserve(a.nnz() + b.nnz());
    append_block(a, 0, 0, alpha, t);
    append_block(b, 0, 0, beta, t);
    return assemble_from_triplets(t, a.n_rows, a.n_cols);
}

SparseMatrix add_diagonal(const SparseMatrix& a, std::span<const double> d) {
    if (a.n_rows != a.n_cols || d.size() != a.n_rows) throw std::invalid_argument("add_diagonal: dimension mismatch");
    SparseMatrix out = a;
    bool pattern_complete = true;
    for (std::size_t i = 0; i < a.n_rows && pattern_complete; ++i) {
        const auto first = out.col_indices.begin() + static_cast<std::ptrdiff_t>(out.row_offsets[i]);
        const auto last = out.col_indices.begin() + static_cast<std::ptrdiff_t>(out.row_offsets[i + 1]);
        const auto it = std::lower_bound(first, last, i);
        if (it == last || *it != i) {
            pattern_complete = false;
        } else {
            out.values[static_cast<std::size_t>(it - out.col_indices.begin())] += d[i];
        }
    }
    if (pattern_complete) return out;
    std::vector<Triplet> t;
    append_block(a, 0, 0, 1.0, t);
    for (std::size_t i = 0; i < d.size(); ++i) t.push_back({i, i, d[i]});
    return assemble_from_triplets(t, a.n_rows, a.n_cols);
}

namespace {

Vec residual_vector(const SparseMatrix& a, std::span<const double> x, std::span<const double> b) {
    Vec r = spmv(a, x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    return r;
}

Vec jacobi_inverse(const SparseMatrix& a, Preconditioner pc) {
    Vec inv(a.n_rows, 1.0);
    if (pc == Preconditioner::jacobi) {
        const Vec d = a.diagonal();
        for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = (d[i] != 0.0) ? 1.0 / d[i] : 1.0;
    }
    return inv;
}

void apply_diag(const Vec& inv, const Vec& r, Vec& z) {
    for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv[i] * r[i];
}

struct BestIterate {
    Vec x;
    double residual = std::numeric_limits<double>::infinity();
    void offer(const Vec& candidate, double res) {
        if (res < residual) {
            residual = res;
            x = candidate;
        }
    }
};

SolveResult solve_cg(const SparseMatrix& a, std::span<const double> b, double tol, std::size_t max_iter,
                     Preconditioner pc) {
    const std::size_t n = a.n_rows;
    const Vec inv = jacobi_inverse(a, pc);
    Vec x(n, 0.0);
    Vec r(b.begin(), b.end());
    double true_res = norm2(r);
    BestIterate best;
    best.offer(x, true_res);
    if (true_res <= tol) return {x, 0, true_res};

    Vec z(n), p(n);
    apply_diag(inv, r, z);
    p = z;
    double rz = dot(r, z);
    for (std::size_t it = 1; it <= max_iter; ++it) {
        const Vec ap = spmv(a, p);
        const double pap = dot(p, ap);
        if (!(pap > 0.0) || !std::isfinite(pap)) break;
        const double step = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        if (norm2(r) <= tol) {
            // Recursive residual can drift; confirm with the true residual.
            r = residual_vector(a, x, b);
            true_res = norm2(r);
            best.offer(x, true_res);
            if (true_res <= tol) return {x, it, true_res};
        }
        apply_diag(inv, r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    true_res = norm2(residual_vector(a, x, b));
    best.offer(x, true_res);
    throw ConvergenceError("cg: no convergence within iteration limit", best.x, best.residual, max_iter);
}

SolveResult solve_bicgstab(const SparseMatrix& a, std::span<const double> b, double tol, std::size_t max_iter,
                           Preconditioner pc) {
    const std::size_t n = a.n_rows;
    const Vec inv = jacobi_inverse(a, pc);
    Vec x(n, 0.0);
    Vec r(b.begin(), b.end());
    BestIterate best;
    best.offer(x, norm2(r));
    if (best.residual <= tol) return {x, 0, best.residual};

    Vec r_hat = r;
    Vec p(n, 0.0), v(n, 0.0), s(n), t(n), y(n), z(n);
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        const double rho_new = dot(r_hat, r);
        if (rho_new == 0.0 || omega == 0.0) {
            // Breakdown: restart the shadow residual from the current residual.
            r = residual_vector(a, x, b);
            r_hat = r;
            std::fill(p.begin(), p.end(), 0.0);
            std::fill(v.begin(), v.end(), 0.0);
            rho = alpha = omega = 1.0;
            continue;
        }
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
        apply_diag(inv, p, y);
        v = spmv(a, y);
        const double rv = dot(r_hat, v);
        if (rv == 0.0 || !std::isfinite(rv)) {
            omega = 0.0;
            continue;
        }
        alpha = rho / rv;
        for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
        if (norm2(s) <= tol) {
            for (std::size_t i = 0; i < n; ++i) x[i] += alpha * y[i];
            r = residual_vector(a, x, b);
            const double res = norm2(r);
            best.offer(x, res);
            if (res <= tol) return {x, it, res};
            continue;
        }
        apply_diag(inv, s, z);
        t = spmv(a, z);
        const double tt = dot(t, t);
        omega = (tt > 0.0) ? dot(t, s) / tt : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        if (norm2(r) <= tol) {
            r = residual_vector(a, x, b);
            const double res = norm2(r);
            best.offer(x, res);
            if (res <= tol) return {x, it, res};
        }
    }
    best.offer(x, norm2(residual_vector(a, x, b)));
    throw ConvergenceError("bicgstab: no convergence within iteration limit", best.x, best.residual, max_iter);
}

SolveResult solve_direct(const SparseMatrix& a, std::span<const double> b, double tol) {
    using EigenSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
    std::vector<Eigen::Triplet<double, int>> entries;
    entries.reserve(a.nnz());
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        for (std::size_t k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k) {
            entries.emplace_back(static_cast<int>(i), static_cast<int>(a.col_indices[k]), a.values[k]);
        }
    }
    EigenSparse m(static_cast<int>(a.n_rows), static_cast<int>(a.n_cols));
    m.setFromTriplets(entries.begin(), entries.end());
    m.makeCompressed();
    Eigen::SparseLU<EigenSparse, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(m);
    if (lu.info() != Eigen::Success) {
        throw ConvergenceError("direct: factorization failed (" + lu.lastErrorMessage() + ")", Vec(a.n_rows, 0.0),
                               norm2(b), 0);
    }
    const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
    const Eigen::VectorXd sol = lu.solve(rhs);
    Vec x(sol.data(), sol.data() + sol.size());
    double res = norm2(residual_vector(a, x, b));
    // One step of iterative refinement recovers digits lost to pivoting.
    if (res > tol) {
        const Vec r = residual_vector(a, x, b);
        const Eigen::Map<const Eigen::VectorXd> rr(r.data(), static_cast<Eigen::Index>(r.size()));
        const Eigen::VectorXd dx = lu.solve(rr);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[static_cast<Eigen::Index>(i)];
        res = norm2(residual_vector(a, x, b));
    }
    if (!(res <= tol)) throw ConvergenceError("direct: residual above tolerance", x, res, 1);
    return {x, 1, res};
}

}  // namespace

Vec dense_lu_solve(std::vector<Vec> a, Vec b) {
    const std::size_t n = b.size();
    if (a.size() != n) throw std::invalid_argument("dense_lu_solve: dimension mismatch");
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
        }
        if (a[piv][k] == 0.0) throw std::runtime_error("dense_lu_solve: singular matrix");
        std::swap(a[piv], a[k]);
        std::swap(b[piv], b[k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double factor = a[i][k] / a[k][k];
            if (factor == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a[i][j] -= factor * a[k][j];
            b[i] -= factor * b[k];
        }
    }
    Vec x(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= a[ii][j] * x[j];
        x[ii] = s / a[ii][ii];
    }
    return x;
}

SolveResult solve(const SparseMatrix& a, std::span<const double> b, const SolveConfig& cfg) {
    if (a.n_rows != a.n_cols) throw std::invalid_argument("solve: matrix is not square");
    if (b.size() != a.n_rows) throw std::invalid_argument("solve: dimension mismatch");
    if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0)) throw std::invalid_argument("solve: tolerances must be positive");
    const std::size_t max_iter = cfg.max_iter ? cfg.max_iter : std::max<std::size_t>(10 * a.n_rows, 1);
    const double tol = std::max(cfg.rel_tol * norm2(b), cfg.abs_tol);
    switch (cfg.method) {
        case SolveMethod::cg:
            return solve_cg(a, b, tol, max_iter, cfg.preconditioner);
        case SolveMethod::bicgstab:
            return solve_bicgstab(a, b, tol, max_iter, cfg.preconditioner);
        case SolveMethod::direct:
            return solve_direct(a, b, tol);
        case SolveMethod::dense_lu: {
            if (a.n_rows > 200) throw std::invalid_argument("solve: dense_lu limited to n <= 200");
            Vec x = dense_lu_solve(a.to_dense(), Vec(b.begin(), b.end()));
            const double res = norm2(residual_vector(a, x, b));
            if (!(res <= tol)) throw ConvergenceError("dense_lu: residual above tolerance", x, res, 1);
            return {std::move(x), 1, res};
        }
    }
    throw std::invalid_argument("solve: unknown method");
}

}  // namespace alcp
