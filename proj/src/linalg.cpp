#include "thermofem/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>

#include "thermofem/errors.hpp"

namespace thermofem {

std::size_t CsrStructure::find(std::size_t i, std::size_t j) const {
    const auto begin = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[i]);
    const auto end = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[i + 1]);
    const auto it = std::lower_bound(begin, end, j);
    if (it == end || *it != j) return npos;
    return static_cast<std::size_t>(it - col_indices.begin());
}

SparseMatrix::SparseMatrix(std::shared_ptr<const CsrStructure> structure, Vector values)
    : structure_(std::move(structure)), values_(std::move(values)) {
    if (!structure_ || values_.size() != structure_->nnz())
        throw InvalidParameter("SparseMatrix: value count does not match structure");
}

SparseMatrix::SparseMatrix(std::shared_ptr<const CsrStructure> structure)
    : structure_(std::move(structure)) {
    if (!structure_) throw InvalidParameter("SparseMatrix: null structure");
    values_.assign(structure_->nnz(), 0.0);
}

double SparseMatrix::operator()(std::size_t i, std::size_t j) const {
    if (i >= rows() || j >= cols()) throw InvalidParameter("SparseMatrix: index out of range");
    const auto pos = structure_->find(i, j);
    return pos == CsrStructure::npos ? 0.0 : values_[pos];
}

Vector SparseMatrix::diagonal() const {
    Vector d(std::min(rows(), cols()), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (*this)(i, i);
    return d;
}

bool SparseMatrix::is_symmetric(double rel_tol) const {
    if (rows() != cols()) return false;
    double scale = 0.0;
    for (double v : values_) scale = std::max(scale, std::abs(v));
    const auto& s = *structure_;
    for (std::size_t i = 0; i < s.rows; ++i) {
        for (std::size_t k = s.row_offsets[i]; k < s.row_offsets[i + 1]; ++k) {
            const std::size_t j = s.col_indices[k];
            if (j <= i) continue;
            const auto pos = s.find(j, i);
            const double other = pos == CsrStructure::npos ? 0.0 : values_[pos];
            if (std::abs(values_[k] - other) > rel_tol * scale) return false;
        }
    }
    // Entries below the diagonal without an upper partner.
    for (std::size_t i = 0; i < s.rows; ++i) {
        for (std::size_t k = s.row_offsets[i]; k < s.row_offsets[i + 1]; ++k) {
            const std::size_t j = s.col_indices[k];
            if (j < i && s.find(j, i) == CsrStructure::npos &&
                std::abs(values_[k]) > rel_tol * scale)
                return false;
        }
    }
    return true;
}

std::vector<Vector> SparseMatrix::to_dense() const {
    std::vector<Vector> d(rows(), Vector(cols(), 0.0));
    const auto& s = *structure_;
    for (std::size_t i = 0; i < s.rows; ++i)
        for (std::size_t k = s.row_offsets[i]; k < s.row_offsets[i + 1]; ++k)
            d[i][s.col_indices[k]] = values_[k];
    return d;
}

SparseMatrix& SparseMatrix::axpby(double alpha, double beta, const SparseMatrix& other) {
    if (structure_ != other.structure_ &&
        (structure_->rows != other.structure_->rows ||
         structure_->row_offsets != other.structure_->row_offsets ||
         structure_->col_indices != other.structure_->col_indices))
        throw InvalidParameter("SparseMatrix::axpby: structures differ");
    for (std::size_t k = 0; k < values_.size(); ++k)
        values_[k] = alpha * values_[k] + beta * other.values_[k];
    return *this;
}

SparseMatrix sparse_from_triplets(std::size_t rows, std::size_t cols,
                                  std::span<const Triplet> triplets) {
    for (const auto& t : triplets)
        if (t.row >= rows || t.col >= cols)
            throw InvalidParameter("sparse_from_triplets: index (" + std::to_string(t.row) + "," +
                                   std::to_string(t.col) + ") out of range");
    std::vector<std::size_t> order(triplets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Stable sort keeps the accumulation order of duplicates fixed.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ta = triplets[a];
        const auto& tb = triplets[b];
        return ta.row != tb.row ? ta.row < tb.row : ta.col < tb.col;
    });
    auto s = std::make_shared<CsrStructure>();
    s->rows = rows;
    s->cols = cols;
    s->row_offsets.assign(rows + 1, 0);
    Vector values;
    for (std::size_t k = 0; k < order.size();) {
        const auto& t = triplets[order[k]];
        double sum = 0.0;
        std::size_t m = k;
        while (m < order.size() && triplets[order[m]].row == t.row &&
               triplets[order[m]].col == t.col) {
            sum += triplets[order[m]].value;
            ++m;
        }
        s->col_indices.push_back(t.col);
        values.push_back(sum);
        ++s->row_offsets[t.row + 1];
        k = m;
    }
    for (std::size_t i = 0; i < rows; ++i) s->row_offsets[i + 1] += s->row_offsets[i];
    return SparseMatrix(std::move(s), std::move(values));
}

void matvec(const SparseMatrix& a, std::span<const double> x, std::span<double> y) {
    if (x.size() != a.cols() || y.size() != a.rows())
        throw InvalidParameter("matvec: dimension mismatch");
    const auto& s = a.structure();
    const auto vals = a.values();
    for (std::size_t i = 0; i < s.rows; ++i) {
        double sum = 0.0;
        for (std::size_t k = s.row_offsets[i]; k < s.row_offsets[i + 1]; ++k)
            sum += vals[k] * x[s.col_indices[k]];
        y[i] = sum;
    }
}

Vector matvec(const SparseMatrix& a, std::span<const double> x) {
    Vector y(a.rows(), 0.0);
    matvec(a, x, y);
    return y;
}

Restriction::Restriction(std::shared_ptr<const CsrStructure> full, std::vector<std::size_t> keep)
    : full_(std::move(full)), keep_(std::move(keep)) {
    std::vector<std::size_t> new_index(full_->rows, CsrStructure::npos);
    for (std::size_t r = 0; r < keep_.size(); ++r) {
        if (keep_[r] >= full_->rows) throw InvalidParameter("Restriction: index out of range");
        new_index[keep_[r]] = r;
    }
    auto s = std::make_shared<CsrStructure>();
    s->rows = keep_.size();
    s->cols = keep_.size();
    s->row_offsets.assign(keep_.size() + 1, 0);
    for (std::size_t r = 0; r < keep_.size(); ++r) {
        const std::size_t i = keep_[r];
        // Kept indices are increasing, so mapped columns stay sorted.
        for (std::size_t k = full_->row_offsets[i]; k < full_->row_offsets[i + 1]; ++k) {
            const std::size_t c = new_index[full_->col_indices[k]];
            if (c == CsrStructure::npos) continue;
            s->col_indices.push_back(c);
            gather_.push_back(k);
        }
        s->row_offsets[r + 1] = s->col_indices.size();
    }
    if (!std::is_sorted(keep_.begin(), keep_.end()))
        throw InvalidParameter("Restriction: kept indices must be increasing");
    reduced_ = std::move(s);
}

SparseMatrix Restriction::apply(const SparseMatrix& a) const {
    if (a.structure_ptr() != full_ &&
        (a.rows() != full_->rows || a.structure().col_indices != full_->col_indices))
        throw InvalidParameter("Restriction::apply: matrix structure differs from plan");
    Vector vals(gather_.size());
    const auto src = a.values();
    for (std::size_t k = 0; k < gather_.size(); ++k) vals[k] = src[gather_[k]];
    return SparseMatrix(reduced_, std::move(vals));
}

Vector Restriction::restrict_vector(std::span<const double> full) const {
    if (full.size() != full_->rows) throw InvalidParameter("Restriction: vector size mismatch");
    Vector out(keep_.size());
    for (std::size_t r = 0; r < keep_.size(); ++r) out[r] = full[keep_[r]];
    return out;
}

Vector Restriction::extend(std::span<const double> reduced) const {
    if (reduced.size() != keep_.size()) throw InvalidParameter("Restriction: vector size mismatch");
    Vector out(full_->rows, 0.0);
    for (std::size_t r = 0; r < keep_.size(); ++r) out[keep_[r]] = reduced[r];
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

std::string to_string(SolverMethod m) {
    switch (m) {
        case SolverMethod::Auto: return "auto";
        case SolverMethod::ConjugateGradient: return "cg";
        case SolverMethod::BiCGStab: return "bicgstab";
        case SolverMethod::DenseLU: return "dense-lu";
    }
    return "unknown";
}

namespace {

struct KrylovOutcome {
    bool converged = false;
    std::size_t iterations = 0;
};

double residual_norm(const SparseMatrix& a, std::span<const double> b, std::span<const double> x,
                     Vector& r) {
    matvec(a, x, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    return norm2(r);
}

bool jacobi(const SparseMatrix& a, Vector& inv_diag) {
    inv_diag = a.diagonal();
    for (double& d : inv_diag) {
        if (d == 0.0 || !std::isfinite(d)) return false;
        d = 1.0 / d;
    }
    return true;
}

// Jacobi-preconditioned conjugate gradients. Restarts from the true residual
// when the recursive one claims convergence but the true one does not.
KrylovOutcome conjugate_gradient(const SparseMatrix& a, std::span<const double> b, Vector& x,
                                 double target, std::size_t max_iter) {
    KrylovOutcome out;
    Vector inv_diag;
    if (!jacobi(a, inv_diag)) return out;
    const std::size_t n = b.size();
    Vector r(n), z(n), p(n), ap(n);
    while (out.iterations < max_iter) {
        double rnorm = residual_norm(a, b, x, r);
        if (rnorm <= target) {
            out.converged = true;
            return out;
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        p = z;
        double rz = dot(r, z);
        bool restart = false;
        while (out.iterations < max_iter) {
            matvec(a, p, ap);
            const double pap = dot(p, ap);
            if (!(pap > 0.0) || !std::isfinite(pap)) return out;  // not SPD or breakdown
            const double alpha = rz / pap;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            ++out.iterations;
            rnorm = norm2(r);
            if (!std::isfinite(rnorm)) return out;
            if (rnorm <= target) {
                restart = true;
                break;
            }
            for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
            const double rz_new = dot(r, z);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        if (!restart) break;
        // Verify against the true residual on the next pass.
        Vector check(n);
        if (residual_norm(a, b, x, check) <= target) {
            out.converged = true;
            return out;
        }
    }
    return out;
}

// Right Jacobi-preconditioned BiCGStab with true-residual restarts.
KrylovOutcome bicgstab(const SparseMatrix& a, std::span<const double> b, Vector& x, double target,
                       std::size_t max_iter) {
    KrylovOutcome out;
    Vector inv_diag;
    if (!jacobi(a, inv_diag)) return out;
    const std::size_t n = b.size();
    Vector r(n), rhat(n), p(n), v(n), phat(n), s(n), shat(n), t(n);
    std::size_t restarts = 0;
    while (out.iterations < max_iter && restarts < 50) {
        double rnorm = residual_norm(a, b, x, r);
        if (rnorm <= target) {
            out.converged = true;
            return out;
        }
        ++restarts;
        rhat = r;
        std::fill(p.begin(), p.end(), 0.0);
        std::fill(v.begin(), v.end(), 0.0);
        double rho = 1.0, alpha = 1.0, omega = 1.0;
        while (out.iterations < max_iter) {
            const double rho_new = dot(rhat, r);
            if (rho_new == 0.0 || !std::isfinite(rho_new)) break;
            const double beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
            for (std::size_t i = 0; i < n; ++i) phat[i] = inv_diag[i] * p[i];
            matvec(a, phat, v);
            const double rv = dot(rhat, v);
            if (rv == 0.0 || !std::isfinite(rv)) break;
            alpha = rho / rv;
            for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
            ++out.iterations;
            if (norm2(s) <= target) {
                for (std::size_t i = 0; i < n; ++i) x[i] += alpha * phat[i];
                break;
            }
            for (std::size_t i = 0; i < n; ++i) shat[i] = inv_diag[i] * s[i];
            matvec(a, shat, t);
            const double tt = dot(t, t);
            if (tt == 0.0 || !std::isfinite(tt)) {
                for (std::size_t i = 0; i < n; ++i) x[i] += alpha * phat[i];
                break;
            }
            omega = dot(t, s) / tt;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * phat[i] + omega * shat[i];
                r[i] = s[i] - omega * t[i];
            }
            rnorm = norm2(r);
            if (!std::isfinite(rnorm)) return out;
            if (rnorm <= target || omega == 0.0) break;
        }
    }
    Vector check(n);
    out.converged = residual_norm(a, b, x, check) <= target;
    return out;
}

}  // namespace

Vector dense_lu_solve(std::vector<Vector> a, Vector b) {
    const std::size_t n = b.size();
    if (a.size() != n) throw InvalidParameter("dense_lu_solve: dimension mismatch");
    double scale = 0.0;
    for (const auto& row : a) {
        if (row.size() != n) throw InvalidParameter("dense_lu_solve: matrix not square");
        for (double v : row) scale = std::max(scale, std::abs(v));
    }
    const double tiny = scale * 1e-14 * static_cast<double>(std::max<std::size_t>(n, 1));
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
        if (!(std::abs(a[piv][k]) > tiny))
            throw NoConvergence("dense LU: matrix is singular", std::numeric_limits<double>::infinity());
        std::swap(a[k], a[piv]);
        std::swap(b[k], b[piv]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i][k] / a[k][k];
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    Vector x(n);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t j = k + 1; j < n; ++j) s -= a[k][j] * x[j];
        x[k] = s / a[k][k];
    }
    return x;
}

SolveResult solve(const SparseMatrix& a, std::span<const double> b, const SolveOptions& opts,
                  std::span<const double> x0) {
    if (a.rows() != a.cols()) throw InvalidParameter("solve: matrix is not square");
    if (b.size() != a.rows()) throw InvalidParameter("solve: right-hand side size mismatch");
    if (!x0.empty() && x0.size() != b.size())
        throw InvalidParameter("solve: initial guess size mismatch");
    if (!(opts.tol > 0.0)) throw InvalidParameter("solve: tolerance must be positive");

    const std::size_t n = b.size();
    SolveResult result;
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        result.x.assign(n, 0.0);
        result.report = {0, 0.0, opts.method};
        return result;
    }
    const double target = opts.tol * bnorm;

    SolverMethod method = opts.method;
    if (method == SolverMethod::Auto)
        method = a.is_symmetric() ? SolverMethod::ConjugateGradient : SolverMethod::BiCGStab;

    Vector r(n);
    double best = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    const auto attempt = [&](SolverMethod m) -> bool {
        Vector x = x0.empty() ? Vector(n, 0.0) : Vector(x0.begin(), x0.end());
        KrylovOutcome k;
        if (m == SolverMethod::ConjugateGradient)
            k = conjugate_gradient(a, b, x, target, opts.max_iter);
        else
            k = bicgstab(a, b, x, target, opts.max_iter);
        iterations += k.iterations;
        const double res = residual_norm(a, b, x, r) / bnorm;
        if (std::isfinite(res) && res < best) best = res;
        if (k.converged && res <= opts.tol) {
            result.x = std::move(x);
            result.report = {iterations, res, m};
            return true;
        }
        return false;
    };

    if (method != SolverMethod::DenseLU) {
        if (attempt(method)) return result;
        if (method == SolverMethod::ConjugateGradient && opts.method == SolverMethod::Auto &&
            attempt(SolverMethod::BiCGStab))
            return result;
        if (opts.method != SolverMethod::Auto || n > opts.dense_fallback_limit)
            throw NoConvergence("solve: " + to_string(method) + " did not reach tolerance", best);
    }
    try {
        Vector x = dense_lu_solve(a.to_dense(), Vector(b.begin(), b.end()));
        const double res = residual_norm(a, b, x, r) / bnorm;
        if (!(res <= opts.tol)) throw NoConvergence("solve: dense LU residual above tolerance", res);
        result.x = std::move(x);
        result.report = {iterations + 1, res, SolverMethod::DenseLU};
        return result;
    } catch (const NoConvergence& e) {
        throw NoConvergence(std::string("solve: ") + e.what(), std::min(best, e.best_residual()));
    }
}

void write_matrix_market(const SparseMatrix& a, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
    out << std::setprecision(17);
    const auto& s = a.structure();
    const auto vals = a.values();
    for (std::size_t i = 0; i < s.rows; ++i)
        for (std::size_t k = s.row_offsets[i]; k < s.row_offsets[i + 1]; ++k)
            out << i + 1 << ' ' << s.col_indices[k] + 1 << ' ' << vals[k] << '\n';
}

}  // namespace thermofem
