#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace thermofem {

using Vector = std::vector<double>;

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Row-compressed sparsity structure. Column indices are sorted and unique
/// within each row. Shared between all matrices assembled on one FE space.
struct CsrStructure {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_offsets;  // size rows + 1
    std::vector<std::size_t> col_indices;

    std::size_t nnz() const noexcept { return col_indices.size(); }
    /// Position of (i, j) in col_indices, or npos when structurally zero.
    std::size_t find(std::size_t i, std::size_t j) const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Compressed sparse row matrix.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::shared_ptr<const CsrStructure> structure, Vector values);

    /// Zero matrix on an existing structure.
    explicit SparseMatrix(std::shared_ptr<const CsrStructure> structure);

    std::size_t rows() const noexcept { return structure_ ? structure_->rows : 0; }
    std::size_t cols() const noexcept { return structure_ ? structure_->cols : 0; }
    std::size_t nnz() const noexcept { return values_.size(); }

    const CsrStructure& structure() const { return *structure_; }
    const std::shared_ptr<const CsrStructure>& structure_ptr() const noexcept { return structure_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    /// Entry lookup; structural zeros return 0.
    double operator()(std::size_t i, std::size_t j) const;
    Vector diagonal() const;
    bool is_symmetric(double rel_tol = 1e-13) const;
    std::vector<Vector> to_dense() const;

    /// this = alpha*this + beta*other. Both must share the same structure.
    SparseMatrix& axpby(double alpha, double beta, const SparseMatrix& other);

private:
    std::shared_ptr<const CsrStructure> structure_;
    Vector values_;
};

/// Builds a matrix from (i, j, value) triplets; duplicates are summed.
SparseMatrix sparse_from_triplets(std::size_t rows, std::size_t cols,
                                  std::span<const Triplet> triplets);

Vector matvec(const SparseMatrix& a, std::span<const double> x);
void matvec(const SparseMatrix& a, std::span<const double> x, std::span<double> y);

/// Extracts A[keep, keep]. Building the plan once amortizes the index search
/// over repeated restrictions of matrices sharing a structure.
class Restriction {
public:
    Restriction(std::shared_ptr<const CsrStructure> full, std::vector<std::size_t> keep);

    SparseMatrix apply(const SparseMatrix& a) const;
    Vector restrict_vector(std::span<const double> full) const;
    /// Scatters a reduced vector into a full-length one, zero elsewhere.
    Vector extend(std::span<const double> reduced) const;
    std::size_t size() const noexcept { return keep_.size(); }
    std::size_t full_size() const noexcept { return full_->rows; }

private:
    std::shared_ptr<const CsrStructure> full_;
    std::shared_ptr<const CsrStructure> reduced_;
    std::vector<std::size_t> keep_;
    std::vector<std::size_t> gather_;  // reduced nnz -> full nnz
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

enum class SolverMethod { Auto, ConjugateGradient, BiCGStab, DenseLU };

std::string to_string(SolverMethod m);

struct SolveOptions {
    double tol = 1e-12;  // target relative residual ||b - Ax|| / ||b||
    std::size_t max_iter = 20000;
    SolverMethod method = SolverMethod::Auto;
    /// Systems up to this size fall back to dense LU when Krylov iterations fail.
    std::size_t dense_fallback_limit = 2000;
};

struct SolveReport {
    std::size_t iterations = 0;
    double relative_residual = 0.0;
    SolverMethod method = SolverMethod::Auto;
};

struct SolveResult {
    Vector x;
    SolveReport report;
};

/// Solves A x = b. Auto picks Jacobi-preconditioned CG for symmetric matrices
/// and Jacobi-preconditioned BiCGStab otherwise. The returned residual is the
/// true residual recomputed from x. Throws NoConvergence when the target is
/// not met. An optional initial guess may be supplied.
SolveResult solve(const SparseMatrix& a, std::span<const double> b, const SolveOptions& opts = {},
                  std::span<const double> x0 = {});

/// Dense LU with partial pivoting. Throws NoConvergence on a singular matrix.
Vector dense_lu_solve(std::vector<Vector> a, Vector b);

/// Matrix Market coordinate dump (real general), for debugging.
void write_matrix_market(const SparseMatrix& a, const std::filesystem::path& path);

}  // namespace thermofem
