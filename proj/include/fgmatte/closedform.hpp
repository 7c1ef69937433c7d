#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fgmatte/image.hpp"

namespace fgmatte {

/// Controls for the global (closed-form) solver.
struct CfParams {
    double eps_cf = 1e-5;       ///< uniform regularizer added to every gradient weight
    double residual_tol = 1e-6; ///< relative residual target ||Ax-b|| / ||b||
    std::int64_t max_iters = 0; ///< CG iteration cap; 0 means 10 * pixel count
    double ic_drop_tol = 1e-4;  ///< incomplete-Cholesky drop threshold (diagonal-scaled)
    int ic_max_row_entries = 64;///< cap on kept off-diagonals per factor row; 0 = unlimited

    void validate() const;
};

/// Sparse symmetric positive-(semi)definite 2n-by-2n system in CSR form.
/// The unknown vector stacks all foreground values before all background
/// values: x = [F_0..F_{n-1}, B_0..B_{n-1}] for one color channel. Each row
/// couples a pixel to itself, its F/B partner, and its 4-neighbors, so rows
/// hold at most 6 nonzeros. The full pattern is stored; symmetry is exact
/// because each off-diagonal value is written to both rows from one double.
class SparseSymmetricSystem {
public:
    SparseSymmetricSystem() = default;

    /// General constructor from per-row (column, value) lists; used for
    /// directly specified systems. Columns must be sorted and symmetric.
    /// width * height must equal pixel_count (defaults to a 1-row layout).
    SparseSymmetricSystem(std::int64_t pixel_count,
                          std::vector<std::int64_t> row_ptr,
                          std::vector<std::int32_t> cols,
                          std::vector<double> values,
                          std::array<std::vector<double>, 3> rhs,
                          int width = 0, int height = 1);

    std::int64_t pixel_count() const { return n_; }
    std::int64_t dim() const { return 2 * n_; }
    int width() const { return width_; }
    int height() const { return height_; }

    const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
    const std::vector<std::int32_t>& cols() const { return cols_; }
    const std::vector<double>& values() const { return values_; }
    const std::array<std::vector<double>, 3>& rhs() const { return rhs_; }

    /// y = A x
    void multiply(const double* x, double* y) const;

    /// Entry lookup by binary search; 0 when outside the pattern.
    double entry(std::int64_t row, std::int64_t col) const;

    std::int64_t row_nonzeros(std::int64_t row) const { return row_ptr_[row + 1] - row_ptr_[row]; }

private:
    std::int64_t n_ = 0;
    int width_ = 0;
    int height_ = 1;
    std::vector<std::int64_t> row_ptr_;
    std::vector<std::int32_t> cols_;
    std::vector<double> values_;
    std::array<std::vector<double>, 3> rhs_;
};

/// Normal equations of the global cost: per pixel the data term contributes
/// the block [[a^2, a(1-a)], [a(1-a), (1-a)^2]] at (i, i+n) with rhs
/// [a I_i^c; (1-a) I_i^c]; each forward-difference gradient (omitted at the
/// right/bottom border) contributes a graph-Laplacian edge of weight
/// |alpha gradient| + eps_cf on both the F and B blocks.
SparseSymmetricSystem assemble_system(const Image& image, const AlphaMatte& alpha,
                                      const CfParams& params = {});

enum class Preconditioner { IncompleteCholesky, Jacobi, None };

struct CfReport {
    std::array<int, 3> iterations{};
    std::array<double, 3> final_residual{};
    Preconditioner preconditioner_used = Preconditioner::IncompleteCholesky;
    bool ic_breakdown = false; ///< true when IC hit a non-positive pivot and Jacobi took over
    /// Preconditioned residual norms sqrt(r' M^-1 r) per iteration and channel.
    std::array<std::vector<double>, 3> residual_norms;
};

struct CfSolution {
    Image fg;
    Image bg;
    CfReport report;
    /// Pre-clamp per-channel solution vectors of length 2n.
    std::array<std::vector<double>, 3> raw;
};

/// Thrown when CG exhausts max_iters; carries the best iterate seen.
class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string& what, std::vector<double> best_iterate, double residual, int channel)
        : std::runtime_error(what), best_iterate(std::move(best_iterate)),
          final_residual(residual), channel(channel) {}

    std::vector<double> best_iterate;
    double final_residual = 0.0;
    int channel = 0;
};

/// Preconditioned conjugate gradient over the three channel right-hand
/// sides, sharing one factorization. IC breakdown falls back to Jacobi and
/// is recorded in the report.
CfSolution solve_pcg(const SparseSymmetricSystem& system, const CfParams& params = {},
                     Preconditioner preconditioner = Preconditioner::IncompleteCholesky);

std::pair<Image, Image> cf_foreground_background(const Image& image, const AlphaMatte& alpha,
                                                 const CfParams& params = {});

/// Variant exposing the report and pre-clamp solution.
CfSolution cf_foreground_background_full(const Image& image, const AlphaMatte& alpha,
                                         const CfParams& params = {},
                                         Preconditioner preconditioner = Preconditioner::IncompleteCholesky);

} // namespace fgmatte
