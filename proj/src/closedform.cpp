#include "fgmatte/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <optional>
#include <queue>
#include <string>

namespace fgmatte {

void CfParams::validate() const {
    if (!(eps_cf > 0.0)) throw std::invalid_argument("CfParams: eps_cf must be > 0");
    if (!(residual_tol > 0.0)) throw std::invalid_argument("CfParams: residual_tol must be > 0");
    if (max_iters < 0) throw std::invalid_argument("CfParams: max_iters must be >= 0");
    if (!(ic_drop_tol > 0.0)) throw std::invalid_argument("CfParams: ic_drop_tol must be > 0");
    if (ic_max_row_entries < 0) throw std::invalid_argument("CfParams: ic_max_row_entries must be >= 0");
}

SparseSymmetricSystem::SparseSymmetricSystem(std::int64_t pixel_count,
                                             std::vector<std::int64_t> row_ptr,
                                             std::vector<std::int32_t> cols,
                                             std::vector<double> values,
                                             std::array<std::vector<double>, 3> rhs,
                                             int width, int height)
    : n_(pixel_count), width_(width > 0 ? width : int(pixel_count)), height_(height),
      row_ptr_(std::move(row_ptr)), cols_(std::move(cols)),
      values_(std::move(values)), rhs_(std::move(rhs)) {
    if (std::int64_t(row_ptr_.size()) != 2 * n_ + 1)
        throw std::invalid_argument("SparseSymmetricSystem: row_ptr must have 2n+1 entries");
    if (std::int64_t(width_) * height_ != n_)
        throw std::invalid_argument("SparseSymmetricSystem: width * height must equal pixel count");
    for (const auto& r : rhs_)
        if (std::int64_t(r.size()) != 2 * n_)
            throw std::invalid_argument("SparseSymmetricSystem: each rhs must have 2n entries");
}

void SparseSymmetricSystem::multiply(const double* x, double* y) const {
    const std::int64_t dim = 2 * n_;
    for (std::int64_t r = 0; r < dim; ++r) {
        double acc = 0.0;
        for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            acc += values_[k] * x[cols_[k]];
        y[r] = acc;
    }
}

double SparseSymmetricSystem::entry(std::int64_t row, std::int64_t col) const {
    const auto begin = cols_.begin() + row_ptr_[row];
    const auto end = cols_.begin() + row_ptr_[row + 1];
    const auto it = std::lower_bound(begin, end, std::int32_t(col));
    if (it == end || *it != col) return 0.0;
    return values_[row_ptr_[row] + (it - begin)];
}

SparseSymmetricSystem assemble_system(const Image& image, const AlphaMatte& alpha,
                                      const CfParams& params) {
    params.validate();
    if (image.channels() != 3)
        throw std::invalid_argument("assemble_system: image must have 3 channels, got " +
                                    std::to_string(image.channels()));
    if (image.width() != alpha.width() || image.height() != alpha.height())
        throw std::invalid_argument("assemble_system: alpha size " +
                                    std::to_string(alpha.width()) + "x" + std::to_string(alpha.height()) +
                                    " does not match image size " +
                                    std::to_string(image.width()) + "x" + std::to_string(image.height()));

    const int w = image.width();
    const int h = image.height();
    const std::int64_t n = std::int64_t(w) * h;
    const double* a = alpha.data().data();

    // Forward-difference gradient weights; each edge value is computed once
    // so the matrix is symmetric entry-for-entry.
    std::vector<double> wx(w > 1 ? std::size_t(w - 1) * h : 0);
    std::vector<double> wy(h > 1 ? std::size_t(w) * (h - 1) : 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x + 1 < w; ++x)
            wx[std::size_t(y) * (w - 1) + x] = std::abs(a[std::size_t(y) * w + x + 1] - a[std::size_t(y) * w + x]) + params.eps_cf;
    for (int y = 0; y + 1 < h; ++y)
        for (int x = 0; x < w; ++x)
            wy[std::size_t(y) * w + x] = std::abs(a[std::size_t(y + 1) * w + x] - a[std::size_t(y) * w + x]) + params.eps_cf;

    const auto edge_left = [&](int x, int y) { return wx[std::size_t(y) * (w - 1) + x - 1]; };
    const auto edge_right = [&](int x, int y) { return wx[std::size_t(y) * (w - 1) + x]; };
    const auto edge_up = [&](int x, int y) { return wy[std::size_t(y - 1) * w + x]; };
    const auto edge_down = [&](int x, int y) { return wy[std::size_t(y) * w + x]; };

    std::vector<std::int64_t> row_ptr(std::size_t(2 * n + 1));
    std::vector<std::int32_t> cols;
    std::vector<double> values;
    cols.reserve(std::size_t(12) * n);
    values.reserve(std::size_t(12) * n);

    // F rows first (indices [0, n)), then B rows ([n, 2n)); both blocks have
    // identical Laplacian structure, F rows also couple to the B partner and
    // vice versa.
    for (int block = 0; block < 2; ++block) {
        const std::int64_t base = block == 0 ? 0 : n;
        const std::int64_t partner_base = block == 0 ? n : 0;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const std::int64_t i = std::int64_t(y) * w + x;
                const std::int64_t row = base + i;
                row_ptr[std::size_t(row)] = std::int64_t(cols.size());

                const double ai = a[i];
                const double data_diag = block == 0 ? ai * ai : (1.0 - ai) * (1.0 - ai);
                const double data_off = ai * (1.0 - ai);
                double diag = data_diag;

                const auto push = [&](std::int64_t col, double v) {
                    cols.push_back(std::int32_t(col));
                    values.push_back(v);
                };

                // Columns in ascending order. The partner column is i+n for F
                // rows (after every same-block neighbor) and i for B rows
                // (before them).
                if (block == 1) push(i, data_off);
                if (y > 0) { const double e = edge_up(x, y); diag += e; push(base + i - w, -e); }
                if (x > 0) { const double e = edge_left(x, y); diag += e; push(base + i - 1, -e); }
                const std::size_t diag_slot = cols.size();
                push(row, 0.0); // patched below once all incident edges are summed
                if (x + 1 < w) { const double e = edge_right(x, y); diag += e; push(base + i + 1, -e); }
                if (y + 1 < h) { const double e = edge_down(x, y); diag += e; push(base + i + w, -e); }
                if (block == 0) push(partner_base + i, data_off);

                values[diag_slot] = diag;
            }
        }
    }
    row_ptr[std::size_t(2 * n)] = std::int64_t(cols.size());

    std::array<std::vector<double>, 3> rhs;
    for (int c = 0; c < 3; ++c) {
        rhs[c].resize(std::size_t(2 * n));
        const double* img = image.plane(c);
        for (std::int64_t i = 0; i < n; ++i) {
            rhs[c][std::size_t(i)] = a[i] * img[i];
            rhs[c][std::size_t(i + n)] = (1.0 - a[i]) * img[i];
        }
    }

    return SparseSymmetricSystem(n, std::move(row_ptr), std::move(cols), std::move(values), std::move(rhs), w, h);
}

namespace {

/// Lower-triangular incomplete Cholesky factor, rows compressed.
struct IcFactor {
    std::vector<std::int64_t> row_ptr;
    std::vector<std::int32_t> cols;
    std::vector<double> values;
    std::vector<double> diag; // L_ii

    void forward_solve(const double* r, double* y) const {
        const std::int64_t dim = std::int64_t(diag.size());
        for (std::int64_t i = 0; i < dim; ++i) {
            double acc = r[i];
            for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
                acc -= values[k] * y[cols[k]];
            y[i] = acc / diag[i];
        }
    }

    void backward_solve(double* x) const {
        const std::int64_t dim = std::int64_t(diag.size());
        for (std::int64_t i = dim - 1; i >= 0; --i) {
            const double xi = x[i] / diag[i];
            x[i] = xi;
            for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
                x[cols[k]] -= values[k] * xi;
        }
    }
};

/// Thresholded incomplete Cholesky: fill-ins with magnitude below
/// drop_tol * sqrt(A_ii) are discarded; at most max_row_entries largest
/// off-diagonals are stored per row. Returns nullopt on a non-positive pivot.
std::optional<IcFactor> ic_factor(const SparseSymmetricSystem& A, double drop_tol, int max_row_entries) {
    const std::int64_t dim = A.dim();
    IcFactor L;
    L.row_ptr.assign(std::size_t(dim + 1), 0);
    L.diag.assign(std::size_t(dim), 0.0);

    // Column lists of finalized rows: col_entries[k] holds (row j, L_jk).
    std::vector<std::vector<std::pair<std::int32_t, double>>> col_entries{std::size_t(dim)};

    std::vector<double> wval(std::size_t(dim), 0.0);
    std::vector<std::int64_t> epoch(std::size_t(dim), -1);
    std::vector<std::int64_t> pattern_epoch(std::size_t(dim), -1);
    std::priority_queue<std::int32_t, std::vector<std::int32_t>, std::greater<>> active;
    std::vector<std::pair<std::int32_t, double>> kept;

    const auto& arow_ptr = A.row_ptr();
    const auto& acols = A.cols();
    const auto& avals = A.values();

    for (std::int64_t i = 0; i < dim; ++i) {
        double diag_a = 0.0;
        for (std::int64_t k = arow_ptr[i]; k < arow_ptr[i + 1]; ++k) {
            const std::int32_t c = acols[k];
            if (c < i) {
                wval[c] = avals[k];
                epoch[c] = i;
                pattern_epoch[c] = i;
                active.push(c);
            } else if (c == i) {
                diag_a = avals[k];
            }
        }

        const double fill_cut = drop_tol * std::sqrt(std::max(diag_a, 0.0));
        kept.clear();
        while (!active.empty()) {
            const std::int32_t k = active.top();
            active.pop();
            if (!active.empty() && active.top() == k) continue; // duplicate defence (should not happen)
            const double lik = wval[k] / L.diag[k];
            const bool from_pattern = pattern_epoch[k] == i;
            if (!from_pattern && std::abs(lik) < fill_cut) continue;
            kept.emplace_back(k, lik);
            for (const auto& [j, ljk] : col_entries[k]) {
                if (j >= i) break;
                if (epoch[j] != i) {
                    wval[j] = 0.0;
                    epoch[j] = i;
                    active.push(j);
                }
                wval[j] -= lik * ljk;
            }
        }

        if (max_row_entries > 0 && std::int64_t(kept.size()) > max_row_entries) {
            std::nth_element(kept.begin(), kept.begin() + max_row_entries, kept.end(),
                             [](const auto& lhs, const auto& rhs) { return std::abs(lhs.second) > std::abs(rhs.second); });
            kept.resize(std::size_t(max_row_entries));
            std::sort(kept.begin(), kept.end(),
                      [](const auto& lhs, const auto& rhs) { return lhs.first < rhs.first; });
        }

        double pivot = diag_a;
        for (const auto& [k, lik] : kept) pivot -= lik * lik;
        if (!(pivot > 0.0)) return std::nullopt;
        L.diag[std::size_t(i)] = std::sqrt(pivot);

        for (const auto& [k, lik] : kept) {
            L.cols.push_back(k);
            L.values.push_back(lik);
            col_entries[std::size_t(k)].emplace_back(std::int32_t(i), lik);
        }
        L.row_ptr[std::size_t(i + 1)] = std::int64_t(L.cols.size());
    }
    return L;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

struct ChannelResult {
    std::vector<double> x;
    int iterations = 0;
    double final_residual = 0.0;
    std::vector<double> residual_norms;
};

ChannelResult pcg_channel(const SparseSymmetricSystem& A, const std::vector<double>& b,
                          const CfParams& params, const IcFactor* ic, const std::vector<double>* jacobi,
                          std::int64_t max_iters, int channel) {
    const std::int64_t dim = A.dim();
    ChannelResult res;
    res.x.assign(std::size_t(dim), 0.0);

    const double bnorm = norm2(b);
    if (bnorm == 0.0) return res;

    const auto apply_precond = [&](const std::vector<double>& r, std::vector<double>& z) {
        if (ic) {
            ic->forward_solve(r.data(), z.data());
            ic->backward_solve(z.data());
        } else if (jacobi) {
            for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i] / (*jacobi)[i];
        } else {
            z = r;
        }
    };

    std::vector<double> r = b;
    std::vector<double> z(std::size_t(dim), 0.0);
    apply_precond(r, z);
    std::vector<double> p = z;
    std::vector<double> q(std::size_t(dim), 0.0);
    double rz = dot(r, z);
    res.residual_norms.push_back(std::sqrt(std::max(rz, 0.0)));

    std::vector<double> best_x = res.x;
    double best_rel = 1.0;
    double rel = 1.0;

    for (std::int64_t it = 0; it < max_iters; ++it) {
        A.multiply(p.data(), q.data());
        const double pq = dot(p, q);
        if (!(pq > 0.0)) break; // numerically semi-definite direction; keep best iterate
        const double step = rz / pq;
        for (std::size_t k = 0; k < res.x.size(); ++k) res.x[k] += step * p[k];
        for (std::size_t k = 0; k < r.size(); ++k) r[k] -= step * q[k];
        res.iterations = int(it + 1);

        rel = norm2(r) / bnorm;
        if (rel < best_rel) {
            best_rel = rel;
            best_x = res.x;
        }
        if (rel < params.residual_tol) {
            res.final_residual = rel;
            return res;
        }

        apply_precond(r, z);
        const double rz_new = dot(r, z);
        res.residual_norms.push_back(std::sqrt(std::max(rz_new, 0.0)));
        const double beta = rz_new / rz;
        for (std::size_t k = 0; k < p.size(); ++k) p[k] = z[k] + beta * p[k];
        rz = rz_new;
    }

    throw SolverFailure("solve_pcg: channel " + std::to_string(channel) + " did not reach residual " +
                            std::to_string(params.residual_tol) + " within " + std::to_string(max_iters) +
                            " iterations (best " + std::to_string(best_rel) + ")",
                        std::move(best_x), best_rel, channel);
}

} // namespace

CfSolution solve_pcg(const SparseSymmetricSystem& system, const CfParams& params,
                     Preconditioner preconditioner) {
    params.validate();
    const std::int64_t n = system.pixel_count();
    const std::int64_t dim = system.dim();
    const std::int64_t max_iters = params.max_iters > 0 ? params.max_iters : 10 * std::max<std::int64_t>(n, 1);

    CfSolution sol;
    sol.report.preconditioner_used = preconditioner;

    std::optional<IcFactor> ic;
    std::vector<double> jacobi;
    if (preconditioner == Preconditioner::IncompleteCholesky) {
        ic = ic_factor(system, params.ic_drop_tol, params.ic_max_row_entries);
        if (!ic) {
            sol.report.ic_breakdown = true;
            sol.report.preconditioner_used = Preconditioner::Jacobi;
            preconditioner = Preconditioner::Jacobi;
        }
    }
    if (preconditioner == Preconditioner::Jacobi) {
        jacobi.resize(std::size_t(dim));
        for (std::int64_t i = 0; i < dim; ++i) {
            const double d = system.entry(i, i);
            jacobi[std::size_t(i)] = d > 0.0 ? d : 1.0;
        }
    }

    for (int c = 0; c < 3; ++c) {
        ChannelResult res = pcg_channel(system, system.rhs()[c], params,
                                        ic ? &*ic : nullptr, jacobi.empty() ? nullptr : &jacobi,
                                        max_iters, c);
        sol.report.iterations[c] = res.iterations;
        sol.report.final_residual[c] = res.final_residual;
        sol.report.residual_norms[c] = std::move(res.residual_norms);
        sol.raw[c] = std::move(res.x);
    }

    const int width = system.width();
    const int height = system.height();
    sol.fg = Image(width, height, 3);
    sol.bg = Image(width, height, 3);
    for (int c = 0; c < 3; ++c) {
        double* f = sol.fg.plane(c);
        double* b = sol.bg.plane(c);
        const std::vector<double>& x = sol.raw[c];
        for (std::int64_t i = 0; i < n; ++i) {
            f[i] = clamp01(x[std::size_t(i)]);
            b[i] = clamp01(x[std::size_t(i + n)]);
        }
    }
    return sol;
}

CfSolution cf_foreground_background_full(const Image& image, const AlphaMatte& alpha,
                                         const CfParams& params, Preconditioner preconditioner) {
    const SparseSymmetricSystem system = assemble_system(image, alpha, params);
    return solve_pcg(system, params, preconditioner);
}

std::pair<Image, Image> cf_foreground_background(const Image& image, const AlphaMatte& alpha,
                                                 const CfParams& params) {
    CfSolution sol = cf_foreground_background_full(image, alpha, params);
    return {std::move(sol.fg), std::move(sol.bg)};
}

} // namespace fgmatte
