#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "frac/radar_sim.hpp"

namespace frac {

inline constexpr std::size_t kDefaultMaxDictionaryEntries = std::size_t{1} << 26;

// Row index n*K*Q_r + k*Q_r + q_r, column index n_idx*M*Q + m_idx*Q + q_idx.
class Dictionary {
public:
    Dictionary(const SelectionSequence& sel, const SystemConfig& cfg, bool exact_xi = true,
               std::size_t max_entries = kDefaultMaxDictionaryEntries);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool exact_xi() const { return exact_xi_; }
    const cd* data() const { return a_.data(); }
    const cd* row(std::size_t i) const { return a_.data() + i * cols_; }
    const cd& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
    CVec column(std::size_t j) const;

    std::size_t flat_index(int n_idx, int m_idx, int q_idx) const {
        return (static_cast<std::size_t>(n_idx) * M_ + m_idx) * Q_ + q_idx;
    }

    void apply(const cd* b, cd* y) const;      // y = A b
    void apply_h(const cd* y, cd* out) const;  // out = A^H y

    // Removes the half-cell grid offset: multiplies row (n,k,q_r) by
    // e^{-j pi (m + xi (n + Q_r p + q_r))}, after which on-grid echoes equal A b.
    CVec center(const CVec& y) const;
    CVec center(const CoarseCellSlice& s) const { return center(s.data); }

private:
    int N_, M_, K_, Q_r_, Q_;
    bool exact_xi_;
    std::size_t rows_, cols_;
    CVec a_;
    std::vector<double> center_turns_;
};

struct SparseScene {
    std::size_t length = 0;
    std::vector<std::size_t> support;  // ascending
    CVec values;

    CVec dense() const;
    static SparseScene from_dense(const CVec& b, double threshold = 0.0);
};

struct GridCoord {
    int cell = 0;
    int n_idx = 0;   // velocity bin
    int m_idx = 0;   // range bin inside the cell
    int q_idx = 0;   // angle bin
    std::size_t flat = 0;
    // distance to the nearest grid point in each normalised axis
    double off_r = 0.0, off_v = 0.0, off_theta = 0.0;

    bool same_bin(const GridCoord& o) const { return cell == o.cell && flat == o.flat; }
};

struct RecoveredTarget {
    double r = 0.0;
    double v = 0.0;
    double theta = 0.0;   // NaN when the angle bin lies outside the visible region
    cd beta{};
    std::size_t flat = 0;
    int cell = 0;
};

RecoveredTarget grid_to_physical(std::size_t flat, int cell, const SystemConfig& cfg, cd beta = {});
// Rounds to the nearest grid point; range bins that round past the cell edge move to the next cell.
GridCoord physical_to_grid(const Target& t, const SystemConfig& cfg);
// Target placed exactly on a grid point.
Target grid_target(const GridCoord& g, const SystemConfig& cfg, cd alpha = {1.0, 0.0});

struct OmpOptions {
    std::optional<int> max_terms;   // known target count
    double residual_tol = 0.0;      // stop once ||r|| <= tol
};

struct OmpResult {
    SparseScene b;
    double residual_norm = 0.0;
    int iterations = 0;
    bool rank_deficient = false;
};

OmpResult omp_recover(const CVec& y, const Dictionary& A, const OmpOptions& opt);

struct BpOptions {
    double epsilon = 0.0;     // ||y - A b|| <= epsilon
    double abs_tol = 1e-9;
    double rel_tol = 1e-7;
    int max_iter = 20000;
    double rho = 0.0;         // 0 picks a scale from the data
};

struct BpResult {
    SparseScene b;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double fit_residual = 0.0;   // ||y - A b||
    int iterations = 0;
    bool converged = false;
    bool polished = false;       // support least-squares refinement replaced the ADMM iterate
};

// Holds the factorisation of A A^H so several right-hand sides can share it.
class BasisPursuit {
public:
    explicit BasisPursuit(const Dictionary& A);
    BpResult solve(const CVec& y, const BpOptions& opt = {}) const;

private:
    const Dictionary& A_;
    std::size_t n1_;
    std::vector<cd> U_;          // eigenvectors of A A^H, column-major n1 x n1
    std::vector<double> s2_;     // eigenvalues
};

BpResult bp_recover(const CVec& y, const Dictionary& A, const BpOptions& opt = {});

// Throws ConvergenceError carrying the residual norms.
void require_converged(const BpResult& r);

// Default epsilon for noisy basis pursuit: sigma sqrt(n) (1 + 2/sqrt(n)).
double default_bp_epsilon(double sigma_r, std::size_t rows);

// Per-length l2 error used as the exact-recovery criterion.
double mean_l2_error(const SparseScene& est, const CVec& truth);

}  // namespace frac
