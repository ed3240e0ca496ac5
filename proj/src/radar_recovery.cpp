#include "frac/radar_recovery.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "frac/kernels.hpp"

namespace frac {

Dictionary::Dictionary(const SelectionSequence& sel, const SystemConfig& cfg, bool exact_xi,
                       std::size_t max_entries)
    : N_(cfg.N), M_(cfg.M), K_(cfg.K), Q_r_(cfg.Q_r), Q_(cfg.Q()), exact_xi_(exact_xi) {
    if (static_cast<int>(sel.size()) != cfg.N) throw ValidationError("selection sequence length must equal N");
    for (const auto& s : sel) validate_selection(s, cfg.M, cfg.P, cfg.K, cfg.J);
    rows_ = static_cast<std::size_t>(N_) * K_ * Q_r_;
    cols_ = static_cast<std::size_t>(N_) * M_ * Q_;
    if (cols_ > max_entries / rows_) throw ValidationError("dictionary exceeds the configured size cap");
    a_.resize(rows_ * cols_);
    center_turns_.resize(rows_);

    CVec R(M_), V(N_), T(Q_);
    std::size_t i = 0;
    for (int n = 0; n < N_; ++n)
        for (int k = 0; k < K_; ++k)
            for (int q = 0; q < Q_r_; ++q, ++i) {
                const int m = sel[n].carriers[k];
                const int p = sel[n].antennas[k];
                const double xi = exact_xi ? cfg.xi(m) : 1.0;
                const double pos = cfg.Q_r * p + q;
                for (int mm = 0; mm < M_; ++mm) R[mm] = cis_turns(-static_cast<double>(m) * mm / M_);
                for (int nn = 0; nn < N_; ++nn) V[nn] = cis_turns(-xi * nn * n / N_);
                for (int qq = 0; qq < Q_; ++qq) T[qq] = cis_turns(-xi * qq * pos / Q_);
                cd* out = a_.data() + i * cols_;
                for (int nn = 0; nn < N_; ++nn)
                    for (int mm = 0; mm < M_; ++mm) {
                        const cd vr = V[nn] * R[mm];
                        for (int qq = 0; qq < Q_; ++qq) *out++ = vr * T[qq];
                    }
                center_turns_[i] = -0.5 * (m + xi * (n + pos));
            }
}

CVec Dictionary::column(std::size_t j) const {
    CVec c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = a_[i * cols_ + j];
    return c;
}

void Dictionary::apply(const cd* b, cd* y) const { simd::gemv(a_.data(), rows_, cols_, b, y); }

void Dictionary::apply_h(const cd* y, cd* out) const { simd::gemv_h(a_.data(), rows_, cols_, y, out); }

CVec Dictionary::center(const CVec& y) const {
    if (y.size() != rows_) throw ValidationError("slice length does not match dictionary rows");
    CVec out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = y[i] * cis_turns(center_turns_[i]);
    return out;
}

CVec SparseScene::dense() const {
    CVec b(length, cd{});
    for (std::size_t i = 0; i < support.size(); ++i) b[support[i]] = values[i];
    return b;
}

SparseScene SparseScene::from_dense(const CVec& b, double threshold) {
    SparseScene s;
    s.length = b.size();
    for (std::size_t i = 0; i < b.size(); ++i)
        if (std::abs(b[i]) > threshold) {
            s.support.push_back(i);
            s.values.push_back(b[i]);
        }
    return s;
}

RecoveredTarget grid_to_physical(std::size_t flat, int cell, const SystemConfig& cfg, cd beta) {
    const int Q = cfg.Q();
    if (flat >= static_cast<std::size_t>(cfg.N) * cfg.M * Q) throw ValidationError("grid index out of range");
    const int q = static_cast<int>(flat % Q);
    const int m = static_cast<int>((flat / Q) % cfg.M);
    const int n = static_cast<int>(flat / (static_cast<std::size_t>(Q) * cfg.M));
    RecoveredTarget t;
    t.flat = flat;
    t.cell = cell;
    t.beta = beta;
    t.r = cfg.cell_width() * (static_cast<double>(m) / cfg.M - 0.5) + cell * cfg.cell_width();
    t.v = cfg.c / (2.0 * cfg.T_0 * cfg.f_c) * (static_cast<double>(n) / cfg.N - 0.5);
    const double s = cfg.c / (cfg.f_c * cfg.d_R) * (static_cast<double>(q) / Q - 0.5);
    t.theta = std::abs(s) <= 1.0 ? std::asin(s) : std::nan("");
    return t;
}

GridCoord physical_to_grid(const Target& t, const SystemConfig& cfg) {
    const TargetFreqs f = target_freqs(t, cfg);
    const int Q = cfg.Q();
    GridCoord g;
    g.cell = f.cell;
    const double mr = cfg.M * (f.f_r + 0.5);
    g.m_idx = static_cast<int>(std::lround(mr));
    g.off_r = (mr - g.m_idx) / cfg.M;
    if (g.m_idx >= cfg.M) {
        g.m_idx -= cfg.M;
        ++g.cell;
    } else if (g.m_idx < 0) {
        g.m_idx += cfg.M;
        --g.cell;
    }
    auto wrap = [](double x, int L, double& off) {
        const long i = std::lround(x);
        off = (x - static_cast<double>(i)) / L;
        return static_cast<int>(((i % L) + L) % L);
    };
    g.n_idx = wrap(cfg.N * (f.f_v + 0.5), cfg.N, g.off_v);
    g.q_idx = wrap(Q * (f.f_theta + 0.5), Q, g.off_theta);
    g.flat = (static_cast<std::size_t>(g.n_idx) * cfg.M + g.m_idx) * Q + g.q_idx;
    return g;
}

Target grid_target(const GridCoord& g, const SystemConfig& cfg, cd alpha) {
    const RecoveredTarget p = grid_to_physical(g.flat, g.cell, cfg);
    if (std::isnan(p.theta)) throw ValidationError("grid angle bin is outside the visible region");
    return Target{p.r, p.v, p.theta, alpha};
}

OmpResult omp_recover(const CVec& y, const Dictionary& A, const OmpOptions& opt) {
    if (y.size() != A.rows()) throw ValidationError("measurement length does not match dictionary rows");
    const std::size_t n1 = A.rows(), n2 = A.cols();
    const int cap = static_cast<int>(std::min(n1, n2));
    const int limit = opt.max_terms ? std::min(*opt.max_terms, cap) : cap;
    if (limit < 0) throw ValidationError("max_terms must be non-negative");
    const auto& k = simd::active();

    OmpResult res;
    CVec r = y, corr(n2);
    std::vector<std::size_t> S;
    std::vector<char> used(n2, 0);
    Eigen::VectorXcd ye = Eigen::Map<const Eigen::VectorXcd>(y.data(), static_cast<long>(n1));
    Eigen::VectorXcd x;
    Eigen::MatrixXcd As(static_cast<long>(n1), 0);
    res.residual_norm = std::sqrt(k.norm_sq(r.data(), n1));

    while (static_cast<int>(S.size()) < limit) {
        if (!opt.max_terms && res.residual_norm <= opt.residual_tol) break;
        A.apply_h(r.data(), corr.data());
        std::size_t best = n2;
        double best_v = -1.0;
        for (std::size_t j = 0; j < n2; ++j) {
            if (used[j]) continue;
            const double v = std::norm(corr[j]);
            if (v > best_v) {
                best_v = v;
                best = j;
            }
        }
        if (best == n2) break;
        used[best] = 1;
        S.push_back(best);
        As.conservativeResize(Eigen::NoChange, static_cast<long>(S.size()));
        const CVec col = A.column(best);
        As.col(static_cast<long>(S.size()) - 1) = Eigen::Map<const Eigen::VectorXcd>(col.data(), static_cast<long>(n1));
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(As);
        if (cod.rank() < static_cast<long>(S.size())) res.rank_deficient = true;
        x = cod.solve(ye);
        const Eigen::VectorXcd re = ye - As * x;
        for (std::size_t i = 0; i < n1; ++i) r[i] = re[static_cast<long>(i)];
        res.residual_norm = re.norm();
        ++res.iterations;
    }

    std::vector<std::size_t> order(S.size());
    for (std::size_t i = 0; i < S.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return S[a] < S[b]; });
    res.b.length = n2;
    for (std::size_t i : order) {
        res.b.support.push_back(S[i]);
        res.b.values.push_back(x[static_cast<long>(i)]);
    }
    return res;
}

BasisPursuit::BasisPursuit(const Dictionary& A) : A_(A), n1_(A.rows()) {
    const auto& k = simd::active();
    const long n = static_cast<long>(n1_);
    Eigen::MatrixXcd gram(n, n);
    for (std::size_t i = 0; i < n1_; ++i)
        for (std::size_t j = i; j < n1_; ++j) {
            const cd v = k.dotc(A.row(j), A.row(i), A.cols());  // sum_k A_ik conj(A_jk)
            gram(static_cast<long>(i), static_cast<long>(j)) = v;
            gram(static_cast<long>(j), static_cast<long>(i)) = std::conj(v);
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
    if (es.info() != Eigen::Success) throw ConvergenceError("eigendecomposition of A A^H failed");
    U_.assign(es.eigenvectors().data(), es.eigenvectors().data() + n * n);
    s2_.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
}

BpResult BasisPursuit::solve(const CVec& y, const BpOptions& opt) const {
    if (y.size() != n1_) throw ValidationError("measurement length does not match dictionary rows");
    if (!(opt.epsilon >= 0.0)) throw ValidationError("epsilon must be non-negative");
    const auto& k = simd::active();
    const std::size_t n1 = n1_, n2 = A_.cols();
    const double smax = *std::max_element(s2_.begin(), s2_.end());
    const double floor_s2 = smax * 1e-12;

    auto Uh = [&](const CVec& v, CVec& out) {  // out = U^H v
        for (std::size_t j = 0; j < n1; ++j) out[j] = k.dotc(U_.data() + j * n1, v.data(), n1);
    };
    auto Ux = [&](const CVec& v, CVec& out) {  // out = U v
        std::fill(out.begin(), out.end(), cd{});
        for (std::size_t j = 0; j < n1; ++j) k.axpy(v[j], U_.data() + j * n1, out.data(), n1);
    };

    CVec yt(n1);
    Uh(y, yt);

    CVec x(n2), z(n2, cd{}), u(n2, cd{}), zold(n2), v(n2), w(n2);
    CVec Av(n1), t(n1), dt(n1), tmp(n1);

    // projection onto {x : ||A x - y|| <= eps}
    auto project = [&](const CVec& in, CVec& out) {
        A_.apply(in.data(), Av.data());
        Uh(Av, t);
        double dn2 = 0.0;
        for (std::size_t i = 0; i < n1; ++i)
            if (s2_[i] > floor_s2) dn2 += std::norm(t[i] - yt[i]);
        const bool inside = opt.epsilon > 0.0 && dn2 <= opt.epsilon * opt.epsilon;
        double lam = 0.0;
        if (opt.epsilon > 0.0 && !inside) {
            auto fit = [&](double l) {
                double s = 0.0;
                for (std::size_t i = 0; i < n1; ++i)
                    if (s2_[i] > floor_s2) s += std::norm(t[i] - yt[i]) / ((1.0 + l * s2_[i]) * (1.0 + l * s2_[i]));
                return std::sqrt(s);
            };
            double lo = 0.0, hi = 1.0 / smax;
            while (fit(hi) > opt.epsilon) hi *= 2.0;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                (fit(mid) > opt.epsilon ? lo : hi) = mid;
            }
            lam = hi;
        }
        for (std::size_t i = 0; i < n1; ++i) {
            if (s2_[i] <= floor_s2) {
                dt[i] = 0.0;
                continue;
            }
            cd target;
            if (inside) target = t[i];
            else if (opt.epsilon == 0.0) target = yt[i];
            else target = yt[i] + (t[i] - yt[i]) / (1.0 + lam * s2_[i]);
            dt[i] = (target - t[i]) / s2_[i];
        }
        Ux(dt, tmp);
        A_.apply_h(tmp.data(), out.data());
        k.axpy(1.0, in.data(), out.data(), n2);
    };

    // initial point: minimum-norm solution, threshold scale from it
    double rho = opt.rho;
    if (rho <= 0.0) {
        std::fill(v.begin(), v.end(), cd{});
        project(v, x);
        double mx = 0.0;
        for (const cd& c : x) mx = std::max(mx, std::abs(c));
        rho = mx > 0.0 ? 10.0 / mx : 1.0;
    }
    const double rho_lo = rho * 1e-3, rho_hi = rho * 1e3;

    const double ynorm = std::sqrt(k.norm_sq(y.data(), n1));

    // Least squares on the support of zc, at most n1 - 1 entries, largest first.
    auto support_ls = [&](const CVec& zc, double rel, std::vector<std::size_t>& supp, Eigen::MatrixXcd& As,
                          Eigen::VectorXcd& bs) {
        double zmax = 0.0;
        for (const cd& c : zc) zmax = std::max(zmax, std::abs(c));
        supp.clear();
        if (zmax == 0.0) return false;
        for (std::size_t i = 0; i < n2; ++i)
            if (std::abs(zc[i]) > rel * zmax) supp.push_back(i);
        if (supp.size() >= n1) return false;
        As.resize(static_cast<long>(n1), static_cast<long>(supp.size()));
        for (std::size_t r = 0; r < n1; ++r)
            for (std::size_t j = 0; j < supp.size(); ++j) As(r, j) = A_(r, supp[j]);
        const auto qr = As.colPivHouseholderQr();
        if (qr.rank() < static_cast<long>(supp.size())) return false;
        bs = qr.solve(Eigen::Map<const Eigen::VectorXcd>(y.data(), static_cast<long>(n1)));
        return true;
    };
    auto store = [&](const std::vector<std::size_t>& supp, const Eigen::VectorXcd& bs, double fit, BpResult& r) {
        CVec d(n2, cd{});
        for (std::size_t j = 0; j < supp.size(); ++j) d[supp[j]] = bs[static_cast<long>(j)];
        r.b = SparseScene::from_dense(d);
        r.fit_residual = fit;
        r.polished = true;
    };
    // Exact KKT check for min ||b||_1 s.t. A b = y: feasible b on S and a dual vector with
    // A_S^H lambda = sign(b_S), |a_i^H lambda| <= 1 elsewhere.
    auto certify = [&](const CVec& zc, BpResult& r) {
        std::vector<std::size_t> supp;
        Eigen::MatrixXcd As;
        Eigen::VectorXcd bs;
        for (double rel : {1e-3, 1e-1}) {
            if (!support_ls(zc, rel, supp, As, bs)) continue;
            const Eigen::VectorXcd yv = Eigen::Map<const Eigen::VectorXcd>(y.data(), static_cast<long>(n1));
            const double fit = (As * bs - yv).norm();
            if (fit > 1e-9 * std::max(1.0, ynorm)) continue;
            Eigen::VectorXcd sg(bs.size());
            bool tiny = false;
            for (long j = 0; j < bs.size(); ++j) {
                const double a = std::abs(bs[j]);
                tiny = tiny || a < 1e-12;
                sg[j] = a > 0.0 ? bs[j] / a : cd{};
            }
            if (tiny) continue;
            const Eigen::VectorXcd w = (As.adjoint() * As).ldlt().solve(sg);
            const Eigen::VectorXcd lam = As * w;
            CVec g(n2);
            A_.apply_h(lam.data(), g.data());
            double off = 0.0;
            for (std::size_t i = 0; i < n2; ++i) off = std::max(off, std::abs(g[i]));
            if (off <= 1.0 + 1e-9) {
                store(supp, bs, fit, r);
                return true;
            }
        }
        return false;
    };
    // With a noise ball only an l1 improvement over the feasible iterate is accepted.
    auto polish_l1 = [&](const CVec& zc, const CVec& xf, BpResult& r) {
        std::vector<std::size_t> supp;
        Eigen::MatrixXcd As;
        Eigen::VectorXcd bs;
        if (!support_ls(zc, 1e-3, supp, As, bs)) return;
        const Eigen::VectorXcd yv = Eigen::Map<const Eigen::VectorXcd>(y.data(), static_cast<long>(n1));
        const double fit = (As * bs - yv).norm();
        double l1x = 0.0;
        for (const cd& c : xf) l1x += std::abs(c);
        if (fit <= opt.epsilon && bs.cwiseAbs().sum() <= l1x) store(supp, bs, fit, r);
    };

    BpResult res;
    const double sqn = std::sqrt(static_cast<double>(n2));
    for (int it = 1; it <= opt.max_iter; ++it) {
        for (std::size_t i = 0; i < n2; ++i) v[i] = z[i] - u[i];
        project(v, x);
        zold.swap(z);
        for (std::size_t i = 0; i < n2; ++i) w[i] = x[i] + u[i];
        k.soft_threshold(w.data(), 1.0 / rho, z.data(), n2);
        double rp = 0.0, rd = 0.0, nx = 0.0, nz = 0.0, nu = 0.0;
        for (std::size_t i = 0; i < n2; ++i) {
            const cd d = x[i] - z[i];
            u[i] += d;
            rp += std::norm(d);
            rd += std::norm(z[i] - zold[i]);
            nx += std::norm(x[i]);
            nz += std::norm(z[i]);
            nu += std::norm(u[i]);
        }
        rp = std::sqrt(rp);
        rd = rho * std::sqrt(rd);
        res.primal_residual = rp;
        res.dual_residual = rd;
        res.iterations = it;
        const double eps_pri = sqn * opt.abs_tol + opt.rel_tol * std::sqrt(std::max(nx, nz));
        const double eps_dual = sqn * opt.abs_tol + opt.rel_tol * rho * std::sqrt(nu);
        if (rp <= eps_pri && rd <= eps_dual) {
            res.converged = true;
            break;
        }
        if (opt.epsilon == 0.0 && it % 50 == 0 && certify(z, res)) {
            res.converged = true;
            return res;
        }
        // residual balancing
        if (it % 10 == 0) {
            if (rp > 10.0 * rd && rho < rho_hi) {
                rho *= 2.0;
                for (auto& c : u) c *= 0.5;
            } else if (rd > 10.0 * rp && rho > rho_lo) {
                rho *= 0.5;
                for (auto& c : u) c *= 2.0;
            }
        }
    }
    res.b = SparseScene::from_dense(z);
    A_.apply(z.data(), Av.data());
    double fr = 0.0;
    for (std::size_t i = 0; i < n1; ++i) fr += std::norm(y[i] - Av[i]);
    res.fit_residual = std::sqrt(fr);

    if (opt.epsilon == 0.0) {
        if (certify(z, res)) res.converged = true;
    } else {
        polish_l1(z, x, res);
    }
    return res;
}

BpResult bp_recover(const CVec& y, const Dictionary& A, const BpOptions& opt) {
    return BasisPursuit(A).solve(y, opt);
}

void require_converged(const BpResult& r) {
    if (!r.converged)
        throw ConvergenceError("basis pursuit did not converge after " + std::to_string(r.iterations) +
                               " iterations (primal " + std::to_string(r.primal_residual) + ", dual " +
                               std::to_string(r.dual_residual) + ")");
}

double default_bp_epsilon(double sigma_r, std::size_t rows) {
    const double s = std::sqrt(static_cast<double>(rows));
    return sigma_r * s * (1.0 + 2.0 / s);
}

double mean_l2_error(const SparseScene& est, const CVec& truth) {
    if (est.length != truth.size()) throw ValidationError("length mismatch");
    CVec d = est.dense();
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) s += std::norm(d[i] - truth[i]);
    return std::sqrt(s) / static_cast<double>(truth.size());
}

}  // namespace frac
