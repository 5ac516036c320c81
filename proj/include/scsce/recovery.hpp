// SPDX-License-Identifier: Apache-2.0
//
// scsce: structured compressive-sensing channel estimation for FDD massive MIMO
// Copyright (C) 2026 The scsce authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Greedy block-sparse recovery: adaptive structured subspace pursuit (ASSP)
// and its baselines (oracle ASSP at known sparsity, oracle LS at known
// support, and unstructured adaptive subspace pursuit).

#ifndef SCSCE_RECOVERY_HPP
#define SCSCE_RECOVERY_HPP

#include "pilots.hpp"
#include "types.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>

namespace scsce {

enum class Termination {
    residual_increase, // residual of the new level exceeds the previous level's
    noise_floor,       // weakest selected block at or below sqrt(M_G R) p_th
    s_max_reached,
    k_max_reached,
    singular_system,   // rank-deficient support selection
    converged,         // fixed-level run: residual stopped decreasing
};

inline std::string to_string(Termination t)
{
    switch (t) {
    case Termination::residual_increase: return "residual-increase";
    case Termination::noise_floor: return "noise-floor";
    case Termination::s_max_reached: return "s_max-reached";
    case Termination::k_max_reached: return "k_max-reached";
    case Termination::singular_system: return "singular-system";
    case Termination::converged: return "converged";
    }
    return "unknown";
}

struct StopConfig {
    double p_th = 0.04;
    int s_max = 0;   // 0: min(L, floor(Np / (2 group_M)))
    int k_max = 50;
    int group_M = 0; // 0: taken from the sensing matrix
    int R = 0;       // 0: taken from the measurement

    void validate(int L) const
    {
        if (!(p_th >= 0.0))
            throw InvalidArgument("p_th must be >= 0");
        if (s_max < 0 || s_max > L)
            throw InvalidArgument("s_max must lie in [0, L]");
        if (k_max < 1)
            throw InvalidArgument("k_max must be >= 1");
    }
};

struct TraceEntry {
    int level;
    int iteration;
    double residual;
};

struct RecoveryResult {
    CMatrix d_hat;
    Support support;
    int s_hat = 0;
    std::vector<TraceEntry> residual_trace; // accepted iterates only
    Termination termination = Termination::converged;
    int iterations = 0;
    std::vector<int> column_sparsity; // per measurement column (unstructured runs)
};

namespace detail {

inline bool well_conditioned_r(const CMatrix &qr_matrix, Index n)
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double v = std::abs(qr_matrix(i, i));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return n == 0 || lo > hi * 1e-10 * static_cast<double>(std::max<Index>(n, 1));
}

/// Columns of A belonging to the given 1-based blocks of width b.
inline CMatrix gather(const CMatrix &A, int b, const Support &blocks)
{
    CMatrix out(A.rows(), static_cast<Index>(blocks.size()) * b);
    for (std::size_t i = 0; i < blocks.size(); ++i)
        out.middleCols(static_cast<Index>(i) * b, b) = A.middleCols(static_cast<Index>(blocks[i] - 1) * b, b);
    return out;
}

inline CMatrix scatter(const CMatrix &compact, int b, const Support &blocks, Index total_rows)
{
    CMatrix out = CMatrix::Zero(total_rows, compact.cols());
    for (std::size_t i = 0; i < blocks.size(); ++i)
        out.middleRows(static_cast<Index>(blocks[i] - 1) * b, b) = compact.middleRows(static_cast<Index>(i) * b, b);
    return out;
}

/// Overdetermined full-column-rank LS via Householder QR; throws on rank deficiency.
inline CMatrix full_rank_ls(const CMatrix &A, const CMatrix &Y, const Support &blocks)
{
    if (A.cols() == 0)
        return CMatrix::Zero(0, Y.cols());
    if (A.cols() > A.rows())
        throw SingularSystem("underdetermined support selection (" + std::to_string(A.cols()) + " columns, " +
                                 std::to_string(A.rows()) + " rows)",
                             blocks);
    Eigen::HouseholderQR<CMatrix> qr(A);
    if (!well_conditioned_r(qr.matrixQR(), A.cols()))
        throw SingularSystem("rank-deficient support selection", blocks);
    return qr.solve(Y);
}

/// Moore-Penrose solution A^+ Y: QR of A when tall, QR of A^H when wide,
/// complete orthogonal decomposition when rank deficient.
inline CMatrix min_norm_ls(const CMatrix &A, const CMatrix &Y)
{
    const Index m = A.rows();
    const Index n = A.cols();
    if (n == 0)
        return CMatrix::Zero(0, Y.cols());
    if (n <= m) {
        Eigen::HouseholderQR<CMatrix> qr(A);
        if (well_conditioned_r(qr.matrixQR(), n))
            return qr.solve(Y);
    } else {
        // A^H = Q R  =>  A^+ = Q R^{-H}
        Eigen::HouseholderQR<CMatrix> qr(A.adjoint());
        if (well_conditioned_r(qr.matrixQR(), m)) {
            const CMatrix z = qr.matrixQR()
                                  .topLeftCorner(m, m)
                                  .triangularView<Eigen::Upper>()
                                  .adjoint()
                                  .solve(Y);
            CMatrix padded = CMatrix::Zero(n, Y.cols());
            padded.topRows(m) = z;
            return qr.householderQ() * padded;
        }
    }
    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(A);
    return cod.solve(Y);
}

/// F-norm of each width-b row block of X.
inline Eigen::VectorXd block_norms(const CMatrix &X, int b)
{
    const Index nb = X.rows() / b;
    Eigen::VectorXd out(nb);
    for (Index l = 0; l < nb; ++l)
        out(l) = X.middleRows(l * b, b).norm();
    return out;
}

/// Indices (1-based, sorted) of the s largest entries; ties go to the lower index.
inline Support largest(const Eigen::VectorXd &values, const Support &labels, int s)
{
    std::vector<Index> order(static_cast<std::size_t>(values.size()));
    std::iota(order.begin(), order.end(), Index{0});
    const auto cut = std::min<std::size_t>(static_cast<std::size_t>(s), order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<long>(cut), order.end(), [&](Index a, Index b) {
        if (values(a) != values(b))
            return values(a) > values(b);
        return labels[static_cast<std::size_t>(a)] < labels[static_cast<std::size_t>(b)];
    });
    Support out;
    for (std::size_t i = 0; i < cut; ++i)
        out.push_back(labels[static_cast<std::size_t>(order[i])]);
    std::sort(out.begin(), out.end());
    return out;
}

inline Support iota_support(Index n)
{
    Support s(static_cast<std::size_t>(n));
    std::iota(s.begin(), s.end(), 1);
    return s;
}

inline Support merge(const Support &a, const Support &b)
{
    Support out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

struct PursuitOptions {
    int block = 1;          // rows per block
    double threshold = 0.0; // absolute noise floor on block F-norms
    int s_start = 1;
    int s_max = 1;
    int k_max = 50;
    bool fixed_level = false; // oracle mode: single level, stop when residual stops decreasing
};

/// Adaptive block subspace pursuit on Y = A X + W with A split into
/// consecutive column blocks of width opt.block.
inline RecoveryResult pursue(const CMatrix &A, const CMatrix &Y, const PursuitOptions &opt)
{
    const int b = opt.block;
    const Index n_blocks = A.cols() / b;
    const Support all_blocks = iota_support(n_blocks);
    const double inf = std::numeric_limits<double>::infinity();

    RecoveryResult res;

    // level snapshot (D_{s-1}, R_{s-1}, Omega_{s-1}); level 0 is the empty estimate
    CMatrix snap_d = CMatrix::Zero(A.cols(), Y.cols());
    Support snap_support;
    double snap_residual = inf;

    // previous iterate (D^{k-1}, R^{k-1}, Omega^{k-1})
    Support omega_prev;
    CMatrix d_prev = snap_d;
    CMatrix r_prev = Y;
    double r_prev_norm = Y.norm();
    bool has_iterate = false;

    int s = opt.s_start;
    int k = 1;
    int k_level = 0;

    auto finish = [&](Termination why, CMatrix d, Support support) {
        res.d_hat = std::move(d);
        res.support = std::move(support);
        res.s_hat = static_cast<int>(res.support.size());
        res.termination = why;
        res.iterations = k - 1;
        return res;
    };

    while (true) {
        // correlation and support estimate
        const CMatrix Z = A.adjoint() * r_prev;
        const Support candidate = merge(omega_prev, largest(block_norms(Z, b), all_blocks, s));

        // support pruning
        const CMatrix d_cand = min_norm_ls(gather(A, b, candidate), Y);
        const Support omega = largest(block_norms(d_cand, b), candidate, s);

        // matrix estimate and residue update
        CMatrix d_omega;
        CMatrix A_omega = gather(A, b, omega);
        try {
            d_omega = full_rank_ls(A_omega, Y, omega);
        } catch (const SingularSystem &) {
            if (opt.fixed_level && has_iterate)
                return finish(Termination::singular_system, d_prev, omega_prev);
            return finish(Termination::singular_system, snap_d, snap_support);
        }
        CMatrix r_new = Y - A_omega * d_omega;
        const double r_new_norm = r_new.norm();

        if (!opt.fixed_level) {
            if (r_new_norm > snap_residual)
                return finish(Termination::residual_increase, snap_d, snap_support);
            if (block_norms(d_omega, b).minCoeff() <= opt.threshold)
                return finish(Termination::noise_floor, snap_d, snap_support);
        }

        if (r_prev_norm > r_new_norm) {
            // iteration with fixed sparsity level
            omega_prev = omega;
            d_prev = scatter(d_omega, b, omega, A.cols());
            r_prev = std::move(r_new);
            r_prev_norm = r_new_norm;
            has_iterate = true;
            res.residual_trace.push_back({s, k, r_new_norm});
            ++k;
            if (++k_level >= opt.k_max)
                return finish(Termination::k_max_reached, d_prev, omega_prev);
            continue;
        }

        if (!has_iterate) {
            // the very first iterate failed to reduce ||Y||: no D^{k-1} exists
            return finish(opt.fixed_level ? Termination::converged : Termination::residual_increase,
                          scatter(d_omega, b, omega, A.cols()), omega);
        }
        if (opt.fixed_level)
            return finish(Termination::converged, d_prev, omega_prev);

        // update sparsity level
        snap_d = d_prev;
        snap_support = omega_prev;
        snap_residual = r_prev_norm;
        ++s;
        k_level = 0;
        if (s > opt.s_max)
            return finish(Termination::s_max_reached, snap_d, snap_support);
    }
}

/// floor(Np / (2 block)) capped at the block count: keeps the merged
/// candidate support of Step 2 overdetermined.
inline int default_s_max(int Np, int block, Index n_blocks)
{
    return static_cast<int>(std::min<Index>(n_blocks, std::max(1, Np / (2 * block))));
}

inline void check_dimensions(const CMatrix &Y, const SensingMatrix &S)
{
    if (Y.rows() != S.Np())
        throw InvalidArgument("measurement has " + std::to_string(Y.rows()) + " rows but the sensing matrix has Np=" +
                              std::to_string(S.Np()));
    if (Y.cols() < 1)
        throw InvalidArgument("measurement has no columns");
}

} // namespace detail

/// Least-squares estimate on the blocks of Omega (zeros elsewhere), solved by
/// Householder QR of Psi_Omega. Throws SingularSystem when Psi_Omega is
/// rank deficient or has more columns than rows.
inline CMatrix structured_ls(const CMatrix &Y, const SensingMatrix &S, const Support &omega)
{
    detail::check_dimensions(Y, S);
    for (int l : omega)
        if (l < 1 || l > S.L())
            throw InvalidArgument("support index " + std::to_string(l) + " outside [1, L]");
    Support sorted = omega;
    std::sort(sorted.begin(), sorted.end());
    const CMatrix compact = detail::full_rank_ls(S.columns(sorted), Y, sorted);
    return detail::scatter(compact, S.M(), sorted, S.psi().cols());
}

/// Adaptive structured subspace pursuit: estimates the common support, the
/// sparsity level and the channel matrix without knowing P.
inline RecoveryResult assp(const CMatrix &Y, const SensingMatrix &S, const StopConfig &stop)
{
    detail::check_dimensions(Y, S);
    stop.validate(S.L());
    if (stop.group_M != 0 && stop.group_M != S.M())
        throw InvalidArgument("stop.group_M does not match the sensing matrix antenna dimension");
    if (stop.R != 0 && stop.R != Y.cols())
        throw InvalidArgument("stop.R does not match the measurement column count");
    detail::PursuitOptions opt;
    opt.block = S.M();
    opt.threshold = std::sqrt(static_cast<double>(S.M()) * static_cast<double>(Y.cols())) * stop.p_th;
    opt.s_start = 1;
    opt.s_max = stop.s_max > 0 ? stop.s_max : detail::default_s_max(S.Np(), S.M(), S.L());
    opt.k_max = stop.k_max;
    return detail::pursue(S.psi(), Y, opt);
}

/// ASSP inner loop at the known sparsity level P.
inline RecoveryResult oracle_assp(const CMatrix &Y, const SensingMatrix &S, int P, int k_max = 50)
{
    detail::check_dimensions(Y, S);
    if (P < 1 || P > S.L())
        throw InvalidArgument("oracle sparsity P outside [1, L]");
    detail::PursuitOptions opt;
    opt.block = S.M();
    opt.s_start = P;
    opt.s_max = P;
    opt.k_max = k_max;
    opt.fixed_level = true;
    return detail::pursue(S.psi(), Y, opt);
}

inline CMatrix oracle_ls(const CMatrix &Y, const SensingMatrix &S, const Support &true_support)
{
    return structured_ls(Y, S, true_support);
}

/// Adaptive subspace pursuit without the spatial structure: every column of
/// Psi is its own block and each measurement column is recovered on its own.
/// `stop.s_max` counts individual coefficients here.
inline RecoveryResult asp(const CMatrix &Y, const SensingMatrix &S, const StopConfig &stop)
{
    detail::check_dimensions(Y, S);
    if (!(stop.p_th >= 0.0) || stop.k_max < 1 || stop.s_max < 0)
        throw InvalidArgument("invalid stop configuration");
    detail::PursuitOptions opt;
    opt.block = 1;
    opt.threshold = stop.p_th;
    opt.s_max = stop.s_max > 0 ? stop.s_max : detail::default_s_max(S.Np(), 1, S.psi().cols());
    opt.k_max = stop.k_max;

    RecoveryResult out;
    out.d_hat = CMatrix::Zero(S.psi().cols(), Y.cols());
    std::vector<bool> tap_used(static_cast<std::size_t>(S.L()), false);
    for (Index r = 0; r < Y.cols(); ++r) {
        auto col = detail::pursue(S.psi(), Y.col(r), opt);
        out.d_hat.col(r) = col.d_hat;
        for (int c : col.support)
            tap_used[static_cast<std::size_t>((c - 1) / S.M())] = true;
        for (auto e : col.residual_trace)
            out.residual_trace.push_back(e);
        out.column_sparsity.push_back(col.s_hat);
        out.iterations += col.iterations;
        if (r == 0)
            out.termination = col.termination;
    }
    for (int l = 0; l < S.L(); ++l)
        if (tap_used[static_cast<std::size_t>(l)])
            out.support.push_back(l + 1);
    out.s_hat = static_cast<int>(out.support.size());
    return out;
}

/// ||D - D_hat||_F^2 / ||D||_F^2.
inline double nmse(const CMatrix &d, const CMatrix &d_hat)
{
    return (d - d_hat).squaredNorm() / d.squaredNorm();
}

/// residual_trace as CSV rows: level,iteration,residual.
inline void write_trace_csv(std::ostream &os, const RecoveryResult &r)
{
    os << "level,iteration,residual\n";
    for (const auto &e : r.residual_trace)
        os << e.level << ',' << e.iteration << ',' << e.residual << '\n';
}

// ----- Convergence diagnostics ----------------------------------------------

struct SripEstimates {
    double delta_P = 0.0;
    double delta_2P = 0.0;
    double delta_3P = 0.0;
};

/// Error constant c_P of the s = P convergence bound ||D - D_hat|| <= c_P ||W||,
/// or nullopt when the SRIP constants are outside the region where the bound
/// is meaningful.
inline std::optional<double> error_constant(const SripEstimates &d)
{
    const double a = d.delta_P, b = d.delta_2P, c = d.delta_3P;
    if (!(a >= 0.0 && a < 1.0 && b >= 0.0 && b < 1.0 && c > 0.0 && c < 1.0))
        return std::nullopt;
    const double c1 = (1 - a) * (1 - a) * (1 - b) / (2 * c * (1 - a + b) * (1 - b + c));
    const double c2 = (1 - a) / (c * (1 - a + b)) * (a * (1 - a) * std::sqrt(1 - b) / (1 - b + 2 * c) + std::sqrt(1 + a));
    const double denom = c1 * (1 - a - b) - std::sqrt(1 - a * a);
    if (!(denom > 0.0))
        return std::nullopt;
    const double c3 = (2 * c1 * std::sqrt(1 - a) + c2 * std::sqrt(1 - a * a)) / denom;
    return (c3 * (1 - a + b) + std::sqrt(1 + a)) / (1 - a);
}

/// ||(I - Psi_1 Psi_1^+) Psi_2 D_2||_F, Psi_i = Psi restricted to the blocks of omega_i.
inline double projected_norm(const SensingMatrix &S, const Support &omega1, const Support &omega2, const CMatrix &d2)
{
    const CMatrix x = S.columns(omega2) * d2;
    if (omega1.empty())
        return x.norm();
    const CMatrix a = S.columns(omega1);
    return (x - a * detail::min_norm_ls(a, x)).norm();
}

/// ||Psi_1^H Psi_2 D_2||_F for the column-normalized Psi / sqrt(Np).
inline double cross_block_norm(const SensingMatrix &S, const Support &omega1, const Support &omega2, const CMatrix &d2)
{
    return (S.columns(omega1).adjoint() * (S.columns(omega2) * d2)).norm() / static_cast<double>(S.Np());
}

struct Theorem1Report {
    double error_norm = 0.0;
    double noise_norm = 0.0;
    double ratio = 0.0; // error / noise (0 when both vanish, inf when only noise does)
    std::optional<double> c_P;
    std::optional<bool> bound_holds;
    bool residual_monotone = true;
};

/// Checks a fixed-sparsity run against the convergence statement: the error
/// ratio (and c_P bound when available) and strictly decreasing residuals
/// within each level.
inline Theorem1Report verify_theorem1(const RecoveryResult &run, const CMatrix &d_true, double noise_norm,
                                      const SripEstimates &delta)
{
    Theorem1Report rep;
    rep.error_norm = (d_true - run.d_hat).norm();
    rep.noise_norm = noise_norm;
    if (noise_norm > 0.0)
        rep.ratio = rep.error_norm / noise_norm;
    else
        rep.ratio = rep.error_norm > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    rep.c_P = error_constant(delta);
    if (rep.c_P)
        rep.bound_holds = rep.error_norm <= *rep.c_P * noise_norm * (1 + 1e-12) + 1e-12;
    const auto &t = run.residual_trace;
    for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i].level == t[i - 1].level && !(t[i].residual < t[i - 1].residual))
            rep.residual_monotone = false;
    return rep;
}

} // namespace scsce

#endif // SCSCE_RECOVERY_HPP
