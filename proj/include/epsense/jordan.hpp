// Copyright 2026 The epsense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "epsense/errors.hpp"
#include "epsense/linalg.hpp"

namespace epsense {

inline constexpr double kDefaultRankTolerance = 1e-9;
inline constexpr double kPiConditionLimit = 1e12;
inline constexpr double kDecompositionResidualLimit = 1e-8;
inline constexpr double kTransformConditionWarning = 1e8;

/// Zero-eigenvalue Jordan structure of M Pi^{-1}.
struct JordanProfile {
    std::vector<int> block_sizes;    // descending
    int n_max = 0;                   // largest zero-eigenvalue block
    std::vector<int> rank_sequence;  // rank((M Pi^{-1})^k), k = 0, 1, ...
    double tolerance_used = kDefaultRankTolerance;
    bool ambiguous_rank = false;
    std::string warning;

    bool has_exceptional_point() const noexcept { return n_max >= 2; }
    /// An N-block is an (N-1)-th order exceptional point.
    int ep_order() const noexcept { return n_max >= 2 ? n_max - 1 : 0; }
};

namespace detail {

struct RankInfo {
    int rank = 0;
    bool ambiguous = false;
};

// Singular values of A^k are compared against tol * sigma_max(A)^k.
inline RankInfo numerical_rank(const Matrix& power, double threshold) {
    RankInfo out;
    if (power.size() == 0) return out;
    const Vector s = Eigen::JacobiSVD<Matrix>(power).singularValues();
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > threshold) ++out.rank;
        if (threshold > 0.0 && s(i) > threshold / 10.0 && s(i) < threshold * 10.0) out.ambiguous = true;
    }
    return out;
}

inline double power_threshold(double tol, double sigma_max, int k) { return tol * std::pow(sigma_max, k); }

// Orthonormal basis of ker(A) using the same threshold rule as numerical_rank.
inline Matrix kernel_basis(const Matrix& power, double threshold) {
    const int n = static_cast<int>(power.cols());
    Eigen::JacobiSVD<Matrix> svd(power, Eigen::ComputeFullV);
    const Vector s = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > threshold) ++rank;
    return svd.matrixV().rightCols(n - rank);
}

inline Matrix orthonormal_span(const Matrix& w, double rel_tol = 1e-10) {
    if (w.cols() == 0) return Matrix(w.rows(), 0);
    Eigen::JacobiSVD<Matrix> svd(w, Eigen::ComputeThinU);
    const Vector s = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++rank;
    return svd.matrixU().leftCols(rank);
}

inline void fix_sign(Vector& v) {
    Eigen::Index idx = 0;
    v.cwiseAbs().maxCoeff(&idx);
    if (v(idx) < 0.0) v = -v;
}

inline Matrix apply_pi_inverse(const Matrix& m, const Matrix& pi) {
    if (pi.rows() != m.rows() || pi.cols() != m.cols()) throw DimensionError("Pi must match M");
    const double cond = condition_number(pi);
    if (!(cond < kPiConditionLimit))
        throw PreconditionError("Pi must be invertible for Jordan analysis (condition " + std::to_string(cond) + ")");
    // M Pi^{-1} = (Pi^{-T} M^T)^T
    return pi.transpose().fullPivLu().solve(m.transpose()).transpose();
}

}  // namespace detail

/// Block sizes from the rank-of-powers sequence. Blocks of size >= k number
/// rank(A^{k-1}) - rank(A^k).
inline JordanProfile jordan_profile(const Matrix& m, const Matrix& pi, double tol = kDefaultRankTolerance) {
    if (m.rows() != m.cols()) throw DimensionError("M must be square");
    const Matrix a = detail::apply_pi_inverse(m, pi);
    const int n = static_cast<int>(a.rows());

    JordanProfile prof;
    prof.tolerance_used = tol;
    prof.rank_sequence.push_back(n);
    const double sigma_max = n > 0 ? Eigen::JacobiSVD<Matrix>(a).singularValues()(0) : 0.0;
    Matrix power = Matrix::Identity(n, n);
    for (int k = 1; k <= n + 1; ++k) {
        power = power * a;
        const auto info = detail::numerical_rank(power, detail::power_threshold(tol, sigma_max, k));
        prof.ambiguous_rank = prof.ambiguous_rank || info.ambiguous;
        const int prev = prof.rank_sequence.back();
        prof.rank_sequence.push_back(info.rank);
        if (info.rank == prev || info.rank == 0) break;
    }
    if (prof.ambiguous_rank)
        prof.warning = "ambiguous numerical rank: a singular value lies within a factor 10 of the threshold";

    const auto& r = prof.rank_sequence;
    auto count_at_least = [&r](int k) -> int {
        const int last = static_cast<int>(r.size()) - 1;
        const int hi = std::min(k - 1, last);
        const int lo = std::min(k, last);
        return r[hi] - r[lo];
    };
    for (int k = static_cast<int>(r.size()); k >= 1; --k) {
        const int exact = count_at_least(k) - count_at_least(k + 1);
        for (int i = 0; i < exact; ++i) prof.block_sizes.push_back(k);
    }
    prof.n_max = prof.block_sizes.empty() ? 0 : prof.block_sizes.front();
    return prof;
}

inline JordanProfile jordan_profile(const Matrix& m, double tol = kDefaultRankTolerance) {
    return jordan_profile(m, Matrix::Identity(m.rows(), m.cols()), tol);
}

/// M = P Lambda P^{-1}. Lambda holds real Jordan blocks [[0,1],[0,0],...] for the
/// zero eigenvalue (largest first) followed by one unreduced block for the
/// remaining invertible part.
struct JordanDecomposition {
    Matrix P;
    Matrix Lambda;
    std::vector<int> block_sizes;
    double residual = 0.0;
    double p_condition = 1.0;
    bool ill_conditioned = false;

    /// Column of P at the top of the first (largest) chain: M^{N-1} v != 0, M^N v = 0.
    Vector chain_top() const {
        if (block_sizes.empty()) throw PreconditionError("no zero-eigenvalue block");
        return P.col(block_sizes.front() - 1);
    }
};

/// Chains are built top-down from the kernels of successive powers: each new chain
/// head v lies in ker(M^s) but outside ker(M^{s-1}) plus the chains already taken,
/// and contributes columns (M^{s-1} v, ..., M v, v).
inline JordanDecomposition jordan_decompose(const Matrix& m, double tol = kDefaultRankTolerance) {
    if (m.rows() != m.cols()) throw DimensionError("M must be square");
    const int n = static_cast<int>(m.rows());
    const JordanProfile prof = jordan_profile(m, tol);
    const double sigma_max = n > 0 ? Eigen::JacobiSVD<Matrix>(m).singularValues()(0) : 0.0;

    std::vector<Matrix> kernels(prof.n_max + 1);
    kernels[0] = Matrix(n, 0);
    {
        Matrix power = Matrix::Identity(n, n);
        for (int k = 1; k <= prof.n_max; ++k) {
            power = power * m;
            kernels[k] = detail::kernel_basis(power, detail::power_threshold(tol, sigma_max, k));
        }
    }

    std::vector<int> count_exact(prof.n_max + 1, 0);
    for (int s : prof.block_sizes) ++count_exact[s];

    struct Chain {
        int size;
        Vector head;
    };
    std::vector<Chain> chains;
    for (int s = prof.n_max; s >= 1; --s) {
        if (count_exact[s] == 0) continue;
        // Everything in ker(M^s) that is already accounted for.
        std::vector<Vector> taken;
        for (const auto& c : chains) taken.push_back(matrix_power(m, c.size - s) * c.head);
        Matrix w(n, kernels[s - 1].cols() + static_cast<Eigen::Index>(taken.size()));
        w.leftCols(kernels[s - 1].cols()) = kernels[s - 1];
        for (std::size_t i = 0; i < taken.size(); ++i) w.col(kernels[s - 1].cols() + i) = taken[i];
        const Matrix q = detail::orthonormal_span(w);
        const Matrix complement = Matrix::Identity(n, n) - q * q.transpose();
        const Matrix& ks = kernels[s];
        Eigen::JacobiSVD<Matrix> svd(complement * ks, Eigen::ComputeFullV);
        if (svd.singularValues().size() < count_exact[s] ||
            svd.singularValues()(count_exact[s] - 1) <= 1e-8)
            throw DecompositionError("could not extend chains of size " + std::to_string(s));
        for (int j = 0; j < count_exact[s]; ++j) {
            Vector v = ks * svd.matrixV().col(j);
            v.normalize();
            detail::fix_sign(v);
            chains.push_back({s, v});
        }
    }

    JordanDecomposition out;
    out.P = Matrix::Zero(n, n);
    out.Lambda = Matrix::Zero(n, n);
    int col = 0;
    for (const auto& c : chains) {
        for (int j = 0; j < c.size; ++j) {
            out.P.col(col + j) = matrix_power(m, c.size - 1 - j) * c.head;
            if (j > 0) out.Lambda(col + j - 1, col + j) = 1.0;
        }
        out.block_sizes.push_back(c.size);
        col += c.size;
    }
    const int nilpotent_dim = col;
    if (nilpotent_dim < n) {
        // Invariant complement: range(M^d) once the rank has stabilised.
        const int d = static_cast<int>(prof.rank_sequence.size()) - 1;
        const Matrix md = matrix_power(m, d);
        Eigen::JacobiSVD<Matrix> svd(md, Eigen::ComputeFullU);
        out.P.rightCols(n - nilpotent_dim) = svd.matrixU().leftCols(n - nilpotent_dim);
    }

    out.p_condition = condition_number(out.P);
    if (!std::isfinite(out.p_condition)) throw DecompositionError("transformation P is singular");
    out.ill_conditioned = out.p_condition > kTransformConditionWarning;
    const Matrix p_inv = out.P.fullPivLu().inverse();
    if (nilpotent_dim < n) {
        const Matrix block = p_inv * m * out.P;
        out.Lambda.bottomRightCorner(n - nilpotent_dim, n - nilpotent_dim) =
            block.bottomRightCorner(n - nilpotent_dim, n - nilpotent_dim);
    }
    const double scale = m.norm();
    const double err = (m - out.P * out.Lambda * p_inv).norm();
    out.residual = scale > 0.0 ? err / scale : err;
    if (!(out.residual <= kDecompositionResidualLimit))
        throw DecompositionError("reconstruction residual " + std::to_string(out.residual) + " (blocks " +
                                 std::to_string(out.block_sizes.size()) + ", cond(P) " +
                                 std::to_string(out.p_condition) + ")");
    return out;
}

/// Nilpotent M = P Lambda_N P^{-1} with one N-block and (dim - N) trivial blocks.
struct SynthesizedModel {
    Matrix M;
    Matrix P;
    int order = 0;
};

inline constexpr double kSynthConditionLimit = 1e8;

/// Seeded random transform with singular values spread evenly over [1, 2].
inline Matrix random_well_conditioned(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Matrix a(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) a(i, j) = normal(rng);
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Vector s(n);
    for (int i = 0; i < n; ++i) s(i) = n > 1 ? 2.0 - static_cast<double>(i) / (n - 1) : 1.0;
    return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

inline SynthesizedModel synth_jordan_model(int order, std::optional<Matrix> p = std::nullopt, std::uint64_t seed = 0,
                                           int dim = 0) {
    if (order < 2) throw PreconditionError("Jordan block size must be at least 2");
    if (dim == 0) dim = 2 * order;
    if (dim < order || dim % 2 != 0) throw PreconditionError("ambient dimension must be even and >= N");
    Matrix transform = p ? std::move(*p) : random_well_conditioned(dim, seed);
    if (transform.rows() != dim || transform.cols() != dim) throw DimensionError("P must be dim x dim");
    const double cond = condition_number(transform);
    if (!(cond <= kSynthConditionLimit))
        throw PreconditionError("transform is ill-conditioned (condition " + std::to_string(cond) + ")");
    Matrix lambda = Matrix::Zero(dim, dim);
    for (int i = 0; i + 1 < order; ++i) lambda(i, i + 1) = 1.0;
    Matrix m = transform * lambda * transform.fullPivLu().inverse();
    return {std::move(m), std::move(transform), order};
}

}  // namespace epsense
