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
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "epsense/errors.hpp"
#include "epsense/gaussian.hpp"
#include "epsense/linalg.hpp"
#include "epsense/sensor.hpp"

namespace epsense {

/// Time-domain run of the quantum Langevin equation in the frame rotating at the
/// probe carrier. Time is in units of 1/kappa and the intracavity quadratures are
/// scaled so that the output is y = xi_A + mu_in + x:
///
///   dx/dt = (M - theta Pi) Omega x - (xi_A + mu_in) + R xi_B
///
/// xi_A, xi_B are white noises with symmetrized spectral density I (vacuum) and V'_in.
/// The zero-frequency transfer of this system is exactly (I - G_theta, G_theta R).
struct SdeConfig {
    explicit SdeConfig(SensorModel m) : model(std::move(m)) {}

    SensorModel model;
    double theta = 0.1;
    double dt = 0.01;
    double duration = 1e4;
    std::uint64_t seed = 1;
    double burn_in = 0.05;             // fraction of duration discarded
    double carrier_bandwidth = 0.02;   // angular, units of kappa; Welch segment = 2 pi / bandwidth
    bool noiseless = false;
    Vector drive;                      // coherent probe amplitude; empty means zero
    Vector initial;                    // intracavity start; empty means zero
    int noise_substeps = 1;            // Brownian increments summed per step
};

inline constexpr double kDivergenceFactor = 1e6;
inline constexpr double kDtEigenFraction = 0.01;
inline constexpr double kStabilityMarginFactor = 10.0;
inline constexpr double kMinCorrelationTimes = 100.0;
inline constexpr int kMinSegments = 8;
inline constexpr double kThresholdSlack = 1e-6;  // defective drift eigenvalues carry ~sqrt(eps) error

struct DriftSpectrum {
    double max_real = 0.0;
    double max_abs = 0.0;
};

inline DriftSpectrum drift_spectrum(const Matrix& a) {
    Eigen::EigenSolver<Matrix> es(a, false);
    DriftSpectrum out{-std::numeric_limits<double>::infinity(), 0.0};
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        out.max_real = std::max(out.max_real, es.eigenvalues()(i).real());
        out.max_abs = std::max(out.max_abs, std::abs(es.eigenvalues()(i)));
    }
    return out;
}

/// Throws InstabilityError at or above threshold, PreconditionError for a bad
/// step or bandwidth, InsufficientDataError for a run shorter than 100 correlation times.
inline void validate(const SdeConfig& c) {
    const int d = c.model.dim();
    if (!(c.dt > 0.0) || !(c.duration > 0.0)) throw PreconditionError("dt and duration must be positive");
    if (!(c.burn_in >= 0.0 && c.burn_in < 1.0)) throw PreconditionError("burn-in fraction must lie in [0, 1)");
    if (!(c.carrier_bandwidth > 0.0)) throw PreconditionError("carrier bandwidth must be positive");
    if (c.noise_substeps < 1) throw PreconditionError("noise_substeps must be >= 1");
    if (c.drive.size() != 0 && c.drive.size() != d) throw DimensionError("drive does not match the sensor");
    if (c.initial.size() != 0 && c.initial.size() != d) throw DimensionError("initial state does not match the sensor");

    const auto spec = drift_spectrum(c.model.drift(c.theta));
    if (!(spec.max_real < 0.0))
        throw InstabilityError("drift is not strictly stable (max Re lambda = " + std::to_string(spec.max_real) +
                               "); at the lasing threshold no steady state exists");
    const double decay = -spec.max_real;
    if (decay < kStabilityMarginFactor * c.carrier_bandwidth * (1.0 - kThresholdSlack))
        throw PreconditionError("stability margin " + std::to_string(decay) + " is below 10x the carrier bandwidth");
    if (c.dt > kDtEigenFraction / spec.max_abs * (1.0 + kThresholdSlack))
        throw PreconditionError("dt exceeds 0.01 / max|lambda| = " + std::to_string(kDtEigenFraction / spec.max_abs));
    if (c.duration * (1.0 - c.burn_in) * decay < kMinCorrelationTimes)
        throw InsufficientDataError("run covers fewer than 100 correlation times");
}

/// Recorded trajectory, burn-in removed. Column k is the sample at t_k.
struct QuadratureSeries {
    double dt = 0.0;
    double t0 = 0.0;
    Matrix intracavity;
    Matrix output;
    long samples() const { return static_cast<long>(output.cols()); }
};

namespace detail {

/// Exact propagator of dx/dt = A x + f for f constant over one step:
/// x' = Phi x + Psi f with Phi = exp(A dt), Psi = int_0^dt exp(A s) ds.
struct StepPropagator {
    Matrix phi;
    Matrix psi;
};

inline StepPropagator make_propagator(const Matrix& a, double dt) {
    const Eigen::Index d = a.rows();
    Matrix aug = Matrix::Zero(2 * d, 2 * d);
    aug.topLeftCorner(d, d) = a * dt;
    aug.topRightCorner(d, d) = Matrix::Identity(d, d) * dt;
    const Matrix e = aug.exp();
    return {e.topLeftCorner(d, d), e.topRightCorner(d, d)};
}

template <typename Sink>
void simulate(const SdeConfig& c, Sink&& sink) {
    validate(c);
    const int d = c.model.dim();
    const Matrix a = c.model.drift(c.theta);
    const auto prop = make_propagator(a, c.dt);
    const Matrix anc = c.model.R() * psd_sqrt(c.model.ancilla_covariance());
    const Vector mu = c.drive.size() ? c.drive : Vector::Zero(d);
    Vector x = c.initial.size() ? c.initial : Vector::Zero(d);

    const double amplification = a.fullPivLu().inverse().norm();
    const double scale = std::max({1.0, x.norm(), amplification * mu.norm(), amplification});
    const double limit = kDivergenceFactor * scale;

    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> normal;
    const double sub_sd = std::sqrt(c.dt / c.noise_substeps);

    const long steps = std::lround(c.duration / c.dt);
    const long skip = std::lround(c.burn_in * static_cast<double>(steps));
    Vector wa(d), wb(static_cast<int>(anc.cols())), fa(d), f(d), y(d);
    for (long k = 0; k < steps; ++k) {
        if (c.noiseless) {
            fa.setZero();
            f = -mu;
        } else {
            wa.setZero();
            wb.setZero();
            for (int s = 0; s < c.noise_substeps; ++s) {
                for (int i = 0; i < d; ++i) wa(i) += sub_sd * normal(rng);
                for (Eigen::Index i = 0; i < wb.size(); ++i) wb(i) += sub_sd * normal(rng);
            }
            fa = wa / c.dt;
            f = -(fa + mu) + anc * (wb / c.dt);
        }
        y = fa + mu + x;
        if (k >= skip) sink(k, x, y);
        x = prop.phi * x + prop.psi * f;
        if (!(x.norm() < limit))
            throw InstabilityError("trajectory norm exceeded " + std::to_string(limit) + " at t = " +
                                   std::to_string((k + 1) * c.dt));
    }
}

}  // namespace detail

inline QuadratureSeries integrate_langevin(const SdeConfig& c) {
    const int d = c.model.dim();
    const long steps = std::lround(c.duration / c.dt);
    const long skip = std::lround(c.burn_in * static_cast<double>(steps));
    QuadratureSeries out;
    out.dt = c.dt;
    out.t0 = static_cast<double>(skip) * c.dt;
    out.intracavity.resize(d, steps - skip);
    out.output.resize(d, steps - skip);
    detail::simulate(c, [&](long k, const Vector& x, const Vector& y) {
        out.intracavity.col(k - skip) = x;
        out.output.col(k - skip) = y;
    });
    return out;
}

/// Symmetrized output spectral covariance near the carrier.
struct SpectralEstimate {
    Matrix V_est;
    Matrix stderr_est;
    int n_segments = 0;
};

/// Hann-windowed zero-frequency periodogram over non-overlapping segments of
/// length 2 pi / bandwidth. Normalized so that white noise of density I gives I.
class WelchEstimator {
   public:
    WelchEstimator(int dim, double dt, double carrier_bandwidth) : dim_(dim), dt_(dt) {
        if (!(carrier_bandwidth > 0.0)) throw PreconditionError("carrier bandwidth must be positive");
        length_ = std::max<long>(2, std::lround(2.0 * std::numbers::pi / (carrier_bandwidth * dt)));
        window_.resize(length_);
        double sumsq = 0.0;
        for (long k = 0; k < length_; ++k) {
            window_[k] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / length_));
            sumsq += window_[k] * window_[k];
        }
        norm_ = 1.0 / (dt_ * sumsq);
        acc_ = Vector::Zero(dim_);
    }

    long segment_length() const noexcept { return length_; }

    void push(const Vector& y) {
        acc_ += (window_[pos_] * dt_) * y;
        if (++pos_ == length_) {
            segments_.push_back(norm_ * acc_ * acc_.transpose());
            acc_.setZero();
            pos_ = 0;
        }
    }

    void merge(const WelchEstimator& other) {
        segments_.insert(segments_.end(), other.segments_.begin(), other.segments_.end());
    }

    int segments() const noexcept { return static_cast<int>(segments_.size()); }

    SpectralEstimate finish() const {
        const int n = segments();
        if (n < kMinSegments)
            throw InsufficientDataError(std::to_string(n) + " complete segments, need at least " +
                                        std::to_string(kMinSegments));
        SpectralEstimate est;
        est.n_segments = n;
        est.V_est = Matrix::Zero(dim_, dim_);
        for (const auto& s : segments_) est.V_est += s;
        est.V_est = symmetrized(est.V_est / n);
        Matrix var = Matrix::Zero(dim_, dim_);
        for (const auto& s : segments_) var += (s - est.V_est).cwiseAbs2();
        var /= (n - 1);
        est.stderr_est = (var / n).cwiseSqrt();
        return est;
    }

   private:
    int dim_;
    double dt_;
    long length_ = 0;
    long pos_ = 0;
    double norm_ = 1.0;
    std::vector<double> window_;
    Vector acc_;
    std::vector<Matrix> segments_;
};

inline SpectralEstimate spectral_covariance(const QuadratureSeries& series, double carrier_bandwidth) {
    WelchEstimator welch(static_cast<int>(series.output.rows()), series.dt, carrier_bandwidth);
    for (long k = 0; k < series.samples(); ++k) welch.push(series.output.col(k));
    return welch.finish();
}

/// Streams one or more independent trajectories (seeds seed, seed+1, ...) straight
/// into the estimator without storing them.
inline SpectralEstimate estimate_output_covariance(const SdeConfig& c, int trajectories = 1) {
    if (trajectories < 1) throw PreconditionError("need at least one trajectory");
    validate(c);
    std::vector<WelchEstimator> parts(trajectories, WelchEstimator(c.model.dim(), c.dt, c.carrier_bandwidth));
    std::vector<std::exception_ptr> errors(trajectories);
    auto run = [&](int t) {
        try {
            SdeConfig ct = c;
            ct.seed = c.seed + static_cast<std::uint64_t>(t);
            detail::simulate(ct, [&](long, const Vector&, const Vector& y) { parts[t].push(y); });
        } catch (...) {
            errors[t] = std::current_exception();
        }
    };
    {
        std::vector<std::jthread> pool;
        for (int t = 1; t < trajectories; ++t) pool.emplace_back(run, t);
        run(0);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (int t = 1; t < trajectories; ++t) parts[0].merge(parts[t]);
    return parts[0].finish();
}

struct OracleEntry {
    int row = 0;
    int col = 0;
    double analytic = 0.0;
    double estimated = 0.0;
    double stderr_est = 0.0;
    bool pass = false;
};

struct OracleReport {
    Matrix analytic;
    SpectralEstimate estimate;
    std::vector<OracleEntry> entries;
    bool all_pass = false;
};

inline constexpr double kOracleRelativeTolerance = 0.05;
inline constexpr double kOracleSigmas = 3.0;

/// Entrywise |est - V_out| <= max(5% |V_out|, 3 stderr) against the
/// frequency-domain output covariance for a vacuum probe.
inline OracleReport compare_with_frequency_domain(const SensorModel& model, double theta, SpectralEstimate est) {
    OracleReport rep;
    rep.analytic = output_state(model, theta, vacuum_state(model.layout())).covariance();
    rep.estimate = std::move(est);
    rep.all_pass = true;
    const int d = model.dim();
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            OracleEntry e{i, j, rep.analytic(i, j), rep.estimate.V_est(i, j), rep.estimate.stderr_est(i, j), false};
            const double tol =
                std::max(kOracleRelativeTolerance * std::abs(e.analytic), kOracleSigmas * e.stderr_est);
            e.pass = std::abs(e.estimated - e.analytic) <= tol;
            rep.all_pass = rep.all_pass && e.pass;
            rep.entries.push_back(e);
        }
    }
    return rep;
}

inline OracleReport run_oracle(const SdeConfig& c, int trajectories = 1) {
    return compare_with_frequency_domain(c.model, c.theta, estimate_output_covariance(c, trajectories));
}

}  // namespace epsense
