#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "gpsfilt/errors.hpp"
#include "gpsfilt/trajectory.hpp"
#include "gpsfilt/types.hpp"

namespace gpsfilt {

/// Sample correlation estimates at lags 0..M-1, biased (1/N) form.
/// The biased estimator keeps the implied Toeplitz matrix positive
/// semidefinite, which is what makes the fast recursion applicable.
template <typename Scalar = double>
struct CorrelationSet {
  VectorX<Scalar> r_xx;  // input autocorrelation
  VectorX<Scalar> r_sx;  // desired-signal vs input cross-correlation
  Index n_samples{0};

  Index lags() const { return r_xx.size(); }

  void validate() const {
    if (r_xx.size() != r_sx.size())
      throw ParameterError("correlations: r_xx/r_sx length mismatch");
    if (r_xx.size() < 1) throw ParameterError("correlations: need at least lag 0");
    if (!r_xx.allFinite() || !r_sx.allFinite())
      throw ParameterError("correlations: non-finite value");
    const Scalar r0 = r_xx[0];
    const Scalar slack = Scalar(1e-12) * std::abs(r0) + std::numeric_limits<Scalar>::epsilon();
    if (r_xx.cwiseAbs().maxCoeff() > std::abs(r0) + slack || r0 < Scalar(0))
      throw ParameterError("correlations: r_xx[0] must dominate all lags");
  }
};

using CorrelationSetd = CorrelationSet<double>;

/// Causal FIR filter, coefficients h(0..M-1).
template <typename Scalar = double>
struct FirFilter {
  VectorX<Scalar> h;

  Index length() const { return h.size(); }

  void validate() const {
    if (h.size() < 1) throw ParameterError("filter: need at least one coefficient");
    if (!h.allFinite()) throw ParameterError("filter: non-finite coefficient");
  }
};

using FirFilterd = FirFilter<double>;

/// Biased autocorrelation: r(tau) = (1/N) * sum_{k=0}^{N-1-tau} x[k]*x[k+tau].
template <typename Derived>
VectorX<typename Derived::Scalar> autocorr(const Eigen::MatrixBase<Derived>& x, Index m) {
  using Scalar = typename Derived::Scalar;
  const Index n = x.size();
  if (m < 1) throw ParameterError("autocorr: need m >= 1");
  if (m > n) throw ParameterError("autocorr: m exceeds series length");
  VectorX<Scalar> r(m);
  for (Index tau = 0; tau < m; ++tau)
    r[tau] = x.head(n - tau).dot(x.tail(n - tau)) / Scalar(n);
  return r;
}

/// Biased cross-correlation: r_sx(tau) = (1/N) * sum_{k=0}^{N-1-tau} s[k]*x[k+tau].
template <typename DerivedS, typename DerivedX>
VectorX<typename DerivedS::Scalar> crosscorr(const Eigen::MatrixBase<DerivedS>& s,
                                             const Eigen::MatrixBase<DerivedX>& x, Index m) {
  using Scalar = typename DerivedS::Scalar;
  const Index n = s.size();
  if (x.size() != n) throw ParameterError("crosscorr: series length mismatch");
  if (m < 1) throw ParameterError("crosscorr: need m >= 1");
  if (m > n) throw ParameterError("crosscorr: m exceeds series length");
  VectorX<Scalar> r(m);
  for (Index tau = 0; tau < m; ++tau)
    r[tau] = s.head(n - tau).dot(x.tail(n - tau)) / Scalar(n);
  return r;
}

template <typename DerivedS, typename DerivedX>
CorrelationSet<typename DerivedS::Scalar> estimate_correlations(
    const Eigen::MatrixBase<DerivedS>& s, const Eigen::MatrixBase<DerivedX>& x, Index m) {
  CorrelationSet<typename DerivedS::Scalar> corr;
  corr.r_xx = autocorr(x, m);
  corr.r_sx = crosscorr(s, x, m);
  corr.n_samples = s.size();
  return corr;
}

/// Dense symmetric Toeplitz matrix with first column (= first row) r.
template <typename Scalar>
MatrixX<Scalar> toeplitz_matrix(const VectorX<Scalar>& r) {
  const Index m = r.size();
  MatrixX<Scalar> t(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) t(i, j) = r[std::abs(i - j)];
  return t;
}

/// Matrix-free product of the symmetric Toeplitz matrix T(r) with h.
template <typename Scalar>
VectorX<Scalar> toeplitz_product(const VectorX<Scalar>& r, const VectorX<Scalar>& h) {
  const Index m = r.size();
  if (h.size() != m) throw ParameterError("toeplitz_product: size mismatch");
  VectorX<Scalar> y = VectorX<Scalar>::Zero(m);
  for (Index i = 0; i < m; ++i) {
    Scalar acc = Scalar(0);
    for (Index j = 0; j < m; ++j) acc += r[std::abs(i - j)] * h[j];
    y[i] = acc;
  }
  return y;
}

/// Relative infinity-norm residual of T(r) h = rhs.
template <typename Scalar>
Scalar solve_residual(const VectorX<Scalar>& r, const VectorX<Scalar>& rhs,
                      const VectorX<Scalar>& h) {
  const Scalar num = (toeplitz_product(r, h) - rhs).template lpNorm<Eigen::Infinity>();
  const Scalar den =
      std::max(rhs.template lpNorm<Eigen::Infinity>(), std::numeric_limits<Scalar>::min());
  return num / den;
}

/// Levinson-Durbin solve of the symmetric Toeplitz system T(r) h = rhs in
/// O(m^2). Returns nullopt when a reflection coefficient reaches magnitude
/// >= 1 - 1e-12 (the denominator 1 - k^2 drops below ~2e-12), signalling that
/// the caller should fall back to a dense solve.
template <typename Scalar>
std::optional<VectorX<Scalar>> levinson_solve(const VectorX<Scalar>& r,
                                              const VectorX<Scalar>& rhs) {
  const Index m = r.size();
  if (m < 1 || rhs.size() != m) throw ParameterError("levinson: size mismatch");
  if (!(std::abs(r[0]) > Scalar(0))) return std::nullopt;

  VectorX<Scalar> fwd = VectorX<Scalar>::Zero(m);  // solves T f = e_first
  VectorX<Scalar> bwd = VectorX<Scalar>::Zero(m);  // solves T b = e_last
  VectorX<Scalar> x = VectorX<Scalar>::Zero(m);
  fwd[0] = Scalar(1) / r[0];
  bwd[0] = Scalar(1) / r[0];
  x[0] = rhs[0] / r[0];

  VectorX<Scalar> fprev(m), bprev(m);
  for (Index n = 2; n <= m; ++n) {
    const Index len = n - 1;  // size already solved
    Scalar ef = Scalar(0), eb = Scalar(0), ex = Scalar(0);
    for (Index i = 0; i < len; ++i) {
      ef += r[n - 1 - i] * fwd[i];  // last-row extension error
      eb += r[i + 1] * bwd[i];      // first-row extension error
      ex += r[n - 1 - i] * x[i];
    }
    const Scalar denom = Scalar(1) - ef * eb;
    if (!(std::abs(denom) > Scalar(2e-12))) return std::nullopt;

    fprev.head(len) = fwd.head(len);
    bprev.head(len) = bwd.head(len);
    fwd[0] = fprev[0] / denom;
    for (Index i = 1; i < len; ++i) fwd[i] = (fprev[i] - ef * bprev[i - 1]) / denom;
    fwd[len] = -ef * bprev[len - 1] / denom;
    bwd[0] = -eb * fprev[0] / denom;
    for (Index i = 1; i < len; ++i) bwd[i] = (bprev[i - 1] - eb * fprev[i]) / denom;
    bwd[len] = bprev[len - 1] / denom;

    const Scalar alpha = rhs[n - 1] - ex;
    for (Index i = 0; i < len; ++i) x[i] += alpha * bwd[i];
    x[len] = alpha * bwd[len];
    if (!x.head(n).allFinite()) return std::nullopt;
  }
  return x;
}

/// Solve the order-m normal equations T(r_xx) h = r_sx. Correlation arrays
/// longer than m are truncated, so several lengths can be designed from one
/// CorrelationSet. Fast path first, dense LDLT fallback; either way the
/// residual must pass the 1e-8 gate or the design is rejected.
template <typename Scalar>
FirFilter<Scalar> design(const CorrelationSet<Scalar>& corr, Index m) {
  corr.validate();
  if (m < 1) throw ParameterError("design: need m >= 1");
  if (m > corr.lags()) throw ParameterError("design: correlations cover fewer lags than m");

  const VectorX<Scalar> r = corr.r_xx.head(m);
  const VectorX<Scalar> rhs = corr.r_sx.head(m);
  constexpr Scalar kResidualTol = Scalar(1e-8);

  if (auto fast = levinson_solve(r, rhs);
      fast && fast->allFinite() && solve_residual(r, rhs, *fast) < kResidualTol)
    return FirFilter<Scalar>{std::move(*fast)};

  const MatrixX<Scalar> t = toeplitz_matrix(r);
  const auto ldlt = t.ldlt();
  VectorX<Scalar> h = ldlt.solve(rhs);
  const Scalar residual = h.allFinite() ? solve_residual(r, rhs, h)
                                        : std::numeric_limits<Scalar>::infinity();
  if (!(residual < kResidualTol)) {
    const VectorX<Scalar> d = ldlt.vectorD().cwiseAbs();
    const Scalar condition =
        d.maxCoeff() / std::max(d.minCoeff(), std::numeric_limits<Scalar>::min());
    throw DesignError("wiener design: normal equations unsolvable to tolerance",
                      static_cast<double>(residual), static_cast<double>(condition));
  }
  return FirFilter<Scalar>{std::move(h)};
}

template <typename Scalar>
FirFilter<Scalar> design(const CorrelationSet<Scalar>& corr) {
  return design(corr, corr.lags());
}

/// Causal convolution with zero initial state; output length = input length.
template <typename Scalar, typename Derived>
VectorX<Scalar> apply(const FirFilter<Scalar>& filter, const Eigen::MatrixBase<Derived>& x) {
  filter.validate();
  const Index n = x.size();
  const Index m = filter.length();
  VectorX<Scalar> y(n);
  for (Index k = 0; k < n; ++k) {
    const Index taps = std::min(k, m - 1) + 1;
    y[k] = x.derived().segment(k - taps + 1, taps).reverse().dot(filter.h.head(taps));
  }
  return y;
}

/// Design-data objective h' T h - 2 h' r_sx: the empirical (zero-extended)
/// mean-square error up to an h-independent constant. Comparing values at
/// fixed correlations ranks candidate filters by true empirical MSE.
template <typename Scalar>
Scalar design_objective(const CorrelationSet<Scalar>& corr, const VectorX<Scalar>& h) {
  const Index m = h.size();
  if (m < 1 || m > corr.lags()) throw ParameterError("design_objective: bad filter length");
  const VectorX<Scalar> r = corr.r_xx.head(m);
  const VectorX<Scalar> rhs = corr.r_sx.head(m);
  return h.dot(toeplitz_product(r, h)) - Scalar(2) * h.dot(rhs);
}

/// Estimate correlations from the first m samples of the trajectory (truth as
/// desired signal, measured as input) and design the length-m filter. For
/// m < N this is the reduced-length scheme: the filter needs only m samples
/// of history before it can start producing output.
template <typename Scalar>
FirFilter<Scalar> design_from_trajectory(const Trajectory<Scalar>& traj, Index m) {
  traj.validate();
  if (m < 1) throw ParameterError("design_from_trajectory: need m >= 1");
  if (m > traj.size()) throw ParameterError("design_from_trajectory: m exceeds trajectory length");
  const auto corr = estimate_correlations(traj.truth.head(m), traj.measured.head(m), m);
  return design(corr, m);
}

}  // namespace gpsfilt
