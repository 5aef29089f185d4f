#pragma once

#include <array>
#include <cstdint>
#include <future>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gpsfilt/errors.hpp"
#include "gpsfilt/types.hpp"
#include "gpsfilt/wiener.hpp"

namespace gpsfilt {

namespace detail {

/// Fixed-length delay line; push() admits the newest sample, dot() weights
/// newest-to-oldest against a coefficient vector (coeff[0] on the newest).
template <typename Scalar>
class DelayLine {
 public:
  explicit DelayLine(Index taps) : buf_(VectorX<Scalar>::Zero(taps)) {}

  void push(Scalar v) {
    pos_ = (pos_ == 0 ? buf_.size() : pos_) - 1;
    buf_[pos_] = v;
  }

  Scalar dot(const VectorX<Scalar>& coeff) const {
    const Index k = buf_.size();
    const Index head = k - pos_;
    Scalar acc = coeff.head(head).dot(buf_.tail(head));
    if (pos_ > 0) acc += coeff.tail(pos_).dot(buf_.head(pos_));
    return acc;
  }

  void reset() {
    buf_.setZero();
    pos_ = 0;
  }

 private:
  VectorX<Scalar> buf_;
  Index pos_{0};
};

}  // namespace detail

/// Decimated phases of an FIR filter: phase p holds {h(p), h(p+order), ...},
/// zero-padded so all phases share length ceil(M/order).
template <typename Scalar = double>
struct PolyphaseBank {
  int order{2};
  Index source_length{0};
  std::vector<VectorX<Scalar>> phases;

  Index phase_length() const { return phases.empty() ? 0 : phases.front().size(); }

  void validate() const {
    if (order != 2 && order != 3) throw ParameterError("polyphase: order must be 2 or 3");
    if (source_length < 1) throw ParameterError("polyphase: empty source filter");
    if (static_cast<Index>(phases.size()) != order)
      throw ParameterError("polyphase: phase count must equal order");
    const Index plen = phase_length();
    for (const auto& p : phases)
      if (p.size() != plen) throw ParameterError("polyphase: unequal phase lengths");
  }
};

using PolyphaseBankd = PolyphaseBank<double>;

template <typename Scalar>
PolyphaseBank<Scalar> decompose(const VectorX<Scalar>& h, int order) {
  if (order != 2 && order != 3) throw ParameterError("decompose: order must be 2 or 3");
  const Index m = h.size();
  if (m < 1) throw ParameterError("decompose: empty filter");

  const Index plen = (m + order - 1) / order;
  PolyphaseBank<Scalar> bank;
  bank.order = order;
  bank.source_length = m;
  bank.phases.assign(order, VectorX<Scalar>::Zero(plen));
  for (Index i = 0; i < m; ++i) bank.phases[i % order][i / order] = h[i];
  return bank;
}

template <typename Scalar>
PolyphaseBank<Scalar> decompose(const FirFilter<Scalar>& filter, int order) {
  return decompose(filter.h, order);
}

/// Inverse of decompose: re-interleave the phases into the original h.
template <typename Scalar>
VectorX<Scalar> interleave(const PolyphaseBank<Scalar>& bank) {
  bank.validate();
  VectorX<Scalar> h(bank.source_length);
  for (Index i = 0; i < bank.source_length; ++i) h[i] = bank.phases[i % bank.order][i / bank.order];
  return h;
}

/// How the per-block subfilter products are evaluated. They depend only on
/// the block inputs and per-branch delay state, so both modes produce
/// identical output; Concurrent fans them out to async tasks and joins
/// before the combination step.
enum class BranchExecution { Sequential, Concurrent };

/// Streaming block-parallel FIR engine.
///
/// Order 2 computes four subfilter products per block of 2 samples,
///   Y_even = He*Xe + z^-2 Ho*Xo,   Y_odd = Ho*Xe + He*Xo,
/// and order 3 computes exactly six products per block of 3 samples --
/// H0X0, H1X1, H2X2 (delayed), (H0+H1)(X0+X1), (H1+H2)(X1+X2),
/// (H0+H1+H2)(X0+X1+X2) -- shared across the three output phases. Both are
/// algebraic rearrangements of the serial causal convolution and match it
/// exactly; the MAC counter records the structural multiply count.
template <typename Scalar = double>
class BlockFirEngine {
 public:
  explicit BlockFirEngine(PolyphaseBank<Scalar> bank,
                          BranchExecution exec = BranchExecution::Sequential)
      : bank_(std::move(bank)), exec_(exec) {
    bank_.validate();
    const Index plen = bank_.phase_length();
    if (bank_.order == 2) {
      coeffs_ = {bank_.phases[0], bank_.phases[1], bank_.phases[1], bank_.phases[0]};
      delays_.assign(4, detail::DelayLine<Scalar>(plen));
    } else {
      coeffs_ = {bank_.phases[0],
                 bank_.phases[1],
                 bank_.phases[2],
                 bank_.phases[0] + bank_.phases[1],
                 bank_.phases[1] + bank_.phases[2],
                 bank_.phases[0] + bank_.phases[1] + bank_.phases[2]};
      delays_.assign(6, detail::DelayLine<Scalar>(plen));
    }
  }

  int order() const { return bank_.order; }
  Index block_size() const { return bank_.order; }
  const PolyphaseBank<Scalar>& bank() const { return bank_; }

  std::uint64_t mac_count() const { return macs_; }
  std::uint64_t blocks_processed() const { return blocks_; }

  /// Structural multiply-accumulates per block of `order` outputs:
  /// 4*ceil(M/2) for order 2, 6*ceil(M/3) for order 3.
  std::uint64_t mac_per_block() const {
    return static_cast<std::uint64_t>(bank_.order == 2 ? 4 : 6) *
           static_cast<std::uint64_t>(bank_.phase_length());
  }

  void reset() {
    for (auto& d : delays_) d.reset();
    carry_a_ = Scalar(0);
    carry_b_ = Scalar(0);
    macs_ = 0;
    blocks_ = 0;
  }

  /// Consume exactly `order` input samples, produce `order` output samples.
  void process_block(const Scalar* in, Scalar* out) {
    if (bank_.order == 2) {
      delays_[0].push(in[0]);
      delays_[1].push(in[1]);
      delays_[2].push(in[0]);
      delays_[3].push(in[1]);
      const auto p = products<4>();
      // p = {He*Xe, Ho*Xo, Ho*Xe, He*Xo}; the carried Ho*Xo is the z^-2 term.
      out[0] = p[0] + carry_a_;
      out[1] = p[2] + p[3];
      carry_a_ = p[1];
    } else {
      delays_[0].push(in[0]);
      delays_[1].push(in[1]);
      delays_[2].push(in[2]);
      delays_[3].push(in[0] + in[1]);
      delays_[4].push(in[1] + in[2]);
      delays_[5].push(in[0] + in[1] + in[2]);
      const auto p = products<6>();
      // p = {P00, P11, P22, S01, S12, S012}; one-block carries realise z^-3.
      out[0] = p[0] - carry_a_ + carry_b_;
      out[1] = (p[3] - p[1]) - (p[0] - carry_a_);
      out[2] = p[5] - (p[3] - p[1]) - (p[4] - p[1]);
      carry_a_ = p[2];
      carry_b_ = p[4] - p[1];
    }
    macs_ += mac_per_block();
    blocks_ += 1;
  }

 private:
  template <std::size_t NProducts>
  std::array<Scalar, NProducts> products() {
    std::array<Scalar, NProducts> p{};
    if (exec_ == BranchExecution::Sequential) {
      for (std::size_t i = 0; i < NProducts; ++i) p[i] = delays_[i].dot(coeffs_[i]);
    } else {
      std::array<std::future<Scalar>, NProducts> tasks;
      for (std::size_t i = 0; i < NProducts; ++i)
        tasks[i] = std::async(std::launch::async,
                              [this, i] { return delays_[i].dot(coeffs_[i]); });
      for (std::size_t i = 0; i < NProducts; ++i) p[i] = tasks[i].get();
    }
    return p;
  }

  PolyphaseBank<Scalar> bank_;
  BranchExecution exec_;
  std::vector<VectorX<Scalar>> coeffs_;           // per-branch coefficient vectors
  std::vector<detail::DelayLine<Scalar>> delays_;  // per-branch input histories
  Scalar carry_a_{0};  // order 2: previous Ho*Xo; order 3: previous H2X2
  Scalar carry_b_{0};  // order 3: previous (S12 - P11)
  std::uint64_t macs_{0};
  std::uint64_t blocks_{0};
};

using BlockFirEngined = BlockFirEngine<double>;

namespace detail {

template <typename Scalar>
VectorX<Scalar> run_blocks(BlockFirEngine<Scalar>& engine, const VectorX<Scalar>& x) {
  engine.reset();
  const Index order = engine.block_size();
  const Index n = x.size();
  const Index padded = ((n + order - 1) / order) * order;

  VectorX<Scalar> y(n);
  std::vector<Scalar> in(static_cast<std::size_t>(order)), out(static_cast<std::size_t>(order));
  for (Index start = 0; start < padded; start += order) {
    for (Index i = 0; i < order; ++i)
      in[static_cast<std::size_t>(i)] = start + i < n ? x[start + i] : Scalar(0);
    engine.process_block(in.data(), out.data());
    for (Index i = 0; i < order && start + i < n; ++i) y[start + i] = out[static_cast<std::size_t>(i)];
  }
  return y;
}

}  // namespace detail

/// Filter x through a 2-parallel engine. The engine is reset first, so the
/// output equals the serial causal convolution; odd input lengths are
/// zero-padded internally and the padding is trimmed from the output.
template <typename Scalar>
VectorX<Scalar> run2(BlockFirEngine<Scalar>& engine, const VectorX<Scalar>& x) {
  if (engine.order() != 2) throw ParameterError("run2: engine order must be 2");
  return detail::run_blocks(engine, x);
}

/// 3-parallel counterpart of run2 (padding to a multiple of 3).
template <typename Scalar>
VectorX<Scalar> run3(BlockFirEngine<Scalar>& engine, const VectorX<Scalar>& x) {
  if (engine.order() != 3) throw ParameterError("run3: engine order must be 3");
  return detail::run_blocks(engine, x);
}

template <typename Scalar>
std::uint64_t mac_per_block(const BlockFirEngine<Scalar>& engine) {
  return engine.mac_per_block();
}

/// Serial reference cost: one multiply per tap per output sample.
constexpr std::uint64_t serial_mac_per_output(Index m) { return static_cast<std::uint64_t>(m); }

}  // namespace gpsfilt
