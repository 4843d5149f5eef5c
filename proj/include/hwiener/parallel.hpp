#pragma once

// Random streams and the deterministic map-reduce used by every Monte Carlo
// estimator.
//
// Paths are grouped into fixed-size blocks; each block is reduced
// sequentially, and block results are merged in block order. Block size does
// not depend on the worker count, so results are bitwise identical for any
// number of threads.

#include <boost/random/mersenne_twister.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hwiener {

struct RngStreamSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  friend bool operator==(const RngStreamSpec&, const RngStreamSpec&) = default;
};

using Engine = boost::random::mt19937_64;

/// Monte Carlo value with its standard error and provenance.
struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::uint64_t n_paths = 0;
  RngStreamSpec seed;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Engine seeded by a pure function of (master_seed, stream_id).
Engine make_engine(const RngStreamSpec& spec);

/// Mean and spread accumulator (Welford update, Chan merge).
struct RunningStats {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }
  void merge(const RunningStats& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(o.count);
    const double d = o.mean - mean;
    const std::uint64_t total = count + o.count;
    mean += d * nb / static_cast<double>(total);
    m2 += o.m2 + d * d * na * nb / static_cast<double>(total);
    count = total;
  }
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double stderr_() const { return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0; }
};

constexpr std::uint64_t kDefaultBlock = 4096;

unsigned resolve_workers(unsigned requested);

/// Runs block_fn(begin, end) -> Partial over [0, count) in blocks of `block`
/// items, then folds the partials in block order with merge(acc, partial).
template <class Partial, class BlockFn, class Merge>
Partial reduce_blocks(std::uint64_t count, unsigned workers, BlockFn&& block_fn, Merge&& merge,
                      Partial init = {}, std::uint64_t block = kDefaultBlock) {
  const std::uint64_t n_blocks = (count + block - 1) / block;
  std::vector<Partial> parts(n_blocks);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (;;) {
      const std::uint64_t b = next.fetch_add(1);
      if (b >= n_blocks) return;
      try {
        parts[b] = block_fn(b * block, std::min(count, (b + 1) * block));
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = n_blocks;
      }
    }
  };
  const unsigned w = static_cast<unsigned>(
      std::min<std::uint64_t>(resolve_workers(workers), std::max<std::uint64_t>(n_blocks, 1)));
  if (w <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(w);
    for (unsigned i = 0; i < w; ++i) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  Partial acc = std::move(init);
  for (auto& p : parts) merge(acc, p);
  return acc;
}

}  // namespace hwiener
