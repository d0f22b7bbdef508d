#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <thread>
#include <vector>

namespace bayesoed {

/// Pairwise (cascade) summation.  The association order depends only on the
/// length of the input, never on how the values were produced.
inline double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kBlock = 16;
  if (values.size() <= kBlock) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

struct MeanAndError {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Sample mean and standard error of the mean (unbiased variance).
inline MeanAndError mean_and_std_error(std::span<const double> values) {
  const auto count = static_cast<double>(values.size());
  MeanAndError out;
  if (values.empty()) return out;
  out.mean = pairwise_sum(values) / count;
  if (values.size() < 2) return out;
  std::vector<double> sq(values.size());
  std::transform(values.begin(), values.end(), sq.begin(), [m = out.mean](double v) {
    const double d = v - m;
    return d * d;
  });
  const double variance = pairwise_sum(sq) / (count - 1.0);
  out.std_error = std::sqrt(variance / count);
  return out;
}

/// Run body(i) for i in [0, count) over contiguous index blocks.  workers == 0
/// picks the hardware concurrency.  body must only write to slot i.
template <typename Body>
void parallel_for(std::size_t count, Body&& body, unsigned workers = 0) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] {
      for (std::size_t i = begin; i < end; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace bayesoed
