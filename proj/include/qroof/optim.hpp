#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

#include "qroof/random.hpp"
#include "qroof/types.hpp"

namespace qroof {

struct OptimizerConfig {
  int restarts = 32;
  int max_iters = 2000;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  std::optional<int> ensemble_size_override;

  OptimizerConfig with_restarts(int r) const {
    OptimizerConfig c = *this;
    c.restarts = r;
    return c;
  }
  OptimizerConfig boosted(int factor) const { return with_restarts(restarts * factor); }
  OptimizerConfig with_seed(std::uint64_t s) const {
    OptimizerConfig c = *this;
    c.seed = s;
    return c;
  }
};

inline int thread_cap() {
  if (const char* env = std::getenv("QROOF_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

namespace detail {

template <typename Param>
struct SearchResult {
  double value;
  Param param;
  int iterations;
  bool converged;  // terminated by step collapse / stall before the budget ran out
};

// Adaptive random search: perturb, retract, keep improvements, shrink the step
// on stalls. Minimization. Deterministic given the rng.
template <typename Param, typename Perturb, typename Objective>
SearchResult<Param> local_search(Param x, double fx, Perturb perturb, Objective objective,
                                 int max_iters, double tol, Rng& rng,
                                 double sigma0 = 0.3) {
  double sigma = sigma0;
  int stall = 0;
  int it = 0;
  bool converged = false;
  for (; it < max_iters; ++it) {
    Param cand = perturb(x, sigma, rng);
    const double fc = objective(cand);
    if (fc < fx - 1e-15) {
      const bool big_gain = (fx - fc) > tol;
      x = std::move(cand);
      fx = fc;
      sigma = std::min(sigma * 1.3, sigma0);
      stall = big_gain ? 0 : stall + 1;
    } else {
      sigma *= 0.96;
      ++stall;
    }
    if (sigma < 1e-9 || stall > 400) {
      converged = true;
      break;
    }
  }
  return {fx, std::move(x), it, converged};
}

// Runs `restarts` independent searches (sub-seed = seed + index) and merges by
// (value, lowest index wins ties) so parallel and serial runs agree bit for bit.
template <typename Param, typename RunFn>
SearchResult<Param> multistart(int restarts, RunFn run) {
  std::vector<SearchResult<Param>> results(restarts);
  const int threads = std::min(thread_cap(), restarts);
  if (threads <= 1) {
    for (int i = 0; i < restarts; ++i) results[i] = run(i);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < restarts; i = next.fetch_add(1))
          results[i] = run(i);
      });
    for (auto& th : pool) th.join();
  }
  int best = 0;
  for (int i = 1; i < restarts; ++i)
    if (results[i].value < results[best].value) best = i;
  return results[best];
}

}  // namespace detail
}  // namespace qroof
