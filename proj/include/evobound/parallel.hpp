#pragma once

// Thin OpenMP layer. Every kernel in the library is written against these
// helpers and has a serial twin selected by ExecPolicy, so tests can compare
// the two and the bench tool can time them. Reductions accumulate fixed-size
// chunk results in index order, which keeps outputs identical no matter how
// many threads run.

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace evobound {

enum class ExecPolicy { parallel, serial };

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_jobs(int jobs) {
#ifdef _OPENMP
  if (jobs > 0) omp_set_num_threads(jobs);
#else
  (void)jobs;
#endif
}

/// Run body(i) for i in [0, n). Order of execution is unspecified in the
/// parallel case; bodies must write to disjoint state. The first exception
/// thrown by any body is rethrown after the loop finishes.
template <class Body>
void for_each_index(std::int64_t n, ExecPolicy policy, Body&& body) {
  if (policy == ExecPolicy::parallel) {
#ifdef _OPENMP
    std::exception_ptr err = nullptr;
    std::atomic<bool> failed{false};
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      if (failed.load(std::memory_order_relaxed)) continue;
      try {
        body(i);
      } catch (...) {
#pragma omp critical(evobound_for_each_err)
        {
          if (!err) err = std::current_exception();
        }
        failed.store(true, std::memory_order_relaxed);
      }
    }
    if (err) std::rethrow_exception(err);
    return;
#endif
  }
  for (std::int64_t i = 0; i < n; ++i) body(i);
}

/// Deterministic sum reduction: chunk partial sums are combined in index
/// order regardless of thread count. T needs operator+= and a zero `init`.
template <class T, class Term>
T indexed_sum(std::int64_t n, T init, ExecPolicy policy, Term&& term) {
  const std::int64_t chunk = 1024;
  const std::int64_t nchunks = (n + chunk - 1) / chunk;
  std::vector<T> partial(static_cast<std::size_t>(nchunks), init);
  for_each_index(nchunks, policy, [&](std::int64_t c) {
    T acc = init;
    const std::int64_t hi = std::min(n, (c + 1) * chunk);
    for (std::int64_t i = c * chunk; i < hi; ++i) acc += term(i);
    partial[static_cast<std::size_t>(c)] = acc;
  });
  T total = init;
  for (const T& p : partial) total += p;
  return total;
}

/// Deterministic max reduction over term(i) (doubles).
template <class Term>
double indexed_max(std::int64_t n, ExecPolicy policy, Term&& term) {
  const std::int64_t chunk = 1024;
  const std::int64_t nchunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(static_cast<std::size_t>(nchunks), 0.0);
  for_each_index(nchunks, policy, [&](std::int64_t c) {
    double acc = 0.0;
    const std::int64_t hi = std::min(n, (c + 1) * chunk);
    for (std::int64_t i = c * chunk; i < hi; ++i) acc = std::max(acc, term(i));
    partial[static_cast<std::size_t>(c)] = acc;
  });
  double total = 0.0;
  for (double p : partial) total = std::max(total, p);
  return total;
}

/// splitmix64; used to derive one named seed per trial/task so results do not
/// depend on scheduling.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace evobound
