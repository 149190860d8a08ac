#ifndef MOLGP_PARALLEL_HPP
#define MOLGP_PARALLEL_HPP

#include <cstddef>
#include <functional>
#include <string>

namespace molgp {

// Worker cap: MOLGP_THREADS env var when set (0 = all cores), otherwise all
// hardware threads.
int max_threads();

// Runs fn(i) for i in [0, n). Iterations are distributed dynamically across
// worker threads; each index is processed exactly once, so any function whose
// iterations write disjoint state produces results identical to a serial run.
// If one or more iterations throw, the exception from the smallest index is
// rethrown after all workers finish. Nested calls run serially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Diagnostic stream helper. Writes "[molgp] warning: ..." to stderr.
void warn(const std::string& msg);

}  // namespace molgp

#endif
