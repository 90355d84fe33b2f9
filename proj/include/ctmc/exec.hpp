#ifndef CTMC_EXEC_HPP
#define CTMC_EXEC_HPP

namespace ctmc {

/// Execution policy for the compute kernels. Parallel variants use OpenMP
/// with one owner thread per output element and fixed-order reductions, so
/// results are bitwise identical to the serial reference at any thread
/// count.
enum class Exec { serial, parallel };

/// Caps the OpenMP worker count (no-op without OpenMP). 0 keeps the
/// runtime default.
void set_thread_cap(int n);

/// Current worker count the parallel kernels will use.
int thread_count();

}  // namespace ctmc

#endif
