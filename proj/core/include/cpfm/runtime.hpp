#pragma once

namespace cpfm {

/// Applies the CPFM_THREADS cap to internal parallelism (Eigen). Returns
/// the effective thread count.
int apply_thread_cap();

}  // namespace cpfm
