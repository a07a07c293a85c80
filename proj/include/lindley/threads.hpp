#pragma once

namespace lindley {

// Parallelism cap: min(hardware_concurrency, LINDLEY_ALT_THREADS if set),
// at least 1.
unsigned thread_budget();

}  // namespace lindley
