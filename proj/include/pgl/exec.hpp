#pragma once

#include <cstdint>

namespace pgl {

/// Selects the serial reference or the OpenMP kernel of a search. Both return
/// identical results whenever the search completes within budget.
enum class Exec { serial, parallel };

/// Threads used by parallel kernels; n <= 0 restores the OpenMP default.
void set_thread_count(int n);
int thread_count();

struct SearchStats {
    std::uint64_t nodes = 0;
};

}  // namespace pgl
