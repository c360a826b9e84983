#pragma once

#include <string>

#include "naqs/state.hpp"

namespace naqs {

// Self-describing JSON checkpoints. Parameter vectors are stored per layer
// with explicit shapes, weights in row-major order; doubles round-trip
// bit-exactly. Masks and degree labels are not stored: they are rebuilt
// deterministically from (N, depth, width).
void save_checkpoint(const std::string& path, const Naqs& state);
Naqs load_checkpoint(const std::string& path);

void save_reverse_checkpoint(const std::string& path, const NaqsReverse& reverse,
                             const Lattice& lattice, OrderingKind ordering_kind);
// Returns the reverse model plus the lattice it was trained against.
struct LoadedReverse {
    NaqsReverse reverse;
    Lattice lattice;
    OrderingKind ordering_kind;
};
LoadedReverse load_reverse_checkpoint(const std::string& path);

} // namespace naqs
