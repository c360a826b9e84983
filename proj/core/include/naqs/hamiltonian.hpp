#pragma once

#include "naqs/lattice.hpp"

namespace naqs {

// Antiferromagnetic Heisenberg model H = sum_<i,j> S_i . S_j with spin-1/2
// operators (S = sigma_Pauli / 2) and J = 1, so a bond contributes +1/4 on
// parallel spins and -1/4 plus a 1/2 exchange element on antiparallel ones.
// Bonds are pre-mapped from lattice sites to network positions so that all
// spin data stays in position space.
struct Hamiltonian {
    Lattice lattice;
    std::vector<Bond> position_bonds;

    Hamiltonian(const Lattice& lat, const SiteOrdering& ordering) : lattice(lat) {
        position_bonds.reserve(lat.bonds().size());
        for (const auto& [i, j] : lat.bonds())
            position_bonds.emplace_back(ordering.position_of(i), ordering.position_of(j));
    }

    int num_sites() const { return lattice.num_sites(); }
    int num_bonds() const { return static_cast<int>(position_bonds.size()); }
};

} // namespace naqs
