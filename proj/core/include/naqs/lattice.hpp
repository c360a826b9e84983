#pragma once

#include <string>
#include <utility>
#include <vector>

#include "naqs/spin.hpp"

namespace naqs {

enum class LatticeKind { ChainOpen, ChainPeriodic, SquarePeriodic };
enum class OrderingKind { Linear, Raster, Spiral };

std::string to_string(LatticeKind kind);
std::string to_string(OrderingKind kind);
LatticeKind lattice_kind_from_string(const std::string& s);
OrderingKind ordering_kind_from_string(const std::string& s);

using Bond = std::pair<int, int>;

// Spin lattice: site count, side length for the square case, and the
// nearest-neighbor bond list. Immutable after construction.
//
// Bonds are emitted once per (site, direction) pair, so the periodic square
// lattice always carries 2*L^2 bonds and the periodic chain N bonds. For
// L = 2 (and the N = 2 periodic chain) this intentionally produces each
// unordered pair twice: the Hamiltonian sum over <i,j> counts both wrapped
// neighbor relations.
class Lattice {
  public:
    static Lattice chain_open(int n_sites);
    static Lattice chain_periodic(int n_sites);
    static Lattice square_periodic(int side);
    static Lattice make(LatticeKind kind, int n_sites_or_side);

    LatticeKind kind() const { return kind_; }
    int num_sites() const { return n_sites_; }
    int side() const { return side_; } // 0 unless square
    const std::vector<Bond>& bonds() const { return bonds_; }

    // Two-coloring used by the Marshall sign rule: sublattice A holds the
    // even sites of a chain, and the (x+y)-even sites of a square.
    bool on_sublattice_a(int site) const;

    int site_of(int row, int col) const; // square lattices only

  private:
    Lattice(LatticeKind kind, int n_sites, int side);

    LatticeKind kind_;
    int n_sites_;
    int side_;
    std::vector<Bond> bonds_;
};

// Nearest-neighbor bonds for the given lattice kind (same list the Lattice
// constructor stores; exposed for direct use).
std::vector<Bond> bonds_of(const Lattice& lattice);

// Permutation mapping network position -> lattice site index.
class SiteOrdering {
  public:
    SiteOrdering(OrderingKind kind, std::vector<int> perm);

    OrderingKind kind() const { return kind_; }
    int num_sites() const { return static_cast<int>(perm_.size()); }
    int site_at(int position) const { return perm_[static_cast<std::size_t>(position)]; }
    int position_of(int site) const { return inverse_[static_cast<std::size_t>(site)]; }
    const std::vector<int>& perm() const { return perm_; }

    // Ordering with positions reversed (position i -> site perm[N-1-i]).
    SiteOrdering reversed() const;

  private:
    OrderingKind kind_;
    std::vector<int> perm_;
    std::vector<int> inverse_;
};

// linear: identity; raster: row-major from the top-left; spiral: every
// length-l^2 prefix is the l x l square anchored at the top-left corner,
// filling shell l by the new column top-to-bottom then the new row
// left-to-right.
SiteOrdering build_ordering(OrderingKind kind, const Lattice& lattice);

enum class BipartitionMode { Prefix, Mask };

// Split of the sites into region A and region B. Prefix mode (required by
// conditional sampling) takes A as the first `cut` ordered positions; mask
// mode marks arbitrary sites.
class Bipartition {
  public:
    BipartitionMode mode() const { return mode_; }
    int cut() const { return cut_; } // prefix mode only
    int num_sites() const { return static_cast<int>(position_in_a_.size()); }
    int size_a() const { return size_a_; }
    bool position_in_a(int position) const { return position_in_a_[static_cast<std::size_t>(position)]; }
    bool site_in_a(int site) const { return site_in_a_[static_cast<std::size_t>(site)]; }
    // number of lattice bonds crossing the cut (wrap-around bonds included)
    int boundary_size() const { return boundary_size_; }

    Bipartition complement() const;

    friend Bipartition prefix_bipartition(const SiteOrdering&, const Lattice&, int cut);
    friend Bipartition mask_bipartition(const SiteOrdering&, const Lattice&, const std::vector<bool>& site_mask);

  private:
    Bipartition() = default;

    BipartitionMode mode_ = BipartitionMode::Prefix;
    int cut_ = 0;
    int size_a_ = 0;
    int boundary_size_ = 0;
    std::vector<bool> position_in_a_;
    std::vector<bool> site_in_a_;
};

Bipartition prefix_bipartition(const SiteOrdering& ordering, const Lattice& lattice, int cut);
Bipartition mask_bipartition(const SiteOrdering& ordering, const Lattice& lattice,
                             const std::vector<bool>& site_mask);

} // namespace naqs
