#include "naqs/lattice.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace naqs {

std::string to_string(LatticeKind kind) {
    switch (kind) {
        case LatticeKind::ChainOpen: return "chain-open";
        case LatticeKind::ChainPeriodic: return "chain-periodic";
        case LatticeKind::SquarePeriodic: return "square-periodic";
    }
    return "?";
}

std::string to_string(OrderingKind kind) {
    switch (kind) {
        case OrderingKind::Linear: return "linear";
        case OrderingKind::Raster: return "raster";
        case OrderingKind::Spiral: return "spiral";
    }
    return "?";
}

LatticeKind lattice_kind_from_string(const std::string& s) {
    if (s == "chain-open") return LatticeKind::ChainOpen;
    if (s == "chain-periodic") return LatticeKind::ChainPeriodic;
    if (s == "square-periodic") return LatticeKind::SquarePeriodic;
    throw std::invalid_argument("unknown lattice kind: " + s);
}

OrderingKind ordering_kind_from_string(const std::string& s) {
    if (s == "linear") return OrderingKind::Linear;
    if (s == "raster") return OrderingKind::Raster;
    if (s == "spiral") return OrderingKind::Spiral;
    throw std::invalid_argument("unknown ordering kind: " + s);
}

Lattice::Lattice(LatticeKind kind, int n_sites, int side)
    : kind_(kind), n_sites_(n_sites), side_(side) {
    if (n_sites_ < 1) throw std::invalid_argument("lattice needs at least 1 site");
    if (kind_ != LatticeKind::ChainOpen && n_sites_ < 2)
        throw std::invalid_argument("periodic lattices need at least 2 sites");
    switch (kind_) {
        case LatticeKind::ChainOpen:
            for (int i = 0; i + 1 < n_sites_; ++i) bonds_.emplace_back(i, i + 1);
            break;
        case LatticeKind::ChainPeriodic:
            for (int i = 0; i < n_sites_; ++i) bonds_.emplace_back(i, (i + 1) % n_sites_);
            break;
        case LatticeKind::SquarePeriodic:
            for (int r = 0; r < side_; ++r) {
                for (int c = 0; c < side_; ++c) {
                    const int s = site_of(r, c);
                    bonds_.emplace_back(s, site_of(r, (c + 1) % side_));
                    bonds_.emplace_back(s, site_of((r + 1) % side_, c));
                }
            }
            break;
    }
}

Lattice Lattice::chain_open(int n_sites) { return Lattice(LatticeKind::ChainOpen, n_sites, 0); }
Lattice Lattice::chain_periodic(int n_sites) { return Lattice(LatticeKind::ChainPeriodic, n_sites, 0); }

Lattice Lattice::square_periodic(int side) {
    if (side < 2) throw std::invalid_argument("square lattice needs side >= 2");
    return Lattice(LatticeKind::SquarePeriodic, side * side, side);
}

Lattice Lattice::make(LatticeKind kind, int n_sites_or_side) {
    switch (kind) {
        case LatticeKind::ChainOpen: return chain_open(n_sites_or_side);
        case LatticeKind::ChainPeriodic: return chain_periodic(n_sites_or_side);
        case LatticeKind::SquarePeriodic: return square_periodic(n_sites_or_side);
    }
    throw std::invalid_argument("bad lattice kind");
}

int Lattice::site_of(int row, int col) const {
    if (kind_ != LatticeKind::SquarePeriodic) throw std::invalid_argument("site_of needs a square lattice");
    return row * side_ + col;
}

bool Lattice::on_sublattice_a(int site) const {
    if (kind_ == LatticeKind::SquarePeriodic) {
        const int r = site / side_, c = site % side_;
        return ((r + c) % 2) == 0;
    }
    return (site % 2) == 0;
}

std::vector<Bond> bonds_of(const Lattice& lattice) { return lattice.bonds(); }

SiteOrdering::SiteOrdering(OrderingKind kind, std::vector<int> perm)
    : kind_(kind), perm_(std::move(perm)), inverse_(perm_.size(), -1) {
    const int n = static_cast<int>(perm_.size());
    for (int pos = 0; pos < n; ++pos) {
        const int site = perm_[static_cast<std::size_t>(pos)];
        if (site < 0 || site >= n || inverse_[static_cast<std::size_t>(site)] != -1)
            throw std::invalid_argument("ordering must be a permutation of 0..N-1");
        inverse_[static_cast<std::size_t>(site)] = pos;
    }
}

SiteOrdering SiteOrdering::reversed() const {
    std::vector<int> perm(perm_.rbegin(), perm_.rend());
    return SiteOrdering(kind_, std::move(perm));
}

SiteOrdering build_ordering(OrderingKind kind, const Lattice& lattice) {
    const int n = lattice.num_sites();
    if (kind == OrderingKind::Linear) {
        std::vector<int> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        return SiteOrdering(kind, std::move(perm));
    }
    if (lattice.kind() != LatticeKind::SquarePeriodic)
        throw std::invalid_argument("raster/spiral orderings require a square lattice");
    const int side = lattice.side();
    std::vector<int> perm;
    perm.reserve(static_cast<std::size_t>(n));
    if (kind == OrderingKind::Raster) {
        for (int r = 0; r < side; ++r)
            for (int c = 0; c < side; ++c) perm.push_back(lattice.site_of(r, c));
    } else { // spiral: grow nested corner squares shell by shell
        perm.push_back(lattice.site_of(0, 0));
        for (int l = 2; l <= side; ++l) {
            for (int r = 0; r < l - 1; ++r) perm.push_back(lattice.site_of(r, l - 1));
            for (int c = 0; c < l; ++c) perm.push_back(lattice.site_of(l - 1, c));
        }
    }
    return SiteOrdering(kind, std::move(perm));
}

namespace {

int count_crossing_bonds(const Lattice& lattice, const std::vector<bool>& site_in_a) {
    int crossing = 0;
    for (const auto& [i, j] : lattice.bonds())
        if (site_in_a[static_cast<std::size_t>(i)] != site_in_a[static_cast<std::size_t>(j)]) ++crossing;
    return crossing;
}

} // namespace

Bipartition prefix_bipartition(const SiteOrdering& ordering, const Lattice& lattice, int cut) {
    const int n = ordering.num_sites();
    if (lattice.num_sites() != n) throw std::invalid_argument("ordering/lattice size mismatch");
    if (cut < 1 || cut > n - 1) throw std::invalid_argument("cut must lie in [1, N-1]");
    Bipartition part;
    part.mode_ = BipartitionMode::Prefix;
    part.cut_ = cut;
    part.size_a_ = cut;
    part.position_in_a_.assign(static_cast<std::size_t>(n), false);
    part.site_in_a_.assign(static_cast<std::size_t>(n), false);
    for (int pos = 0; pos < cut; ++pos) {
        part.position_in_a_[static_cast<std::size_t>(pos)] = true;
        part.site_in_a_[static_cast<std::size_t>(ordering.site_at(pos))] = true;
    }
    part.boundary_size_ = count_crossing_bonds(lattice, part.site_in_a_);
    return part;
}

Bipartition mask_bipartition(const SiteOrdering& ordering, const Lattice& lattice,
                             const std::vector<bool>& site_mask) {
    const int n = ordering.num_sites();
    if (static_cast<int>(site_mask.size()) != n) throw std::invalid_argument("mask size mismatch");
    int count = 0;
    for (bool b : site_mask) count += b ? 1 : 0;
    if (count == 0 || count == n) throw std::invalid_argument("both regions must be nonempty");
    Bipartition part;
    part.mode_ = BipartitionMode::Mask;
    part.cut_ = 0;
    part.size_a_ = count;
    part.site_in_a_.assign(site_mask.begin(), site_mask.end());
    part.position_in_a_.assign(static_cast<std::size_t>(n), false);
    for (int pos = 0; pos < n; ++pos)
        part.position_in_a_[static_cast<std::size_t>(pos)] =
            site_mask[static_cast<std::size_t>(ordering.site_at(pos))];
    part.boundary_size_ = count_crossing_bonds(lattice, part.site_in_a_);
    return part;
}

Bipartition Bipartition::complement() const {
    Bipartition out(*this);
    out.mode_ = BipartitionMode::Mask;
    out.cut_ = 0;
    out.size_a_ = num_sites() - size_a_;
    out.position_in_a_.flip();
    out.site_in_a_.flip();
    return out;
}

} // namespace naqs
