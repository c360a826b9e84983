#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "naqs/lattice.hpp"

using namespace naqs;

TEST_CASE("bond lists per lattice kind") {
    const Lattice open3 = Lattice::chain_open(3);
    CHECK(open3.bonds() == std::vector<Bond>{{0, 1}, {1, 2}});

    const Lattice per3 = Lattice::chain_periodic(3);
    CHECK(per3.bonds() == std::vector<Bond>{{0, 1}, {1, 2}, {2, 0}});

    const Lattice sq2 = Lattice::square_periodic(2);
    CHECK(sq2.bonds().size() == 8); // 2 L^2, wrapped neighbors double up at L = 2

    const Lattice sq4 = Lattice::square_periodic(4);
    CHECK(sq4.bonds().size() == 32);
    std::set<std::pair<int, int>> unordered;
    for (auto [i, j] : sq4.bonds()) {
        CHECK(i != j);
        CHECK(i < 16);
        CHECK(j < 16);
        unordered.insert({std::min(i, j), std::max(i, j)});
    }
    CHECK(unordered.size() == 32); // no duplicate pairs for L >= 3

    CHECK(bonds_of(sq4) == sq4.bonds());
}

TEST_CASE("raster ordering is a row-major scan from the top-left") {
    const Lattice sq = Lattice::square_periodic(2);
    const SiteOrdering ord = build_ordering(OrderingKind::Raster, sq);
    CHECK(ord.perm() == std::vector<int>{sq.site_of(0, 0), sq.site_of(0, 1), sq.site_of(1, 0),
                                         sq.site_of(1, 1)});
}

TEST_CASE("linear ordering on a chain is the identity") {
    const Lattice chain = Lattice::chain_open(5);
    const SiteOrdering ord = build_ordering(OrderingKind::Linear, chain);
    std::vector<int> identity(5);
    std::iota(identity.begin(), identity.end(), 0);
    CHECK(ord.perm() == identity);
}

TEST_CASE("spiral prefixes are corner squares") {
    const Lattice sq3 = Lattice::square_periodic(3);
    const SiteOrdering ord3 = build_ordering(OrderingKind::Spiral, sq3);
    CHECK(ord3.site_at(0) == sq3.site_of(0, 0));
    const std::set<int> prefix4(ord3.perm().begin(), ord3.perm().begin() + 4);
    CHECK(prefix4 == std::set<int>{sq3.site_of(0, 0), sq3.site_of(0, 1), sq3.site_of(1, 0),
                                   sq3.site_of(1, 1)});
    CHECK(std::set<int>(ord3.perm().begin(), ord3.perm().end()).size() == 9);

    // exhaustive prefix-square property for all side lengths up to 16
    for (int side = 2; side <= 16; ++side) {
        const Lattice sq = Lattice::square_periodic(side);
        const SiteOrdering ord = build_ordering(OrderingKind::Spiral, sq);
        for (int l = 1; l <= side; ++l) {
            std::set<int> prefix(ord.perm().begin(), ord.perm().begin() + l * l);
            std::set<int> square;
            for (int r = 0; r < l; ++r)
                for (int c = 0; c < l; ++c) square.insert(sq.site_of(r, c));
            CHECK(prefix == square);
        }
    }
}

TEST_CASE("orderings are permutations") {
    const Lattice sq = Lattice::square_periodic(5);
    for (OrderingKind kind : {OrderingKind::Linear, OrderingKind::Raster, OrderingKind::Spiral}) {
        const SiteOrdering ord = build_ordering(kind, sq);
        std::vector<int> sorted = ord.perm();
        std::sort(sorted.begin(), sorted.end());
        std::vector<int> identity(sorted.size());
        std::iota(identity.begin(), identity.end(), 0);
        CHECK(sorted == identity);
        for (int pos = 0; pos < ord.num_sites(); ++pos) CHECK(ord.position_of(ord.site_at(pos)) == pos);
    }
}

TEST_CASE("spiral and raster require a square lattice") {
    const Lattice chain = Lattice::chain_open(6);
    CHECK_THROWS_AS(build_ordering(OrderingKind::Spiral, chain), std::invalid_argument);
    CHECK_THROWS_AS(build_ordering(OrderingKind::Raster, chain), std::invalid_argument);
}

TEST_CASE("prefix bipartitions") {
    const Lattice chain = Lattice::chain_open(100);
    const SiteOrdering ord = build_ordering(OrderingKind::Linear, chain);
    const Bipartition part = prefix_bipartition(ord, chain, 50);
    CHECK(part.size_a() == 50);
    CHECK(part.boundary_size() == 1); // interior cut of an open chain
    for (int pos = 0; pos < 50; ++pos) CHECK(part.position_in_a(pos));
    CHECK_FALSE(part.position_in_a(50));

    CHECK_THROWS_AS(prefix_bipartition(ord, chain, 0), std::invalid_argument);
    CHECK_THROWS_AS(prefix_bipartition(ord, chain, 100), std::invalid_argument);
}

TEST_CASE("spiral cut 4 on a 3x3 lattice selects the 2x2 corner") {
    const Lattice sq = Lattice::square_periodic(3);
    const SiteOrdering ord = build_ordering(OrderingKind::Spiral, sq);
    const Bipartition part = prefix_bipartition(ord, sq, 4);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            CHECK(part.site_in_a(sq.site_of(r, c)) == (r < 2 && c < 2));
}

TEST_CASE("spiral cut 9 on a 12x12 lattice is the 3x3 region with boundary 12") {
    const Lattice sq = Lattice::square_periodic(12);
    const SiteOrdering ord = build_ordering(OrderingKind::Spiral, sq);
    const Bipartition part = prefix_bipartition(ord, sq, 9);
    int in_a = 0;
    for (int r = 0; r < 12; ++r)
        for (int c = 0; c < 12; ++c)
            if (part.site_in_a(sq.site_of(r, c))) {
                ++in_a;
                CHECK(r < 3);
                CHECK(c < 3);
            }
    CHECK(in_a == 9);
    CHECK(part.boundary_size() == 12); // perimeter of a compact square block
}

TEST_CASE("mask bipartitions and complements") {
    const Lattice chain = Lattice::chain_periodic(6);
    const SiteOrdering ord = build_ordering(OrderingKind::Linear, chain);
    std::vector<bool> mask{true, false, true, false, true, false};
    const Bipartition part = mask_bipartition(ord, chain, mask);
    CHECK(part.mode() == BipartitionMode::Mask);
    CHECK(part.size_a() == 3);
    CHECK(part.boundary_size() == 6); // every bond crosses in the alternating mask

    const Bipartition comp = part.complement();
    CHECK(comp.size_a() == 3);
    CHECK(comp.boundary_size() == 6);
    for (int pos = 0; pos < 6; ++pos) CHECK(comp.position_in_a(pos) == !part.position_in_a(pos));

    CHECK_THROWS_AS(mask_bipartition(ord, chain, std::vector<bool>(6, true)), std::invalid_argument);
}

TEST_CASE("wrap-around bonds count toward the boundary") {
    const Lattice chain = Lattice::chain_periodic(8);
    const SiteOrdering ord = build_ordering(OrderingKind::Linear, chain);
    const Bipartition part = prefix_bipartition(ord, chain, 4);
    CHECK(part.boundary_size() == 2); // cut bond plus the wrap bond
}
