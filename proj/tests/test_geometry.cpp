#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gasket/geometry.hpp"

#include <map>
#include <set>
#include <sstream>

using namespace gasket;

namespace {

std::string serialize_cells(int nu) {
    std::ostringstream os;
    for (const auto& cd : cells(nu)) {
        os << cd.index << ":";
        for (const auto& p : cd.corner_points) os << bary_text(p);
        os << "\n";
    }
    return os.str();
}

}  // namespace

TEST_CASE("barycentric points reduce and compare exactly") {
    CHECK(make_bary(2, 0, 0, 2) == corner_point(1));
    CHECK(make_bary(3, 3, 0, 6) == make_bary(1, 1, 0, 2));
    CHECK(make_bary(1, 1, 1, 3) != make_bary(1, 1, 0, 2));
    CHECK_THROWS_AS(make_bary(1, 1, 0, 3), ValidationError);
    CHECK_THROWS_AS(make_bary(-1, 2, 0, 1), ValidationError);
    CHECK_THROWS_AS(corner_point(4), ValidationError);
}

TEST_CASE("cell counts match the closed formula") {
    CHECK(cells(2).size() == 3);
    CHECK(cells(3).size() == 6);
    CHECK(cells(4).size() == 10);
    for (int nu = 2; nu <= 12; ++nu)
        CHECK(cells(nu).size() == static_cast<std::size_t>(cell_count(nu)));
    CHECK_THROWS_AS(cells(1), ValidationError);
    CHECK_THROWS_AS(cells(13), ValidationError);
}

TEST_CASE("cells 1..3 are the corner cells containing p_i") {
    for (int nu = 2; nu <= 6; ++nu) {
        const auto& cs = cells(nu);
        for (int i = 1; i <= 3; ++i) {
            bool contains = false;
            for (const auto& p : cs[i - 1].corner_points)
                if (p == corner_point(i)) contains = true;
            CHECK(contains);
        }
        // non-corner cells follow in ascending lexicographic base order
        for (std::size_t k = 4; k < cs.size(); ++k) CHECK(cs[k - 1].base < cs[k].base);
    }
}

TEST_CASE("cell corners are the base plus each unit vector and are distinct") {
    for (int nu = 2; nu <= 8; ++nu)
        for (const auto& cd : cells(nu)) {
            long long sum = cd.base[0] + cd.base[1] + cd.base[2];
            CHECK(sum == nu - 1);
            std::set<BaryPoint> distinct(cd.corner_points.begin(), cd.corner_points.end());
            CHECK(distinct.size() == 3);
        }
}

TEST_CASE("cell maps fix corners and act as exact contractions") {
    CHECK(apply_cell_map(2, 1, corner_point(1)) == corner_point(1));
    CHECK(apply_cell_map(2, 2, corner_point(1)) == make_bary(1, 1, 0, 2));
    CHECK(apply_cell_map(3, 3, corner_point(3)) == corner_point(3));
    for (int nu = 2; nu <= 5; ++nu)
        for (int i = 1; i <= 3; ++i)
            CHECK(apply_cell_map(nu, i, corner_point(i)) == corner_point(i));
    CHECK_THROWS_AS(apply_cell_map(2, 4, corner_point(1)), ValidationError);
}

TEST_CASE("composed cell maps multiply scales") {
    BaryPoint p = corner_point(2);
    p = apply_cell_map(3, 5, p);
    p = apply_cell_map(2, 1, p);  // outermost map applied last
    CHECK(p.scale * (p.scale > 0 ? 1 : 0) <= 6);
    // an interior-ish point keeps the full product scale
    BaryPoint q = make_bary(1, 1, 1, 3);
    q = apply_cell_map(3, 4, q);
    CHECK(q.scale == 9);
    q = apply_cell_map(2, 2, q);
    CHECK(q.scale == 18);
}

TEST_CASE("level-1 network vertex sets") {
    const auto& n2 = build_level_one_network(2);
    CHECK(n2.vertices.size() == 6);
    CHECK(n2.boundary_indices == std::array<std::size_t, 3>{0, 1, 2});
    // interior ordering: midpoint opposite p3, opposite p2, opposite p1
    CHECK(n2.vertices[3] == make_bary(1, 1, 0, 2));
    CHECK(n2.vertices[4] == make_bary(1, 0, 1, 2));
    CHECK(n2.vertices[5] == make_bary(0, 1, 1, 2));

    const auto& n3 = build_level_one_network(3);
    CHECK(n3.vertices.size() == 10);

    // every scale-ν lattice point occurs as some cell corner
    for (int nu = 2; nu <= 8; ++nu) {
        const auto& net = build_level_one_network(nu);
        CHECK(net.vertices.size() == static_cast<std::size_t>((nu + 1) * (nu + 2) / 2));
        std::set<BaryPoint> from_cells;
        for (const auto& cd : cells(nu))
            for (const auto& p : cd.corner_points) from_cells.insert(p);
        std::set<BaryPoint> from_net(net.vertices.begin(), net.vertices.end());
        CHECK(from_cells == from_net);
    }
}

TEST_CASE("laplacian rows sum to zero with nonpositive off-diagonals") {
    for (int nu = 2; nu <= 7; ++nu) {
        const auto& net = build_level_one_network(nu);
        const auto& lap = net.laplacian;
        CHECK(lap.is_symmetric());
        for (std::size_t i = 0; i < lap.rows(); ++i) {
            Rational row_sum = 0;
            for (std::size_t j = 0; j < lap.cols(); ++j) {
                row_sum += lap.at(i, j);
                if (i != j) CHECK(lap.at(i, j) <= 0);
            }
            CHECK(row_sum == 0);
        }
    }
}

TEST_CASE("cell membership counts: corner 1, edge 2, interior 3") {
    for (int nu = 2; nu <= 8; ++nu) {
        const auto& net = build_level_one_network(nu);
        std::map<BaryPoint, int> membership;
        for (const auto& cd : cells(nu))
            for (const auto& p : cd.corner_points) membership[p] += 1;
        for (const auto& p : net.vertices) {
            long long f = nu / p.scale;
            std::array<long long, 3> c{p.a * f, p.b * f, p.c * f};
            int zeros = (c[0] == 0) + (c[1] == 0) + (c[2] == 0);
            int expected = zeros == 2 ? 1 : (zeros == 1 ? 2 : 3);
            CHECK(membership.at(p) == expected);
        }
    }
}

TEST_CASE("cell ordering is stable across calls") {
    std::string first = serialize_cells(5);
    std::string second = serialize_cells(5);
    CHECK(first == second);
    CHECK(!first.empty());
}
