#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <gasket/constants.hpp>
#include <gasket/renorm.hpp>
#include <gasket/rng.hpp>

#include <cmath>
#include <set>

using namespace gasket;

namespace {

RationalVector random_vector(SplitMix64& rng) {
    RationalVector x(3);
    for (auto& c : x) {
        long num = static_cast<long>(rng.next_below(41)) - 20;
        long den = 1 + static_cast<long>(rng.next_below(12));
        c = Rational(num, den);
    }
    return x;
}

}  // namespace

TEST_CASE("corner operator and quadratic form") {
    RationalMatrix d = corner_operator();
    CHECK(d == RationalMatrix{{-2, 1, 1}, {1, -2, 1}, {1, 1, -2}});
    // Q(x,y) = (-Dx, y); Q(x) = Q(x,x)
    RationalVector x{1, 0, 0};
    CHECK(q_value(x) == Rational(2));
    RationalVector ones{1, 1, 1};
    CHECK(q_value(ones) == 0);  // constants are null directions
    SplitMix64 rng(0x51u);
    for (int t = 0; t < 50; ++t) {
        RationalVector a = random_vector(rng), b = random_vector(rng);
        CHECK(q_bilinear(a, b) == q_bilinear(b, a));
        CHECK(q_value(a) >= 0);
        // polarization
        RationalVector sum{a[0] + b[0], a[1] + b[1], a[2] + b[2]};
        CHECK(q_value(sum) == q_value(a) + 2 * q_bilinear(a, b) + q_value(b));
    }
}

TEST_CASE("resistance scaling constants") {
    CHECK(renormalization_constant(2) == Rational(3, 5));
    CHECK(renormalization_constant(3) == Rational(7, 15));
    CHECK(renormalization_constant(4) == Rational(41, 103));
}

TEST_CASE("r bounds 1/nu < r < N/nu^2 for all levels") {
    for (int nu = 2; nu <= kMaxLevel; ++nu) {
        RBoundsReport rep = verify_r_bounds(nu);
        CHECK(rep.pass);
        CHECK(rep.lower == Rational(1, nu));
        CHECK(rep.upper == Rational(cell_count(nu), nu * nu));
        CHECK(rep.lower < rep.r);
        CHECK(rep.r < rep.upper);
    }
    // spot values
    CHECK(verify_r_bounds(2).upper == Rational(3, 4));
    CHECK(verify_r_bounds(3).upper == Rational(6, 9));
    CHECK(verify_r_bounds(4).upper == Rational(10, 16));
}

TEST_CASE("level-2 extension matrices match the hand-solved network") {
    auto mats = extension_matrices(2);
    REQUIRE(mats.size() == 3);
    RationalMatrix a1{{1, 0, 0},
                      {Rational(2, 5), Rational(2, 5), Rational(1, 5)},
                      {Rational(2, 5), Rational(1, 5), Rational(2, 5)}};
    CHECK(mats[0].matrix == a1);
    CHECK(mats[0].cell == 1);
    // the other two are index permutations of A_1
    RationalMatrix a2{{Rational(2, 5), Rational(2, 5), Rational(1, 5)},
                      {0, 1, 0},
                      {Rational(1, 5), Rational(2, 5), Rational(2, 5)}};
    CHECK(mats[1].matrix == a2);
    RationalMatrix a3{{Rational(2, 5), Rational(1, 5), Rational(2, 5)},
                      {Rational(1, 5), Rational(2, 5), Rational(2, 5)},
                      {0, 0, 1}};
    CHECK(mats[2].matrix == a3);
}

TEST_CASE("extension matrix counts and row stochasticity") {
    for (int nu : {2, 3, 4, 5}) {
        auto mats = extension_matrices(nu);
        CHECK(static_cast<int>(mats.size()) == cell_count(nu));
        for (const auto& em : mats) {
            CHECK(em.level == nu);
            for (int row = 0; row < 3; ++row) {
                Rational sum = 0;
                for (int col = 0; col < 3; ++col) sum += em.matrix.at(row, col);
                CHECK(sum == 1);
            }
        }
    }
}

TEST_CASE("corner rows are unit rows") {
    // cell i contains corner p_i, whose harmonic value is the boundary value
    for (int nu : {2, 3, 4}) {
        auto mats = extension_matrices(nu);
        for (int i = 0; i < 3; ++i) {
            for (int col = 0; col < 3; ++col)
                CHECK(mats[i].matrix.at(i, col) == (col == i ? 1 : 0));
        }
    }
}

TEST_CASE("energy decomposition across one subdivision") {
    // Q(x) = sum_i r^-1 Q(A_i x): harmonic extension splits the form exactly
    for (int nu : {2, 3, 4}) {
        auto mats = extension_matrices(nu);
        const Rational& r = renormalization_constant(nu);
        SplitMix64 rng(0x9000u + nu);
        for (int t = 0; t < 100; ++t) {
            RationalVector x = random_vector(rng);
            Rational total = 0;
            for (const auto& em : mats) total += q_value(mat_vec(em.matrix, x));
            CHECK(total == r * q_value(x));
        }
        RationalVector e1{1, 0, 0};
        Rational total = 0;
        for (const auto& em : mats) total += q_value(mat_vec(em.matrix, e1));
        CHECK(total == r * 2);
    }
}

TEST_CASE("spectral data for level 2") {
    SpectralData sd = spectral_data(2);
    CHECK(sd.r == Rational(3, 5));
    CHECK(sd.s == Rational(1, 5));
    CHECK(sd.u[0] == RationalVector{-2, 1, 1});
    CHECK(sd.v[0] == RationalVector{0, Rational(1, 2), Rational(1, 2)});
    CHECK(sd.v_tilde[0] == RationalVector{0, 1, 1});
    CHECK(sd.y[0] == RationalVector{0, 1, -1});
}

TEST_CASE("eigen structure of corner extension matrices") {
    for (int nu = 2; nu <= 6; ++nu) {
        SpectralData sd = spectral_data(nu);
        auto mats = extension_matrices(nu);
        CHECK(abs(sd.s) < sd.r);
        for (int i = 0; i < 3; ++i) {
            const RationalMatrix& a = mats[i].matrix;
            RationalVector ones{1, 1, 1};
            CHECK(mat_vec(a, ones) == ones);
            // A_i v~_i = r v~_i ; A_i y_i = s y_i ; A_i^T u_i = r u_i
            RationalVector av = mat_vec(a, sd.v_tilde[i]);
            RationalVector ay = mat_vec(a, sd.y[i]);
            RationalVector atu = mat_vec(a.transposed(), sd.u[i]);
            for (int c = 0; c < 3; ++c) {
                CHECK(av[c] == sd.r * sd.v_tilde[i][c]);
                CHECK(ay[c] == sd.s * sd.y[i][c]);
                CHECK(atu[c] == sd.r * sd.u[i][c]);
            }
            // pairings
            CHECK(dot(sd.u[i], ones) == 0);
            CHECK(dot(sd.u[i], sd.y[i]) == 0);
            CHECK(dot(sd.u[i], sd.v[i]) == 1);
            for (int j = 0; j < 3; ++j)
                if (j != i) CHECK(dot(sd.u[i], sd.v[j]) == Rational(-1, 2));
        }
    }
}

TEST_CASE("u_i spans measure-relevant pairings") {
    // (u_i, x) = (column i of D, x) = (Dx)_i by symmetry of D
    SpectralData sd = spectral_data(2);
    RationalMatrix d = corner_operator();
    SplitMix64 rng(0xabcu);
    for (int t = 0; t < 40; ++t) {
        RationalVector x = random_vector(rng);
        RationalVector dx = mat_vec(d, x);
        for (int i = 0; i < 3; ++i) CHECK(dot(sd.u[i], x) == dx[i]);
    }
}

TEST_CASE("Q is constant across the v_i") {
    for (int nu : {2, 3, 5}) {
        SpectralData sd = spectral_data(nu);
        Rational q0 = q_value(sd.v[0]);
        CHECK(q_value(sd.v[1]) == q0);
        CHECK(q_value(sd.v[2]) == q0);
        CHECK(q0 == Rational(1, 2));  // 2 Q(v_i) = 1
    }
}

TEST_CASE("harmonic extension attains the subdivision minimum") {
    // For boundary data x, any competitor assignment of interior values has
    // energy >= r^-1 * (sum of cell energies of the harmonic one).
    const int nu = 2;
    const LevelOneNetwork& net = build_level_one_network(nu);
    SplitMix64 rng(0x77u);
    for (int t = 0; t < 30; ++t) {
        RationalVector x = random_vector(rng);
        std::vector<Rational> values(net.vertices.size());
        for (int b = 0; b < 3; ++b) values[net.boundary_indices[b]] = x[b];
        // harmonic interior values via the extension matrices: read each cell
        auto mats = extension_matrices(nu);
        for (std::size_t c = 0; c < mats.size(); ++c) {
            RationalVector vals = mat_vec(mats[c].matrix, x);
            for (int k = 0; k < 3; ++k) values[net.cell_vertices[c][k]] = vals[k];
        }
        auto network_energy = [&](const std::vector<Rational>& v) {
            Rational e = 0;
            for (std::size_t a = 0; a < net.vertices.size(); ++a)
                for (std::size_t b = a + 1; b < net.vertices.size(); ++b)
                    if (net.laplacian.at(a, b) != 0)
                        e += -net.laplacian.at(a, b) * (v[a] - v[b]) * (v[a] - v[b]);
            return e;
        };
        Rational harmonic = network_energy(values);
        CHECK(harmonic == q_value(x) * renormalization_constant(nu));
        // perturb one interior vertex
        std::vector<Rational> perturbed = values;
        std::set<int> boundary(net.boundary_indices.begin(), net.boundary_indices.end());
        for (std::size_t vtx = 0; vtx < values.size(); ++vtx) {
            if (boundary.count(static_cast<int>(vtx))) continue;
            perturbed[vtx] += Rational(1, 7);
            CHECK(network_energy(perturbed) >= harmonic);
            perturbed[vtx] = values[vtx];
        }
    }
}

TEST_CASE("level argument validation") {
    CHECK_THROWS_AS(renormalization_constant(1), ValidationError);
    CHECK_THROWS_AS(extension_matrices(13), ValidationError);
    CHECK_THROWS_AS(spectral_data(0), ValidationError);
}

TEST_CASE("unit-energy shell sampling is exact") {
    SplitMix64 rng(0x5e11u);
    std::set<RationalVector> seen;
    for (int t = 0; t < 1000; ++t) {
        RationalVector x = sample_unit_energy(rng);
        CHECK(2 * q_value(x) == 1);
        CHECK(corner_pairing_sum(x) == Rational(3, 2));  // φ is constant on the shell
        seen.insert(x);
    }
    CHECK(seen.size() > 900);  // the sampler actually moves around
}

TEST_CASE("pairing sum is three times the energy form everywhere") {
    SplitMix64 rng(0x3Fu);
    for (int t = 0; t < 200; ++t) {
        RationalVector x = random_vector(rng);
        CHECK(corner_pairing_sum(x) == 3 * q_value(x));
    }
}

TEST_CASE("log-gap helper honors the empty-set convention") {
    LogGapInfo empty = log_gap_from_pairs({});
    CHECK(empty.vacuous);
    CHECK(empty.value == 1.0);
    CHECK(empty.extremal_ratio == 1);

    LogGapInfo all_equal = log_gap_from_pairs({{Letter{1, 2}, Rational(1)}});
    CHECK(all_equal.vacuous);
    CHECK(all_equal.value == 1.0);

    // ratios 9/5 and 5/9 have the same log distance; 3 loses
    LogGapInfo mixed = log_gap_from_pairs(
        {{Letter{1, 2}, Rational(3)}, {Letter{2, 2}, Rational(5, 9)}, {Letter{3, 2}, 1}});
    CHECK_FALSE(mixed.vacuous);
    CHECK(mixed.extremal_ratio == Rational(9, 5));
    CHECK(mixed.witness == Letter{2, 2});
    CHECK(mixed.value == doctest::Approx(std::log(1.8)).epsilon(1e-12));
    CHECK_THROWS_AS(log_gap_from_pairs({{Letter{1, 2}, Rational(-1)}}), ValidationError);
}

TEST_CASE("constants table for the uniform level-2 family") {
    ConstantsTable t = constants_table({2}, WeightSystem::uniform({2}));
    CHECK(t.pairing_min == Rational(1, 2));
    CHECK_FALSE(t.log_gap.vacuous);
    CHECK(t.log_gap.extremal_ratio == Rational(9, 5));  // r/q = (3/5)/(1/3)
    CHECK(t.weight_min == Rational(1, 3));
    CHECK(t.resistance_min == Rational(3, 5));
    CHECK(t.unit_pairing_norm == 1);
    CHECK(t.pairing_sum_value == Rational(3, 2));
    CHECK(t.corner_gap == Rational(1, 2));
    CHECK(t.shell_cover_bound == Rational(1, 2));
    CHECK(t.spectral_ratio == Rational(1, 3));  // (1/5)/(3/5)
}

TEST_CASE("constants table across a mixed family") {
    WeightSystem q = WeightSystem::uniform({2, 3});
    ConstantsTable t = constants_table({2, 3}, q);
    CHECK(t.weight_min == Rational(1, 6));
    CHECK(t.resistance_min == Rational(7, 15));
    CHECK(t.spectral_ratio < 1);
    // theta matches the per-level maximum of |s|/r
    Rational expect = 0;
    for (int nu : {2, 3}) {
        SpectralData sd = spectral_data(nu);
        Rational ratio = abs(sd.s) / sd.r;
        if (ratio > expect) expect = ratio;
    }
    CHECK(t.spectral_ratio == expect);
    CHECK_THROWS_AS(constants_table({2, 4}, q), ValidationError);  // q lacks level 4
}

TEST_CASE("exact normalization onto the unit-energy shell") {
    RationalVector h = normalize_to_energy_shell({1, 0, 0});
    CHECK(h == RationalVector{Rational(1, 2), 0, 0});
    CHECK(2 * q_value(h) == 1);

    // 2Q((3,1,1)) = 16, a perfect square
    RationalVector g = normalize_to_energy_shell({3, 1, 1});
    CHECK(g == RationalVector{Rational(3, 4), Rational(1, 4), Rational(1, 4)});

    // already on the shell: returned unchanged
    SplitMix64 rng(0x77);
    for (int i = 0; i < 50; ++i) {
        RationalVector x = sample_unit_energy(rng);
        CHECK(normalize_to_energy_shell(x) == x);
    }

    // scaling a shell point by any rational is always reversible
    for (int i = 0; i < 50; ++i) {
        RationalVector x = sample_unit_energy(rng);
        Rational c(static_cast<long>(rng.next_below(50)) + 1,
                   static_cast<long>(rng.next_below(50)) + 1);
        RationalVector scaled{x[0] * c, x[1] * c, x[2] * c};
        CHECK(normalize_to_energy_shell(scaled) == x);
    }

    // 2Q((2,1,0)) = 12 is not a squared rational
    CHECK_THROWS_AS(normalize_to_energy_shell({2, 1, 0}), ValidationError);
    // constant vectors carry no energy
    CHECK_THROWS_AS(normalize_to_energy_shell({1, 1, 1}), ValidationError);
    CHECK_THROWS_AS(normalize_to_energy_shell({1, 0}), ValidationError);
}
