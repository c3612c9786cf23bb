#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "axb/cavity.hpp"
#include "axb/errors.hpp"

using namespace axb;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

CavityConfig equal_split(double theta, int passes, double length = 1.0) {
    return CavityConfig{length, passes, theta, 0.5, 0.5, 0.0};
}

struct Pooled {
    double w = 0.0;
    double sy = 0.0;
    double syy = 0.0;
};

// Pools enumerated beams by their angle-lattice index.
std::map<std::int64_t, Pooled> pool_by_angle(const std::vector<BeamNode>& beams, double theta) {
    std::map<std::int64_t, Pooled> pool;
    for (const BeamNode& b : beams) {
        auto& p = pool[std::llround(b.angle / theta)];
        p.w += b.weight;
        p.sy += b.weight * b.y;
        p.syy += b.weight * b.y * b.y;
    }
    return pool;
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r = r * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return r;
}

} // namespace

TEST_CASE("two-pass tree by hand") {
    // theta = L = 1 keeps every coordinate an exact small dyadic
    const auto leaves = enumerate_exact(equal_split(1.0, 2));
    REQUIRE(leaves.size() == 4);
    // plus-plus, plus-minus, minus-plus, minus-minus
    CHECK(leaves[0].y == 2.0);
    CHECK(leaves[1].y == 1.0);
    CHECK(leaves[2].y == -1.0);
    CHECK(leaves[3].y == -2.0);
    CHECK(leaves[0].angle == 2.0);
    CHECK(leaves[1].angle == 0.0);
    CHECK(leaves[2].angle == 0.0);
    CHECK(leaves[3].angle == -2.0);
    for (const BeamNode& b : leaves) {
        CHECK(b.weight == 0.25);
        CHECK(b.depth == 2);
    }
}

TEST_CASE("tree enumeration refuses deep trees") {
    CHECK_THROWS_AS(enumerate_exact(equal_split(1.0e-9, 23)), domain_error);
    CHECK_NOTHROW(enumerate_exact(equal_split(1.0e-9, 10)));
}

TEST_CASE("lattice evolution reproduces the exact tree") {
    const double theta = 1.3e-7;
    const int passes = 16;
    const CavityConfig config = equal_split(theta, passes);

    const auto leaves = enumerate_exact(config);
    REQUIRE(leaves.size() == std::size_t{1} << passes);
    const auto pooled = pool_by_angle(leaves, theta);
    const CavityResult dp = propagate_moments(config);
    REQUIRE(dp.lattice.size() == static_cast<std::size_t>(passes) + 1);

    const double scale1 = theta * config.pass_length * passes;
    const double scale2 = scale1 * scale1;
    for (const auto& node : dp.lattice) {
        const auto it = pooled.find(node.angle_index);
        REQUIRE(it != pooled.end());
        // weights are exact dyadic rationals on both routes
        CHECK(node.weight == it->second.w);
        CHECK(node.weight == binomial(passes, static_cast<int>((node.angle_index + passes) / 2)) /
                                 65536.0);
        CHECK(std::fabs(node.mean_y - it->second.sy / it->second.w) < 1e-10 * scale1);
        CHECK(std::fabs(node.m2_y - it->second.syy / it->second.w) < 1e-10 * scale2);
    }

    // intensity is conserved exactly at every depth on both routes
    for (int depth = 1; depth <= passes; ++depth) {
        const CavityConfig partial = equal_split(theta, depth);
        double dp_total = 0.0;
        for (const auto& node : propagate_moments(partial).lattice) dp_total += node.weight;
        CHECK(dp_total == 1.0);
        double tree_total = 0.0;
        for (const auto& b : enumerate_exact(partial)) tree_total += b.weight;
        CHECK(tree_total == 1.0);
    }
}

TEST_CASE("lattice matches the exact tree with unequal split") {
    const double theta = 2.0e-7;
    CavityConfig config = equal_split(theta, 10);
    config.weight_plus = 0.7;
    config.weight_minus = 0.3;

    const auto pooled = pool_by_angle(enumerate_exact(config), theta);
    const CavityResult dp = propagate_moments(config);
    double total = 0.0;
    for (const auto& node : dp.lattice) {
        const auto it = pooled.find(node.angle_index);
        REQUIRE(it != pooled.end());
        CHECK(rel(node.weight, it->second.w) < 1e-12);
        // the k = 0 class mean vanishes by ordering symmetry even for an
        // unequal split, so compare on the lattice scale, not relatively
        CHECK(std::fabs(node.mean_y - it->second.sy / it->second.w) < 1e-10 * theta * 10.0);
        total += node.weight;
    }
    CHECK(rel(total, 1.0) < 1e-12);
}

TEST_CASE("single unequal split moments") {
    CavityConfig config = equal_split(1.0e-6, 1, 2.0);
    config.weight_plus = 0.7;
    config.weight_minus = 0.3;
    const CavityResult r = propagate_moments(config);
    REQUIRE(r.lattice.size() == 2);
    CHECK(r.lattice[0].angle_index == -1);
    CHECK(r.lattice[1].angle_index == 1);
    CHECK(rel(r.lattice[0].weight, 0.3) < 1e-15);
    CHECK(rel(r.lattice[1].weight, 0.7) < 1e-15);
    CHECK(rel(r.lattice[0].mean_y, -1.0e-6) < 1e-15);
    CHECK(rel(r.lattice[1].mean_y, 1.0e-6) < 1e-15);
    // spread of the two-point distribution: sqrt(E y^2 - (E y)^2)
    const double mean = 0.4e-6;
    const double expected = std::sqrt(1.0e-12 - mean * mean);
    REQUIRE(r.report.checkpoints.size() == 1);
    CHECK(rel(r.report.checkpoints[0].spread, expected) < 1e-12);
}

TEST_CASE("lattice mirror symmetry under equal split") {
    const CavityResult r = propagate_moments(equal_split(1.0e-7, 31));
    const std::size_t size = r.lattice.size();
    REQUIRE(size == 32);
    for (std::size_t j = 0; j < size; ++j) {
        const auto& a = r.lattice[j];
        const auto& b = r.lattice[size - 1 - j];
        CHECK(a.angle_index == -b.angle_index);
        CHECK(a.weight == b.weight);
        CHECK(a.mean_y == -b.mean_y);
        CHECK(a.m2_y == b.m2_y);
    }
}

TEST_CASE("equal-split spread matches the closed form") {
    // theta L sqrt(N(4N^2-1)/12), exact for every N
    const double theta = 1.3e-7;
    const CavityResult r16 = propagate_moments(equal_split(theta, 16));
    CHECK(rel(affine_walk_std(theta, 1.0, 16), theta * 36.932370625238775755) < 1e-14);
    CHECK(rel(r16.report.std_y, theta * 36.932370625238775755) < 1e-12);

    for (int n : {1, 2, 7, 100}) {
        const CavityResult r = propagate_moments(equal_split(theta, n));
        CHECK(rel(r.report.std_y, affine_walk_std(theta, 1.0, n)) < 1e-11);
    }
}

TEST_CASE("bench-scale cavity spread") {
    // per-pass kick 7.9032e-16 rad, 1e4 passes of 1 m
    const double theta = 7.9032079273476485832e-16;
    const CavityResult r = propagate_moments(equal_split(theta, 10000));
    CHECK(rel(r.report.std_y, 4.5629192186121001774e-10) < 1e-9);
    CHECK(rel(r.report.std_y, affine_walk_std(theta, 1.0, 10000)) < 1e-9);
    CHECK(r.report.checkpoints.back().z_total == 10000.0);
    CHECK(r.report.std_y == r.report.checkpoints.back().spread);

    // mean separation approaches the folded-normal value of the whole bundle
    const double folded = r.report.std_y * std::sqrt(2.0 / 3.14159265358979323846);
    CHECK(rel(r.report.weighted_separation, folded) < 1e-3);
    CHECK(r.report.weighted_separation > 1e-10);
    CHECK(r.report.weighted_separation < 1e-8);

    // growth exponent between linear and ballistic-diffusive
    CHECK(r.report.fitted_exponent > 1.35);
    CHECK(r.report.fitted_exponent < 1.65);
    CHECK(r.report.fit_residual < 0.05);
}

TEST_CASE("growth exponent at a shorter cavity") {
    const CavityResult r = propagate_moments(equal_split(1.0e-9, 2000));
    CHECK(r.report.fitted_exponent > 1.4);
    CHECK(r.report.fitted_exponent < 1.6);
}

TEST_CASE("mean separation, exact versus pooled at shallow depth") {
    const CavityConfig config = equal_split(1.3e-7, 16);
    const double exact = weighted_separation(enumerate_exact(config));
    const double pooled = weighted_separation(propagate_moments(config).lattice);
    CHECK(rel(pooled, exact) < 0.05);
}

TEST_CASE("folded normal mean") {
    CHECK(folded_normal_mean(0.0, 1.0) == std::sqrt(2.0 / 3.14159265358979323846));
    CHECK(folded_normal_mean(3.5, 0.0) == 3.5);
    CHECK(folded_normal_mean(-3.5, 0.0) == 3.5);
    // E|X| for X ~ N(1, 1)
    CHECK(rel(folded_normal_mean(1.0, 1.0), 1.1666309411753726) < 1e-12);
    // far from zero the fold is invisible
    CHECK(rel(folded_normal_mean(8.0, 1.0), 8.0) < 1e-12);
}

TEST_CASE("no-resplitting control grows linearly") {
    const CavityConfig config = equal_split(1.0e-9, 10000);
    const auto control = two_beam_control_checkpoints(config);
    REQUIRE(control.size() >= 10);
    for (const auto& c : control) {
        CHECK(c.spread == 0.5 * config.theta_mode * c.z_total);
    }
    CHECK(control.back().z_total == 10000.0);
    const GrowthFit fit = fit_growth_exponent(control);
    CHECK(std::fabs(fit.exponent - 1.0) < 1e-12);
    CHECK(fit.residual < 1e-12);
}

TEST_CASE("growth fit recovers a synthetic power law") {
    std::vector<SpreadCheckpoint> pts;
    for (int i = 0; i <= 20; ++i) {
        const double z = std::pow(10.0, static_cast<double>(i) / 5.0);  // 1 .. 1e4
        pts.push_back(SpreadCheckpoint{z, 3.0 * std::pow(z, 1.4)});
    }
    const GrowthFit fit = fit_growth_exponent(pts);
    CHECK(rel(fit.exponent, 1.4) < 1e-12);
    CHECK(fit.residual < 1e-12);
}

TEST_CASE("growth fit input validation") {
    std::vector<SpreadCheckpoint> two{{1.0, 1.0}, {200.0, 10.0}};
    CHECK_THROWS_AS(fit_growth_exponent(two), domain_error);
    std::vector<SpreadCheckpoint> narrow{{1.0, 1.0}, {2.0, 2.0}, {3.0, 3.0}};
    CHECK_THROWS_AS(fit_growth_exponent(narrow), domain_error);
    std::vector<SpreadCheckpoint> flat{{1.0, 1.0}, {10.0, 0.0}, {200.0, 5.0}};
    CHECK_THROWS_AS(fit_growth_exponent(flat), degenerate_error);
    std::vector<SpreadCheckpoint> bad_z{{0.0, 1.0}, {10.0, 2.0}, {200.0, 5.0}};
    CHECK_THROWS_AS(fit_growth_exponent(bad_z), domain_error);
}

TEST_CASE("mirror loss drains intensity uniformly") {
    const double loss = 0.01;
    CavityConfig lossy = equal_split(1.0e-7, 20);
    lossy.axion_loss = loss;
    const CavityResult with = propagate_moments(lossy);
    const CavityResult without = propagate_moments(equal_split(1.0e-7, 20));

    double total = 0.0;
    for (const auto& node : with.lattice) total += node.weight;
    CHECK(rel(total, std::pow(1.0 - loss, 20)) < 1e-12);

    // uniform loss rescales weights only; the shape is untouched
    REQUIRE(with.lattice.size() == without.lattice.size());
    for (std::size_t j = 0; j < with.lattice.size(); ++j) {
        CHECK(rel(with.lattice[j].weight, std::pow(1.0 - loss, 20) * without.lattice[j].weight) <
              1e-12);
        if (without.lattice[j].mean_y != 0.0) {
            CHECK(rel(with.lattice[j].mean_y, without.lattice[j].mean_y) < 1e-12);
        }
        CHECK(rel(with.lattice[j].m2_y, without.lattice[j].m2_y) < 1e-12);
    }
    REQUIRE(with.report.checkpoints.size() == without.report.checkpoints.size());
    for (std::size_t i = 0; i < with.report.checkpoints.size(); ++i) {
        CHECK(rel(with.report.checkpoints[i].spread, without.report.checkpoints[i].spread) <
              1e-12);
    }

    const auto leaves = enumerate_exact(lossy);
    double tree_total = 0.0;
    for (const auto& b : leaves) tree_total += b.weight;
    // naive summation over 2^20 leaves accumulates ~1e-11 of roundoff
    CHECK(rel(tree_total, std::pow(1.0 - loss, 20)) < 1e-10);
}

TEST_CASE("cavity configuration validation") {
    CHECK_THROWS_WITH(check(CavityConfig{1.0, 10, 1e-9, 0.7, 0.7, 0.0}),
                      Catch::Matchers::ContainsSubstring("sum to 1"));
    CHECK_THROWS_AS(check(CavityConfig{0.0, 10, 1e-9, 0.5, 0.5, 0.0}), domain_error);
    CHECK_THROWS_AS(check(CavityConfig{1.0, 0, 1e-9, 0.5, 0.5, 0.0}), domain_error);
    CHECK_THROWS_AS(check(CavityConfig{1.0, 10, -1e-9, 0.5, 0.5, 0.0}), domain_error);
    CHECK_THROWS_AS(check(CavityConfig{1.0, 10, 1e-9, -0.1, 1.1, 0.0}), domain_error);
    CHECK_THROWS_AS(check(CavityConfig{1.0, 10, 1e-9, 0.5, 0.5, 1.0}), domain_error);
    CHECK_THROWS_AS(check(CavityConfig{1.0, 10, 1e-9, 0.5, 0.5, -0.1}), domain_error);
    CHECK_NOTHROW(check(CavityConfig{1.0, 10, 0.0, 0.5, 0.5, 0.0}));
}
