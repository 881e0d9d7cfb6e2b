#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "filtlab/serialize.hpp"
#include "filtlab/simulate.hpp"
#include "filtlab/stats.hpp"

using namespace filtlab;

TEST_CASE("uniform grid arithmetic") {
    TimeGrid g = make_uniform_grid(1.0, 4);
    REQUIRE(g.size() == 5);
    CHECK(g[0] == doctest::Approx(0.0));
    CHECK(g[1] == doctest::Approx(0.25));
    CHECK(g[2] == doctest::Approx(0.5));
    CHECK(g[3] == doctest::Approx(0.75));
    CHECK(g[4] == doctest::Approx(1.0));
    CHECK(g.horizon() == doctest::Approx(1.0));
    CHECK(g.mesh() == doctest::Approx(0.25));
    CHECK(g.is_reversible());

    TimeGrid two = make_uniform_grid(1.0, 1);
    CHECK(two.size() == 2);
    CHECK(two[1] == doctest::Approx(1.0));

    TimeGrid half = make_uniform_grid(0.5, 2);
    CHECK(half[1] == doctest::Approx(0.25));
    CHECK(half[2] == doctest::Approx(0.5));

    CHECK_THROWS_AS(make_uniform_grid(0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(make_uniform_grid(1.0, 0), std::invalid_argument);
}

TEST_CASE("uniform subdivision refines the fine grid") {
    TimeGrid fine = make_uniform_grid(1.0, 16);
    Subdivision sub = make_uniform_subdivision(fine, 4);
    REQUIRE(sub.size() == 5);
    CHECK(sub[0] == 0);
    CHECK(sub[4] == 16);
    CHECK(sub.block_of(0) == 0);
    CHECK(sub.block_of(3) == 0);
    CHECK(sub.block_of(4) == 1);
    Subdivision finer = make_uniform_subdivision(fine, 8);
    CHECK(finer.refines(sub));
}

TEST_CASE("brownian ensemble moments and determinism") {
    TimeGrid g = make_uniform_grid(1.0, 4);
    const std::size_t n = 100000;
    PathEnsemble B = simulate_bm(g, n, 7);

    double sum = 0.0, sumsq = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        const double v = B(p, 4);
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) <= 4.0 / std::sqrt(double(n)));
    CHECK(var >= 0.99);
    CHECK(var <= 1.01);

    PathEnsemble B2 = simulate_bm(g, n, 7);
    CHECK(B.same_values(B2));
    for (std::size_t p = 0; p < n; ++p) CHECK(B(p, 0) == 0.0);
}

TEST_CASE("euler-maruyama degenerate cases and driver coupling") {
    TimeGrid g = make_uniform_grid(1.0, 8);

    DiffusionModel still = constant_model(0.0, 0.0);
    PathEnsemble flat = simulate_diffusion_em(still, g, 1.0, 5, 3);
    for (std::size_t p = 0; p < 5; ++p)
        for (std::size_t k = 0; k < g.size(); ++k) CHECK(flat(p, k) == 1.0);

    DiffusionModel ode = constant_model(1.0, 0.0);
    PathEnsemble line = simulate_diffusion_em(ode, g, 0.0, 2, 3);
    for (std::size_t k = 0; k < g.size(); ++k)
        CHECK(line(0, k) == doctest::Approx(g[k]).epsilon(1e-14));

    // sigma = 1, b = 0: output is the driving BM bitwise.
    PathEnsemble X = simulate_diffusion_em(brownian_model(), g, 0.0, 50, 11);
    PathEnsemble B = simulate_bm(g, 50, 11);
    CHECK(X.same_values(B));

    DiffusionModel blowup = constant_model(0.0, 1.0);
    blowup.b = [](double, double x) { return x * 1e200; };
    CHECK_THROWS_AS(simulate_diffusion_em(blowup, g, 1.0, 4, 1), SimulationDiverged);
}

TEST_CASE("bessel-3 terminal mean matches chi-3 and brute-force oracle") {
    TimeGrid g = make_uniform_grid(1.0, 4);
    const std::size_t n = 100000;
    PathEnsemble Z = simulate_bessel3(g, n, 17);

    std::vector<double> z1(n);
    for (std::size_t p = 0; p < n; ++p) {
        CHECK(Z(p, 0) == 0.0);
        for (std::size_t k = 0; k < g.size(); ++k) REQUIRE(Z(p, k) >= 0.0);
        z1[p] = Z(p, g.size() - 1);
    }
    MeanCI mc = mean_ci(z1);
    const double chi3 = 2.0 * std::sqrt(2.0 / M_PI);
    CHECK(std::abs(mc.mean - chi3) <= 2.0 * mc.halfwidth95);

    // Independent oracle: norm of three standard Gaussians.
    std::mt19937_64 rng(99);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> brute(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = normal(rng), b = normal(rng), c = normal(rng);
        brute[i] = std::sqrt(a * a + b * b + c * c);
    }
    MeanCI oracle = mean_ci(brute);
    CHECK(std::abs(mc.mean - oracle.mean) <= mc.halfwidth95 + oracle.halfwidth95);
}

TEST_CASE("path reversal") {
    TimeGrid g = make_uniform_grid(1.0, 2);
    SamplePath p(g, {0.0, 1.0, 2.0});
    SamplePath r = reverse_path(p, 1.0);
    CHECK(r.values == std::vector<double>{2.0, 1.0, 0.0});
    SamplePath rr = reverse_path(r, 1.0);
    CHECK(rr.values == p.values);

    SamplePath c(g, {3.0, 3.0, 3.0});
    CHECK(reverse_path(c, 1.0).values == c.values);

    TimeGrid skew(std::vector<double>{0.0, 0.1, 1.0});
    SamplePath bad(skew, {0.0, 1.0, 2.0});
    CHECK_THROWS_AS(reverse_path(bad, 1.0), std::invalid_argument);
}

TEST_CASE("future infimum") {
    TimeGrid g = make_uniform_grid(1.0, 3);
    SamplePath p(g, {3.0, 1.0, 2.0, 5.0});
    SamplePath x = future_infimum(p, TailRule::none);
    CHECK(x.values == std::vector<double>{1.0, 1.0, 2.0, 5.0});

    SamplePath inc(g, {0.0, 1.0, 2.0, 3.0});
    CHECK(future_infimum(inc, TailRule::none).values == inc.values);

    // Exact tail on a constant path: the last value averages to z/2 over the
    // uniform draw.
    const double z = 1.7;
    SamplePath flat(g, {z, z, z, z});
    const std::size_t n = 2000;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        sum += future_infimum(flat, TailRule::exact_bessel3, (i + 0.5) / n).values.back();
    CHECK(sum / n == doctest::Approx(z / 2.0).epsilon(1e-6));

    SamplePath neg(g, {1.0, -0.5, 1.0, 1.0});
    CHECK_THROWS_AS(future_infimum(neg, TailRule::exact_bessel3, 0.5), std::invalid_argument);
}

TEST_CASE("bridge-refined future infimum stays below the grid-point version") {
    TimeGrid g = make_uniform_grid(1.0, 64);
    PathEnsemble Z = simulate_bessel3(g, 50, 5);
    PathEnsemble grid_min = future_infimum_ensemble(Z, TailRule::exact_bessel3, 5);
    PathEnsemble refined = future_infimum_bridge_ensemble(Z, TailRule::exact_bessel3, 5);
    for (std::size_t p = 0; p < 50; ++p) {
        for (std::size_t k = 0; k < g.size(); ++k) {
            CHECK(refined(p, k) <= grid_min(p, k) + 1e-15);
            CHECK(refined(p, k) >= 0.0);
            CHECK(refined(p, k) <= Z(p, k) + 1e-15);
            if (k > 0) CHECK(refined(p, k) >= refined(p, k - 1) - 1e-15);
        }
        // Both share the same tail draw at the horizon.
        CHECK(refined(p, g.size() - 1) == grid_min(p, g.size() - 1));
    }
}

TEST_CASE("piecewise-constant discretization") {
    TimeGrid fine = make_uniform_grid(1.0, 4);
    SamplePath p(fine, {0.0, 1.0, 2.0, 3.0, 4.0});
    Subdivision sub(fine, {0, 2, 4});
    SamplePath d = discretize_path(p, sub);
    CHECK(d.values == std::vector<double>{0.0, 0.0, 2.0, 2.0, 4.0});

    Subdivision full(fine, {0, 1, 2, 3, 4});
    CHECK(discretize_path(p, full).values == p.values);

    SamplePath c(fine, {5.0, 5.0, 5.0, 5.0, 5.0});
    CHECK(discretize_path(c, sub).values == c.values);
}

TEST_CASE("reciprocal time integral quadrature and skip counter") {
    TimeGrid g = make_uniform_grid(1.0, 8);
    SamplePath flat(g, std::vector<double>(9, 2.0));
    SamplePath I = reciprocal_time_integral(flat);
    CHECK(I.values.back() == doctest::Approx(0.5).epsilon(1e-14));

    // An interior zero is skipped in both trapezoid legs that touch it.
    std::vector<double> v(9, 1.0);
    v[4] = 0.0;
    std::size_t skipped = 0;
    SamplePath J = reciprocal_time_integral(SamplePath(g, v), &skipped);
    CHECK(skipped == 2);
    CHECK(J.values.back() == doctest::Approx(1.0 - 0.125).epsilon(1e-14));

    // A zero at the entrance boundary never enters the quadrature: the first
    // interval is estimated from its right endpoint.
    std::vector<double> w(9, 1.0);
    w[0] = 0.0;
    std::size_t skipped0 = 0;
    SamplePath K = reciprocal_time_integral(SamplePath(g, w), &skipped0);
    CHECK(skipped0 == 0);
    CHECK(K.values.back() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("binary ensemble round trip") {
    TimeGrid g = make_uniform_grid(1.0, 16);
    PathEnsemble B = simulate_bm(g, 20, 123);
    const std::string file = "roundtrip_test.flens";
    write_ensemble_binary(file, B);
    PathEnsemble back = read_ensemble_binary(file);
    CHECK(back.same_values(B));
    CHECK(back.grid() == B.grid());
    std::remove(file.c_str());
}
