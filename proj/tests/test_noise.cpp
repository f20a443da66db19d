#include "doctest.h"

#include <cmath>

#include "rmf/errors.hpp"
#include "rmf/noise.hpp"
#include "rmf/random.hpp"
#include "support.hpp"

using namespace rmf;

TEST_CASE("derived seeds are distinct and reproducible") {
    CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
    CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
    CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
    GaussianStream a(7), b(7);
    for (int i = 0; i < 10; ++i) CHECK(a() == b());
}

TEST_CASE("steps_for rounds to the nearest step") {
    CHECK(steps_for(8.0, 0.02) == 400);
    CHECK(steps_for(8.0, 0.02 / 400) == 160000);
    CHECK(steps_for(1e-9, 0.1) == 1);
}

TEST_CASE("Brownian increments have variance dt") {
    NoiseGridSpec spec;
    spec.t_end = 8.0;
    spec.dt_fine = 1e-3;
    spec.seed = 3;
    const auto g = generate_noise_grid(spec);
    REQUIRE(g.n_steps == 8000);
    for (const auto* v : {&g.dV, &g.dW, &g.dU}) {
        const double var = testing::variance(*v);
        CHECK(std::abs(var / spec.dt_fine - 1.0) < 0.05);
        CHECK(std::abs(testing::mean(*v)) < 4.0 * std::sqrt(spec.dt_fine / 8000.0));
    }
}

TEST_CASE("extensions leave the main window unchanged") {
    NoiseGridSpec spec;
    spec.t_end = 1.0;
    spec.dt_fine = 1e-3;
    spec.seed = 11;
    const auto plain = generate_noise_grid(spec);
    spec.future_ext = 500;
    spec.history_ext = 300;
    const auto ext = generate_noise_grid(spec);
    CHECK(ext.t0 == doctest::Approx(-0.3));
    CHECK(ext.origin() == 300);
    for (std::size_t k = 0; k < plain.n_steps; ++k) {
        const auto kk = static_cast<std::ptrdiff_t>(k);
        REQUIRE(plain.dV_at(kk)[0] == ext.dV_at(kk)[0]);
        REQUIRE(plain.dW_at(kk)[0] == ext.dW_at(kk)[0]);
        REQUIRE(plain.dU_at(kk) == ext.dU_at(kk));
    }
    CHECK(ext.dV_at(-1)[0] != 0.0);
}

TEST_CASE("noise grid rejects bad steps") {
    NoiseGridSpec spec;
    spec.dt_fine = 0.0;
    CHECK_THROWS_AS(generate_noise_grid(spec), ParameterError);
    spec.dt_fine = 0.01;
    spec.t_end = -1.0;
    CHECK_THROWS_AS(generate_noise_grid(spec), ParameterError);
}
