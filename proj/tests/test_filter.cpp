#include "doctest.h"

#include <cmath>
#include <numeric>
#include <vector>

#include "rmf/ensemble.hpp"
#include "rmf/errors.hpp"
#include "rmf/filter.hpp"
#include "rmf/kalman.hpp"
#include "rmf/kernels.hpp"
#include "rmf/noise.hpp"
#include "rmf/sde.hpp"
#include "support.hpp"

using namespace rmf;

namespace {

ObservationPath noise_only_path(std::size_t steps, double dt, std::uint64_t seed, double drift = 0.0) {
    ObservationPath obs;
    obs.dt = dt;
    obs.dr.resize(steps);
    obs.r.assign(steps + 1, 0.0);
    obs.times.resize(steps + 1);
    GaussianStream g(seed);
    for (std::size_t k = 0; k < steps; ++k) {
        obs.dr[k] = drift * dt + std::sqrt(dt) * g();
        obs.r[k + 1] = obs.r[k] + obs.dr[k];
        obs.times[k + 1] = static_cast<double>(k + 1) * dt;
    }
    return obs;
}

FilterSetup small_setup(Flavor flavor, Execution ex) {
    FilterSetup s;
    s.flavor = flavor;
    s.params = {40, 400, 0.02, 0.2, 17};
    s.prior = dirac_prior({1.0}, {1.0});
    s.phi = [](std::span<const double> x) { return x[0]; };
    s.execution = ex;
    s.snapshot_steps = {5};
    return s;
}

} // namespace

TEST_CASE("deterministic resampling of weights (3, 1)") {
    const std::vector<double> w{3.0, 1.0};
    const auto idx = deterministic_resample_indices(w, 4);
    CHECK(idx == std::vector<std::size_t>{0, 0, 0, 1});
}

TEST_CASE("resampling keeps the empirical CDF within 1/n") {
    GaussianStream rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform01() * 30);
        std::vector<double> w(n);
        for (auto& v : w) v = rng.uniform01() < 0.2 ? 0.0 : std::exp(2.0 * rng());
        if (std::accumulate(w.begin(), w.end(), 0.0) == 0.0) w[0] = 1.0;
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        const auto idx = deterministic_resample_indices(w, n);
        double cum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            cum += w[j] / total;
            const auto count = static_cast<double>(std::count_if(idx.begin(), idx.end(), [&](std::size_t i) { return i <= j; }));
            REQUIRE(std::abs(count / static_cast<double>(n) - cum) <= 1.0 / static_cast<double>(n) + 1e-12);
        }
    }
}

TEST_CASE("degenerate weights are rejected") {
    const std::vector<double> w{0.0, 0.0};
    CHECK_THROWS_AS(deterministic_resample_indices(w, 2), DegenerateEnsemble);
    GaussianStream rng(1);
    auto ens = pf_init(3, 1, 1, dirac_prior({0.0}, {0.0}), Flavor::Full, rng);
    for (auto& l : ens.log_w) l = -std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(deterministic_resample(ens), DegenerateEnsemble);
}

TEST_CASE("weight update applies h dr - dt h^2 / 2 at the pre-step state") {
    GaussianStream rng(1);
    auto ens = pf_init(3, 1, 1, gaussian_prior({0.0}, 1.0, {0.0}), Flavor::Full, rng);
    const auto before = ens.x;
    const auto h = arctan_observation();
    pf_weight_update(ens, h, 0.3, 0.01);
    for (std::size_t j = 0; j < 3; ++j) {
        const double hv = std::atan(before[j]);
        CHECK(ens.log_w[j] == doctest::Approx(hv * 0.3 - 0.005 * hv * hv));
    }
}

TEST_CASE("resampling folds the mean mass into the evidence and resets weights") {
    GaussianStream rng(1);
    auto ens = pf_init(2, 1, 1, dirac_prior({0.0}, {0.0}), Flavor::Full, rng);
    ens.x = {1.0, 2.0};
    ens.log_w = {std::log(4.0), std::log(1.0)};
    deterministic_resample(ens);
    CHECK(ens.log_evidence == doctest::Approx(std::log(2.5)));
    CHECK(ens.x == std::vector<double>{1.0, 1.0});
    CHECK(ens.log_w == std::vector<double>{0.0, 0.0});
}

TEST_CASE("estimates are normalized") {
    GaussianStream rng(1);
    auto ens = pf_init(2, 1, 1, dirac_prior({0.0}, {0.0}), Flavor::Full, rng);
    ens.x = {1.0, 5.0};
    ens.log_w = {std::log(3.0) + 700.0, std::log(1.0) + 700.0};
    CHECK(estimate(ens, [](std::span<const double> x) { return x[0]; }) == doctest::Approx(2.0));
    CHECK(ens.effective_sample_size() == doctest::Approx(16.0 / 10.0));
}

TEST_CASE("a particle driven by the truth's increments reproduces the truth") {
    const auto model = example_model(0.1);
    NoiseGridSpec spec;
    spec.t_end = 0.3;
    spec.dt_fine = 1e-3;
    spec.seed = 4;
    const auto noise = generate_noise_grid(spec);
    const std::vector<double> x0{0.7}, y0{-0.2};
    const auto truth = simulate_full_system(model, noise, x0, y0);
    GaussianStream rng(0);
    auto ens = pf_init(1, 1, 1, dirac_prior(x0, y0), Flavor::Full, rng);
    for (std::size_t k = 0; k < noise.n_steps; ++k) {
        const auto kk = static_cast<std::ptrdiff_t>(k);
        pf_propagate_with(ens, model, noise.dV_at(kk), noise.dW_at(kk), noise.dt_fine, k);
        REQUIRE(ens.x[0] == truth.x(k + 1)[0]);
        REQUIRE(ens.y[0] == truth.y(k + 1)[0]);
    }
}

TEST_CASE("serial reference and OpenMP kernel are bit-identical") {
    for (auto flavor : {Flavor::Full, Flavor::Reduced}) {
        const auto model = example_model(0.01);
        const auto h = arctan_observation();
        const auto obs = noise_only_path(4000, 0.02 / 400, 3, 0.5);
        const auto serial = run_filter(model, h, obs, small_setup(flavor, Execution::Serial));
        const auto parallel = run_filter(model, h, obs, small_setup(flavor, Execution::Parallel));
        REQUIRE(serial.estimates.size() == 10);
        for (std::size_t i = 0; i < serial.estimates.size(); ++i) {
            REQUIRE(serial.estimates[i] == parallel.estimates[i]);
            REQUIRE(serial.log_normalizer[i] == parallel.log_normalizer[i]);
        }
        REQUIRE(serial.snapshots.size() == 1);
        CHECK(serial.snapshots[0].measure.points == parallel.snapshots[0].measure.points);
    }
}

TEST_CASE("shared-xi mode runs and differs from per-particle xi") {
    const auto model = example_model(0.01);
    const auto h = arctan_observation();
    const auto obs = noise_only_path(4000, 0.02 / 400, 3, 0.5);
    auto setup = small_setup(Flavor::Reduced, Execution::Parallel);
    const auto per = run_filter(model, h, obs, setup);
    setup.reduced.xi_mode = XiMode::Shared;
    const auto shared = run_filter(model, h, obs, setup);
    CHECK(shared.estimates.size() == per.estimates.size());
    CHECK(shared.estimates.back() != per.estimates.back());
}

TEST_CASE("without observations both flavors agree when f ignores y") {
    auto model = example_model(0.01);
    model.f = [](std::span<const double> x, std::span<const double>, std::span<double> out) {
        out[0] = 0.1 * std::sin(x[0]);
    };
    const auto h = constant_observation(0.0);
    const auto obs = noise_only_path(4000, 0.02 / 400, 8);
    const auto full = run_filter(model, h, obs, small_setup(Flavor::Full, Execution::Parallel));
    const auto red = run_filter(model, h, obs, small_setup(Flavor::Reduced, Execution::Parallel));
    for (std::size_t i = 0; i < full.estimates.size(); ++i) REQUIRE(full.estimates[i] == red.estimates[i]);
}

TEST_CASE("squared differences ignore a constant shift of the test function") {
    const auto model = example_model(0.01);
    const auto h = arctan_observation();
    const auto obs = noise_only_path(4000, 0.02 / 400, 12, 0.3);
    auto run = [&](double shift) {
        auto full = small_setup(Flavor::Full, Execution::Parallel);
        full.phi = [shift](std::span<const double> x) { return 10.0 * x[0] / (1.0 + x[0] * x[0]) + shift; };
        auto red = full;
        red.flavor = Flavor::Reduced;
        red.prior = dirac_prior({0.95}, {1.0});
        const auto a = run_filter(model, h, obs, full);
        const auto b = run_filter(model, h, obs, red);
        std::vector<double> d(a.estimates.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::pow(a.estimates[i] - b.estimates[i], 2);
        return d;
    };
    const auto plain = run(0.0), shifted = run(3.0);
    for (std::size_t i = 0; i < plain.size(); ++i) CHECK(shifted[i] == doctest::Approx(plain[i]).epsilon(1e-8));
}

TEST_CASE("filter rejects inconsistent inputs") {
    const auto model = example_model(0.01);
    const auto h = arctan_observation();
    auto setup = small_setup(Flavor::Full, Execution::Serial);
    CHECK_THROWS_AS(run_filter(model, h, noise_only_path(100, 0.02 / 400, 1), setup), ParameterError);
    CHECK_THROWS_AS(run_filter(model, h, noise_only_path(4000, 0.001, 1), setup), ParameterError);
    setup.params.n_particles = 0;
    CHECK_THROWS_AS(run_filter(model, h, noise_only_path(4000, 0.02 / 400, 1), setup), ParameterError);
}

TEST_CASE("Kalman reference: closed forms") {
    // c = 0: pure prediction, m_k = (1 + a dt)^k m₀, P_k = σ² dt Σ (1 + a dt)^{2i}
    LinearGaussianProblem p;
    p.a = -1.0;
    p.sigma = 0.5;
    p.c = 0.0;
    p.mean0 = 2.0;
    const double dt = 0.01;
    const std::vector<double> dr(200, 0.3);
    const auto s = kalman_bucy_reference(p, dr, dt);
    const double q = 1.0 + p.a * dt;
    CHECK(s.mean[200] == doctest::Approx(2.0 * std::pow(q, 200)));
    CHECK(s.variance[200] == doctest::Approx(p.sigma * p.sigma * dt * (1.0 - std::pow(q, 400)) / (1.0 - q * q)));

    // c ≠ 0: variance tends to the Riccati fixed point 2aP + σ² − c²P² = 0
    p.c = 1.0;
    const std::vector<double> many(200000, 0.0);
    const auto r = kalman_bucy_reference(p, many, 1e-4);
    const double P = (p.a + std::sqrt(p.a * p.a + p.c * p.c * p.sigma * p.sigma)) / (p.c * p.c);
    CHECK(r.variance.back() == doctest::Approx(P).epsilon(1e-3));
}

TEST_CASE("particle filter tracks the Kalman reference on a linear model") {
    const double a = -1.0, sigma = 0.5, c = 1.0;
    const auto model = linear_gaussian_model(a, sigma);
    const auto h = linear_observation(c);
    const std::size_t m_sub = 10, coarse = 100;
    const double dt = 0.02 / m_sub;
    NoiseGridSpec spec;
    spec.t_end = 0.02 * coarse;
    spec.dt_fine = dt;
    spec.seed = 5;
    const auto noise = generate_noise_grid(spec);
    const std::vector<double> x0{0.3}, y0{0.0};
    const auto truth = simulate_full_system(model, noise, x0, y0);
    const auto obs = generate_observations(truth, h, {noise.dU.data(), noise.n_steps});

    FilterSetup setup;
    setup.params = {2000, m_sub, 0.02, 0.02 * coarse, 9};
    setup.prior = gaussian_prior({0.0}, 0.5, {0.0});
    setup.phi = [](std::span<const double> x) { return x[0]; };
    const auto pf = run_filter(model, h, obs, setup);

    LinearGaussianProblem p{a, sigma, c, 0.0, 0.25};
    const auto kf = kalman_bucy_reference(p, obs.dr, dt);
    for (std::size_t i = 0; i < coarse; ++i) {
        const double se = std::sqrt(pf.phi_variance[i] / pf.ess[i]);
        REQUIRE(std::abs(pf.estimates[i] - kf.mean[(i + 1) * m_sub]) < 5.0 * se);
        REQUIRE(pf.phi_variance[i] == doctest::Approx(kf.variance[(i + 1) * m_sub]).epsilon(0.25));
    }
}
