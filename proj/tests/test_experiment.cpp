#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rmf/config.hpp"
#include "rmf/csv.hpp"
#include "rmf/errors.hpp"
#include "rmf/experiment.hpp"
#include "rmf/random.hpp"
#include "support.hpp"

using namespace rmf;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig tiny_config() {
    ExperimentConfig c;
    c.n_particles = 20;
    c.horizon = 0.1;
    c.n_replications = 3;
    c.metric_time = 0.04;
    c.track = false;
    return c;
}

} // namespace

TEST_CASE("format_real round-trips doubles") {
    GaussianStream rng(1);
    for (int i = 0; i < 2000; ++i) {
        const double v = std::ldexp(rng(), static_cast<int>(rng() * 40));
        REQUIRE(std::strtod(format_real(v).c_str(), nullptr) == v);
    }
    CHECK(format_real(0.5) == "0.5");
    CHECK(format_real(8.0) == "8");
}

TEST_CASE("CSV layouts") {
    const auto dir = testing::scratch_dir("csv");
    FilterSeries empty_full, empty_red;
    empty_red.flavor = Flavor::Reduced;
    emit_csv(empty_full, empty_red, (dir / "empty.csv").string());
    CHECK(slurp(dir / "empty.csv") == "t,pi_full,pi_reduced\n");

    FilterSeries one = empty_full, one_red = empty_red;
    one.times = {0.02};
    one.estimates = {1.0 / 3.0};
    one_red.times = {0.02};
    one_red.estimates = {0.25};
    emit_csv(one, one_red, (dir / "one.csv").string());
    CHECK(slurp(dir / "one.csv") == "t,pi_full,pi_reduced\n0.02,0.3333333333333333,0.25\n");

    const auto table = read_csv((dir / "one.csv").string());
    CHECK(table.header == std::vector<std::string>{"t", "pi_full", "pi_reduced"});
    REQUIRE(table.rows.size() == 1);
    CHECK(table.rows[0][1] == 1.0 / 3.0);

    ErrorSeries es;
    emit_csv(es, (dir / "err.csv").string());
    CHECK(slurp(dir / "err.csv") == "t,mse,std_err\n");

    Trajectory tr;
    tr.n = tr.m = 1;
    tr.times = {0.0};
    tr.states = {1.0, -2.0};
    emit_csv(tr, (dir / "traj.csv").string());
    CHECK(slurp(dir / "traj.csv") == "t,x,y\n0,1,-2\n");

    one_red.times = {0.04};
    CHECK_THROWS_AS(emit_csv(one, one_red, (dir / "bad.csv").string()), ParameterError);
    CHECK_THROWS_AS(emit_plot_data(one, one_red, es, (dir / "bad").string()), ParameterError);
    CHECK_THROWS_AS(emit_csv(es, "/nonexistent-dir/x.csv"), Error);
}

TEST_CASE("plot data files have equal row counts") {
    const auto dir = testing::scratch_dir("plot");
    FilterSeries a, b;
    b.flavor = Flavor::Reduced;
    a.times = b.times = {0.02, 0.04};
    a.estimates = {1, 2};
    b.estimates = {1.5, 2.5};
    ErrorSeries e;
    e.times = a.times;
    e.mse = {0.25, 0.25};
    e.std_err = {0, 0};
    emit_plot_data(a, b, e, (dir / "fig").string());
    CHECK(read_csv((dir / "fig_filters.csv").string()).rows.size() ==
          read_csv((dir / "fig_errors.csv").string()).rows.size());
}

TEST_CASE("config settings and files") {
    ExperimentConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.n_particles == 200);
    CHECK(c.m_sub == 400);
    CHECK(c.dt_coarse == 0.02);
    CHECK(c.horizon == 8.0);

    const auto dir = testing::scratch_dir("cfg");
    {
        std::ofstream out(dir / "a.cfg");
        out << "# comment\n\nepsilon = 0.1\nparticles=50  # trailing\nx-tilde0 = 0.95\nxi-mode = shared\nexpansion-order = 0\n";
    }
    load_config_file(c, (dir / "a.cfg").string());
    CHECK(c.epsilon == 0.1);
    CHECK(c.n_particles == 50);
    CHECK(c.x_tilde0 == 0.95);
    CHECK(c.reduced.xi_mode == XiMode::Shared);
    CHECK(c.manifold.expansion_order == 0);
    CHECK(c.reduced.manifold.expansion_order == 0);

    CHECK_THROWS_AS(apply_setting(c, "no-such-key", "1"), ParameterError);
    CHECK_THROWS_AS(apply_setting(c, "particles", "-3"), ParameterError);
    CHECK_THROWS_AS(apply_setting(c, "epsilon", "abc"), ParameterError);
    CHECK_THROWS_AS(apply_setting(c, "expansion-order", "2"), ParameterError);
    CHECK_THROWS_AS(load_config_file(c, (dir / "missing.cfg").string()), Error);

    ExperimentConfig stiff;
    stiff.m_sub = 10;  // dt_fine = 0.002 > ε/10
    CHECK_THROWS_AS(stiff.validate(), ParameterError);
    ExperimentConfig none;
    none.n_replications = 0;
    CHECK_THROWS_AS(none.validate(), ParameterError);
}

TEST_CASE("list parsing and test function registry") {
    CHECK(parse_real_list("0.01,0.1") == std::vector<double>{0.01, 0.1});
    CHECK(parse_real_list("1") == std::vector<double>{1.0});
    CHECK_THROWS_AS(parse_real_list("1,,2"), ParameterError);

    const std::vector<double> x{2.0};
    CHECK(make_test_function("rational")(x) == doctest::Approx(4.0));
    CHECK(make_test_function("identity")(x) == 2.0);
    CHECK(make_test_function("identity_clipped")(std::vector<double>{50.0}) == 10.0);
    CHECK(make_test_function("sin")(x) == std::sin(2.0));
    CHECK(make_test_function("indicator:1:3")(x) == 1.0);
    CHECK(make_test_function("indicator:3:4")(x) == 0.0);
    CHECK_THROWS_AS(make_test_function("cubic"), ParameterError);
}

TEST_CASE("aggregation of identical replications has zero standard error") {
    ReplicationResult r;
    r.full.times = {0.02, 0.04};
    r.squared_difference = {0.1, 0.3};
    r.metric = MetricValue{0.05, 0.0};
    const auto e = aggregate_replications({r, r});
    CHECK(e.mse == std::vector<double>{0.1, 0.3});
    CHECK(e.std_err == std::vector<double>{0.0, 0.0});
    CHECK(e.time_avg_mse == doctest::Approx(0.2));
    CHECK(e.metric_mean == doctest::Approx(0.05));
    CHECK(e.metric_std_err == 0.0);
    CHECK_THROWS_AS(aggregate_replications({}), Error);
}

TEST_CASE("single replication pipeline is reproducible") {
    const auto c = tiny_config();
    const auto a = run_single_replication(c, 1);
    const auto b = run_single_replication(c, 1);
    REQUIRE(a.full.estimates.size() == 5);
    CHECK(a.full.estimates == b.full.estimates);
    CHECK(a.reduced.estimates == b.reduced.estimates);
    CHECK(a.metric.has_value());
    const auto other = run_single_replication(c, 2);
    CHECK(other.full.estimates != a.full.estimates);
    for (double d : a.squared_difference) CHECK(d >= 0.0);
}

TEST_CASE("Monte Carlo driver aggregates all replications") {
    auto c = tiny_config();
    c.jobs = 2;
    const auto mc = monte_carlo_mse(c);
    CHECK(mc.errors.replications_used == 3);
    CHECK(mc.errors.excluded.empty());
    CHECK(mc.errors.mse.size() == 5);
    for (std::size_t i = 0; i < mc.errors.mse.size(); ++i) {
        CHECK(mc.errors.mse[i] >= 0.0);
        CHECK(mc.errors.std_err[i] >= 0.0);
    }
    REQUIRE(mc.representative.has_value());
    CHECK(mc.representative->index == 0);

    c.jobs = 1;
    const auto again = monte_carlo_mse(c);
    CHECK(again.errors.mse == mc.errors.mse);
}
