#include "rmf/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rmf/errors.hpp"
#include "rmf/random.hpp"

namespace rmf {

namespace {

bool is_diagonal(const std::vector<double>& M, std::size_t d) {
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            if (i != j && M[i * d + j] != 0.0) return false;
    return true;
}

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return std::sqrt(s);
}

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

void matvec(const std::vector<double>& M, std::size_t d, std::span<const double> v,
            std::span<double> out) {
    for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += M[i * d + j] * v[j];
        out[i] = s;
    }
}

// Largest singular value by power iteration on MᵀM.
double operator_norm(const std::vector<double>& M, std::size_t d, GaussianStream& rng) {
    std::vector<double> v(d), w(d), u(d);
    rng.fill(v);
    double nv = norm(v);
    if (nv == 0.0) v[0] = nv = 1.0;
    for (auto& e : v) e /= nv;
    double sigma = 0.0;
    for (int it = 0; it < 200; ++it) {
        matvec(M, d, v, w);
        for (std::size_t i = 0; i < d; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += M[j * d + i] * w[j];
            u[i] = s;
        }
        const double nu = norm(u);
        sigma = std::sqrt(nu);
        if (nu == 0.0) break;
        for (std::size_t i = 0; i < d; ++i) v[i] = u[i] / nu;
    }
    return sigma;
}

constexpr double kRelSlack = 1e-9;

} // namespace

bool SlowFastModel::A_is_diagonal() const { return is_diagonal(A, n); }
bool SlowFastModel::B_is_diagonal() const { return is_diagonal(B, m); }

void SlowFastModel::check_shapes() const {
    if (n == 0 || m == 0) throw ParameterError("model: dimensions must be positive");
    if (A.size() != n * n) throw ParameterError("model: A must be n×n");
    if (B.size() != m * m) throw ParameterError("model: B must be m×m");
    if (!(epsilon > 0.0)) throw ParameterError("model: epsilon must be positive");
    if (!f || !g) throw ParameterError("model: f and g are required");
}

double SlowFastModel::manifold_lipschitz_bound() const {
    return 2.0 * (gamma2 - alpha) / (gamma2 - alpha - L);
}

SlowFastModel example_model(double epsilon) {
    SlowFastModel model;
    model.n = 1;
    model.m = 1;
    model.A = {1.0};
    model.B = {-1.0};
    model.sigma1 = 0.01;
    model.sigma2 = 1.0;
    model.epsilon = epsilon;
    model.f = [](std::span<const double>, std::span<const double> y, std::span<double> out) {
        out[0] = 0.25 * std::sin(y[0]);
    };
    model.g = [](std::span<const double> x, std::span<const double>, std::span<double> out) {
        out[0] = 0.25 * std::cos(x[0]);
    };
    model.g_x = [](std::span<const double> x, std::span<const double>, std::span<double> out) {
        out[0] = -0.25 * std::sin(x[0]);
    };
    model.g_y = [](std::span<const double>, std::span<const double>, std::span<double> out) {
        out[0] = 0.0;
    };
    model.g_depends_on_y = false;
    model.gamma1 = 1.0;
    model.gamma2 = 1.0;
    model.L = 0.25;
    model.C_f = 0.25;
    model.C_g = 0.25;
    model.alpha = 0.5;
    return model;
}

ObservationModel arctan_observation() {
    ObservationModel h;
    h.h = [](std::span<const double> x, std::span<const double>) { return std::atan(x[0]); };
    h.depends_on_y = false;
    h.bound = std::numbers::pi / 2.0;
    h.lipschitz = 1.0;
    return h;
}

ObservationModel constant_observation(double c) {
    ObservationModel h;
    h.h = [c](std::span<const double>, std::span<const double>) { return c; };
    h.bound = std::abs(c);
    h.lipschitz = 0.0;
    return h;
}

ObservationModel linear_observation(double c) {
    ObservationModel h;
    h.h = [c](std::span<const double> x, std::span<const double>) { return c * x[0]; };
    h.lipschitz = std::abs(c);
    return h;
}

SlowFastModel linear_gaussian_model(double a, double sigma, double epsilon) {
    SlowFastModel model;
    model.n = 1;
    model.m = 1;
    model.A = {a};
    model.B = {-1.0};
    model.sigma1 = sigma;
    model.sigma2 = 1.0;
    model.epsilon = epsilon;
    auto zero = [](std::span<const double>, std::span<const double>, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
    };
    model.f = zero;
    model.g = zero;
    model.g_x = zero;
    model.g_y = zero;
    model.g_depends_on_y = false;
    model.gamma1 = std::abs(a);
    model.gamma2 = 1.0;
    model.L = 0.0;
    model.alpha = 0.5;
    return model;
}

bool ValidationReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const HypothesisCheck* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

ValidationReport validate_hypotheses(const SlowFastModel& model, std::size_t probe_count,
                                     std::uint64_t rng_seed, const ObservationModel* observation) {
    model.check_shapes();
    if (probe_count == 0) throw ParameterError("validate: probe_count must be at least 1");

    const std::size_t n = model.n, m = model.m;
    GaussianStream rng(derive_seed(rng_seed, {stream::kProbe}));
    ValidationReport report;

    {
        HypothesisCheck c;
        c.name = "H1";
        c.observed = operator_norm(model.A, n, rng);
        c.bound = model.gamma1;
        c.probes = 1;
        c.passed = c.observed <= model.gamma1 * (1.0 + kRelSlack) + 1e-12;
        c.violations = c.passed ? 0 : 1;
        c.detail = "operator norm of A vs gamma1";
        report.checks.push_back(c);
    }

    {
        HypothesisCheck c;
        c.name = "H2";
        std::vector<double> y(m), By(m);
        c.observed = -std::numeric_limits<double>::infinity();
        c.bound = -model.gamma2;
        c.probes = probe_count;
        for (std::size_t p = 0; p < probe_count; ++p) {
            rng.fill(y);
            const double ny = norm(y);
            if (ny == 0.0) continue;
            for (auto& e : y) e /= ny;
            matvec(model.B, m, y, By);
            double q = 0.0;
            for (std::size_t i = 0; i < m; ++i) q += By[i] * y[i];
            c.observed = std::max(c.observed, q);
            if (q > -model.gamma2 + 1e-12) ++c.violations;
        }
        c.passed = c.violations == 0;
        c.detail = "max (By, y) over random unit vectors vs -gamma2";
        report.checks.push_back(c);
    }

    // Lipschitz and boundedness probes share the random points. Half of the
    // pairs are far apart, half are local perturbations that see the slope.
    {
        HypothesisCheck lip;
        lip.name = "H3";
        HypothesisCheck bnd;
        bnd.name = "H5";
        lip.bound = model.L;
        lip.probes = probe_count;
        bnd.probes = probe_count;
        bnd.bound = std::max(model.C_f, model.C_g);
        double worst_f = 0.0, worst_g = 0.0;
        std::size_t bad_f = 0, bad_g = 0;
        std::vector<double> x1(n), y1(m), x2(n), y2(m), f1(n), f2(n), g1(m), g2(m);
        for (std::size_t p = 0; p < probe_count; ++p) {
            rng.fill(x1, 3.0);
            rng.fill(y1, 3.0);
            const double step = (p % 2 == 0) ? 3.0 : 1e-3;
            rng.fill(x2, step);
            rng.fill(y2, step);
            for (std::size_t i = 0; i < n; ++i) x2[i] += (p % 2 == 0) ? 0.0 : x1[i];
            for (std::size_t i = 0; i < m; ++i) y2[i] += (p % 2 == 0) ? 0.0 : y1[i];

            model.f(x1, y1, f1);
            model.f(x2, y2, f2);
            model.g(x1, y1, g1);
            model.g(x2, y2, g2);
            const double sep = distance(x1, x2) + distance(y1, y2);
            if (sep > 0.0) {
                const double rf = distance(f1, f2) / sep;
                const double rg = distance(g1, g2) / sep;
                lip.observed = std::max({lip.observed, rf, rg});
                if (rf > model.L * (1.0 + kRelSlack) + 1e-12 ||
                    rg > model.L * (1.0 + kRelSlack) + 1e-12)
                    ++lip.violations;
            }
            const double nf = norm(f1), ng = norm(g1);
            worst_f = std::max(worst_f, nf);
            worst_g = std::max(worst_g, ng);
            if (nf > model.C_f * (1.0 + kRelSlack) + 1e-12) ++bad_f;
            if (ng > model.C_g * (1.0 + kRelSlack) + 1e-12) ++bad_g;
        }
        lip.passed = lip.violations == 0;
        lip.detail = "max Lipschitz ratio of f and g vs L";
        bnd.violations = bad_f + bad_g;
        bnd.passed = bnd.violations == 0;
        bnd.observed = std::max(worst_f, worst_g);
        std::ostringstream os;
        os << "sup|f| = " << worst_f << " (C_f = " << model.C_f << "), sup|g| = " << worst_g
           << " (C_g = " << model.C_g << ")";
        bnd.detail = os.str();
        report.checks.push_back(lip);

        HypothesisCheck h4;
        h4.name = "H4";
        h4.observed = model.gamma2;
        h4.bound = model.L;
        h4.probes = 1;
        h4.passed = model.gamma2 > model.L;
        h4.violations = h4.passed ? 0 : 1;
        h4.detail = "gamma2 > L";
        report.checks.push_back(h4);
        report.checks.push_back(bnd);
    }

    {
        HypothesisCheck c;
        c.name = "alpha";
        c.observed = model.gamma2 - model.alpha;
        c.bound = model.L;
        c.probes = 1;
        c.passed = model.alpha > 0.0 && model.gamma2 - model.alpha > model.L;
        c.violations = c.passed ? 0 : 1;
        c.detail = "alpha > 0 and gamma2 - alpha > L";
        report.checks.push_back(c);
    }

    if (observation != nullptr && observation->h) {
        HypothesisCheck c;
        c.name = "H6";
        c.probes = probe_count;
        c.bound = observation->bound;
        const bool bounded_declared = observation->bound > 0.0;
        std::vector<double> x1(n), y1(m), x2(n), y2(m);
        double worst_lip = 0.0;
        for (std::size_t p = 0; p < probe_count; ++p) {
            rng.fill(x1, 10.0);
            rng.fill(y1, 10.0);
            rng.fill(x2, 1e-2);
            rng.fill(y2, 1e-2);
            for (std::size_t i = 0; i < n; ++i) x2[i] += x1[i];
            for (std::size_t i = 0; i < m; ++i) y2[i] += y1[i];
            const double h1 = observation->h(x1, y1);
            const double h2 = observation->h(x2, y2);
            c.observed = std::max(c.observed, std::abs(h1));
            const double sep = distance(x1, x2) + distance(y1, y2);
            if (sep > 0.0) worst_lip = std::max(worst_lip, std::abs(h1 - h2) / sep);
            bool bad = !bounded_declared || std::abs(h1) > observation->bound * (1.0 + kRelSlack);
            if (observation->lipschitz > 0.0 && sep > 0.0 &&
                std::abs(h1 - h2) / sep > observation->lipschitz * (1.0 + kRelSlack) + 1e-12)
                bad = true;
            if (bad) ++c.violations;
        }
        c.passed = c.violations == 0;
        std::ostringstream os;
        os << "sup|h| vs declared bound, max Lipschitz ratio " << worst_lip;
        c.detail = os.str();
        report.checks.push_back(c);
    }
    return report;
}

} // namespace rmf
