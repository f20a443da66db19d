#include "rmf/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>

#include "rmf/errors.hpp"

namespace rmf {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ParameterError("invalid number for '" + key + "': '" + text + "'");
    return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ParameterError("invalid non-negative integer for '" + key + "': '" + text + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    std::string t = trim(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
    if (t == "0" || t == "false" || t == "no" || t == "off") return false;
    throw ParameterError("invalid boolean for '" + key + "': '" + text + "'");
}

std::size_t parse_size(const std::string& key, const std::string& text) {
    return static_cast<std::size_t>(parse_uint(key, text));
}

} // namespace

void ExperimentConfig::validate() const {
    if (!(epsilon > 0.0)) throw ParameterError("epsilon must be positive");
    if (n_particles == 0) throw ParameterError("particles must be >= 1");
    if (m_sub == 0) throw ParameterError("substeps must be >= 1");
    if (!(dt_coarse > 0.0)) throw ParameterError("dt must be positive");
    if (!(horizon > 0.0)) throw ParameterError("horizon must be positive");
    if (n_replications == 0) throw ParameterError("reps must be >= 1");
    if (jobs == 0) throw ParameterError("jobs must be >= 1");
    if (metric_terms == 0) throw ParameterError("metric-terms must be >= 1");
    if (dt_fine() > epsilon / 10.0 * (1.0 + 1e-12))
        throw ParameterError("fine step dt/substeps = " + std::to_string(dt_fine()) +
                             " exceeds epsilon/10 = " + std::to_string(epsilon / 10.0));
    if (metric_time < 0.0 || metric_time > horizon + 1e-12)
        throw ParameterError("metric-time must lie in [0, horizon]");
    manifold.validate();
    reduced.manifold.validate();
    make_test_function(phi);
}

SlowFastModel ExperimentConfig::model() const {
    auto m = example_model(epsilon);
    m.sigma1 = sigma1;
    m.sigma2 = sigma2;
    m.alpha = alpha;
    return m;
}

void apply_setting(ExperimentConfig& c, const std::string& key_in, const std::string& value) {
    const std::string key = trim(key_in);
    const std::string v = trim(value);
    if (key == "epsilon") c.epsilon = parse_real(key, v);
    else if (key == "sigma1") c.sigma1 = parse_real(key, v);
    else if (key == "sigma2") c.sigma2 = parse_real(key, v);
    else if (key == "alpha") c.alpha = parse_real(key, v);
    else if (key == "particles") c.n_particles = parse_size(key, v);
    else if (key == "substeps") c.m_sub = parse_size(key, v);
    else if (key == "dt") c.dt_coarse = parse_real(key, v);
    else if (key == "horizon") c.horizon = parse_real(key, v);
    else if (key == "x0") c.x0 = parse_real(key, v);
    else if (key == "y0") c.y0 = parse_real(key, v);
    else if (key == "x-tilde0") c.x_tilde0 = parse_real(key, v);
    else if (key == "reps") c.n_replications = parse_size(key, v);
    else if (key == "seed") c.master_seed = parse_uint(key, v);
    else if (key == "jobs") c.jobs = parse_size(key, v);
    else if (key == "expansion-order") {
        const auto order = parse_uint(key, v);
        if (order > 1) throw ParameterError("expansion-order must be 0 or 1");
        c.manifold.expansion_order = static_cast<int>(order);
        c.reduced.manifold.expansion_order = static_cast<int>(order);
    } else if (key == "out") c.output_dir = v;
    else if (key == "phi") c.phi = v;
    else if (key == "s-trunc") c.manifold.s_trunc = parse_real(key, v);
    else if (key == "h-quad") c.manifold.h_quad = parse_real(key, v);
    else if (key == "picard-tol") c.manifold.picard_tol = parse_real(key, v);
    else if (key == "picard-max-iter") c.manifold.picard_max_iter = static_cast<int>(parse_uint(key, v));
    else if (key == "filter-s-trunc") c.reduced.manifold.s_trunc = parse_real(key, v);
    else if (key == "filter-h-quad") c.reduced.manifold.h_quad = parse_real(key, v);
    else if (key == "filter-picard-tol") c.reduced.manifold.picard_tol = parse_real(key, v);
    else if (key == "refresh-stride") c.reduced.refresh_stride = parse_size(key, v);
    else if (key == "xi-mode") {
        if (v == "per-particle") c.reduced.xi_mode = XiMode::PerParticle;
        else if (v == "shared") c.reduced.xi_mode = XiMode::Shared;
        else throw ParameterError("xi-mode must be per-particle or shared");
    } else if (key == "xi-scheme") {
        if (v == "exact") c.xi_scheme = XiScheme::Exact;
        else if (v == "euler") c.xi_scheme = XiScheme::Euler;
        else throw ParameterError("xi-scheme must be exact or euler");
    } else if (key == "execution") {
        if (v == "parallel") c.execution = Execution::Parallel;
        else if (v == "serial") c.execution = Execution::Serial;
        else throw ParameterError("execution must be parallel or serial");
    } else if (key == "metric-time") c.metric_time = parse_real(key, v);
    else if (key == "metric-terms") c.metric_terms = parse_size(key, v);
    else if (key == "track") c.track = parse_bool(key, v);
    else throw ParameterError("unknown setting '" + key + "'");
}

void load_config_file(ExperimentConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParameterError(path + ":" + std::to_string(lineno) + ": expected key = value");
        try {
            apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
        } catch (const ParameterError& e) {
            throw ParameterError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

std::vector<double> parse_real_list(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto piece = text.substr(start, comma == std::string::npos ? std::string::npos
                                                                         : comma - start);
        out.push_back(parse_real("list", piece));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

TestFunction make_test_function(const std::string& name) {
    if (name == "rational")
        return [](std::span<const double> x) { return 10.0 * x[0] / (1.0 + x[0] * x[0]); };
    if (name == "identity") return [](std::span<const double> x) { return x[0]; };
    if (name == "identity_clipped")
        return [](std::span<const double> x) { return std::clamp(x[0], -10.0, 10.0); };
    if (name == "sin") return [](std::span<const double> x) { return std::sin(x[0]); };
    if (name.rfind("indicator:", 0) == 0) {
        const auto rest = name.substr(10);
        const auto colon = rest.find(':');
        if (colon == std::string::npos) throw ParameterError("indicator needs the form indicator:a:b");
        const double a = parse_real("phi", rest.substr(0, colon));
        const double b = parse_real("phi", rest.substr(colon + 1));
        return [a, b](std::span<const double> x) { return (x[0] >= a && x[0] < b) ? 1.0 : 0.0; };
    }
    throw ParameterError("unknown test function '" + name + "'");
}

} // namespace rmf
