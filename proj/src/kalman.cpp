#include "rmf/kalman.hpp"

#include "rmf/errors.hpp"

namespace rmf {

KalmanSeries kalman_bucy_reference(const LinearGaussianProblem& p, std::span<const double> dr,
                                   double dt) {
    if (!(dt > 0.0)) throw ParameterError("kalman_bucy_reference: dt must be positive");
    if (p.var0 < 0.0) throw ParameterError("kalman_bucy_reference: negative prior variance");
    KalmanSeries s;
    s.mean.resize(dr.size() + 1);
    s.variance.resize(dr.size() + 1);
    double m = p.mean0, P = p.var0;
    s.mean[0] = m;
    s.variance[0] = P;
    const double c = p.c, grow = 1.0 + p.a * dt, q = p.sigma * p.sigma * dt;
    for (std::size_t k = 0; k < dr.size(); ++k) {
        // dr = c dt x + dU,  dU ~ N(0, dt)
        const double gain = P * c * dt / (c * c * dt * dt * P + dt);
        m += gain * (dr[k] - c * dt * m);
        P -= gain * c * dt * P;
        // x' = (1 + a dt) x + σ dV
        m *= grow;
        P = grow * grow * P + q;
        s.mean[k + 1] = m;
        s.variance[k + 1] = P;
    }
    return s;
}

} // namespace rmf
