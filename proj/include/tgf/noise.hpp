#pragma once

#include "tgf/basis.hpp"
#include "tgf/errors.hpp"
#include "tgf/rng.hpp"
#include "tgf/state.hpp"

#include <boost/math/special_functions/zeta.hpp>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace tgf {

enum class NoiseKind { Additive, LinearMultiplicative, DecayingMultiplicative };

inline const char* to_string(NoiseKind k)
{
    switch (k) {
    case NoiseKind::Additive: return "additive";
    case NoiseKind::LinearMultiplicative: return "linear_multiplicative";
    case NoiseKind::DecayingMultiplicative: return "decaying_multiplicative";
    }
    return "?";
}

struct NoiseModel {
    int K = 0;
    NoiseKind kind = NoiseKind::LinearMultiplicative;
    std::vector<double> amplitudes; // a_1 .. a_K
    double kappa = 0.0;
    double ell = 0.0;
    double eta1 = 0.0;
    double tail = 0.0; // sum_{k > K} a_k^2

    bool off() const { return K == 0; }
    double sum_sq() const
    {
        double s = 0.0;
        for (double a : amplitudes)
            s += a * a;
        return s;
    }
    static double q_eigenvalue(int k) { return 1.0 / (double(k) * k); }
    double envelope(double t) const
    {
        return kind == NoiseKind::DecayingMultiplicative ? std::exp(-0.5 * eta1 * t) : 1.0;
    }
};

// a_k = amplitude * k^-exponent for k = 1..K.
inline NoiseModel make_noise(NoiseKind kind, int K, double amplitude, double exponent, double eta1)
{
    if (K < 0)
        throw ConfigError("noise.K must be >= 0");
    NoiseModel m;
    m.kind = kind;
    m.K = K;
    m.eta1 = eta1;
    m.amplitudes.resize(K);
    for (int k = 1; k <= K; ++k)
        m.amplitudes[k - 1] = amplitude * std::pow(double(k), -exponent);
    double s2 = m.sum_sq();
    m.ell = s2;
    m.kappa = kind == NoiseKind::Additive ? 0.0 : s2;
    if (amplitude == 0.0)
        m.tail = 0.0;
    else if (2.0 * exponent <= 1.0)
        m.tail = std::numeric_limits<double>::infinity();
    else {
        double head = 0.0;
        for (int k = 1; k <= K; ++k)
            head += std::pow(double(k), -2.0 * exponent);
        m.tail = amplitude * amplitude * std::max(0.0, boost::math::zeta(2.0 * exponent) - head);
    }
    return m;
}

struct WienerStream {
    u64 seed = 0;
    u64 path = 0;
    u64 step = 0;
};

struct WienerIncrement {
    double dt = 0.0;
    std::vector<double> dbeta;
};

// K independent N(0, dt) draws; advances the stream by one step.
inline WienerIncrement sample_increment(double dt, int K, WienerStream& stream)
{
    if (!(dt > 0.0))
        throw DomainError("sample_increment requires dt > 0");
    WienerIncrement inc;
    inc.dt = dt;
    inc.dbeta.resize(K);
    const double sd = std::sqrt(dt);
    for (int k = 0; k < K; ++k)
        inc.dbeta[k] = sd * normal_at(stream.seed, StreamTag::Wiener, stream.path, u64(k), stream.step);
    ++stream.step;
    return inc;
}

// Spectral coefficients of sigma^k(t, u), k = 1..K.
inline std::vector<std::vector<double>> diffusion(double t, const SpectralState& s, const NoiseModel& m,
                                                  const ModeSet& basis)
{
    require_same_size(s, basis);
    std::vector<std::vector<double>> out(m.K, std::vector<double>(s.size(), 0.0));
    if (m.kind == NoiseKind::Additive) {
        if (std::size_t(m.K) > s.size())
            throw ConfigError("additive noise needs K <= number of modes");
        for (int k = 0; k < m.K; ++k)
            out[k][k] = m.amplitudes[k];
        return out;
    }
    double f = m.envelope(t);
    for (int k = 0; k < m.K; ++k)
        for (std::size_t j = 0; j < s.size(); ++j)
            out[k][j] = f * m.amplitudes[k] * s[j];
    return out;
}

inline std::vector<std::vector<double>> stokes_lift_diffusion(const std::vector<std::vector<double>>& sigma,
                                                              const ModeSet& basis)
{
    auto out = sigma;
    for (auto& row : out)
        for (std::size_t j = 0; j < row.size(); ++j)
            row[j] /= basis[j].lambda;
    return out;
}

// sum_k ||sigma~^k||_V^2 = sum_k sum_j (sigma^k_j)^2 / lambda_j
inline double lifted_v_norm_sq(const std::vector<std::vector<double>>& sigma, const ModeSet& basis)
{
    double acc = 0.0;
    for (const auto& row : sigma)
        for (std::size_t j = 0; j < row.size(); ++j)
            acc += row[j] * row[j] / basis[j].lambda;
    return acc;
}

struct NoiseContribution {
    double pairing = 0.0; // sum_k (sigma^k, U) dbeta_k
    double qv_rate = 0.0; // sum_k ||sigma~^k||_V^2
};

// Adds sum_k sigma^k dbeta_k to out without materializing the K profiles.
inline NoiseContribution add_noise(double t, const std::vector<double>& c, const NoiseModel& m,
                                   const std::vector<double>& lambda, const std::vector<double>& dbeta,
                                   std::vector<double>& out)
{
    NoiseContribution r;
    if (m.off())
        return r;
    if (m.kind == NoiseKind::Additive) {
        for (int k = 0; k < m.K; ++k) {
            double a = m.amplitudes[k];
            out[k] += a * dbeta[k];
            r.pairing += a * c[k] * dbeta[k];
            r.qv_rate += a * a / lambda[k];
        }
        return r;
    }
    double f = m.envelope(t);
    double xi = 0.0;
    for (int k = 0; k < m.K; ++k)
        xi += m.amplitudes[k] * dbeta[k];
    xi *= f;
    double h2 = 0.0, lifted = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) {
        out[j] += c[j] * xi;
        h2 += c[j] * c[j];
        lifted += c[j] * c[j] / lambda[j];
    }
    r.pairing = h2 * xi;
    r.qv_rate = f * f * m.sum_sq() * lifted;
    return r;
}

} // namespace tgf
