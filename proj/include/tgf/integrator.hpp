#pragma once

#include "tgf/basis.hpp"
#include "tgf/errors.hpp"
#include "tgf/grid.hpp"
#include "tgf/noise.hpp"
#include "tgf/norms.hpp"
#include "tgf/operators.hpp"
#include "tgf/params.hpp"
#include "tgf/rng.hpp"
#include "tgf/state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace tgf {

struct CutoffSpec {
    double N = 1000.0; // infinity disables the gate
};

// 1 on [0, N], 1 - 3s^2 + 2s^3 with s = (x - N)/N on (N, 2N), 0 beyond.
inline double cutoff_value(double x, const CutoffSpec& spec)
{
    if (x < 0.0 || std::isnan(x))
        throw DomainError("cutoff_value requires x >= 0");
    if (std::isinf(spec.N) || x <= spec.N)
        return 1.0;
    if (x >= 2.0 * spec.N)
        return 0.0;
    double s = (x - spec.N) / spec.N;
    return 1.0 - 3.0 * s * s + 2.0 * s * s * s;
}

enum class InitialKind { Fixed, Random };

struct InitialLaw {
    InitialKind kind = InitialKind::Fixed;
    SpectralState fixed;        // used by Fixed
    int shell = 2;              // Random: modes with |k|_inf <= shell
    double target_energy = 1.0; // Random: E ||U0||_V^2
};

struct SimConfig {
    int n_max = 4;
    int M = 18;
    double dt = 1e-3;
    double T_end = 1.0;
    CutoffSpec cutoff;
    PhysicalParams params;
    ForceModel force;
    NoiseModel noise;
    InitialLaw initial;
    int save_stride = 1;
    bool nonlinear = true;
    bool keep_states = false;
    u64 seed = 0;

    long steps() const { return std::lround(T_end / dt); }
};

inline int default_resolution(int n_max) { return 4 * n_max + 2; }

struct PathRecord {
    std::vector<double> times;
    std::vector<SpectralState> states;
    std::vector<double> energy_v;
    std::vector<double> a_l4; // ||A||_4^4
    std::vector<double> grad_l2;
    std::vector<double> ito_residual; // cumulative
    std::vector<double> cutoff_min;   // min of phi_N since the previous save
    // Running quantities at full step resolution, sampled at the saves.
    std::vector<double> sup_energy_v;
    std::vector<double> int_a_l4;
    std::vector<double> int_grad_l2;
    double max_grad_ratio = 0.0; // max over saves of ||grad U||^2 / ||U||_V^2
    bool diverged = false;
    double diverged_time = std::numeric_limits<double>::quiet_NaN();
    std::size_t path_index = 0;

    std::size_t saves() const { return times.size(); }
};

// Immutable per-configuration data shared by every path.
struct SimContext {
    SimConfig config;
    ModeSet basis;
    std::vector<double> lambda;
    std::unique_ptr<Transform> transform;

    explicit SimContext(const SimConfig& c)
        : config(c), basis(build_basis(c.n_max, c.params)), lambda(lambdas(basis)),
          transform(std::make_unique<Transform>(basis, c.M))
    {
        if (config.initial.kind == InitialKind::Fixed && config.initial.fixed.size() == 0)
            config.initial.fixed = SpectralState(basis.size());
        if (config.initial.kind == InitialKind::Fixed)
            require_same_size(config.initial.fixed, basis);
    }
};

inline double initial_variance(const SimContext& ctx)
{
    double lsum = 0.0;
    for (const auto& m : ctx.basis.modes)
        if (std::max(std::abs(m.kx), std::abs(m.ky)) <= ctx.config.initial.shell)
            lsum += m.lambda;
    return lsum > 0.0 ? ctx.config.initial.target_energy / lsum : 0.0;
}

inline SpectralState initial_state(const SimContext& ctx, std::size_t path)
{
    const auto& law = ctx.config.initial;
    if (law.kind == InitialKind::Fixed)
        return law.fixed;
    SpectralState s(ctx.basis.size());
    double sd = std::sqrt(initial_variance(ctx));
    for (std::size_t j = 0; j < s.size(); ++j) {
        const auto& m = ctx.basis[j];
        if (std::max(std::abs(m.kx), std::abs(m.ky)) <= law.shell)
            s[j] = sd * normal_at(ctx.config.seed, StreamTag::Initial, path, j, 0);
    }
    return s;
}

// E ||U0||_V^2 of the initial law.
inline double initial_mean_energy(const SimContext& ctx)
{
    if (ctx.config.initial.kind == InitialKind::Fixed)
        return norm_v_sq(ctx.config.initial.fixed, ctx.basis);
    return ctx.config.initial.target_energy;
}

struct StepInfo {
    double phi = 1.0;
    double a4 = 0.0;            // integral |A|^4 at the pre-step state
    double drift_pairing = 0.0; // (f(U), U)
    NoiseContribution noise;
};

// next_j = c_j + (drift_j dt + sum_k sigma^k_j dbeta_k) / lambda_j
inline StepInfo em_advance(const std::vector<double>& c, double t, double dt, const SimContext& ctx,
                           const std::vector<double>& dbeta, Workspace& ws, std::vector<double>& drift,
                           std::vector<double>& next)
{
    const auto& cfg = ctx.config;
    const std::size_t n = c.size();
    StepInfo info;
    drift.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        drift[j] = -cfg.params.mu * ctx.basis[j].k2() * c[j];
    cfg.force.add_to(t, 1.0, drift);
    double ev = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        ev += ctx.lambda[j] * c[j] * c[j];
    info.phi = cutoff_value(std::sqrt(ev), cfg.cutoff);
    if (cfg.nonlinear && info.phi > 0.0)
        info.a4 = add_nonlinear_drift(c, cfg.params, info.phi, *ctx.transform, ws, drift);
    else
        info.a4 = a4_only(c, *ctx.transform, ws);
    for (std::size_t j = 0; j < n; ++j) {
        info.drift_pairing += drift[j] * c[j];
        drift[j] *= dt;
    }
    info.noise = add_noise(t, c, cfg.noise, ctx.lambda, dbeta, drift);
    next.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        next[j] = c[j] + drift[j] / ctx.lambda[j];
    return info;
}

inline SpectralState em_step(const SpectralState& s, double t, double dt, const SimContext& ctx,
                             const WienerIncrement& inc)
{
    if (!s.finite())
        throw DivergedError("em_step called on a non-finite state");
    Workspace ws;
    std::vector<double> drift, next;
    em_advance(s.coeffs, t, dt, ctx, inc.dbeta, ws, drift, next);
    SpectralState out(std::move(next), t + dt);
    if (!out.finite())
        throw DivergedError("em_step produced a non-finite state");
    return out;
}

inline PathRecord simulate_path(const SimContext& ctx, std::size_t path_index)
{
    const auto& cfg = ctx.config;
    PathRecord rec;
    rec.path_index = path_index;
    const long n_steps = cfg.steps();
    const double dt = cfg.dt;
    const int stride = std::max(1, cfg.save_stride);
    WienerStream stream{cfg.seed, u64(path_index), 0};
    Workspace ws;
    std::vector<double> drift, next;
    std::vector<double> dbeta(cfg.noise.K, 0.0);

    SpectralState u = initial_state(ctx, path_index);
    const double guard = 10.0 * (norm_v(u, ctx.basis) + 1.0);
    double energy = norm_v_sq(u, ctx.basis);
    double grad = grad_l2_sq(u, ctx.basis);
    double sup = energy, int_a4 = 0.0, int_grad = 0.0, resid = 0.0;
    double window_min = 1.0, a4_prev = 0.0;
    StepInfo info;

    for (long step = 0; step <= n_steps; ++step) {
        const double t = step * dt;
        bool last = step == n_steps;
        try {
            if (!last) {
                if (!cfg.noise.off()) {
                    auto inc = sample_increment(dt, cfg.noise.K, stream);
                    dbeta = std::move(inc.dbeta);
                }
                info = em_advance(u.coeffs, t, dt, ctx, dbeta, ws, drift, next);
            } else {
                info.phi = cutoff_value(std::sqrt(energy), cfg.cutoff);
                info.a4 = a4_only(u.coeffs, *ctx.transform, ws);
            }
        } catch (const DivergedError&) {
            rec.diverged = true;
            rec.diverged_time = t;
            break;
        }
        if (!std::isfinite(info.a4)) {
            rec.diverged = true;
            rec.diverged_time = t;
            break;
        }
        window_min = std::min(window_min, info.phi);
        if (step > 0)
            int_a4 += 0.5 * dt * (a4_prev + info.a4);
        a4_prev = info.a4;

        if (step % stride == 0 || last) {
            rec.times.push_back(t);
            rec.energy_v.push_back(energy);
            rec.a_l4.push_back(info.a4);
            rec.grad_l2.push_back(grad);
            rec.ito_residual.push_back(resid);
            rec.cutoff_min.push_back(window_min);
            rec.sup_energy_v.push_back(sup);
            rec.int_a_l4.push_back(int_a4);
            rec.int_grad_l2.push_back(int_grad);
            if (energy > 0.0)
                rec.max_grad_ratio = std::max(rec.max_grad_ratio, grad / energy);
            if (cfg.keep_states)
                rec.states.push_back(SpectralState(u.coeffs, t));
            window_min = 1.0;
        }
        if (last)
            break;

        double e_next = 0.0, g_next = 0.0;
        bool finite = true;
        for (std::size_t j = 0; j < next.size(); ++j) {
            if (!std::isfinite(next[j]))
                finite = false;
            e_next += ctx.lambda[j] * next[j] * next[j];
            g_next += ctx.basis[j].k2() * next[j] * next[j];
        }
        if (!finite || !std::isfinite(e_next) || std::sqrt(e_next) > guard) {
            rec.diverged = true;
            rec.diverged_time = t + dt;
            break;
        }
        resid += e_next - energy -
                 (2.0 * info.drift_pairing * dt + 2.0 * info.noise.pairing + info.noise.qv_rate * dt);
        int_grad += 0.5 * dt * (grad + g_next);
        u.coeffs.swap(next);
        u.time = (step + 1) * dt;
        energy = e_next;
        grad = g_next;
        sup = std::max(sup, energy);
    }
    return rec;
}

inline PathRecord simulate_path(const SimConfig& config, std::size_t path_index)
{
    SimContext ctx(config);
    return simulate_path(ctx, path_index);
}

struct HolderResult {
    double sup_norm = 0.0;
    double seminorm = 0.0;
    double total() const { return sup_norm + seminorm; }
};

// sup ||U(t)||_H + max over saved pairs ||U(t) - U(s)||_H / |t - s|^delta
inline HolderResult holder_seminorm(const PathRecord& path, double delta)
{
    if (path.states.size() < 2)
        throw DomainError("holder_seminorm needs at least two saved states");
    if (!(delta > 0.0 && delta < 1.0))
        throw DomainError("holder_seminorm needs 0 < delta < 1");
    HolderResult r;
    const auto& S = path.states;
    for (std::size_t a = 0; a < S.size(); ++a) {
        r.sup_norm = std::max(r.sup_norm, norm_h(S[a]));
        for (std::size_t b = a + 1; b < S.size(); ++b) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < S[a].size(); ++j) {
                double d = S[a][j] - S[b][j];
                d2 += d * d;
            }
            double dt = std::abs(S[b].time - S[a].time);
            if (dt > 0.0)
                r.seminorm = std::max(r.seminorm, std::sqrt(d2) / std::pow(dt, delta));
        }
    }
    return r;
}

inline void write_path_csv(std::ostream& os, const PathRecord& rec, const std::string& config_hash)
{
    os << "# config_hash=" << config_hash << " path=" << rec.path_index
       << " diverged=" << (rec.diverged ? 1 : 0) << '\n';
    os << "t,energy_v,a_l4,grad_l2,ito_residual_cum,cutoff_min\n";
    for (std::size_t i = 0; i < rec.saves(); ++i)
        os << format_double(rec.times[i]) << ',' << format_double(rec.energy_v[i]) << ','
           << format_double(rec.a_l4[i]) << ',' << format_double(rec.grad_l2[i]) << ','
           << format_double(rec.ito_residual[i]) << ',' << format_double(rec.cutoff_min[i]) << '\n';
}

} // namespace tgf
