#pragma once

#include "tgf/basis.hpp"
#include "tgf/errors.hpp"
#include "tgf/integrator.hpp"
#include "tgf/operators.hpp"
#include "tgf/params.hpp"
#include "tgf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace tgf {

// Neumaier compensated sum.
class CompensatedSum {
public:
    void add(double x)
    {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
};

inline MeanSE mean_se(const std::vector<double>& x)
{
    MeanSE r;
    if (x.empty())
        return r;
    CompensatedSum s;
    for (double v : x)
        s.add(v);
    r.mean = s.value() / double(x.size());
    if (x.size() > 1) {
        CompensatedSum q;
        for (double v : x)
            q.add((v - r.mean) * (v - r.mean));
        r.se = std::sqrt(q.value() / double(x.size() - 1) / double(x.size()));
    }
    return r;
}

struct EnsembleStats {
    std::vector<double> times;
    std::vector<double> mean_energy_v, se_energy_v;
    std::vector<double> mean_sup_energy, se_sup_energy;
    std::vector<double> budget_a, se_budget_a;       // (beta/2) E int ||A||_4^4
    std::vector<double> budget_grad, se_budget_grad; // 2 mu E int ||grad U||_2^2
    std::vector<double> mean_ito_residual, mean_abs_ito_residual;
    std::vector<double> final_energy_v; // per retained path
    double max_grad_ratio = 0.0;        // max over retained paths and saves of ||grad U||^2/||U||_V^2
    std::size_t n_paths = 0;
    std::size_t n_diverged = 0;

    std::size_t n_used() const { return n_paths - n_diverged; }
};

// Pathwise sup/integral first, then ensemble means; diverged paths are excluded and counted.
inline EnsembleStats aggregate(const std::vector<PathRecord>& paths, const PhysicalParams& params)
{
    EnsembleStats st;
    st.n_paths = paths.size();
    std::vector<const PathRecord*> used;
    for (const auto& p : paths) {
        if (p.diverged)
            ++st.n_diverged;
        else
            used.push_back(&p);
    }
    if (used.empty())
        throw DomainError("aggregate: every path diverged (or the ensemble is empty)");
    st.times = used.front()->times;
    for (const auto* p : used)
        if (p->times != st.times)
            throw DomainError("aggregate: paths have mismatched time grids");
    const std::size_t T = st.times.size();
    auto col = [&](auto getter, std::vector<double>& mean, std::vector<double>* se, double factor) {
        mean.resize(T);
        if (se)
            se->resize(T);
        std::vector<double> x(used.size());
        for (std::size_t i = 0; i < T; ++i) {
            for (std::size_t p = 0; p < used.size(); ++p)
                x[p] = factor * getter(*used[p], i);
            auto r = mean_se(x);
            mean[i] = r.mean;
            if (se)
                (*se)[i] = r.se;
        }
    };
    col([](const PathRecord& r, std::size_t i) { return r.energy_v[i]; }, st.mean_energy_v, &st.se_energy_v, 1.0);
    col([](const PathRecord& r, std::size_t i) { return r.sup_energy_v[i]; }, st.mean_sup_energy, &st.se_sup_energy,
        1.0);
    col([](const PathRecord& r, std::size_t i) { return r.int_a_l4[i]; }, st.budget_a, &st.se_budget_a,
        0.5 * params.beta);
    col([](const PathRecord& r, std::size_t i) { return r.int_grad_l2[i]; }, st.budget_grad, &st.se_budget_grad,
        2.0 * params.mu);
    col([](const PathRecord& r, std::size_t i) { return r.ito_residual[i]; }, st.mean_ito_residual, nullptr, 1.0);
    col([](const PathRecord& r, std::size_t i) { return std::abs(r.ito_residual[i]); }, st.mean_abs_ito_residual,
        nullptr, 1.0);
    for (const auto* p : used) {
        st.final_energy_v.push_back(p->energy_v.back());
        st.max_grad_ratio = std::max(st.max_grad_ratio, p->max_grad_ratio);
    }
    return st;
}

// C(t) = [E sup ||U||_V^2 + (beta/2) E int ||A||_4^4 + 2 mu E int ||grad U||^2] / (1 + E ||U0||_V^2)
inline std::vector<double> apriori_budget_check(const EnsembleStats& st, double e_u0_v2)
{
    std::vector<double> out(st.times.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = (st.mean_sup_energy[i] + st.budget_a[i] + st.budget_grad[i]) / (1.0 + e_u0_v2);
    return out;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    std::size_t points = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y)
{
    LineFit f;
    f.points = x.size();
    if (x.size() < 2)
        throw DomainError("fit_line needs at least two points");
    double n = double(x.size());
    CompensatedSum sx, sy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx.add(x[i]);
        sy.add(y[i]);
    }
    double mx = sx.value() / n, my = sy.value() / n;
    CompensatedSum sxx, sxy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx.add((x[i] - mx) * (x[i] - mx));
        sxy.add((x[i] - mx) * (y[i] - my));
    }
    f.slope = sxy.value() / sxx.value();
    f.intercept = my - f.slope * mx;
    if (x.size() > 2) {
        CompensatedSum rss;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double e = y[i] - f.intercept - f.slope * x[i];
            rss.add(e * e);
        }
        f.slope_se = std::sqrt(rss.value() / (n - 2.0) / sxx.value());
    }
    return f;
}

struct YoungConstants {
    double c_alpha1_sq = 0.0;
    double c_alpha2_sq = 0.0;
};

// c_a^2 = a^2 * rho, rho = max ||grad u||^2 / ||u||_V^2, the constant in
// a ||A||_4^2 ||grad U|| <= (beta/4) ||A||_4^4 + (c_a^2 / beta) ||U||_V^2.
inline YoungConstants young_constants(const PhysicalParams& p, double rho)
{
    return {p.alpha1 * p.alpha1 * rho, p.alpha2 * p.alpha2 * rho};
}

inline double stability_margin(const PhysicalParams& p, double c_phi, const YoungConstants& c)
{
    return 2.0 * p.mu - c_phi - 2.0 * (c.c_alpha1_sq + c.c_alpha2_sq) / p.beta;
}

struct StabilityInputs {
    PhysicalParams params;
    double eta1 = 1.0;
    double c_ell = 0.0; // C_l of the decaying diffusion
    double c_phi = 0.0;
    double e_u0_v2 = 0.0;
    double t0 = 0.0;
    double t1 = std::numeric_limits<double>::infinity();
};

struct StabilityReport {
    double eta_hat = 0.0;
    double eta_hat_se = 0.0;
    double margin = 0.0;
    YoungConstants young;
    double eta_target = 0.0;
    double lambda_paper = 0.0;
    std::size_t bound_violations = 0;
    std::size_t bound_points = 0;
    double as_rate = 0.0; // the rate eta/4 tested pathwise
    double as_fraction = 0.0;
    double fit_t0 = 0.0, fit_t1 = 0.0;
    bool window_truncated = false;
    double diverged_fraction = 0.0;
    bool certified = false;
    std::vector<std::string> reasons; // why certification was withheld
};

inline StabilityReport fit_decay(const EnsembleStats& st, const StabilityInputs& in)
{
    StabilityReport r;
    r.young = young_constants(in.params, st.max_grad_ratio);
    r.margin = stability_margin(in.params, in.c_phi, r.young);
    r.eta_target = 0.5 * std::min(r.margin, in.eta1);
    r.lambda_paper = (in.e_u0_v2 + in.c_ell / (in.eta1 - r.eta_target)) * std::exp(in.c_ell / in.eta1);

    std::vector<double> x, y;
    for (std::size_t i = 0; i < st.times.size(); ++i) {
        double t = st.times[i];
        if (t < in.t0 || t > in.t1)
            continue;
        if (!(st.mean_energy_v[i] > 0.0)) {
            r.window_truncated = true;
            break;
        }
        x.push_back(t);
        y.push_back(std::log(st.mean_energy_v[i]));
    }
    if (x.size() >= 2) {
        auto f = fit_line(x, y);
        r.eta_hat = -f.slope;
        r.eta_hat_se = f.slope_se;
        r.fit_t0 = x.front();
        r.fit_t1 = x.back();
    } else {
        r.reasons.push_back("decay window has fewer than two positive energies");
    }

    if (r.eta_target > 0.0) {
        for (std::size_t i = 0; i < st.times.size(); ++i) {
            ++r.bound_points;
            double bound = r.lambda_paper * std::exp(-r.eta_target * st.times[i]);
            if (st.mean_energy_v[i] - 3.0 * st.se_energy_v[i] > bound)
                ++r.bound_violations;
        }
    }

    r.as_rate = r.eta_target / 4.0;
    double T = st.times.empty() ? 0.0 : st.times.back();
    std::size_t ok = 0;
    for (double e : st.final_energy_v) {
        double rate = e > 0.0 ? 0.5 * std::log(e) / T : -std::numeric_limits<double>::infinity();
        if (rate <= -r.as_rate)
            ++ok;
    }
    r.as_fraction = st.final_energy_v.empty() ? 0.0 : double(ok) / double(st.final_energy_v.size());
    r.diverged_fraction = st.n_paths ? double(st.n_diverged) / double(st.n_paths) : 0.0;

    if (!(r.margin > 0.0))
        r.reasons.push_back("empirical margin m = 2*mu - c_phi - 2*(c_a1^2 + c_a2^2)/beta is not positive");
    if (!(r.eta_hat > 0.0))
        r.reasons.push_back("fitted decay rate is not positive");
    if (r.bound_violations > 0)
        r.reasons.push_back("mean energy exceeds Lambda*exp(-eta*t) beyond 3 standard errors");
    if (r.as_fraction < 0.95)
        r.reasons.push_back("fewer than 95% of paths satisfy (1/T) log ||U(T)||_V <= -eta/4");
    if (r.diverged_fraction > 0.01)
        r.reasons.push_back("more than 1% of paths diverged");
    r.certified = r.reasons.empty();
    return r;
}

// Random test state: Gaussian coefficients with a |k|^-1 envelope and overall scale `amp`.
inline SpectralState random_state(const ModeSet& basis, u64 seed, StreamTag tag, u64 a, u64 b, double amp)
{
    SpectralState s(basis.size());
    for (std::size_t j = 0; j < s.size(); ++j)
        s[j] = amp * normal_at(seed, tag, a, b, j) / std::sqrt(double(basis[j].k2()));
    return s;
}

struct SurveyRow {
    PhysicalParams params;
    bool inside_region = false;
    double min_gap = 0.0;
    double min_relative = 0.0; // min over pairs of gap / scale
    double scale_at_min = 0.0;
    std::size_t samples = 0;
    bool ok = true; // inside the region: min gap >= -tol * scale
};

// Pairs mix independent states and nearby perturbations over several amplitude decades.
inline std::vector<SurveyRow> monotonicity_survey(const std::vector<PhysicalParams>& grid, std::size_t sample_count,
                                                  const ModeSet& basis, int M, u64 seed, double tol = 1e-9)
{
    Transform tr(basis, M);
    std::vector<SurveyRow> rows;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        SurveyRow row;
        row.params = grid[g];
        row.inside_region = grid[g].monotone_ok();
        row.min_gap = std::numeric_limits<double>::infinity();
        row.min_relative = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < sample_count; ++i) {
            double amp = std::pow(10.0, -2.0 + 3.0 * uniform_at(seed, StreamTag::Survey, g, i, 0));
            SpectralState u = random_state(basis, seed, StreamTag::Survey, g, 4 * i, amp);
            SpectralState y;
            if (i % 2 == 0) {
                double amp2 = std::pow(10.0, -2.0 + 3.0 * uniform_at(seed, StreamTag::Survey, g, i, 1));
                y = random_state(basis, seed, StreamTag::Survey, g, 4 * i + 1, amp2);
            } else {
                double eps = std::pow(10.0, -3.0 + 3.0 * uniform_at(seed, StreamTag::Survey, g, i, 2));
                SpectralState d = random_state(basis, seed, StreamTag::Survey, g, 4 * i + 2, eps * amp);
                y = u;
                for (std::size_t j = 0; j < y.size(); ++j)
                    y[j] += d[j];
            }
            GapResult gr = monotonicity_gap_detail(u, y, grid[g], tr);
            ++row.samples;
            double rel = gr.scale > 0.0 ? gr.gap / gr.scale : 0.0;
            if (gr.gap < row.min_gap)
                row.min_gap = gr.gap;
            if (rel < row.min_relative) {
                row.min_relative = rel;
                row.scale_at_min = gr.scale;
            }
            if (row.inside_region && gr.gap < -tol * gr.scale)
                row.ok = false;
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace tgf
