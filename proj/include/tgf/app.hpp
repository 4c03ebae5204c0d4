#pragma once

#include "tgf/config.hpp"
#include "tgf/ensemble.hpp"
#include "tgf/estimators.hpp"
#include "tgf/integrator.hpp"
#include "tgf/operators.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace tgf {

enum ExitCode { kExitPass = 0, kExitConfig = 1, kExitFail = 2, kExitDiverged = 3 };

// key=value lines followed by CSV blocks.
class Report {
public:
    template <class T>
    void kv(const std::string& key, const T& value)
    {
        head_ << key << '=' << value << '\n';
    }
    void num(const std::string& key, double v) { kv(key, format_double(v)); }

    void block(const std::string& name, const std::string& header, const std::vector<std::vector<double>>& rows)
    {
        body_ << "\n[csv " << name << "]\n" << header << '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i)
                body_ << (i ? "," : "") << format_double(r[i]);
            body_ << '\n';
        }
        body_ << "[/csv]\n";
    }

    std::string text() const { return head_.str() + body_.str(); }

private:
    std::ostringstream head_, body_;
};

struct RunOutcome {
    int exit_code = kExitPass;
    std::string status; // PASS, FAIL, DIVERGED
    std::string summary;
};

namespace detail {

inline std::string iso_now()
{
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void write_file(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream os(p, std::ios::binary);
    if (!os)
        throw ConfigError("cannot write '" + p.string() + "'");
    os << text;
}

inline std::string path_file_name(std::size_t i)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "path_%05zu.csv", i);
    return buf;
}

inline void write_paths(const std::filesystem::path& dir, const std::vector<PathRecord>& paths, const std::string& hash)
{
    std::filesystem::create_directories(dir);
    for (const auto& p : paths) {
        std::ostringstream os;
        write_path_csv(os, p, hash);
        write_file(dir / path_file_name(p.path_index), os.str());
    }
}

inline void stats_block(Report& rep, const EnsembleStats& st)
{
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < st.times.size(); ++i)
        rows.push_back({st.times[i], st.mean_energy_v[i], st.se_energy_v[i], st.mean_sup_energy[i], st.budget_a[i],
                        st.budget_grad[i], st.mean_ito_residual[i], st.mean_abs_ito_residual[i]});
    rep.block("ensemble",
              "t,mean_energy_v,se_energy_v,mean_sup_energy_v,budget_a_l4,budget_grad_l2,mean_ito_residual,"
              "mean_abs_ito_residual",
              rows);
}

inline void ensemble_keys(Report& rep, const EnsembleStats& st)
{
    rep.num("max_grad_ratio", st.max_grad_ratio);
    rep.num("final_mean_energy_v", st.mean_energy_v.back());
    rep.num("final_se_energy_v", st.se_energy_v.back());
    rep.num("final_mean_ito_residual", st.mean_ito_residual.back());
}

inline bool divergence_dominated(std::size_t diverged, std::size_t total) { return 2 * diverged > total; }

inline RunOutcome run_identities(const RunConfig& c, Report& rep)
{
    const auto& s = c.sim;
    ModeSet basis = build_basis(s.n_max, s.params);
    Transform tr(basis, s.M);
    std::vector<std::vector<double>> rows;
    double worst = 0.0;
    for (int i = 0; i < c.est.identity_states; ++i) {
        double amp = std::pow(10.0, -2.0 + 3.0 * uniform_at(c.run.seed, StreamTag::Survey, u64(i), 0, 7));
        auto u = random_state(basis, c.run.seed, StreamTag::Survey, u64(i), 0, amp);
        auto y = random_state(basis, c.run.seed, StreamTag::Survey, u64(i), 1, amp);
        auto z = random_state(basis, c.run.seed, StreamTag::Survey, u64(i), 2, amp);
        auto id = energy_pairing_identities(u, tr);
        double b1 = trilinear_b(u, y, z, tr), b2 = trilinear_b(u, z, y, tr);
        double anti = std::abs(b1 + b2) / (1.0 + std::abs(b1) + std::abs(b2));
        double m = std::max(id.max_relative(), anti);
        worst = std::max(worst, m);
        rows.push_back({double(i), amp, anti, id.convection.relative(), id.transport.relative(), id.cubic.relative(),
                        id.square.relative()});
    }
    bool pass = worst < c.est.identity_tol;
    rep.kv("states", c.est.identity_states);
    rep.num("tolerance", c.est.identity_tol);
    rep.num("max_relative_residual", worst);
    rep.block("residuals", "state,amplitude,trilinear_antisymmetry,convection,transport,cubic,square", rows);
    RunOutcome out;
    out.exit_code = pass ? kExitPass : kExitFail;
    out.status = pass ? "PASS" : "FAIL";
    out.summary = "max relative residual " + format_double(worst) + " (tolerance " + format_double(c.est.identity_tol) + ")";
    return out;
}

inline std::vector<PhysicalParams> survey_grid(const PhysicalParams& configured)
{
    return {configured, {1.0, 0.0, 0.0, 1.0}, {0.5, 2.0, 1.0, 5.0}, {1.0, 1.0, -1.0, 0.125}, {1.0, 2.0, -0.5, 0.875}};
}

inline RunOutcome run_monotonicity(const RunConfig& c, Report& rep)
{
    const auto& s = c.sim;
    auto grid = survey_grid(s.params);
    auto rows = parallel_map<SurveyRow>(grid.size(), c.run.workers, [&](std::size_t g) {
        ModeSet basis = build_basis(s.n_max, grid[g]);
        auto r = monotonicity_survey({grid[g]}, std::size_t(c.est.survey_pairs), basis, s.M, c.run.seed + g,
                                     c.est.gap_tol);
        return r.front();
    });
    bool pass = true;
    std::vector<std::vector<double>> table;
    for (const auto& r : rows) {
        if (r.inside_region && !r.ok)
            pass = false;
        table.push_back({r.params.mu, r.params.alpha1, r.params.alpha2, r.params.beta, r.inside_region ? 1.0 : 0.0,
                         double(r.samples), r.min_gap, r.min_relative, r.ok ? 1.0 : 0.0});
    }
    rep.kv("pairs_per_set", c.est.survey_pairs);
    rep.num("gap_tolerance", c.est.gap_tol);
    rep.kv("region", kMonotoneText);
    rep.block("survey", "mu,alpha1,alpha2,beta,inside_region,samples,min_gap,min_relative_gap,ok", table);
    RunOutcome out;
    out.exit_code = pass ? kExitPass : kExitFail;
    out.status = pass ? "PASS" : "FAIL";
    out.summary = pass ? "every set inside the region has min gap >= -tol*scale"
                       : "a set inside the region has a negative gap beyond tolerance";
    return out;
}

inline RunOutcome diverged_outcome(std::size_t diverged, std::size_t total)
{
    RunOutcome out;
    out.exit_code = kExitDiverged;
    out.status = "DIVERGED";
    out.summary = std::to_string(diverged) + " of " + std::to_string(total) + " paths diverged";
    return out;
}

inline RunOutcome run_paths(const RunConfig& c, Report& rep, const std::filesystem::path& out_dir,
                            const std::string& hash)
{
    SimContext ctx(c.sim);
    auto paths = run_ensemble(ctx, std::size_t(c.run.paths), c.run.workers);
    if (c.run.write_paths)
        write_paths(out_dir / "paths", paths, hash);
    std::size_t nd = 0;
    for (const auto& p : paths)
        nd += p.diverged ? 1 : 0;
    rep.kv("paths", paths.size());
    rep.kv("paths_diverged", nd);
    if (divergence_dominated(nd, paths.size()))
        return diverged_outcome(nd, paths.size());
    auto st = aggregate(paths, c.sim.params);
    ensemble_keys(rep, st);
    rep.num("initial_mean_energy_v", initial_mean_energy(ctx));
    rep.num("noise_kappa", c.sim.noise.kappa);
    rep.num("noise_ell", c.sim.noise.ell);
    rep.num("noise_tail", c.sim.noise.tail);

    RunOutcome out;
    out.status = "PASS";
    if (c.run.kind == ExperimentKind::Apriori) {
        auto ratio = apriori_budget_check(st, initial_mean_energy(ctx));
        rep.num("budget_ratio_final", ratio.back());
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < ratio.size(); ++i)
            rows.push_back({st.times[i], ratio[i]});
        rep.block("budget_ratio", "t,ratio", rows);
        out.summary = "budget ratio C(T) = " + format_double(ratio.back());
    } else if (c.run.kind == ExperimentKind::Stability) {
        StabilityInputs in;
        in.params = c.sim.params;
        in.eta1 = c.sim.noise.eta1;
        in.c_ell = c.sim.noise.ell;
        in.c_phi = c.sim.force.c_phi;
        in.e_u0_v2 = initial_mean_energy(ctx);
        in.t0 = c.est.fit_t0;
        in.t1 = c.est.fit_t1;
        auto r = fit_decay(st, in);
        rep.num("eta_hat", r.eta_hat);
        rep.num("eta_hat_se", r.eta_hat_se);
        rep.num("c_alpha1_sq", r.young.c_alpha1_sq);
        rep.num("c_alpha2_sq", r.young.c_alpha2_sq);
        rep.num("c_phi", in.c_phi);
        rep.num("margin", r.margin);
        rep.num("eta", r.eta_target);
        rep.num("lambda", r.lambda_paper);
        rep.kv("bound_points", r.bound_points);
        rep.kv("bound_violations", r.bound_violations);
        rep.num("as_rate", r.as_rate);
        rep.num("as_fraction", r.as_fraction);
        rep.num("fit_t0", r.fit_t0);
        rep.num("fit_t1", r.fit_t1);
        rep.kv("window_truncated", r.window_truncated ? 1 : 0);
        rep.num("diverged_fraction", r.diverged_fraction);
        rep.kv("certified", r.certified ? 1 : 0);
        for (std::size_t i = 0; i < r.reasons.size(); ++i)
            rep.kv("withheld_reason_" + std::to_string(i), r.reasons[i]);
        if (!r.certified) {
            out.exit_code = kExitFail;
            out.status = "FAIL";
            out.summary = "stability not certified: " + r.reasons.front();
        } else {
            out.summary = "certified: eta_hat = " + format_double(r.eta_hat) + ", margin = " + format_double(r.margin);
        }
    } else {
        out.summary = "final mean energy " + format_double(st.mean_energy_v.back());
    }
    stats_block(rep, st);
    return out;
}

inline RunOutcome run_holder(const RunConfig& c, Report& rep)
{
    auto cfg = c.sim;
    cfg.keep_states = true;
    SimContext ctx(cfg);
    struct Row {
        bool diverged = false;
        HolderResult h;
    };
    auto rows = parallel_map<Row>(std::size_t(c.run.paths), c.run.workers, [&](std::size_t i) {
        auto rec = simulate_path(ctx, i);
        Row r;
        r.diverged = rec.diverged;
        if (!rec.diverged)
            r.h = holder_seminorm(rec, c.est.holder_delta);
        return r;
    });
    std::vector<double> semi, total;
    std::size_t nd = 0;
    std::vector<std::vector<double>> table;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].diverged) {
            ++nd;
            continue;
        }
        semi.push_back(rows[i].h.seminorm);
        total.push_back(rows[i].h.total());
        table.push_back({double(i), rows[i].h.sup_norm, rows[i].h.seminorm});
    }
    rep.kv("paths", rows.size());
    rep.kv("paths_diverged", nd);
    if (divergence_dominated(nd, rows.size()) || semi.empty())
        return diverged_outcome(nd, rows.size());
    auto ms = mean_se(semi), mt = mean_se(total);
    rep.num("holder_delta", c.est.holder_delta);
    rep.num("mean_seminorm", ms.mean);
    rep.num("se_seminorm", ms.se);
    rep.num("mean_holder_norm", mt.mean);
    rep.num("se_holder_norm", mt.se);
    rep.block("holder", "path,sup_h,seminorm", table);
    RunOutcome out;
    out.status = "PASS";
    out.summary = "mean C^{0," + format_double(c.est.holder_delta) + "} seminorm " + format_double(ms.mean);
    return out;
}

} // namespace detail

// Runs one experiment and writes report.txt, metadata.txt and (for path kinds) paths/*.csv under run.out.
inline RunOutcome run(const RunConfig& c, std::ostream& log = std::cout)
{
    namespace fs = std::filesystem;
    const fs::path out_dir(c.run.out);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir))
        throw ConfigError("output directory '" + c.run.out + "' is not writable");

    const std::string hash = config_hash(c);
    const std::string started = detail::iso_now();
    auto t0 = std::chrono::steady_clock::now();

    Report rep;
    rep.kv("kind", to_string(c.run.kind));
    rep.kv("config_hash", hash);
    rep.kv("seed", c.run.seed);
    rep.kv("n_max", c.sim.n_max);
    rep.kv("M", c.sim.M);
    rep.num("mu", c.sim.params.mu);
    rep.num("alpha1", c.sim.params.alpha1);
    rep.num("alpha2", c.sim.params.alpha2);
    rep.num("beta", c.sim.params.beta);
    rep.kv("monotone_region", c.sim.params.monotone_ok() ? 1 : 0);

    RunOutcome out;
    switch (c.run.kind) {
    case ExperimentKind::Identities: out = detail::run_identities(c, rep); break;
    case ExperimentKind::Monotonicity: out = detail::run_monotonicity(c, rep); break;
    case ExperimentKind::Holder: out = detail::run_holder(c, rep); break;
    case ExperimentKind::Simulate:
    case ExperimentKind::Apriori:
    case ExperimentKind::Stability: out = detail::run_paths(c, rep, out_dir, hash); break;
    }
    rep.kv("status", out.status);
    rep.kv("exit_code", out.exit_code);
    rep.kv("summary", out.summary);
    detail::write_file(out_dir / "report.txt", rep.text());

    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream meta;
    meta << "config_hash=" << hash << "\nseed=" << c.run.seed << "\nworkers=" << c.run.workers
         << "\nstarted=" << started << "\nfinished=" << detail::iso_now() << "\nwall_seconds=" << wall << "\n";
    detail::write_file(out_dir / "metadata.txt", meta.str());

    log << to_string(c.run.kind) << ": " << out.status << " (" << out.summary << ")\n";
    return out;
}

} // namespace tgf
