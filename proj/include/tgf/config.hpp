#pragma once

#include "tgf/basis.hpp"
#include "tgf/errors.hpp"
#include "tgf/integrator.hpp"
#include "tgf/noise.hpp"
#include "tgf/operators.hpp"
#include "tgf/params.hpp"
#include "tgf/state.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace tgf {

enum class ExperimentKind { Simulate, Identities, Monotonicity, Apriori, Stability, Holder };

inline const char* to_string(ExperimentKind k)
{
    switch (k) {
    case ExperimentKind::Simulate: return "simulate";
    case ExperimentKind::Identities: return "identities";
    case ExperimentKind::Monotonicity: return "monotonicity";
    case ExperimentKind::Apriori: return "apriori";
    case ExperimentKind::Stability: return "stability";
    case ExperimentKind::Holder: return "holder";
    }
    return "?";
}

inline std::optional<ExperimentKind> parse_kind(const std::string& s)
{
    for (auto k : {ExperimentKind::Simulate, ExperimentKind::Identities, ExperimentKind::Monotonicity,
                   ExperimentKind::Apriori, ExperimentKind::Stability, ExperimentKind::Holder})
        if (s == to_string(k))
            return k;
    return std::nullopt;
}

// Kinds that integrate paths need an admissible constitutive set.
inline bool simulates(ExperimentKind k)
{
    return k == ExperimentKind::Simulate || k == ExperimentKind::Apriori || k == ExperimentKind::Stability ||
           k == ExperimentKind::Holder;
}

struct EstimatorSettings {
    double fit_t0 = 0.0;
    double fit_t1 = std::numeric_limits<double>::infinity(); // clipped to T
    double holder_delta = 0.25;
    int identity_states = 200;
    double identity_tol = 1e-8;
    int survey_pairs = 1000;
    double gap_tol = 1e-9;
};

struct RunSettings {
    u64 seed = 0;
    int paths = 64;
    int workers = 1;
    std::string out = "tgf_out";
    ExperimentKind kind = ExperimentKind::Simulate;
    bool write_paths = true;
};

struct ForceSpec {
    ForceKind kind = ForceKind::Zero;
    double amplitude = 0.0;
    int kx = 0, ky = 1;
    Parity parity = Parity::Sin;
};

struct NoiseSpec {
    NoiseKind kind = NoiseKind::LinearMultiplicative;
    int K = 16;
    double amplitude = 0.5;
    double exponent = 1.0;
    double eta1 = 1.0;
};

struct RunConfig {
    SimConfig sim;
    ForceSpec force;
    NoiseSpec noise;
    EstimatorSettings est;
    RunSettings run;
};

struct ConfigResult {
    std::optional<RunConfig> config;
    std::vector<std::string> errors;
    bool ok() const { return config.has_value(); }
};

struct Overrides {
    std::optional<u64> seed;
    std::optional<int> paths;
    std::optional<int> workers;
    std::optional<std::string> out;
    std::optional<std::string> kind;
};

namespace detail {

inline std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

class Reader {
public:
    Reader(const boost::property_tree::ptree& tree, std::vector<std::string>& errors) : tree_(tree), errors_(errors) {}

    std::optional<std::string> raw(const std::string& key)
    {
        seen_.insert(key);
        auto v = tree_.get_optional<std::string>(boost::property_tree::ptree::path_type(key, '.'));
        if (!v)
            return std::nullopt;
        return trim(*v);
    }

    void number(const std::string& key, double& out)
    {
        auto v = raw(key);
        if (!v)
            return;
        errno = 0;
        char* end = nullptr;
        double x = std::strtod(v->c_str(), &end);
        if (v->empty() || *end != '\0' || errno == ERANGE)
            errors_.push_back(key + ": '" + *v + "' is not a number");
        else
            out = x;
    }

    void integer(const std::string& key, int& out)
    {
        auto v = raw(key);
        if (!v)
            return;
        errno = 0;
        char* end = nullptr;
        long x = std::strtol(v->c_str(), &end, 10);
        if (v->empty() || *end != '\0' || errno == ERANGE || x < std::numeric_limits<int>::min() ||
            x > std::numeric_limits<int>::max())
            errors_.push_back(key + ": '" + *v + "' is not an integer");
        else
            out = int(x);
    }

    void unsigned64(const std::string& key, u64& out)
    {
        auto v = raw(key);
        if (!v)
            return;
        errno = 0;
        char* end = nullptr;
        unsigned long long x = std::strtoull(v->c_str(), &end, 10);
        if (v->empty() || (*v)[0] == '-' || *end != '\0' || errno == ERANGE)
            errors_.push_back(key + ": '" + *v + "' is not an unsigned integer");
        else
            out = u64(x);
    }

    void boolean(const std::string& key, bool& out)
    {
        auto v = raw(key);
        if (!v)
            return;
        if (*v == "true" || *v == "1" || *v == "yes")
            out = true;
        else if (*v == "false" || *v == "0" || *v == "no")
            out = false;
        else
            errors_.push_back(key + ": '" + *v + "' is not a boolean");
    }

    void unknown_keys()
    {
        for (const auto& [section, body] : tree_) {
            if (body.empty() && !body.data().empty()) {
                errors_.push_back("unknown top-level key '" + section + "' (keys belong to a [section])");
                continue;
            }
            for (const auto& kv : body) {
                std::string key = section + "." + kv.first;
                if (!seen_.count(key))
                    errors_.push_back("unknown key '" + key + "'");
            }
        }
    }

private:
    const boost::property_tree::ptree& tree_;
    std::vector<std::string>& errors_;
    std::set<std::string> seen_;
};

inline std::optional<Parity> parse_parity(const std::string& s)
{
    if (s == "cos")
        return Parity::Cos;
    if (s == "sin")
        return Parity::Sin;
    return std::nullopt;
}

inline const char* parity_name(Parity p) { return p == Parity::Cos ? "cos" : "sin"; }

inline const char* force_name(ForceKind k)
{
    switch (k) {
    case ForceKind::Zero: return "zero";
    case ForceKind::Constant: return "constant";
    case ForceKind::Decaying: return "decaying";
    }
    return "?";
}

struct ModeEntry {
    int kx, ky;
    Parity parity;
    double coef;
};

// "kx ky parity coef, kx ky parity coef, ..."
inline std::vector<ModeEntry> parse_modes(const std::string& text, std::vector<std::string>& errors)
{
    std::vector<ModeEntry> out;
    std::stringstream all(text);
    std::string item;
    while (std::getline(all, item, ',')) {
        if (trim(item).empty())
            continue;
        std::istringstream is(item);
        ModeEntry e{};
        std::string par, extra;
        if (!(is >> e.kx >> e.ky >> par >> e.coef) || (is >> extra) || !parse_parity(par)) {
            errors.push_back("initial.modes: cannot parse '" + trim(item) + "' (expected 'kx ky cos|sin coef')");
            continue;
        }
        e.parity = *parse_parity(par);
        out.push_back(e);
    }
    return out;
}

inline std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace detail

// Canonical text of every field that changes results; workers and out are excluded.
inline std::string canonical_text(const RunConfig& c)
{
    std::ostringstream os;
    auto d = [](double v) { return format_double(v); };
    const auto& s = c.sim;
    os << "field.n_max=" << s.n_max << "\nfield.M=" << s.M << "\n";
    os << "params.mu=" << d(s.params.mu) << "\nparams.alpha1=" << d(s.params.alpha1)
       << "\nparams.alpha2=" << d(s.params.alpha2) << "\nparams.beta=" << d(s.params.beta) << "\n";
    os << "force.kind=" << detail::force_name(c.force.kind) << "\nforce.amplitude=" << d(c.force.amplitude)
       << "\nforce.kx=" << c.force.kx << "\nforce.ky=" << c.force.ky
       << "\nforce.parity=" << detail::parity_name(c.force.parity) << "\n";
    os << "noise.kind=" << to_string(c.noise.kind) << "\nnoise.K=" << c.noise.K
       << "\nnoise.amplitude=" << d(c.noise.amplitude) << "\nnoise.exponent=" << d(c.noise.exponent)
       << "\nnoise.eta1=" << d(c.noise.eta1) << "\n";
    os << "integrator.dt=" << d(s.dt) << "\nintegrator.T=" << d(s.T_end) << "\nintegrator.save_stride=" << s.save_stride
       << "\nintegrator.cutoff_N=" << d(s.cutoff.N) << "\nintegrator.nonlinear=" << s.nonlinear << "\n";
    os << "initial.kind=" << (s.initial.kind == InitialKind::Fixed ? "fixed" : "random")
       << "\ninitial.shell=" << s.initial.shell << "\ninitial.energy=" << d(s.initial.target_energy) << "\n";
    os << "initial.fixed=";
    for (double x : s.initial.fixed.coeffs)
        os << d(x) << ' ';
    os << "\n";
    os << "estimators.fit_t0=" << d(c.est.fit_t0) << "\nestimators.fit_t1=" << d(c.est.fit_t1)
       << "\nestimators.holder_delta=" << d(c.est.holder_delta)
       << "\nestimators.identity_states=" << c.est.identity_states << "\nestimators.identity_tol=" << d(c.est.identity_tol)
       << "\nestimators.survey_pairs=" << c.est.survey_pairs << "\nestimators.gap_tol=" << d(c.est.gap_tol) << "\n";
    os << "run.seed=" << c.run.seed << "\nrun.paths=" << c.run.paths << "\nrun.kind=" << to_string(c.run.kind)
       << "\nrun.write_paths=" << c.run.write_paths << "\n";
    return os.str();
}

inline std::string config_hash(const RunConfig& c)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)detail::fnv1a(canonical_text(c)));
    return buf;
}

// Parses INI text, applies overrides and evaluates every constraint; all violations are returned together.
inline ConfigResult validate_config(const std::string& text, const Overrides& ov = {},
                                    const std::filesystem::path& base_dir = {})
{
    ConfigResult res;
    auto& err = res.errors;
    boost::property_tree::ptree tree;
    try {
        std::istringstream is(text);
        boost::property_tree::ini_parser::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        err.push_back(std::string("config is not valid INI: ") + e.what());
        return res;
    }

    RunConfig c;
    detail::Reader r(tree, err);
    auto& s = c.sim;

    s.n_max = 4;
    r.integer("field.n_max", s.n_max);
    int M = -1;
    r.integer("field.M", M);
    s.M = M < 0 ? default_resolution(s.n_max) : M;

    s.params = {1.0, 0.5, -0.3, 1.0};
    r.number("params.mu", s.params.mu);
    r.number("params.alpha1", s.params.alpha1);
    r.number("params.alpha2", s.params.alpha2);
    r.number("params.beta", s.params.beta);

    if (auto v = r.raw("force.kind")) {
        if (*v == "zero")
            c.force.kind = ForceKind::Zero;
        else if (*v == "constant")
            c.force.kind = ForceKind::Constant;
        else if (*v == "decaying")
            c.force.kind = ForceKind::Decaying;
        else
            err.push_back("force.kind: '" + *v + "' is not one of zero, constant, decaying");
    }
    r.number("force.amplitude", c.force.amplitude);
    r.integer("force.kx", c.force.kx);
    r.integer("force.ky", c.force.ky);
    if (auto v = r.raw("force.parity")) {
        if (auto p = detail::parse_parity(*v))
            c.force.parity = *p;
        else
            err.push_back("force.parity: '" + *v + "' is not cos or sin");
    }

    if (auto v = r.raw("noise.kind")) {
        if (*v == "additive")
            c.noise.kind = NoiseKind::Additive;
        else if (*v == "linear_multiplicative")
            c.noise.kind = NoiseKind::LinearMultiplicative;
        else if (*v == "decaying_multiplicative")
            c.noise.kind = NoiseKind::DecayingMultiplicative;
        else
            err.push_back("noise.kind: '" + *v + "' is not one of additive, linear_multiplicative, decaying_multiplicative");
    }
    r.integer("noise.K", c.noise.K);
    r.number("noise.amplitude", c.noise.amplitude);
    r.number("noise.exponent", c.noise.exponent);
    r.number("noise.eta1", c.noise.eta1);

    s.dt = 1e-3;
    s.T_end = 1.0;
    s.save_stride = 10;
    r.number("integrator.dt", s.dt);
    r.number("integrator.T", s.T_end);
    r.integer("integrator.save_stride", s.save_stride);
    r.number("integrator.cutoff_N", s.cutoff.N);
    r.boolean("integrator.nonlinear", s.nonlinear);

    s.initial.kind = InitialKind::Random;
    if (auto v = r.raw("initial.kind")) {
        if (*v == "fixed")
            s.initial.kind = InitialKind::Fixed;
        else if (*v == "random")
            s.initial.kind = InitialKind::Random;
        else
            err.push_back("initial.kind: '" + *v + "' is not fixed or random");
    }
    r.integer("initial.shell", s.initial.shell);
    r.number("initial.energy", s.initial.target_energy);
    auto modes_text = r.raw("initial.modes");
    auto file_text = r.raw("initial.file");

    r.number("estimators.fit_t0", c.est.fit_t0);
    r.number("estimators.fit_t1", c.est.fit_t1);
    r.number("estimators.holder_delta", c.est.holder_delta);
    r.integer("estimators.identity_states", c.est.identity_states);
    r.number("estimators.identity_tol", c.est.identity_tol);
    r.integer("estimators.survey_pairs", c.est.survey_pairs);
    r.number("estimators.gap_tol", c.est.gap_tol);

    r.unsigned64("run.seed", c.run.seed);
    r.integer("run.paths", c.run.paths);
    r.integer("run.workers", c.run.workers);
    if (auto v = r.raw("run.out"))
        c.run.out = *v;
    std::optional<std::string> kind_text = r.raw("run.kind");
    r.boolean("run.write_paths", c.run.write_paths);
    r.unknown_keys();

    if (ov.seed)
        c.run.seed = *ov.seed;
    if (ov.paths)
        c.run.paths = *ov.paths;
    if (ov.workers)
        c.run.workers = *ov.workers;
    if (ov.out)
        c.run.out = *ov.out;
    if (ov.kind)
        kind_text = ov.kind;
    if (kind_text) {
        if (auto k = parse_kind(*kind_text))
            c.run.kind = *k;
        else
            err.push_back("run.kind: '" + *kind_text +
                          "' is not one of simulate, identities, monotonicity, apriori, stability, holder");
    }
    s.seed = c.run.seed;

    // field / integrator
    bool field_ok = true;
    if (s.n_max < 1) {
        err.push_back("field.n_max must be >= 1");
        field_ok = false;
    } else if (s.n_max > 64) {
        err.push_back("field.n_max must be <= 64");
        field_ok = false;
    }
    if (s.M < 4 * s.n_max)
        err.push_back("field.M = " + std::to_string(s.M) + " violates the dealiasing constraint M >= 4*n_max = " +
                      std::to_string(4 * s.n_max));
    if (!(s.dt > 0.0))
        err.push_back("integrator.dt must be > 0");
    if (!(s.T_end >= s.dt))
        err.push_back("integrator.T must be >= integrator.dt");
    else if (s.dt > 0.0 && std::abs(s.T_end / s.dt - double(s.steps())) > 1e-9 * double(s.steps()))
        err.push_back("integrator.T must be an integer multiple of integrator.dt");
    if (s.save_stride < 1)
        err.push_back("integrator.save_stride must be >= 1");
    if (!(s.cutoff.N > 0.0))
        err.push_back("integrator.cutoff_N must be > 0 (inf disables the cut-off)");

    // params
    const auto& p = s.params;
    if (!std::isfinite(p.mu) || !std::isfinite(p.alpha1) || !std::isfinite(p.alpha2) || !std::isfinite(p.beta))
        err.push_back("params must be finite");
    if (!(p.mu > 0.0))
        err.push_back("params.mu must be > 0");
    if (!(p.alpha1 >= 0.0))
        err.push_back("params.alpha1 must be >= 0");
    if (!(p.beta >= 0.0))
        err.push_back("params.beta must be >= 0");
    if (simulates(c.run.kind)) {
        if (!(p.beta > 0.0))
            err.push_back("params.beta must be > 0 for kind=" + std::string(to_string(c.run.kind)));
        if (!p.fosdick_ok())
            err.push_back(std::string("inadmissible constitutive set: violates the Fosdick-Rajagopal condition ") +
                          kFosdickText);
        if (!p.monotone_ok())
            err.push_back(std::string("inadmissible constitutive set: violates the monotonicity restriction ") +
                          kMonotoneText);
    }

    // noise
    const auto& nz = c.noise;
    if (nz.K < 0)
        err.push_back("noise.K must be >= 0");
    if (!(nz.amplitude >= 0.0) || !std::isfinite(nz.amplitude))
        err.push_back("noise.amplitude must be finite and >= 0");
    if (!std::isfinite(nz.exponent) || nz.exponent < 0.0)
        err.push_back("noise.exponent must be finite and >= 0");
    bool needs_eta1 = nz.kind == NoiseKind::DecayingMultiplicative || c.force.kind == ForceKind::Decaying;
    if (needs_eta1 && !(nz.eta1 > 0.0))
        err.push_back("noise.eta1 must be > 0: the decaying hypotheses carry the envelope e^{-eta1*t}, which needs "
                      "eta1 > 0");
    if (field_ok && nz.kind == NoiseKind::Additive && nz.K > (2 * s.n_max + 1) * (2 * s.n_max + 1) - 1)
        err.push_back("noise.K exceeds the number of modes for additive noise");

    // force
    if (!std::isfinite(c.force.amplitude))
        err.push_back("force.amplitude must be finite");

    // run / estimators
    if (c.run.paths < 1)
        err.push_back("run.paths must be >= 1");
    if (c.run.workers < 1)
        err.push_back("run.workers must be >= 1");
    if (c.run.out.empty())
        err.push_back("run.out must not be empty");
    if (!(c.est.fit_t0 >= 0.0) || !(c.est.fit_t1 > c.est.fit_t0))
        err.push_back("estimators: need 0 <= fit_t0 < fit_t1");
    if (!(c.est.holder_delta > 0.0 && c.est.holder_delta < 1.0))
        err.push_back("estimators.holder_delta must lie in (0, 1)");
    if (c.est.identity_states < 1 || c.est.survey_pairs < 1)
        err.push_back("estimators.identity_states and estimators.survey_pairs must be >= 1");
    if (!(c.est.identity_tol > 0.0) || !(c.est.gap_tol >= 0.0))
        err.push_back("estimators tolerances must be positive");
    if (c.run.kind == ExperimentKind::Stability) {
        if (c.force.kind == ForceKind::Constant)
            err.push_back("kind=stability needs force.kind = zero or decaying");
        if (nz.kind != NoiseKind::DecayingMultiplicative && nz.K > 0 && nz.amplitude > 0.0)
            err.push_back("kind=stability needs noise.kind = decaying_multiplicative (or no noise)");
    }
    if (c.run.kind == ExperimentKind::Holder && s.T_end / s.dt / std::max(1, s.save_stride) > 4000)
        err.push_back("kind=holder keeps every saved state; raise integrator.save_stride to <= 4000 saves");

    if (!field_ok)
        return res;
    ModeSet basis = build_basis(s.n_max, p);

    if (c.force.kind != ForceKind::Zero) {
        std::size_t j = basis.index_of(c.force.kx, c.force.ky, c.force.parity);
        if (j == basis.size())
            err.push_back("force mode (" + std::to_string(c.force.kx) + ", " + std::to_string(c.force.ky) +
                          ") is not a representative wave of the basis");
        else {
            s.force.kind = c.force.kind;
            s.force.eta1 = nz.eta1;
            s.force.profile.assign(basis.size(), 0.0);
            s.force.profile[j] = c.force.amplitude;
        }
    }

    if (modes_text && file_text)
        err.push_back("initial.modes and initial.file are mutually exclusive");
    SpectralState fixed(basis.size());
    if (modes_text) {
        for (const auto& e : detail::parse_modes(*modes_text, err)) {
            std::size_t j = basis.index_of(e.kx, e.ky, e.parity);
            if (j == basis.size())
                err.push_back("initial.modes: (" + std::to_string(e.kx) + ", " + std::to_string(e.ky) +
                              ") is not a representative wave of the basis");
            else
                fixed[j] = e.coef;
        }
    } else if (file_text) {
        std::filesystem::path fp(*file_text);
        if (fp.is_relative())
            fp = base_dir / fp;
        std::ifstream in(fp);
        if (!in)
            err.push_back("initial.file: cannot open '" + fp.string() + "'");
        else {
            try {
                fixed = read_state(in, basis);
            } catch (const ConfigError& e) {
                err.push_back(std::string("initial.file: ") + e.what());
            }
        }
    }
    if (s.initial.kind == InitialKind::Fixed) {
        s.initial.fixed = fixed;
        if (!fixed.finite())
            err.push_back("initial state must be finite");
    } else {
        if (modes_text || file_text)
            err.push_back("initial.modes/initial.file need initial.kind = fixed");
        if (s.initial.shell < 1 || s.initial.shell > s.n_max)
            err.push_back("initial.shell must lie in [1, n_max]");
        if (!(s.initial.target_energy >= 0.0) || !std::isfinite(s.initial.target_energy))
            err.push_back("initial.energy must be finite and >= 0");
    }

    if (err.empty()) {
        try {
            s.noise = make_noise(nz.kind, nz.K, nz.amplitude, nz.exponent, nz.eta1);
        } catch (const ConfigError& e) {
            err.push_back(e.what());
        }
    }
    if (err.empty() && s.force.kind == ForceKind::Decaying) {
        // ||Phi(t)||^2 = amp^2 e^{-eta1 t} <= c_phi * ell * e^{-eta1 t}
        if (!(s.noise.ell > 0.0))
            err.push_back("force.kind = decaying needs a nonzero noise growth constant to define c_phi");
        else
            s.force.c_phi = c.force.amplitude * c.force.amplitude / s.noise.ell;
    }
    if (err.empty())
        res.config = c;
    return res;
}

inline std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace tgf
