#pragma once

#include "tgf/basis.hpp"
#include "tgf/errors.hpp"
#include "tgf/grid.hpp"
#include "tgf/norms.hpp"
#include "tgf/params.hpp"
#include "tgf/state.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace tgf {

enum class ForceKind { Zero, Constant, Decaying };

struct ForceModel {
    ForceKind kind = ForceKind::Zero;
    double c_phi = 0.0;
    double eta1 = 0.0;
    std::vector<double> profile;

    bool is_zero() const { return kind == ForceKind::Zero; }

    // Coefficients of P_n Phi(t, .); the Decaying kind carries exp(-eta1 t / 2).
    void add_to(double t, double dt, std::vector<double>& out) const
    {
        if (kind == ForceKind::Zero || profile.empty())
            return;
        double f = kind == ForceKind::Decaying ? std::exp(-0.5 * eta1 * t) : 1.0;
        for (std::size_t j = 0; j < out.size() && j < profile.size(); ++j)
            out[j] += dt * f * profile[j];
    }

    std::vector<double> coeffs(double t, std::size_t n) const
    {
        std::vector<double> out(n, 0.0);
        add_to(t, 1.0, out);
        return out;
    }
};

struct DriftBreakdown {
    std::vector<double> laplacian;
    std::vector<double> convection;
    std::vector<double> alpha1_shear;
    std::vector<double> alpha1_transport;
    std::vector<double> alpha2_term;
    std::vector<double> beta_term;
    std::vector<double> force;

    std::vector<double> total() const
    {
        std::vector<double> out(laplacian.size(), 0.0);
        for (std::size_t j = 0; j < out.size(); ++j)
            out[j] = laplacian[j] + convection[j] + alpha1_shear[j] + alpha1_transport[j] +
                     alpha2_term[j] + beta_term[j] + force[j];
        return out;
    }
};

// Worker-local buffers for the pseudo-spectral kernels.
struct Workspace {
    Transform::Scratch scratch;
    std::vector<cplx> z, amp;
    std::vector<double> u1, u2, g11, g12, g21, g22;
    std::array<std::vector<double>, 9> t;
    std::array<std::vector<cplx>, 9> hat;

    void reserve(const Transform& tr)
    {
        amp.resize(tr.waves());
        for (auto& v : t)
            v.resize(tr.points());
        for (auto& v : hat)
            v.resize(tr.waves());
    }
};

namespace detail {

inline void check_finite(const std::vector<double>& v, const char* what)
{
    for (double x : v)
        if (!std::isfinite(x))
            throw DivergedError(std::string("non-finite value in ") + what);
}

inline void synth_velocity(const std::vector<double>& c, const Transform& tr, Workspace& ws)
{
    ws.reserve(tr);
    ws.z = tr.amplitudes(c);
    synth_field(tr, ws.z, 0, -1, ws.u1, ws.scratch, ws.amp);
    synth_field(tr, ws.z, 1, -1, ws.u2, ws.scratch, ws.amp);
}

inline void synth_gradient(const std::vector<double>& c, const Transform& tr, Workspace& ws)
{
    ws.reserve(tr);
    ws.z = tr.amplitudes(c);
    synth_field(tr, ws.z, 0, 0, ws.g11, ws.scratch, ws.amp);
    synth_field(tr, ws.z, 0, 1, ws.g12, ws.scratch, ws.amp);
    synth_field(tr, ws.z, 1, 0, ws.g21, ws.scratch, ws.amp);
    synth_field(tr, ws.z, 1, 1, ws.g22, ws.scratch, ws.amp);
}

inline void synth_state(const std::vector<double>& c, const Transform& tr, Workspace& ws)
{
    synth_velocity(c, tr, ws);
    synth_gradient(c, tr, ws);
}

// Pointwise kinematics at one grid point.
struct Local {
    double g11, g12, g21, g22;
    double a11, a12, a22;

    Local(double G11, double G12, double G21, double G22)
        : g11(G11), g12(G12), g21(G21), g22(G22), a11(2.0 * G11), a12(G12 + G21), a22(2.0 * G22)
    {
    }
    double a2() const { return a11 * a11 + 2.0 * a12 * a12 + a22 * a22; }
    // S = (grad u)^T A + A grad u
    double s11() const { return 2.0 * (g11 * a11 + g21 * a12); }
    double s12() const { return g11 * a12 + g21 * a22 + a11 * g12 + a12 * g22; }
    double s22() const { return 2.0 * (g12 * a12 + g22 * a22); }
    double q11() const { return a11 * a11 + a12 * a12; }
    double q12() const { return a11 * a12 + a12 * a22; }
    double q22() const { return a12 * a12 + a22 * a22; }
};

inline Local local_at(const Workspace& ws, std::size_t p) { return Local(ws.g11[p], ws.g12[p], ws.g21[p], ws.g22[p]); }

// Coefficients of sum integral T : grad v_j for the symmetric tensor in ws.t[0..2].
inline std::vector<double> pair_t012(const Transform& tr, Workspace& ws)
{
    for (int i = 0; i < 3; ++i)
        tr.analyze(ws.t[i].data(), ws.hat[i].data(), ws.scratch);
    std::vector<double> out(2 * tr.waves(), 0.0);
    pair_symmetric(tr, ws.hat[0].data(), ws.hat[1].data(), ws.hat[2].data(), out.data());
    return out;
}

// Fills ws.t[3..8] with u^i A^{lj} symmetrized in (i, j).
inline void fill_transport(const Transform& tr, Workspace& ws, double scale)
{
    for (std::size_t p = 0; p < tr.points(); ++p) {
        Local L = local_at(ws, p);
        double u1 = ws.u1[p], u2 = ws.u2[p];
        ws.t[3][p] = scale * u1 * L.a11;
        ws.t[4][p] = scale * 0.5 * (u1 * L.a12 + u2 * L.a11);
        ws.t[5][p] = scale * u2 * L.a12;
        ws.t[6][p] = scale * u1 * L.a12;
        ws.t[7][p] = scale * 0.5 * (u1 * L.a22 + u2 * L.a12);
        ws.t[8][p] = scale * u2 * L.a22;
    }
}

inline void pair_transport(const Transform& tr, Workspace& ws, std::vector<double>& out)
{
    for (int i = 3; i < 9; ++i)
        tr.analyze(ws.t[i].data(), ws.hat[i].data(), ws.scratch);
    pair_hessian(tr, {ws.hat[3].data(), ws.hat[4].data(), ws.hat[5].data()},
                 {ws.hat[6].data(), ws.hat[7].data(), ws.hat[8].data()}, out.data());
}

} // namespace detail

// Unscaled weak-form pairings against every basis function.
struct RawTerms {
    std::vector<double> convection; // (u (x) u, grad v_j) = -(u . grad u, v_j)
    std::vector<double> shear;      // (div S, v_j), S = (grad u)^T A + A grad u
    std::vector<double> transport;  // sum integral u^i A^{lj} d_i d_j v_j^l
    std::vector<double> square;     // (div A^2, v_j)
    std::vector<double> cubic;      // (div |A|^2 A, v_j)
    double a4 = 0.0;                // integral |A|^4
};

inline RawTerms raw_terms(const SpectralState& s, const Transform& tr, Workspace& ws)
{
    require_same_size(s, tr.basis());
    detail::synth_state(s.coeffs, tr, ws);
    RawTerms r;
    const std::size_t P = tr.points();
    double a4 = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
        ws.t[0][p] = ws.u1[p] * ws.u1[p];
        ws.t[1][p] = ws.u1[p] * ws.u2[p];
        ws.t[2][p] = ws.u2[p] * ws.u2[p];
        double a2 = detail::local_at(ws, p).a2();
        a4 += a2 * a2;
    }
    r.a4 = a4 * tr.cell();
    r.convection = detail::pair_t012(tr, ws);
    for (std::size_t p = 0; p < P; ++p) {
        auto L = detail::local_at(ws, p);
        ws.t[0][p] = -L.s11();
        ws.t[1][p] = -L.s12();
        ws.t[2][p] = -L.s22();
    }
    r.shear = detail::pair_t012(tr, ws);
    for (std::size_t p = 0; p < P; ++p) {
        auto L = detail::local_at(ws, p);
        ws.t[0][p] = -L.q11();
        ws.t[1][p] = -L.q12();
        ws.t[2][p] = -L.q22();
    }
    r.square = detail::pair_t012(tr, ws);
    for (std::size_t p = 0; p < P; ++p) {
        auto L = detail::local_at(ws, p);
        double a2 = L.a2();
        ws.t[0][p] = -a2 * L.a11;
        ws.t[1][p] = -a2 * L.a12;
        ws.t[2][p] = -a2 * L.a22;
    }
    r.cubic = detail::pair_t012(tr, ws);
    r.transport.assign(s.size(), 0.0);
    detail::fill_transport(tr, ws, 1.0);
    detail::pair_transport(tr, ws, r.transport);
    return r;
}

inline std::vector<double> laplacian_coeffs(const SpectralState& s, const ModeSet& basis, double mu)
{
    std::vector<double> out(s.size());
    for (std::size_t j = 0; j < s.size(); ++j)
        out[j] = -mu * basis[j].k2() * s[j];
    return out;
}

inline DriftBreakdown assemble_drift(const SpectralState& s, double t, const PhysicalParams& params,
                                     const ForceModel& force, const Transform& tr, Workspace& ws)
{
    RawTerms r = raw_terms(s, tr, ws);
    DriftBreakdown d;
    const std::size_t n = s.size();
    d.laplacian = laplacian_coeffs(s, tr.basis(), params.mu);
    d.convection = r.convection;
    d.alpha1_shear.resize(n);
    d.alpha1_transport.resize(n);
    d.alpha2_term.resize(n);
    d.beta_term.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        d.alpha1_shear[j] = params.alpha1 * r.shear[j];
        d.alpha1_transport[j] = params.alpha1 * r.transport[j];
        d.alpha2_term[j] = params.alpha2 * r.square[j];
        d.beta_term[j] = params.beta * r.cubic[j];
    }
    d.force = force.coeffs(t, n);
    for (const auto* v : {&d.laplacian, &d.convection, &d.alpha1_shear, &d.alpha1_transport, &d.alpha2_term,
                          &d.beta_term, &d.force})
        detail::check_finite(*v, "drift assembly");
    return d;
}

inline DriftBreakdown assemble_drift(const SpectralState& s, double t, const PhysicalParams& params,
                                     const ForceModel& force, const ModeSet& basis, int M)
{
    Transform tr(basis, M);
    Workspace ws;
    return assemble_drift(s, t, params, force, tr, ws);
}

// All nonlinear drift terms in one pass: 6 syntheses and 9 analyses.
// Adds scale * (nonlinear drift) to out and returns integral |A|^4.
inline double add_nonlinear_drift(const std::vector<double>& c, const PhysicalParams& params, double scale,
                                  const Transform& tr, Workspace& ws, std::vector<double>& out)
{
    detail::synth_state(c, tr, ws);
    const std::size_t P = tr.points();
    double a4 = 0.0;
    const double a1 = params.alpha1, a2c = params.alpha2, b = params.beta;
    for (std::size_t p = 0; p < P; ++p) {
        auto L = detail::local_at(ws, p);
        double u1 = ws.u1[p], u2 = ws.u2[p];
        double a2 = L.a2();
        a4 += a2 * a2;
        ws.t[0][p] = scale * (u1 * u1 - a1 * L.s11() - a2c * L.q11() - b * a2 * L.a11);
        ws.t[1][p] = scale * (u1 * u2 - a1 * L.s12() - a2c * L.q12() - b * a2 * L.a12);
        ws.t[2][p] = scale * (u2 * u2 - a1 * L.s22() - a2c * L.q22() - b * a2 * L.a22);
    }
    for (int i = 0; i < 3; ++i)
        tr.analyze(ws.t[i].data(), ws.hat[i].data(), ws.scratch);
    pair_symmetric(tr, ws.hat[0].data(), ws.hat[1].data(), ws.hat[2].data(), out.data());
    if (a1 != 0.0) {
        detail::fill_transport(tr, ws, scale * a1);
        detail::pair_transport(tr, ws, out);
    }
    return a4 * tr.cell();
}

// Integral |A|^4 alone, for steps where the nonlinear drift is not needed.
inline double a4_only(const std::vector<double>& c, const Transform& tr, Workspace& ws)
{
    detail::synth_gradient(c, tr, ws);
    double a4 = 0.0;
    for (std::size_t p = 0; p < tr.points(); ++p) {
        double a2 = detail::local_at(ws, p).a2();
        a4 += a2 * a2;
    }
    return a4 * tr.cell();
}

// b(u, y, z) = integral (u . grad y) . z
inline double trilinear_b(const SpectralState& u, const SpectralState& y, const SpectralState& z,
                          const Transform& tr)
{
    require_same_size(u, tr.basis());
    require_same_size(y, tr.basis());
    require_same_size(z, tr.basis());
    Workspace wu, wy, wz;
    detail::synth_velocity(u.coeffs, tr, wu);
    detail::synth_gradient(y.coeffs, tr, wy);
    detail::synth_velocity(z.coeffs, tr, wz);
    double acc = 0.0;
    for (std::size_t p = 0; p < tr.points(); ++p) {
        double c1 = wu.u1[p] * wy.g11[p] + wu.u2[p] * wy.g12[p];
        double c2 = wu.u1[p] * wy.g21[p] + wu.u2[p] * wy.g22[p];
        acc += c1 * wz.u1[p] + c2 * wz.u2[p];
    }
    return acc * tr.cell();
}

inline double trilinear_b(const SpectralState& u, const SpectralState& y, const SpectralState& z,
                          const ModeSet& basis, int M)
{
    return trilinear_b(u, y, z, Transform(basis, M));
}

struct Residual {
    double value = 0.0;
    double scale = 0.0; // integral of the absolute pointwise integrand

    double relative() const { return std::abs(value) / (1.0 + scale); }
};

struct PairingIdentities {
    Residual convection; // (u . grad u, u)
    Residual transport;  // (div(u . grad A), u)
    Residual cubic;      // (div(|A|^2 A), u) + ||A||_4^4 / 2
    Residual square;     // (div(A^2), u) + integral A^2 : A / 2

    double max_relative() const
    {
        return std::max(std::max(convection.relative(), transport.relative()),
                        std::max(cubic.relative(), square.relative()));
    }
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b)
{
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j)
        acc += a[j] * b[j];
    return acc;
}

// Residuals come from the assembled coefficients paired with u; scales from the grid.
inline PairingIdentities energy_pairing_identities(const SpectralState& s, const Transform& tr)
{
    Workspace ws;
    RawTerms r = raw_terms(s, tr, ws);
    PairingIdentities out;
    out.convection.value = -dot(r.convection, s.coeffs);
    out.transport.value = dot(r.transport, s.coeffs);
    out.cubic.value = dot(r.cubic, s.coeffs) + 0.5 * r.a4;
    const std::size_t P = tr.points();

    // Second derivatives of u for the transport integrand scale.
    std::array<std::vector<double>, 6> hess;
    std::vector<cplx> amp(tr.waves());
    for (int l = 0; l < 2; ++l)
        for (int d = 0; d < 3; ++d) {
            for (std::size_t w = 0; w < tr.waves(); ++w) {
                double p = l == 0 ? tr.px(w) : tr.py(w);
                double ki = d == 2 ? tr.ky(w) : tr.kx(w);
                double kj = d == 0 ? tr.kx(w) : tr.ky(w);
                amp[w] = -ki * kj * p * ws.z[w];
            }
            hess[3 * l + d].resize(P);
            tr.synthesize(amp.data(), hess[3 * l + d].data(), ws.scratch);
        }
    double sc = 0.0, st = 0.0, sq = 0.0, a3 = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
        auto L = detail::local_at(ws, p);
        double u1 = ws.u1[p], u2 = ws.u2[p];
        sc += std::abs(u1 * (u1 * L.g11 + u2 * L.g12) + u2 * (u1 * L.g21 + u2 * L.g22));
        double tr1 = u1 * (L.a11 * hess[0][p] + L.a12 * hess[1][p]) + u2 * (L.a11 * hess[1][p] + L.a12 * hess[2][p]);
        double tr2 = u1 * (L.a12 * hess[3][p] + L.a22 * hess[4][p]) + u2 * (L.a12 * hess[4][p] + L.a22 * hess[5][p]);
        st += std::abs(tr1 + tr2);
        double qg = L.q11() * L.g11 + L.q12() * (L.g12 + L.g21) + L.q22() * L.g22;
        sq += std::abs(qg);
        a3 += L.q11() * L.a11 + 2.0 * L.q12() * L.a12 + L.q22() * L.a22;
    }
    out.convection.scale = sc * tr.cell();
    out.transport.scale = st * tr.cell();
    out.cubic.scale = 0.5 * r.a4;
    out.square.value = dot(r.square, s.coeffs) + 0.5 * a3 * tr.cell();
    out.square.scale = sq * tr.cell();
    return out;
}

inline PairingIdentities energy_pairing_identities(const SpectralState& s, const PhysicalParams&,
                                                   const ModeSet& basis, int M)
{
    return energy_pairing_identities(s, Transform(basis, M));
}

// Coefficients of P_n Q(u), Q(u) = -mu Lap u - alpha1 div S - alpha2 div A^2 - beta div |A|^2 A.
inline std::vector<double> q_operator(const SpectralState& s, const PhysicalParams& params, const Transform& tr,
                                      Workspace& ws)
{
    require_same_size(s, tr.basis());
    detail::synth_state(s.coeffs, tr, ws);
    for (std::size_t p = 0; p < tr.points(); ++p) {
        auto L = detail::local_at(ws, p);
        double a2 = L.a2();
        ws.t[0][p] = params.alpha1 * L.s11() + params.alpha2 * L.q11() + params.beta * a2 * L.a11;
        ws.t[1][p] = params.alpha1 * L.s12() + params.alpha2 * L.q12() + params.beta * a2 * L.a12;
        ws.t[2][p] = params.alpha1 * L.s22() + params.alpha2 * L.q22() + params.beta * a2 * L.a22;
    }
    std::vector<double> out = detail::pair_t012(tr, ws);
    for (std::size_t j = 0; j < s.size(); ++j)
        out[j] += params.mu * tr.basis()[j].k2() * s[j];
    detail::check_finite(out, "q_operator");
    return out;
}

inline std::vector<double> q_operator(const SpectralState& s, const PhysicalParams& params, const ModeSet& basis,
                                      int M)
{
    Transform tr(basis, M);
    Workspace ws;
    return q_operator(s, params, tr, ws);
}

struct GapResult {
    double gap = 0.0;   // sum_j (Q(u) - Q(y))_j (u - y)_j
    double grid = 0.0;  // the same pairing by direct grid quadrature
    double scale = 0.0; // integral of absolute pointwise integrands
};

inline GapResult monotonicity_gap_detail(const SpectralState& u, const SpectralState& y,
                                         const PhysicalParams& params, const Transform& tr)
{
    Workspace wu, wy;
    auto qu = q_operator(u, params, tr, wu);
    auto qy = q_operator(y, params, tr, wy);
    GapResult r;
    for (std::size_t j = 0; j < u.size(); ++j)
        r.gap += (qu[j] - qy[j]) * (u[j] - y[j]);
    double g = 0.0, sc = 0.0;
    for (std::size_t p = 0; p < tr.points(); ++p) {
        auto A = detail::local_at(wu, p);
        auto B = detail::local_at(wy, p);
        double w11 = A.g11 - B.g11, w12 = A.g12 - B.g12, w21 = A.g21 - B.g21, w22 = A.g22 - B.g22;
        auto contract = [&](double t11, double t12, double t22) {
            return t11 * w11 + t12 * (w12 + w21) + t22 * w22;
        };
        double lin = params.mu * (w11 * w11 + w12 * w12 + w21 * w21 + w22 * w22);
        double sh = params.alpha1 * contract(A.s11() - B.s11(), A.s12() - B.s12(), A.s22() - B.s22());
        double sq = params.alpha2 * contract(A.q11() - B.q11(), A.q12() - B.q12(), A.q22() - B.q22());
        double aa = A.a2(), bb = B.a2();
        double cu = params.beta * contract(aa * A.a11 - bb * B.a11, aa * A.a12 - bb * B.a12, aa * A.a22 - bb * B.a22);
        g += lin + sh + sq + cu;
        sc += std::abs(lin) + std::abs(sh) + std::abs(sq) + std::abs(cu);
    }
    r.grid = g * tr.cell();
    r.scale = sc * tr.cell();
    return r;
}

inline double monotonicity_gap(const SpectralState& u, const SpectralState& y, const PhysicalParams& params,
                               const ModeSet& basis, int M)
{
    return monotonicity_gap_detail(u, y, params, Transform(basis, M)).gap;
}

} // namespace tgf
