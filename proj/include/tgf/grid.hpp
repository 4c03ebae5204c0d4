#pragma once

#include "tgf/basis.hpp"
#include "tgf/errors.hpp"
#include "tgf/state.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

namespace tgf {

using cplx = std::complex<double>;

inline void require_resolution(int n_max, int M)
{
    if (M < 4 * n_max)
        throw ConfigError("grid resolution M=" + std::to_string(M) + " is below 4*n_max=" +
                          std::to_string(4 * n_max) + " (dealiasing headroom)");
}

// Samples on the uniform M x M grid; point (x_i, y_j) is stored at i*M + j.
struct GridTensorField {
    int M = 0;
    std::vector<double> u1, u2;
    std::vector<double> g11, g12, g21, g22; // g_lm = d_m u_l
    std::vector<double> a11, a12, a22;

    std::size_t points() const { return std::size_t(M) * M; }
    double cell() const { return (2.0 * M_PI / M) * (2.0 * M_PI / M); }

    double max_divergence() const
    {
        double m = 0.0;
        for (std::size_t p = 0; p < points(); ++p)
            m = std::max(m, std::abs(g11[p] + g22[p]));
        return m;
    }

    double trace_integral() const
    {
        double s = 0.0;
        for (std::size_t p = 0; p < points(); ++p)
            s += a11[p] + a22[p];
        return s * cell();
    }
};

// Separable direct transforms between wave amplitudes and grid samples.
class Transform {
public:
    Transform(const ModeSet& basis, int M) : n_(basis.n_max), M_(M), basis_(basis)
    {
        require_resolution(n_, M);
        const double dx = 2.0 * M_PI / M;
        h2_ = dx * dx;
        cx_.resize(std::size_t(n_ + 1) * M);
        sx_.resize(cx_.size());
        cy_.resize(std::size_t(2 * n_ + 1) * M);
        sy_.resize(cy_.size());
        for (int k = -n_; k <= n_; ++k)
            for (int j = 0; j < M; ++j) {
                // Reduce k*j mod M first so the table is exactly periodic.
                long r = ((long(k) * j) % M + M) % M;
                cy_[(k + n_) * M + j] = std::cos(r * dx);
                sy_[(k + n_) * M + j] = std::sin(r * dx);
            }
        for (int k = 0; k <= n_; ++k)
            for (int i = 0; i < M; ++i) {
                long r = (long(k) * i) % M;
                cx_[k * M + i] = std::cos(r * dx);
                sx_[k * M + i] = std::sin(r * dx);
            }
        std::size_t W = basis.wave_count();
        kx_.resize(W);
        ky_.resize(W);
        px_.resize(W);
        py_.resize(W);
        for (std::size_t w = 0; w < W; ++w) {
            const auto& m = basis[2 * w];
            kx_[w] = m.kx;
            ky_[w] = m.ky;
            px_[w] = m.px;
            py_[w] = m.py;
        }
    }

    int n_max() const { return n_; }
    int M() const { return M_; }
    std::size_t points() const { return std::size_t(M_) * M_; }
    std::size_t waves() const { return kx_.size(); }
    double cell() const { return h2_; }
    const ModeSet& basis() const { return basis_; }
    int kx(std::size_t w) const { return kx_[w]; }
    int ky(std::size_t w) const { return ky_[w]; }
    double px(std::size_t w) const { return px_[w]; }
    double py(std::size_t w) const { return py_[w]; }

    struct Scratch {
        std::vector<double> re, im;
    };

    // out(x) = Re sum_w amp[w] exp(i k_w . x)
    void synthesize(const cplx* amp, double* out, Scratch& s) const
    {
        const int M = M_;
        s.re.assign(std::size_t(n_ + 1) * M, 0.0);
        s.im.assign(s.re.size(), 0.0);
        for (std::size_t w = 0; w < waves(); ++w) {
            const double zr = amp[w].real(), zi = amp[w].imag();
            if (zr == 0.0 && zi == 0.0)
                continue;
            double* gr = &s.re[kx_[w] * M];
            double* gi = &s.im[kx_[w] * M];
            const double* c = &cy_[(ky_[w] + n_) * M];
            const double* sn = &sy_[(ky_[w] + n_) * M];
            for (int j = 0; j < M; ++j) {
                gr[j] += zr * c[j] - zi * sn[j];
                gi[j] += zr * sn[j] + zi * c[j];
            }
        }
        for (int i = 0; i < M; ++i) {
            double* row = out + std::size_t(i) * M;
            for (int j = 0; j < M; ++j)
                row[j] = 0.0;
            for (int k = 0; k <= n_; ++k) {
                const double c = cx_[k * M + i], sn = sx_[k * M + i];
                const double* gr = &s.re[k * M];
                const double* gi = &s.im[k * M];
                for (int j = 0; j < M; ++j)
                    row[j] += c * gr[j] - sn * gi[j];
            }
        }
    }

    // out[w] = sum_x f(x) exp(-i k_w . x), without the cell weight.
    void analyze(const double* f, cplx* out, Scratch& s) const
    {
        const int M = M_;
        s.re.assign(std::size_t(n_ + 1) * M, 0.0);
        s.im.assign(s.re.size(), 0.0);
        for (int i = 0; i < M; ++i) {
            const double* row = f + std::size_t(i) * M;
            for (int k = 0; k <= n_; ++k) {
                const double c = cx_[k * M + i], sn = sx_[k * M + i];
                double* hr = &s.re[k * M];
                double* hi = &s.im[k * M];
                for (int j = 0; j < M; ++j) {
                    hr[j] += c * row[j];
                    hi[j] -= sn * row[j];
                }
            }
        }
        for (std::size_t w = 0; w < waves(); ++w) {
            const double* hr = &s.re[kx_[w] * M];
            const double* hi = &s.im[kx_[w] * M];
            const double* c = &cy_[(ky_[w] + n_) * M];
            const double* sn = &sy_[(ky_[w] + n_) * M];
            double re = 0.0, im = 0.0;
            for (int j = 0; j < M; ++j) {
                re += hr[j] * c[j] + hi[j] * sn[j];
                im += hi[j] * c[j] - hr[j] * sn[j];
            }
            out[w] = cplx(re, im);
        }
    }

    // Complex amplitude z_w with u = Re sum_w p_w z_w exp(i k_w . x).
    std::vector<cplx> amplitudes(const std::vector<double>& c) const
    {
        const double s = mode_scale();
        std::vector<cplx> z(waves());
        for (std::size_t w = 0; w < waves(); ++w)
            z[w] = s * cplx(c[2 * w], -c[2 * w + 1]);
        return z;
    }

private:
    int n_;
    int M_;
    ModeSet basis_;
    double h2_ = 0.0;
    std::vector<double> cx_, sx_, cy_, sy_;
    std::vector<int> kx_, ky_;
    std::vector<double> px_, py_;
};

namespace detail {

// component 0/1 picks p_x/p_y; deriv -1 is the value, 0/1 is d/dx or d/dy.
inline void synth_field(const Transform& tr, const std::vector<cplx>& z, int component, int deriv,
                        std::vector<double>& out, Transform::Scratch& s, std::vector<cplx>& amp)
{
    for (std::size_t w = 0; w < tr.waves(); ++w) {
        double p = component == 0 ? tr.px(w) : tr.py(w);
        cplx a = p * z[w];
        if (deriv == 0)
            a *= cplx(0.0, tr.kx(w));
        else if (deriv == 1)
            a *= cplx(0.0, tr.ky(w));
        amp[w] = a;
    }
    out.resize(tr.points());
    tr.synthesize(amp.data(), out.data(), s);
}

} // namespace detail

// Velocity, gradient and Rivlin-Ericksen tensor of the state on the grid.
inline GridTensorField to_grid(const SpectralState& state, const Transform& tr)
{
    require_same_size(state, tr.basis());
    GridTensorField g;
    g.M = tr.M();
    auto z = tr.amplitudes(state.coeffs);
    std::vector<cplx> amp(tr.waves());
    Transform::Scratch s;
    detail::synth_field(tr, z, 0, -1, g.u1, s, amp);
    detail::synth_field(tr, z, 1, -1, g.u2, s, amp);
    detail::synth_field(tr, z, 0, 0, g.g11, s, amp);
    detail::synth_field(tr, z, 0, 1, g.g12, s, amp);
    detail::synth_field(tr, z, 1, 0, g.g21, s, amp);
    detail::synth_field(tr, z, 1, 1, g.g22, s, amp);
    std::size_t P = tr.points();
    g.a11.resize(P);
    g.a12.resize(P);
    g.a22.resize(P);
    for (std::size_t p = 0; p < P; ++p) {
        g.a11[p] = 2.0 * g.g11[p];
        g.a12[p] = g.g12[p] + g.g21[p];
        g.a22[p] = 2.0 * g.g22[p];
    }
    return g;
}

inline GridTensorField to_grid(const SpectralState& state, const ModeSet& basis, int M)
{
    Transform tr(basis, M);
    return to_grid(state, tr);
}

// Coefficients (f, v_j) of a grid vector field by quadrature.
inline std::vector<double> project(const std::vector<double>& f1, const std::vector<double>& f2,
                                   const Transform& tr)
{
    if (f1.size() != tr.points() || f2.size() != tr.points())
        throw ConfigError("grid field size does not match resolution M=" + std::to_string(tr.M()));
    Transform::Scratch s;
    std::vector<cplx> F1(tr.waves()), F2(tr.waves());
    tr.analyze(f1.data(), F1.data(), s);
    tr.analyze(f2.data(), F2.data(), s);
    const double scale = tr.cell() * mode_scale();
    std::vector<double> c(2 * tr.waves());
    for (std::size_t w = 0; w < tr.waves(); ++w) {
        cplx P = tr.px(w) * F1[w] + tr.py(w) * F2[w];
        c[2 * w] = scale * P.real();
        c[2 * w + 1] = -scale * P.imag();
    }
    return c;
}

inline std::vector<double> project(const std::vector<double>& f1, const std::vector<double>& f2,
                                   const ModeSet& basis, int M)
{
    Transform tr(basis, M);
    return project(f1, f2, tr);
}

// Coefficients of sum_lm integral T_lm d_m v_j^l for a symmetric tensor field.
inline void pair_symmetric(const Transform& tr, const cplx* T11, const cplx* T12, const cplx* T22,
                           double* out)
{
    const double scale = tr.cell() * mode_scale();
    for (std::size_t w = 0; w < tr.waves(); ++w) {
        const double kx = tr.kx(w), ky = tr.ky(w), px = tr.px(w), py = tr.py(w);
        cplx Q = px * (kx * T11[w] + ky * T12[w]) + py * (kx * T12[w] + ky * T22[w]);
        out[2 * w] += scale * Q.imag();
        out[2 * w + 1] += scale * Q.real();
    }
}

// Coefficients of sum_lij integral S_lij d_i d_j v_j^l, S symmetric in (i, j).
// S1 = {S_1xx, S_1xy, S_1yy}, S2 likewise for l = 2.
inline void pair_hessian(const Transform& tr, const std::array<const cplx*, 3>& S1,
                         const std::array<const cplx*, 3>& S2, double* out)
{
    const double scale = tr.cell() * mode_scale();
    for (std::size_t w = 0; w < tr.waves(); ++w) {
        const double kx = tr.kx(w), ky = tr.ky(w), px = tr.px(w), py = tr.py(w);
        cplx r1 = kx * kx * S1[0][w] + 2.0 * kx * ky * S1[1][w] + ky * ky * S1[2][w];
        cplx r2 = kx * kx * S2[0][w] + 2.0 * kx * ky * S2[1][w] + ky * ky * S2[2][w];
        cplx R = px * r1 + py * r2;
        out[2 * w] -= scale * R.real();
        out[2 * w + 1] += scale * R.imag();
    }
}

} // namespace tgf
