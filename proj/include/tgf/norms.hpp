#pragma once

#include "tgf/basis.hpp"
#include "tgf/errors.hpp"
#include "tgf/grid.hpp"
#include "tgf/state.hpp"

#include <cmath>
#include <vector>

namespace tgf {

inline double norm_h_sq(const SpectralState& s)
{
    double acc = 0.0;
    for (double c : s.coeffs)
        acc += c * c;
    return acc;
}

inline double norm_h(const SpectralState& s) { return std::sqrt(norm_h_sq(s)); }

inline double norm_v_sq(const SpectralState& s, const ModeSet& basis)
{
    require_same_size(s, basis);
    double acc = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j)
        acc += basis[j].lambda * s[j] * s[j];
    return acc;
}

inline double norm_v(const SpectralState& s, const ModeSet& basis) { return std::sqrt(norm_v_sq(s, basis)); }

// ||grad u||_2^2
inline double grad_l2_sq(const SpectralState& s, const ModeSet& basis)
{
    require_same_size(s, basis);
    double acc = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j)
        acc += basis[j].k2() * s[j] * s[j];
    return acc;
}

// integral of |A|^4 with |A|^2 = sum_ij A_ij^2
inline double a_l4_pow4(const GridTensorField& g)
{
    double acc = 0.0;
    for (std::size_t p = 0; p < g.points(); ++p) {
        double a2 = g.a11[p] * g.a11[p] + 2.0 * g.a12[p] * g.a12[p] + g.a22[p] * g.a22[p];
        acc += a2 * a2;
    }
    return acc * g.cell();
}

inline double norm_a_l4(const GridTensorField& g) { return std::pow(a_l4_pow4(g), 0.25); }

inline double w14_norm(const GridTensorField& g)
{
    double acc = 0.0;
    for (std::size_t p = 0; p < g.points(); ++p) {
        double u2 = g.u1[p] * g.u1[p] + g.u2[p] * g.u2[p];
        double d2 = g.g11[p] * g.g11[p] + g.g12[p] * g.g12[p] + g.g21[p] * g.g21[p] + g.g22[p] * g.g22[p];
        acc += u2 * u2 + d2 * d2;
    }
    return std::pow(acc * g.cell(), 0.25);
}

inline double l2_sq_grid(const GridTensorField& g)
{
    double acc = 0.0;
    for (std::size_t p = 0; p < g.points(); ++p)
        acc += g.u1[p] * g.u1[p] + g.u2[p] * g.u2[p];
    return acc * g.cell();
}

inline double grad_l2_sq_grid(const GridTensorField& g)
{
    double acc = 0.0;
    for (std::size_t p = 0; p < g.points(); ++p)
        acc += g.g11[p] * g.g11[p] + g.g12[p] * g.g12[p] + g.g21[p] * g.g21[p] + g.g22[p] * g.g22[p];
    return acc * g.cell();
}

// ||u||_{W^{1,4}} / ||A(u)||_4
inline double korn_ratio(const SpectralState& s, const Transform& tr)
{
    if (norm_h_sq(s) == 0.0)
        throw DomainError("korn_ratio is undefined for the zero state");
    GridTensorField g = to_grid(s, tr);
    return w14_norm(g) / norm_a_l4(g);
}

inline double korn_ratio(const SpectralState& s, const ModeSet& basis, int M)
{
    return korn_ratio(s, Transform(basis, M));
}

// Solves (f~, g)_V = (f, g) for all g in the span.
inline std::vector<double> riesz_stokes(const std::vector<double>& f, const ModeSet& basis)
{
    if (f.size() != basis.size())
        throw ConfigError("riesz_stokes: coefficient count does not match basis");
    std::vector<double> out(f.size());
    for (std::size_t j = 0; j < f.size(); ++j)
        out[j] = f[j] / basis[j].lambda;
    return out;
}

} // namespace tgf
