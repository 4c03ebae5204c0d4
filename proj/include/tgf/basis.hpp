#pragma once

#include "tgf/errors.hpp"
#include "tgf/params.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <tuple>
#include <vector>

namespace tgf {

enum class Parity : int { Cos = 0, Sin = 1 };

// v(x) = p * cos(k.x) / (pi*sqrt(2)) or the sine analogue; p = (ky, -kx)/|k|.
struct DivFreeMode {
    int kx = 0;
    int ky = 0;
    Parity parity = Parity::Cos;
    double px = 0.0;
    double py = 0.0;
    double lambda = 1.0;

    int k2() const { return kx * kx + ky * ky; }
};

struct ModeSet {
    int n_max = 0;
    double alpha1 = 0.0;
    std::vector<DivFreeMode> modes;

    std::size_t size() const { return modes.size(); }
    const DivFreeMode& operator[](std::size_t j) const { return modes[j]; }

    // Cosine and sine partners sit next to each other, so wave w owns modes 2w and 2w+1.
    std::size_t wave_count() const { return modes.size() / 2; }

    // Returns size() when (kx, ky) is not a stored representative.
    std::size_t index_of(int kx, int ky, Parity parity) const
    {
        for (std::size_t j = 0; j < modes.size(); ++j)
            if (modes[j].kx == kx && modes[j].ky == ky && modes[j].parity == parity)
                return j;
        return modes.size();
    }
};

inline double mode_scale() { return 1.0 / (M_PI * std::sqrt(2.0)); }

inline ModeSet build_basis(int n_max, const PhysicalParams& params)
{
    if (n_max < 1)
        throw ConfigError("n_max must be >= 1");
    ModeSet set;
    set.n_max = n_max;
    set.alpha1 = params.alpha1;
    for (int kx = 0; kx <= n_max; ++kx) {
        for (int ky = -n_max; ky <= n_max; ++ky) {
            if (kx == 0 && ky <= 0)
                continue;
            double norm = std::sqrt(double(kx * kx + ky * ky));
            for (Parity parity : {Parity::Cos, Parity::Sin}) {
                DivFreeMode m;
                m.kx = kx;
                m.ky = ky;
                m.parity = parity;
                m.px = ky / norm;
                m.py = -kx / norm;
                m.lambda = 1.0 + params.alpha1 * (kx * kx + ky * ky);
                set.modes.push_back(m);
            }
        }
    }
    std::sort(set.modes.begin(), set.modes.end(), [](const DivFreeMode& a, const DivFreeMode& b) {
        return std::make_tuple(a.k2(), a.kx, a.ky, int(a.parity)) <
               std::make_tuple(b.k2(), b.kx, b.ky, int(b.parity));
    });
    return set;
}

inline std::vector<double> lambdas(const ModeSet& basis)
{
    std::vector<double> out(basis.size());
    for (std::size_t j = 0; j < basis.size(); ++j)
        out[j] = basis[j].lambda;
    return out;
}

} // namespace tgf
