#pragma once

#include "tgf/basis.hpp"
#include "tgf/errors.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace tgf {

struct SpectralState {
    std::vector<double> coeffs;
    double time = 0.0;

    SpectralState() = default;
    explicit SpectralState(std::size_t n, double t = 0.0) : coeffs(n, 0.0), time(t) {}
    SpectralState(std::vector<double> c, double t) : coeffs(std::move(c)), time(t) {}

    std::size_t size() const { return coeffs.size(); }
    double& operator[](std::size_t j) { return coeffs[j]; }
    double operator[](std::size_t j) const { return coeffs[j]; }

    bool finite() const
    {
        for (double c : coeffs)
            if (!std::isfinite(c))
                return false;
        return true;
    }
};

inline void require_same_size(const SpectralState& s, const ModeSet& basis)
{
    if (s.size() != basis.size())
        throw ConfigError("state has " + std::to_string(s.size()) + " coefficients, basis has " +
                          std::to_string(basis.size()) + " modes");
}

inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_state(std::ostream& os, const SpectralState& s, const ModeSet& basis)
{
    require_same_size(s, basis);
    os << basis.n_max << ' ' << format_double(basis.alpha1) << ' ' << format_double(s.time) << '\n';
    for (std::size_t j = 0; j < basis.size(); ++j)
        os << basis[j].kx << ' ' << basis[j].ky << ' ' << int(basis[j].parity) << ' '
           << format_double(s[j]) << '\n';
}

// Rows may cover only part of the basis; missing modes are zero.
inline SpectralState read_state(std::istream& is, const ModeSet& basis)
{
    std::string line;
    if (!std::getline(is, line))
        throw ConfigError("state file is empty");
    std::istringstream head(line);
    int n_max = 0;
    double alpha1 = 0.0, time = 0.0;
    if (!(head >> n_max >> alpha1 >> time))
        throw ConfigError("state header must read 'n_max alpha1 time'");
    SpectralState s(basis.size(), time);
    int row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::istringstream in(line);
        int kx, ky, parity;
        double c;
        if (!(in >> kx >> ky >> parity >> c) || (parity != 0 && parity != 1))
            throw ConfigError("malformed state row " + std::to_string(row) + ": '" + line + "'");
        std::size_t j = basis.index_of(kx, ky, Parity(parity));
        if (j == basis.size())
            throw ConfigError("state row " + std::to_string(row) + " names a mode outside the basis");
        s[j] = c;
    }
    return s;
}

} // namespace tgf
