#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace tgf {

struct PhysicalParams {
    double mu = 1.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double beta = 1.0;

    bool fosdick_ok() const { return std::abs(alpha1 + alpha2) <= std::sqrt(24.0 * mu * beta); }

    bool monotone_ok() const
    {
        double lhs = 3.0 * alpha1 * alpha1 + 4.0 * (alpha1 + alpha2) * (alpha1 + alpha2);
        double rhs = 24.0 * mu * beta;
        return lhs <= rhs * (1.0 + 1e-12);
    }

    bool basic_ok() const { return mu > 0.0 && beta > 0.0 && alpha1 >= 0.0; }
};

inline constexpr const char* kFosdickText = "|alpha1+alpha2| <= sqrt(24*mu*beta)";
inline constexpr const char* kMonotoneText = "3*alpha1^2 + 4*(alpha1+alpha2)^2 <= 24*mu*beta";

// Every reason the parameters are unusable for a simulation.
inline std::vector<std::string> admissibility_errors(const PhysicalParams& p)
{
    std::vector<std::string> out;
    if (!(p.mu > 0.0))
        out.push_back("params.mu must be > 0");
    if (!(p.beta > 0.0))
        out.push_back("params.beta must be > 0");
    if (!(p.alpha1 >= 0.0))
        out.push_back("params.alpha1 must be >= 0");
    if (!p.fosdick_ok())
        out.push_back(std::string("constitutive parameters violate the Fosdick-Rajagopal condition ") + kFosdickText);
    if (!p.monotone_ok())
        out.push_back(std::string("constitutive parameters violate the monotonicity restriction ") + kMonotoneText);
    return out;
}

} // namespace tgf
