#pragma once

#include <functional>
#include <optional>
#include <string>

#include "rdcircle/errors.hpp"
#include "rdcircle/expr.hpp"

namespace rdcircle {

/// Parameters mirroring the dissipativity hypothesis: |f(t,y,z)| bounded by
/// eta(r)(1+|z|^gamma) for |y| <= r, and y f(t,y,0) < 0 for |y| >= delta.
struct Dissipativity {
    double gamma = 0.0;  // in [0, 2)
    std::function<double(double)> eta_bound;
    double delta = 1.0;  // > 0
};

/// The reaction term f(t, y, z) of u_t = u_xx + f(t, u, u_x), together with
/// its partials in y and z, the period, and structural flags. Construction
/// validates periodicity, claimed z-symmetry, and the partials against
/// finite differences on random samples.
class Nonlinearity {
public:
    using Fn = std::function<double(double, double, double)>;

    static Nonlinearity from_functions(Fn f, Fn df_dy, Fn df_dz, double period_T,
                                       bool symmetric_in_z,
                                       std::optional<Dissipativity> diss = std::nullopt,
                                       std::string source = "");

    double f(double t, double y, double z) const { return f_(t, y, z); }
    double df_dy(double t, double y, double z) const { return df_dy_(t, y, z); }
    double df_dz(double t, double y, double z) const { return df_dz_(t, y, z); }

    double period() const { return period_; }
    bool symmetric_in_z() const { return symmetric_in_z_; }
    const std::optional<Dissipativity>& dissipativity() const { return dissipativity_; }
    /// Expression text when built by the parser, empty otherwise.
    const std::string& source() const { return source_; }

private:
    Nonlinearity() = default;

    Fn f_, df_dy_, df_dz_;
    double period_ = 1.0;
    bool symmetric_in_z_ = false;
    std::optional<Dissipativity> dissipativity_;
    std::string source_;
};

/// Builds a Nonlinearity from an expression over t, u, p with the partials
/// produced by symbolic differentiation. z-symmetry is detected structurally
/// (p only inside even powers) and confirmed numerically. Explicit
/// t-dependence must be T-periodic by construction (sin/cos harmonics).
Nonlinearity parse_nonlinearity(const std::string& expr, double period_T,
                                std::optional<Dissipativity> diss = std::nullopt);

}  // namespace rdcircle
