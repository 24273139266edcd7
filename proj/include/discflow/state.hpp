#ifndef DISCFLOW_STATE_HPP
#define DISCFLOW_STATE_HPP

#include <functional>
#include <stdexcept>

#include "field.hpp"

namespace discflow {

struct state_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Physical parameters: P = rho^gamma, lambda(rho) = rho^beta (a = b = 1).
struct Params {
    double mu = 1.0;
    double beta = 1.5;
    double gamma = 1.5;
    double cfl = 0.4;
    double t_end = 0.5;
    // optional manufactured momentum source f_u(x, t)
    std::function<Vec2(Vec2, double)> forcing_u;

    // bulk-viscosity exponent range of the global-existence theorem
    bool theorem_regime() const { return beta > 4.0 / 3.0 && gamma > 1.0; }

    void validate() const {
        if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
        if (!(beta > 1.0)) throw std::invalid_argument("beta must exceed 1");
        if (!(gamma > 1.0)) throw std::invalid_argument("gamma must exceed 1");
        if (!(cfl > 0.0 && cfl < 1.0)) throw std::invalid_argument("cfl must lie in (0,1)");
    }

    double pressure(double rho) const {
        if (rho <= 0.0) return 0.0;
        return gamma == 1.5 ? rho * std::sqrt(rho) : std::pow(rho, gamma);
    }
    double lambda(double rho) const {
        if (rho <= 0.0) return 0.0;
        return beta == 1.5 ? rho * std::sqrt(rho) : std::pow(rho, beta);
    }
};

struct State {
    ScalarField rho;
    VectorField u;
    double t = 0.0;

    explicit State(GridPtr grid) : rho(grid, 0.0), u(grid) {}
    State(ScalarField rho_, VectorField u_, double t_) : rho(std::move(rho_)), u(std::move(u_)), t(t_) {}

    const DiscGrid& grid() const { return rho.grid(); }
    GridPtr grid_ptr() const { return rho.grid_ptr(); }

    void check(bool require_positive = false) const {
        if (!rho.all_finite() || !u.all_finite()) throw state_error("state contains non-finite values");
        for (int c = 0; c < grid().size(); ++c) {
            if (rho[c] < 0.0) throw state_error("negative density");
            if (require_positive && rho[c] <= 0.0) throw state_error("vacuum cell");
        }
    }
};

} // namespace discflow

#endif
