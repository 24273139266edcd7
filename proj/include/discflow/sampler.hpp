#ifndef DISCFLOW_SAMPLER_HPP
#define DISCFLOW_SAMPLER_HPP

#include <random>
#include <stdexcept>
#include <vector>

#include "field.hpp"

namespace discflow {

// Random smooth vector field with u.n = 0 on the physical boundary:
//   u = perp_grad[(1-|w|^2)   Q(w)]  +  grad[(1-|w|^2)^2 G(w)],   w = phi(x).
// The stream factor vanishes on the disc boundary (tangent rotational part),
// the potential factor has vanishing value and normal derivative there, and
// conformality carries both properties to the image domain. Q, G are random
// combinations of harmonic polynomials Re z^k, Im z^k.
class SlipFieldSpec {
public:
    SlipFieldSpec(unsigned seed, int modes) {
        if (modes < 1) throw std::invalid_argument("SlipFieldSpec: modes >= 1");
        std::mt19937 rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        qa_.resize(modes + 1);
        qb_.resize(modes + 1);
        ga_.resize(modes + 1);
        gb_.resize(modes + 1);
        for (int k = 0; k <= modes; ++k) {
            const double damp = 1.0 / ((k + 1.0) * (k + 1.0));
            qa_[k] = gauss(rng) * damp;
            qb_[k] = gauss(rng) * damp;
            ga_[k] = gauss(rng) * damp;
            gb_[k] = gauss(rng) * damp;
        }
    }

    // physical velocity at x, given z = phi(x) and grad phi at x
    Vec2 eval(Vec2 z, const Mat2& gphi) const {
        const Vec2 gq = grad_poly(z, qa_, qb_);
        const Vec2 gg = grad_poly(z, ga_, gb_);
        const double q = eval_poly(z, qa_, qb_);
        const double gpol = eval_poly(z, ga_, gb_);
        const double s = z.norm2();
        // grad_z of stream eta = (1-s) Q and potential chi = (1-s)^2 G
        const Vec2 geta = gq * (1.0 - s) - z * (2.0 * q);
        const Vec2 gchi = gg * ((1.0 - s) * (1.0 - s)) - z * (4.0 * (1.0 - s) * gpol);
        // grad_x(f o phi)_i = d_i phi_k (grad_z f)_k
        const Vec2 grad_eta = gphi.apply_transpose(geta);
        const Vec2 grad_chi = gphi.apply_transpose(gchi);
        return Vec2{grad_eta.y, -grad_eta.x} + grad_chi;
    }

    VectorField to_field(const GridPtr& grid) const {
        VectorField u(grid);
        for (int c = 0; c < grid->size(); ++c) {
            const Vec2 z = grid->disc_point(c);
            const Mat2 g = ConformalMap::gradient_from_dphi(grid->map().dphi_at(z.as_complex()));
            u.set(c, eval(z, g));
        }
        return u;
    }

    // max |u.n| over uniformly spaced boundary frames
    double boundary_tangency_residual(const ConformalMap& map, int nsamples = 128) const {
        double worst = 0.0;
        for (int k = 0; k < nsamples; ++k) {
            const double s = 2.0 * M_PI * k / nsamples;
            const BoundaryFrame f = map.boundary_frame(s);
            const Vec2 z{std::cos(s), std::sin(s)};
            const Mat2 g = ConformalMap::gradient_from_dphi(map.dphi_at(z.as_complex()));
            worst = std::max(worst, std::abs(eval(z, g).dot(f.n)));
        }
        return worst;
    }

private:
    static double eval_poly(Vec2 z, const std::vector<double>& a, const std::vector<double>& b) {
        double out = 0.0;
        Complex zk(1.0, 0.0);
        const Complex zc = z.as_complex();
        for (size_t k = 0; k < a.size(); ++k) {
            out += a[k] * zk.real() + b[k] * zk.imag();
            zk *= zc;
        }
        return out;
    }

    static Vec2 grad_poly(Vec2 z, const std::vector<double>& a, const std::vector<double>& b) {
        // grad Re z^k = k (Re z^{k-1}, -Im z^{k-1}); grad Im z^k = k (Im, Re)
        Vec2 out{0.0, 0.0};
        Complex zk(1.0, 0.0);
        const Complex zc = z.as_complex();
        for (size_t k = 1; k < a.size(); ++k) {
            const double kk = static_cast<double>(k);
            out.x += kk * (a[k] * zk.real() + b[k] * zk.imag());
            out.y += kk * (-a[k] * zk.imag() + b[k] * zk.real());
            zk *= zc;
        }
        return out;
    }

    std::vector<double> qa_, qb_, ga_, gb_;
};

inline VectorField random_slip_field(const GridPtr& grid, unsigned seed, int modes) {
    return SlipFieldSpec(seed, modes).to_field(grid);
}

} // namespace discflow

#endif
