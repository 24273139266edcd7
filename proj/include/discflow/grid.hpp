#ifndef DISCFLOW_GRID_HPP
#define DISCFLOW_GRID_HPP

#include <memory>
#include <stdexcept>
#include <vector>

#include "conformal.hpp"
#include "vec.hpp"

namespace discflow {

// Tensor-product polar grid on the unit disc, pushed to the physical domain
// by a conformal map. Cell centers sit at r_i = (i+1/2)/nr (no node at the
// origin), theta_j = (j+1/2) * 2 pi / ntheta. Row-major storage: ring i is
// contiguous over j.
class DiscGrid {
public:
    DiscGrid(int nr, int ntheta, ConformalMap map)
        : nr_(nr), ntheta_(ntheta), map_(std::move(map)) {
        if (nr < 4 || ntheta < 8 || ntheta % 2 != 0)
            throw std::invalid_argument("DiscGrid: need nr >= 4 and even ntheta >= 8");
        dr_ = 1.0 / nr;
        dtheta_ = 2.0 * M_PI / ntheta;
        const int n = nr * ntheta;
        z_.resize(n);
        x_.resize(n);
        jac_.resize(n);
        apsi_.resize(n);
        grad_chain_.resize(n);
        binv_.resize(n);
        for (int i = 0; i < nr; ++i) {
            const double r = (i + 0.5) * dr_;
            for (int j = 0; j < ntheta; ++j) {
                const double th = (j + 0.5) * dtheta_;
                const int c = idx(i, j);
                const Complex z = std::polar(r, th);
                const Complex dps = map_.dpsi(z);
                z_[c] = Vec2(z);
                x_[c] = Vec2(map_.psi(z));
                apsi_[c] = std::abs(dps);
                jac_[c] = std::norm(dps) * r * dr_ * dtheta_;
                // columns of B: dx/dr = psi' e^{i th}, dx/dtheta = psi' i r e^{i th}
                const Complex er = std::polar(1.0, th);
                const Complex br = dps * er;
                const Complex bt = dps * Complex(0, 1) * r * er;
                Mat2 B;
                B(0, 0) = br.real();
                B(0, 1) = bt.real();
                B(1, 0) = br.imag();
                B(1, 1) = bt.imag();
                const Mat2 Bi = B.inverse();
                binv_[c] = Bi;
                // grad_x f = B^{-T} (f_r, f_theta)
                Mat2 G;
                G(0, 0) = Bi(0, 0);
                G(0, 1) = Bi(1, 0);
                G(1, 0) = Bi(0, 1);
                G(1, 1) = Bi(1, 1);
                grad_chain_[c] = G;
            }
        }
        total_area_ = 0.0;
        for (double j : jac_) {
            if (!(j > 0.0)) throw std::runtime_error("DiscGrid: non-positive Jacobian");
            total_area_ += j;
        }
    }

    int nr() const { return nr_; }
    int ntheta() const { return ntheta_; }
    int size() const { return nr_ * ntheta_; }
    double dr() const { return dr_; }
    double dtheta() const { return dtheta_; }
    const ConformalMap& map() const { return map_; }

    int idx(int i, int j) const { return i * ntheta_ + j; }
    int jwrap(int j) const { return (j % ntheta_ + ntheta_) % ntheta_; }
    // antipodal angular index, used by across-origin stencils
    int jantipode(int j) const { return (j + ntheta_ / 2) % ntheta_; }

    double r_center(int i) const { return (i + 0.5) * dr_; }
    double theta_center(int j) const { return (j + 0.5) * dtheta_; }

    Vec2 disc_point(int c) const { return z_[c]; }
    Vec2 physical_point(int c) const { return x_[c]; }
    double cell_area(int c) const { return jac_[c]; }
    double abs_dpsi(int c) const { return apsi_[c]; }
    const Mat2& grad_chain(int c) const { return grad_chain_[c]; }
    const Mat2& b_inverse(int c) const { return binv_[c]; }
    double total_area() const { return total_area_; }

    // physical extent of a cell; with the origin-ring angular filter the
    // effective spacing never drops below dr
    double cell_diameter(int c) const {
        const int i = c / ntheta_;
        const double rdth = r_center(i) * dtheta_;
        return apsi_[c] * std::min(dr_, std::max(rdth, dr_));
    }

    // Outward unit normal of the physical image of the radial face at
    // (r_face, theta_j); a conformal map rotates directions by arg psi'.
    Vec2 radial_face_normal(double r_face, double theta) const {
        const Complex z = std::polar(r_face, theta);
        const Complex d = map_.dpsi(z) * std::polar(1.0, theta);
        Vec2 n(d);
        return n / n.norm();
    }

    double radial_face_length(double r_face, double theta) const {
        const Complex z = std::polar(r_face, theta);
        return std::abs(map_.dpsi(z)) * r_face * dtheta_;
    }

    Vec2 theta_face_normal(double r, double theta_face) const {
        const Complex z = std::polar(r, theta_face);
        const Complex d = map_.dpsi(z) * Complex(0, 1) * std::polar(1.0, theta_face);
        Vec2 n(d);
        return n / n.norm();
    }

    double theta_face_length(double r, double theta_face) const {
        const Complex z = std::polar(r, theta_face);
        return std::abs(map_.dpsi(z)) * dr_;
    }

private:
    int nr_, ntheta_;
    ConformalMap map_;
    double dr_, dtheta_, total_area_;
    std::vector<Vec2> z_, x_;
    std::vector<double> jac_, apsi_;
    std::vector<Mat2> grad_chain_, binv_;
};

using GridPtr = std::shared_ptr<const DiscGrid>;

} // namespace discflow

#endif
