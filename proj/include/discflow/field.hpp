#ifndef DISCFLOW_FIELD_HPP
#define DISCFLOW_FIELD_HPP

#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"

namespace discflow {

class ScalarField {
public:
    explicit ScalarField(GridPtr grid, double fill = 0.0)
        : grid_(std::move(grid)), v_(static_cast<size_t>(grid_->size()), fill) {}

    const DiscGrid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }

    double& operator[](int c) { return v_[static_cast<size_t>(c)]; }
    double operator[](int c) const { return v_[static_cast<size_t>(c)]; }
    double& at(int i, int j) { return v_[static_cast<size_t>(grid_->idx(i, j))]; }
    double at(int i, int j) const { return v_[static_cast<size_t>(grid_->idx(i, j))]; }

    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

    bool all_finite() const {
        for (double x : v_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    ScalarField& fill_from(const std::function<double(Vec2)>& f) {
        for (int c = 0; c < grid_->size(); ++c) v_[c] = f(grid_->physical_point(c));
        return *this;
    }

private:
    GridPtr grid_;
    std::vector<double> v_;
};

// Velocity-like field; stores physical Cartesian components.
class VectorField {
public:
    explicit VectorField(GridPtr grid) : u1_(grid), u2_(grid) {}
    VectorField(ScalarField u1, ScalarField u2) : u1_(std::move(u1)), u2_(std::move(u2)) {}

    const DiscGrid& grid() const { return u1_.grid(); }
    GridPtr grid_ptr() const { return u1_.grid_ptr(); }

    ScalarField& comp(int k) { return k == 0 ? u1_ : u2_; }
    const ScalarField& comp(int k) const { return k == 0 ? u1_ : u2_; }

    Vec2 at(int c) const { return {u1_[c], u2_[c]}; }
    void set(int c, Vec2 v) {
        u1_[c] = v.x;
        u2_[c] = v.y;
    }

    bool all_finite() const { return u1_.all_finite() && u2_.all_finite(); }

    VectorField& fill_from(const std::function<Vec2(Vec2)>& f) {
        for (int c = 0; c < grid().size(); ++c) set(c, f(grid().physical_point(c)));
        return *this;
    }

private:
    ScalarField u1_, u2_;
};

// Snapshot format: CSV with header i,j,r,theta,x1,x2,value...
inline void write_field_csv(const std::string& path, const std::vector<std::string>& names,
                            const std::vector<const ScalarField*>& fields) {
    if (fields.empty() || names.size() != fields.size())
        throw std::invalid_argument("write_field_csv: names/fields mismatch");
    const DiscGrid& g = fields[0]->grid();
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "i,j,r,theta,x1,x2");
    for (const auto& n : names) std::fprintf(f, ",%s", n.c_str());
    std::fprintf(f, "\n");
    for (int i = 0; i < g.nr(); ++i) {
        for (int j = 0; j < g.ntheta(); ++j) {
            const int c = g.idx(i, j);
            const Vec2 x = g.physical_point(c);
            std::fprintf(f, "%d,%d,%.17g,%.17g,%.17g,%.17g", i, j, g.r_center(i),
                         g.theta_center(j), x.x, x.y);
            for (const ScalarField* s : fields) std::fprintf(f, ",%.17g", (*s)[c]);
            std::fprintf(f, "\n");
        }
    }
    std::fclose(f);
}

} // namespace discflow

#endif
