#ifndef DISCFLOW_VEC_HPP
#define DISCFLOW_VEC_HPP

#include <cmath>
#include <complex>

namespace discflow {

using Complex = std::complex<double>;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}
    explicit Vec2(Complex z) : x(z.real()), y(z.imag()) {}

    Complex as_complex() const { return {x, y}; }

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }

    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }

    // n_perp convention: (n2, -n1)
    Vec2 perp() const { return {y, -x}; }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

// 2x2 real matrix, m(k,i) in row-major storage.
struct Mat2 {
    double a[2][2] = {{0.0, 0.0}, {0.0, 0.0}};

    double& operator()(int k, int i) { return a[k][i]; }
    double operator()(int k, int i) const { return a[k][i]; }

    static Mat2 identity() {
        Mat2 m;
        m.a[0][0] = m.a[1][1] = 1.0;
        return m;
    }

    // v_k = sum_i m(k,i) w_i
    Vec2 apply(Vec2 w) const {
        return {a[0][0] * w.x + a[0][1] * w.y, a[1][0] * w.x + a[1][1] * w.y};
    }

    // v_i = sum_k m(k,i) w_k
    Vec2 apply_transpose(Vec2 w) const {
        return {a[0][0] * w.x + a[1][0] * w.y, a[0][1] * w.x + a[1][1] * w.y};
    }

    Mat2 operator*(const Mat2& o) const {
        Mat2 m;
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 2; ++i)
                m.a[k][i] = a[k][0] * o.a[0][i] + a[k][1] * o.a[1][i];
        return m;
    }

    Mat2 transpose() const {
        Mat2 m;
        m.a[0][0] = a[0][0];
        m.a[0][1] = a[1][0];
        m.a[1][0] = a[0][1];
        m.a[1][1] = a[1][1];
        return m;
    }

    double det() const { return a[0][0] * a[1][1] - a[0][1] * a[1][0]; }

    Mat2 inverse() const {
        const double d = det();
        Mat2 m;
        m.a[0][0] = a[1][1] / d;
        m.a[0][1] = -a[0][1] / d;
        m.a[1][0] = -a[1][0] / d;
        m.a[1][1] = a[0][0] / d;
        return m;
    }
};

} // namespace discflow

#endif
