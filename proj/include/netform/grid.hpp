#pragma once

// Uniform tensor-product grids on axis-aligned rectangles with one layer of
// boundary nodes, plus the discrete calculus (gradient, divergence, norms,
// inner products) used throughout the library.  Field types are dense Eigen
// arrays templated on the scalar; operations are expression-friendly free
// functions returning values.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <type_traits>
#include <string>
#include <utility>

namespace netform {

/// Uniform grid on a rectangle (0,Lx) or (0,Lx)x(0,Ly).  Interior node counts
/// are per axis; one boundary node is stored at each end of every grid line,
/// so axis a carries n(a)+2 nodes at spacing h(a) = extent(a)/(n(a)+1).
/// Storage order for fields is x-fastest (row-major in y).
class Grid {
public:
    Grid(int dim, std::array<int, 2> n, std::array<double, 2> extent)
        : dim_(dim), n_(n), extent_(extent) {
        if (dim != 1 && dim != 2)
            throw std::invalid_argument("grid.dim: must be 1 or 2");
        for (int a = 0; a < dim; ++a) {
            if (n_[a] < 3)
                throw std::invalid_argument("grid.n: needs at least 3 interior nodes per axis");
            if (!(extent_[a] > 0.0) || !std::isfinite(extent_[a]))
                throw std::invalid_argument("grid.extent: must be positive and finite");
        }
        for (int a = dim; a < 2; ++a) { n_[a] = 0; extent_[a] = 0.0; }
    }

    static Grid line(int n, double length = 1.0) { return Grid(1, {n, 0}, {length, 0.0}); }
    static Grid rectangle(int nx, int ny, double lx = 1.0, double ly = 1.0) {
        return Grid(2, {nx, ny}, {lx, ly});
    }

    int dim() const { return dim_; }
    int interior(int axis) const { return n_[axis]; }
    int nodes(int axis) const { return n_[axis] + 2; }
    double extent(int axis) const { return extent_[axis]; }
    double h(int axis) const { return extent_[axis] / (n_[axis] + 1); }
    double min_h() const {
        double m = h(0);
        for (int a = 1; a < dim_; ++a) m = std::min(m, h(a));
        return m;
    }
    /// Quadrature weight of one node: product of spacings (rectangle rule).
    double cell_volume() const {
        double v = 1.0;
        for (int a = 0; a < dim_; ++a) v *= h(a);
        return v;
    }
    Eigen::Index total_nodes() const {
        Eigen::Index t = 1;
        for (int a = 0; a < dim_; ++a) t *= nodes(a);
        return t;
    }
    double coord(int axis, int i) const { return i * h(axis); }

    Eigen::Index index(int i) const { return i; }
    Eigen::Index index(int i, int j) const {
        return static_cast<Eigen::Index>(j) * nodes(0) + i;
    }

    bool on_boundary(int i) const { return i == 0 || i == n_[0] + 1; }
    bool on_boundary(int i, int j) const {
        return i == 0 || i == n_[0] + 1 || j == 0 || j == n_[1] + 1;
    }

    bool same_as(const Grid& o) const {
        if (dim_ != o.dim_) return false;
        for (int a = 0; a < dim_; ++a)
            if (n_[a] != o.n_[a] || extent_[a] != o.extent_[a]) return false;
        return true;
    }

private:
    int dim_;
    std::array<int, 2> n_;
    std::array<double, 2> extent_;
};

namespace detail {
inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!a.same_as(b))
        throw std::invalid_argument(std::string(what) + ": operands live on different grids");
}
} // namespace detail

/// Scalar field: one value per node.
template <class Scalar>
struct ScalarFieldT {
    using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

    explicit ScalarFieldT(const Grid& g) : grid(g), values(Array::Zero(g.total_nodes())) {}
    ScalarFieldT(const Grid& g, Array v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.total_nodes())
            throw std::invalid_argument("scalar field: value count does not match grid");
    }

    Grid grid;
    Array values;

    Scalar& operator()(int i) { return values[grid.index(i)]; }
    Scalar operator()(int i) const { return values[grid.index(i)]; }
    Scalar& operator()(int i, int j) { return values[grid.index(i, j)]; }
    Scalar operator()(int i, int j) const { return values[grid.index(i, j)]; }
};

/// Vector field: grid.dim() components per node (columns of `values`).
template <class Scalar>
struct VectorFieldT {
    using Array = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    explicit VectorFieldT(const Grid& g)
        : grid(g), values(Array::Zero(g.total_nodes(), g.dim())) {}
    VectorFieldT(const Grid& g, Array v) : grid(g), values(std::move(v)) {
        if (values.rows() != grid.total_nodes() || values.cols() != grid.dim())
            throw std::invalid_argument("vector field: shape does not match grid");
    }

    Grid grid;
    Array values;

    int components() const { return static_cast<int>(values.cols()); }
};

/// Jacobian-like field: dim*dim components per node; column a*dim+b holds
/// the derivative of component a along axis b.
template <class Scalar>
struct TensorFieldT {
    using Array = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    TensorFieldT(const Grid& g, Array v) : grid(g), values(std::move(v)) {}

    Grid grid;
    Array values;
};

using ScalarField = ScalarFieldT<double>;
using VectorField = VectorFieldT<double>;
using TensorField = TensorFieldT<double>;

// ---------------------------------------------------------------------------
// Stencil core

namespace detail {

/// Second-order derivative along `axis` of one node-indexed column:
/// centered differences inside, one-sided three-point formulas on the two
/// boundary layers of each grid line.
template <class Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1>
derivative_along(const Grid& g, const Eigen::Ref<const Eigen::Array<Scalar, Eigen::Dynamic, 1>>& u,
                 int axis) {
    Eigen::Array<Scalar, Eigen::Dynamic, 1> out(u.size());
    const double inv2h = 1.0 / (2.0 * g.h(axis));
    if (g.dim() == 1) {
        const int nt = g.nodes(0);
        out[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * inv2h;
        for (int i = 1; i < nt - 1; ++i) out[i] = (u[i + 1] - u[i - 1]) * inv2h;
        out[nt - 1] = (3.0 * u[nt - 1] - 4.0 * u[nt - 2] + u[nt - 3]) * inv2h;
        return out;
    }
    const int nx = g.nodes(0), ny = g.nodes(1);
    if (axis == 0) {
        for (int j = 0; j < ny; ++j) {
            const Eigen::Index r = g.index(0, j);
            out[r] = (-3.0 * u[r] + 4.0 * u[r + 1] - u[r + 2]) * inv2h;
            for (int i = 1; i < nx - 1; ++i)
                out[r + i] = (u[r + i + 1] - u[r + i - 1]) * inv2h;
            out[r + nx - 1] =
                (3.0 * u[r + nx - 1] - 4.0 * u[r + nx - 2] + u[r + nx - 3]) * inv2h;
        }
    } else {
        const Eigen::Index s = nx; // stride between consecutive y-levels
        for (int i = 0; i < nx; ++i) {
            out[g.index(i, 0)] =
                (-3.0 * u[g.index(i, 0)] + 4.0 * u[g.index(i, 1)] - u[g.index(i, 2)]) * inv2h;
            for (int j = 1; j < ny - 1; ++j) {
                const Eigen::Index r = g.index(i, j);
                out[r] = (u[r + s] - u[r - s]) * inv2h;
            }
            out[g.index(i, ny - 1)] = (3.0 * u[g.index(i, ny - 1)] -
                                       4.0 * u[g.index(i, ny - 2)] + u[g.index(i, ny - 3)]) *
                                      inv2h;
        }
    }
    return out;
}

} // namespace detail

/// Nodal gradient of a scalar field (second order everywhere).
template <class Scalar>
VectorFieldT<Scalar> gradient(const ScalarFieldT<Scalar>& u) {
    VectorFieldT<Scalar> out(u.grid);
    for (int a = 0; a < u.grid.dim(); ++a)
        out.values.col(a) = detail::derivative_along<Scalar>(u.grid, u.values, a);
    return out;
}

/// Nodal Jacobian of a vector field; column a*dim+b = d(component a)/d(axis b).
template <class Scalar>
TensorFieldT<Scalar> gradient(const VectorFieldT<Scalar>& m) {
    const int d = m.grid.dim();
    typename TensorFieldT<Scalar>::Array vals(m.grid.total_nodes(), d * d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            vals.col(a * d + b) =
                detail::derivative_along<Scalar>(m.grid, m.values.col(a), b);
    return TensorFieldT<Scalar>(m.grid, std::move(vals));
}

/// Nodal divergence, component-wise derivative stencils (exact on linears).
template <class Scalar>
ScalarFieldT<Scalar> divergence(const VectorFieldT<Scalar>& f) {
    ScalarFieldT<Scalar> out(f.grid);
    out.values = detail::derivative_along<Scalar>(f.grid, f.values.col(0), 0);
    for (int a = 1; a < f.grid.dim(); ++a)
        out.values += detail::derivative_along<Scalar>(f.grid, f.values.col(a), a);
    return out;
}

// ---------------------------------------------------------------------------
// Quadrature, norms, inner products (rectangle rule over all stored nodes)

template <class Scalar>
Scalar integrate(const ScalarFieldT<Scalar>& u) {
    return u.values.sum() * u.grid.cell_volume();
}

template <class Scalar>
Scalar inner(const ScalarFieldT<Scalar>& a, const ScalarFieldT<Scalar>& b) {
    detail::require_same_grid(a.grid, b.grid, "inner");
    return (a.values * b.values).sum() * a.grid.cell_volume();
}

template <class Scalar>
Scalar inner(const VectorFieldT<Scalar>& a, const VectorFieldT<Scalar>& b) {
    detail::require_same_grid(a.grid, b.grid, "inner");
    return (a.values * b.values).sum() * a.grid.cell_volume();
}

namespace detail {
/// Pointwise Euclidean magnitude across components (|.| for scalars,
/// Frobenius for tensors).
template <class Field>
Eigen::Array<double, Eigen::Dynamic, 1> magnitude(const Field& f) {
    if (f.values.cols() == 1) return f.values.col(0).abs();
    return f.values.matrix().rowwise().norm().array();
}
template <class Scalar>
Eigen::Array<double, Eigen::Dynamic, 1> magnitude(const ScalarFieldT<Scalar>& f) {
    return f.values.abs();
}
} // namespace detail

/// Discrete L^q norm, rectangle rule over all nodes.  Requires q >= 1.
template <class Field>
double norm_lq(const Field& f, double q) {
    if (!(q >= 1.0))
        throw std::invalid_argument("norm_lq: exponent q must satisfy q >= 1");
    const auto mag = detail::magnitude(f);
    const double v = f.grid.cell_volume();
    if (q == 1.0) return mag.sum() * v;
    if (q == 2.0) return std::sqrt(mag.square().sum() * v);
    return std::pow(mag.pow(q).sum() * v, 1.0 / q);
}

template <class Field>
double norm_l2(const Field& f) { return norm_lq(f, 2.0); }

/// Sup norm of the pointwise magnitude.
template <class Field>
double norm_linf(const Field& f) {
    if (f.values.size() == 0) return 0.0;
    return detail::magnitude(f).maxCoeff();
}

/// W^{1,l} norm: ||f||_l + ||grad f||_l (gradient meant nodally).
template <class Scalar>
double norm_w1l(const ScalarFieldT<Scalar>& u, double l) {
    return norm_lq(u, l) + norm_lq(gradient(u), l);
}
template <class Scalar>
double norm_w1l(const VectorFieldT<Scalar>& m, double l) {
    return norm_lq(m, l) + norm_lq(gradient(m), l);
}

// ---------------------------------------------------------------------------
// Boundary helpers

template <class F>
void for_each_boundary_node(const Grid& g, F&& fn) {
    if (g.dim() == 1) {
        fn(g.index(0));
        fn(g.index(g.nodes(0) - 1));
        return;
    }
    const int nx = g.nodes(0), ny = g.nodes(1);
    for (int i = 0; i < nx; ++i) { fn(g.index(i, 0)); fn(g.index(i, ny - 1)); }
    for (int j = 1; j < ny - 1; ++j) { fn(g.index(0, j)); fn(g.index(nx - 1, j)); }
}

template <class Scalar>
void force_dirichlet(ScalarFieldT<Scalar>& u) {
    for_each_boundary_node(u.grid, [&](Eigen::Index k) { u.values[k] = Scalar(0); });
}

template <class Scalar>
void force_dirichlet(VectorFieldT<Scalar>& m) {
    for_each_boundary_node(m.grid, [&](Eigen::Index k) { m.values.row(k).setZero(); });
}

template <class Field>
bool vanishes_on_boundary(const Field& f, double tol = 0.0) {
    bool ok = true;
    for_each_boundary_node(f.grid, [&](Eigen::Index k) {
        for (Eigen::Index c = 0; c < f.values.cols(); ++c)
            if (std::abs(f.values(k, c)) > tol) ok = false;
    });
    return ok;
}

/// Largest jump of the pointwise magnitude between adjacent nodes; a discrete
/// modulus-of-continuity diagnostic at scale h.
template <class Field>
double max_adjacent_jump(const Field& f) {
    const Grid& g = f.grid;
    const auto mag = detail::magnitude(f);
    double worst = 0.0;
    if (g.dim() == 1) {
        for (int i = 0; i + 1 < g.nodes(0); ++i)
            worst = std::max(worst, std::abs(mag[i + 1] - mag[i]));
        return worst;
    }
    const int nx = g.nodes(0), ny = g.nodes(1);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const Eigen::Index k = g.index(i, j);
            if (i + 1 < nx) worst = std::max(worst, std::abs(mag[k + 1] - mag[k]));
            if (j + 1 < ny) worst = std::max(worst, std::abs(mag[k + nx] - mag[k]));
        }
    return worst;
}

/// Evaluate a callable (x) or (x,y) -> value on every node; arity must match the grid dimension.
template <class Fn>
ScalarField sample_scalar(const Grid& g, Fn&& fn) {
    ScalarField out(g);
    if constexpr (std::is_invocable_v<Fn&, double>) {
        if (g.dim() != 1) throw std::invalid_argument("sample_scalar: unary callable needs a 1-d grid");
        for (int i = 0; i < g.nodes(0); ++i) out.values[i] = fn(g.coord(0, i));
    } else {
        if (g.dim() != 2) throw std::invalid_argument("sample_scalar: binary callable needs a 2-d grid");
        for (int j = 0; j < g.nodes(1); ++j)
            for (int i = 0; i < g.nodes(0); ++i)
                out.values[g.index(i, j)] = fn(g.coord(0, i), g.coord(1, j));
    }
    return out;
}

/// Evaluate per-component callables on every node (1D: fn(x, comp); 2D: fn(x,y,comp)).
template <class Fn>
VectorField sample_vector(const Grid& g, Fn&& fn) {
    VectorField out(g);
    if constexpr (std::is_invocable_v<Fn&, double, int>) {
        if (g.dim() != 1) throw std::invalid_argument("sample_vector: (x,comp) callable needs a 1-d grid");
        for (int i = 0; i < g.nodes(0); ++i) out.values(i, 0) = fn(g.coord(0, i), 0);
    } else {
        if (g.dim() != 2) throw std::invalid_argument("sample_vector: (x,y,comp) callable needs a 2-d grid");
        for (int j = 0; j < g.nodes(1); ++j)
            for (int i = 0; i < g.nodes(0); ++i)
                for (int c = 0; c < 2; ++c)
                    out.values(g.index(i, j), c) = fn(g.coord(0, i), g.coord(1, j), c);
    }
    return out;
}

} // namespace netform
