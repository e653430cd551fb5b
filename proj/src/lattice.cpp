#include "speclab/lattice.hpp"

namespace speclab {

LatticeBase build_cycle(int n, double circumference) {
    if (n < 3) throw InvalidGeometry("cycle needs at least 3 vertices");
    if (!(circumference > 0.0)) throw InvalidGeometry("circumference must be positive");

    LatticeBase base;
    base.kind = LatticeKind::Cycle;
    base.vertex_count = n;
    base.total_measure = circumference;
    const double h = circumference / n;
    base.vertex_volume = h;
    base.canonical_count = n;
    base.edges.reserve(2 * n);
    for (int i = 0; i < n; ++i)
        base.edges.push_back({i, (i + 1) % n, h, i + n});
    for (int i = 0; i < n; ++i)
        base.edges.push_back({(i + 1) % n, i, h, i});
    return base;
}

LatticeBase build_torus(int nx, int ny, double lx, double ly) {
    if (nx < 3 || ny < 3) throw InvalidGeometry("torus needs at least 3 vertices per axis");
    if (!(lx > 0.0) || !(ly > 0.0)) throw InvalidGeometry("side lengths must be positive");

    LatticeBase base;
    base.kind = LatticeKind::Torus2;
    base.nx = nx;
    base.ny = ny;
    base.vertex_count = nx * ny;
    base.total_measure = lx * ly;
    const double hx = lx / nx;
    const double hy = ly / ny;
    base.vertex_volume = hx * hy;
    base.canonical_count = 2 * nx * ny;

    // vertex (ix, iy) -> iy * nx + ix, row-major
    auto vid = [nx](int ix, int iy) { return iy * nx + ix; };

    base.edges.reserve(4 * nx * ny);
    // canonical: +x edges first, then +y edges
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const int e = vid(ix, iy);
            base.edges.push_back({vid(ix, iy), vid((ix + 1) % nx, iy), hx, e + base.canonical_count});
        }
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const int e = nx * ny + vid(ix, iy);
            base.edges.push_back({vid(ix, iy), vid(ix, (iy + 1) % ny), hy, e + base.canonical_count});
        }
    for (int k = 0; k < base.canonical_count; ++k) {
        const Edge &f = base.edges[k];
        base.edges.push_back({f.head, f.tail, f.length, k});
    }
    return base;
}

DiscreteSection make_section(const LatticeBase &base, int rank) {
    DiscreteSection s;
    s.rank = rank;
    s.values = Eigen::VectorXd::Zero(static_cast<long>(rank) * base.vertex_count);
    return s;
}

double l2_inner(const DiscreteSection &a, const DiscreteSection &b, const LatticeBase &base) {
    if (a.rank != b.rank || a.values.size() != b.values.size())
        throw ShapeMismatch("section ranks differ");
    if (a.values.size() != static_cast<long>(a.rank) * base.vertex_count)
        throw ShapeMismatch("section does not match lattice");
    return base.vertex_volume * a.values.dot(b.values);
}

} // namespace speclab
