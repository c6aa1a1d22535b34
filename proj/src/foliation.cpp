#include "negcurv/foliation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "negcurv/errors.hpp"
#include "negcurv/linalg.hpp"

namespace negcurv {

bool LeafBox::empty(int dim) const {
    for (int k = 1; k < dim; ++k)
        if (lo[k] > hi[k]) return true;
    return false;
}

bool LeafBox::contains(const MultiIndex& idx, int dim) const {
    for (int k = 1; k < dim; ++k) {
        const long i = static_cast<long>(idx[k]);
        if (i < lo[k] || i > hi[k]) return false;
    }
    return true;
}

bool LeafBox::on_rim(const MultiIndex& idx, int dim) const {
    if (!contains(idx, dim)) return false;
    for (int k = 1; k < dim; ++k) {
        const long i = static_cast<long>(idx[k]);
        if (i == lo[k] || i == hi[k]) return true;
    }
    return false;
}

bool FoliatedDomain::contains(std::size_t flat) const {
    const MultiIndex idx = grid.unravel(flat);
    return leaves[idx[0]].contains(idx, grid.dim);
}

bool FoliatedDomain::on_lateral(std::size_t flat) const {
    const MultiIndex idx = grid.unravel(flat);
    return leaves[idx[0]].on_rim(idx, grid.dim);
}

bool FoliatedDomain::neighbourhood_inside(std::size_t flat, long radius) const {
    const MultiIndex idx = grid.unravel(flat);
    const long t = static_cast<long>(idx[0]);
    for (long s = t - radius; s <= t + radius; ++s) {
        if (s < 0 || s >= static_cast<long>(leaves.size())) return false;
        const LeafBox& b = leaves[s];
        for (int k = 1; k < grid.dim; ++k) {
            const long i = static_cast<long>(idx[k]);
            if (i - radius < b.lo[k] || i + radius > b.hi[k]) return false;
        }
    }
    return true;
}

double FoliatedDomain::temporal_value(std::size_t flat) const {
    return static_cast<double>(leaf_of(flat)) / static_cast<double>(leaves.size() - 1);
}

Mask FoliatedDomain::leaf_mask(std::size_t leaf) const {
    Mask m(grid.size(), 0);
    const std::size_t n = grid.leaf_size();
    for (std::size_t i = leaf * n; i < (leaf + 1) * n; ++i) m[i] = contains(i);
    return m;
}

Mask FoliatedDomain::lateral_mask() const {
    Mask m(grid.size(), 0);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = on_lateral(i);
    return m;
}

Mask FoliatedDomain::domain_mask() const {
    Mask m(grid.size(), 0);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = contains(i);
    return m;
}

std::array<double, kMaxDim> characteristic_speeds(const SmallMatrix& g) {
    const SmallMatrix a = g.inverse();
    std::array<double, kMaxDim> c{};
    for (int k = 1; k < g.n; ++k) {
        // Null covectors (-c, e_k) of g^-1: a00 c^2 - 2 a0k c + akk = 0.
        const double disc = a(0, k) * a(0, k) - a(0, 0) * a(k, k);
        if (disc < 0.0 || a(0, 0) == 0.0) {
            c[k] = std::numeric_limits<double>::infinity();
            continue;
        }
        const double r = std::sqrt(disc);
        c[k] = std::max(std::abs((a(0, k) + r) / a(0, 0)), std::abs((a(0, k) - r) / a(0, 0)));
    }
    return c;
}

namespace {

SmallMatrix spatial_block(const SmallMatrix& g) {
    SmallMatrix s(g.n - 1);
    for (int i = 1; i < g.n; ++i)
        for (int j = 1; j < g.n; ++j) s(i - 1, j - 1) = g(i, j);
    return s;
}

double min_eigenvalue(const SmallMatrix& m) { return m.symmetric_eigenvalues()[0]; }

}  // namespace

FoliatedDomain build_slab_domain(const GridSpec& grid, const SymmetricMatrixField& metric, int time_axis,
                                 const GeometryTolerances& tol) {
    grid.validate();
    if (time_axis != 0) throw Error(ErrorKind::InvalidArgument, "the time axis must be axis 0");
    if (grid.dim < 2) throw Error(ErrorKind::DimensionError, "a slab needs at least one spatial axis");
    if (!(metric.grid() == grid)) throw Error(ErrorKind::InvalidArgument, "metric lives on a different grid");
    const int n = grid.dim;

    FoliatedDomain d;
    d.grid = grid;
    d.time_axis = time_axis;
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const SmallMatrix g = load(metric, p);
        if (!(std::abs(g.determinant()) >= tol.tau_det))
            throw Error(ErrorKind::SingularMetric, "metric determinant below floor at point " + std::to_string(p));
        if (classify(g, tol.tau_eig) != Signature::Lorentzian)
            throw Error(ErrorKind::NotLorentzian, "metric is not Lorentzian at point " + std::to_string(p));
        if (!(min_eigenvalue(spatial_block(g)) > 0.0))
            throw Error(ErrorKind::NotSpacelike,
                        "coordinate slice is not spacelike at point " + std::to_string(p));
        const auto c = characteristic_speeds(g);
        for (int k = 1; k < n; ++k) d.speed[k] = std::max(d.speed[k], c[k]);
    }

    const double dt = grid.spacing[0];
    for (int k = 1; k < n; ++k) {
        const double cells = d.speed[k] * dt / grid.spacing[k];
        // The explicit stencils reach one cell per step, so never trim less.
        d.trim[k] = std::max<long>(1, static_cast<long>(std::ceil(cells - 1e-9)));
    }

    d.leaves.resize(grid.points[0]);
    for (std::size_t s = 0; s < grid.points[0]; ++s) {
        LeafBox& b = d.leaves[s];
        for (int k = 1; k < n; ++k) {
            b.lo[k] = d.trim[k] * static_cast<long>(s);
            b.hi[k] = static_cast<long>(grid.points[k]) - 1 - d.trim[k] * static_cast<long>(s);
        }
        if (b.empty(n))
            throw Error(ErrorKind::EmptyDomain, "trimming consumes the grid at leaf " + std::to_string(s) + " of " +
                                                    std::to_string(grid.points[0]));
    }
    return d;
}

nlohmann::json SpacelikeReport::to_json() const {
    nlohmann::json j;
    j["ok"] = ok();
    j["leaves_spacelike"] = leaves_spacelike;
    j["temporal_ok"] = temporal_ok;
    j["lateral_spacelike"] = lateral_spacelike;
    auto& arr = j["leaves"] = nlohmann::json::array();
    for (const auto& l : leaves)
        arr.push_back({{"leaf", l.leaf},
                       {"min_tangent_eigenvalue", l.min_tangent_eigenvalue},
                       {"min_time_margin", l.min_time_margin},
                       {"lateral_margin", l.lateral_margin}});
    return j;
}

SpacelikeReport validate_spacelike(const FoliatedDomain& domain, const SymmetricMatrixField& metric) {
    const GridSpec& grid = domain.grid;
    const int n = grid.dim;
    const double dt = grid.spacing[0];
    SpacelikeReport r;
    const std::size_t leaf_size = grid.leaf_size();
    for (std::size_t s = 0; s < domain.leaf_count(); ++s) {
        LeafCheck c;
        c.leaf = s;
        c.min_tangent_eigenvalue = std::numeric_limits<double>::infinity();
        c.min_time_margin = std::numeric_limits<double>::infinity();
        c.lateral_margin = std::numeric_limits<double>::infinity();
        for (std::size_t p = s * leaf_size; p < (s + 1) * leaf_size; ++p) {
            const MultiIndex idx = grid.unravel(p);
            const LeafBox& box = domain.leaves[s];
            if (!box.contains(idx, n)) continue;
            const SmallMatrix g = load(metric, p);
            c.min_tangent_eigenvalue = std::min(c.min_tangent_eigenvalue, min_eigenvalue(spatial_block(g)));
            const SmallMatrix a = g.inverse();
            c.min_time_margin = std::min(c.min_time_margin, -a(0, 0));
            if (!box.on_rim(idx, n)) continue;
            for (int k = 1; k < n; ++k) {
                // Facet x_k = const -/+ s t moving inward; conormal dx_k +/- s dt.
                const double speed = static_cast<double>(domain.trim[k]) * grid.spacing[k] / dt;
                for (int side : {-1, 1}) {
                    const long i = static_cast<long>(idx[k]);
                    if ((side < 0 && i != box.lo[k]) || (side > 0 && i != box.hi[k])) continue;
                    const double sg = side > 0 ? 1.0 : -1.0;
                    const double q = a(k, k) + 2.0 * sg * speed * a(0, k) + speed * speed * a(0, 0);
                    c.lateral_margin = std::min(c.lateral_margin, -q);
                }
            }
        }
        if (!(c.min_tangent_eigenvalue > 0.0)) r.leaves_spacelike = false;
        if (!(c.min_time_margin > 0.0)) r.temporal_ok = false;
        if (!(c.lateral_margin > 0.0)) r.lateral_spacelike = false;
        r.leaves.push_back(c);
    }
    return r;
}

VectorField normal_field(const FoliatedDomain& domain, const SymmetricMatrixField& metric) {
    const GridSpec& grid = domain.grid;
    const int n = grid.dim;
    VectorField out(grid);
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const SmallMatrix a = load(metric, p).inverse();
        if (!(a(0, 0) < 0.0)) {
            if (domain.contains(p))
                throw Error(ErrorKind::NotSpacelike, "dt is not timelike at point " + std::to_string(p));
            continue;
        }
        const double norm = std::sqrt(-a(0, 0));
        Point v{};
        for (int mu = 0; mu < n; ++mu) v[mu] = -a(mu, 0) / norm;
        out.set(p, v);
    }
    return out;
}

std::size_t CausalMask::count() const {
    return static_cast<std::size_t>(std::count(membership.begin(), membership.end(), 1));
}

CausalMask causal_cone(const SymmetricMatrixField& metric, const Mask& seed, Direction direction) {
    const GridSpec& grid = metric.grid();
    if (seed.size() != grid.size()) throw Error(ErrorKind::InvalidArgument, "seed size does not match grid");
    const int n = grid.dim;
    const double dt = grid.spacing[0];
    const std::size_t leaf_size = grid.leaf_size();
    const std::size_t nt = grid.points[0];

    CausalMask out{grid, Mask(grid.size(), 0), direction};
    for (std::size_t i = 0; i < seed.size(); ++i) out.membership[i] = seed[i] ? 1 : 0;

    const long step = direction == Direction::Future ? 1 : -1;
    const double sdt = direction == Direction::Future ? dt : -dt;
    for (long s = direction == Direction::Future ? 0 : static_cast<long>(nt) - 1;
         s + step >= 0 && s + step < static_cast<long>(nt); s += step) {
        const std::size_t base = static_cast<std::size_t>(s) * leaf_size;
        const std::size_t next = static_cast<std::size_t>(s + step) * leaf_size;
        for (std::size_t q = base; q < base + leaf_size; ++q) {
            if (!out.membership[q]) continue;
            const SmallMatrix g = load(metric, q);
            const auto c = characteristic_speeds(g);
            const MultiIndex idx = grid.unravel(q);
            std::array<long, kMaxDim> reach{};
            for (int k = 1; k < n; ++k) {
                const double r = std::isfinite(c[k]) ? std::ceil(c[k] * dt / grid.spacing[k]) + 1.0
                                                     : static_cast<double>(grid.points[k]);
                reach[k] = static_cast<long>(std::min(r, static_cast<double>(grid.points[k])));
            }
            std::array<long, kMaxDim> off{};
            for (int k = 1; k < n; ++k) off[k] = -reach[k];
            while (true) {
                bool inside = true;
                std::size_t target = next;
                for (int k = 1; k < n && inside; ++k) {
                    const long j = static_cast<long>(idx[k]) + off[k];
                    if (j < 0 || j >= static_cast<long>(grid.points[k])) inside = false;
                    target += static_cast<std::size_t>(j) * grid.stride(k);
                }
                if (inside && !out.membership[target]) {
                    Point x{};
                    x[0] = sdt;
                    for (int k = 1; k < n; ++k) {
                        const long shrunk = std::max(std::labs(off[k]) - 1, 0L);
                        x[k] = (off[k] < 0 ? -1.0 : 1.0) * static_cast<double>(shrunk) * grid.spacing[k];
                    }
                    if (quadratic_form(g, x) < 0.0) out.membership[target] = 1;
                }
                int k = 1;
                for (; k < n; ++k) {
                    if (++off[k] <= reach[k]) break;
                    off[k] = -reach[k];
                }
                if (k == n) break;
            }
        }
    }
    return out;
}

Mask mask_and(const Mask& a, const Mask& b) {
    Mask m(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) m[i] = (a[i] && b[i]) ? 1 : 0;
    return m;
}

Mask mask_or(const Mask& a, const Mask& b) {
    Mask m(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) m[i] = (a[i] || b[i]) ? 1 : 0;
    return m;
}

}  // namespace negcurv
