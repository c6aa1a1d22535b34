#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "negcurv/geometry.hpp"
#include "negcurv/grid.hpp"

namespace negcurv {

using Mask = std::vector<std::uint8_t>;

/// Inclusive index ranges along the spatial axes 1..dim-1 of one leaf.
struct LeafBox {
    std::array<long, kMaxDim> lo{};
    std::array<long, kMaxDim> hi{};

    bool empty(int dim) const;
    bool contains(const MultiIndex& idx, int dim) const;
    bool on_rim(const MultiIndex& idx, int dim) const;
};

/// Coordinate slab cut down to a discrete domain of dependence of the first
/// leaf. Leaf k is the slice of time index k restricted to leaves[k].
struct FoliatedDomain {
    GridSpec grid;
    int time_axis = 0;
    std::vector<LeafBox> leaves;
    /// Cells removed per time step on each side, per spatial axis.
    std::array<long, kMaxDim> trim{};
    /// Largest characteristic speed dx_k/dt seen over the slab.
    std::array<double, kMaxDim> speed{};

    std::size_t leaf_count() const { return leaves.size(); }
    std::size_t leaf_of(std::size_t flat) const { return grid.unravel(flat)[0]; }
    bool contains(std::size_t flat) const;
    bool on_lateral(std::size_t flat) const;
    /// True if every point within `radius` index steps (in the max norm) is in the domain.
    bool neighbourhood_inside(std::size_t flat, long radius) const;
    /// Time coordinate rescaled to [0, 1].
    double temporal_value(std::size_t flat) const;

    Mask leaf_mask(std::size_t leaf) const;
    Mask lateral_mask() const;
    Mask domain_mask() const;
};

/// Largest |dx_k/dt| over null directions of g at one point, per spatial axis.
std::array<double, kMaxDim> characteristic_speeds(const SmallMatrix& g);

FoliatedDomain build_slab_domain(const GridSpec& grid, const SymmetricMatrixField& metric, int time_axis = 0,
                                 const GeometryTolerances& tol = {});

struct LeafCheck {
    std::size_t leaf = 0;
    double min_tangent_eigenvalue = 0.0;
    double min_time_margin = 0.0;
    /// min over rim points of -g^-1(nu, nu) for the facet conormals nu.
    double lateral_margin = 0.0;
};

struct SpacelikeReport {
    std::vector<LeafCheck> leaves;
    bool leaves_spacelike = true;
    bool temporal_ok = true;
    bool lateral_spacelike = true;

    bool ok() const { return leaves_spacelike && temporal_ok && lateral_spacelike; }
    nlohmann::json to_json() const;
};

SpacelikeReport validate_spacelike(const FoliatedDomain& domain, const SymmetricMatrixField& metric);

/// Future-directed unit normal to the leaves, -g^-1 dt / sqrt(-g^-1(dt, dt)).
VectorField normal_field(const FoliatedDomain& domain, const SymmetricMatrixField& metric);

enum class Direction { Future, Past };

struct CausalMask {
    GridSpec grid;
    Mask membership;
    Direction direction = Direction::Future;

    std::size_t count() const;
};

/// Leaf-by-leaf front propagation. A step to the next leaf with index offset d
/// is admitted when (dt, d h shrunk by one cell per axis) is timelike for g at
/// the source point, which dilates the continuum cone by one cell per step.
CausalMask causal_cone(const SymmetricMatrixField& metric, const Mask& seed, Direction direction);

Mask mask_and(const Mask& a, const Mask& b);
Mask mask_or(const Mask& a, const Mask& b);

}  // namespace negcurv
