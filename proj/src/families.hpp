#pragma once

// Family-specific entry points shared between translation units.

#include "cayley/group.hpp"

namespace cayley {

State sl2p_uniform(const GraphSpec& spec, Rng& rng);
State cube_uniform(const GraphSpec& spec, Rng& rng);

/// Layout constants of the cube3 state vector.
inline constexpr int kCorners = 8;
inline constexpr int kEdges = 12;
inline constexpr int kCube3CornerPerm = 0;
inline constexpr int kCube3EdgePerm = 8;
inline constexpr int kCube3CornerTwist = 20;
inline constexpr int kCube3EdgeFlip = 28;
inline constexpr int kCube3Length = 40;

}  // namespace cayley
