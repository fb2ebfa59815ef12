#pragma once

#include "rgsr/types.hpp"

#include <optional>
#include <span>

namespace rgsr {

/// Closed-form least-squares rigid alignment (SVD with determinant correction):
/// minimizes sum ||T * src_i - dst_i||^2. Returns nullopt for fewer than 3
/// pairs, mismatched lengths, or a degenerate (collinear) configuration.
std::optional<RigidTransform> try_estimate_rigid(std::span<const Point3> src,
                                                 std::span<const Point3> dst);

/// Throwing wrapper around try_estimate_rigid.
RigidTransform estimate_rigid(std::span<const Point3> src, std::span<const Point3> dst);

}  // namespace rgsr
