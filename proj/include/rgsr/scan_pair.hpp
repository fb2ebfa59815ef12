#pragma once

#include "rgsr/types.hpp"

#include <string>

namespace rgsr {

/// One registration task: a ground scan, its 50 m aerial crop, the reference
/// and initial transforms, and validation metadata.
struct ScanPair {
  int id = 0;
  std::string site;
  PointCloud scan;    // scan frame
  PointCloud aerial;  // site frame, 50 m crop around crop_center
  RigidTransform t_ref;   // scan -> aerial frame
  RigidTransform t_init;  // initialization (protocol A: equals t_ref)
  Eigen::Vector2d crop_center = Eigen::Vector2d::Zero();
  SurveyMarkers markers;
  RigidTransform odom;  // odometry pose for trajectory-consistency checks
};

}  // namespace rgsr
