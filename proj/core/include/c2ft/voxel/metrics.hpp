#pragma once

#include "c2ft/voxel/grid.hpp"

namespace c2ft::vox {

inline constexpr double kDefaultThreshold = 0.3;

// |bin(pred) & target| / |bin(pred) | target|. Both empty -> 1.
double metric_iou(const VoxelGrid& target, const VoxelGrid& prediction, double threshold = kDefaultThreshold);

struct FScore {
    double precision = 0.0;
    double recall = 0.0;
    double fscore = 0.0;
};

// Point sets are the occupied-voxel centres in unit-cube coordinates,
// ((i + 0.5) / side, ...). A point counts when its nearest neighbour in the
// other set lies within `tau` (inclusive). tau <= 0 selects one voxel pitch.
// EmptyVolume if either binarised volume is empty.
FScore metric_fscore(const VoxelGrid& target, const VoxelGrid& prediction, double threshold = kDefaultThreshold,
                     double tau = 0.0);

}  // namespace c2ft::vox
