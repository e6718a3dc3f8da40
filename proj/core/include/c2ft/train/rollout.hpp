#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "c2ft/autodiff/tensor.hpp"
#include "c2ft/model/encoder.hpp"
#include "c2ft/train/trainer.hpp"
#include "c2ft/voxel/io.hpp"

namespace c2ft::train {

// Dense row-major matrix for rollout bookkeeping.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    static Matrix identity(std::size_t n);
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
};

// a * b. ShapeMismatch on incompatible extents.
Matrix matmul(const Matrix& a, const Matrix& b);

// One layer's attention [heads, N, N]: mean over heads, plus the identity for
// the residual path, then each row divided by its sum.
template <std::floating_point T>
Matrix normalized_attention(const ad::Tensor<T>& probs);

// Product of already-normalised layers, last layer leftmost: A_L ... A_1.
// EmptyViewList when there are no layers.
Matrix rollout(std::span<const Matrix> layers);

// One rollout per C2F block, each over that block's layers.
template <std::floating_point T>
std::vector<Matrix> block_rollouts(const model::AttentionMaps<T>& attention);

// Runs the encoder on images [N, C, S, S] without recording gradients and
// returns the per-block rollouts (N x N each).
std::vector<Matrix> rollout_model(const TrainModel& model, const ad::Tensor<float>& images);

// 8-bit greyscale PGM, each entry drawn as a cell x cell square, scaled so
// the largest entry is white.
vox::Bytes heatmap_pgm(const Matrix& m, std::size_t cell = 16);
// A single row as a 1 x cols matrix.
Matrix row_of(const Matrix& m, std::size_t row);
std::string matrix_csv(const Matrix& m);

}  // namespace c2ft::train
