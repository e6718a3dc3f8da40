#include "c2ft/train/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "c2ft/error.hpp"

namespace c2ft::train {

Matrix Matrix::identity(std::size_t n) {
    Matrix m{n, n, std::vector<double>(n * n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        fail(ErrorCode::ShapeMismatch, "rollout matmul " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                                           " by " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
    Matrix c{a.rows, b.cols, std::vector<double>(a.rows * b.cols, 0.0)};
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = 0; k < a.cols; ++k)
            for (std::size_t j = 0; j < b.cols; ++j) c.at(i, j) += a.at(i, k) * b.at(k, j);
    return c;
}

template <std::floating_point T>
Matrix normalized_attention(const ad::Tensor<T>& probs) {
    const auto& s = probs.shape();
    if (s.size() != 3 || s[1] != s[2])
        fail(ErrorCode::ShapeMismatch, "attention must be [heads, N, N], got " + ad::shape_str(s));
    const std::size_t heads = s[0], n = s[1];
    const auto d = probs.data();
    Matrix m = Matrix::identity(n);
    for (std::size_t h = 0; h < heads; ++h)
        for (std::size_t i = 0; i < n * n; ++i) m.values[i] += static_cast<double>(d[h * n * n + i]) / heads;
    for (std::size_t r = 0; r < n; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < n; ++c) sum += m.at(r, c);
        for (std::size_t c = 0; c < n; ++c) m.at(r, c) /= sum;
    }
    return m;
}

Matrix rollout(std::span<const Matrix> layers) {
    if (layers.empty()) fail(ErrorCode::EmptyViewList, "rollout needs at least one layer");
    Matrix r = layers.front();
    for (std::size_t l = 1; l < layers.size(); ++l) r = matmul(layers[l], r);
    return r;
}

template <std::floating_point T>
std::vector<Matrix> block_rollouts(const model::AttentionMaps<T>& attention) {
    std::vector<Matrix> out;
    for (const auto& block : attention) {
        std::vector<Matrix> layers;
        for (const auto& probs : block) layers.push_back(normalized_attention(probs));
        out.push_back(rollout(layers));
    }
    return out;
}

std::vector<Matrix> rollout_model(const TrainModel& model, const ad::Tensor<float>& images) {
    ad::NoGradGuard no_grad;
    model::AttentionMaps<float> attention;
    model.encoder().encode(model.params(), images, &attention);
    return block_rollouts(attention);
}

vox::Bytes heatmap_pgm(const Matrix& m, std::size_t cell) {
    if (cell == 0) fail(ErrorCode::InvalidArgument, "heatmap cell size must be positive");
    const std::size_t w = m.cols * cell, h = m.rows * cell;
    const std::string header = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
    vox::Bytes out(header.begin(), header.end());
    const double peak = m.values.empty() ? 0.0 : *std::max_element(m.values.begin(), m.values.end());
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            const double v = peak > 0.0 ? m.at(y / cell, x / cell) / peak : 0.0;
            out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
        }
    return out;
}

Matrix row_of(const Matrix& m, std::size_t row) {
    if (row >= m.rows) fail(ErrorCode::InvalidArgument, "row " + std::to_string(row) + " out of range");
    return {1, m.cols, std::vector<double>(m.values.begin() + row * m.cols, m.values.begin() + (row + 1) * m.cols)};
}

std::string matrix_csv(const Matrix& m) {
    std::string out;
    char buf[32];
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (std::size_t c = 0; c < m.cols; ++c) {
            std::snprintf(buf, sizeof buf, "%.9g", m.at(r, c));
            out += (c ? "," : "") + std::string(buf);
        }
        out += "\n";
    }
    return out;
}

template Matrix normalized_attention(const ad::Tensor<float>&);
template Matrix normalized_attention(const ad::Tensor<double>&);
template std::vector<Matrix> block_rollouts(const model::AttentionMaps<float>&);
template std::vector<Matrix> block_rollouts(const model::AttentionMaps<double>&);

}  // namespace c2ft::train
