#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace c2ft::model {

// Architecture hyper-parameters. Widths follow d, d/2, ..., d/2^(J-1) in the
// encoder; the refiner runs one block per entry of refiner_cubes.
struct ModelConfig {
    std::size_t volume_side = 8;
    std::size_t image_size = 32;
    std::size_t image_channels = 2;
    std::size_t backbone_channels = 8;
    // Feeds the whole final (S/16)^2 feature map to the projection instead of
    // its spatial mean.
    bool backbone_flatten = false;

    std::size_t embed_dim = 32;
    std::size_t encoder_blocks = 3;
    std::size_t encoder_layers = 2;
    // 0 selects width/64 (at least 1) per block.
    std::size_t encoder_heads = 4;
    std::size_t mlp_ratio = 4;
    std::size_t max_views = 24;
    bool positional_embeddings = true;

    std::size_t decoder_cube = 2;
    std::size_t decoder_heads = 4;

    bool refiner_enabled = true;
    std::vector<std::size_t> refiner_cubes{4, 2};
    std::vector<std::size_t> refiner_heads{4, 2};
    std::size_t refiner_layers = 2;
    // Adds the coarse logits to the refiner output before the final sigmoid.
    bool refiner_residual = false;

    double norm_eps = 1e-5;

    static ModelConfig tiny();
    static ModelConfig desk();
    static ModelConfig full();

    // Throws OddWidth, NonDivisibleCube or InvalidArgument.
    void validate() const;

    std::size_t block_width(std::size_t block) const { return embed_dim >> block; }
    std::size_t block_heads(std::size_t block) const;
    // d + d/2 + ... over all encoder blocks.
    std::size_t embedding_width() const;
    std::size_t decoder_tokens() const;
    std::size_t backbone_out_channels() const { return backbone_channels << 3; }
    // Input width of the backbone projection.
    std::size_t backbone_features() const;

    // Canonical "key=value" lines; hash() is FNV-1a over this text.
    std::string canonical() const;
    std::uint64_t hash() const;
};

}  // namespace c2ft::model
