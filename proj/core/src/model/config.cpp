#include "c2ft/model/config.hpp"

#include <sstream>

#include "c2ft/error.hpp"

namespace c2ft::model {

namespace {

std::string join(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

}  // namespace

ModelConfig ModelConfig::tiny() {
    ModelConfig c;
    c.backbone_flatten = true;
    return c;
}

ModelConfig ModelConfig::desk() {
    ModelConfig c;
    c.volume_side = 16;
    c.image_size = 32;
    c.backbone_channels = 8;
    c.backbone_flatten = true;
    c.embed_dim = 64;
    c.encoder_heads = 4;
    c.decoder_cube = 4;
    c.decoder_heads = 4;
    c.refiner_cubes = {8, 4};
    c.refiner_heads = {4, 2};
    return c;
}

ModelConfig ModelConfig::full() {
    ModelConfig c;
    c.volume_side = 32;
    c.image_size = 224;
    c.image_channels = 2;
    c.backbone_channels = 32;
    c.embed_dim = 768;
    c.encoder_blocks = 3;
    c.encoder_layers = 4;
    c.encoder_heads = 0;
    c.decoder_cube = 4;
    c.decoder_heads = 21;
    c.refiner_cubes = {8, 4};
    c.refiner_heads = {8, 4};
    c.refiner_layers = 6;
    return c;
}

std::size_t ModelConfig::block_heads(std::size_t block) const {
    if (encoder_heads != 0) return encoder_heads;
    const std::size_t h = block_width(block) / 64;
    return h == 0 ? 1 : h;
}

std::size_t ModelConfig::embedding_width() const {
    std::size_t w = 0;
    for (std::size_t j = 0; j < encoder_blocks; ++j) w += block_width(j);
    return w;
}

std::size_t ModelConfig::backbone_features() const {
    const std::size_t s = image_size / 16;
    return backbone_flatten ? backbone_out_channels() * s * s : backbone_out_channels();
}

std::size_t ModelConfig::decoder_tokens() const {
    const std::size_t n = volume_side / decoder_cube;
    return n * n * n;
}

void ModelConfig::validate() const {
    auto need = [](bool ok, const std::string& what) {
        if (!ok) fail(ErrorCode::InvalidArgument, "model config: " + what);
    };
    need(volume_side > 0 && image_size > 0 && image_channels > 0 && backbone_channels > 0, "extents must be positive");
    need(image_size % 16 == 0, "image_size must be a multiple of 16 (four stride-2 convolutions)");
    need(encoder_blocks > 0 && encoder_layers > 0 && embed_dim > 0, "encoder needs blocks, layers and width");
    need(encoder_blocks < 16, "too many encoder blocks");
    need(mlp_ratio > 0 && max_views > 0, "mlp_ratio and max_views must be positive");
    need(norm_eps > 0.0, "norm_eps must be positive");
    if (embed_dim % (std::size_t{1} << (encoder_blocks - 1)) != 0)
        fail(ErrorCode::OddWidth, "embed_dim " + std::to_string(embed_dim) + " is not divisible by 2^(J-1)");
    for (std::size_t j = 0; j < encoder_blocks; ++j)
        need(block_width(j) % block_heads(j) == 0, "encoder heads must divide width " + std::to_string(block_width(j)));

    if (decoder_cube == 0 || volume_side % decoder_cube != 0)
        fail(ErrorCode::NonDivisibleCube, "decoder cube must divide the volume side");
    need(decoder_heads > 0 && embedding_width() % decoder_heads == 0, "decoder heads must divide the embedding width");

    if (refiner_enabled) {
        need(!refiner_cubes.empty() && refiner_layers > 0, "refiner needs at least one block and layer");
        need(refiner_heads.size() == refiner_cubes.size(), "one refiner head count per block");
        for (std::size_t l = 0; l < refiner_cubes.size(); ++l) {
            const std::size_t c = refiner_cubes[l];
            if (c == 0 || volume_side % c != 0) fail(ErrorCode::NonDivisibleCube, "refiner cube must divide the side");
            if (l > 0) need(2 * c == refiner_cubes[l - 1], "refiner cube sides must halve between blocks");
            need(refiner_heads[l] > 0 && (c * c * c) % refiner_heads[l] == 0, "refiner heads must divide c^3");
        }
    }
}

std::string ModelConfig::canonical() const {
    std::ostringstream out;
    out << "volume_side=" << volume_side << '\n'
        << "image_size=" << image_size << '\n'
        << "image_channels=" << image_channels << '\n'
        << "backbone_channels=" << backbone_channels << '\n'
        << "backbone_flatten=" << backbone_flatten << '\n'
        << "embed_dim=" << embed_dim << '\n'
        << "encoder_blocks=" << encoder_blocks << '\n'
        << "encoder_layers=" << encoder_layers << '\n'
        << "encoder_heads=" << encoder_heads << '\n'
        << "mlp_ratio=" << mlp_ratio << '\n'
        << "max_views=" << max_views << '\n'
        << "positional_embeddings=" << positional_embeddings << '\n'
        << "decoder_cube=" << decoder_cube << '\n'
        << "decoder_heads=" << decoder_heads << '\n'
        << "refiner_enabled=" << refiner_enabled << '\n'
        << "refiner_cubes=" << join(refiner_cubes) << '\n'
        << "refiner_heads=" << join(refiner_heads) << '\n'
        << "refiner_layers=" << refiner_layers << '\n'
        << "refiner_residual=" << refiner_residual << '\n';
    out.precision(17);
    out << "norm_eps=" << norm_eps << '\n';
    return out.str();
}

std::uint64_t ModelConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char ch : canonical()) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace c2ft::model
