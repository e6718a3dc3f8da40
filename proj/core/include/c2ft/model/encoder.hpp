#pragma once

#include <array>
#include <optional>
#include <vector>

#include "c2ft/model/config.hpp"
#include "c2ft/model/layers.hpp"

namespace c2ft::model {

// Stand-in image embedding: four stride-2 3x3 convolutions with GELU and
// channel doubling, then a linear map to d from either the flattened final
// feature map or its spatial mean.
struct Backbone {
    struct Conv {
        ParamIndex weight = 0;
        ParamIndex bias = 0;
    };
    std::array<Conv, 4> convs;
    Linear proj;
    bool flatten = false;

    template <std::floating_point T>
    static Backbone create(ParameterStore<T>& store, const ModelConfig& cfg, Rng& rng);
    // images [N, C, S, S] -> [N, d]
    template <std::floating_point T>
    ad::Tensor<T> forward(const ParameterStore<T>& store, const ad::Tensor<T>& images) const;
};

// Pre-norm attention with a residual, then an MLP without one:
//   E' = MSA(Norm(P)) + P,  E = MLP(Norm(E')).
struct EncoderLayer {
    LayerNorm norm1;
    Attention attn;
    LayerNorm norm2;
    Mlp mlp;
};

struct C2FBlock {
    std::size_t width = 0;
    std::vector<EncoderLayer> layers;
    // Halves the width for the next block; absent on the last block.
    std::optional<Linear> reduce;
};

template <std::floating_point T>
struct BlockOutput {
    ad::Tensor<T> features;  // [N, w], collected for the concatenation
    ad::Tensor<T> reduced;   // [N, w/2], input of the next block (undefined on the last)
};

// Per-block, per-layer attention probabilities [heads, N, N].
template <std::floating_point T>
using AttentionMaps = std::vector<std::vector<ad::Tensor<T>>>;

class ViewEncoder {
   public:
    template <std::floating_point T>
    static ViewEncoder create(ParameterStore<T>& store, const ModelConfig& cfg, Rng& rng);

    // [N, C, S, S] -> [N, d]. ShapeMismatch on wrong image extents.
    template <std::floating_point T>
    ad::Tensor<T> embed_views(const ParameterStore<T>& store, const ad::Tensor<T>& images) const;

    // Runs block `j` on tokens [N, w]. OddWidth when w cannot be halved.
    template <std::floating_point T>
    BlockOutput<T> c2f_block(const ParameterStore<T>& store, std::size_t j, const ad::Tensor<T>& tokens,
                             std::vector<ad::Tensor<T>>* attention = nullptr) const;

    // [N, C, S, S] -> [N, d + d/2 + ...]. EmptyViewList, TooManyViews.
    template <std::floating_point T>
    ad::Tensor<T> encode(const ParameterStore<T>& store, const ad::Tensor<T>& images,
                         AttentionMaps<T>* attention = nullptr) const;

    const std::vector<C2FBlock>& blocks() const { return blocks_; }
    std::optional<ParamIndex> positional() const { return pos_; }
    std::size_t output_width() const { return output_width_; }

   private:
    ModelConfig cfg_;
    Backbone backbone_;
    std::optional<ParamIndex> pos_;
    std::vector<C2FBlock> blocks_;
    LayerNorm final_norm_;
    std::size_t output_width_ = 0;
};

}  // namespace c2ft::model
