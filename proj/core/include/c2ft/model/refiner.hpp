#pragma once

#include <vector>

#include "c2ft/model/config.hpp"
#include "c2ft/model/layers.hpp"

namespace c2ft::model {

// Residuals around both sub-layers:
//   R' = MSA(Norm(R)) + R,  R = MLP(Norm(R')) + R'.
struct RefinerLayer {
    LayerNorm norm1;
    Attention attn;
    LayerNorm norm2;
    Mlp mlp;
};

struct RefinerBlock {
    std::size_t cube = 0;
    Linear in;
    ParamIndex pos = 0;  // [tokens, cube^3]
    std::vector<RefinerLayer> layers;
    Linear out;
};

// Multi-scale cube attention. Each block cuts the current volume into cubes,
// treats every flattened cube as a token, and reassembles a full volume before
// the next (finer) block. Intermediate volumes stay unbounded; one sigmoid
// follows the last block.
class Refiner {
   public:
    template <std::floating_point T>
    static Refiner create(ParameterStore<T>& store, const ModelConfig& cfg, Rng& rng);

    // Token pathway of block `l`: [g, c^3] -> [g, c^3].
    template <std::floating_point T>
    ad::Tensor<T> block_tokens(const ParameterStore<T>& store, std::size_t l, const ad::Tensor<T>& tokens) const;

    // [V, V, V] -> pre-sigmoid [V, V, V]. NonDivisibleCube, WidthMismatch.
    // `token_shapes` receives (count, width) per block when non-null.
    template <std::floating_point T>
    ad::Tensor<T> refine_logits(const ParameterStore<T>& store, const ad::Tensor<T>& volume,
                                std::vector<std::pair<std::size_t, std::size_t>>* token_shapes = nullptr) const;
    template <std::floating_point T>
    ad::Tensor<T> refine(const ParameterStore<T>& store, const ad::Tensor<T>& volume) const;

    const std::vector<RefinerBlock>& blocks() const { return blocks_; }

   private:
    std::size_t side_ = 0;
    std::vector<RefinerBlock> blocks_;
};

}  // namespace c2ft::model
