#pragma once

#include <concepts>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace c2ft::ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

// One record of the define-by-run graph. A node owns its forward value and,
// once backward reaches it, a same-shape gradient buffer.
template <std::floating_point T>
struct Node {
    Shape shape;
    std::vector<T> value;
    std::vector<T> grad;
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<std::shared_ptr<Node>> inputs;
    // Reads this node's grad and accumulates into the inputs' grads.
    std::function<void(Node&)> backward_fn;

    bool is_leaf() const { return inputs.empty(); }
    std::vector<T>& ensure_grad() {
        if (grad.empty()) grad.assign(value.size(), T(0));
        return grad;
    }
};

}  // namespace detail

template <std::floating_point T>
class Tensor {
   public:
    using value_type = T;
    using NodePtr = std::shared_ptr<detail::Node<T>>;

    Tensor() = default;
    explicit Tensor(NodePtr node) : node_(std::move(node)) {}

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, T value, bool requires_grad = false);
    static Tensor from(Shape shape, std::vector<T> values, bool requires_grad = false);
    static Tensor scalar(T value, bool requires_grad = false);

    bool defined() const { return static_cast<bool>(node_); }
    const Shape& shape() const { return node_->shape; }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t numel() const { return node_->value.size(); }
    // Negative axes count from the back.
    std::size_t dim(int axis) const;

    std::span<const T> data() const { return node_->value; }
    // Direct write access. Only for leaves (initialisation, optimiser updates).
    std::span<T> mutable_data();
    T item() const;

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool flag);
    bool has_grad() const { return !node_->grad.empty(); }
    std::span<const T> grad() const { return node_->grad; }
    void zero_grad();

    // A new leaf holding a copy of the values and no history.
    Tensor detach() const;

    // Reverse sweep from this scalar. Leaf grads accumulate; interior grads
    // are recomputed from scratch on every call.
    void backward() const;

    const NodePtr& node() const { return node_; }

   private:
    NodePtr node_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

// While alive, ops on this thread record no history (inference mode).
class NoGradGuard {
   public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

   private:
    bool previous_;
};

bool grad_enabled();

}  // namespace c2ft::ad
