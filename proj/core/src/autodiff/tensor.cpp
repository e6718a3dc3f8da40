#include "c2ft/autodiff/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>
#include <utility>

#include "c2ft/error.hpp"

namespace c2ft::ad {

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (auto extent : shape) n *= extent;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ']';
    return os.str();
}

namespace {

void validate_shape(const Shape& shape) {
    for (auto extent : shape) {
        if (extent == 0) fail(ErrorCode::ShapeMismatch, "zero extent in shape " + shape_str(shape));
    }
}

}  // namespace

template <std::floating_point T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
    return full(std::move(shape), T(0), requires_grad);
}

template <std::floating_point T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
    validate_shape(shape);
    auto node = std::make_shared<detail::Node<T>>();
    node->value.assign(shape_numel(shape), value);
    node->shape = std::move(shape);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

template <std::floating_point T>
Tensor<T> Tensor<T>::from(Shape shape, std::vector<T> values, bool requires_grad) {
    validate_shape(shape);
    if (shape_numel(shape) != values.size()) {
        fail(ErrorCode::ShapeMismatch, "shape " + shape_str(shape) + " does not hold " +
                                           std::to_string(values.size()) + " values");
    }
    auto node = std::make_shared<detail::Node<T>>();
    node->shape = std::move(shape);
    node->value = std::move(values);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

template <std::floating_point T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
    return from({}, {value}, requires_grad);
}

template <std::floating_point T>
std::size_t Tensor<T>::dim(int axis) const {
    const int r = static_cast<int>(rank());
    const int a = axis < 0 ? axis + r : axis;
    if (a < 0 || a >= r) fail(ErrorCode::ShapeMismatch, "axis out of range");
    return node_->shape[static_cast<std::size_t>(a)];
}

template <std::floating_point T>
std::span<T> Tensor<T>::mutable_data() {
    if (!node_->is_leaf()) fail(ErrorCode::InvalidArgument, "mutable_data on a non-leaf tensor");
    return node_->value;
}

template <std::floating_point T>
T Tensor<T>::item() const {
    if (numel() != 1) fail(ErrorCode::NotScalar, "item() on tensor of shape " + shape_str(shape()));
    return node_->value[0];
}

template <std::floating_point T>
void Tensor<T>::set_requires_grad(bool flag) {
    if (!node_->is_leaf()) fail(ErrorCode::InvalidArgument, "requires_grad can only be set on leaves");
    node_->requires_grad = flag;
}

template <std::floating_point T>
void Tensor<T>::zero_grad() {
    node_->grad.clear();
}

template <std::floating_point T>
Tensor<T> Tensor<T>::detach() const {
    return from(node_->shape, node_->value, false);
}

template <std::floating_point T>
void Tensor<T>::backward() const {
    using NodeT = detail::Node<T>;
    if (numel() != 1) fail(ErrorCode::NotScalar, "backward() needs a scalar, got " + shape_str(shape()));
    if (!node_->requires_grad) return;

    // Iterative post-order DFS; inputs are visited in recorded order so the
    // resulting schedule (and the summation order of every grad) is fixed.
    std::vector<NodeT*> order;
    std::unordered_set<NodeT*> seen;
    std::vector<std::pair<NodeT*, std::size_t>> stack;
    stack.emplace_back(node_.get(), 0);
    seen.insert(node_.get());
    while (!stack.empty()) {
        auto& [n, next] = stack.back();
        if (next < n->inputs.size()) {
            NodeT* child = n->inputs[next++].get();
            if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
        } else {
            order.push_back(n);
            stack.pop_back();
        }
    }

    for (NodeT* n : order) {
        if (!n->is_leaf()) n->grad.clear();
    }
    node_->ensure_grad()[0] += T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        NodeT* n = *it;
        if (n->is_leaf() || !n->backward_fn) continue;
        n->ensure_grad();
        n->backward_fn(*n);
    }
    for (NodeT* n : order) {
        if (!n->is_leaf()) std::vector<T>().swap(n->grad);
    }
}

template class Tensor<float>;
template class Tensor<double>;

namespace {
thread_local bool t_grad_enabled = true;
}  // namespace

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }
bool grad_enabled() { return t_grad_enabled; }

}  // namespace c2ft::ad
