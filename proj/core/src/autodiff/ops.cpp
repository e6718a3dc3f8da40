#include "c2ft/autodiff/ops.hpp"

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "c2ft/error.hpp"

namespace c2ft::ad {

namespace {

template <std::floating_point T>
using NodePtr = std::shared_ptr<detail::Node<T>>;

template <std::floating_point T>
using BackwardFn = std::function<void(detail::Node<T>&)>;

std::size_t normalize_axis(int axis, std::size_t rank) {
    const int r = static_cast<int>(rank);
    const int a = axis < 0 ? axis + r : axis;
    if (a < 0 || a >= r) fail(ErrorCode::ShapeMismatch, "axis " + std::to_string(axis) + " out of range");
    return static_cast<std::size_t>(a);
}

// Splits a shape around `axis` into (outer, axis extent, inner) element counts.
struct AxisLayout {
    std::size_t outer = 1;
    std::size_t len = 1;
    std::size_t inner = 1;
};

AxisLayout axis_layout(const Shape& shape, std::size_t axis) {
    AxisLayout layout;
    for (std::size_t i = 0; i < axis; ++i) layout.outer *= shape[i];
    layout.len = shape[axis];
    for (std::size_t i = axis + 1; i < shape.size(); ++i) layout.inner *= shape[i];
    return layout;
}

template <std::floating_point T>
Tensor<T> make_result(Shape shape, std::vector<T> value, const char* op, std::vector<NodePtr<T>> inputs,
                      BackwardFn<T> fn) {
    for (const T v : value) {
        if (!std::isfinite(v)) fail(ErrorCode::NonFinite, std::string(op) + " produced a non-finite value");
    }
    auto node = std::make_shared<detail::Node<T>>();
    node->shape = std::move(shape);
    node->value = std::move(value);
    node->op = op;
    const bool needs_grad = grad_enabled() && std::any_of(inputs.begin(), inputs.end(),
                                                          [](const NodePtr<T>& n) { return n->requires_grad; });
    if (needs_grad) {
        node->requires_grad = true;
        node->inputs = std::move(inputs);
        node->backward_fn = std::move(fn);
    }
    return Tensor<T>(std::move(node));
}

// Row-major C = op(A) op(B) + beta * C.
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const float* a,
          const float* b, float* c, float beta) {
    cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans, trans_b ? CblasTrans : CblasNoTrans,
                static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), 1.0f, a,
                static_cast<int>(trans_a ? m : k), b, static_cast<int>(trans_b ? k : n), beta, c,
                static_cast<int>(n));
}

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const double* a,
          const double* b, double* c, double beta) {
    cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans, trans_b ? CblasTrans : CblasNoTrans,
                static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), 1.0, a,
                static_cast<int>(trans_a ? m : k), b, static_cast<int>(trans_b ? k : n), beta, c,
                static_cast<int>(n));
}

bool is_suffix(const Shape& small, const Shape& big) {
    if (small.size() > big.size()) return false;
    return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

// Shared driver for the four binary elementwise ops. `fwd(x, y)` computes a
// value; `dx(x, y, out)` / `dy(x, y, out)` give the local partials.
template <std::floating_point T, class Fwd, class Dx, class Dy>
Tensor<T> binary_op(const Tensor<T>& a, const Tensor<T>& b, const char* name, Fwd fwd, Dx dx, Dy dy) {
    const bool a_big = is_suffix(b.shape(), a.shape());
    if (!a_big && !is_suffix(a.shape(), b.shape())) {
        fail(ErrorCode::ShapeMismatch,
             std::string(name) + ": " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    }
    const Shape out_shape = a_big ? a.shape() : b.shape();
    const std::size_t n = shape_numel(out_shape);
    const std::size_t na = a.numel();
    const std::size_t nb = b.numel();
    const auto av = a.data();
    const auto bv = b.data();
    std::vector<T> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = fwd(av[i % na], bv[i % nb]);

    auto fn = [n, na, nb, dx, dy](detail::Node<T>& self) {
        auto& pa = *self.inputs[0];
        auto& pb = *self.inputs[1];
        if (pa.requires_grad) {
            auto& g = pa.ensure_grad();
            for (std::size_t i = 0; i < n; ++i)
                g[i % na] += self.grad[i] * dx(pa.value[i % na], pb.value[i % nb], self.value[i]);
        }
        if (pb.requires_grad) {
            auto& g = pb.ensure_grad();
            for (std::size_t i = 0; i < n; ++i)
                g[i % nb] += self.grad[i] * dy(pa.value[i % na], pb.value[i % nb], self.value[i]);
        }
    };
    return make_result<T>(out_shape, std::move(out), name, {a.node(), b.node()}, fn);
}

template <std::floating_point T, class Fwd, class Deriv>
Tensor<T> unary_op(const Tensor<T>& x, const char* name, Fwd fwd, Deriv deriv) {
    const auto xv = x.data();
    std::vector<T> out(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) out[i] = fwd(xv[i]);
    auto fn = [deriv](detail::Node<T>& self) {
        auto& px = *self.inputs[0];
        auto& g = px.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * deriv(px.value[i], self.value[i]);
    };
    return make_result<T>(x.shape(), std::move(out), name, {x.node()}, fn);
}

// Flat source index for every element of the permuted output.
std::vector<std::size_t> permutation_map(const Shape& in_shape, std::span<const std::size_t> order) {
    const std::size_t rank = in_shape.size();
    std::vector<std::size_t> in_strides(rank, 1);
    for (std::size_t i = rank; i-- > 1;) in_strides[i - 1] = in_strides[i] * in_shape[i];
    Shape out_shape(rank);
    std::vector<std::size_t> strides(rank);
    for (std::size_t i = 0; i < rank; ++i) {
        out_shape[i] = in_shape[order[i]];
        strides[i] = in_strides[order[i]];
    }
    const std::size_t n = shape_numel(in_shape);
    std::vector<std::size_t> map(n);
    std::vector<std::size_t> idx(rank, 0);
    std::size_t src = 0;
    for (std::size_t flat = 0; flat < n; ++flat) {
        map[flat] = src;
        for (std::size_t d = rank; d-- > 0;) {
            if (++idx[d] < out_shape[d]) {
                src += strides[d];
                break;
            }
            src -= strides[d] * (out_shape[d] - 1);
            idx[d] = 0;
        }
    }
    return map;
}

}  // namespace

template <std::floating_point T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.rank() < 2 || b.rank() < 2) fail(ErrorCode::ShapeMismatch, "matmul needs rank >= 2 operands");
    const std::size_t m = a.dim(-2);
    const std::size_t k = a.dim(-1);
    const std::size_t n = b.dim(-1);
    if (b.dim(-2) != k) {
        fail(ErrorCode::ShapeMismatch, "matmul " + shape_str(a.shape()) + " @ " + shape_str(b.shape()));
    }
    const Shape batch_a(a.shape().begin(), a.shape().end() - 2);
    const Shape batch_b(b.shape().begin(), b.shape().end() - 2);

    Shape out_shape;
    // Either b is a plain matrix (fold a's batch into rows) or both carry
    // the same batch, or a is a plain matrix shared across b's batch.
    enum class Mode { Fold, Batched, ShareA } mode;
    std::size_t batch = 1;
    if (batch_b.empty()) {
        mode = Mode::Fold;
        out_shape = batch_a;
    } else if (batch_a.empty()) {
        mode = Mode::ShareA;
        out_shape = batch_b;
        batch = shape_numel(batch_b);
    } else if (batch_a == batch_b) {
        mode = Mode::Batched;
        out_shape = batch_a;
        batch = shape_numel(batch_a);
    } else {
        fail(ErrorCode::ShapeMismatch, "matmul batch dims " + shape_str(a.shape()) + " @ " + shape_str(b.shape()));
    }
    out_shape.push_back(m);
    out_shape.push_back(n);

    const std::size_t rows = mode == Mode::Fold ? a.numel() / k : m;
    std::vector<T> out(shape_numel(out_shape));
    const T* ap = a.data().data();
    const T* bp = b.data().data();
    const std::size_t a_step = mode == Mode::ShareA ? 0 : m * k;
    const std::size_t b_step = mode == Mode::Fold ? 0 : k * n;
    for (std::size_t i = 0; i < batch; ++i)
        gemm(false, false, rows, n, k, ap + i * a_step, bp + i * b_step, out.data() + i * rows * n, T(0));

    auto fn = [=](detail::Node<T>& self) {
        auto& pa = *self.inputs[0];
        auto& pb = *self.inputs[1];
        const T* g = self.grad.data();
        if (pa.requires_grad) {
            T* ga = pa.ensure_grad().data();
            for (std::size_t i = 0; i < batch; ++i)
                gemm(false, true, rows, k, n, g + i * rows * n, pb.value.data() + i * b_step, ga + i * a_step,
                     T(1));
        }
        if (pb.requires_grad) {
            T* gb = pb.ensure_grad().data();
            for (std::size_t i = 0; i < batch; ++i)
                gemm(true, false, k, n, rows, pa.value.data() + i * a_step, g + i * rows * n, gb + i * b_step,
                     T(1));
        }
    };
    return make_result<T>(std::move(out_shape), std::move(out), "matmul", {a.node(), b.node()}, fn);
}

template <std::floating_point T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    return binary_op(
        a, b, "add", [](T x, T y) { return x + y; }, [](T, T, T) { return T(1); }, [](T, T, T) { return T(1); });
}

template <std::floating_point T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    return binary_op(
        a, b, "sub", [](T x, T y) { return x - y; }, [](T, T, T) { return T(1); },
        [](T, T, T) { return T(-1); });
}

template <std::floating_point T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    return binary_op(
        a, b, "mul", [](T x, T y) { return x * y; }, [](T, T y, T) { return y; }, [](T x, T, T) { return x; });
}

template <std::floating_point T>
Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b) {
    for (const T v : b.data()) {
        if (v == T(0)) fail(ErrorCode::DivideByZero, "div: zero denominator");
    }
    return binary_op(
        a, b, "div", [](T x, T y) { return x / y; }, [](T, T y, T) { return T(1) / y; },
        [](T, T y, T out) { return -out / y; });
}

template <std::floating_point T>
Tensor<T> add_scalar(const Tensor<T>& x, T value) {
    return unary_op(x, "add_scalar", [value](T v) { return v + value; }, [](T, T) { return T(1); });
}

template <std::floating_point T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
    return unary_op(x, "scale", [factor](T v) { return v * factor; }, [factor](T, T) { return factor; });
}

template <std::floating_point T>
Tensor<T> gelu(const Tensor<T>& x) {
    constexpr T inv_sqrt2 = T(1) / std::numbers::sqrt2_v<T>;
    constexpr T inv_sqrt_2pi = std::numbers::inv_sqrtpi_v<T> * inv_sqrt2;
    return unary_op(
        x, "gelu", [](T v) { return T(0.5) * v * (T(1) + std::erf(v * inv_sqrt2)); },
        [](T v, T) {
            const T cdf = T(0.5) * (T(1) + std::erf(v * inv_sqrt2));
            const T pdf = inv_sqrt_2pi * std::exp(T(-0.5) * v * v);
            return cdf + v * pdf;
        });
}

template <std::floating_point T>
Tensor<T> sigmoid(const Tensor<T>& x) {
    return unary_op(
        x, "sigmoid",
        [](T v) {
            if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
            const T e = std::exp(v);
            return e / (T(1) + e);
        },
        [](T, T out) { return out * (T(1) - out); });
}

template <std::floating_point T>
Tensor<T> softmax(const Tensor<T>& x, int axis) {
    const auto ax = normalize_axis(axis, x.rank());
    const auto lay = axis_layout(x.shape(), ax);
    const auto xv = x.data();
    std::vector<T> out(xv.size());
    for (std::size_t o = 0; o < lay.outer; ++o) {
        for (std::size_t in = 0; in < lay.inner; ++in) {
            const std::size_t base = o * lay.len * lay.inner + in;
            T peak = xv[base];
            for (std::size_t j = 1; j < lay.len; ++j) peak = std::max(peak, xv[base + j * lay.inner]);
            T total = 0;
            for (std::size_t j = 0; j < lay.len; ++j) {
                const T e = std::exp(xv[base + j * lay.inner] - peak);
                out[base + j * lay.inner] = e;
                total += e;
            }
            for (std::size_t j = 0; j < lay.len; ++j) out[base + j * lay.inner] /= total;
        }
    }
    auto fn = [lay](detail::Node<T>& self) {
        auto& g = self.inputs[0]->ensure_grad();
        for (std::size_t o = 0; o < lay.outer; ++o) {
            for (std::size_t in = 0; in < lay.inner; ++in) {
                const std::size_t base = o * lay.len * lay.inner + in;
                T dot = 0;
                for (std::size_t j = 0; j < lay.len; ++j)
                    dot += self.grad[base + j * lay.inner] * self.value[base + j * lay.inner];
                for (std::size_t j = 0; j < lay.len; ++j) {
                    const std::size_t i = base + j * lay.inner;
                    g[i] += self.value[i] * (self.grad[i] - dot);
                }
            }
        }
    };
    return make_result<T>(x.shape(), std::move(out), "softmax", {x.node()}, fn);
}

template <std::floating_point T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias, T eps) {
    if (x.rank() == 0) fail(ErrorCode::ShapeMismatch, "layer_norm on a scalar");
    const std::size_t width = x.dim(-1);
    if (gain.shape() != Shape{width} || bias.shape() != Shape{width}) {
        fail(ErrorCode::ShapeMismatch, "layer_norm gain/bias must be [" + std::to_string(width) + "]");
    }
    const std::size_t rows = x.numel() / width;
    const auto xv = x.data();
    const auto gv = gain.data();
    const auto bv = bias.data();
    std::vector<T> out(xv.size());
    // Normalised activations and per-row reciprocal std are kept for backward.
    auto xhat = std::make_shared<std::vector<T>>(xv.size());
    auto rstd = std::make_shared<std::vector<T>>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const T* row = xv.data() + r * width;
        T mu = 0;
        for (std::size_t j = 0; j < width; ++j) mu += row[j];
        mu /= T(width);
        T var = 0;
        for (std::size_t j = 0; j < width; ++j) var += (row[j] - mu) * (row[j] - mu);
        var /= T(width);
        const T rs = T(1) / std::sqrt(var + eps);
        (*rstd)[r] = rs;
        for (std::size_t j = 0; j < width; ++j) {
            const T h = (row[j] - mu) * rs;
            (*xhat)[r * width + j] = h;
            out[r * width + j] = h * gv[j] + bv[j];
        }
    }
    auto fn = [rows, width, xhat, rstd](detail::Node<T>& self) {
        auto& px = *self.inputs[0];
        auto& pg = *self.inputs[1];
        auto& pb = *self.inputs[2];
        if (pg.requires_grad) {
            auto& gg = pg.ensure_grad();
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t j = 0; j < width; ++j) gg[j] += self.grad[r * width + j] * (*xhat)[r * width + j];
        }
        if (pb.requires_grad) {
            auto& gb = pb.ensure_grad();
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t j = 0; j < width; ++j) gb[j] += self.grad[r * width + j];
        }
        if (px.requires_grad) {
            auto& gx = px.ensure_grad();
            std::vector<T> dh(width);
            for (std::size_t r = 0; r < rows; ++r) {
                T mean_dh = 0;
                T mean_dh_h = 0;
                for (std::size_t j = 0; j < width; ++j) {
                    dh[j] = self.grad[r * width + j] * pg.value[j];
                    mean_dh += dh[j];
                    mean_dh_h += dh[j] * (*xhat)[r * width + j];
                }
                mean_dh /= T(width);
                mean_dh_h /= T(width);
                for (std::size_t j = 0; j < width; ++j)
                    gx[r * width + j] += (*rstd)[r] * (dh[j] - mean_dh - (*xhat)[r * width + j] * mean_dh_h);
            }
        }
    };
    return make_result<T>(x.shape(), std::move(out), "layer_norm", {x.node(), gain.node(), bias.node()}, fn);
}

template <std::floating_point T>
Tensor<T> concat(std::span<const Tensor<T>> parts, int axis) {
    if (parts.empty()) fail(ErrorCode::ShapeMismatch, "concat of nothing");
    const std::size_t ax = normalize_axis(axis, parts[0].rank());
    Shape out_shape = parts[0].shape();
    std::vector<std::size_t> lens;
    out_shape[ax] = 0;
    for (const auto& p : parts) {
        if (p.rank() != out_shape.size()) fail(ErrorCode::ShapeMismatch, "concat rank mismatch");
        for (std::size_t d = 0; d < out_shape.size(); ++d) {
            if (d != ax && p.shape()[d] != out_shape[d])
                fail(ErrorCode::ShapeMismatch, "concat extents " + shape_str(p.shape()));
        }
        lens.push_back(p.shape()[ax]);
        out_shape[ax] += p.shape()[ax];
    }
    const auto lay = axis_layout(out_shape, ax);
    std::vector<T> out(shape_numel(out_shape));
    std::size_t offset = 0;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        const auto src = parts[p].data();
        const std::size_t chunk = lens[p] * lay.inner;
        for (std::size_t o = 0; o < lay.outer; ++o)
            std::copy_n(src.data() + o * chunk, chunk, out.data() + o * lay.len * lay.inner + offset);
        offset += chunk;
    }
    std::vector<NodePtr<T>> inputs;
    for (const auto& p : parts) inputs.push_back(p.node());
    auto fn = [lens, lay](detail::Node<T>& self) {
        std::size_t off = 0;
        for (std::size_t p = 0; p < lens.size(); ++p) {
            const std::size_t chunk = lens[p] * lay.inner;
            auto& in = *self.inputs[p];
            if (in.requires_grad) {
                auto& g = in.ensure_grad();
                for (std::size_t o = 0; o < lay.outer; ++o)
                    for (std::size_t i = 0; i < chunk; ++i)
                        g[o * chunk + i] += self.grad[o * lay.len * lay.inner + off + i];
            }
            off += chunk;
        }
    };
    return make_result<T>(std::move(out_shape), std::move(out), "concat", std::move(inputs), fn);
}

template <std::floating_point T>
Tensor<T> slice(const Tensor<T>& x, int axis, std::size_t start, std::size_t length) {
    const std::size_t ax = normalize_axis(axis, x.rank());
    if (length == 0 || start + length > x.shape()[ax]) fail(ErrorCode::ShapeMismatch, "slice out of range");
    const auto lay = axis_layout(x.shape(), ax);
    Shape out_shape = x.shape();
    out_shape[ax] = length;
    const std::size_t chunk = length * lay.inner;
    const std::size_t src_off = start * lay.inner;
    const std::size_t stride = lay.len * lay.inner;
    std::vector<T> out(shape_numel(out_shape));
    const auto xv = x.data();
    for (std::size_t o = 0; o < lay.outer; ++o)
        std::copy_n(xv.data() + o * stride + src_off, chunk, out.data() + o * chunk);
    auto fn = [lay, chunk, src_off, stride](detail::Node<T>& self) {
        auto& g = self.inputs[0]->ensure_grad();
        for (std::size_t o = 0; o < lay.outer; ++o)
            for (std::size_t i = 0; i < chunk; ++i) g[o * stride + src_off + i] += self.grad[o * chunk + i];
    };
    return make_result<T>(std::move(out_shape), std::move(out), "slice", {x.node()}, fn);
}

template <std::floating_point T>
std::vector<Tensor<T>> split(const Tensor<T>& x, std::span<const std::size_t> sizes, int axis) {
    const std::size_t ax = normalize_axis(axis, x.rank());
    if (std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}) != x.shape()[ax])
        fail(ErrorCode::ShapeMismatch, "split sizes do not cover axis");
    std::vector<Tensor<T>> parts;
    std::size_t start = 0;
    for (const auto s : sizes) {
        parts.push_back(slice(x, static_cast<int>(ax), start, s));
        start += s;
    }
    return parts;
}

template <std::floating_point T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
    if (shape_numel(shape) != x.numel())
        fail(ErrorCode::ShapeMismatch, "reshape " + shape_str(x.shape()) + " -> " + shape_str(shape));
    std::vector<T> out(x.data().begin(), x.data().end());
    auto fn = [](detail::Node<T>& self) {
        auto& g = self.inputs[0]->ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    };
    return make_result<T>(std::move(shape), std::move(out), "reshape", {x.node()}, fn);
}

template <std::floating_point T>
Tensor<T> permute(const Tensor<T>& x, std::span<const std::size_t> order) {
    const std::size_t rank = x.rank();
    if (order.size() != rank) fail(ErrorCode::ShapeMismatch, "permute order length");
    std::vector<bool> used(rank, false);
    for (const auto o : order) {
        if (o >= rank || used[o]) fail(ErrorCode::ShapeMismatch, "permute order is not a permutation");
        used[o] = true;
    }
    Shape out_shape(rank);
    for (std::size_t i = 0; i < rank; ++i) out_shape[i] = x.shape()[order[i]];
    auto map = std::make_shared<std::vector<std::size_t>>(permutation_map(x.shape(), order));
    const auto xv = x.data();
    std::vector<T> out(xv.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[(*map)[i]];
    auto fn = [map](detail::Node<T>& self) {
        auto& g = self.inputs[0]->ensure_grad();
        for (std::size_t i = 0; i < map->size(); ++i) g[(*map)[i]] += self.grad[i];
    };
    return make_result<T>(std::move(out_shape), std::move(out), "permute", {x.node()}, fn);
}

template <std::floating_point T>
Tensor<T> transpose(const Tensor<T>& x, int axis0, int axis1) {
    std::vector<std::size_t> order(x.rank());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::swap(order[normalize_axis(axis0, x.rank())], order[normalize_axis(axis1, x.rank())]);
    return permute(x, std::span<const std::size_t>(order));
}

template <std::floating_point T>
Tensor<T> sum(const Tensor<T>& x) {
    T total = 0;
    for (const T v : x.data()) total += v;
    auto fn = [](detail::Node<T>& self) {
        auto& g = self.inputs[0]->ensure_grad();
        for (auto& v : g) v += self.grad[0];
    };
    return make_result<T>({}, {total}, "sum", {x.node()}, fn);
}

template <std::floating_point T>
Tensor<T> mean(const Tensor<T>& x) {
    return scale(sum(x), T(1) / T(x.numel()));
}

template <std::floating_point T>
Tensor<T> sum_axis(const Tensor<T>& x, int axis) {
    const std::size_t ax = normalize_axis(axis, x.rank());
    const auto lay = axis_layout(x.shape(), ax);
    Shape out_shape = x.shape();
    out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(ax));
    std::vector<T> out(lay.outer * lay.inner, T(0));
    const auto xv = x.data();
    for (std::size_t o = 0; o < lay.outer; ++o)
        for (std::size_t j = 0; j < lay.len; ++j)
            for (std::size_t in = 0; in < lay.inner; ++in)
                out[o * lay.inner + in] += xv[(o * lay.len + j) * lay.inner + in];
    auto fn = [lay](detail::Node<T>& self) {
        auto& g = self.inputs[0]->ensure_grad();
        for (std::size_t o = 0; o < lay.outer; ++o)
            for (std::size_t j = 0; j < lay.len; ++j)
                for (std::size_t in = 0; in < lay.inner; ++in)
                    g[(o * lay.len + j) * lay.inner + in] += self.grad[o * lay.inner + in];
    };
    return make_result<T>(std::move(out_shape), std::move(out), "sum_axis", {x.node()}, fn);
}

template <std::floating_point T>
Tensor<T> mean_axis(const Tensor<T>& x, int axis) {
    const std::size_t len = x.dim(axis);
    return scale(sum_axis(x, axis), T(1) / T(len));
}

namespace {

struct ConvGeometry {
    std::size_t channels, height, width, kh, kw, stride, pad, out_h, out_w;
    std::size_t patch() const { return channels * kh * kw; }
    std::size_t pixels() const { return out_h * out_w; }
};

template <std::floating_point T>
void im2col(const ConvGeometry& c, const T* image, T* cols) {
    for (std::size_t ch = 0; ch < c.channels; ++ch)
        for (std::size_t ky = 0; ky < c.kh; ++ky)
            for (std::size_t kx = 0; kx < c.kw; ++kx) {
                const std::size_t row = (ch * c.kh + ky) * c.kw + kx;
                T* dst = cols + row * c.pixels();
                for (std::size_t oy = 0; oy < c.out_h; ++oy) {
                    const auto iy = static_cast<std::ptrdiff_t>(oy * c.stride + ky) - static_cast<std::ptrdiff_t>(c.pad);
                    for (std::size_t ox = 0; ox < c.out_w; ++ox) {
                        const auto ix =
                            static_cast<std::ptrdiff_t>(ox * c.stride + kx) - static_cast<std::ptrdiff_t>(c.pad);
                        const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<std::ptrdiff_t>(c.height) &&
                                            ix < static_cast<std::ptrdiff_t>(c.width);
                        dst[oy * c.out_w + ox] =
                            inside ? image[(ch * c.height + static_cast<std::size_t>(iy)) * c.width +
                                           static_cast<std::size_t>(ix)]
                                   : T(0);
                    }
                }
            }
}

template <std::floating_point T>
void col2im_add(const ConvGeometry& c, const T* cols, T* image) {
    for (std::size_t ch = 0; ch < c.channels; ++ch)
        for (std::size_t ky = 0; ky < c.kh; ++ky)
            for (std::size_t kx = 0; kx < c.kw; ++kx) {
                const std::size_t row = (ch * c.kh + ky) * c.kw + kx;
                const T* src = cols + row * c.pixels();
                for (std::size_t oy = 0; oy < c.out_h; ++oy) {
                    const auto iy = static_cast<std::ptrdiff_t>(oy * c.stride + ky) - static_cast<std::ptrdiff_t>(c.pad);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(c.height)) continue;
                    for (std::size_t ox = 0; ox < c.out_w; ++ox) {
                        const auto ix =
                            static_cast<std::ptrdiff_t>(ox * c.stride + kx) - static_cast<std::ptrdiff_t>(c.pad);
                        if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(c.width)) continue;
                        image[(ch * c.height + static_cast<std::size_t>(iy)) * c.width + static_cast<std::size_t>(ix)] +=
                            src[oy * c.out_w + ox];
                    }
                }
            }
}

}  // namespace

template <std::floating_point T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, std::size_t stride,
                 std::size_t padding) {
    if (x.rank() != 4 || weight.rank() != 4) fail(ErrorCode::ShapeMismatch, "conv2d expects rank-4 input and weight");
    const std::size_t batch = x.dim(0);
    const std::size_t out_ch = weight.dim(0);
    if (weight.dim(1) != x.dim(1)) fail(ErrorCode::ShapeMismatch, "conv2d channel mismatch");
    if (bias.shape() != Shape{out_ch}) fail(ErrorCode::ShapeMismatch, "conv2d bias extent");
    if (stride == 0) fail(ErrorCode::InvalidArgument, "conv2d stride must be positive");
    ConvGeometry geo{x.dim(1), x.dim(2), x.dim(3), weight.dim(2), weight.dim(3), stride, padding, 0, 0};
    if (geo.height + 2 * padding < geo.kh || geo.width + 2 * padding < geo.kw)
        fail(ErrorCode::ShapeMismatch, "conv2d kernel larger than padded input");
    geo.out_h = (geo.height + 2 * padding - geo.kh) / stride + 1;
    geo.out_w = (geo.width + 2 * padding - geo.kw) / stride + 1;

    const std::size_t in_plane = geo.channels * geo.height * geo.width;
    const std::size_t out_plane = out_ch * geo.pixels();
    std::vector<T> out(batch * out_plane);
    std::vector<T> cols(geo.patch() * geo.pixels());
    const auto xv = x.data();
    const auto wv = weight.data();
    const auto bv = bias.data();
    for (std::size_t n = 0; n < batch; ++n) {
        im2col(geo, xv.data() + n * in_plane, cols.data());
        T* dst = out.data() + n * out_plane;
        for (std::size_t o = 0; o < out_ch; ++o) std::fill_n(dst + o * geo.pixels(), geo.pixels(), bv[o]);
        gemm(false, false, out_ch, geo.pixels(), geo.patch(), wv.data(), cols.data(), dst, T(1));
    }

    auto fn = [geo, batch, out_ch, in_plane, out_plane](detail::Node<T>& self) {
        auto& px = *self.inputs[0];
        auto& pw = *self.inputs[1];
        auto& pb = *self.inputs[2];
        std::vector<T> cols(geo.patch() * geo.pixels());
        for (std::size_t n = 0; n < batch; ++n) {
            const T* g = self.grad.data() + n * out_plane;
            if (pb.requires_grad) {
                auto& gb = pb.ensure_grad();
                for (std::size_t o = 0; o < out_ch; ++o)
                    for (std::size_t p = 0; p < geo.pixels(); ++p) gb[o] += g[o * geo.pixels() + p];
            }
            if (pw.requires_grad) {
                im2col(geo, px.value.data() + n * in_plane, cols.data());
                gemm(false, true, out_ch, geo.patch(), geo.pixels(), g, cols.data(), pw.ensure_grad().data(), T(1));
            }
            if (px.requires_grad) {
                gemm(true, false, geo.patch(), geo.pixels(), out_ch, pw.value.data(), g, cols.data(), T(0));
                col2im_add(geo, cols.data(), px.ensure_grad().data() + n * in_plane);
            }
        }
    };
    return make_result<T>({batch, out_ch, geo.out_h, geo.out_w}, std::move(out), "conv2d",
                          {x.node(), weight.node(), bias.node()}, fn);
}

#define C2FT_INSTANTIATE_OPS(T)                                                                        \
    template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                     \
    template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                        \
    template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                        \
    template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                        \
    template Tensor<T> div(const Tensor<T>&, const Tensor<T>&);                                        \
    template Tensor<T> add_scalar(const Tensor<T>&, T);                                                \
    template Tensor<T> scale(const Tensor<T>&, T);                                                     \
    template Tensor<T> gelu(const Tensor<T>&);                                                         \
    template Tensor<T> sigmoid(const Tensor<T>&);                                                      \
    template Tensor<T> softmax(const Tensor<T>&, int);                                                 \
    template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);            \
    template Tensor<T> concat(std::span<const Tensor<T>>, int);                                        \
    template std::vector<Tensor<T>> split(const Tensor<T>&, std::span<const std::size_t>, int);        \
    template Tensor<T> slice(const Tensor<T>&, int, std::size_t, std::size_t);                         \
    template Tensor<T> reshape(const Tensor<T>&, Shape);                                               \
    template Tensor<T> permute(const Tensor<T>&, std::span<const std::size_t>);                        \
    template Tensor<T> transpose(const Tensor<T>&, int, int);                                          \
    template Tensor<T> sum(const Tensor<T>&);                                                          \
    template Tensor<T> mean(const Tensor<T>&);                                                         \
    template Tensor<T> sum_axis(const Tensor<T>&, int);                                                \
    template Tensor<T> mean_axis(const Tensor<T>&, int);                                               \
    template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t, std::size_t);

C2FT_INSTANTIATE_OPS(float)
C2FT_INSTANTIATE_OPS(double)

}  // namespace c2ft::ad
