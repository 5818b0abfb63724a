#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "frng/core/tensor.hpp"

namespace frng::nn {

template <class T>
struct ParamMapT {
    std::vector<std::pair<std::string, TensorT<T>>> items;

    void add(const std::string& name, const TensorT<T>& t) { items.emplace_back(name, t); }

    TensorT<T>* find(const std::string& name) {
        for (auto& [n, t] : items)
            if (n == name) return &t;
        return nullptr;
    }
    std::size_t total_numel() const {
        std::size_t n = 0;
        for (const auto& [name, t] : items) n += t.numel();
        return n;
    }
};

using ParamMap = ParamMapT<float>;

template <class T>
struct LinearT {
    TensorT<T> w, b;

    LinearT() = default;
    LinearT(std::size_t in, std::size_t out, Pcg32& rng, bool zero_init = false) {
        if (zero_init) {
            w = TensorT<T>::zeros({in, out});
        } else {
            const T bound = static_cast<T>(std::sqrt(6.0 / static_cast<double>(in + out)));
            w = TensorT<T>::uniform(rng, {in, out}, -bound, bound);
        }
        b = TensorT<T>::zeros({out});
        w.set_requires_grad(true);
        b.set_requires_grad(true);
    }

    TensorT<T> forward(const TensorT<T>& x) const { return ops::add_bias(ops::matmul(x, w), b); }

    void collect(const std::string& prefix, ParamMapT<T>& out) {
        out.add(prefix + ".w", w);
        out.add(prefix + ".b", b);
    }
};

template <class T>
struct LayerNormT {
    TensorT<T> gain, bias;
    T eps = T(1e-5);

    LayerNormT() = default;
    explicit LayerNormT(std::size_t d) {
        gain = TensorT<T>::full({d}, T(1));
        bias = TensorT<T>::zeros({d});
        gain.set_requires_grad(true);
        bias.set_requires_grad(true);
    }

    TensorT<T> forward(const TensorT<T>& x) const { return ops::layernorm(x, gain, bias, eps); }

    void collect(const std::string& prefix, ParamMapT<T>& out) {
        out.add(prefix + ".gain", gain);
        out.add(prefix + ".bias", bias);
    }
};

// Full bidirectional multi-head self-attention over a [S, D] sequence.
template <class T>
struct SelfAttentionT {
    LinearT<T> wq, wk, wv, wo;
    std::size_t heads = 1;

    SelfAttentionT() = default;
    SelfAttentionT(std::size_t d, std::size_t n_heads, Pcg32& rng)
        : wq(d, d, rng), wk(d, d, rng), wv(d, d, rng), wo(d, d, rng, /*zero_init=*/true), heads(n_heads) {
        FRNG_REQUIRE(d % n_heads == 0, "attention: dim not divisible by heads");
    }

    TensorT<T> forward(const TensorT<T>& x) const {
        const std::size_t d = x.dim(1);
        const std::size_t dh = d / heads;
        const T inv_sqrt_dh = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dh)));
        TensorT<T> q = wq.forward(x), k = wk.forward(x), v = wv.forward(x);
        TensorT<T> merged;
        for (std::size_t h = 0; h < heads; ++h) {
            TensorT<T> qh = ops::slice_cols(q, h * dh, (h + 1) * dh);
            TensorT<T> kh = ops::slice_cols(k, h * dh, (h + 1) * dh);
            TensorT<T> vh = ops::slice_cols(v, h * dh, (h + 1) * dh);
            TensorT<T> attn = ops::softmax_rows(ops::scale(ops::matmul_nt(qh, kh), inv_sqrt_dh));
            TensorT<T> oh = ops::matmul(attn, vh);
            merged = h == 0 ? oh : ops::concat_cols(merged, oh);
        }
        return wo.forward(merged);
    }

    void collect(const std::string& prefix, ParamMapT<T>& out) {
        wq.collect(prefix + ".wq", out);
        wk.collect(prefix + ".wk", out);
        wv.collect(prefix + ".wv", out);
        wo.collect(prefix + ".wo", out);
    }
};

// Pre-LN block: x += Attn(LN(x)); x += MLP(LN(x)). Output projections start
// at zero so a fresh stack is the identity map.
template <class T>
struct TransformerBlockT {
    LayerNormT<T> ln1, ln2;
    SelfAttentionT<T> attn;
    LinearT<T> fc1, fc2;

    TransformerBlockT() = default;
    TransformerBlockT(std::size_t d, std::size_t heads, std::size_t mlp_hidden, Pcg32& rng)
        : ln1(d), ln2(d), attn(d, heads, rng), fc1(d, mlp_hidden, rng), fc2(mlp_hidden, d, rng, true) {}

    TensorT<T> forward(const TensorT<T>& x) const {
        TensorT<T> y = ops::add(x, attn.forward(ln1.forward(x)));
        return ops::add(y, fc2.forward(ops::gelu(fc1.forward(ln2.forward(y)))));
    }

    void collect(const std::string& prefix, ParamMapT<T>& out) {
        ln1.collect(prefix + ".ln1", out);
        attn.collect(prefix + ".attn", out);
        ln2.collect(prefix + ".ln2", out);
        fc1.collect(prefix + ".fc1", out);
        fc2.collect(prefix + ".fc2", out);
    }
};

template <class T>
struct TransformerT {
    std::vector<TransformerBlockT<T>> blocks;

    TransformerT() = default;
    TransformerT(std::size_t layers, std::size_t d, std::size_t heads, Pcg32& rng) {
        for (std::size_t i = 0; i < layers; ++i) blocks.emplace_back(d, heads, 4 * d, rng);
    }

    TensorT<T> forward(TensorT<T> x) const {
        for (const auto& b : blocks) x = b.forward(x);
        return x;
    }

    void collect(const std::string& prefix, ParamMapT<T>& out) {
        for (std::size_t i = 0; i < blocks.size(); ++i)
            blocks[i].collect(prefix + ".layer" + std::to_string(i), out);
    }
};

// GeLU MLP; the caller applies any output activation.
template <class T>
struct MlpT {
    std::vector<LinearT<T>> layers;

    MlpT() = default;
    MlpT(const std::vector<std::size_t>& dims, Pcg32& rng) {
        FRNG_REQUIRE(dims.size() >= 2, "mlp: need at least in/out dims");
        for (std::size_t i = 0; i + 1 < dims.size(); ++i) layers.emplace_back(dims[i], dims[i + 1], rng);
    }

    TensorT<T> forward(TensorT<T> x) const {
        for (std::size_t i = 0; i < layers.size(); ++i) {
            x = layers[i].forward(x);
            if (i + 1 < layers.size()) x = ops::gelu(x);
        }
        return x;
    }

    void collect(const std::string& prefix, ParamMapT<T>& out) {
        for (std::size_t i = 0; i < layers.size(); ++i)
            layers[i].collect(prefix + ".fc" + std::to_string(i), out);
    }
};

// Adam over a named parameter set. Parameters without a gradient (unused in
// the current step) are left untouched.
template <class T>
struct AdamOptT {
    ParamMapT<T>* params = nullptr;
    std::vector<AdamStateT<T>> state;
    T beta1 = T(0.9), beta2 = T(0.999), eps = T(1e-8);

    explicit AdamOptT(ParamMapT<T>& p) : params(&p), state(p.items.size()) {}

    void step(T lr) {
        for (std::size_t i = 0; i < params->items.size(); ++i) {
            TensorT<T>& t = params->items[i].second;
            if (!t.requires_grad() || !t.has_grad()) continue;
            adam_step(t, state[i], lr, beta1, beta2, eps);
        }
    }

    void zero_grad() {
        for (auto& [name, t] : params->items) t.zero_grad();
    }
};

// Global-norm gradient clip; returns the pre-clip norm.
template <class T>
T clip_grad_norm(ParamMapT<T>& params, T max_norm) {
    double sq = 0;
    for (auto& [name, t] : params.items) {
        if (!t.has_grad()) continue;
        for (const T& g : t.grad()) sq += static_cast<double>(g) * static_cast<double>(g);
    }
    const T norm = static_cast<T>(std::sqrt(sq));
    if (norm > max_norm && norm > T(0)) {
        const T s = max_norm / norm;
        for (auto& [name, t] : params.items) {
            if (!t.has_grad()) continue;
            auto& d = *t.ptr();
            for (T& g : d.g) g *= s;
        }
    }
    return norm;
}

} // namespace frng::nn
