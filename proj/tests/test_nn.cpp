#include <doctest.h>

#include "frng/core/nn.hpp"
#include "gradcheck.hpp"

using namespace frng;
using frng::testing::DTensor;
using frng::testing::grad_check;

TEST_CASE("transformer block is the identity at init") {
    Pcg32 rng(42, 0);
    nn::TransformerBlockT<float> block(16, 4, 32, rng);
    auto x = Tensor::uniform(rng, {5, 16}, -1, 1);
    auto y = block.forward(x);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y.data()[i] == x.data()[i]);
}

TEST_CASE("attention block gradient vs finite differences") {
    Pcg32 rng(4242, 1);
    nn::SelfAttentionT<double> attn(8, 2, rng);
    // zero-init out projection blocks gradients; randomize it for the check
    attn.wo.w = DTensor::uniform(rng, {8, 8}, -0.5, 0.5).set_requires_grad(true);

    auto x = DTensor::uniform(rng, {3, 8}, -1, 1);
    auto tgt = DTensor::uniform(rng, {3, 8}, -1, 1);
    std::vector<DTensor> params = {x,         attn.wq.w, attn.wq.b, attn.wk.w, attn.wk.b,
                                   attn.wv.w, attn.wv.b, attn.wo.w, attn.wo.b};
    const double err = grad_check(params, [&] { return ops::mse_loss(attn.forward(x), tgt); });
    CHECK(err < 1e-4);
}

TEST_CASE("transformer block gradient vs finite differences") {
    Pcg32 rng(77, 3);
    nn::TransformerBlockT<double> block(6, 2, 12, rng);
    block.attn.wo.w = DTensor::uniform(rng, {6, 6}, -0.5, 0.5).set_requires_grad(true);
    block.fc2.w = DTensor::uniform(rng, {12, 6}, -0.5, 0.5).set_requires_grad(true);

    auto x = DTensor::uniform(rng, {2, 6}, -1, 1);
    auto tgt = DTensor::uniform(rng, {2, 6}, -1, 1);
    nn::ParamMapT<double> pm;
    block.collect("blk", pm);
    std::vector<DTensor> params = {x};
    for (auto& [name, t] : pm.items) params.push_back(t);
    const double err = grad_check(params, [&] { return ops::mse_loss(block.forward(x), tgt); });
    CHECK(err < 1e-4);
}

TEST_CASE("mlp gradient and param collection") {
    Pcg32 rng(5, 5);
    nn::MlpT<double> mlp({4, 8, 8, 3}, rng);
    auto x = DTensor::uniform(rng, {6, 4}, -1, 1);
    auto tgt = DTensor::uniform(rng, {6, 3}, -1, 1);
    nn::ParamMapT<double> pm;
    mlp.collect("mlp", pm);
    CHECK(pm.items.size() == 6);
    std::vector<DTensor> params;
    for (auto& [name, t] : pm.items) params.push_back(t);
    const double err =
        grad_check(params, [&] { return ops::mse_loss(ops::softplus(mlp.forward(x)), tgt); });
    CHECK(err < 1e-4);
}

TEST_CASE("gradient clipping scales to the requested norm") {
    nn::ParamMap pm;
    auto p = Tensor::from_vector({2}, {3.f, 4.f}).set_requires_grad(true);
    p.ensure_grad();
    p.ptr()->g = {3.f, 4.f}; // norm 5
    pm.add("p", p);
    const float before = nn::clip_grad_norm(pm, 1.0f);
    CHECK(before == doctest::Approx(5.0f));
    const float after = std::sqrt(p.grad()[0] * p.grad()[0] + p.grad()[1] * p.grad()[1]);
    CHECK(after == doctest::Approx(1.0f));
}
