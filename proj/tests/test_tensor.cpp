#include <doctest.h>

#include <cmath>

#include "frng/core/nn.hpp"
#include "frng/core/tensor.hpp"
#include "gradcheck.hpp"

using namespace frng;
using frng::testing::DTensor;
using frng::testing::grad_check;

namespace {

DTensor random_dtensor(Pcg32& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
    return DTensor::uniform(rng, std::move(shape), lo, hi);
}

} // namespace

TEST_CASE("matmul basics") {
    auto I = Tensor::from_vector({2, 2}, {1, 0, 0, 1});
    auto X = Tensor::from_vector({2, 3}, {5, -2, 7, 0.5f, 3, 9});
    auto Y = ops::matmul(I, X);
    for (std::size_t i = 0; i < X.numel(); ++i) CHECK(Y.data()[i] == doctest::Approx(X.data()[i]));

    auto A = Tensor::from_vector({2, 2}, {1, 2, 3, 4});
    auto B = Tensor::from_vector({2, 1}, {0, 1});
    auto C = ops::matmul(A, B);
    CHECK(C.data()[0] == doctest::Approx(2));
    CHECK(C.data()[1] == doctest::Approx(4));

    CHECK_THROWS(ops::matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})));
}

TEST_CASE("matmul gradient vs central finite differences") {
    Pcg32 rng(7, 1);
    auto A = random_dtensor(rng, {5, 7});
    auto B = random_dtensor(rng, {7, 3});
    const double err = grad_check({A, B}, [&] { return ops::mean_all(ops::matmul(A, B)); });
    CHECK(err < 1e-4);

    // also the NT variant used in attention
    auto P = random_dtensor(rng, {4, 6});
    auto Q = random_dtensor(rng, {5, 6});
    const double err2 = grad_check({P, Q}, [&] { return ops::mse_loss(ops::matmul_nt(P, Q), DTensor::zeros({4, 5})); });
    CHECK(err2 < 1e-4);
}

TEST_CASE("layernorm") {
    auto gain = Tensor::full({3}, 1.0f);
    auto bias = Tensor::zeros({3});
    auto x = Tensor::from_vector({1, 3}, {4.2f, 4.2f, 4.2f});
    auto y = ops::layernorm(x, gain, bias, 1e-5f);
    for (std::size_t i = 0; i < 3; ++i) CHECK(y.data()[i] == doctest::Approx(0).epsilon(1e-6));

    auto x2 = Tensor::from_vector({1, 2}, {1, -1});
    auto y2 = ops::layernorm(x2, Tensor::full({2}, 1.0f), Tensor::zeros({2}), 1e-12f);
    CHECK(y2.data()[0] == doctest::Approx(1).epsilon(1e-5));
    CHECK(y2.data()[1] == doctest::Approx(-1).epsilon(1e-5));

    Pcg32 rng(11, 0);
    auto xr = Tensor::uniform(rng, {16, 64}, -3.f, 3.f);
    auto yr = ops::layernorm(xr, Tensor::full({64}, 1.0f), Tensor::zeros({64}), 1e-5f);
    for (std::size_t r = 0; r < 16; ++r) {
        double mu = 0, var = 0;
        for (std::size_t j = 0; j < 64; ++j) mu += yr.data()[r * 64 + j];
        mu /= 64;
        for (std::size_t j = 0; j < 64; ++j) {
            const double c = yr.data()[r * 64 + j] - mu;
            var += c * c;
        }
        var /= 64;
        CHECK(std::abs(mu) < 1e-6);
        CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
    }
}

TEST_CASE("layernorm gradient") {
    Pcg32 rng(3, 3);
    auto x = random_dtensor(rng, {4, 6});
    auto g = random_dtensor(rng, {6}, 0.5, 1.5);
    auto b = random_dtensor(rng, {6});
    auto tgt = random_dtensor(rng, {4, 6});
    const double err =
        grad_check({x, g, b}, [&] { return ops::mse_loss(ops::layernorm(x, g, b, 1e-5), tgt); });
    CHECK(err < 1e-4);
}

TEST_CASE("gelu") {
    auto x = Tensor::from_vector({3}, {0.f, 3.f, -1.f});
    auto y = ops::gelu(x);
    CHECK(y.data()[0] == doctest::Approx(0));
    const double expect3 = 3.0 * 0.5 * (1.0 + std::erf(3.0 / std::sqrt(2.0)));
    CHECK(y.data()[1] == doctest::Approx(expect3).epsilon(1e-6));
    CHECK(expect3 == doctest::Approx(2.9960).epsilon(1e-4));

    // derivative at zero is exactly Phi(0) = 0.5 for the erf form
    auto x0 = DTensor::from_vector({1}, {0.0}).set_requires_grad(true);
    TapeT<double> tape;
    {
        TapeT<double>::Scope scope(tape);
        auto y0 = ops::gelu(x0);
        tape.backward(y0);
    }
    CHECK(x0.grad()[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("gelu/softplus/sigmoid/satur gradients") {
    Pcg32 rng(5, 9);
    for (int trial = 0; trial < 3; ++trial) {
        auto x = random_dtensor(rng, {2, 5}, -2.0, 2.0);
        auto tgt = random_dtensor(rng, {2, 5});
        CHECK(grad_check({x}, [&] { return ops::mse_loss(ops::gelu(x), tgt); }) < 1e-4);
        CHECK(grad_check({x}, [&] { return ops::mse_loss(ops::softplus(x), tgt); }) < 1e-4);
        CHECK(grad_check({x}, [&] { return ops::mse_loss(ops::sigmoid(x), tgt); }) < 1e-4);
        CHECK(grad_check({x}, [&] { return ops::mse_loss(ops::satur(ops::softplus(x)), tgt); }) < 1e-4);
        CHECK(grad_check({x}, [&] { return ops::mse_loss(ops::exp_op(x), tgt); }) < 1e-4);
    }
}

TEST_CASE("softmax") {
    auto y = ops::softmax_rows(Tensor::from_vector({1, 2}, {0, 0}));
    CHECK(y.data()[0] == doctest::Approx(0.5));
    CHECK(y.data()[1] == doctest::Approx(0.5));

    auto a = ops::softmax_rows(Tensor::from_vector({1, 3}, {0.3f, -1.2f, 2.f}));
    auto b = ops::softmax_rows(Tensor::from_vector({1, 3}, {0.3f + 7.f, -1.2f + 7.f, 2.f + 7.f}));
    for (int i = 0; i < 3; ++i) CHECK(a.data()[i] == doctest::Approx(b.data()[i]).epsilon(1e-6));

    auto c = ops::softmax_rows(Tensor::from_vector({1, 2}, {0.f, std::log(3.f)}));
    CHECK(c.data()[0] == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(c.data()[1] == doctest::Approx(0.75).epsilon(1e-6));
}

TEST_CASE("softmax + reductions gradient") {
    Pcg32 rng(13, 2);
    for (int trial = 0; trial < 3; ++trial) {
        auto x = random_dtensor(rng, {3, 4}, -2.0, 2.0);
        auto tgt = random_dtensor(rng, {3, 4}, 0.0, 1.0);
        CHECK(grad_check({x}, [&] { return ops::mse_loss(ops::softmax_rows(x), tgt); }) < 1e-4);
        CHECK(grad_check({x}, [&] { return ops::mean_all(ops::mul(x, x)); }) < 1e-4);
    }
}

TEST_CASE("structural op gradients") {
    Pcg32 rng(17, 4);
    auto a = random_dtensor(rng, {3, 4});
    auto b = random_dtensor(rng, {2, 4});
    auto c = random_dtensor(rng, {3, 2});
    auto bias = random_dtensor(rng, {4});
    auto tgt5 = random_dtensor(rng, {5, 4});
    CHECK(grad_check({a, b}, [&] { return ops::mse_loss(ops::concat_rows(a, b), tgt5); }) < 1e-4);
    auto tgt36 = random_dtensor(rng, {3, 6});
    CHECK(grad_check({a, c}, [&] { return ops::mse_loss(ops::concat_cols(a, c), tgt36); }) < 1e-4);
    auto tgt22 = random_dtensor(rng, {2, 2});
    CHECK(grad_check({a}, [&] {
              return ops::mse_loss(ops::slice_cols(ops::slice_rows(a, 1, 3), 0, 2), tgt22);
          }) < 1e-4);
    auto tgt34 = random_dtensor(rng, {3, 4});
    CHECK(grad_check({a, bias}, [&] { return ops::mse_loss(ops::add_bias(a, bias), tgt34); }) < 1e-4);
    std::vector<std::size_t> idx = {2, 0, 0, 1};
    auto tgt44 = random_dtensor(rng, {4, 4});
    CHECK(grad_check({a}, [&] { return ops::mse_loss(ops::gather_rows(a, idx), tgt44); }) < 1e-4);
    auto tgtn = random_dtensor(rng, {3, 4});
    CHECK(grad_check({a}, [&] { return ops::mse_loss(ops::normalize_rows(a, 1e-9), tgtn); }) < 1e-4);
    auto img = random_dtensor(rng, {4, 4, 3});
    auto img2 = random_dtensor(rng, {4, 4, 3});
    CHECK(grad_check({img}, [&] { return ops::image_grad_l1(img, img2); }) < 1e-4);
    auto tgtp = random_dtensor(rng, {2, 2, 3});
    CHECK(grad_check({img}, [&] { return ops::mse_loss(ops::avgpool2(img), tgtp); }) < 1e-4);
}

TEST_CASE("token distance terms") {
    // identical nonzero rows -> 0; orthogonal -> 1; antipodal -> 2
    auto u = Tensor::from_vector({1, 2}, {1, 0});
    auto v = Tensor::from_vector({1, 2}, {0, 1});
    auto w = Tensor::from_vector({1, 2}, {-1, 0});
    CHECK(ops::cosine_dissim_mean(u, u).item() == doctest::Approx(0));
    CHECK(ops::cosine_dissim_mean(u, v).item() == doctest::Approx(1));
    CHECK(ops::cosine_dissim_mean(u, w).item() == doctest::Approx(2));

    // KL examples: equal -> 0; shifted -> 0; [0, ln3] vs [0,0] -> 0.25 ln 0.5 + 0.75 ln 1.5
    auto p = Tensor::from_vector({1, 2}, {0.f, std::log(3.f)});
    auto q = Tensor::from_vector({1, 2}, {0.f, 0.f});
    CHECK(ops::kld_softmax_mean(p, p).item() == doctest::Approx(0));
    auto p_shift = Tensor::from_vector({1, 2}, {5.f, 5.f + std::log(3.f)});
    CHECK(ops::kld_softmax_mean(p, p_shift).item() == doctest::Approx(0).epsilon(1e-6));
    const double expect = 0.25 * std::log(0.5) + 0.75 * std::log(1.5);
    CHECK(ops::kld_softmax_mean(p, q).item() == doctest::Approx(expect).epsilon(1e-5));
    CHECK(expect == doctest::Approx(0.1308).epsilon(1e-3));

    Pcg32 rng(23, 5);
    auto A = random_dtensor(rng, {4, 6});
    auto B = random_dtensor(rng, {4, 6});
    CHECK(grad_check({A, B}, [&] { return ops::cosine_dissim_mean(A, B); }) < 1e-4);
    CHECK(grad_check({A, B}, [&] { return ops::kld_softmax_mean(A, B); }) < 1e-4);
}

TEST_CASE("adam") {
    auto p = Tensor::from_vector({3}, {1.f, -2.f, 0.5f});
    auto p_ref = p.values();
    AdamState st;
    p.set_requires_grad(true);
    p.ensure_grad(); // zero gradient
    adam_step(p, st, 0.01f);
    for (int i = 0; i < 3; ++i) CHECK(p.data()[i] == doctest::Approx(p_ref[i]));

    // first step with gradient g moves by about -lr * sign(g)
    auto q = Tensor::from_vector({2}, {0.f, 0.f});
    q.set_requires_grad(true);
    q.ensure_grad();
    q.ptr()->g[0] = 0.3f;
    q.ptr()->g[1] = -4.f;
    AdamState st2;
    adam_step(q, st2, 0.01f);
    CHECK(q.data()[0] == doctest::Approx(-0.01 * 0.3 / (0.3 + 1e-8)).epsilon(1e-4));
    CHECK(q.data()[1] == doctest::Approx(0.01 * 4.0 / (4.0 + 1e-8)).epsilon(1e-4));

    // determinism: identical state + grads -> identical result
    auto r1 = Tensor::from_vector({2}, {1.f, 2.f});
    auto r2 = Tensor::from_vector({2}, {1.f, 2.f});
    r1.set_requires_grad(true);
    r2.set_requires_grad(true);
    r1.ensure_grad();
    r2.ensure_grad();
    r1.ptr()->g = {0.1f, 0.2f};
    r2.ptr()->g = {0.1f, 0.2f};
    AdamState s1, s2;
    adam_step(r1, s1, 0.005f);
    adam_step(r2, s2, 0.005f);
    CHECK(r1.data()[0] == r2.data()[0]);
    CHECK(r1.data()[1] == r2.data()[1]);
}

TEST_CASE("forward determinism and tape hygiene") {
    Pcg32 rng1(99, 0), rng2(99, 0);
    auto a1 = Tensor::uniform(rng1, {37, 19}, -1, 1);
    auto b1 = Tensor::uniform(rng1, {19, 23}, -1, 1);
    auto a2 = Tensor::uniform(rng2, {37, 19}, -1, 1);
    auto b2 = Tensor::uniform(rng2, {19, 23}, -1, 1);
    auto c1 = ops::matmul(a1, b1);
    auto c2 = ops::matmul(a2, b2);
    for (std::size_t i = 0; i < c1.numel(); ++i) CHECK(c1.data()[i] == c2.data()[i]);

    Tape tape;
    auto w = Tensor::from_vector({2, 2}, {1, 2, 3, 4}).set_requires_grad(true);
    {
        Tape::Scope scope(tape);
        auto loss = ops::mean_all(ops::mul(w, w));
        CHECK(tape.size() > 0);
        tape.backward(loss);
    }
    CHECK(w.has_grad());
    tape.clear();
    CHECK(tape.empty());
    w.zero_grad();
    for (const float g : w.grad()) CHECK(g == 0.0f);
}

TEST_CASE("extreme-but-finite inputs stay finite") {
    auto x = Tensor::from_vector({8}, {1e30f, -1e30f, 88.f, -88.f, 1e-30f, -1e-30f, 3e4f, -3e4f});
    CHECK(ops::gelu(x).all_finite());
    CHECK(ops::softplus(x).all_finite());
    CHECK(ops::sigmoid(x).all_finite());
    CHECK(ops::exp_op(x).all_finite());
    CHECK(ops::relu(x).all_finite());
    auto rows = Tensor::from_vector({2, 4}, {1e30f, -1e30f, 1e28f, 0.f, 1e-30f, 0.f, 0.f, 0.f});
    CHECK(ops::softmax_rows(rows).all_finite());
    CHECK(ops::layernorm(rows, Tensor::full({4}, 1.0f), Tensor::zeros({4}), 1e-5f).all_finite());
    CHECK(ops::normalize_rows(rows, 1e-12f).all_finite());
    auto big = Tensor::from_vector({1, 2}, {1e20f, -1e20f});
    CHECK(ops::cosine_dissim_mean(big, big).all_finite());
    CHECK(ops::kld_softmax_mean(big, ops::scale(big, 0.5f)).all_finite());
}
