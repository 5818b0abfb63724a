#pragma once

#include <cmath>
#include <cstdlib>
#include <functional>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "frng/core/gemm.hpp"
#include "frng/core/parallel.hpp"
#include "frng/core/rng.hpp"

namespace frng {

[[noreturn]] inline void fail(const std::string& msg) { throw std::runtime_error(msg); }

#define FRNG_REQUIRE(cond, msg) \
    do {                        \
        if (!(cond)) ::frng::fail(msg); \
    } while (0)

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::string r = "[";
    for (std::size_t i = 0; i < s.size(); ++i) r += (i ? "," : "") + std::to_string(s[i]);
    return r + "]";
}

template <class T>
struct TensorDataT {
    Shape shape;
    std::vector<T> v;
    std::vector<T> g; // empty until a backward pass touches it
    bool requires_grad = false;

    void ensure_grad() {
        if (g.size() != v.size()) g.assign(v.size(), T(0));
    }
};

// Value-semantic handle over shared storage. Copies alias the same buffer.
template <class T>
class TensorT {
  public:
    TensorT() : d_(std::make_shared<TensorDataT<T>>()) {}
    explicit TensorT(std::shared_ptr<TensorDataT<T>> d) : d_(std::move(d)) {}

    static TensorT zeros(Shape shape) {
        TensorT t;
        t.d_->shape = std::move(shape);
        t.d_->v.assign(shape_numel(t.d_->shape), T(0));
        return t;
    }
    static TensorT full(Shape shape, T value) {
        TensorT t = zeros(std::move(shape));
        for (T& x : t.d_->v) x = value;
        return t;
    }
    static TensorT from_vector(Shape shape, std::vector<T> values) {
        FRNG_REQUIRE(shape_numel(shape) == values.size(), "tensor init: shape/data mismatch");
        TensorT t;
        t.d_->shape = std::move(shape);
        t.d_->v = std::move(values);
        return t;
    }
    static TensorT uniform(Pcg32& rng, Shape shape, T lo, T hi) {
        TensorT t = zeros(std::move(shape));
        for (T& x : t.d_->v) x = lo + (hi - lo) * static_cast<T>(rng.next_double());
        return t;
    }

    const Shape& shape() const { return d_->shape; }
    std::size_t numel() const { return d_->v.size(); }
    std::size_t dim(std::size_t i) const { return d_->shape[i]; }
    std::size_t rank() const { return d_->shape.size(); }
    std::size_t last_dim() const { return d_->shape.empty() ? 1 : d_->shape.back(); }
    std::size_t rows() const { return last_dim() ? numel() / last_dim() : 0; }

    const T* data() const { return d_->v.data(); }
    T* data() { return d_->v.data(); }
    const std::vector<T>& values() const { return d_->v; }
    std::vector<T>& values() { return d_->v; }
    T item() const {
        FRNG_REQUIRE(numel() == 1, "item() on non-scalar tensor");
        return d_->v[0];
    }

    bool requires_grad() const { return d_->requires_grad; }
    TensorT& set_requires_grad(bool rg) {
        d_->requires_grad = rg;
        return *this;
    }
    bool has_grad() const { return !d_->g.empty(); }
    const std::vector<T>& grad() const { return d_->g; }
    void ensure_grad() { d_->ensure_grad(); }
    void zero_grad() {
        for (T& x : d_->g) x = T(0);
    }

    const std::shared_ptr<TensorDataT<T>>& ptr() const { return d_; }
    bool defined() const { return d_ && !d_->shape.empty(); }

    bool all_finite() const {
        for (const T& x : d_->v)
            if (!std::isfinite(static_cast<double>(x))) return false;
        return true;
    }

  private:
    std::shared_ptr<TensorDataT<T>> d_;
};

// Define-by-run gradient tape. One tape per training step, single writer.
// Ops record onto the innermost active scope of the current thread.
template <class T>
class TapeT {
  public:
    class Scope {
      public:
        explicit Scope(TapeT& tape) : prev_(current_) { current_ = &tape; }
        ~Scope() { current_ = prev_; }
        Scope(const Scope&) = delete;
        Scope& operator=(const Scope&) = delete;

      private:
        TapeT* prev_;
    };

    static TapeT* current() { return current_; }

    void record(std::function<void()> back) { nodes_.push_back(std::move(back)); }

    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }

    // Seeds d(loss)/d(loss) = 1 and replays recorded ops in reverse order.
    void backward(TensorT<T>& loss) {
        FRNG_REQUIRE(loss.numel() == 1, "backward() needs a scalar loss");
        loss.ensure_grad();
        loss.ptr()->g[0] = T(1);
        for (std::size_t i = nodes_.size(); i-- > 0;) nodes_[i]();
    }

    void clear() { nodes_.clear(); }

  private:
    std::vector<std::function<void()>> nodes_;
    static thread_local TapeT* current_;
};

template <class T>
thread_local TapeT<T>* TapeT<T>::current_ = nullptr;

inline bool finite_checks_enabled() {
    static const bool on = [] {
        const char* e = std::getenv("FRNG_CHECK_FINITE");
        return e && e[0] && e[0] != '0';
    }();
    return on;
}

template <class T>
inline void debug_check_finite(const TensorT<T>& t, const char* op) {
    if (finite_checks_enabled() && !t.all_finite())
        fail(std::string("non-finite value produced by op ") + op);
}

namespace ops {

template <class T>
bool tracing(const TensorT<T>& a) {
    return TapeT<T>::current() != nullptr && a.requires_grad();
}
template <class T>
bool tracing(const TensorT<T>& a, const TensorT<T>& b) {
    return TapeT<T>::current() != nullptr && (a.requires_grad() || b.requires_grad());
}

// ---------------------------------------------------------------- elementwise

template <class T, class Fwd, class Bwd>
TensorT<T> unary_op(const TensorT<T>& x, const char* name, Fwd fwd, Bwd dfdx) {
    TensorT<T> out = TensorT<T>::zeros(x.shape());
    const std::size_t n = x.numel();
    const T* xv = x.data();
    T* ov = out.data();
    parallel_for(n, 4096, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) ov[i] = fwd(xv[i]);
    });
    if (tracing(x)) {
        out.set_requires_grad(true);
        auto xd = x.ptr();
        auto od = out.ptr();
        TapeT<T>::current()->record([xd, od, dfdx] {
            if (od->g.empty()) return;
            xd->ensure_grad();
            const std::size_t n = xd->v.size();
            for (std::size_t i = 0; i < n; ++i) xd->g[i] += dfdx(xd->v[i], od->v[i]) * od->g[i];
        });
    }
    debug_check_finite(out, name);
    return out;
}

template <class T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
    FRNG_REQUIRE(a.shape() == b.shape(), "add: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    TensorT<T> out = TensorT<T>::zeros(a.shape());
    const std::size_t n = a.numel();
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] + b.data()[i];
    if (tracing(a, b)) {
        out.set_requires_grad(true);
        auto ad = a.ptr(), bd = b.ptr(), od = out.ptr();
        TapeT<T>::current()->record([ad, bd, od] {
            if (od->g.empty()) return;
            if (ad->requires_grad) {
                ad->ensure_grad();
                for (std::size_t i = 0; i < od->g.size(); ++i) ad->g[i] += od->g[i];
            }
            if (bd->requires_grad) {
                bd->ensure_grad();
                for (std::size_t i = 0; i < od->g.size(); ++i) bd->g[i] += od->g[i];
            }
        });
    }
    return out;
}

template <class T>
TensorT<T> sub(const TensorT<T>& a, const TensorT<T>& b) {
    FRNG_REQUIRE(a.shape() == b.shape(), "sub: shape mismatch");
    TensorT<T> out = TensorT<T>::zeros(a.shape());
    const std::size_t n = a.numel();
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] - b.data()[i];
    if (tracing(a, b)) {
        out.set_requires_grad(true);
        auto ad = a.ptr(), bd = b.ptr(), od = out.ptr();
        TapeT<T>::current()->record([ad, bd, od] {
            if (od->g.empty()) return;
            if (ad->requires_grad) {
                ad->ensure_grad();
                for (std::size_t i = 0; i < od->g.size(); ++i) ad->g[i] += od->g[i];
            }
            if (bd->requires_grad) {
                bd->ensure_grad();
                for (std::size_t i = 0; i < od->g.size(); ++i) bd->g[i] -= od->g[i];
            }
        });
    }
    return out;
}

template <class T>
TensorT<T> mul(const TensorT<T>& a, const TensorT<T>& b) {
    FRNG_REQUIRE(a.shape() == b.shape(), "mul: shape mismatch");
    TensorT<T> out = TensorT<T>::zeros(a.shape());
    const std::size_t n = a.numel();
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] * b.data()[i];
    if (tracing(a, b)) {
        out.set_requires_grad(true);
        auto ad = a.ptr(), bd = b.ptr(), od = out.ptr();
        TapeT<T>::current()->record([ad, bd, od] {
            if (od->g.empty()) return;
            if (ad->requires_grad) {
                ad->ensure_grad();
                for (std::size_t i = 0; i < od->g.size(); ++i) ad->g[i] += bd->v[i] * od->g[i];
            }
            if (bd->requires_grad) {
                bd->ensure_grad();
                for (std::size_t i = 0; i < od->g.size(); ++i) bd->g[i] += ad->v[i] * od->g[i];
            }
        });
    }
    return out;
}

template <class T>
TensorT<T> scale(const TensorT<T>& x, T c) {
    return unary_op(x, "scale", [c](T v) { return c * v; }, [c](T, T) { return c; });
}

template <class T>
TensorT<T> add_scalar(const TensorT<T>& x, T c) {
    return unary_op(x, "add_scalar", [c](T v) { return v + c; }, [](T, T) { return T(1); });
}

// x[..., d] + b[d]
template <class T>
TensorT<T> add_bias(const TensorT<T>& x, const TensorT<T>& b) {
    const std::size_t d = x.last_dim();
    FRNG_REQUIRE(b.numel() == d, "add_bias: bias dim mismatch");
    TensorT<T> out = TensorT<T>::zeros(x.shape());
    const std::size_t rows = x.rows();
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < d; ++j) out.data()[r * d + j] = x.data()[r * d + j] + b.data()[j];
    if (tracing(x, b)) {
        out.set_requires_grad(true);
        auto xd = x.ptr(), bd = b.ptr(), od = out.ptr();
        TapeT<T>::current()->record([xd, bd, od, rows, d] {
            if (od->g.empty()) return;
            if (xd->requires_grad) {
                xd->ensure_grad();
                for (std::size_t i = 0; i < od->g.size(); ++i) xd->g[i] += od->g[i];
            }
            if (bd->requires_grad) {
                bd->ensure_grad();
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t j = 0; j < d; ++j) bd->g[j] += od->g[r * d + j];
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------- activations

template <class T>
TensorT<T> gelu(const TensorT<T>& x) {
    // Exact erf form: y = x * Phi(x).
    constexpr double inv_sqrt2 = 0.7071067811865476;
    constexpr double inv_sqrt2pi = 0.3989422804014327;
    return unary_op(
        x, "gelu",
        [](T v) {
            const double vd = static_cast<double>(v);
            return static_cast<T>(vd * 0.5 * (1.0 + std::erf(vd * inv_sqrt2)));
        },
        [](T v, T) {
            const double vd = static_cast<double>(v);
            const double phi = 0.5 * (1.0 + std::erf(vd * inv_sqrt2));
            const double pdf = inv_sqrt2pi * std::exp(-0.5 * vd * vd);
            return static_cast<T>(phi + vd * pdf);
        });
}

template <class T>
TensorT<T> softplus(const TensorT<T>& x) {
    return unary_op(
        x, "softplus",
        [](T v) {
            if (v > T(20)) return v;
            if (v < T(-20)) return static_cast<T>(std::exp(static_cast<double>(v)));
            return static_cast<T>(std::log1p(std::exp(static_cast<double>(v))));
        },
        [](T v, T) {
            const double e = std::exp(-std::abs(static_cast<double>(v)));
            const double s = v >= T(0) ? 1.0 / (1.0 + e) : (1.0 - 1.0 / (1.0 + e));
            return static_cast<T>(s);
        });
}

template <class T>
T sigmoid_scalar(T v) {
    if (v >= T(0)) return static_cast<T>(1.0 / (1.0 + std::exp(-static_cast<double>(v))));
    const double e = std::exp(static_cast<double>(v));
    return static_cast<T>(e / (1.0 + e));
}

// clamp_eps > 0 keeps outputs strictly inside (0,1).
template <class T>
TensorT<T> sigmoid(const TensorT<T>& x, T clamp_eps = T(0)) {
    return unary_op(
        x, "sigmoid",
        [clamp_eps](T v) {
            T s = sigmoid_scalar(v);
            if (clamp_eps > T(0)) s = std::min(T(1) - clamp_eps, std::max(clamp_eps, s));
            return s;
        },
        [](T v, T) {
            const T s = sigmoid_scalar(v);
            return s * (T(1) - s);
        });
}

template <class T>
TensorT<T> exp_op(const TensorT<T>& x) {
    return unary_op(
        x, "exp",
        [](T v) { return static_cast<T>(std::exp(std::min(static_cast<double>(v), 80.0))); },
        [](T v, T y) { return static_cast<double>(v) < 80.0 ? y : T(0); });
}

// x / (1 + x) for x >= 0; maps [0,inf) onto [0,1).
template <class T>
TensorT<T> satur(const TensorT<T>& x) {
    return unary_op(
        x, "satur", [](T v) { return v / (T(1) + v); },
        [](T v, T) {
            const T d = T(1) + v;
            return T(1) / (d * d);
        });
}

template <class T>
TensorT<T> relu(const TensorT<T>& x) {
    return unary_op(
        x, "relu", [](T v) { return v > T(0) ? v : T(0); },
        [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <class T>
TensorT<T> clamp(const TensorT<T>& x, T lo, T hi) {
    return unary_op(
        x, "clamp", [lo, hi](T v) { return std::min(hi, std::max(lo, v)); },
        [lo, hi](T v, T) { return (v > lo && v < hi) ? T(1) : T(0); });
}

// ---------------------------------------------------------------- matmul

template <class T>
TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b) {
    FRNG_REQUIRE(a.rank() == 2 && b.rank() == 2, "matmul: rank-2 tensors required");
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    FRNG_REQUIRE(b.dim(0) == k, "matmul: inner dims disagree " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    TensorT<T> out = TensorT<T>::zeros({m, n});
    gemm_nn(a.data(), b.data(), out.data(), m, k, n, false);
    if (tracing(a, b)) {
        out.set_requires_grad(true);
        auto ad = a.ptr(), bd = b.ptr(), od = out.ptr();
        TapeT<T>::current()->record([ad, bd, od, m, k, n] {
            if (od->g.empty()) return;
            if (ad->requires_grad) {
                ad->ensure_grad();
                gemm_nt(od->g.data(), bd->v.data(), ad->g.data(), m, n, k, true); // dA = dC B^T
            }
            if (bd->requires_grad) {
                bd->ensure_grad();
                gemm_tn(ad->v.data(), od->g.data(), bd->g.data(), k, m, n, true); // dB = A^T dC
            }
        });
    }
    debug_check_finite(out, "matmul");
    return out;
}

// a[m,k] * b[n,k]^T -> [m,n]
template <class T>
TensorT<T> matmul_nt(const TensorT<T>& a, const TensorT<T>& b) {
    FRNG_REQUIRE(a.rank() == 2 && b.rank() == 2 && a.dim(1) == b.dim(1), "matmul_nt: shape mismatch");
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
    TensorT<T> out = TensorT<T>::zeros({m, n});
    gemm_nt(a.data(), b.data(), out.data(), m, k, n, false);
    if (tracing(a, b)) {
        out.set_requires_grad(true);
        auto ad = a.ptr(), bd = b.ptr(), od = out.ptr();
        TapeT<T>::current()->record([ad, bd, od, m, k, n] {
            if (od->g.empty()) return;
            if (ad->requires_grad) {
                ad->ensure_grad();
                gemm_nn(od->g.data(), bd->v.data(), ad->g.data(), m, n, k, true); // dA = dC B
            }
            if (bd->requires_grad) {
                bd->ensure_grad();
                gemm_tn(od->g.data(), ad->v.data(), bd->g.data(), n, m, k, true); // dB = dC^T A
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------- row-normalizations

template <class T>
TensorT<T> layernorm(const TensorT<T>& x, const TensorT<T>& gain, const TensorT<T>& bias, T eps) {
    const std::size_t d = x.last_dim();
    FRNG_REQUIRE(d >= 1 && eps > T(0), "layernorm: d >= 1 and eps > 0 required");
    FRNG_REQUIRE(gain.numel() == d && bias.numel() == d, "layernorm: gain/bias dim mismatch");
    const std::size_t rows = x.rows();
    TensorT<T> out = TensorT<T>::zeros(x.shape());
    std::vector<T> inv_sigma(rows), mean(rows);
    const T* xv = x.data();
    T* ov = out.data();
    const T* gv = gain.data();
    const T* bv = bias.data();
    parallel_for(rows, 64, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            const T* row = xv + r * d;
            T mu = T(0);
            for (std::size_t j = 0; j < d; ++j) mu += row[j];
            mu /= static_cast<T>(d);
            T var = T(0);
            for (std::size_t j = 0; j < d; ++j) {
                const T c = row[j] - mu;
                var += c * c;
            }
            var /= static_cast<T>(d);
            const T is = T(1) / std::sqrt(var + eps);
            mean[r] = mu;
            inv_sigma[r] = is;
            T* orow = ov + r * d;
            for (std::size_t j = 0; j < d; ++j) orow[j] = (row[j] - mu) * is * gv[j] + bv[j];
        }
    });
    if (tracing(x, gain) || tracing(x, bias)) {
        out.set_requires_grad(true);
        auto xd = x.ptr(), gd = gain.ptr(), bd = bias.ptr(), od = out.ptr();
        TapeT<T>::current()->record([xd, gd, bd, od, rows, d, mean, inv_sigma] {
            if (od->g.empty()) return;
            if (gd->requires_grad) gd->ensure_grad();
            if (bd->requires_grad) bd->ensure_grad();
            if (xd->requires_grad) xd->ensure_grad();
            for (std::size_t r = 0; r < rows; ++r) {
                const T* row = xd->v.data() + r * d;
                const T* go = od->g.data() + r * d;
                const T mu = mean[r], is = inv_sigma[r];
                T sum_h = T(0), sum_hx = T(0);
                for (std::size_t j = 0; j < d; ++j) {
                    const T xhat = (row[j] - mu) * is;
                    const T h = go[j] * gd->v[j];
                    sum_h += h;
                    sum_hx += h * xhat;
                    if (gd->requires_grad) gd->g[j] += go[j] * xhat;
                    if (bd->requires_grad) bd->g[j] += go[j];
                }
                if (xd->requires_grad) {
                    const T inv_d = T(1) / static_cast<T>(d);
                    T* gx = xd->g.data() + r * d;
                    for (std::size_t j = 0; j < d; ++j) {
                        const T xhat = (row[j] - mu) * is;
                        gx[j] += is * (go[j] * gd->v[j] - inv_d * (sum_h + xhat * sum_hx));
                    }
                }
            }
        });
    }
    debug_check_finite(out, "layernorm");
    return out;
}

template <class T>
TensorT<T> softmax_rows(const TensorT<T>& x) {
    const std::size_t d = x.last_dim();
    const std::size_t rows = x.rows();
    TensorT<T> out = TensorT<T>::zeros(x.shape());
    const T* xv = x.data();
    T* ov = out.data();
    parallel_for(rows, 64, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            const T* row = xv + r * d;
            T* orow = ov + r * d;
            T mx = row[0];
            for (std::size_t j = 1; j < d; ++j) mx = std::max(mx, row[j]);
            T sum = T(0);
            for (std::size_t j = 0; j < d; ++j) {
                orow[j] = static_cast<T>(std::exp(static_cast<double>(row[j] - mx)));
                sum += orow[j];
            }
            const T inv = T(1) / sum;
            for (std::size_t j = 0; j < d; ++j) orow[j] *= inv;
        }
    });
    if (tracing(x)) {
        out.set_requires_grad(true);
        auto xd = x.ptr(), od = out.ptr();
        TapeT<T>::current()->record([xd, od, rows, d] {
            if (od->g.empty()) return;
            xd->ensure_grad();
            for (std::size_t r = 0; r < rows; ++r) {
                const T* y = od->v.data() + r * d;
                const T* gy = od->g.data() + r * d;
                T dot = T(0);
                for (std::size_t j = 0; j < d; ++j) dot += y[j] * gy[j];
                T* gx = xd->g.data() + r * d;
                for (std::size_t j = 0; j < d; ++j) gx[j] += y[j] * (gy[j] - dot);
            }
        });
    }
    debug_check_finite(out, "softmax");
    return out;
}

// y = x / max(|x|_2, eps) per row.
template <class T>
TensorT<T> normalize_rows(const TensorT<T>& x, T eps) {
    const std::size_t d = x.last_dim();
    const std::size_t rows = x.rows();
    TensorT<T> out = TensorT<T>::zeros(x.shape());
    std::vector<T> norms(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const T* row = x.data() + r * d;
        T s = T(0);
        for (std::size_t j = 0; j < d; ++j) s += row[j] * row[j];
        const T nrm = std::max(static_cast<T>(std::sqrt(static_cast<double>(s))), eps);
        norms[r] = nrm;
        for (std::size_t j = 0; j < d; ++j) out.data()[r * d + j] = row[j] / nrm;
    }
    if (tracing(x)) {
        out.set_requires_grad(true);
        auto xd = x.ptr(), od = out.ptr();
        TapeT<T>::current()->record([xd, od, rows, d, norms, eps] {
            if (od->g.empty()) return;
            xd->ensure_grad();
            for (std::size_t r = 0; r < rows; ++r) {
                const T* y = od->v.data() + r * d;
                const T* gy = od->g.data() + r * d;
                T* gx = xd->g.data() + r * d;
                const T inv = T(1) / norms[r];
                T raw = T(0);
                for (std::size_t j = 0; j < d; ++j) raw += xd->v[r * d + j] * xd->v[r * d + j];
                const bool clamped = std::sqrt(static_cast<double>(raw)) < static_cast<double>(eps);
                if (clamped) {
                    for (std::size_t j = 0; j < d; ++j) gx[j] += gy[j] * inv;
                } else {
                    T dot = T(0);
                    for (std::size_t j = 0; j < d; ++j) dot += y[j] * gy[j];
                    for (std::size_t j = 0; j < d; ++j) gx[j] += (gy[j] - y[j] * dot) * inv;
                }
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------- layout ops

template <class T>
TensorT<T> reshape(const TensorT<T>& x, Shape shape) {
    FRNG_REQUIRE(shape_numel(shape) == x.numel(), "reshape: numel mismatch");
    TensorT<T> out = TensorT<T>::zeros(std::move(shape));
    out.values() = x.values();
    if (tracing(x)) {
        out.set_requires_grad(true);
        auto xd = x.ptr(), od = out.ptr();
        TapeT<T>::current()->record([xd, od] {
            if (od->g.empty()) return;
            xd->ensure_grad();
            for (std::size_t i = 0; i < od->g.size(); ++i) xd->g[i] += od->g[i];
        });
    }
    return out;
}

template <class T>
TensorT<T> concat_rows(const TensorT<T>& a, const TensorT<T>& b) {
    FRNG_REQUIRE(a.rank() == 2 && b.rank() == 2 && a.dim(1) == b.dim(1), "concat_rows: col mismatch");
    const std::size_t d = a.dim(1), ma = a.dim(0), mb = b.dim(0);
    TensorT<T> out = TensorT<T>::zeros({ma + mb, d});
    std::copy(a.data(), a.data() + ma * d, out.data());
    std::copy(b.data(), b.data() + mb * d, out.data() + ma * d);
    if (tracing(a, b)) {
        out.set_requires_grad(true);
        auto ad = a.ptr(), bd = b.ptr(), od = out.ptr();
        TapeT<T>::current()->record([ad, bd, od, ma, mb, d] {
            if (od->g.empty()) return;
            if (ad->requires_grad) {
                ad->ensure_grad();
                for (std::size_t i = 0; i < ma * d; ++i) ad->g[i] += od->g[i];
            }
            if (bd->requires_grad) {
                bd->ensure_grad();
                for (std::size_t i = 0; i < mb * d; ++i) bd->g[i] += od->g[ma * d + i];
            }
        });
    }
    return out;
}

template <class T>
TensorT<T> slice_rows(const TensorT<T>& x, std::size_t r0, std::size_t r1) {
    FRNG_REQUIRE(x.rank() == 2 && r0 <= r1 && r1 <= x.dim(0), "slice_rows: bad range");
    const std::size_t d = x.dim(1);
    TensorT<T> out = TensorT<T>::zeros({r1 - r0, d});
    std::copy(x.data() + r0 * d, x.data() + r1 * d, out.data());
    if (tracing(x)) {
        out.set_requires_grad(true);
        auto xd = x.ptr(), od = out.ptr();
        TapeT<T>::current()->record([xd, od, r0, d] {
            if (od->g.empty()) return;
            xd->ensure_grad();
            for (std::size_t i = 0; i < od->g.size(); ++i) xd->g[r0 * d + i] += od->g[i];
        });
    }
    return out;
}

template <class T>
TensorT<T> concat_cols(const TensorT<T>& a, const TensorT<T>& b) {
    FRNG_REQUIRE(a.rank() == 2 && b.rank() == 2 && a.dim(0) == b.dim(0), "concat_cols: row mismatch");
    const std::size_t m = a.dim(0), da = a.dim(1), db = b.dim(1);
    TensorT<T> out = TensorT<T>::zeros({m, da + db});
    for (std::size_t r = 0; r < m; ++r) {
        std::copy(a.data() + r * da, a.data() + (r + 1) * da, out.data() + r * (da + db));
        std::copy(b.data() + r * db, b.data() + (r + 1) * db, out.data() + r * (da + db) + da);
    }
    if (tracing(a, b)) {
        out.set_requires_grad(true);
        auto ad = a.ptr(), bd = b.ptr(), od = out.ptr();
        TapeT<T>::current()->record([ad, bd, od, m, da, db] {
            if (od->g.empty()) return;
            if (ad->requires_grad) {
                ad->ensure_grad();
                for (std::size_t r = 0; r < m; ++r)
                    for (std::size_t j = 0; j < da; ++j) ad->g[r * da + j] += od->g[r * (da + db) + j];
            }
            if (bd->requires_grad) {
                bd->ensure_grad();
                for (std::size_t r = 0; r < m; ++r)
                    for (std::size_t j = 0; j < db; ++j) bd->g[r * db + j] += od->g[r * (da + db) + da + j];
            }
        });
    }
    return out;
}

template <class T>
TensorT<T> slice_cols(const TensorT<T>& x, std::size_t c0, std::size_t c1) {
    FRNG_REQUIRE(x.rank() == 2 && c0 <= c1 && c1 <= x.dim(1), "slice_cols: bad range");
    const std::size_t m = x.dim(0), d = x.dim(1), w = c1 - c0;
    TensorT<T> out = TensorT<T>::zeros({m, w});
    for (std::size_t r = 0; r < m; ++r)
        std::copy(x.data() + r * d + c0, x.data() + r * d + c1, out.data() + r * w);
    if (tracing(x)) {
        out.set_requires_grad(true);
        auto xd = x.ptr(), od = out.ptr();
        TapeT<T>::current()->record([xd, od, m, d, c0, w] {
            if (od->g.empty()) return;
            xd->ensure_grad();
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t j = 0; j < w; ++j) xd->g[r * d + c0 + j] += od->g[r * w + j];
        });
    }
    return out;
}

template <class T>
TensorT<T> gather_rows(const TensorT<T>& x, std::vector<std::size_t> idx) {
    FRNG_REQUIRE(x.rank() == 2, "gather_rows: rank-2 required");
    const std::size_t d = x.dim(1), m = idx.size();
    TensorT<T> out = TensorT<T>::zeros({m, d});
    for (std::size_t r = 0; r < m; ++r) {
        FRNG_REQUIRE(idx[r] < x.dim(0), "gather_rows: index out of range");
        std::copy(x.data() + idx[r] * d, x.data() + (idx[r] + 1) * d, out.data() + r * d);
    }
    if (tracing(x)) {
        out.set_requires_grad(true);
        auto xd = x.ptr(), od = out.ptr();
        auto ix = std::make_shared<std::vector<std::size_t>>(std::move(idx));
        TapeT<T>::current()->record([xd, od, ix, d] {
            if (od->g.empty()) return;
            xd->ensure_grad();
            for (std::size_t r = 0; r < ix->size(); ++r)
                for (std::size_t j = 0; j < d; ++j) xd->g[(*ix)[r] * d + j] += od->g[r * d + j];
        });
    }
    return out;
}

// ---------------------------------------------------------------- reductions

template <class T>
TensorT<T> sum_all(const TensorT<T>& x) {
    TensorT<T> out = TensorT<T>::zeros({1});
    out.data()[0] = parallel_reduce_sum<T>(x.numel(), 4096, [&](std::size_t b, std::size_t e) {
        T s = T(0);
        for (std::size_t i = b; i < e; ++i) s += x.data()[i];
        return s;
    });
    if (tracing(x)) {
        out.set_requires_grad(true);
        auto xd = x.ptr(), od = out.ptr();
        TapeT<T>::current()->record([xd, od] {
            if (od->g.empty()) return;
            xd->ensure_grad();
            const T g = od->g[0];
            for (T& v : xd->g) v += g;
        });
    }
    return out;
}

template <class T>
TensorT<T> mean_all(const TensorT<T>& x) {
    return scale(sum_all(x), T(1) / static_cast<T>(x.numel()));
}

template <class T>
TensorT<T> mse_loss(const TensorT<T>& a, const TensorT<T>& b) {
    FRNG_REQUIRE(a.shape() == b.shape(), "mse_loss: shape mismatch");
    const std::size_t n = a.numel();
    TensorT<T> out = TensorT<T>::zeros({1});
    out.data()[0] = parallel_reduce_sum<T>(n, 4096, [&](std::size_t i0, std::size_t i1) {
        T s = T(0);
        for (std::size_t i = i0; i < i1; ++i) {
            const T d = a.data()[i] - b.data()[i];
            s += d * d;
        }
        return s;
    }) / static_cast<T>(n);
    if (tracing(a, b)) {
        out.set_requires_grad(true);
        auto ad = a.ptr(), bd = b.ptr(), od = out.ptr();
        TapeT<T>::current()->record([ad, bd, od, n] {
            if (od->g.empty()) return;
            const T g = od->g[0] * T(2) / static_cast<T>(n);
            if (ad->requires_grad) {
                ad->ensure_grad();
                for (std::size_t i = 0; i < n; ++i) ad->g[i] += g * (ad->v[i] - bd->v[i]);
            }
            if (bd->requires_grad) {
                bd->ensure_grad();
                for (std::size_t i = 0; i < n; ++i) bd->g[i] -= g * (ad->v[i] - bd->v[i]);
            }
        });
    }
    return out;
}

template <class T>
TensorT<T> l1_mean(const TensorT<T>& a, const TensorT<T>& b) {
    FRNG_REQUIRE(a.shape() == b.shape(), "l1_mean: shape mismatch");
    const std::size_t n = a.numel();
    TensorT<T> out = TensorT<T>::zeros({1});
    T s = T(0);
    for (std::size_t i = 0; i < n; ++i) s += std::abs(a.data()[i] - b.data()[i]);
    out.data()[0] = s / static_cast<T>(n);
    if (tracing(a, b)) {
        out.set_requires_grad(true);
        auto ad = a.ptr(), bd = b.ptr(), od = out.ptr();
        TapeT<T>::current()->record([ad, bd, od, n] {
            if (od->g.empty()) return;
            const T g = od->g[0] / static_cast<T>(n);
            for (std::size_t i = 0; i < n; ++i) {
                const T d = ad->v[i] - bd->v[i];
                const T sg = d > T(0) ? T(1) : (d < T(0) ? T(-1) : T(0));
                if (ad->requires_grad) {
                    ad->ensure_grad();
                    ad->g[i] += g * sg;
                }
                if (bd->requires_grad) {
                    bd->ensure_grad();
                    bd->g[i] -= g * sg;
                }
            }
        });
    }
    return out;
}

// Mean over rows of (1 - cos(a_r, b_r)); rows with a near-zero side score 1.
template <class T>
TensorT<T> cosine_dissim_mean(const TensorT<T>& a, const TensorT<T>& b, T eps = T(1e-12)) {
    FRNG_REQUIRE(a.shape() == b.shape(), "cosine_dissim_mean: shape mismatch");
    const std::size_t d = a.last_dim(), rows = a.rows();
    TensorT<T> out = TensorT<T>::zeros({1});
    double total = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        const T* av = a.data() + r * d;
        const T* bv = b.data() + r * d;
        double na = 0, nb = 0, dot = 0;
        for (std::size_t j = 0; j < d; ++j) {
            na += static_cast<double>(av[j]) * av[j];
            nb += static_cast<double>(bv[j]) * bv[j];
            dot += static_cast<double>(av[j]) * bv[j];
        }
        na = std::sqrt(na);
        nb = std::sqrt(nb);
        total += (na < static_cast<double>(eps) || nb < static_cast<double>(eps)) ? 1.0 : 1.0 - dot / (na * nb);
    }
    out.data()[0] = static_cast<T>(total / static_cast<double>(rows));
    if (tracing(a, b)) {
        out.set_requires_grad(true);
        auto ad = a.ptr(), bd = b.ptr(), od = out.ptr();
        TapeT<T>::current()->record([ad, bd, od, rows, d, eps] {
            if (od->g.empty()) return;
            const T g = od->g[0] / static_cast<T>(rows);
            if (ad->requires_grad) ad->ensure_grad();
            if (bd->requires_grad) bd->ensure_grad();
            for (std::size_t r = 0; r < rows; ++r) {
                const T* av = ad->v.data() + r * d;
                const T* bv = bd->v.data() + r * d;
                double na = 0, nb = 0, dot = 0;
                for (std::size_t j = 0; j < d; ++j) {
                    na += static_cast<double>(av[j]) * av[j];
                    nb += static_cast<double>(bv[j]) * bv[j];
                    dot += static_cast<double>(av[j]) * bv[j];
                }
                na = std::sqrt(na);
                nb = std::sqrt(nb);
                if (na < static_cast<double>(eps) || nb < static_cast<double>(eps)) continue;
                const double cosv = dot / (na * nb);
                for (std::size_t j = 0; j < d; ++j) {
                    if (ad->requires_grad)
                        ad->g[r * d + j] -= g * static_cast<T>(bv[j] / (na * nb) - cosv * av[j] / (na * na));
                    if (bd->requires_grad)
                        bd->g[r * d + j] -= g * static_cast<T>(av[j] / (na * nb) - cosv * bv[j] / (nb * nb));
                }
            }
        });
    }
    return out;
}

// Mean over rows of KL(softmax(a_r) || softmax(b_r)).
template <class T>
TensorT<T> kld_softmax_mean(const TensorT<T>& a, const TensorT<T>& b) {
    FRNG_REQUIRE(a.shape() == b.shape(), "kld_softmax_mean: shape mismatch");
    const std::size_t d = a.last_dim(), rows = a.rows();
    auto log_softmax_row = [d](const T* row, std::vector<T>& out) {
        T mx = row[0];
        for (std::size_t j = 1; j < d; ++j) mx = std::max(mx, row[j]);
        T sum = T(0);
        for (std::size_t j = 0; j < d; ++j) sum += static_cast<T>(std::exp(static_cast<double>(row[j] - mx)));
        const T lse = mx + static_cast<T>(std::log(static_cast<double>(sum)));
        for (std::size_t j = 0; j < d; ++j) out[j] = row[j] - lse;
    };
    TensorT<T> out = TensorT<T>::zeros({1});
    std::vector<T> lp(d), lq(d);
    T total = T(0);
    for (std::size_t r = 0; r < rows; ++r) {
        log_softmax_row(a.data() + r * d, lp);
        log_softmax_row(b.data() + r * d, lq);
        T kl = T(0);
        for (std::size_t j = 0; j < d; ++j) kl += static_cast<T>(std::exp(static_cast<double>(lp[j]))) * (lp[j] - lq[j]);
        total += kl;
    }
    out.data()[0] = total / static_cast<T>(rows);
    if (tracing(a, b)) {
        out.set_requires_grad(true);
        auto ad = a.ptr(), bd = b.ptr(), od = out.ptr();
        TapeT<T>::current()->record([ad, bd, od, rows, d, log_softmax_row] {
            if (od->g.empty()) return;
            const T g = od->g[0] / static_cast<T>(rows);
            if (ad->requires_grad) ad->ensure_grad();
            if (bd->requires_grad) bd->ensure_grad();
            std::vector<T> lp(d), lq(d);
            for (std::size_t r = 0; r < rows; ++r) {
                log_softmax_row(ad->v.data() + r * d, lp);
                log_softmax_row(bd->v.data() + r * d, lq);
                T kl = T(0);
                for (std::size_t j = 0; j < d; ++j)
                    kl += static_cast<T>(std::exp(static_cast<double>(lp[j]))) * (lp[j] - lq[j]);
                for (std::size_t j = 0; j < d; ++j) {
                    const T p = static_cast<T>(std::exp(static_cast<double>(lp[j])));
                    const T q = static_cast<T>(std::exp(static_cast<double>(lq[j])));
                    if (ad->requires_grad) ad->g[r * d + j] += g * p * (lp[j] - lq[j] - kl);
                    if (bd->requires_grad) bd->g[r * d + j] += g * (q - p);
                }
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------- image losses

// 2x2 average pooling; H and W must be even. x is [H, W, C].
template <class T>
TensorT<T> avgpool2(const TensorT<T>& x) {
    FRNG_REQUIRE(x.rank() == 3 && x.dim(0) % 2 == 0 && x.dim(1) % 2 == 0, "avgpool2: even HxWxC required");
    const std::size_t h = x.dim(0), w = x.dim(1), c = x.dim(2);
    TensorT<T> out = TensorT<T>::zeros({h / 2, w / 2, c});
    for (std::size_t i = 0; i < h / 2; ++i)
        for (std::size_t j = 0; j < w / 2; ++j)
            for (std::size_t k = 0; k < c; ++k) {
                const std::size_t base = (2 * i) * w * c + (2 * j) * c + k;
                out.data()[(i * (w / 2) + j) * c + k] =
                    T(0.25) * (x.data()[base] + x.data()[base + c] + x.data()[base + w * c] +
                               x.data()[base + w * c + c]);
            }
    if (tracing(x)) {
        out.set_requires_grad(true);
        auto xd = x.ptr(), od = out.ptr();
        TapeT<T>::current()->record([xd, od, h, w, c] {
            if (od->g.empty()) return;
            xd->ensure_grad();
            for (std::size_t i = 0; i < h / 2; ++i)
                for (std::size_t j = 0; j < w / 2; ++j)
                    for (std::size_t k = 0; k < c; ++k) {
                        const T g = T(0.25) * od->g[(i * (w / 2) + j) * c + k];
                        const std::size_t base = (2 * i) * w * c + (2 * j) * c + k;
                        xd->g[base] += g;
                        xd->g[base + c] += g;
                        xd->g[base + w * c] += g;
                        xd->g[base + w * c + c] += g;
                    }
        });
    }
    return out;
}

// Mean L1 distance between horizontal+vertical finite differences of a and b.
template <class T>
TensorT<T> image_grad_l1(const TensorT<T>& a, const TensorT<T>& b) {
    FRNG_REQUIRE(a.rank() == 3 && a.shape() == b.shape(), "image_grad_l1: HxWxC pair required");
    const std::size_t h = a.dim(0), w = a.dim(1), c = a.dim(2);
    const std::size_t n_h = h * (w - 1) * c, n_v = (h - 1) * w * c;
    const std::size_t count = n_h + n_v;
    FRNG_REQUIRE(count > 0, "image_grad_l1: image too small");
    auto diff_at = [&](const T* img, bool vert, std::size_t i, std::size_t j, std::size_t k) {
        const std::size_t idx = (i * w + j) * c + k;
        const std::size_t nxt = vert ? idx + w * c : idx + c;
        return img[nxt] - img[idx];
    };
    T total = T(0);
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j + 1 < w; ++j)
            for (std::size_t k = 0; k < c; ++k)
                total += std::abs(diff_at(a.data(), false, i, j, k) - diff_at(b.data(), false, i, j, k));
    for (std::size_t i = 0; i + 1 < h; ++i)
        for (std::size_t j = 0; j < w; ++j)
            for (std::size_t k = 0; k < c; ++k)
                total += std::abs(diff_at(a.data(), true, i, j, k) - diff_at(b.data(), true, i, j, k));
    TensorT<T> out = TensorT<T>::zeros({1});
    out.data()[0] = total / static_cast<T>(count);
    if (tracing(a, b)) {
        out.set_requires_grad(true);
        auto ad = a.ptr(), bd = b.ptr(), od = out.ptr();
        TapeT<T>::current()->record([ad, bd, od, h, w, c, count] {
            if (od->g.empty()) return;
            const T g = od->g[0] / static_cast<T>(count);
            if (ad->requires_grad) ad->ensure_grad();
            if (bd->requires_grad) bd->ensure_grad();
            auto apply = [&](bool vert, std::size_t i, std::size_t j, std::size_t k) {
                const std::size_t idx = (i * w + j) * c + k;
                const std::size_t nxt = vert ? idx + w * c : idx + c;
                const T da = ad->v[nxt] - ad->v[idx];
                const T db = bd->v[nxt] - bd->v[idx];
                const T diff = da - db;
                const T sg = diff > T(0) ? T(1) : (diff < T(0) ? T(-1) : T(0));
                if (ad->requires_grad) {
                    ad->g[nxt] += g * sg;
                    ad->g[idx] -= g * sg;
                }
                if (bd->requires_grad) {
                    bd->g[nxt] -= g * sg;
                    bd->g[idx] += g * sg;
                }
            };
            for (std::size_t i = 0; i < h; ++i)
                for (std::size_t j = 0; j + 1 < w; ++j)
                    for (std::size_t k = 0; k < c; ++k) apply(false, i, j, k);
            for (std::size_t i = 0; i + 1 < h; ++i)
                for (std::size_t j = 0; j < w; ++j)
                    for (std::size_t k = 0; k < c; ++k) apply(true, i, j, k);
        });
    }
    return out;
}

// ---------------------------------------------------------------- payload ops

// Degree-0/1 spherical harmonics payload [N,12] evaluated at unit directions
// dirs[N*3]; linear in the coefficients. Row layout: 4 bases x rgb.
template <class T>
TensorT<T> sh_eval_deg1(const TensorT<T>& coeffs, std::shared_ptr<const std::vector<T>> dirs) {
    FRNG_REQUIRE(coeffs.rank() == 2 && coeffs.dim(1) == 12, "sh_eval_deg1: [N,12] coeffs required");
    const std::size_t n = coeffs.dim(0);
    FRNG_REQUIRE(dirs && dirs->size() == n * 3, "sh_eval_deg1: dirs size mismatch");
    constexpr double c0 = 0.28209479177387814; // 1/(2 sqrt(pi))
    constexpr double c1 = 0.4886025119029199;  // sqrt(3)/(2 sqrt(pi))
    TensorT<T> out = TensorT<T>::zeros({n, 3});
    for (std::size_t i = 0; i < n; ++i) {
        const T* a = coeffs.data() + i * 12;
        const T x = (*dirs)[i * 3], y = (*dirs)[i * 3 + 1], z = (*dirs)[i * 3 + 2];
        for (std::size_t ch = 0; ch < 3; ++ch)
            out.data()[i * 3 + ch] = static_cast<T>(c0) * a[ch] +
                                     static_cast<T>(c1) * (y * a[3 + ch] + z * a[6 + ch] + x * a[9 + ch]);
    }
    if (tracing(coeffs)) {
        out.set_requires_grad(true);
        auto cd = coeffs.ptr(), od = out.ptr();
        TapeT<T>::current()->record([cd, od, dirs, n] {
            if (od->g.empty()) return;
            cd->ensure_grad();
            for (std::size_t i = 0; i < n; ++i) {
                const T x = (*dirs)[i * 3], y = (*dirs)[i * 3 + 1], z = (*dirs)[i * 3 + 2];
                for (std::size_t ch = 0; ch < 3; ++ch) {
                    const T g = od->g[i * 3 + ch];
                    cd->g[i * 12 + ch] += static_cast<T>(c0) * g;
                    cd->g[i * 12 + 3 + ch] += static_cast<T>(c1) * y * g;
                    cd->g[i * 12 + 6 + ch] += static_cast<T>(c1) * z * g;
                    cd->g[i * 12 + 9 + ch] += static_cast<T>(c1) * x * g;
                }
            }
        });
    }
    return out;
}

// out[rowmap[r]] += w[r] * x[r]; x is [R,3], result [npx,3].
template <class T>
TensorT<T> weighted_sum_rows(const TensorT<T>& x, std::shared_ptr<const std::vector<T>> w,
                             std::shared_ptr<const std::vector<std::uint32_t>> rowmap, std::size_t npx) {
    FRNG_REQUIRE(x.rank() == 2 && x.dim(1) == 3, "weighted_sum_rows: [R,3] required");
    const std::size_t r_count = x.dim(0);
    FRNG_REQUIRE(w->size() == r_count && rowmap->size() == r_count, "weighted_sum_rows: map size mismatch");
    TensorT<T> out = TensorT<T>::zeros({npx, 3});
    for (std::size_t r = 0; r < r_count; ++r) {
        const std::size_t px = (*rowmap)[r];
        const T wr = (*w)[r];
        for (std::size_t ch = 0; ch < 3; ++ch) out.data()[px * 3 + ch] += wr * x.data()[r * 3 + ch];
    }
    if (tracing(x)) {
        out.set_requires_grad(true);
        auto xd = x.ptr(), od = out.ptr();
        TapeT<T>::current()->record([xd, od, w, rowmap, r_count] {
            if (od->g.empty()) return;
            xd->ensure_grad();
            for (std::size_t r = 0; r < r_count; ++r) {
                const std::size_t px = (*rowmap)[r];
                const T wr = (*w)[r];
                for (std::size_t ch = 0; ch < 3; ++ch) xd->g[r * 3 + ch] += wr * od->g[px * 3 + ch];
            }
        });
    }
    return out;
}

} // namespace ops

// Standard Adam with bias correction; deterministic given inputs.
template <class T>
struct AdamStateT {
    std::vector<T> m, v;
    std::int64_t t = 0;
};

template <class T>
void adam_step(TensorT<T>& param, AdamStateT<T>& st, T lr, T beta1 = T(0.9), T beta2 = T(0.999),
               T eps = T(1e-8)) {
    const std::size_t n = param.numel();
    if (st.m.size() != n) {
        st.m.assign(n, T(0));
        st.v.assign(n, T(0));
        st.t = 0;
    }
    FRNG_REQUIRE(param.has_grad(), "adam_step: parameter has no gradient");
    ++st.t;
    const T bc1 = T(1) - static_cast<T>(std::pow(static_cast<double>(beta1), static_cast<double>(st.t)));
    const T bc2 = T(1) - static_cast<T>(std::pow(static_cast<double>(beta2), static_cast<double>(st.t)));
    const std::vector<T>& g = param.grad();
    T* p = param.data();
    for (std::size_t i = 0; i < n; ++i) {
        st.m[i] = beta1 * st.m[i] + (T(1) - beta1) * g[i];
        st.v[i] = beta2 * st.v[i] + (T(1) - beta2) * g[i] * g[i];
        const T mhat = st.m[i] / bc1;
        const T vhat = st.v[i] / bc2;
        p[i] -= lr * mhat / (static_cast<T>(std::sqrt(static_cast<double>(vhat))) + eps);
    }
}

using Tensor = TensorT<float>;
using Tape = TapeT<float>;
using AdamState = AdamStateT<float>;

} // namespace frng
