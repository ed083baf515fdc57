#include "layers.hpp"

#include "dementia/nn/model.hpp"

#include <algorithm>
#include <string>

namespace dementia::nn {
namespace {

template <typename T>
void apply_slope(Activation act, const BasicTensor<T>& out, BasicTensor<T>& grad) {
  if (act == Activation::None) return;
  auto g = grad.data();
  auto y = out.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = static_cast<T>(static_cast<double>(g[i]) * activation_slope(act, static_cast<double>(y[i])));
  }
}

template <typename T>
void init_uniform(BasicTensor<T>& t, double bound, Rng& rng) {
  for (auto& v : t.data()) v = static_cast<T>(rng.uniform(-bound, bound));
}

// Valid, stride-1 convolution over NHWC data. A 1D layer is the H == 1 case.
template <typename T>
class ConvLayer final : public Layer<T> {
 public:
  ConvLayer(const LayerSpec& spec, const Shape& in, const Shape& out, std::size_t index)
      : Layer<T>(spec, in, out) {
    const bool one_d = spec.kind == LayerKind::Conv1D;
    h_ = one_d ? 1 : in[0];
    w_ = one_d ? in[0] : in[1];
    c_ = in.back();
    kh_ = one_d ? 1 : spec.kernel[0];
    kw_ = one_d ? spec.kernel[0] : spec.kernel[1];
    f_ = spec.units;
    oh_ = h_ - kh_ + 1;
    ow_ = w_ - kw_ + 1;
    Shape wshape = one_d ? Shape{kw_, c_, f_} : Shape{kh_, kw_, c_, f_};
    const std::string prefix = "layer" + std::to_string(index);
    this->params.push_back({prefix + ".weight", BasicTensor<T>(wshape), BasicTensor<T>(wshape)});
    this->params.push_back({prefix + ".bias", BasicTensor<T>({f_}), BasicTensor<T>({f_})});
  }

  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<ConvLayer>(*this); }

  void initialize(Rng& rng) override {
    const std::size_t taps = kh_ * kw_;
    init_uniform(this->params[0].value, glorot_bound(taps * c_, taps * f_), rng);
    this->params[1].value.fill(T{0});
  }

  // Inner loops run in T so they vectorize at full width; sums that span a
  // whole batch (weight and bias gradients) are flushed into double once
  // per output row.
  void forward(const BasicTensor<T>& in, BasicTensor<T>& out, const BasicTensor<T>*) const override {
    const std::size_t batch = in.extent(0);
    const T* x = in.data().data();
    const T* wt = this->params[0].value.data().data();
    const T* bias = this->params[1].value.data().data();
    T* y = out.data().data();
    const Activation act = this->spec_.activation;
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t oy = 0; oy < oh_; ++oy) {
        for (std::size_t ox = 0; ox < ow_; ++ox) {
          T* yr = y + ((b * oh_ + oy) * ow_ + ox) * f_;
          std::copy_n(bias, f_, yr);
          for (std::size_t ky = 0; ky < kh_; ++ky) {
            const T* xr = x + ((b * h_ + oy + ky) * w_ + ox) * c_;
            const T* wb = wt + ky * kw_ * c_ * f_;
            // The kw taps of one kernel row read kw * c contiguous inputs.
            for (std::size_t i = 0; i < kw_ * c_; ++i) {
              const T v = xr[i];
              if (v == T{0}) continue;
              const T* wr = wb + i * f_;
              for (std::size_t f = 0; f < f_; ++f) yr[f] += v * wr[f];
            }
          }
          for (std::size_t f = 0; f < f_; ++f) yr[f] = static_cast<T>(activate(act, yr[f]));
        }
      }
    }
  }

  void backward(const BasicTensor<T>& in, const BasicTensor<T>& out, BasicTensor<T>& grad_out,
                BasicTensor<T>* grad_in, const BasicTensor<T>*) override {
    apply_slope(this->spec_.activation, out, grad_out);
    const std::size_t batch = in.extent(0);
    const std::size_t row_taps = kw_ * c_;
    const T* x = in.data().data();
    const T* g = grad_out.data().data();
    const T* wt = this->params[0].value.data().data();

    // Transposed weights [ky][f][kx * c] so the input gradient is an axpy.
    std::vector<T> wtt;
    if (grad_in) {
      wtt.resize(kh_ * f_ * row_taps);
      for (std::size_t ky = 0; ky < kh_; ++ky)
        for (std::size_t i = 0; i < row_taps; ++i)
          for (std::size_t f = 0; f < f_; ++f) wtt[(ky * f_ + f) * row_taps + i] = wt[(ky * row_taps + i) * f_ + f];
      grad_in->fill(T{0});
    }
    T* dx = grad_in ? grad_in->data().data() : nullptr;

    std::vector<double> dw(kh_ * row_taps * f_, 0.0), db(f_, 0.0);
    std::vector<T> dw_row(dw.size()), db_row(f_);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t oy = 0; oy < oh_; ++oy) {
        std::fill(dw_row.begin(), dw_row.end(), T{0});
        std::fill(db_row.begin(), db_row.end(), T{0});
        bool touched = false;
        for (std::size_t ox = 0; ox < ow_; ++ox) {
          const T* gr = g + ((b * oh_ + oy) * ow_ + ox) * f_;
          if (std::all_of(gr, gr + f_, [](T v) { return v == T{0}; })) continue;
          touched = true;
          for (std::size_t f = 0; f < f_; ++f) db_row[f] += gr[f];
          for (std::size_t ky = 0; ky < kh_; ++ky) {
            const std::size_t xoff = ((b * h_ + oy + ky) * w_ + ox) * c_;
            const T* xr = x + xoff;
            T* dwk = dw_row.data() + ky * row_taps * f_;
            for (std::size_t i = 0; i < row_taps; ++i) {
              const T v = xr[i];
              if (v == T{0}) continue;
              T* dwr = dwk + i * f_;
              for (std::size_t f = 0; f < f_; ++f) dwr[f] += v * gr[f];
            }
            if (dx) {
              T* dxr = dx + xoff;
              const T* wk = wtt.data() + ky * f_ * row_taps;
              for (std::size_t f = 0; f < f_; ++f) {
                const T gv = gr[f];
                if (gv == T{0}) continue;
                const T* wr = wk + f * row_taps;
                for (std::size_t i = 0; i < row_taps; ++i) dxr[i] += gv * wr[i];
              }
            }
          }
        }
        if (!touched) continue;
        for (std::size_t i = 0; i < dw.size(); ++i) dw[i] += dw_row[i];
        for (std::size_t f = 0; f < f_; ++f) db[f] += db_row[f];
      }
    }
    std::copy(dw.begin(), dw.end(), this->params[0].grad.data().begin());
    std::copy(db.begin(), db.end(), this->params[1].grad.data().begin());
  }

 private:
  std::size_t h_, w_, c_, kh_, kw_, f_, oh_, ow_;
};

// Window 2, stride 2 max pooling over NHWC data. 1D pooling is the H == 1,
// window-height 1 case.
template <typename T>
class MaxPoolLayer final : public Layer<T> {
 public:
  MaxPoolLayer(const LayerSpec& spec, const Shape& in, const Shape& out) : Layer<T>(spec, in, out) {
    const bool one_d = spec.kind == LayerKind::MaxPool1D;
    h_ = one_d ? 1 : in[0];
    w_ = one_d ? in[0] : in[1];
    c_ = in.back();
    ph_ = one_d ? 1 : 2;
    oh_ = h_ / ph_;
    ow_ = w_ / 2;
  }

  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<MaxPoolLayer>(*this); }

  void forward(const BasicTensor<T>& in, BasicTensor<T>& out, const BasicTensor<T>*) const override {
    const std::size_t batch = in.extent(0);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t oy = 0; oy < oh_; ++oy)
        for (std::size_t ox = 0; ox < ow_; ++ox)
          for (std::size_t c = 0; c < c_; ++c)
            out[((b * oh_ + oy) * ow_ + ox) * c_ + c] = in[argmax(in, b, oy, ox, c)];
  }

  void backward(const BasicTensor<T>& in, const BasicTensor<T>&, BasicTensor<T>& grad_out,
                BasicTensor<T>* grad_in, const BasicTensor<T>*) override {
    if (!grad_in) return;
    grad_in->fill(T{0});
    const std::size_t batch = in.extent(0);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t oy = 0; oy < oh_; ++oy)
        for (std::size_t ox = 0; ox < ow_; ++ox)
          for (std::size_t c = 0; c < c_; ++c)
            (*grad_in)[argmax(in, b, oy, ox, c)] = grad_out[((b * oh_ + oy) * ow_ + ox) * c_ + c];
  }

 private:
  // First maximum in window scan order wins ties.
  std::size_t argmax(const BasicTensor<T>& in, std::size_t b, std::size_t oy, std::size_t ox,
                     std::size_t c) const {
    std::size_t best = ((b * h_ + oy * ph_) * w_ + ox * 2) * c_ + c;
    for (std::size_t dy = 0; dy < ph_; ++dy) {
      for (std::size_t dx = 0; dx < 2; ++dx) {
        const std::size_t idx = ((b * h_ + oy * ph_ + dy) * w_ + ox * 2 + dx) * c_ + c;
        if (in[idx] > in[best]) best = idx;
      }
    }
    return best;
  }

  std::size_t h_, w_, c_, ph_, oh_, ow_;
};

template <typename T>
class FlattenLayer final : public Layer<T> {
 public:
  using Layer<T>::Layer;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<FlattenLayer>(*this); }

  void forward(const BasicTensor<T>& in, BasicTensor<T>& out, const BasicTensor<T>*) const override {
    std::copy(in.data().begin(), in.data().end(), out.data().begin());
  }

  void backward(const BasicTensor<T>&, const BasicTensor<T>&, BasicTensor<T>& grad_out,
                BasicTensor<T>* grad_in, const BasicTensor<T>*) override {
    if (grad_in) std::copy(grad_out.data().begin(), grad_out.data().end(), grad_in->data().begin());
  }
};

template <typename T>
class DenseLayer final : public Layer<T> {
 public:
  DenseLayer(const LayerSpec& spec, const Shape& in, const Shape& out, std::size_t index)
      : Layer<T>(spec, in, out), n_(in[0]), u_(spec.units) {
    const std::string prefix = "layer" + std::to_string(index);
    this->params.push_back({prefix + ".weight", BasicTensor<T>({n_, u_}), BasicTensor<T>({n_, u_})});
    this->params.push_back({prefix + ".bias", BasicTensor<T>({u_}), BasicTensor<T>({u_})});
  }

  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<DenseLayer>(*this); }

  void initialize(Rng& rng) override {
    init_uniform(this->params[0].value, glorot_bound(n_, u_), rng);
    this->params[1].value.fill(T{0});
  }

  void forward(const BasicTensor<T>& in, BasicTensor<T>& out, const BasicTensor<T>*) const override {
    const std::size_t batch = in.extent(0);
    const T* wt = this->params[0].value.data().data();
    const T* bias = this->params[1].value.data().data();
    const Activation act = this->spec_.activation;
    std::vector<double> acc(u_);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t u = 0; u < u_; ++u) acc[u] = bias[u];
      const T* xr = in.data().data() + b * n_;
      for (std::size_t i = 0; i < n_; ++i) {
        const double v = xr[i];
        if (v == 0.0) continue;
        const T* wr = wt + i * u_;
        for (std::size_t u = 0; u < u_; ++u) acc[u] += v * static_cast<double>(wr[u]);
      }
      T* yr = out.data().data() + b * u_;
      for (std::size_t u = 0; u < u_; ++u) yr[u] = static_cast<T>(activate(act, acc[u]));
    }
  }

  void backward(const BasicTensor<T>& in, const BasicTensor<T>& out, BasicTensor<T>& grad_out,
                BasicTensor<T>* grad_in, const BasicTensor<T>*) override {
    apply_slope(this->spec_.activation, out, grad_out);
    const std::size_t batch = in.extent(0);
    const T* x = in.data().data();
    const T* g = grad_out.data().data();
    const T* wt = this->params[0].value.data().data();
    T* dw = this->params[0].grad.data().data();
    T* db = this->params[1].grad.data().data();

    std::vector<double> row(u_);
    for (std::size_t u = 0; u < u_; ++u) {
      double s = 0.0;
      for (std::size_t b = 0; b < batch; ++b) s += g[b * u_ + u];
      db[u] = static_cast<T>(s);
    }
    for (std::size_t i = 0; i < n_; ++i) {
      std::fill(row.begin(), row.end(), 0.0);
      for (std::size_t b = 0; b < batch; ++b) {
        const double v = x[b * n_ + i];
        if (v == 0.0) continue;
        const T* gr = g + b * u_;
        for (std::size_t u = 0; u < u_; ++u) row[u] += v * static_cast<double>(gr[u]);
      }
      T* dwr = dw + i * u_;
      for (std::size_t u = 0; u < u_; ++u) dwr[u] = static_cast<T>(row[u]);
    }
    if (!grad_in) return;
    T* dx = grad_in->data().data();
    for (std::size_t b = 0; b < batch; ++b) {
      const T* gr = g + b * u_;
      for (std::size_t i = 0; i < n_; ++i) {
        const T* wr = wt + i * u_;
        double s = 0.0;
        for (std::size_t u = 0; u < u_; ++u) s += static_cast<double>(wr[u]) * static_cast<double>(gr[u]);
        dx[b * n_ + i] = static_cast<T>(s);
      }
    }
  }

 private:
  std::size_t n_, u_;
};

template <typename T>
class DropoutLayer final : public Layer<T> {
 public:
  using Layer<T>::Layer;
  std::unique_ptr<Layer<T>> clone() const override { return std::make_unique<DropoutLayer>(*this); }

  void forward(const BasicTensor<T>& in, BasicTensor<T>& out, const BasicTensor<T>* mask) const override {
    if (!mask) {
      std::copy(in.data().begin(), in.data().end(), out.data().begin());
      return;
    }
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] * (*mask)[i];
  }

  void backward(const BasicTensor<T>&, const BasicTensor<T>&, BasicTensor<T>& grad_out,
                BasicTensor<T>* grad_in, const BasicTensor<T>* mask) override {
    if (!grad_in) return;
    for (std::size_t i = 0; i < grad_out.size(); ++i) (*grad_in)[i] = mask ? grad_out[i] * (*mask)[i] : grad_out[i];
  }
};

}  // namespace

template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerSpec& spec, const Shape& in, const Shape& out,
                                     std::size_t index) {
  switch (spec.kind) {
    case LayerKind::Conv1D:
    case LayerKind::Conv2D: return std::make_unique<ConvLayer<T>>(spec, in, out, index);
    case LayerKind::MaxPool1D:
    case LayerKind::MaxPool2D: return std::make_unique<MaxPoolLayer<T>>(spec, in, out);
    case LayerKind::Flatten: return std::make_unique<FlattenLayer<T>>(spec, in, out);
    case LayerKind::Dense: return std::make_unique<DenseLayer<T>>(spec, in, out, index);
    case LayerKind::Dropout: return std::make_unique<DropoutLayer<T>>(spec, in, out);
  }
  throw std::invalid_argument("unknown layer kind");
}

template std::unique_ptr<Layer<float>> make_layer<float>(const LayerSpec&, const Shape&, const Shape&, std::size_t);
template std::unique_ptr<Layer<double>> make_layer<double>(const LayerSpec&, const Shape&, const Shape&, std::size_t);

}  // namespace dementia::nn
