#include "mvact/tape.hpp"

#include <algorithm>
#include <cmath>

namespace mvact::nn {

using kernels::Conv2dDims;
using kernels::Conv3dDims;

Tape::Ref Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Ref{static_cast<int>(nodes_.size()) - 1};
}

Tape::Ref Tape::input(Tensor t) {
  Node n;
  n.value = std::move(t);
  return push(std::move(n));
}

Tape::Ref Tape::constant(Tensor t) {
  Node n;
  n.value = std::move(t);
  n.track = false;
  return push(std::move(n));
}

Tape::Ref Tape::param(Parameter& p) {
  auto it = interned_.find(&p);
  if (it != interned_.end()) return Ref{it->second};
  Node n;
  n.value = p.value;
  n.p = &p;
  Ref r = push(std::move(n));
  interned_[&p] = r.i;
  return r;
}

Tape::Ref Tape::dense(Ref xr, Parameter& W, Parameter& b) {
  require_ndim(value(xr), 2, "dense input");
  require_ndim(W.value, 2, "dense weight");
  const int nb = value(xr).dim(0), in = value(xr).dim(1);
  const int wi = W.value.dim(0), out = W.value.dim(1);
  if (in != wi)
    fail(ErrorKind::shape, "dense: input " + shape_str(value(xr).shape) +
                               " incompatible with weight " +
                               shape_str(W.value.shape));
  require_shape(b.value, {out}, "dense bias");
  Ref wr = param(W), br = param(b);

  Tensor y({nb, out});
  kernels::matmul(value(xr).data.data(), W.value.data.data(), y.data.data(),
                  nb, in, out, false);
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < out; ++j) y.data[std::size_t(i) * out + j] += b.value[j];

  Node node;
  node.value = std::move(y);
  node.back = [xr, wr, br, nb, in, out](Tape& t, int self) {
    const Tensor& dy = t.grad_of(self);
    if (t.tracked(xr.i))
      kernels::matmul_tb(dy.data.data(), t.node(wr).value.data.data(),
                         t.grad_of(xr.i).data.data(), nb, in, out, true);
    kernels::matmul_ta(t.node(xr).value.data.data(), dy.data.data(),
                       t.grad_of(wr.i).data.data(), nb, in, out, true);
    Tensor& db = t.grad_of(br.i);
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < out; ++j) db[j] += dy[std::size_t(i) * out + j];
  };
  return push(std::move(node));
}

Tape::Ref Tape::conv2d(Ref xr, Parameter& K, Parameter* bias, int stride,
                       Padding pad) {
  require_ndim(value(xr), 4, "conv2d input");
  require_ndim(K.value, 4, "conv2d kernel");
  const Tensor& x = value(xr);
  Conv2dDims d{x.dim(0), x.dim(1), x.dim(2), x.dim(3),
               K.value.dim(0), K.value.dim(1), K.value.dim(3), stride, pad};
  if (K.value.dim(2) != d.ci)
    fail(ErrorKind::shape, "conv2d: kernel channels " +
                               shape_str(K.value.shape) + " vs input " +
                               shape_str(x.shape));
  if (pad == Padding::valid && (d.kh > d.h || d.kw > d.w))
    fail(ErrorKind::shape, "conv2d: kernel larger than padded input");
  if (bias) require_shape(bias->value, {d.co}, "conv2d bias");
  Ref kr = param(K);
  Ref br = bias ? param(*bias) : Ref{};
  // param() may grow the node vector; re-fetch the input reference
  const Tensor& xin = value(xr);

  Tensor y({d.n, d.oh(), d.ow(), d.co});
  kernels::conv2d_forward(d, xin.data.data(), K.value.data.data(),
                          bias ? bias->value.data.data() : nullptr,
                          y.data.data());

  Node node;
  node.value = std::move(y);
  node.back = [xr, kr, br, d](Tape& t, int self) {
    const Tensor& dy = t.grad_of(self);
    if (t.tracked(xr.i))
      kernels::conv2d_backward_input(d, dy.data.data(),
                                     t.node(kr).value.data.data(),
                                     t.grad_of(xr.i).data.data());
    kernels::conv2d_backward_kernel(d, t.node(xr).value.data.data(),
                                    dy.data.data(),
                                    t.grad_of(kr.i).data.data());
    if (br.valid())
      kernels::conv2d_backward_bias(d, dy.data.data(),
                                    t.grad_of(br.i).data.data());
  };
  return push(std::move(node));
}

Tape::Ref Tape::conv3d(Ref xr, Parameter& K, Parameter* bias, Padding pad) {
  require_ndim(value(xr), 5, "conv3d input");
  require_ndim(K.value, 5, "conv3d kernel");
  const Tensor& x = value(xr);
  Conv3dDims d{x.dim(0), x.dim(1), x.dim(2), x.dim(3), x.dim(4),
               K.value.dim(0), K.value.dim(1), K.value.dim(2),
               K.value.dim(4), pad};
  if (K.value.dim(3) != d.ci)
    fail(ErrorKind::shape, "conv3d: kernel channels " +
                               shape_str(K.value.shape) + " vs input " +
                               shape_str(x.shape));
  if (pad == Padding::valid && (d.kt > d.t || d.kh > d.h || d.kw > d.w))
    fail(ErrorKind::shape, "conv3d: kernel larger than padded input");
  if (bias) require_shape(bias->value, {d.co}, "conv3d bias");
  Ref kr = param(K);
  Ref br = bias ? param(*bias) : Ref{};
  const Tensor& xin = value(xr);

  Tensor y({d.n, d.ot(), d.oh(), d.ow(), d.co});
  kernels::conv3d_forward(d, xin.data.data(), K.value.data.data(),
                          bias ? bias->value.data.data() : nullptr,
                          y.data.data());

  Node node;
  node.value = std::move(y);
  node.back = [xr, kr, br, d](Tape& t, int self) {
    const Tensor& dy = t.grad_of(self);
    if (t.tracked(xr.i))
      kernels::conv3d_backward_input(d, dy.data.data(),
                                     t.node(kr).value.data.data(),
                                     t.grad_of(xr.i).data.data());
    kernels::conv3d_backward_kernel(d, t.node(xr).value.data.data(),
                                    dy.data.data(),
                                    t.grad_of(kr.i).data.data());
    if (br.valid())
      kernels::conv3d_backward_bias(d, dy.data.data(),
                                    t.grad_of(br.i).data.data());
  };
  return push(std::move(node));
}

Tape::Ref Tape::global_depthwise_conv(Ref xr, Parameter& K, Parameter& b) {
  require_ndim(value(xr), 4, "gdc input");
  const Tensor& x = value(xr);
  const int n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  require_shape(K.value, {h, w, c}, "gdc kernel");
  require_shape(b.value, {c}, "gdc bias");
  Ref kr = param(K), br = param(b);
  const Tensor& xin = value(xr);

  Tensor y({n, 1, 1, c});
  const std::int64_t hw = std::int64_t(h) * w;
  for (int in = 0; in < n; ++in) {
    double* yo = y.data.data() + std::int64_t(in) * c;
    for (int ch = 0; ch < c; ++ch) yo[ch] = b.value[ch];
    const double* xi = xin.data.data() + std::int64_t(in) * hw * c;
    for (std::int64_t s = 0; s < hw; ++s)
      for (int ch = 0; ch < c; ++ch)
        yo[ch] += K.value[s * c + ch] * xi[s * c + ch];
  }

  Node node;
  node.value = std::move(y);
  node.back = [xr, kr, br, n, hw, c](Tape& t, int self) {
    const Tensor& dy = t.grad_of(self);
    const Tensor& x = t.node(xr).value;
    const Tensor& K = t.node(kr).value;
    Tensor& dK = t.grad_of(kr.i);
    Tensor& db = t.grad_of(br.i);
    const bool dx_on = t.tracked(xr.i);
    Tensor* dx = dx_on ? &t.grad_of(xr.i) : nullptr;
    for (int in = 0; in < n; ++in) {
      const double* dyo = dy.data.data() + std::int64_t(in) * c;
      const double* xi = x.data.data() + std::int64_t(in) * hw * c;
      double* dxi = dx_on ? dx->data.data() + std::int64_t(in) * hw * c : nullptr;
      for (int ch = 0; ch < c; ++ch) db[ch] += dyo[ch];
      for (std::int64_t s = 0; s < hw; ++s)
        for (int ch = 0; ch < c; ++ch) {
          dK[s * c + ch] += xi[s * c + ch] * dyo[ch];
          if (dx_on) dxi[s * c + ch] += K[s * c + ch] * dyo[ch];
        }
    }
  };
  return push(std::move(node));
}

Tape::Ref Tape::relu(Ref xr) {
  const Tensor& x = value(xr);
  Tensor y(x.shape);
  for (std::size_t i = 0; i < x.data.size(); ++i)
    y.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
  Node node;
  node.value = std::move(y);
  node.back = [xr](Tape& t, int self) {
    if (!t.tracked(xr.i)) return;
    const Tensor& dy = t.grad_of(self);
    const Tensor& x = t.node(xr).value;
    Tensor& dx = t.grad_of(xr.i);
    for (std::size_t i = 0; i < dy.data.size(); ++i)
      if (x.data[i] > 0.0) dx.data[i] += dy.data[i];
  };
  return push(std::move(node));
}

Tape::Ref Tape::sigmoid(Ref xr) {
  const Tensor& x = value(xr);
  Tensor y(x.shape);
  for (std::size_t i = 0; i < x.data.size(); ++i)
    y.data[i] = 1.0 / (1.0 + std::exp(-x.data[i]));
  Node node;
  node.value = std::move(y);
  node.back = [xr](Tape& t, int self) {
    if (!t.tracked(xr.i)) return;
    const Tensor& dy = t.grad_of(self);
    const Tensor& y = t.node(Ref{self}).value;
    Tensor& dx = t.grad_of(xr.i);
    for (std::size_t i = 0; i < dy.data.size(); ++i)
      dx.data[i] += dy.data[i] * y.data[i] * (1.0 - y.data[i]);
  };
  return push(std::move(node));
}

Tape::Ref Tape::tanh(Ref xr) {
  const Tensor& x = value(xr);
  Tensor y(x.shape);
  for (std::size_t i = 0; i < x.data.size(); ++i) y.data[i] = std::tanh(x.data[i]);
  Node node;
  node.value = std::move(y);
  node.back = [xr](Tape& t, int self) {
    if (!t.tracked(xr.i)) return;
    const Tensor& dy = t.grad_of(self);
    const Tensor& y = t.node(Ref{self}).value;
    Tensor& dx = t.grad_of(xr.i);
    for (std::size_t i = 0; i < dy.data.size(); ++i)
      dx.data[i] += dy.data[i] * (1.0 - y.data[i] * y.data[i]);
  };
  return push(std::move(node));
}

Tape::Ref Tape::add(Ref ar, Ref br) {
  const Tensor& a = value(ar);
  const Tensor& b = value(br);
  if (!a.same_shape(b))
    fail(ErrorKind::shape, "add: shape mismatch " + shape_str(a.shape) +
                               " vs " + shape_str(b.shape));
  Tensor y(a.shape);
  for (std::size_t i = 0; i < y.data.size(); ++i)
    y.data[i] = a.data[i] + b.data[i];
  Node node;
  node.value = std::move(y);
  node.back = [ar, br](Tape& t, int self) {
    const Tensor& dy = t.grad_of(self);
    for (Ref r : {ar, br}) {
      if (!t.tracked(r.i)) continue;
      Tensor& d = t.grad_of(r.i);
      for (std::size_t i = 0; i < dy.data.size(); ++i) d.data[i] += dy.data[i];
    }
  };
  return push(std::move(node));
}

Tape::Ref Tape::mul(Ref ar, Ref br) {
  const Tensor& a = value(ar);
  const Tensor& b = value(br);
  if (!a.same_shape(b))
    fail(ErrorKind::shape, "mul: shape mismatch " + shape_str(a.shape) +
                               " vs " + shape_str(b.shape));
  Tensor y(a.shape);
  for (std::size_t i = 0; i < y.data.size(); ++i)
    y.data[i] = a.data[i] * b.data[i];
  Node node;
  node.value = std::move(y);
  node.back = [ar, br](Tape& t, int self) {
    const Tensor& dy = t.grad_of(self);
    const Tensor& a = t.node(ar).value;
    const Tensor& b = t.node(br).value;
    if (t.tracked(ar.i)) {
      Tensor& da = t.grad_of(ar.i);
      for (std::size_t i = 0; i < dy.data.size(); ++i)
        da.data[i] += dy.data[i] * b.data[i];
    }
    if (t.tracked(br.i)) {
      Tensor& db = t.grad_of(br.i);
      for (std::size_t i = 0; i < dy.data.size(); ++i)
        db.data[i] += dy.data[i] * a.data[i];
    }
  };
  return push(std::move(node));
}

Tape::Ref Tape::scale_channels(Ref xr, Ref sr) {
  const Tensor& x = value(xr);
  const Tensor& s = value(sr);
  if (x.ndim() < 2) fail(ErrorKind::shape, "scale_channels: input too flat");
  const int n = x.dim(0), c = x.dim(x.ndim() - 1);
  require_shape(s, {n, c}, "scale_channels scales");
  const std::int64_t inner = x.numel() / (std::int64_t(n) * c);

  Tensor y(x.shape);
  for (int in = 0; in < n; ++in) {
    const double* sv = s.data.data() + std::int64_t(in) * c;
    const double* xv = x.data.data() + std::int64_t(in) * inner * c;
    double* yv = y.data.data() + std::int64_t(in) * inner * c;
    for (std::int64_t k = 0; k < inner; ++k)
      for (int ch = 0; ch < c; ++ch) yv[k * c + ch] = xv[k * c + ch] * sv[ch];
  }
  Node node;
  node.value = std::move(y);
  node.back = [xr, sr, n, c, inner](Tape& t, int self) {
    const Tensor& dy = t.grad_of(self);
    const Tensor& x = t.node(xr).value;
    const Tensor& s = t.node(sr).value;
    const bool dx_on = t.tracked(xr.i), ds_on = t.tracked(sr.i);
    for (int in = 0; in < n; ++in) {
      const double* dyv = dy.data.data() + std::int64_t(in) * inner * c;
      const double* xv = x.data.data() + std::int64_t(in) * inner * c;
      const double* sv = s.data.data() + std::int64_t(in) * c;
      double* dxv = dx_on ? t.grad_of(xr.i).data.data() + std::int64_t(in) * inner * c : nullptr;
      double* dsv = ds_on ? t.grad_of(sr.i).data.data() + std::int64_t(in) * c : nullptr;
      for (std::int64_t k = 0; k < inner; ++k)
        for (int ch = 0; ch < c; ++ch) {
          if (dx_on) dxv[k * c + ch] += dyv[k * c + ch] * sv[ch];
          if (ds_on) dsv[ch] += dyv[k * c + ch] * xv[k * c + ch];
        }
    }
  };
  return push(std::move(node));
}

Tape::Ref Tape::concat_channels(const std::vector<Ref>& xs) {
  if (xs.empty()) fail(ErrorKind::shape, "concat_channels: no inputs");
  const Tensor& first = value(xs[0]);
  Shape lead = first.shape;
  lead.pop_back();
  int ctotal = 0;
  std::vector<int> widths;
  for (Ref r : xs) {
    const Tensor& t = value(r);
    Shape l = t.shape;
    int c = l.back();
    l.pop_back();
    if (l != lead)
      fail(ErrorKind::shape, "concat_channels: shape mismatch " +
                                 shape_str(first.shape) + " vs " +
                                 shape_str(t.shape));
    widths.push_back(c);
    ctotal += c;
  }
  Shape out_shape = lead;
  out_shape.push_back(ctotal);
  const std::int64_t rows = shape_numel(lead);

  Tensor y(out_shape);
  for (std::int64_t row = 0; row < rows; ++row) {
    double* yo = y.data.data() + row * ctotal;
    int off = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const Tensor& t = value(xs[k]);
      const int c = widths[k];
      const double* src = t.data.data() + row * c;
      std::copy(src, src + c, yo + off);
      off += c;
    }
  }
  Node node;
  node.value = std::move(y);
  auto inputs = xs;
  node.back = [inputs, widths, rows, ctotal](Tape& t, int self) {
    const Tensor& dy = t.grad_of(self);
    for (std::int64_t row = 0; row < rows; ++row) {
      const double* dyo = dy.data.data() + row * ctotal;
      int off = 0;
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        const int c = widths[k];
        if (t.tracked(inputs[k].i)) {
          double* dst = t.grad_of(inputs[k].i).data.data() + row * c;
          for (int ch = 0; ch < c; ++ch) dst[ch] += dyo[off + ch];
        }
        off += c;
      }
    }
  };
  return push(std::move(node));
}

Tape::Ref Tape::avg_pool2(Ref xr) {
  require_ndim(value(xr), 4, "avg_pool2 input");
  const Tensor& x = value(xr);
  const int n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  const int oh = h / 2, ow = w / 2;
  if (oh == 0 || ow == 0)
    fail(ErrorKind::shape, "avg_pool2: input too small " + shape_str(x.shape));
  Tensor y({n, oh, ow, c});
  auto xat = [&](int in, int ih, int iw, int ch) {
    return x.data[(((std::size_t(in) * h + ih) * w) + iw) * c + ch];
  };
  for (int in = 0; in < n; ++in)
    for (int i = 0; i < oh; ++i)
      for (int j = 0; j < ow; ++j)
        for (int ch = 0; ch < c; ++ch)
          y.data[(((std::size_t(in) * oh + i) * ow) + j) * c + ch] =
              0.25 * (xat(in, 2 * i, 2 * j, ch) + xat(in, 2 * i, 2 * j + 1, ch) +
                      xat(in, 2 * i + 1, 2 * j, ch) +
                      xat(in, 2 * i + 1, 2 * j + 1, ch));
  Node node;
  node.value = std::move(y);
  node.back = [xr, n, h, w, c, oh, ow](Tape& t, int self) {
    if (!t.tracked(xr.i)) return;
    const Tensor& dy = t.grad_of(self);
    Tensor& dx = t.grad_of(xr.i);
    for (int in = 0; in < n; ++in)
      for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j)
          for (int ch = 0; ch < c; ++ch) {
            const double g =
                0.25 *
                dy.data[(((std::size_t(in) * oh + i) * ow) + j) * c + ch];
            for (int di = 0; di < 2; ++di)
              for (int dj = 0; dj < 2; ++dj)
                dx.data[(((std::size_t(in) * h + 2 * i + di) * w) + 2 * j + dj) *
                            c +
                        ch] += g;
          }
  };
  return push(std::move(node));
}

Tape::Ref Tape::global_avg_pool(Ref xr) {
  require_ndim(value(xr), 4, "global_avg_pool input");
  const Tensor& x = value(xr);
  const int n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  const double inv = 1.0 / (double(h) * w);
  Tensor y({n, c});
  for (int in = 0; in < n; ++in) {
    double* yo = y.data.data() + std::size_t(in) * c;
    const double* xi = x.data.data() + std::size_t(in) * h * w * c;
    for (std::int64_t s = 0; s < std::int64_t(h) * w; ++s)
      for (int ch = 0; ch < c; ++ch) yo[ch] += xi[s * c + ch];
    for (int ch = 0; ch < c; ++ch) yo[ch] *= inv;
  }
  Node node;
  node.value = std::move(y);
  node.back = [xr, n, h, w, c, inv](Tape& t, int self) {
    if (!t.tracked(xr.i)) return;
    const Tensor& dy = t.grad_of(self);
    Tensor& dx = t.grad_of(xr.i);
    for (int in = 0; in < n; ++in) {
      const double* dyo = dy.data.data() + std::size_t(in) * c;
      double* dxi = dx.data.data() + std::size_t(in) * h * w * c;
      for (std::int64_t s = 0; s < std::int64_t(h) * w; ++s)
        for (int ch = 0; ch < c; ++ch) dxi[s * c + ch] += dyo[ch] * inv;
    }
  };
  return push(std::move(node));
}

Tape::Ref Tape::reshape(Ref xr, Shape s) {
  const Tensor& x = value(xr);
  if (shape_numel(s) != x.numel())
    fail(ErrorKind::shape, "reshape: cannot view " + shape_str(x.shape) +
                               " as " + shape_str(s));
  Tensor y(std::move(s), x.data);
  Node node;
  node.value = std::move(y);
  node.back = [xr](Tape& t, int self) {
    if (!t.tracked(xr.i)) return;
    const Tensor& dy = t.grad_of(self);
    Tensor& dx = t.grad_of(xr.i);
    for (std::size_t i = 0; i < dy.data.size(); ++i) dx.data[i] += dy.data[i];
  };
  return push(std::move(node));
}

Tape::Ref Tape::softmax_over_groups(Ref xr) {
  const Tensor& x = value(xr);
  if (x.ndim() < 2)
    fail(ErrorKind::shape, "softmax_over_groups: need [..., M, C]");
  const int c = x.dim(x.ndim() - 1);
  const int m = x.dim(x.ndim() - 2);
  const std::int64_t lead = x.numel() / (std::int64_t(m) * c);

  Tensor y(x.shape);
  for (std::int64_t l = 0; l < lead; ++l) {
    const double* xv = x.data.data() + l * m * c;
    double* yv = y.data.data() + l * m * c;
    for (int ch = 0; ch < c; ++ch) {
      double mx = xv[ch];
      for (int g = 1; g < m; ++g) mx = std::max(mx, xv[std::size_t(g) * c + ch]);
      double z = 0.0;
      for (int g = 0; g < m; ++g) {
        const double e = std::exp(xv[std::size_t(g) * c + ch] - mx);
        yv[std::size_t(g) * c + ch] = e;
        z += e;
      }
      for (int g = 0; g < m; ++g) yv[std::size_t(g) * c + ch] /= z;
    }
  }
  Node node;
  node.value = std::move(y);
  node.back = [xr, m, c, lead](Tape& t, int self) {
    if (!t.tracked(xr.i)) return;
    const Tensor& dy = t.grad_of(self);
    const Tensor& y = t.node(Ref{self}).value;
    Tensor& dx = t.grad_of(xr.i);
    for (std::int64_t l = 0; l < lead; ++l) {
      const double* dyv = dy.data.data() + l * m * c;
      const double* yv = y.data.data() + l * m * c;
      double* dxv = dx.data.data() + l * m * c;
      for (int ch = 0; ch < c; ++ch) {
        double dot = 0.0;
        for (int g = 0; g < m; ++g)
          dot += dyv[std::size_t(g) * c + ch] * yv[std::size_t(g) * c + ch];
        for (int g = 0; g < m; ++g)
          dxv[std::size_t(g) * c + ch] +=
              yv[std::size_t(g) * c + ch] * (dyv[std::size_t(g) * c + ch] - dot);
      }
    }
  };
  return push(std::move(node));
}

Tape::Ref Tape::take_group(Ref xr, int m) {
  const Tensor& x = value(xr);
  if (x.ndim() < 2) fail(ErrorKind::shape, "take_group: need [..., M, C]");
  const int c = x.dim(x.ndim() - 1);
  const int groups = x.dim(x.ndim() - 2);
  if (m < 0 || m >= groups)
    fail(ErrorKind::shape, "take_group: index " + std::to_string(m) +
                               " out of " + std::to_string(groups));
  const std::int64_t lead = x.numel() / (std::int64_t(groups) * c);
  Shape out = x.shape;
  out.erase(out.end() - 2);

  Tensor y(out);
  for (std::int64_t l = 0; l < lead; ++l) {
    const double* src = x.data.data() + (l * groups + m) * c;
    std::copy(src, src + c, y.data.data() + l * c);
  }
  Node node;
  node.value = std::move(y);
  node.back = [xr, m, groups, c, lead](Tape& t, int self) {
    if (!t.tracked(xr.i)) return;
    const Tensor& dy = t.grad_of(self);
    Tensor& dx = t.grad_of(xr.i);
    for (std::int64_t l = 0; l < lead; ++l) {
      double* dst = dx.data.data() + (l * groups + m) * c;
      const double* src = dy.data.data() + l * c;
      for (int ch = 0; ch < c; ++ch) dst[ch] += src[ch];
    }
  };
  return push(std::move(node));
}

Tape::Ref Tape::softmax(Ref xr) {
  const Shape orig = value(xr).shape;
  Shape grouped = orig;
  grouped.push_back(1);
  Ref as_groups = reshape(xr, grouped);
  Ref sm = softmax_over_groups(as_groups);
  return reshape(sm, orig);
}

Tape::Ref Tape::select_time(Ref xr, int tsel) {
  const Tensor& x = value(xr);
  if (x.ndim() < 2) fail(ErrorKind::shape, "select_time: need [n,T,...]");
  const int n = x.dim(0), T = x.dim(1);
  if (tsel < 0 || tsel >= T)
    fail(ErrorKind::shape, "select_time: index " + std::to_string(tsel) +
                               " out of " + std::to_string(T));
  const std::int64_t inner = x.numel() / (std::int64_t(n) * T);
  Shape out = x.shape;
  out.erase(out.begin() + 1);

  Tensor y(out);
  for (int in = 0; in < n; ++in) {
    const double* src = x.data.data() + (std::int64_t(in) * T + tsel) * inner;
    std::copy(src, src + inner, y.data.data() + std::int64_t(in) * inner);
  }
  Node node;
  node.value = std::move(y);
  node.back = [xr, n, T, tsel, inner](Tape& t, int self) {
    if (!t.tracked(xr.i)) return;
    const Tensor& dy = t.grad_of(self);
    Tensor& dx = t.grad_of(xr.i);
    for (int in = 0; in < n; ++in) {
      double* dst = dx.data.data() + (std::int64_t(in) * T + tsel) * inner;
      const double* src = dy.data.data() + std::int64_t(in) * inner;
      for (std::int64_t i = 0; i < inner; ++i) dst[i] += src[i];
    }
  };
  return push(std::move(node));
}

Tape::Ref Tape::cross_entropy(Ref pr, const std::vector<int>& labels) {
  require_ndim(value(pr), 2, "cross_entropy probabilities");
  const Tensor& p = value(pr);
  const int n = p.dim(0), k = p.dim(1);
  if (static_cast<int>(labels.size()) != n)
    fail(ErrorKind::shape, "cross_entropy: " + std::to_string(labels.size()) +
                               " labels for batch " + std::to_string(n));
  for (int i = 0; i < n; ++i)
    if (labels[i] < 0 || labels[i] >= k)
      fail(ErrorKind::validation, "cross_entropy: label out of range");

  double loss = 0.0;
  for (int i = 0; i < n; ++i)
    loss -= std::log(p.data[std::size_t(i) * k + labels[i]]);
  loss /= n;

  Node node;
  node.value = Tensor::scalar(loss);
  node.back = [pr, labels, n, k](Tape& t, int self) {
    if (!t.tracked(pr.i)) return;
    const double g = t.grad_of(self)[0];
    const Tensor& p = t.node(pr).value;
    Tensor& dp = t.grad_of(pr.i);
    for (int i = 0; i < n; ++i) {
      const std::size_t idx = std::size_t(i) * k + labels[i];
      dp.data[idx] += g * (-1.0 / (n * p.data[idx]));
    }
  };
  return push(std::move(node));
}

void Tape::backward(Ref root) {
  if (!root.valid()) fail(ErrorKind::validation, "backward: invalid ref");
  if (node(root).value.numel() != 1)
    fail(ErrorKind::shape, "backward: root must be scalar, got " +
                               shape_str(node(root).value.shape));
  for (auto& n : nodes_)
    if (n.track) {
      n.grad = Tensor::zeros(n.value.shape);
    }
  node(root).grad = Tensor::scalar(1.0);
  for (int i = root.i; i >= 0; --i) {
    Node& n = nodes_[std::size_t(i)];
    if (!n.track) continue;
    if (n.back) n.back(*this, i);
    if (n.p) {
      for (std::size_t j = 0; j < n.grad.data.size(); ++j)
        n.p->grad.data[j] += n.grad.data[j];
    }
  }
}

}  // namespace mvact::nn
