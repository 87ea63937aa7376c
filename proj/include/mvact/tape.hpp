#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mvact/kernels.hpp"
#include "mvact/tensor.hpp"

namespace mvact::nn {

using kernels::Padding;

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(Tensor::zeros(value.shape)) {}

  void zero_grad() { grad.fill(0.0); }
};

// Reverse-mode autograd over a recorded operation tape. A tape is built per
// forward pass; backward() walks it in reverse creation order. Parameters
// accumulate into their own grad buffers.
class Tape {
 public:
  struct Ref {
    int i = -1;
    bool valid() const { return i >= 0; }
  };

  Ref input(Tensor t);     // differentiable leaf
  Ref constant(Tensor t);  // leaf excluded from gradients
  Ref param(Parameter& p);

  // xW + b: x[n,i], W[i,o], b[o]
  Ref dense(Ref x, Parameter& W, Parameter& b);
  // cross-correlation: x[n,h,w,ci], K[kh,kw,ci,co], optional bias[co]
  Ref conv2d(Ref x, Parameter& K, Parameter* bias, int stride, Padding pad);
  // stride-1 3d conv: x[n,t,h,w,ci], K[kt,kh,kw,ci,co]
  Ref conv3d(Ref x, Parameter& K, Parameter* bias, Padding pad);
  // global depthwise conv: x[n,h,w,c], K[h,w,c], b[c] -> [n,1,1,c]
  Ref global_depthwise_conv(Ref x, Parameter& K, Parameter& b);

  Ref relu(Ref x);
  Ref sigmoid(Ref x);
  Ref tanh(Ref x);
  Ref add(Ref a, Ref b);
  Ref mul(Ref a, Ref b);
  // x[n,...,C] scaled per channel by s[n,C]
  Ref scale_channels(Ref x, Ref s);
  Ref concat_channels(const std::vector<Ref>& xs);
  // 2x2/2 average pooling on [n,h,w,c]; odd edge rows/cols dropped
  Ref avg_pool2(Ref x);
  Ref global_avg_pool(Ref x);  // [n,h,w,c] -> [n,c]
  Ref reshape(Ref x, Shape s);
  // softmax across axis -2 of [..., M, C], independently per channel
  Ref softmax_over_groups(Ref x);
  Ref take_group(Ref x, int m);  // [..., M, C] -> [..., C]
  Ref softmax(Ref x);            // last axis
  Ref select_time(Ref x, int t);  // [n,T,...] -> [n,...]
  // mean over batch of -log p[label]; probs[n,K]
  Ref cross_entropy(Ref probs, const std::vector<int>& labels);

  const Tensor& value(Ref r) const { return node(r).value; }
  const Tensor& grad(Ref r) const { return node(r).grad; }

  // root must be scalar; fills grads of every differentiable node and
  // accumulates into Parameter::grad
  void backward(Ref root);

  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool track = true;
    Parameter* p = nullptr;
    std::function<void(Tape&, int)> back;
  };

  Node& node(Ref r) { return nodes_.at(static_cast<std::size_t>(r.i)); }
  const Node& node(Ref r) const { return nodes_.at(static_cast<std::size_t>(r.i)); }
  Ref push(Node n);
  Tensor& grad_of(int i) { return nodes_[static_cast<std::size_t>(i)].grad; }
  bool tracked(int i) const { return nodes_[static_cast<std::size_t>(i)].track; }

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, int> interned_;
};

}  // namespace mvact::nn
