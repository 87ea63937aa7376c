#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "mvact/tape.hpp"

namespace mvact::nn {

// SGD with classical momentum: v <- mu*v + g; p <- p - lr*v
class Sgd {
 public:
  Sgd(double lr, double momentum) : lr_(lr), momentum_(momentum) {}

  void step(const std::vector<Parameter*>& params);
  void zero_grad(const std::vector<Parameter*>& params);

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_;
  double momentum_;
  std::unordered_map<Parameter*, Tensor> velocity_;
};

// fan-in-scaled uniform init, biases untouched (they start at zero)
void init_fan_in_uniform(Parameter& p, int fan_in, Rng& rng);

// Named flat binary parameter records with a versioned header.
void save_checkpoint(const std::string& path,
                     const std::vector<Parameter*>& params);
void load_checkpoint(const std::string& path,
                     const std::vector<Parameter*>& params);

}  // namespace mvact::nn
