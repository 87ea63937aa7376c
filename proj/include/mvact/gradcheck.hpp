#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mvact/tape.hpp"

namespace mvact::nn {

// A differentiable network fragment: builds a scalar output from the given
// input leaves on a fresh tape. Parameters are used directly from the
// enclosing scope via Tape::param.
using Fragment =
    std::function<Tape::Ref(Tape&, const std::vector<Tape::Ref>&)>;

struct GradCheckReport {
  bool pass = false;
  double max_rel_err = 0.0;
  std::string worst;  // which element was worst, for diagnostics
  int checked = 0;
};

// Central finite differences against the tape gradients, for every input
// and every parameter element. Relative error is |a-n| / max(1,|a|,|n|).
// Throws if two forward passes of the fragment disagree bitwise.
GradCheckReport gradcheck(const Fragment& f, std::vector<Tensor> inputs,
                          const std::vector<Parameter*>& params, double tol,
                          double step = 1e-5);

}  // namespace mvact::nn
