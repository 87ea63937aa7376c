#include "mvact/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace mvact::nn {

namespace {

double eval_scalar(const Fragment& f, const std::vector<Tensor>& inputs) {
  Tape tape;
  std::vector<Tape::Ref> refs;
  refs.reserve(inputs.size());
  for (const auto& t : inputs) refs.push_back(tape.input(t));
  Tape::Ref out = f(tape, refs);
  const Tensor& v = tape.value(out);
  if (v.numel() != 1)
    fail(ErrorKind::shape, "gradcheck: fragment output must be scalar");
  return v[0];
}

void track_err(GradCheckReport& rep, double analytic, double numeric,
               const std::string& where) {
  const double denom =
      std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
  const double rel = std::fabs(analytic - numeric) / denom;
  ++rep.checked;
  if (rel > rep.max_rel_err) {
    rep.max_rel_err = rel;
    rep.worst = where + " analytic=" + format_double(analytic) +
                " numeric=" + format_double(numeric);
  }
}

}  // namespace

GradCheckReport gradcheck(const Fragment& f, std::vector<Tensor> inputs,
                          const std::vector<Parameter*>& params, double tol,
                          double step) {
  // determinism contract: two identical forwards must agree bitwise
  const double v1 = eval_scalar(f, inputs);
  const double v2 = eval_scalar(f, inputs);
  if (std::memcmp(&v1, &v2, sizeof(double)) != 0)
    fail(ErrorKind::numeric,
         "gradcheck: fragment is not deterministic (forward passes differ)");

  for (Parameter* p : params) p->zero_grad();

  Tape tape;
  std::vector<Tape::Ref> refs;
  for (const auto& t : inputs) refs.push_back(tape.input(t));
  Tape::Ref out = f(tape, refs);
  tape.backward(out);

  GradCheckReport rep;

  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor& analytic = tape.grad(refs[k]);
    for (std::size_t i = 0; i < inputs[k].data.size(); ++i) {
      const double saved = inputs[k].data[i];
      inputs[k].data[i] = saved + step;
      const double fp = eval_scalar(f, inputs);
      inputs[k].data[i] = saved - step;
      const double fm = eval_scalar(f, inputs);
      inputs[k].data[i] = saved;
      track_err(rep, analytic.data[i], (fp - fm) / (2.0 * step),
                "input[" + std::to_string(k) + "][" + std::to_string(i) + "]");
    }
  }

  for (Parameter* p : params) {
    for (std::size_t i = 0; i < p->value.data.size(); ++i) {
      const double saved = p->value.data[i];
      p->value.data[i] = saved + step;
      const double fp = eval_scalar(f, inputs);
      p->value.data[i] = saved - step;
      const double fm = eval_scalar(f, inputs);
      p->value.data[i] = saved;
      track_err(rep, p->grad.data[i], (fp - fm) / (2.0 * step),
                p->name + "[" + std::to_string(i) + "]");
    }
  }

  rep.pass = rep.max_rel_err < tol;
  return rep;
}

}  // namespace mvact::nn
