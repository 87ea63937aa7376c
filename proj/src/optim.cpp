#include "mvact/optim.hpp"

#include <cmath>
#include <cstring>
#include <set>

namespace mvact::nn {

void Sgd::step(const std::vector<Parameter*>& params) {
  for (Parameter* p : params) {
    if (!p->trainable) continue;
    auto it = velocity_.find(p);
    if (it == velocity_.end())
      it = velocity_.emplace(p, Tensor::zeros(p->value.shape)).first;
    Tensor& v = it->second;
    for (std::size_t i = 0; i < v.data.size(); ++i) {
      v.data[i] = momentum_ * v.data[i] + p->grad.data[i];
      p->value.data[i] -= lr_ * v.data[i];
    }
  }
}

void Sgd::zero_grad(const std::vector<Parameter*>& params) {
  for (Parameter* p : params) p->zero_grad();
}

void init_fan_in_uniform(Parameter& p, int fan_in, Rng& rng) {
  if (fan_in < 1) fan_in = 1;
  const double a = std::sqrt(3.0 / fan_in);
  for (double& v : p.value.data) v = rng.uniform(-a, a);
}

namespace {

constexpr char kMagic[] = "MVACTCKPT1";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::vector<unsigned char>& b, std::size_t& at) {
  if (at + 4 > b.size()) fail(ErrorKind::parse, "checkpoint: truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[at + i]) << (8 * i);
  at += 4;
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::vector<Parameter*>& params) {
  std::set<std::string> seen;
  for (const Parameter* p : params)
    if (!seen.insert(p->name).second)
      fail(ErrorKind::validation, "checkpoint: duplicate parameter name " + p->name);

  std::string out(kMagic, sizeof(kMagic) - 1);
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const Parameter* p : params) {
    put_u32(out, static_cast<std::uint32_t>(p->name.size()));
    out += p->name;
    put_u32(out, static_cast<std::uint32_t>(p->value.shape.size()));
    for (int d : p->value.shape) put_u32(out, static_cast<std::uint32_t>(d));
    const std::size_t bytes = p->value.data.size() * sizeof(double);
    const std::size_t off = out.size();
    out.resize(off + bytes);
    std::memcpy(out.data() + off, p->value.data.data(), bytes);
  }
  write_binary_file(path, out.data(), out.size());
}

void load_checkpoint(const std::string& path,
                     const std::vector<Parameter*>& params) {
  auto bytes = read_binary_file(path);
  const std::size_t magic_len = sizeof(kMagic) - 1;
  if (bytes.size() < magic_len ||
      std::memcmp(bytes.data(), kMagic, magic_len) != 0)
    fail(ErrorKind::parse, "checkpoint: bad header in " + path);
  std::size_t at = magic_len;
  const std::uint32_t count = get_u32(bytes, at);

  std::unordered_map<std::string, std::pair<Shape, std::vector<double>>> records;
  for (std::uint32_t r = 0; r < count; ++r) {
    const std::uint32_t name_len = get_u32(bytes, at);
    if (at + name_len > bytes.size()) fail(ErrorKind::parse, "checkpoint: truncated");
    std::string name(reinterpret_cast<const char*>(bytes.data() + at), name_len);
    at += name_len;
    const std::uint32_t nd = get_u32(bytes, at);
    Shape shape;
    for (std::uint32_t i = 0; i < nd; ++i)
      shape.push_back(static_cast<int>(get_u32(bytes, at)));
    const std::int64_t n = shape_numel(shape);
    const std::size_t payload = std::size_t(n) * sizeof(double);
    if (at + payload > bytes.size()) fail(ErrorKind::parse, "checkpoint: truncated");
    std::vector<double> data(static_cast<std::size_t>(n), 0.0);
    std::memcpy(data.data(), bytes.data() + at, payload);
    at += payload;
    records[name] = std::make_pair(std::move(shape), std::move(data));
  }

  for (Parameter* p : params) {
    auto it = records.find(p->name);
    if (it == records.end())
      fail(ErrorKind::validation, "checkpoint: missing parameter " + p->name);
    if (it->second.first != p->value.shape)
      fail(ErrorKind::shape, "checkpoint: shape mismatch for " + p->name);
    p->value.data = it->second.second;
    p->zero_grad();
  }
}

}  // namespace mvact::nn
