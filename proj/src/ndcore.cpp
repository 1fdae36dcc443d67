#include "npn/ndcore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

namespace npn::nd {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "x" : "") + std::to_string(shape[i]);
  return s + "]";
}

Tensor::Tensor(Shape s, Vec d) : shape(std::move(s)), data(std::move(d)) {
  if (data.size() != shape_size(shape)) {
    throw std::invalid_argument("tensor data length " + std::to_string(data.size()) +
                                " does not match shape " + shape_string(shape));
  }
}

GradBuffer::GradBuffer(const ParamStore& store) {
  slots_.reserve(store.size());
  for (const auto& p : store.params()) slots_.emplace_back(p.value.size(), 0.0);
}

void GradBuffer::zero() {
  for (auto& s : slots_) std::fill(s.begin(), s.end(), 0.0);
}

void GradBuffer::add(const GradBuffer& other) {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    double* dst = slots_[i].data();
    const double* src = other.slots_[i].data();
    for (std::size_t k = 0, n = slots_[i].size(); k < n; ++k) dst[k] += src[k];
  }
}

ParamId ParamStore::add(const std::string& name, Shape shape, Init init) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
  for (std::size_t d : shape) {
    if (d == 0) throw std::invalid_argument("parameter '" + name + "' has a zero dimension");
  }
  Parameter p;
  p.name = name;
  p.shape = std::move(shape);
  const std::size_t n = shape_size(p.shape);
  p.value.assign(n, 0.0);
  p.grad.assign(n, 0.0);
  p.mean_sq_grad.assign(n, 0.0);
  p.mean_sq_delta.assign(n, 0.0);
  switch (init) {
    case Init::Zeros: break;
    case Init::Embedding:
      for (double& v : p.value) v = rng_.uniform(-0.01, 0.01);
      break;
    case Init::Xavier: {
      const double fan_out = static_cast<double>(p.shape.front());
      const double fan_in = p.shape.size() > 1 ? static_cast<double>(n / p.shape.front()) : fan_out;
      const double bound = std::sqrt(6.0 / (fan_in + fan_out));
      for (double& v : p.value) v = rng_.uniform(-bound, bound);
      break;
    }
  }
  const ParamId id = params_.size();
  index_.emplace(p.name, id);
  params_.push_back(std::move(p));
  return id;
}

ParamId ParamStore::id_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named '" + name + "'");
  return it->second;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParamStore::accumulate(const GradBuffer& grads) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto src = grads[i];
    auto& dst = params_[i].grad;
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
}

void ParamStore::zero_grad() {
  for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

Tensor conv1d_tanh(std::span<const double> inputs, std::size_t n, std::size_t in_dim,
                   std::span<const double> filters, std::span<const double> bias, std::size_t h) {
  if (inputs.size() != n * in_dim) {
    throw std::invalid_argument("conv1d_tanh: inputs length " + std::to_string(inputs.size()) +
                                " != n*in_dim " + std::to_string(n * in_dim));
  }
  if (h == 0 || n < h) {
    throw std::invalid_argument("conv1d_tanh: sequence length " + std::to_string(n) +
                                " shorter than window " + std::to_string(h));
  }
  const std::size_t m = bias.size();
  const std::size_t width = h * in_dim;
  if (filters.size() != m * width) {
    throw std::invalid_argument("conv1d_tanh: filters length " + std::to_string(filters.size()) +
                                " != filters*window*in_dim " + std::to_string(m * width));
  }
  const std::size_t cols = n - h + 1;
  Tensor out({m, cols});
  for (std::size_t i = 0; i < m; ++i) {
    const double* w = filters.data() + i * width;
    for (std::size_t j = 0; j < cols; ++j) {
      out.data[i * cols + j] = std::tanh(dot(w, inputs.data() + j * in_dim, width) + bias[i]);
    }
  }
  return out;
}

void conv1d_tanh_backward(std::span<const double> inputs, std::size_t n, std::size_t in_dim,
                          std::span<const double> filters, std::size_t h, const Tensor& output,
                          std::span<const double> grad_out, std::span<double> grad_filters,
                          std::span<double> grad_bias, std::span<double> grad_inputs) {
  const std::size_t m = output.shape[0];
  const std::size_t cols = output.shape[1];
  const std::size_t width = h * in_dim;
  (void)n;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double g = grad_out[i * cols + j];
      if (g == 0.0) continue;
      const double r = output.data[i * cols + j];
      const double pre = g * (1.0 - r * r);
      if (!grad_bias.empty()) grad_bias[i] += pre;
      const double* x = inputs.data() + j * in_dim;
      if (!grad_filters.empty()) {
        double* gw = grad_filters.data() + i * width;
        for (std::size_t k = 0; k < width; ++k) gw[k] += pre * x[k];
      }
      if (!grad_inputs.empty()) {
        const double* w = filters.data() + i * width;
        double* gx = grad_inputs.data() + j * in_dim;
        for (std::size_t k = 0; k < width; ++k) gx[k] += pre * w[k];
      }
    }
  }
}

PoolResult dynamic_multi_pool(const Tensor& map, std::size_t c) {
  const std::size_t m = map.shape[0];
  const std::size_t cols = map.shape[1];
  if (cols == 0 || c >= cols) {
    throw std::out_of_range("dynamic_multi_pool: split " + std::to_string(c) +
                            " outside map of width " + std::to_string(cols));
  }
  PoolResult r;
  r.left.assign(m, 0.0);
  r.right.assign(m, 0.0);
  r.left_arg.assign(m, -1);
  r.right_arg.assign(m, -1);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = map.data.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) {
      if (j < c) {
        if (r.left_arg[i] < 0 || row[j] > r.left[i]) {
          r.left[i] = row[j];
          r.left_arg[i] = static_cast<long>(j);
        }
      } else if (r.right_arg[i] < 0 || row[j] > r.right[i]) {
        r.right[i] = row[j];
        r.right_arg[i] = static_cast<long>(j);
      }
    }
  }
  return r;
}

void dynamic_multi_pool_backward(const PoolResult& pool, std::span<const double> grad_left,
                                 std::span<const double> grad_right, Tensor& grad_map) {
  const std::size_t cols = grad_map.shape[1];
  for (std::size_t i = 0; i < pool.left.size(); ++i) {
    if (pool.left_arg[i] >= 0) grad_map.data[i * cols + static_cast<std::size_t>(pool.left_arg[i])] += grad_left[i];
    if (pool.right_arg[i] >= 0) grad_map.data[i * cols + static_cast<std::size_t>(pool.right_arg[i])] += grad_right[i];
  }
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vec dense(std::span<const double> input, std::span<const double> weights,
          std::span<const double> bias, Activation activation) {
  const std::size_t out = bias.size();
  const std::size_t in = input.size();
  if (weights.size() != out * in) {
    throw std::invalid_argument("dense: weight length " + std::to_string(weights.size()) +
                                " != out*in " + std::to_string(out) + "x" + std::to_string(in));
  }
  Vec y(out);
  for (std::size_t i = 0; i < out; ++i) {
    const double z = dot(weights.data() + i * in, input.data(), in) + bias[i];
    switch (activation) {
      case Activation::None: y[i] = z; break;
      case Activation::Tanh: y[i] = std::tanh(z); break;
      case Activation::Sigmoid: y[i] = sigmoid(z); break;
    }
  }
  return y;
}

void dense_backward(std::span<const double> input, std::span<const double> weights,
                    std::span<const double> output, Activation activation,
                    std::span<const double> grad_out, std::span<double> grad_weights,
                    std::span<double> grad_bias, std::span<double> grad_input) {
  const std::size_t out = output.size();
  const std::size_t in = input.size();
  for (std::size_t i = 0; i < out; ++i) {
    double g = grad_out[i];
    switch (activation) {
      case Activation::None: break;
      case Activation::Tanh: g *= 1.0 - output[i] * output[i]; break;
      case Activation::Sigmoid: g *= output[i] * (1.0 - output[i]); break;
    }
    if (g == 0.0) continue;
    if (!grad_bias.empty()) grad_bias[i] += g;
    if (!grad_weights.empty()) {
      double* gw = grad_weights.data() + i * in;
      for (std::size_t k = 0; k < in; ++k) gw[k] += g * input[k];
    }
    if (!grad_input.empty()) {
      const double* w = weights.data() + i * in;
      for (std::size_t k = 0; k < in; ++k) grad_input[k] += g * w[k];
    }
  }
}

Vec softmax(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("softmax over empty scores");
  double mx = scores[0];
  for (double s : scores) {
    if (!std::isfinite(s)) throw NumericError("softmax: non-finite score");
    mx = std::max(mx, s);
  }
  Vec p(scores.size());
  double z = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) z += (p[i] = std::exp(scores[i] - mx));
  for (double& v : p) v /= z;
  return p;
}

XentResult softmax_xent(std::span<const double> scores, std::size_t gold) {
  if (gold >= scores.size()) {
    throw std::out_of_range("softmax_xent: gold index " + std::to_string(gold) + " >= " +
                            std::to_string(scores.size()));
  }
  XentResult r;
  r.probs = softmax(scores);
  double mx = scores[0];
  for (double s : scores) mx = std::max(mx, s);
  double z = 0.0;
  for (double s : scores) z += std::exp(s - mx);
  // log-sum-exp form keeps the loss exact when P_gold underflows.
  r.loss = std::log(z) - (scores[gold] - mx);
  r.grad = r.probs;
  r.grad[gold] -= 1.0;
  return r;
}

void adadelta_step(ParamStore& store, const AdadeltaConfig& config) {
  const double rho = config.rho;
  const double eps = config.eps;
  for (auto& p : store.params()) {
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      p.mean_sq_grad[k] = rho * p.mean_sq_grad[k] + (1.0 - rho) * g * g;
      const double dx = -(std::sqrt(p.mean_sq_delta[k] + eps) / std::sqrt(p.mean_sq_grad[k] + eps)) * g;
      p.mean_sq_delta[k] = rho * p.mean_sq_delta[k] + (1.0 - rho) * dx * dx;
      p.value[k] += dx;
      p.grad[k] = 0.0;
    }
  }
}

GradCheckReport grad_check(const LossClosure& closure, ParamStore& store, double step,
                           double tolerance, std::size_t coords_per_param, std::uint64_t seed) {
  GradBuffer analytic(store);
  closure(store, &analytic);
  Rng rng(seed);
  GradCheckReport report;
  for (ParamId id = 0; id < store.size(); ++id) {
    Parameter& p = store.at(id);
    std::vector<std::size_t> coords(p.value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (coords.size() > coords_per_param) {
      for (std::size_t i = 0; i < coords_per_param; ++i) {
        std::swap(coords[i], coords[i + rng.below(coords.size() - i)]);
      }
      coords.resize(coords_per_param);
    }
    GradCheckEntry entry;
    entry.name = p.name;
    for (std::size_t k : coords) {
      const double orig = p.value[k];
      p.value[k] = orig + step;
      const double up = closure(store, nullptr);
      p.value[k] = orig - step;
      const double down = closure(store, nullptr);
      p.value[k] = orig;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[id][k];
      const double rel = std::fabs(a - numeric) / std::max({std::fabs(a), std::fabs(numeric), 1e-8});
      ++entry.checked;
      if (rel > entry.max_rel_error || entry.checked == 1) {
        entry.max_rel_error = rel;
        entry.worst_index = k;
        entry.worst_analytic = a;
        entry.worst_numeric = numeric;
      }
    }
    entry.pass = entry.max_rel_error <= tolerance;
    report.pass = report.pass && entry.pass;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

namespace {

constexpr char kMagic[8] = {'N', 'P', 'N', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
void put(std::ostream& out, T v) {
  static_assert(std::is_integral_v<T>);
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw std::runtime_error("checkpoint truncated");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return static_cast<T>(v);
}

void put_doubles(std::ostream& out, const Vec& values) {
  for (double d : values) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(d));
}

Vec get_doubles(std::istream& in, std::size_t n) {
  Vec v(n);
  for (double& d : v) d = std::bit_cast<double>(get<std::uint64_t>(in));
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& store, const std::string& metadata,
                     bool with_optimizer_state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, metadata.size());
  out.write(metadata.data(), static_cast<std::streamsize>(metadata.size()));
  put<std::uint64_t>(out, store.size());
  for (const auto& p : store.params()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.shape.size()));
    for (std::size_t d : p.shape) put<std::uint64_t>(out, d);
    put<std::uint8_t>(out, with_optimizer_state ? 1 : 0);
    put_doubles(out, p.value);
    if (with_optimizer_state) {
      put_doubles(out, p.mean_sq_grad);
      put_doubles(out, p.mean_sq_delta);
    }
  }
  if (!out) throw std::runtime_error("write failed for checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("'" + path + "' is not a checkpoint file");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.metadata.resize(get<std::uint64_t>(in));
  if (!in.read(ck.metadata.data(), static_cast<std::streamsize>(ck.metadata.size()))) {
    throw std::runtime_error("checkpoint truncated");
  }
  const auto count = get<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < count; ++i) {
    Parameter p;
    p.name.resize(get<std::uint32_t>(in));
    if (!in.read(p.name.data(), static_cast<std::streamsize>(p.name.size()))) throw std::runtime_error("checkpoint truncated");
    const auto rank = get<std::uint32_t>(in);
    for (std::uint32_t r = 0; r < rank; ++r) p.shape.push_back(get<std::uint64_t>(in));
    const auto flags = get<std::uint8_t>(in);
    const std::size_t n = shape_size(p.shape);
    p.value = get_doubles(in, n);
    p.grad.assign(n, 0.0);
    if (flags & 1) {
      p.mean_sq_grad = get_doubles(in, n);
      p.mean_sq_delta = get_doubles(in, n);
    }
    ck.params.push_back(std::move(p));
  }
  return ck;
}

void restore(ParamStore& store, const Checkpoint& ck) {
  if (ck.params.size() != store.size()) {
    throw std::runtime_error("checkpoint has " + std::to_string(ck.params.size()) +
                             " parameters, model expects " + std::to_string(store.size()));
  }
  for (std::size_t i = 0; i < ck.params.size(); ++i) {
    const Parameter& src = ck.params[i];
    Parameter& dst = store.at(i);
    if (src.name != dst.name || src.shape != dst.shape) {
      throw std::runtime_error("checkpoint parameter '" + src.name + "' " + shape_string(src.shape) +
                               " does not match model parameter '" + dst.name + "' " +
                               shape_string(dst.shape));
    }
    dst.value = src.value;
    if (!src.mean_sq_grad.empty()) {
      dst.mean_sq_grad = src.mean_sq_grad;
      dst.mean_sq_delta = src.mean_sq_delta;
    }
    std::fill(dst.grad.begin(), dst.grad.end(), 0.0);
  }
}

}  // namespace npn::nd
