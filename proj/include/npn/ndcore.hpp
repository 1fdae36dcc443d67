#ifndef NPN_NDCORE_HPP_
#define NPN_NDCORE_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "npn/errors.hpp"
#include "npn/rng.hpp"

namespace npn::nd {

using Vec = std::vector<double>;
using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Row-major dense tensor.
struct Tensor {
  Shape shape;
  Vec data;

  Tensor() = default;
  explicit Tensor(Shape s) : shape(std::move(s)), data(shape_size(shape), 0.0) {}
  Tensor(Shape s, Vec d);

  std::size_t size() const { return data.size(); }
  double& at(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }
};

enum class Init { Xavier, Zeros, Embedding };

struct Parameter {
  std::string name;
  Shape shape;
  Vec value;
  Vec grad;
  Vec mean_sq_grad;   // E[g^2]
  Vec mean_sq_delta;  // E[dx^2]
};

using ParamId = std::size_t;

class ParamStore;

// Gradient accumulator shaped like a store. Training code accumulates into one
// of these and reduces it into the store in a fixed order.
class GradBuffer {
 public:
  GradBuffer() = default;
  explicit GradBuffer(const ParamStore& store);

  std::span<double> operator[](ParamId id) { return slots_[id]; }
  std::span<const double> operator[](ParamId id) const { return slots_[id]; }
  std::size_t size() const { return slots_.size(); }
  void zero();
  void add(const GradBuffer& other);

 private:
  std::vector<Vec> slots_;
};

class ParamStore {
 public:
  explicit ParamStore(std::uint64_t seed = 1) : seed_(seed), rng_(seed) {}

  // Registers a parameter; initialization draws from the store's seeded stream in
  // registration order. Duplicate names throw.
  ParamId add(const std::string& name, Shape shape, Init init);

  std::size_t size() const { return params_.size(); }
  Parameter& at(ParamId id) { return params_[id]; }
  const Parameter& at(ParamId id) const { return params_[id]; }
  ParamId id_of(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::span<const double> value(ParamId id) const { return params_[id].value; }
  std::span<double> mutable_value(ParamId id) { return params_[id].value; }

  std::vector<Parameter>& params() { return params_; }
  const std::vector<Parameter>& params() const { return params_; }

  std::uint64_t seed() const { return seed_; }
  std::size_t scalar_count() const;

  void accumulate(const GradBuffer& grads);
  void zero_grad();

 private:
  std::uint64_t seed_;
  Rng rng_;
  std::vector<Parameter> params_;
  std::map<std::string, ParamId> index_;
};

double dot(const double* a, const double* b, std::size_t n);

// r[i][j] = tanh(w_i . concat(x_j .. x_{j+h-1}) + b_i) for j in [0, n-h].
// `inputs` is n x in_dim row-major, `filters` is m x (h*in_dim), `bias` has m.
Tensor conv1d_tanh(std::span<const double> inputs, std::size_t n, std::size_t in_dim,
                   std::span<const double> filters, std::span<const double> bias, std::size_t h);

// Backward through conv1d_tanh given its output and dL/d(output). Any of the
// gradient outputs may be empty to skip it. Zero entries of `grad_out` are skipped.
void conv1d_tanh_backward(std::span<const double> inputs, std::size_t n, std::size_t in_dim,
                          std::span<const double> filters, std::size_t h, const Tensor& output,
                          std::span<const double> grad_out, std::span<double> grad_filters,
                          std::span<double> grad_bias, std::span<double> grad_inputs);

// Per-filter max over columns j < c (left) and j >= c (right). An empty segment
// yields 0 and argmax -1.
struct PoolResult {
  Vec left, right;
  std::vector<long> left_arg, right_arg;
};
PoolResult dynamic_multi_pool(const Tensor& map, std::size_t c);
// Scatters (dL/dleft, dL/dright) back onto a map-shaped gradient.
void dynamic_multi_pool_backward(const PoolResult& pool, std::span<const double> grad_left,
                                 std::span<const double> grad_right, Tensor& grad_map);

enum class Activation { None, Tanh, Sigmoid };

double sigmoid(double x);

// activation(W x + b); W is out x in row-major.
Vec dense(std::span<const double> input, std::span<const double> weights,
          std::span<const double> bias, Activation activation);
// Given the forward output, accumulates dW, db and (if non-empty) dx.
void dense_backward(std::span<const double> input, std::span<const double> weights,
                    std::span<const double> output, Activation activation,
                    std::span<const double> grad_out, std::span<double> grad_weights,
                    std::span<double> grad_bias, std::span<double> grad_input);

Vec softmax(std::span<const double> scores);

struct XentResult {
  Vec probs;
  double loss = 0.0;
  Vec grad;  // probs - onehot(gold)
};
// Throws NumericError on non-finite scores, std::out_of_range on a bad index.
XentResult softmax_xent(std::span<const double> scores, std::size_t gold);

struct AdadeltaConfig {
  double rho = 0.95;
  double eps = 1e-6;
  friend bool operator==(const AdadeltaConfig&, const AdadeltaConfig&) = default;
};
// Applies one update from the store's accumulated gradients and zeroes them.
void adadelta_step(ParamStore& store, const AdadeltaConfig& config);

// Loss closure for gradient checking: returns the loss at the store's current
// values and, when `grads` is non-null, accumulates analytic gradients into it.
using LossClosure = std::function<double(const ParamStore&, GradBuffer*)>;

struct GradCheckEntry {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  bool pass = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  bool pass = true;
};

// Central differences on up to `coords_per_param` random coordinates of every
// parameter. Relative error is |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport grad_check(const LossClosure& closure, ParamStore& store, double step,
                           double tolerance, std::size_t coords_per_param = 16,
                           std::uint64_t seed = 7);

// Checkpoint: "NPNCKPT\0", u32 version, u64 metadata length, metadata bytes, u64
// parameter count, then per parameter: u32 name length, name, u32 rank, u64 dims,
// u8 flags (bit 0: optimizer state present), little-endian f64 values (then
// E[g^2] and E[dx^2] when flagged).
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::string metadata;
  std::vector<Parameter> params;
};

void save_checkpoint(const std::string& path, const ParamStore& store, const std::string& metadata,
                     bool with_optimizer_state = true);
Checkpoint load_checkpoint(const std::string& path);
// Copies values (and optimizer state when present) into a store whose names and
// shapes must match exactly; throws std::runtime_error describing any mismatch.
void restore(ParamStore& store, const Checkpoint& checkpoint);

}  // namespace npn::nd

#endif  // NPN_NDCORE_HPP_
