#ifndef INTENTCAPS_NDIFF_TENSOR_HPP_
#define INTENTCAPS_NDIFF_TENSOR_HPP_

// Dense row-major tensors with define-by-run reverse-mode differentiation.
//
// Every operation returns a new Tensor whose node remembers its parents and a
// closure that pushes the node's gradient back into them. The graph is rebuilt
// on every forward pass; nothing is shared between passes except the leaf
// parameter nodes.

#include <cstddef>
#include <cstdint>
#include <algorithm>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace intentcaps::ndiff {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class DegenerateRowError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace detail {
inline thread_local bool grad_disabled = false;
}  // namespace detail

// While alive, newly built nodes do not record parents. Used for evaluation
// and for the perturbed passes of the finite-difference check.
class NoGradGuard {
 public:
  NoGradGuard() : previous_(detail::grad_disabled) { detail::grad_disabled = true; }
  ~NoGradGuard() { detail::grad_disabled = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

inline bool grad_enabled() { return !detail::grad_disabled; }

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> values;
  std::vector<T> grad;
  bool requires_grad = false;
  std::string_view op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into parents that require grad.
  std::function<void(Node&)> backward;

  bool is_leaf() const { return parents.empty(); }
};

template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    const std::size_t n = numel(shape);
    return from(std::move(shape), std::vector<T>(n, T(0)), requires_grad);
  }

  static Tensor filled(Shape shape, T value, bool requires_grad = false) {
    const std::size_t n = numel(shape);
    return from(std::move(shape), std::vector<T>(n, value), requires_grad);
  }

  static Tensor from(Shape shape, std::vector<T> values, bool requires_grad = false) {
    for (std::size_t extent : shape) {
      if (extent == 0) throw DimensionError("tensor extents must be positive, got " + to_string(shape));
    }
    if (numel(shape) != values.size()) {
      throw DimensionError("shape " + to_string(shape) + " holds " + std::to_string(numel(shape)) +
                           " values, got " + std::to_string(values.size()));
    }
    auto node = std::make_shared<Node<T>>();
    node->grad.assign(values.size(), T(0));
    node->values = std::move(values);
    node->shape = std::move(shape);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
  }

  static Tensor scalar(T value, bool requires_grad = false) {
    return from({1}, {value}, requires_grad);
  }

  explicit Tensor(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->values.size(); }
  std::size_t rows() const { return node_->shape.at(0); }
  std::size_t cols() const { return rank() >= 2 ? node_->shape[1] : 1; }

  std::span<const T> values() const { return node_->values; }
  std::span<T> mutable_values() { return node_->values; }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() { return node_->grad; }

  T operator[](std::size_t i) const { return node_->values[i]; }
  T at(std::size_t r, std::size_t c) const { return node_->values[r * cols() + c]; }
  T item() const {
    if (size() != 1) throw ContractError("item() on tensor of shape " + to_string(shape()));
    return node_->values[0];
  }

  bool requires_grad() const { return node_->requires_grad; }
  bool is_leaf() const { return node_->is_leaf(); }
  std::string_view op() const { return node_->op; }

  void zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), T(0)); }

  // Copy of the values as an independent leaf (no provenance).
  Tensor detach() const { return from(shape(), node_->values, false); }

  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& node_ptr() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

// Builds the result node of an operation. When no parent requires grad, or
// recording is disabled, the result is a plain leaf with no provenance.
template <typename T>
Tensor<T> make_op(std::string_view name, Shape shape, std::vector<T> values,
                  const std::vector<Tensor<T>>& parents,
                  std::function<void(Node<T>&)> backward) {
  Tensor<T> out = Tensor<T>::from(std::move(shape), std::move(values), false);
  if (!grad_enabled()) return out;
  bool any = false;
  for (const auto& p : parents) any = any || p.requires_grad();
  if (!any) return out;
  Node<T>* node = out.node();
  node->requires_grad = true;
  node->op = name;
  for (const auto& p : parents) node->parents.push_back(p.node_ptr());
  node->backward = std::move(backward);
  return out;
}

template <typename T>
Tensor<T> make_op(std::string_view name, Shape shape, std::vector<T> values,
                  std::initializer_list<Tensor<T>> parents,
                  std::function<void(Node<T>&)> backward) {
  return make_op(name, std::move(shape), std::move(values), std::vector<Tensor<T>>(parents),
                 std::move(backward));
}

// Accumulates dL/dleaf into every reachable leaf that requires grad.
// Intermediate gradients are reset first, so calling twice without resetting
// leaves doubles the leaf gradients exactly.
template <typename T>
void backward(const Tensor<T>& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " +
                        (loss.defined() ? to_string(loss.shape()) : std::string("<undefined>")));
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS; the reverse of the result is a topological order.
  struct Frame {
    Node<T>* node;
    std::size_t next_parent;
  };
  std::vector<Node<T>*> order;
  std::vector<Frame> frames;
  std::unordered_set<const Node<T>*> visited;

  frames.push_back({loss.node(), 0});
  visited.insert(loss.node());
  while (!frames.empty()) {
    Frame& top = frames.back();
    if (top.next_parent < top.node->parents.size()) {
      Node<T>* parent = top.node->parents[top.next_parent++].get();
      if (parent->requires_grad && visited.insert(parent).second) {
        frames.push_back({parent, 0});
      }
    } else {
      order.push_back(top.node);
      frames.pop_back();
    }
  }

  for (Node<T>* n : order) {
    if (!n->is_leaf()) std::fill(n->grad.begin(), n->grad.end(), T(0));
  }
  loss.node()->grad[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (!n->is_leaf() && n->backward) n->backward(*n);
  }
}

}  // namespace intentcaps::ndiff

#endif  // INTENTCAPS_NDIFF_TENSOR_HPP_
