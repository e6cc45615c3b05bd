#ifndef INTENTCAPS_NDIFF_OPS_HPP_
#define INTENTCAPS_NDIFF_OPS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "intentcaps/ndiff/tensor.hpp"

namespace intentcaps::ndiff {

enum class Unary { kTanh, kSigmoid, kExp, kSquare, kRelu };

// Row-major boolean matrix; nonzero entries are kept.
struct Mask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> keep;

  bool at(std::size_t r, std::size_t c) const { return keep[r * cols + c] != 0; }
};

namespace detail {

template <typename T>
void require_matrix(const Tensor<T>& x, const char* what) {
  if (x.rank() != 2) {
    throw DimensionError(std::string(what) + " expects a matrix, got shape " + to_string(x.shape()));
  }
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": shapes " + to_string(a.shape()) + " and " +
                         to_string(b.shape()) + " differ");
  }
}

template <typename T>
void accumulate(Node<T>& parent, std::span<const T> delta) {
  if (!parent.requires_grad) return;
  for (std::size_t i = 0; i < delta.size(); ++i) parent.grad[i] += delta[i];
}

// out[n x p] += a[n x m] * b[m x p]
template <typename T>
void gemm_nn(const T* a, const T* b, T* out, std::size_t n, std::size_t m, std::size_t p) {
  for (std::size_t i = 0; i < n; ++i) {
    T* out_row = out + i * p;
    for (std::size_t k = 0; k < m; ++k) {
      const T aik = a[i * m + k];
      if (aik == T(0)) continue;
      const T* b_row = b + k * p;
      for (std::size_t j = 0; j < p; ++j) out_row[j] += aik * b_row[j];
    }
  }
}

// out[n x m] += g[n x p] * b[m x p]^T
template <typename T>
void gemm_nt(const T* g, const T* b, T* out, std::size_t n, std::size_t m, std::size_t p) {
  for (std::size_t i = 0; i < n; ++i) {
    const T* g_row = g + i * p;
    for (std::size_t k = 0; k < m; ++k) {
      const T* b_row = b + k * p;
      T acc = T(0);
      for (std::size_t j = 0; j < p; ++j) acc += g_row[j] * b_row[j];
      out[i * m + k] += acc;
    }
  }
}

// out[m x p] += a[n x m]^T * g[n x p]
template <typename T>
void gemm_tn(const T* a, const T* g, T* out, std::size_t n, std::size_t m, std::size_t p) {
  for (std::size_t i = 0; i < n; ++i) {
    const T* g_row = g + i * p;
    for (std::size_t k = 0; k < m; ++k) {
      const T aik = a[i * m + k];
      if (aik == T(0)) continue;
      T* out_row = out + k * p;
      for (std::size_t j = 0; j < p; ++j) out_row[j] += aik * g_row[j];
    }
  }
}

}  // namespace detail

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_matrix(a, "matmul");
  detail::require_matrix(b, "matmul");
  const std::size_t n = a.rows(), m = a.cols(), p = b.cols();
  if (b.rows() != m) {
    throw DimensionError("matmul: inner extents differ for " + to_string(a.shape()) + " x " +
                         to_string(b.shape()));
  }
  std::vector<T> out(n * p, T(0));
  detail::gemm_nn(a.values().data(), b.values().data(), out.data(), n, m, p);
  return make_op<T>("matmul", {n, p}, std::move(out), {a, b}, [n, m, p](Node<T>& self) {
    Node<T>& pa = *self.parents[0];
    Node<T>& pb = *self.parents[1];
    if (pa.requires_grad) detail::gemm_nt(self.grad.data(), pb.values.data(), pa.grad.data(), n, m, p);
    if (pb.requires_grad) detail::gemm_tn(pa.values.data(), self.grad.data(), pb.grad.data(), n, m, p);
  });
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& x) {
  detail::require_matrix(x, "transpose");
  const std::size_t r = x.rows(), c = x.cols();
  std::vector<T> out(r * c);
  auto v = x.values();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = v[i * c + j];
  return make_op<T>("transpose", {c, r}, std::move(out), {x}, [r, c](Node<T>& self) {
    Node<T>& p = *self.parents[0];
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) p.grad[i * c + j] += self.grad[j * r + i];
  });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (numel(shape) != x.size()) {
    throw DimensionError("reshape: cannot view " + to_string(x.shape()) + " as " + to_string(shape));
  }
  std::vector<T> out(x.values().begin(), x.values().end());
  return make_op<T>("reshape", std::move(shape), std::move(out), {x}, [](Node<T>& self) {
    detail::accumulate<T>(*self.parents[0], self.grad);
  });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_same_shape(a, b, "add");
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return make_op<T>("add", a.shape(), std::move(out), {a, b}, [](Node<T>& self) {
    detail::accumulate<T>(*self.parents[0], self.grad);
    detail::accumulate<T>(*self.parents[1], self.grad);
  });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_same_shape(a, b, "sub");
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return make_op<T>("sub", a.shape(), std::move(out), {a, b}, [](Node<T>& self) {
    detail::accumulate<T>(*self.parents[0], self.grad);
    Node<T>& pb = *self.parents[1];
    if (pb.requires_grad)
      for (std::size_t i = 0; i < self.grad.size(); ++i) pb.grad[i] -= self.grad[i];
  });
}

// Elementwise (Hadamard) product.
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_same_shape(a, b, "mul");
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return make_op<T>("mul", a.shape(), std::move(out), {a, b}, [](Node<T>& self) {
    Node<T>& pa = *self.parents[0];
    Node<T>& pb = *self.parents[1];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (pa.requires_grad) pa.grad[i] += self.grad[i] * pb.values[i];
      if (pb.requires_grad) pb.grad[i] += self.grad[i] * pa.values[i];
    }
  });
}

// scale * x + shift, elementwise.
template <typename T>
Tensor<T> affine(const Tensor<T>& x, T scale, T shift = T(0)) {
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * x[i] + shift;
  return make_op<T>("affine", x.shape(), std::move(out), {x}, [scale](Node<T>& self) {
    Node<T>& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += scale * self.grad[i];
  });
}

// x[n x m] + bias[1 x m] broadcast over rows.
template <typename T>
Tensor<T> add_row(const Tensor<T>& x, const Tensor<T>& bias) {
  detail::require_matrix(x, "add_row");
  const std::size_t n = x.rows(), m = x.cols();
  if (bias.size() != m) {
    throw DimensionError("add_row: bias " + to_string(bias.shape()) + " does not match " +
                         to_string(x.shape()));
  }
  std::vector<T> out(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] = x[i * m + j] + bias[j];
  return make_op<T>("add_row", {n, m}, std::move(out), {x, bias}, [n, m](Node<T>& self) {
    detail::accumulate<T>(*self.parents[0], self.grad);
    Node<T>& pb = *self.parents[1];
    if (pb.requires_grad)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) pb.grad[j] += self.grad[i * m + j];
  });
}

// x[n x m] scaled row-wise by col[n x 1].
template <typename T>
Tensor<T> mul_col(const Tensor<T>& x, const Tensor<T>& col) {
  detail::require_matrix(x, "mul_col");
  const std::size_t n = x.rows(), m = x.cols();
  if (col.size() != n) {
    throw DimensionError("mul_col: column " + to_string(col.shape()) + " does not match " +
                         to_string(x.shape()));
  }
  std::vector<T> out(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] = x[i * m + j] * col[i];
  return make_op<T>("mul_col", {n, m}, std::move(out), {x, col}, [n, m](Node<T>& self) {
    Node<T>& px = *self.parents[0];
    Node<T>& pc = *self.parents[1];
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        const T g = self.grad[i * m + j];
        if (px.requires_grad) px.grad[i * m + j] += g * pc.values[i];
        if (pc.requires_grad) pc.grad[i] += g * px.values[i * m + j];
      }
    }
  });
}

template <typename T>
Tensor<T> apply_unary(Unary f, const Tensor<T>& x) {
  std::vector<T> out(x.size());
  auto v = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    switch (f) {
      case Unary::kTanh: out[i] = std::tanh(v[i]); break;
      case Unary::kSigmoid: out[i] = T(1) / (T(1) + std::exp(-v[i])); break;
      case Unary::kExp: out[i] = std::exp(v[i]); break;
      case Unary::kSquare: out[i] = v[i] * v[i]; break;
      case Unary::kRelu: out[i] = v[i] > T(0) ? v[i] : T(0); break;
    }
  }
  static constexpr std::string_view kNames[] = {"tanh", "sigmoid", "exp", "square", "relu"};
  return make_op<T>(kNames[static_cast<int>(f)], x.shape(), std::move(out), {x}, [f](Node<T>& self) {
    Node<T>& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const T y = self.values[i];
      T d = T(0);
      switch (f) {
        case Unary::kTanh: d = T(1) - y * y; break;
        case Unary::kSigmoid: d = y * (T(1) - y); break;
        case Unary::kExp: d = y; break;
        case Unary::kSquare: d = T(2) * p.values[i]; break;
        case Unary::kRelu: d = p.values[i] > T(0) ? T(1) : T(0); break;
      }
      p.grad[i] += self.grad[i] * d;
    }
  });
}

template <typename T> Tensor<T> tanh(const Tensor<T>& x) { return apply_unary(Unary::kTanh, x); }
template <typename T> Tensor<T> sigmoid(const Tensor<T>& x) { return apply_unary(Unary::kSigmoid, x); }
template <typename T> Tensor<T> exp(const Tensor<T>& x) { return apply_unary(Unary::kExp, x); }
template <typename T> Tensor<T> square(const Tensor<T>& x) { return apply_unary(Unary::kSquare, x); }
template <typename T> Tensor<T> relu(const Tensor<T>& x) { return apply_unary(Unary::kRelu, x); }

// Softmax along each row, stabilized by subtracting the row max. Masked-out
// entries are exactly zero and receive no gradient.
template <typename T>
Tensor<T> row_softmax(const Tensor<T>& x, const Mask* mask = nullptr) {
  detail::require_matrix(x, "row_softmax");
  const std::size_t r = x.rows(), c = x.cols();
  if (mask && (mask->rows != r || mask->cols != c)) {
    throw DimensionError("row_softmax: mask [" + std::to_string(mask->rows) + "x" +
                         std::to_string(mask->cols) + "] does not match " + to_string(x.shape()));
  }
  std::vector<T> out(r * c, T(0));
  auto v = x.values();
  for (std::size_t i = 0; i < r; ++i) {
    T mx = -std::numeric_limits<T>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < c; ++j) {
      if (mask && !mask->at(i, j)) continue;
      mx = std::max(mx, v[i * c + j]);
      any = true;
    }
    if (!any) throw DegenerateRowError("row_softmax: row " + std::to_string(i) + " is fully masked");
    T total = T(0);
    for (std::size_t j = 0; j < c; ++j) {
      if (mask && !mask->at(i, j)) continue;
      out[i * c + j] = std::exp(v[i * c + j] - mx);
      total += out[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] /= total;
  }
  return make_op<T>("row_softmax", {r, c}, std::move(out), {x}, [r, c](Node<T>& self) {
    Node<T>& p = *self.parents[0];
    for (std::size_t i = 0; i < r; ++i) {
      T dot = T(0);
      for (std::size_t j = 0; j < c; ++j) dot += self.grad[i * c + j] * self.values[i * c + j];
      for (std::size_t j = 0; j < c; ++j) {
        const T y = self.values[i * c + j];
        p.grad[i * c + j] += y * (self.grad[i * c + j] - dot);
      }
    }
  });
}

// Juxtaposes tensors along `axis`. Rank-1 tensors concatenate along axis 0;
// matrices along axis 0 (rows) or 1 (columns).
template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: nothing to concatenate");
  const std::size_t rank = parts.front().rank();
  if (axis >= rank || rank > 2) {
    throw DimensionError("concat: axis " + std::to_string(axis) + " invalid for shape " +
                         to_string(parts.front().shape()));
  }
  Shape shape = parts.front().shape();
  shape[axis] = 0;
  for (const auto& t : parts) {
    bool ok = t.rank() == rank;
    for (std::size_t d = 0; ok && d < rank; ++d) ok = d == axis || t.shape()[d] == shape[d];
    if (!ok) {
      throw DimensionError("concat: shapes " + to_string(parts.front().shape()) + " and " +
                           to_string(t.shape()) + " disagree off axis " + std::to_string(axis));
    }
    shape[axis] += t.shape()[axis];
  }
  // Treat every tensor as [outer x inner] blocks; axis 1 of a matrix has
  // `rows` outer blocks, everything else has one.
  const std::size_t outer = (rank == 2 && axis == 1) ? shape[0] : 1;
  std::vector<std::size_t> widths;
  widths.reserve(parts.size());
  for (const auto& t : parts) widths.push_back(t.size() / outer);
  const std::size_t total_width = numel(shape) / outer;

  std::vector<T> out(numel(shape));
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto v = parts[k].values();
    for (std::size_t o = 0; o < outer; ++o)
      std::copy_n(v.begin() + o * widths[k], widths[k], out.begin() + o * total_width + offset);
    offset += widths[k];
  }
  return make_op<T>("concat", std::move(shape), std::move(out), parts,
                    [outer, widths, total_width](Node<T>& self) {
                      std::size_t offset = 0;
                      for (std::size_t k = 0; k < self.parents.size(); ++k) {
                        Node<T>& p = *self.parents[k];
                        if (p.requires_grad) {
                          for (std::size_t o = 0; o < outer; ++o)
                            for (std::size_t j = 0; j < widths[k]; ++j)
                              p.grad[o * widths[k] + j] += self.grad[o * total_width + offset + j];
                        }
                        offset += widths[k];
                      }
                    });
}

template <typename T>
Tensor<T> concat(const Tensor<T>& a, const Tensor<T>& b, std::size_t axis) {
  return concat(std::vector<Tensor<T>>{a, b}, axis);
}

// Rows [begin, end) of a matrix, or columns when axis == 1.
template <typename T>
Tensor<T> slice(const Tensor<T>& x, std::size_t axis, std::size_t begin, std::size_t end) {
  detail::require_matrix(x, "slice");
  const std::size_t r = x.rows(), c = x.cols();
  const std::size_t extent = axis == 0 ? r : c;
  if (axis > 1 || begin >= end || end > extent) {
    throw DimensionError("slice: range [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") on axis " + std::to_string(axis) + " of " + to_string(x.shape()));
  }
  const std::size_t w = end - begin;
  Shape shape = axis == 0 ? Shape{w, c} : Shape{r, w};
  std::vector<T> out(numel(shape));
  auto v = x.values();
  if (axis == 0) {
    std::copy(v.begin() + begin * c, v.begin() + end * c, out.begin());
  } else {
    for (std::size_t i = 0; i < r; ++i)
      std::copy_n(v.begin() + i * c + begin, w, out.begin() + i * w);
  }
  return make_op<T>("slice", std::move(shape), std::move(out), {x},
                    [axis, begin, w, r, c](Node<T>& self) {
                      Node<T>& p = *self.parents[0];
                      if (axis == 0) {
                        for (std::size_t i = 0; i < self.grad.size(); ++i)
                          p.grad[begin * c + i] += self.grad[i];
                      } else {
                        for (std::size_t i = 0; i < r; ++i)
                          for (std::size_t j = 0; j < w; ++j)
                            p.grad[i * c + begin + j] += self.grad[i * w + j];
                      }
                    });
}

// Stacks table rows selected by ids; the backward pass scatter-adds.
template <typename T>
Tensor<T> gather_rows(const Tensor<T>& table, std::span<const std::size_t> ids) {
  detail::require_matrix(table, "gather_rows");
  if (ids.empty()) throw DimensionError("gather_rows: empty id list");
  const std::size_t d = table.cols();
  std::vector<T> out(ids.size() * d);
  auto v = table.values();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= table.rows()) {
      throw DimensionError("gather_rows: id " + std::to_string(ids[i]) + " outside table " +
                           to_string(table.shape()));
    }
    std::copy_n(v.begin() + ids[i] * d, d, out.begin() + i * d);
  }
  std::vector<std::size_t> rows(ids.begin(), ids.end());
  return make_op<T>("gather_rows", {ids.size(), d}, std::move(out), {table},
                    [rows = std::move(rows), d](Node<T>& self) {
                      Node<T>& p = *self.parents[0];
                      for (std::size_t i = 0; i < rows.size(); ++i)
                        for (std::size_t j = 0; j < d; ++j) p.grad[rows[i] * d + j] += self.grad[i * d + j];
                    });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T total = T(0);
  for (T v : x.values()) total += v;
  return make_op<T>("sum", {1}, {total}, {x}, [](Node<T>& self) {
    Node<T>& p = *self.parents[0];
    for (T& g : p.grad) g += self.grad[0];
  });
}

// Per-row sums of a matrix, as an [n x 1] column.
template <typename T>
Tensor<T> row_sum(const Tensor<T>& x) {
  detail::require_matrix(x, "row_sum");
  const std::size_t r = x.rows(), c = x.cols();
  std::vector<T> out(r, T(0));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i] += x[i * c + j];
  return make_op<T>("row_sum", {r, 1}, std::move(out), {x}, [r, c](Node<T>& self) {
    Node<T>& p = *self.parents[0];
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) p.grad[i * c + j] += self.grad[i];
  });
}

// Sum of squared entries.
template <typename T>
Tensor<T> frobenius_sq(const Tensor<T>& x) {
  T total = T(0);
  for (T v : x.values()) total += v * v;
  return make_op<T>("frobenius_sq", {1}, {total}, {x}, [](Node<T>& self) {
    Node<T>& p = *self.parents[0];
    for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += T(2) * p.values[i] * self.grad[0];
  });
}

// Euclidean norm of each row as an [n x 1] column. The gradient at a zero row
// is taken as zero (subgradient).
template <typename T>
Tensor<T> row_norm(const Tensor<T>& x) {
  detail::require_matrix(x, "row_norm");
  const std::size_t r = x.rows(), c = x.cols();
  std::vector<T> out(r, T(0));
  for (std::size_t i = 0; i < r; ++i) {
    T acc = T(0);
    for (std::size_t j = 0; j < c; ++j) acc += x[i * c + j] * x[i * c + j];
    out[i] = std::sqrt(acc);
  }
  return make_op<T>("row_norm", {r, 1}, std::move(out), {x}, [r, c](Node<T>& self) {
    Node<T>& p = *self.parents[0];
    for (std::size_t i = 0; i < r; ++i) {
      const T n = self.values[i];
      if (n <= T(0)) continue;
      const T k = self.grad[i] / n;
      for (std::size_t j = 0; j < c; ++j) p.grad[i * c + j] += k * p.values[i * c + j];
    }
  });
}

}  // namespace intentcaps::ndiff

#endif  // INTENTCAPS_NDIFF_OPS_HPP_
