#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "semharq/tensor.hpp"

namespace semharq {

// Reverse-mode tape. Each op records its output value and a closure that
// scatters the output gradient back to the parents. Graphs are built fresh
// per forward pass and thrown away after backward().
class Tape {
 public:
  using NodeId = int;

  NodeId constant(Tensor value) { return push(std::move(value), {}, nullptr); }

  // Leaf bound to a named parameter; gradients accumulate under that name.
  NodeId param(const std::string& name, const Tensor& value) {
    NodeId id = push(value, {}, nullptr);
    param_of_[id] = name;
    return id;
  }

  const Tensor& val(NodeId id) const { return nodes_[id].value; }
  const Tensor& grad(NodeId id) const { return nodes_[id].grad; }

  // ---- elementwise and shape ops ----

  NodeId add(NodeId a, NodeId b) {
    check_same_shape(a, b);
    Tensor out = val(a);
    for (size_t i = 0; i < out.size(); ++i) out.v[i] += val(b).v[i];
    return push(std::move(out), {a, b}, [](Tape& t, NodeId id) {
      const Tensor& g = t.nodes_[id].grad;
      t.accumulate(t.nodes_[id].parents[0], g.v);
      t.accumulate(t.nodes_[id].parents[1], g.v);
    });
  }

  NodeId scale(NodeId a, double c) {
    Tensor out = val(a);
    for (double& x : out.v) x *= c;
    return push(std::move(out), {a}, [c](Tape& t, NodeId id) {
      const Tensor& g = t.nodes_[id].grad;
      std::vector<double> gx(g.v.size());
      for (size_t i = 0; i < gx.size(); ++i) gx[i] = g.v[i] * c;
      t.accumulate(t.nodes_[id].parents[0], gx);
    });
  }

  NodeId reshape(NodeId a, std::vector<size_t> shape) {
    Tensor out(std::move(shape), val(a).v);
    return push(std::move(out), {a}, [](Tape& t, NodeId id) {
      t.accumulate(t.nodes_[id].parents[0], t.nodes_[id].grad.v);
    });
  }

  NodeId concat_cols(const std::vector<NodeId>& parts) {
    if (parts.empty()) throw std::invalid_argument("empty concat");
    size_t rows = val(parts[0]).rows();
    size_t total_cols = 0;
    for (NodeId p : parts) {
      if (val(p).rows() != rows) throw std::invalid_argument("row mismatch in concat");
      total_cols += val(p).cols();
    }
    Tensor out = Tensor::zeros({rows, total_cols});
    size_t offset = 0;
    for (NodeId p : parts) {
      const Tensor& x = val(p);
      for (size_t r = 0; r < rows; ++r)
        for (size_t c = 0; c < x.cols(); ++c) out.at(r, offset + c) = x.at(r, c);
      offset += x.cols();
    }
    return push(std::move(out), parts, [](Tape& t, NodeId id) {
      const Tensor& g = t.nodes_[id].grad;
      size_t offset = 0;
      for (NodeId p : t.nodes_[id].parents) {
        const Tensor& x = t.val(p);
        std::vector<double> gx(x.size());
        for (size_t r = 0; r < x.rows(); ++r)
          for (size_t c = 0; c < x.cols(); ++c) gx[r * x.cols() + c] = g.at(r, offset + c);
        t.accumulate(p, gx);
        offset += x.cols();
      }
    });
  }

  NodeId slice_cols(NodeId a, size_t c0, size_t c1) {
    const Tensor& x = val(a);
    if (c0 >= c1 || c1 > x.cols()) throw std::invalid_argument("bad column slice");
    Tensor out = Tensor::zeros({x.rows(), c1 - c0});
    for (size_t r = 0; r < x.rows(); ++r)
      for (size_t c = c0; c < c1; ++c) out.at(r, c - c0) = x.at(r, c);
    return push(std::move(out), {a}, [c0, c1](Tape& t, NodeId id) {
      const Tensor& g = t.nodes_[id].grad;
      const Tensor& x = t.val(t.nodes_[id].parents[0]);
      std::vector<double> gx(x.size(), 0.0);
      for (size_t r = 0; r < x.rows(); ++r)
        for (size_t c = c0; c < c1; ++c) gx[r * x.cols() + c] = g.at(r, c - c0);
      t.accumulate(t.nodes_[id].parents[0], gx);
    });
  }

  // Zeroes rows at and beyond `row0` (used for length masking of bits).
  NodeId zero_rows_from(NodeId a, size_t row0) {
    Tensor out = val(a);
    for (size_t r = row0; r < out.rows(); ++r)
      for (size_t c = 0; c < out.cols(); ++c) out.at(r, c) = 0.0;
    return push(std::move(out), {a}, [row0](Tape& t, NodeId id) {
      const Tensor& g = t.nodes_[id].grad;
      std::vector<double> gx(g.v.size(), 0.0);
      for (size_t r = 0; r < row0 && r < g.rows(); ++r)
        for (size_t c = 0; c < g.cols(); ++c) gx[r * g.cols() + c] = g.at(r, c);
      t.accumulate(t.nodes_[id].parents[0], gx);
    });
  }

  // ---- linear algebra ----

  NodeId matmul(NodeId a, NodeId b) {
    const Tensor& x = val(a);
    const Tensor& y = val(b);
    if (x.cols() != y.rows()) throw std::invalid_argument("matmul shape mismatch");
    Tensor out = Tensor::zeros({x.rows(), y.cols()});
    matmul_into(out, x, y, false, false);
    return push(std::move(out), {a, b}, [](Tape& t, NodeId id) {
      NodeId a = t.nodes_[id].parents[0], b = t.nodes_[id].parents[1];
      const Tensor& g = t.nodes_[id].grad;
      const Tensor& x = t.val(a);
      const Tensor& y = t.val(b);
      Tensor ga = Tensor::zeros({x.rows(), x.cols()});
      matmul_into(ga, g, y, false, true);  // dX = dZ Y^T
      Tensor gb = Tensor::zeros({y.rows(), y.cols()});
      matmul_into(gb, x, g, true, false);  // dY = X^T dZ
      t.accumulate(a, ga.v);
      t.accumulate(b, gb.v);
    });
  }

  // a (r x c) times transpose of b (n x c) -> (r x n); used for attention scores.
  NodeId matmul_nt(NodeId a, NodeId b) {
    const Tensor& x = val(a);
    const Tensor& y = val(b);
    if (x.cols() != y.cols()) throw std::invalid_argument("matmul_nt shape mismatch");
    Tensor out = Tensor::zeros({x.rows(), y.rows()});
    matmul_into(out, x, y, false, false, true);
    return push(std::move(out), {a, b}, [](Tape& t, NodeId id) {
      NodeId a = t.nodes_[id].parents[0], b = t.nodes_[id].parents[1];
      const Tensor& g = t.nodes_[id].grad;
      const Tensor& x = t.val(a);
      const Tensor& y = t.val(b);
      Tensor ga = Tensor::zeros({x.rows(), x.cols()});
      matmul_into(ga, g, y, false, false);  // dX = dZ Y
      Tensor gb = Tensor::zeros({y.rows(), y.cols()});
      matmul_into(gb, g, x, true, false);  // dY = dZ^T X
      t.accumulate(a, ga.v);
      t.accumulate(b, gb.v);
    });
  }

  // Adds a row vector b to every row of x.
  NodeId add_row_bias(NodeId a, NodeId bias) {
    const Tensor& x = val(a);
    const Tensor& b = val(bias);
    if (b.size() != x.cols()) throw std::invalid_argument("bias width mismatch");
    Tensor out = x;
    for (size_t r = 0; r < x.rows(); ++r)
      for (size_t c = 0; c < x.cols(); ++c) out.at(r, c) += b.v[c];
    return push(std::move(out), {a, bias}, [](Tape& t, NodeId id) {
      const Tensor& g = t.nodes_[id].grad;
      t.accumulate(t.nodes_[id].parents[0], g.v);
      std::vector<double> gb(g.cols(), 0.0);
      for (size_t r = 0; r < g.rows(); ++r)
        for (size_t c = 0; c < g.cols(); ++c) gb[c] += g.at(r, c);
      t.accumulate(t.nodes_[id].parents[1], gb);
    });
  }

  // ---- nonlinearities ----

  NodeId relu(NodeId a) {
    Tensor out = val(a);
    for (double& x : out.v) x = x > 0.0 ? x : 0.0;
    return push(std::move(out), {a}, [](Tape& t, NodeId id) {
      const Tensor& g = t.nodes_[id].grad;
      const Tensor& x = t.val(t.nodes_[id].parents[0]);
      std::vector<double> gx(g.v.size());
      for (size_t i = 0; i < gx.size(); ++i) gx[i] = x.v[i] > 0.0 ? g.v[i] : 0.0;
      t.accumulate(t.nodes_[id].parents[0], gx);
    });
  }

  NodeId sigmoid(NodeId a) {
    Tensor out = val(a);
    for (double& x : out.v) x = 1.0 / (1.0 + std::exp(-x));
    return push(std::move(out), {a}, [](Tape& t, NodeId id) {
      const Tensor& g = t.nodes_[id].grad;
      const Tensor& y = t.nodes_[id].value;
      std::vector<double> gx(g.v.size());
      for (size_t i = 0; i < gx.size(); ++i) gx[i] = g.v[i] * y.v[i] * (1.0 - y.v[i]);
      t.accumulate(t.nodes_[id].parents[0], gx);
    });
  }

  // Row softmax; keys at column `valid_cols` and beyond are masked out when
  // valid_cols > 0 (pad positions receive zero attention weight).
  NodeId softmax_rows(NodeId a, size_t valid_cols = 0) {
    const Tensor& x = val(a);
    size_t limit = valid_cols == 0 ? x.cols() : valid_cols;
    if (limit > x.cols()) throw std::invalid_argument("mask exceeds width");
    Tensor out = Tensor::zeros({x.rows(), x.cols()});
    for (size_t r = 0; r < x.rows(); ++r) {
      double mx = -HUGE_VAL;
      for (size_t c = 0; c < limit; ++c) mx = std::max(mx, x.at(r, c));
      double sum = 0.0;
      for (size_t c = 0; c < limit; ++c) {
        out.at(r, c) = std::exp(x.at(r, c) - mx);
        sum += out.at(r, c);
      }
      for (size_t c = 0; c < limit; ++c) out.at(r, c) /= sum;
    }
    return push(std::move(out), {a}, [limit](Tape& t, NodeId id) {
      const Tensor& g = t.nodes_[id].grad;
      const Tensor& y = t.nodes_[id].value;
      std::vector<double> gx(g.v.size(), 0.0);
      for (size_t r = 0; r < y.rows(); ++r) {
        double dot = 0.0;
        for (size_t c = 0; c < limit; ++c) dot += g.at(r, c) * y.at(r, c);
        for (size_t c = 0; c < limit; ++c)
          gx[r * y.cols() + c] = y.at(r, c) * (g.at(r, c) - dot);
      }
      t.accumulate(t.nodes_[id].parents[0], gx);
    });
  }

  // Per-row normalization with learnable affine. Biased variance, eps 1e-5.
  NodeId layer_norm(NodeId a, NodeId gamma, NodeId beta) {
    constexpr double kEps = 1e-5;
    const Tensor& x = val(a);
    size_t n = x.cols();
    if (val(gamma).size() != n || val(beta).size() != n)
      throw std::invalid_argument("layer norm affine width mismatch");
    Tensor out = Tensor::zeros({x.rows(), n});
    for (size_t r = 0; r < x.rows(); ++r) {
      double mean = 0.0;
      for (size_t c = 0; c < n; ++c) mean += x.at(r, c);
      mean /= n;
      double var = 0.0;
      for (size_t c = 0; c < n; ++c) var += (x.at(r, c) - mean) * (x.at(r, c) - mean);
      var /= n;
      double inv_std = 1.0 / std::sqrt(var + kEps);
      for (size_t c = 0; c < n; ++c)
        out.at(r, c) = (x.at(r, c) - mean) * inv_std * val(gamma).v[c] + val(beta).v[c];
    }
    return push(std::move(out), {a, gamma, beta}, [](Tape& t, NodeId id) {
      constexpr double kEps = 1e-5;
      NodeId a = t.nodes_[id].parents[0];
      NodeId gamma = t.nodes_[id].parents[1];
      NodeId beta = t.nodes_[id].parents[2];
      const Tensor& g = t.nodes_[id].grad;
      const Tensor& x = t.val(a);
      const Tensor& gm = t.val(gamma);
      size_t n = x.cols();
      std::vector<double> gx(x.size(), 0.0), ggamma(n, 0.0), gbeta(n, 0.0);
      for (size_t r = 0; r < x.rows(); ++r) {
        double mean = 0.0;
        for (size_t c = 0; c < n; ++c) mean += x.at(r, c);
        mean /= n;
        double var = 0.0;
        for (size_t c = 0; c < n; ++c) var += (x.at(r, c) - mean) * (x.at(r, c) - mean);
        var /= n;
        double inv_std = 1.0 / std::sqrt(var + kEps);
        // xhat = (x - mean) * inv_std; dxhat = g * gamma
        double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
        std::vector<double> xhat(n), dxhat(n);
        for (size_t c = 0; c < n; ++c) {
          xhat[c] = (x.at(r, c) - mean) * inv_std;
          dxhat[c] = g.at(r, c) * gm.v[c];
          sum_dxhat += dxhat[c];
          sum_dxhat_xhat += dxhat[c] * xhat[c];
          ggamma[c] += g.at(r, c) * xhat[c];
          gbeta[c] += g.at(r, c);
        }
        for (size_t c = 0; c < n; ++c)
          gx[r * n + c] =
              inv_std * (dxhat[c] - sum_dxhat / n - xhat[c] * sum_dxhat_xhat / n);
      }
      t.accumulate(a, gx);
      t.accumulate(gamma, ggamma);
      t.accumulate(beta, gbeta);
    });
  }

  // ---- quantization and channel ----

  // Forward: 1 if x >= 0 else 0. Backward: straight-through, gradient
  // clipped to zero where |x| > 1.
  NodeId quantize_ste(NodeId a) {
    Tensor out = val(a);
    for (double& x : out.v) x = x >= 0.0 ? 1.0 : 0.0;
    return push(std::move(out), {a}, [](Tape& t, NodeId id) {
      const Tensor& g = t.nodes_[id].grad;
      const Tensor& x = t.val(t.nodes_[id].parents[0]);
      std::vector<double> gx(g.v.size());
      for (size_t i = 0; i < gx.size(); ++i)
        gx[i] = std::abs(x.v[i]) <= 1.0 ? g.v[i] : 0.0;
      t.accumulate(t.nodes_[id].parents[0], gx);
    });
  }

  // XOR with a fixed 0/1 mask: y = x (1 - 2 mask) + mask. Exact affine
  // gradient (sign flip at flipped positions).
  NodeId bit_flip(NodeId a, const std::vector<uint8_t>& mask) {
    const Tensor& x = val(a);
    if (mask.size() != x.size()) throw std::invalid_argument("flip mask length mismatch");
    Tensor out = x;
    for (size_t i = 0; i < out.size(); ++i)
      if (mask[i]) out.v[i] = 1.0 - out.v[i];
    return push(std::move(out), {a}, [mask](Tape& t, NodeId id) {
      const Tensor& g = t.nodes_[id].grad;
      std::vector<double> gx(g.v.size());
      for (size_t i = 0; i < gx.size(); ++i) gx[i] = mask[i] ? -g.v[i] : g.v[i];
      t.accumulate(t.nodes_[id].parents[0], gx);
    });
  }

  // ---- embeddings and losses ----

  // Row i of the output is table[ids[i]] + pe[i]; pe is a constant.
  NodeId embed_rows(const std::vector<int>& ids, NodeId table, const Tensor& pe) {
    const Tensor& psi = val(table);
    if (pe.rows() != ids.size() || pe.cols() != psi.cols())
      throw std::invalid_argument("position encoding shape mismatch");
    Tensor out = Tensor::zeros({ids.size(), psi.cols()});
    for (size_t r = 0; r < ids.size(); ++r) {
      int id = ids[r];
      if (id < 0 || static_cast<size_t>(id) >= psi.rows())
        throw std::invalid_argument("word id outside embedding table");
      for (size_t c = 0; c < psi.cols(); ++c) out.at(r, c) = psi.at(id, c) + pe.at(r, c);
    }
    return push(std::move(out), {table}, [ids](Tape& t, NodeId id) {
      const Tensor& g = t.nodes_[id].grad;
      const Tensor& psi = t.val(t.nodes_[id].parents[0]);
      std::vector<double> gp(psi.size(), 0.0);
      for (size_t r = 0; r < ids.size(); ++r)
        for (size_t c = 0; c < psi.cols(); ++c)
          gp[ids[r] * psi.cols() + c] += g.at(r, c);
      t.accumulate(t.nodes_[id].parents[0], gp);
    });
  }

  // Mean negative log-likelihood of target ids over the first `valid_rows`
  // rows of a row-stochastic matrix. Probabilities clamp at 1e-9.
  NodeId cross_entropy_rows(NodeId probs, const std::vector<int>& targets, size_t valid_rows) {
    const Tensor& p = val(probs);
    if (valid_rows == 0 || valid_rows > p.rows() || targets.size() < valid_rows)
      throw std::invalid_argument("bad cross entropy extent");
    double loss = 0.0;
    for (size_t r = 0; r < valid_rows; ++r)
      loss -= std::log(std::max(p.at(r, targets[r]), kEps));
    loss /= static_cast<double>(valid_rows);
    return push(Tensor({1}, {loss}), {probs}, [targets, valid_rows](Tape& t, NodeId id) {
      const double g = t.nodes_[id].grad.v[0];
      const Tensor& p = t.val(t.nodes_[id].parents[0]);
      std::vector<double> gp(p.size(), 0.0);
      for (size_t r = 0; r < valid_rows; ++r) {
        double pv = std::max(p.at(r, targets[r]), kEps);
        gp[r * p.cols() + targets[r]] = -g / (pv * static_cast<double>(valid_rows));
      }
      t.accumulate(t.nodes_[id].parents[0], gp);
    });
  }

  NodeId mse(NodeId a, NodeId b) {
    check_same_shape(a, b);
    const Tensor& x = val(a);
    const Tensor& y = val(b);
    double loss = 0.0;
    for (size_t i = 0; i < x.size(); ++i) loss += (x.v[i] - y.v[i]) * (x.v[i] - y.v[i]);
    loss /= static_cast<double>(x.size());
    return push(Tensor({1}, {loss}), {a, b}, [](Tape& t, NodeId id) {
      const double g = t.nodes_[id].grad.v[0];
      const Tensor& x = t.val(t.nodes_[id].parents[0]);
      const Tensor& y = t.val(t.nodes_[id].parents[1]);
      std::vector<double> ga(x.size()), gb(x.size());
      double scale = 2.0 * g / static_cast<double>(x.size());
      for (size_t i = 0; i < x.size(); ++i) {
        ga[i] = scale * (x.v[i] - y.v[i]);
        gb[i] = -ga[i];
      }
      t.accumulate(t.nodes_[id].parents[0], ga);
      t.accumulate(t.nodes_[id].parents[1], gb);
    });
  }

  // -[y log p + (1-y) log(1-p)] for a scalar probability node.
  NodeId binary_cross_entropy(NodeId prob, double label) {
    double p = std::min(std::max(val(prob).v[0], kEps), 1.0 - kEps);
    double loss = -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
    return push(Tensor({1}, {loss}), {prob}, [label](Tape& t, NodeId id) {
      const double g = t.nodes_[id].grad.v[0];
      double p = std::min(std::max(t.val(t.nodes_[id].parents[0]).v[0], kEps), 1.0 - kEps);
      std::vector<double> gp{g * ((1.0 - label) / (1.0 - p) - label / p)};
      t.accumulate(t.nodes_[id].parents[0], gp);
    });
  }

  // ---- backward ----

  void backward(NodeId root) {
    if (val(root).size() != 1) throw std::invalid_argument("backward needs a scalar root");
    for (auto& node : nodes_) node.grad = Tensor::zeros(node.value.shape);
    nodes_[root].grad.v[0] = 1.0;
    for (NodeId id = root; id >= 0; --id)
      if (nodes_[id].back) nodes_[id].back(*this, id);
  }

  // Gradients of all bound parameters, keyed by name, after backward().
  std::map<std::string, Tensor> param_grads() const {
    std::map<std::string, Tensor> out;
    for (const auto& [id, name] : param_of_) {
      auto it = out.find(name);
      if (it == out.end()) {
        out.emplace(name, nodes_[id].grad);
      } else {
        for (size_t i = 0; i < it->second.size(); ++i)
          it->second.v[i] += nodes_[id].grad.v[i];
      }
    }
    return out;
  }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<NodeId> parents;
    std::function<void(Tape&, NodeId)> back;
  };

  static constexpr double kEps = 1e-9;

  NodeId push(Tensor value, std::vector<NodeId> parents,
              std::function<void(Tape&, NodeId)> back) {
    nodes_.push_back({std::move(value), Tensor(), std::move(parents), std::move(back)});
    return static_cast<NodeId>(nodes_.size()) - 1;
  }

  void accumulate(NodeId id, const std::vector<double>& g) {
    Tensor& target = nodes_[id].grad;
    if (g.size() != target.size()) throw std::logic_error("gradient size mismatch");
    for (size_t i = 0; i < g.size(); ++i) target.v[i] += g[i];
  }

  void check_same_shape(NodeId a, NodeId b) const {
    if (!val(a).same_shape(val(b))) throw std::invalid_argument("shape mismatch");
  }

  static void matmul_into(Tensor& out, const Tensor& a, const Tensor& b, bool transpose_a,
                          bool transpose_b, bool b_as_nt = false) {
    // out += op(a) * op(b); b_as_nt means b is used row-against-row (a b^T).
    size_t ar = transpose_a ? a.cols() : a.rows();
    size_t ac = transpose_a ? a.rows() : a.cols();
    auto aat = [&](size_t i, size_t j) { return transpose_a ? a.at(j, i) : a.at(i, j); };
    if (b_as_nt) {
      for (size_t i = 0; i < ar; ++i)
        for (size_t j = 0; j < b.rows(); ++j) {
          double acc = 0.0;
          for (size_t t = 0; t < ac; ++t) acc += aat(i, t) * b.at(j, t);
          out.at(i, j) = acc;
        }
      return;
    }
    size_t bc = transpose_b ? b.rows() : b.cols();
    auto bat = [&](size_t i, size_t j) { return transpose_b ? b.at(j, i) : b.at(i, j); };
    for (size_t i = 0; i < ar; ++i)
      for (size_t t = 0; t < ac; ++t) {
        double av = aat(i, t);
        if (av == 0.0) continue;
        for (size_t j = 0; j < bc; ++j) out.at(i, j) += av * bat(t, j);
      }
  }

  std::vector<Node> nodes_;
  std::map<NodeId, std::string> param_of_;
};

}  // namespace semharq
