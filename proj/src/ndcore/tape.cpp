#include "phyzzy/ndcore/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace phyzzy::ndcore {

namespace {

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                shape_str(a.shape()) + " vs " +
                                shape_str(b.shape()));
  }
}

// largest double below 1, used to keep sigmoid strictly inside (0,1)
const double kBelowOne = std::nextafter(1.0, 0.0);
const double kAboveZero = std::numeric_limits<double>::min();

double stable_sigmoid(double x) {
  double y = 0.0;
  if (x >= 0.0) {
    y = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    y = e / (1.0 + e);
  }
  return std::min(std::max(y, kAboveZero), kBelowOne);
}

}  // namespace

Tensor Tape::make_output(Shape shape, const Tensor& a) {
  Tensor out = Tensor::zeros(std::move(shape));
  if (grad_enabled_ && a.requires_grad()) {
    out = Tensor::zeros(out.shape(), true);
  }
  return out;
}

Tensor Tape::make_output(Shape shape, const Tensor& a, const Tensor& b) {
  Tensor out = Tensor::zeros(std::move(shape));
  if (grad_enabled_ && (a.requires_grad() || b.requires_grad())) {
    out = Tensor::zeros(out.shape(), true);
  }
  return out;
}

Tensor Tape::make_output(Shape shape, const Tensor& a, const Tensor& b,
                         const Tensor& c) {
  Tensor out = Tensor::zeros(std::move(shape));
  if (grad_enabled_ &&
      (a.requires_grad() || b.requires_grad() || c.requires_grad())) {
    out = Tensor::zeros(out.shape(), true);
  }
  return out;
}

void Tape::record(const char* op, std::function<void()> fn) {
  nodes_.push_back(Node{op, std::move(fn)});
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
  check_same_shape("add", a, b);
  Tensor out = make_output(a.shape(), a, b);
  auto ov = out.mutable_values();
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + bv[i];
  if (out.requires_grad()) {
    record("add", [a, b, out]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      if (a.requires_grad()) {
        auto ga = a.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      }
    });
  }
  return out;
}

Tensor Tape::sub(const Tensor& a, const Tensor& b) {
  check_same_shape("sub", a, b);
  Tensor out = make_output(a.shape(), a, b);
  auto ov = out.mutable_values();
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] - bv[i];
  if (out.requires_grad()) {
    record("sub", [a, b, out]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      if (a.requires_grad()) {
        auto ga = a.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
      }
    });
  }
  return out;
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
  check_same_shape("mul", a, b);
  Tensor out = make_output(a.shape(), a, b);
  auto ov = out.mutable_values();
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
  if (out.requires_grad()) {
    record("mul", [a, b, out]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      const auto av = a.values();
      const auto bv = b.values();
      if (a.requires_grad()) {
        auto ga = a.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
      }
    });
  }
  return out;
}

Tensor Tape::div(const Tensor& a, const Tensor& b) {
  check_same_shape("div", a, b);
  Tensor out = make_output(a.shape(), a, b);
  auto ov = out.mutable_values();
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] / bv[i];
  if (out.requires_grad()) {
    record("div", [a, b, out]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      const auto av = a.values();
      const auto bv = b.values();
      if (a.requires_grad()) {
        auto ga = a.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / bv[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) {
          gb[i] -= g[i] * av[i] / (bv[i] * bv[i]);
        }
      }
    });
  }
  return out;
}

Tensor Tape::add_scalar(const Tensor& a, double c) {
  Tensor out = make_output(a.shape(), a);
  auto ov = out.mutable_values();
  const auto av = a.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + c;
  if (out.requires_grad()) {
    record("add_scalar", [a, out]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
  }
  return out;
}

Tensor Tape::mul_scalar(const Tensor& a, double c) {
  Tensor out = make_output(a.shape(), a);
  auto ov = out.mutable_values();
  const auto av = a.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * c;
  if (out.requires_grad()) {
    record("mul_scalar", [a, out, c]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * c;
    });
  }
  return out;
}

Tensor Tape::log(const Tensor& a) {
  const auto av = a.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    if (!(av[i] > 0.0)) {
      throw std::invalid_argument(
          "log: non-positive input " + std::to_string(av[i]) +
          " at index " + std::to_string(i) + "; clamp before taking log");
    }
  }
  Tensor out = make_output(a.shape(), a);
  auto ov = out.mutable_values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = std::log(av[i]);
  if (out.requires_grad()) {
    record("log", [a, out]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      const auto av = a.values();
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / av[i];
    });
  }
  return out;
}

Tensor Tape::exp(const Tensor& a) {
  Tensor out = make_output(a.shape(), a);
  auto ov = out.mutable_values();
  const auto av = a.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = std::exp(av[i]);
  if (out.requires_grad()) {
    record("exp", [a, out]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      const auto ov = out.values();
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * ov[i];
    });
  }
  return out;
}

Tensor Tape::sqrt(const Tensor& a) {
  const auto av = a.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    if (!(av[i] > 0.0)) {
      throw std::invalid_argument(
          "sqrt: non-positive input " + std::to_string(av[i]) +
          " at index " + std::to_string(i) + "; clamp before taking sqrt");
    }
  }
  Tensor out = make_output(a.shape(), a);
  auto ov = out.mutable_values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = std::sqrt(av[i]);
  if (out.requires_grad()) {
    record("sqrt", [a, out]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      const auto ov = out.values();
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i] * 0.5 / ov[i];
      }
    });
  }
  return out;
}

Tensor Tape::sigmoid(const Tensor& a) {
  Tensor out = make_output(a.shape(), a);
  auto ov = out.mutable_values();
  const auto av = a.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = stable_sigmoid(av[i]);
  if (out.requires_grad()) {
    record("sigmoid", [a, out]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      const auto ov = out.values();
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i] * ov[i] * (1.0 - ov[i]);
      }
    });
  }
  return out;
}

Tensor Tape::leaky_relu(const Tensor& a, double slope) {
  Tensor out = make_output(a.shape(), a);
  auto ov = out.mutable_values();
  const auto av = a.values();
  for (std::size_t i = 0; i < ov.size(); ++i) {
    ov[i] = av[i] >= 0.0 ? av[i] : slope * av[i];
  }
  if (out.requires_grad()) {
    record("leaky_relu", [a, out, slope]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      const auto av = a.values();
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i] * (av[i] >= 0.0 ? 1.0 : slope);
      }
    });
  }
  return out;
}

Tensor Tape::clamp(const Tensor& a, double lo, double hi) {
  if (!(lo <= hi)) {
    throw std::invalid_argument("clamp: lo " + std::to_string(lo) +
                                " exceeds hi " + std::to_string(hi));
  }
  Tensor out = make_output(a.shape(), a);
  auto ov = out.mutable_values();
  const auto av = a.values();
  for (std::size_t i = 0; i < ov.size(); ++i) {
    ov[i] = std::min(std::max(av[i], lo), hi);
  }
  if (out.requires_grad()) {
    record("clamp", [a, out, lo, hi]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      const auto av = a.values();
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (av[i] >= lo && av[i] <= hi) ga[i] += g[i];
      }
    });
  }
  return out;
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || (b.rank() != 2 && b.rank() != 1)) {
    throw std::invalid_argument("matmul: unsupported ranks " +
                                shape_str(a.shape()) + " and " +
                                shape_str(b.shape()));
  }
  const std::size_t m = a.shape()[0];
  const std::size_t k = a.shape()[1];
  const bool vec = b.rank() == 1;
  const std::size_t bk = b.shape()[0];
  const std::size_t n = vec ? 1 : b.shape()[1];
  if (bk != k) {
    throw std::invalid_argument("matmul: inner dimensions differ for " +
                                shape_str(a.shape()) + " and " +
                                shape_str(b.shape()));
  }
  Shape out_shape = vec ? Shape{m} : Shape{m, n};
  Tensor out = make_output(std::move(out_shape), a, b);
  auto ov = out.mutable_values();
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += av[i * k + p] * bv[p * n + j];
      ov[i * n + j] = acc;
    }
  }
  if (out.requires_grad()) {
    record("matmul", [a, b, out, m, n, k]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      const auto av = a.values();
      const auto bv = b.values();
      if (a.requires_grad()) {
        auto ga = a.grad_buffer();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
              acc += g[i * n + j] * bv[p * n + j];
            }
            ga[i * k + p] += acc;
          }
        }
      }
      if (b.requires_grad()) {
        auto gb = b.grad_buffer();
        for (std::size_t p = 0; p < k; ++p) {
          for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
              acc += av[i * k + p] * g[i * n + j];
            }
            gb[p * n + j] += acc;
          }
        }
      }
    });
  }
  return out;
}

Tensor Tape::conv1d(const Tensor& x, const Tensor& w, const Tensor& bias,
                    std::size_t stride) {
  if (x.rank() != 2 || w.rank() != 3 || bias.rank() != 1) {
    throw std::invalid_argument("conv1d: expected x [c_in,len], w "
                                "[c_out,c_in,k], bias [c_out]; got " +
                                shape_str(x.shape()) + ", " +
                                shape_str(w.shape()) + ", " +
                                shape_str(bias.shape()));
  }
  const std::size_t c_in = x.shape()[0];
  const std::size_t len = x.shape()[1];
  const std::size_t c_out = w.shape()[0];
  const std::size_t kern = w.shape()[2];
  if (w.shape()[1] != c_in || bias.shape()[0] != c_out) {
    throw std::invalid_argument("conv1d: shape mismatch " +
                                shape_str(x.shape()) + " vs " +
                                shape_str(w.shape()));
  }
  if (stride == 0) throw std::invalid_argument("conv1d: zero stride");
  if (len < kern) {
    throw std::invalid_argument("conv1d: input length " + std::to_string(len) +
                                " shorter than kernel " +
                                std::to_string(kern));
  }
  const std::size_t len_out = (len - kern) / stride + 1;
  Tensor out = make_output({c_out, len_out}, x, w, bias);
  auto ov = out.mutable_values();
  const auto xv = x.values();
  const auto wv = w.values();
  const auto bv = bias.values();
  for (std::size_t o = 0; o < c_out; ++o) {
    for (std::size_t t = 0; t < len_out; ++t) {
      double acc = bv[o];
      const std::size_t base = t * stride;
      for (std::size_t i = 0; i < c_in; ++i) {
        const double* xp = xv.data() + i * len + base;
        const double* wp = wv.data() + (o * c_in + i) * kern;
        for (std::size_t q = 0; q < kern; ++q) acc += wp[q] * xp[q];
      }
      ov[o * len_out + t] = acc;
    }
  }
  if (out.requires_grad()) {
    record("conv1d",
           [x, w, bias, out, c_in, len, c_out, kern, len_out, stride]() mutable {
             if (!out.has_grad()) return;
             const auto g = out.grad();
             const auto xv = x.values();
             const auto wv = w.values();
             const bool need_dx = x.requires_grad();
             const bool need_dw = w.requires_grad();
             const bool need_db = bias.requires_grad();
             std::span<double> gx, gw, gb;
             if (need_dx) gx = x.grad_buffer();
             if (need_dw) gw = w.grad_buffer();
             if (need_db) gb = bias.grad_buffer();
             for (std::size_t o = 0; o < c_out; ++o) {
               for (std::size_t t = 0; t < len_out; ++t) {
                 const double go = g[o * len_out + t];
                 if (go == 0.0) continue;
                 if (need_db) gb[o] += go;
                 const std::size_t base = t * stride;
                 for (std::size_t i = 0; i < c_in; ++i) {
                   const double* xp = xv.data() + i * len + base;
                   const double* wp = wv.data() + (o * c_in + i) * kern;
                   if (need_dw) {
                     double* gwp = gw.data() + (o * c_in + i) * kern;
                     for (std::size_t q = 0; q < kern; ++q) {
                       gwp[q] += go * xp[q];
                     }
                   }
                   if (need_dx) {
                     double* gxp = gx.data() + i * len + base;
                     for (std::size_t q = 0; q < kern; ++q) {
                       gxp[q] += go * wp[q];
                     }
                   }
                 }
               }
             }
           });
  }
  return out;
}

Tensor Tape::concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  std::size_t total = 0;
  bool any_grad = false;
  for (const Tensor& p : parts) {
    if (p.rank() != 1) {
      throw std::invalid_argument("concat: rank-1 inputs required, got " +
                                  shape_str(p.shape()));
    }
    total += p.size();
    any_grad = any_grad || p.requires_grad();
  }
  Tensor out = Tensor::zeros({total}, grad_enabled_ && any_grad);
  auto ov = out.mutable_values();
  std::size_t at = 0;
  for (const Tensor& p : parts) {
    const auto pv = p.values();
    std::copy(pv.begin(), pv.end(), ov.begin() + at);
    at += p.size();
  }
  if (out.requires_grad()) {
    record("concat", [parts, out]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      std::size_t at = 0;
      for (const Tensor& p : parts) {
        if (p.requires_grad()) {
          auto gp = p.grad_buffer();
          for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[at + i];
        }
        at += p.size();
      }
    });
  }
  return out;
}

Tensor Tape::slice(const Tensor& a, std::size_t start, std::size_t len) {
  if (a.rank() != 1) {
    throw std::invalid_argument("slice: rank-1 input required, got " +
                                shape_str(a.shape()));
  }
  if (len == 0 || start + len > a.size()) {
    throw std::invalid_argument(
        "slice: range [" + std::to_string(start) + "," +
        std::to_string(start + len) + ") outside " + shape_str(a.shape()));
  }
  Tensor out = make_output({len}, a);
  auto ov = out.mutable_values();
  const auto av = a.values();
  std::copy(av.begin() + start, av.begin() + start + len, ov.begin());
  if (out.requires_grad()) {
    record("slice", [a, out, start]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) ga[start + i] += g[i];
    });
  }
  return out;
}

Tensor Tape::tile_cyclic(const Tensor& a, std::size_t length) {
  if (a.rank() != 1) {
    throw std::invalid_argument("tile_cyclic: rank-1 input required, got " +
                                shape_str(a.shape()));
  }
  if (length < a.size()) {
    throw std::invalid_argument("tile_cyclic: target length " +
                                std::to_string(length) + " below input " +
                                shape_str(a.shape()));
  }
  const std::size_t n = a.size();
  Tensor out = make_output({length}, a);
  auto ov = out.mutable_values();
  const auto av = a.values();
  for (std::size_t i = 0; i < length; ++i) ov[i] = av[i % n];
  if (out.requires_grad()) {
    record("tile_cyclic", [a, out, n]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i % n] += g[i];
    });
  }
  return out;
}

Tensor Tape::row_mean(const Tensor& a) {
  if (a.rank() != 2) {
    throw std::invalid_argument("row_mean: rank-2 input required, got " +
                                shape_str(a.shape()));
  }
  const std::size_t rows = a.shape()[0];
  const std::size_t cols = a.shape()[1];
  Tensor out = make_output({rows}, a);
  auto ov = out.mutable_values();
  const auto av = a.values();
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += av[r * cols + c];
    ov[r] = acc / static_cast<double>(cols);
  }
  if (out.requires_grad()) {
    record("row_mean", [a, out, rows, cols]() mutable {
      if (!out.has_grad()) return;
      const auto g = out.grad();
      auto ga = a.grad_buffer();
      const double inv = 1.0 / static_cast<double>(cols);
      for (std::size_t r = 0; r < rows; ++r) {
        const double gr = g[r] * inv;
        for (std::size_t c = 0; c < cols; ++c) ga[r * cols + c] += gr;
      }
    });
  }
  return out;
}

Tensor Tape::sum(const Tensor& a) {
  Tensor out = make_output({1}, a);
  const auto av = a.values();
  double acc = 0.0;
  for (double v : av) acc += v;
  out.mutable_values()[0] = acc;
  if (out.requires_grad()) {
    record("sum", [a, out]() mutable {
      if (!out.has_grad()) return;
      const double g = out.grad()[0];
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
    });
  }
  return out;
}

Tensor Tape::mean(const Tensor& a) {
  Tensor out = make_output({1}, a);
  const auto av = a.values();
  double acc = 0.0;
  for (double v : av) acc += v;
  out.mutable_values()[0] = acc / static_cast<double>(av.size());
  if (out.requires_grad()) {
    record("mean", [a, out]() mutable {
      if (!out.has_grad()) return;
      const double g = out.grad()[0] / static_cast<double>(a.size());
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
    });
  }
  return out;
}

Tensor Tape::product(const Tensor& a) {
  // multiply in value-sorted order so any permutation of the input produces
  // a bit-identical result
  const auto av = a.values();
  std::vector<std::size_t> order(av.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&av](std::size_t i, std::size_t j) { return av[i] < av[j]; });
  Tensor out = make_output({1}, a);
  double acc = 1.0;
  for (std::size_t i : order) acc *= av[i];
  out.mutable_values()[0] = acc;
  if (out.requires_grad()) {
    record("product", [a, out, order = std::move(order)]() mutable {
      if (!out.has_grad()) return;
      const double g = out.grad()[0];
      const auto av = a.values();
      const std::size_t n = order.size();
      // exclusion products via prefix/suffix scans; no division so zero
      // factors stay differentiable
      std::vector<double> prefix(n, 1.0), suffix(n, 1.0);
      for (std::size_t i = 1; i < n; ++i) {
        prefix[i] = prefix[i - 1] * av[order[i - 1]];
      }
      for (std::size_t i = n; i-- > 1;) {
        suffix[i - 1] = suffix[i] * av[order[i]];
      }
      auto ga = a.grad_buffer();
      for (std::size_t i = 0; i < n; ++i) {
        ga[order[i]] += g * prefix[i] * suffix[i];
      }
    });
  }
  return out;
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw std::invalid_argument("backward: loss must be a scalar tensor");
  }
  Tensor seed = loss;
  seed.grad_buffer()[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    it->backward();
  }
  nodes_.clear();
}

void Tape::reset() { nodes_.clear(); }

}  // namespace phyzzy::ndcore
