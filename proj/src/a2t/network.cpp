#include "faildist/a2t/network.hpp"

#include <algorithm>
#include <cmath>

#include "faildist/core/errors.hpp"

namespace faildist::a2t {

namespace {

// y = W x + b for a row-major (rows x cols) block of params starting at w.
void affine(std::span<const double> p, std::size_t w, std::size_t b, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::vector<double>& y) {
  y.assign(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = p[b + r];
    const double* row = p.data() + w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

void relu(std::vector<double>& v) {
  for (double& z : v) z = z > 0.0 ? z : 0.0;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Backprop through y = W x + b: accumulates dW, db and, when dx is given, W^T dy.
void affine_backward(std::span<const double> p, std::span<double> g, std::size_t w, std::size_t b,
                     std::size_t rows, std::size_t cols, std::span<const double> x,
                     std::span<const double> dy, std::vector<double>* dx) {
  if (dx) dx->assign(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double d = dy[r];
    if (d == 0.0) continue;
    g[b + r] += d;
    double* grow = g.data() + w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) grow[c] += d * x[c];
    if (dx) {
      const double* row = p.data() + w + r * cols;
      for (std::size_t c = 0; c < cols; ++c) (*dx)[c] += row[c] * d;
    }
  }
}

}  // namespace

std::size_t A2TShape::num_params() const {
  const std::size_t n = inputs, hb = base_hidden, ha = attention_hidden, k = solutions + 1;
  return hb * n + hb + hb * hb + hb + hb + 1 + ha * n + ha + k * ha + k;
}

A2TNetwork::A2TNetwork(A2TShape shape) : shape_(shape), params_(shape.num_params(), 0.0) {
  if (shape.inputs == 0 || shape.base_hidden == 0 || shape.attention_hidden == 0) {
    throw ContractViolation("A2TNetwork: layer sizes must be positive");
  }
}

A2TNetwork::Offsets A2TNetwork::offsets() const {
  const std::size_t n = shape_.inputs, hb = shape_.base_hidden, ha = shape_.attention_hidden,
                    k = shape_.solutions + 1;
  Offsets o{};
  o.w1 = 0;
  o.b1 = o.w1 + hb * n;
  o.w2 = o.b1 + hb;
  o.b2 = o.w2 + hb * hb;
  o.w3 = o.b2 + hb;
  o.b3 = o.w3 + hb;
  o.a1 = o.b3 + 1;
  o.c1 = o.a1 + ha * n;
  o.a2 = o.c1 + ha;
  o.c2 = o.a2 + k * ha;
  o.end = o.c2 + k;
  return o;
}

void A2TNetwork::initialize(Rng& rng) {
  const auto o = offsets();
  const std::size_t n = shape_.inputs, hb = shape_.base_hidden, ha = shape_.attention_hidden;
  auto fill = [&](std::size_t from, std::size_t to, std::size_t fan_in) {
    const double r = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = from; i < to; ++i) params_[i] = uniform(rng, -r, r);
  };
  fill(o.w1, o.w2, n);
  fill(o.w2, o.w3, hb);
  fill(o.w3, o.a1, hb);
  fill(o.a1, o.a2, n);
  fill(o.a2, o.end, ha);
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> w(logits.begin(), logits.end());
  if (w.empty()) return w;
  const double top = *std::max_element(w.begin(), w.end());
  double total = 0.0;
  for (double& z : w) {
    z = std::exp(z - top);
    total += z;
  }
  for (double& z : w) z /= total;
  return w;
}

double A2TNetwork::base_value(std::span<const double> x) const {
  const auto o = offsets();
  const std::size_t n = shape_.inputs, hb = shape_.base_hidden;
  std::vector<double> h1, h2, z3;
  affine(params_, o.w1, o.b1, hb, n, x, h1);
  relu(h1);
  affine(params_, o.w2, o.b2, hb, hb, h1, h2);
  relu(h2);
  affine(params_, o.w3, o.b3, 1, hb, h2, z3);
  return sigmoid(z3[0]);
}

std::vector<double> A2TNetwork::attention_logits(std::span<const double> x) const {
  const auto o = offsets();
  const std::size_t n = shape_.inputs, ha = shape_.attention_hidden, k = shape_.solutions + 1;
  std::vector<double> g1, logits;
  affine(params_, o.a1, o.c1, ha, n, x, g1);
  relu(g1);
  affine(params_, o.a2, o.c2, k, ha, g1, logits);
  return logits;
}

std::vector<double> A2TNetwork::attention(std::span<const double> x) const {
  return softmax(attention_logits(x));
}

double A2TNetwork::forward(std::span<const double> x, std::span<const double> u) const {
  if (x.size() != shape_.inputs || u.size() != shape_.solutions) {
    throw ContractViolation("A2TNetwork: input size mismatch");
  }
  const auto w = attention(x);
  double out = w[0] * base_value(x);
  for (std::size_t i = 0; i < u.size(); ++i) out += w[i + 1] * u[i];
  return std::clamp(out, 0.0, 1.0);
}

double A2TNetwork::accumulate_gradient(std::span<const double> x, std::span<const double> u, double scale,
                                       std::span<double> grad) const {
  if (x.size() != shape_.inputs || u.size() != shape_.solutions || grad.size() != params_.size()) {
    throw ContractViolation("A2TNetwork: gradient size mismatch");
  }
  const auto o = offsets();
  const std::size_t n = shape_.inputs, hb = shape_.base_hidden, ha = shape_.attention_hidden,
                    k = shape_.solutions + 1;

  std::vector<double> z1, h1, z2, h2, z3, y1, g1, logits;
  affine(params_, o.w1, o.b1, hb, n, x, z1);
  h1 = z1;
  relu(h1);
  affine(params_, o.w2, o.b2, hb, hb, h1, z2);
  h2 = z2;
  relu(h2);
  affine(params_, o.w3, o.b3, 1, hb, h2, z3);
  const double vb = sigmoid(z3[0]);
  affine(params_, o.a1, o.c1, ha, n, x, y1);
  g1 = y1;
  relu(g1);
  affine(params_, o.a2, o.c2, k, ha, g1, logits);
  const auto w = softmax(logits);

  std::vector<double> vals(k);
  vals[0] = vb;
  for (std::size_t i = 0; i < u.size(); ++i) vals[i + 1] = u[i];
  double out = 0.0;
  for (std::size_t i = 0; i < k; ++i) out += w[i] * vals[i];

  // Attention branch: d out / d logit_j = w_j (vals_j - out).
  std::vector<double> dlogits(k);
  for (std::size_t j = 0; j < k; ++j) dlogits[j] = scale * w[j] * (vals[j] - out);
  std::vector<double> dg1;
  affine_backward(params_, grad, o.a2, o.c2, k, ha, g1, dlogits, &dg1);
  for (std::size_t i = 0; i < ha; ++i) {
    if (!(y1[i] > 0.0)) dg1[i] = 0.0;
  }
  affine_backward(params_, grad, o.a1, o.c1, ha, n, x, dg1, nullptr);

  // Base branch.
  std::vector<double> dz3{scale * w[0] * vb * (1.0 - vb)};
  std::vector<double> dh2, dh1;
  affine_backward(params_, grad, o.w3, o.b3, 1, hb, h2, dz3, &dh2);
  for (std::size_t i = 0; i < hb; ++i) {
    if (!(z2[i] > 0.0)) dh2[i] = 0.0;
  }
  affine_backward(params_, grad, o.w2, o.b2, hb, hb, h1, dh2, &dh1);
  for (std::size_t i = 0; i < hb; ++i) {
    if (!(z1[i] > 0.0)) dh1[i] = 0.0;
  }
  affine_backward(params_, grad, o.w1, o.b1, hb, n, x, dh1, nullptr);
  return std::clamp(out, 0.0, 1.0);
}

}  // namespace faildist::a2t
