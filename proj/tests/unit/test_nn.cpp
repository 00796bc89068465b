#include <cmath>

#include "doctest.h"
#include "spiralnet/adam.hpp"
#include "spiralnet/error.hpp"
#include "spiralnet/grad_check.hpp"
#include "spiralnet/grad_fixtures.hpp"
#include "spiralnet/lstm.hpp"
#include "spiralnet/nn.hpp"
#include "spiralnet/parallel.hpp"

using namespace spiralnet;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (auto& x : t.storage()) x = scale * rng.normal();
  return t;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Reference cell written directly from the gate equations.
void reference_step(const std::vector<double>& x, std::vector<double>& h, std::vector<double>& c,
                    const LstmParams& p) {
  const std::size_t din = p.input_dim(), hd = p.hidden_dim();
  std::vector<double> xh(x);
  xh.insert(xh.end(), h.begin(), h.end());
  std::vector<double> nh(hd), nc(hd);
  for (std::size_t j = 0; j < hd; ++j) {
    double zf = p.b_f[j], zi = p.b_i[j], zo = p.b_o[j], zc = p.b_c[j];
    for (std::size_t k = 0; k < din + hd; ++k) {
      zf += xh[k] * p.w_f(k, j);
      zi += xh[k] * p.w_i(k, j);
      zo += xh[k] * p.w_o(k, j);
      zc += xh[k] * p.w_c(k, j);
    }
    nc[j] = sigmoid(zf) * c[j] + sigmoid(zi) * std::tanh(zc);
    nh[j] = sigmoid(zo) * std::tanh(nc[j]);
  }
  h = nh;
  c = nc;
}

}  // namespace

TEST_CASE("tensor shapes and element access") {
  Tensor t({2, 3}, 1.5);
  CHECK(t.rank() == 2);
  CHECK(t.size() == 6);
  t(1, 2) = 4.0;
  CHECK(t[5] == 4.0);
  CHECK(t.row(1)[2] == 4.0);
  t.reshape({3, 2});
  CHECK(t.rows() == 3);
  CHECK_THROWS_AS(t.reshape({4, 2}), ValidationError);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ValidationError);
  CHECK(shape_string({2, 3, 4}) == "[2x3x4]");
}

TEST_CASE("matmul agrees with a naive triple loop for any worker count") {
  Rng rng(3);
  const Tensor a = random_tensor({37, 11}, rng), b = random_tensor({11, 5}, rng);
  Tensor naive({37, 5});
  for (std::size_t i = 0; i < 37; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      for (std::size_t k = 0; k < 11; ++k) naive(i, j) += a(i, k) * b(k, j);
  for (std::size_t threads : {1u, 3u}) {
    set_thread_count(threads);
    const Tensor c = matmul(a, b);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == doctest::Approx(naive[i]));

    Tensor atb({11, 5});
    matmul_at_b_acc(a, naive, atb);
    const Tensor again = [&] {
      Tensor t({11, 5});
      matmul_at_b_acc(a, naive, t);
      return t;
    }();
    CHECK(atb == again);
    const Tensor abt = matmul_a_bt(naive, b);
    CHECK(abt.rows() == 37);
    CHECK(abt.cols() == 11);
  }
  set_thread_count(1);
  CHECK_THROWS_AS(matmul(a, a), ValidationError);
}

TEST_CASE("fully connected layer") {
  const Tensor x = Tensor::matrix(1, 2, {1, 2});
  const Tensor w = Tensor::matrix(2, 2, {1, 0, 0, 1});
  const Tensor b = Tensor::vector({3, 3});
  const Tensor y = fc_forward(x, w, b);
  CHECK(y[0] == 4.0);
  CHECK(y[1] == 5.0);
  CHECK(fc_forward(x, w, Tensor::vector({0, 0})) == x);
  CHECK_THROWS_AS(fc_forward(x, w, Tensor::vector({1, 2, 3})), ValidationError);
}

TEST_CASE("fully connected gradients match finite differences") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const std::size_t b = 2 + rng.uniform_index(4), din = 1 + rng.uniform_index(5),
                      dout = 1 + rng.uniform_index(5);
    LinearParams p{random_tensor({din, dout}, rng), random_tensor({dout}, rng)};
    LinearParams g = LinearParams::zeros(din, dout);
    Tensor x = random_tensor({b, din}, rng), dx({b, din});
    const Tensor r = random_tensor({b, dout}, rng);
    auto loss = [&] {
      const Tensor y = fc_forward(x, p);
      double l = 0;
      for (std::size_t i = 0; i < y.size(); ++i) l += y[i] * r[i];
      return l;
    };
    auto backward = [&] { dx = fc_backward(x, p, r, g); };
    ParamList params = {{"w", &p.weight, &g.weight}, {"b", &p.bias, &g.bias}, {"x", &x, &dx}};
    GradCheckOptions o;
    o.step = 1e-6;
    o.tolerance = 1e-7;
    const auto report = grad_check(loss, backward, params, o);
    CHECK(report.max_rel_error < 1e-7);
    CHECK(report.passed);
  }
}

TEST_CASE("grad_check flags a wrong gradient") {
  Tensor w = Tensor::vector({1.0, 2.0}), g({2});
  auto loss = [&] { return w[0] * w[0] + 3 * w[1]; };
  auto backward = [&] {
    g[0] = 2 * w[0];
    g[1] = 2.0;  // should be 3
  };
  const auto report = grad_check(loss, backward, {{"w", &w, &g}});
  CHECK_FALSE(report.passed);
  CHECK(report.max_rel_error > 0.1);
  CHECK(w[0] == 1.0);
  CHECK(w[1] == 2.0);
}

TEST_CASE("relu, softmax and cross-entropy") {
  const Tensor r = relu(Tensor::vector({-1, 0, 2}));
  CHECK(r.storage() == std::vector<double>{0, 0, 2});

  const Tensor uniform = softmax(Tensor({2, 4}, 7.0));
  for (double p : uniform.storage()) CHECK(p == doctest::Approx(0.25));
  CHECK(cross_entropy(uniform, std::vector<std::int32_t>{0, 3}) == doctest::Approx(std::log(4.0)));

  Rng rng(1);
  const Tensor p = softmax(random_tensor({50, 9}, rng, 30.0));
  for (std::size_t i = 0; i < 50; ++i) {
    double s = 0;
    for (double x : p.row(i)) {
      CHECK(x >= 0.0);
      s += x;
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
  const Tensor huge = softmax(Tensor::matrix(1, 2, {1e300, 0}));
  CHECK(huge[0] == 1.0);
  CHECK(huge.all_finite());

  const Tensor zero = Tensor::matrix(1, 2, {1.0, 0.0});
  CHECK(cross_entropy(zero, std::vector<std::int32_t>{1}) == doctest::Approx(-std::log(kLogFloor)));
  CHECK_THROWS_AS(cross_entropy(zero, std::vector<std::int32_t>{2}), ValidationError);
}

TEST_CASE("softmax cross-entropy gradient matches finite differences") {
  Rng rng(8);
  Tensor logits = random_tensor({4, 6}, rng), grad({4, 6});
  const std::vector<std::int32_t> labels = {0, 5, 2, 2};
  auto loss = [&] { return cross_entropy(softmax(logits), labels); };
  auto backward = [&] { grad = softmax_cross_entropy_backward(softmax(logits), labels); };
  GradCheckOptions o;
  o.tolerance = 1e-6;
  CHECK(grad_check(loss, backward, {{"logits", &logits, &grad}}, o).passed);
}

TEST_CASE("dropout drops at rate p and preserves the mean") {
  constexpr std::size_t n = 1000000;
  const Tensor x({n}, 2.0);
  Rng rng(99);
  Tensor scale;
  const Tensor y = dropout(x, 0.3, Mode::train, rng, &scale);
  std::size_t zeros = 0, bad = 0;
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    zeros += y[i] == 0.0;
    sum += y[i];
    bad += !(y[i] == 0.0 || std::abs(y[i] - 2.0 / 0.7) < 1e-12);
  }
  CHECK(bad == 0);
  const double sigma = std::sqrt(n * 0.3 * 0.7);
  CHECK(std::abs(static_cast<double>(zeros) - 0.3 * n) < 3 * sigma);
  // Mean of the rescaled output: std of one unit is 2 * sqrt(p / (1-p)).
  const double mean_sigma = 2.0 * std::sqrt(0.3 / 0.7) / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(sum / n - 2.0) < 3 * mean_sigma);

  const Tensor dy({n}, 1.0);
  const Tensor dx = dropout_backward(dy, scale);
  for (std::size_t i = 0; i < 1000; ++i) CHECK(dx[i] == scale[i]);

  Rng untouched(5), reference(5);
  CHECK(dropout(x, 0.3, Mode::eval, untouched) == x);
  CHECK(untouched.next_u64() == reference.next_u64());
  CHECK_THROWS_AS(dropout(x, 1.0, Mode::train, rng), ValidationError);
}

TEST_CASE("glorot weights stay inside the bound") {
  Rng rng(1);
  Tensor w({40, 60});
  glorot_uniform(w, 40, 60, rng);
  const double bound = std::sqrt(6.0 / 100.0);
  double mx = 0;
  for (double v : w.storage()) {
    CHECK(std::abs(v) <= bound);
    mx = std::max(mx, std::abs(v));
  }
  CHECK(mx > 0.9 * bound);
}

TEST_CASE("zero-parameter LSTM step gives half-open gates and zero state") {
  const LstmParams p = LstmParams::zeros(3, 4);
  Rng rng(2);
  const Tensor x = random_tensor({2, 3}, rng);
  LstmStepCache cache;
  const LstmState s = lstm_step(x, LstmState::zeros(2, 4), p, &cache);
  for (const Tensor* g : {&cache.f, &cache.i, &cache.o}) {
    for (double v : g->storage()) CHECK(v == 0.5);
  }
  for (double v : s.c.storage()) CHECK(v == 0.0);
  for (double v : s.h.storage()) CHECK(v == 0.0);
}

TEST_CASE("a saturated forget gate keeps the cell") {
  LstmParams p = LstmParams::zeros(2, 3);
  p.b_f.fill(50.0);
  LstmState s = LstmState::zeros(1, 3);
  s.c.fill(1.0);
  const LstmState next = lstm_step(Tensor::matrix(1, 2, {0.3, -0.7}), s, p);
  for (double v : next.c.storage()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("LSTM step matches the reference equations") {
  Rng rng(4);
  LstmParams p = LstmParams::glorot(3, 5, rng, 1.0);
  for (auto* b : {&p.b_i, &p.b_o, &p.b_c}) *b = random_tensor({5}, rng, 0.3);
  const Tensor x = random_tensor({1, 3}, rng);
  const LstmState out = lstm_step(x, LstmState::zeros(1, 5), p);
  std::vector<double> h(5, 0.0), c(5, 0.0);
  reference_step(x.storage(), h, c, p);
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(out.h[j] == doctest::Approx(h[j]).epsilon(1e-14));
    CHECK(out.c[j] == doctest::Approx(c[j]).epsilon(1e-14));
  }
}

TEST_CASE("lstm_sequence composes steps and ignores padding") {
  Rng rng(6);
  const LstmParams p = LstmParams::glorot(2, 4, rng);
  const Tensor xs = random_tensor({2, 3, 2}, rng);

  // Row 0: three real steps; compare against manual composition.
  std::vector<std::uint8_t> mask = {1, 1, 1, 1, 0, 0};
  Tensor seq;
  const Tensor last = lstm_sequence(xs, mask, p, &seq);
  LstmState s = LstmState::zeros(1, 4);
  for (std::size_t t = 0; t < 3; ++t) {
    Tensor x({1, 2});
    x[0] = xs[t * 2];
    x[1] = xs[t * 2 + 1];
    s = lstm_step(x, s, p);
    for (std::size_t j = 0; j < 4; ++j) CHECK(seq[t * 4 + j] == s.h[j]);
  }
  for (std::size_t j = 0; j < 4; ++j) CHECK(last(0, j) == s.h[j]);

  // Row 1: [x, pad, pad] equals a length-one run.
  Tensor x1({1, 1, 2});
  x1[0] = xs[6];
  x1[1] = xs[7];
  const Tensor single = lstm_sequence(x1, std::vector<std::uint8_t>{1}, p);
  const LstmState step = lstm_step(Tensor({1, 2}, std::vector<double>{xs[6], xs[7]}),
                                   LstmState::zeros(1, 4), p);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(last(1, j) == single(0, j));
    CHECK(single(0, j) == step.h[j]);
    CHECK(seq[(3 + 1) * 4 + j] == 0.0);
  }

  CHECK_THROWS_AS(lstm_sequence(xs, std::vector<std::uint8_t>{1, 1, 1, 0, 0, 0}, p),
                  ValidationError);
  CHECK_THROWS_AS(lstm_sequence(xs, std::vector<std::uint8_t>{1, 0, 1, 1, 1, 1}, p),
                  ValidationError);
}

TEST_CASE("LSTM hidden state stays in [-1, 1]") {
  Rng rng(17);
  LstmParams p = LstmParams::glorot(4, 6, rng);
  for (auto* w : {&p.w_f, &p.w_i, &p.w_o, &p.w_c}) *w = random_tensor(w->shape(), rng, 5.0);
  const Tensor xs = random_tensor({5, 12, 4}, rng, 10.0);
  Tensor seq;
  lstm_sequence(xs, std::vector<std::uint8_t>(60, 1), p, &seq);
  for (double v : seq.storage()) CHECK(std::abs(v) <= 1.0);
}

TEST_CASE("backprop through time matches finite differences over 20 seeds") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CAPTURE(seed);
    const auto report = check_lstm_sequence_gradients(seed);
    CHECK(report.max_rel_error < 1e-5);
    CHECK(report.blocks.size() == 9);
  }
}

TEST_CASE("Adam follows the bias-corrected recurrence") {
  SUBCASE("first step moves by lr against the gradient sign") {
    Tensor w = Tensor::vector({1.0, -2.0, 0.5}), g = Tensor::vector({3.0, -0.02, 7.0});
    AdamState st;
    adam_step({{"w", &w, &g}}, st);
    CHECK(w[0] == doctest::Approx(1.0 - 0.001).epsilon(1e-9));
    CHECK(w[1] == doctest::Approx(-2.0 + 0.001).epsilon(1e-9));
    CHECK(w[2] == doctest::Approx(0.5 - 0.001).epsilon(1e-9));
    CHECK(st.step == 1);
  }
  SUBCASE("zero gradients leave parameters unchanged") {
    Tensor w = Tensor::vector({1.0, 2.0}), g({2});
    AdamState st;
    for (int i = 0; i < 10; ++i) adam_step({{"w", &w, &g}}, st);
    CHECK(w[0] == 1.0);
    CHECK(w[1] == 2.0);
  }
  SUBCASE("minimizing w^2 matches a scalar recurrence") {
    Tensor w = Tensor::vector({1.0}), g({1});
    AdamState st;
    st.config.lr = 0.01;
    double ow = 1.0, m = 0.0, v = 0.0;
    double prev = 1.0;
    for (int t = 1; t <= 200; ++t) {
      g[0] = 2.0 * w[0];
      adam_step({{"w", &w, &g}}, st);
      const double og = 2.0 * ow;
      m = 0.9 * m + 0.1 * og;
      v = 0.999 * v + 0.001 * og * og;
      ow -= 0.01 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
      CHECK(w[0] == doctest::Approx(ow).epsilon(1e-12));
      CHECK(std::abs(w[0]) < prev);
      prev = std::abs(w[0]);
    }
    CHECK(std::abs(w[0]) < 0.5);
  }
  SUBCASE("non-finite gradients abort before any update") {
    Tensor a = Tensor::vector({1.0}), ga = Tensor::vector({1.0});
    Tensor b = Tensor::vector({2.0}), gb = Tensor::vector({std::nan("")});
    AdamState st;
    CHECK_THROWS_AS(adam_step({{"a", &a, &ga}, {"b", &b, &gb}}, st), NumericError);
    CHECK(a[0] == 1.0);
    CHECK(b[0] == 2.0);
    CHECK(st.step == 0);
  }
}
