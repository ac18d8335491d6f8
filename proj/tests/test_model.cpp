// Embedding-network suite: initialization determinism, forward-pass
// invariants, and the cosine classifier head.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "circlelab/errors.hpp"
#include "circlelab/matrix.hpp"
#include "circlelab/model.hpp"
#include "circlelab/rng.hpp"

using namespace circlelab;

namespace {

ToyModel small_model(std::uint64_t seed = 5) {
  return init_model(8, {6, 5}, 4, 7, Activation::kTanh, seed);
}

std::vector<double> random_chunk(int frames, int dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> chunk(static_cast<std::size_t>(frames) * dim);
  for (double& v : chunk) v = rng.normal();
  return chunk;
}

}  // namespace

TEST_CASE("initialization is deterministic in the seed") {
  const ToyModel a = small_model(5);
  const ToyModel b = small_model(5);
  CHECK(a.embed.data == b.embed.data);
  CHECK(a.classifier.data == b.classifier.data);
  for (std::size_t l = 0; l < a.hidden.size(); ++l)
    CHECK(a.hidden[l].data == b.hidden[l].data);

  const ToyModel c = small_model(6);
  CHECK(a.embed.data != c.embed.data);
}

TEST_CASE("initialized classifier rows have unit norm") {
  const ToyModel model = small_model();
  for (int c = 0; c < model.classifier.rows; ++c)
    CHECK(std::abs(std::sqrt(norm2(model.classifier.row(c))) - 1.0) <= 1e-12);
}

TEST_CASE("model shapes and parameter count") {
  const ToyModel model = small_model();
  REQUIRE(model.hidden.size() == 2);
  CHECK(model.hidden[0].rows == 6);
  CHECK(model.hidden[0].cols == 8);
  CHECK(model.hidden[1].rows == 5);
  CHECK(model.hidden[1].cols == 6);
  CHECK(model.embed.rows == 4);
  CHECK(model.embed.cols == 5);
  CHECK(model.classifier.rows == 7);
  CHECK(model.classifier.cols == 4);
  CHECK(model.num_parameters() == 6u * 8 + 5u * 6 + 4u * 5 + 7u * 4);
}

TEST_CASE("init_model rejects degenerate dimensions") {
  CHECK_THROWS_AS(init_model(0, {4}, 3, 5, Activation::kTanh, 1), ConfigError);
  CHECK_THROWS_AS(init_model(8, {}, 3, 5, Activation::kTanh, 1), ConfigError);
  CHECK_THROWS_AS(init_model(8, {4, 0}, 3, 5, Activation::kTanh, 1), ConfigError);
  CHECK_THROWS_AS(init_model(8, {4}, 0, 5, Activation::kTanh, 1), ConfigError);
  CHECK_THROWS_AS(init_model(8, {4}, 3, 1, Activation::kTanh, 1), ConfigError);
}

TEST_CASE("embeddings come out unit-norm") {
  const ToyModel model = small_model();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::vector<double> chunk = random_chunk(5, model.frame_dim, 200 + seed);
    const std::vector<double> e = forward_embed(model, chunk);
    REQUIRE(static_cast<int>(e.size()) == model.embedding_dim);
    CHECK(std::abs(std::sqrt(norm2(e)) - 1.0) <= 1e-12);
  }
}

TEST_CASE("mean pooling makes the embedding frame-order invariant") {
  const ToyModel model = small_model();
  const int frames = 6;
  std::vector<double> chunk = random_chunk(frames, model.frame_dim, 300);
  const std::vector<double> e0 = forward_embed(model, chunk);

  // Rotate the frames; only the summation order changes.
  std::vector<double> rotated(chunk.size());
  const std::size_t dim = static_cast<std::size_t>(model.frame_dim);
  for (int t = 0; t < frames; ++t) {
    const int src = (t + 2) % frames;
    std::copy_n(chunk.begin() + static_cast<std::ptrdiff_t>(src) * model.frame_dim, dim,
                rotated.begin() + static_cast<std::ptrdiff_t>(t) * model.frame_dim);
  }
  const std::vector<double> e1 = forward_embed(model, rotated);
  for (std::size_t i = 0; i < e0.size(); ++i)
    CHECK(std::abs(e0[i] - e1[i]) <= 1e-12);
}

TEST_CASE("a repeated frame embeds exactly like the frame alone") {
  // Two copies: the pooled mean (x + x) / 2 is exact in floating point, so
  // the whole downstream computation is bit-identical.
  const ToyModel model = small_model();
  const std::vector<double> frame = random_chunk(1, model.frame_dim, 301);
  std::vector<double> doubled(frame);
  doubled.insert(doubled.end(), frame.begin(), frame.end());
  CHECK(forward_embed(model, frame) == forward_embed(model, doubled));
}

TEST_CASE("forward_embed rejects an empty chunk") {
  const ToyModel model = small_model();
  CHECK_THROWS_AS(forward_embed(model, std::vector<double>{}), DomainError);
}

TEST_CASE("a zeroed projection raises a numerical error") {
  ToyModel model = small_model();
  model.embed.set_zero();  // raw embedding collapses to the origin
  const std::vector<double> chunk = random_chunk(3, model.frame_dim, 302);
  CHECK_THROWS_AS(forward_embed(model, chunk), NumericalError);
}

TEST_CASE("class cosines are classifier-row dot embedding") {
  const ToyModel model = small_model();
  const std::vector<double> chunk = random_chunk(4, model.frame_dim, 303);
  const std::vector<double> e = forward_embed(model, chunk);
  const std::vector<double> cosines = class_cosines(model, e);
  REQUIRE(static_cast<int>(cosines.size()) == model.num_classes);
  for (int c = 0; c < model.num_classes; ++c) {
    CHECK(cosines[static_cast<std::size_t>(c)] ==
          doctest::Approx(dot(model.classifier.row(c), e)).epsilon(1e-15));
    CHECK(std::abs(cosines[static_cast<std::size_t>(c)]) <= 1.0 + 1e-9);
  }
}

TEST_CASE("renormalize_classifier restores unit rows") {
  ToyModel model = small_model();
  for (double& v : model.classifier.data) v *= 3.7;
  renormalize_classifier(model);
  for (int c = 0; c < model.classifier.rows; ++c)
    CHECK(std::abs(std::sqrt(norm2(model.classifier.row(c))) - 1.0) <= 1e-12);

  model.classifier.row(0)[0] = 0.0;
  for (int i = 1; i < model.classifier.cols; ++i) model.classifier.row(0)[i] = 0.0;
  CHECK_THROWS_AS(renormalize_classifier(model), NumericalError);
}

TEST_CASE("identity activation turns the network linear") {
  // With identity activations, scaling every frame scales the raw embedding,
  // and the normalized embedding is scale-invariant.
  const ToyModel model = init_model(8, {6, 5}, 4, 7, Activation::kIdentity, 11);
  std::vector<double> chunk = random_chunk(3, model.frame_dim, 304);
  const std::vector<double> e0 = forward_embed(model, chunk);
  for (double& v : chunk) v *= 2.5;
  const std::vector<double> e1 = forward_embed(model, chunk);
  for (std::size_t i = 0; i < e0.size(); ++i)
    CHECK(std::abs(e0[i] - e1[i]) <= 1e-12);
}

TEST_CASE("gradient buffers mirror the model shapes") {
  const ToyModel model = small_model();
  ModelGrad grad = ModelGrad::zeros_like(model);
  REQUIRE(grad.hidden.size() == model.hidden.size());
  for (std::size_t l = 0; l < grad.hidden.size(); ++l) {
    CHECK(grad.hidden[l].rows == model.hidden[l].rows);
    CHECK(grad.hidden[l].cols == model.hidden[l].cols);
  }
  CHECK(grad.embed.rows == model.embed.rows);
  CHECK(grad.classifier.rows == model.classifier.rows);
  for (double v : grad.embed.data) CHECK(v == 0.0);

  grad.embed.at(0, 0) = 1.0;
  grad.set_zero();
  CHECK(grad.embed.at(0, 0) == 0.0);
}
