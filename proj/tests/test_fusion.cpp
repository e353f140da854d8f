/* Copyright 2026 The SMOT Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "smot/error.hpp"
#include "smot/fusion.hpp"
#include "support/oracles.hpp"

namespace smot {
namespace {

constexpr int kDim = 8;

// Straight loops over the attention formula, sharing no code with the library.
Matrix direct_attention(const Matrix& z, const Matrix& u, const AttentionParams& p) {
  const auto d = z.cols();
  auto mul = [](const Matrix& a, const Matrix& b) {
    Matrix out = Matrix::Zero(a.rows(), b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < b.cols(); ++j)
        for (Eigen::Index k = 0; k < a.cols(); ++k) out(i, j) += a(i, k) * b(k, j);
    return out;
  };
  const Matrix q = mul(z, p.w_q), k = mul(u, p.w_k), v = mul(u, p.w_v);
  Matrix out = Matrix::Zero(z.rows(), d);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    std::vector<double> s(static_cast<std::size_t>(u.rows()));
    for (Eigen::Index j = 0; j < u.rows(); ++j) {
      double dot = 0;
      for (Eigen::Index c = 0; c < d; ++c) dot += q(i, c) * k(j, c);
      s[static_cast<std::size_t>(j)] = dot / std::sqrt(static_cast<double>(d));
    }
    const double mx = *std::max_element(s.begin(), s.end());
    double total = 0;
    for (auto& x : s) total += (x = std::exp(x - mx));
    for (Eigen::Index j = 0; j < u.rows(); ++j)
      for (Eigen::Index c = 0; c < d; ++c)
        out(i, c) += s[static_cast<std::size_t>(j)] / total * v(j, c);
  }
  return out;
}

void expect_close(const Matrix& a, const Matrix& b, double tol) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), tol);
}

Matrix permuted_rows(const Matrix& m, const std::vector<Eigen::Index>& order) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.row(i) = m.row(order[static_cast<std::size_t>(i)]);
  return out;
}

TEST(Softmax, Examples) {
  FeatureMatrix m(1, 2);
  auto s = softmax_rows(m);
  EXPECT_DOUBLE_EQ(s(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(s(0, 1), 0.5);
  m(0, 0) = 1000;
  s = softmax_rows(m);
  EXPECT_NEAR(s(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(s(0, 1), 0.0, 1e-12);
  const auto r = softmax_rows(seeded_features(1, 1, 4, 8, 5.0));
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(r.mat().row(i).sum(), 1.0, 1e-6);
  EXPECT_GE(r.mat().minCoeff(), 0.0);
}

TEST(Features, NonFiniteRejected) {
  Matrix m = Matrix::Zero(2, 2);
  m(1, 1) = std::nan("");
  try {
    FeatureMatrix f(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumeric);
  }
}

TEST(CrossAttention, ZeroValueProjection) {
  auto p = AttentionParams::seeded(3, kDim);
  p.w_v.setZero();
  const auto out = cross_attention(seeded_features(3, 1, 3, kDim), seeded_features(3, 2, 5, kDim), p);
  EXPECT_EQ(out.mat().cwiseAbs().maxCoeff(), 0.0);
}

TEST(CrossAttention, SingleKey) {
  const auto p = AttentionParams::seeded(4, kDim);
  const auto u = seeded_features(4, 2, 1, kDim);
  const auto out = cross_attention(seeded_features(4, 1, 3, kDim), u, p);
  const Matrix want = u.mat() * p.w_v;
  for (Eigen::Index i = 0; i < 3; ++i) expect_close(out.mat().row(i), want, 1e-12);
}

TEST(CrossAttention, MatchesDirectFormula) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = AttentionParams::seeded(seed, kDim);
    const auto z = seeded_features(seed, 1, 3, kDim, 2.0), u = seeded_features(seed, 2, 5, kDim, 2.0);
    expect_close(cross_attention(z, u, p).mat(), direct_attention(z.mat(), u.mat(), p), 1e-12);
    const auto w = attention_weights(z, u, p);
    for (Eigen::Index i = 0; i < w.rows(); ++i) EXPECT_NEAR(w.mat().row(i).sum(), 1.0, 1e-6);
  }
}

TEST(CrossAttention, DimensionMismatch) {
  const auto p = AttentionParams::seeded(1, kDim);
  try {
    cross_attention(seeded_features(1, 1, 2, kDim), seeded_features(1, 2, 2, kDim + 1), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimMismatch);
  }
}

TEST(CrossAttention, PermutationProperties) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const CounterRng rng(seed, 77);
    const auto p = AttentionParams::seeded(seed, kDim);
    const auto z = seeded_features(seed, 1, 4, kDim), u = seeded_features(seed, 2, 6, kDim);
    std::vector<Eigen::Index> pu(6), pz(4);
    std::iota(pu.begin(), pu.end(), 0);
    std::iota(pz.begin(), pz.end(), 0);
    for (std::size_t i = pu.size() - 1; i > 0; --i) std::swap(pu[i], pu[rng.bits(i) % (i + 1)]);
    for (std::size_t i = pz.size() - 1; i > 0; --i) std::swap(pz[i], pz[rng.bits(10 + i) % (i + 1)]);
    const Matrix base = cross_attention(z, u, p).mat();
    expect_close(cross_attention(z, FeatureMatrix(permuted_rows(u.mat(), pu)), p).mat(), base, 1e-6);
    expect_close(cross_attention(FeatureMatrix(permuted_rows(z.mat(), pz)), u, p).mat(),
                 permuted_rows(base, pz), 1e-6);
  }
}

TEST(SelfAttention, Definitional) {
  const auto p = AttentionParams::seeded(5, kDim);
  const auto z = seeded_features(5, 1, 6, kDim);
  EXPECT_EQ(self_attention(z, p), cross_attention(z, z, p));
  expect_close(self_attention(z, p).mat(), direct_attention(z.mat(), z.mat(), p), 1e-12);
  const auto one = seeded_features(5, 2, 1, kDim);
  expect_close(self_attention(one, p).mat(), one.mat() * p.w_v, 1e-12);
}

FeatureGrid grid_of(int h, int w, const std::function<double(int, int)>& value) {
  FeatureGrid g{h, w, Matrix(h * w, 2)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) g.cells.row(y * w + x) << value(y, x), -value(y, x);
  return g;
}

TEST(Roi, ConstantGrid) {
  const auto g = grid_of(8, 8, [](int, int) { return 3.5; });
  const auto t = roi_target_feature(g, {10, 20, 30, 40}, 80, 80);
  ASSERT_EQ(t.rows(), 4);
  for (int r = 0; r < 4; ++r) {
    EXPECT_DOUBLE_EQ(t(r, 0), 3.5);
    EXPECT_DOUBLE_EQ(t(r, 1), -3.5);
  }
}

TEST(Roi, SingleCell) {
  const auto g = grid_of(1, 1, [](int, int) { return 2.0; });
  const auto t = roi_target_feature(g, {1, 1, 5, 5}, 10, 10);
  for (int r = 0; r < 4; ++r) EXPECT_DOUBLE_EQ(t(r, 0), 2.0);
}

TEST(Roi, VerticalGradient) {
  // Row y holds y; each of the 4 bins covers two rows.
  const auto g = grid_of(8, 8, [](int y, int) { return y; });
  const auto t = roi_target_feature(g, {0, 0, 80, 80}, 80, 80);
  EXPECT_DOUBLE_EQ(t(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(t(1, 0), 2.5);
  EXPECT_DOUBLE_EQ(t(2, 0), 4.5);
  EXPECT_DOUBLE_EQ(t(3, 0), 6.5);
}

TEST(Roi, EmptyGrid) {
  try {
    roi_target_feature(FeatureGrid{}, {0, 0, 1, 1}, 10, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyGrid);
  }
}

const FusionVariant kVariants[] = {FusionVariant::kAttention, FusionVariant::kMlp,
                                   FusionVariant::kConcatenation, FusionVariant::kAddition};

TEST(Vfm, SingleFrameIsIdentity) {
  const auto p = FusionParams::seeded(6, kDim, kDim);
  const auto f = seeded_features(6, 1, 4, kDim);
  for (auto v : kVariants) EXPECT_EQ(vfm_fold({f}, v, p), f) << fusion_variant_name(v);
}

TEST(Vfm, AttentionFold) {
  const auto p = FusionParams::seeded(7, kDim, kDim);
  const auto f1 = seeded_features(7, 1, 4, kDim), f2 = seeded_features(7, 2, 4, kDim),
             f3 = seeded_features(7, 3, 4, kDim);
  EXPECT_EQ(vfm_fold({f1, f2}, FusionVariant::kAttention, p), cross_attention(f1, f2, p.attention));
  const auto three = vfm_fold({f1, f2, f3}, FusionVariant::kAttention, p);
  EXPECT_EQ(three, cross_attention(cross_attention(f1, f2, p.attention), f3, p.attention));
  EXPECT_EQ(three.rows(), f1.rows());
}

TEST(Vfm, AdditionOfEqualFrames) {
  const auto p = FusionParams::seeded(8, kDim, kDim);
  const auto f = seeded_features(8, 1, 4, kDim);
  expect_close(vfm_fold({f, f, f}, FusionVariant::kAddition, p).mat(), f.mat(), 1e-15);
}

TEST(Vfm, Errors) {
  const auto p = FusionParams::seeded(8, kDim, kDim);
  EXPECT_THROW(vfm_fold({}, FusionVariant::kAttention, p), Error);
  try {
    vfm_fold({seeded_features(1, 1, 4, kDim), seeded_features(1, 2, 4, kDim + 2)},
             FusionVariant::kAttention, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimMismatch);
  }
}

TEST(Tfm, Variants) {
  const auto p = FusionParams::seeded(9, kDim, kDim);
  const auto t1 = seeded_features(9, 1, 4, kDim), t2 = seeded_features(9, 2, 4, kDim),
             t3 = seeded_features(9, 3, 4, kDim);
  EXPECT_EQ(tfm_fuse({t1}, FusionVariant::kAddition, p), t1);
  EXPECT_EQ(tfm_fuse({t1, t2, t3}, FusionVariant::kConcatenation, p).rows(), 12);

  Matrix stacked(8, kDim);
  stacked << t1.mat(), t2.mat();
  expect_close(tfm_fuse({t1, t2}, FusionVariant::kConcatenation, p).mat(),
               direct_attention(stacked, stacked, p.attention), 1e-12);
  const Matrix query = (t1.mat() + t2.mat()) / 2.0;
  expect_close(tfm_fuse({t1, t2}, FusionVariant::kAttention, p).mat(),
               direct_attention(query, stacked, p.attention), 1e-12);
  expect_close(tfm_fuse({t1, t2}, FusionVariant::kAddition, p).mat(), query, 1e-15);
  EXPECT_EQ(tfm_fuse({t1, t2}, FusionVariant::kMlp, p).rows(), 8);
}

TEST(CaptionContext, FoldAndProject) {
  const auto p = AttentionParams::seeded(10, kDim);
  const Matrix proj = seeded_matrix(10, 5, kDim, kDim, kDim);
  const auto video = seeded_features(10, 1, 4, kDim);
  const auto a = seeded_features(10, 2, 8, kDim), b = seeded_features(10, 3, 12, kDim);
  expect_close(caption_context(video, {a}, p, proj).mat(),
               direct_attention(video.mat(), a.mat(), p) * proj, 1e-12);
  const Matrix step1 = direct_attention(video.mat(), a.mat(), p);
  expect_close(caption_context(video, {a, b}, p, proj).mat(),
               direct_attention(step1, b.mat(), p) * proj, 1e-12);
  auto zero_v = p;
  zero_v.w_v.setZero();
  EXPECT_EQ(caption_context(video, {a}, zero_v, Matrix::Identity(kDim, kDim)).mat().cwiseAbs().maxCoeff(),
            0.0);
  EXPECT_THROW(caption_context(video, {}, p, proj), Error);
}

TEST(InstanceContext, Projection) {
  const auto t = seeded_features(11, 1, 8, kDim);
  EXPECT_EQ(instance_context(t, Matrix::Identity(kDim, kDim)), t);
  EXPECT_EQ(instance_context(t, Matrix::Zero(kDim, kDim)).mat().cwiseAbs().maxCoeff(), 0.0);
  const Matrix proj = seeded_matrix(11, 2, kDim, kDim, kDim);
  expect_close(instance_context(t, proj).mat(), t.mat() * proj, 1e-12);
  EXPECT_THROW(instance_context(t, Matrix::Identity(kDim + 1, kDim + 1)), Error);
}

TEST(InteractionHead, ShapeAndAsymmetry) {
  const auto p = AttentionParams::seeded(12, kDim);
  const auto h = InteractionHeadParams::seeded(12, kDim, kDim, 335);
  const auto a = seeded_features(12, 1, 8, kDim), b = seeded_features(12, 2, 12, kDim);
  const auto ab = interaction_logits(a, b, p, h), ba = interaction_logits(b, a, p, h);
  EXPECT_EQ(ab.size(), 336);
  EXPECT_GT((ab - ba).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(InteractionHead, ZeroWeightsGiveBiases) {
  const auto p = AttentionParams::seeded(13, kDim);
  auto h = InteractionHeadParams::seeded(13, kDim, kDim, 20);
  h.hidden.w.setZero();
  h.hidden.b.setZero();
  h.out.w.setZero();
  const auto logits = interaction_logits(seeded_features(13, 1, 4, kDim),
                                         seeded_features(13, 2, 4, kDim), p, h);
  EXPECT_EQ(logits, h.out.b);
}

std::vector<HeadExample> seeded_batch(std::uint64_t seed, int n, int classes) {
  const CounterRng rng(seed, 500);
  std::vector<HeadExample> batch;
  for (int i = 0; i < n; ++i) {
    batch.push_back({seeded_features(seed, 600 + static_cast<std::uint64_t>(i), 1, kDim).mat().row(0),
                     static_cast<int>(rng.bits(static_cast<std::uint64_t>(i)) % static_cast<std::uint64_t>(classes))});
  }
  return batch;
}

TEST(InteractionHead, SaturatedGradientVanishes) {
  auto h = InteractionHeadParams::seeded(14, kDim, kDim, 10);
  h.hidden.w.setZero();
  h.out.w.setZero();
  h.out.b.setZero();
  h.out.b(3) = 60.0;
  const std::vector<HeadExample> batch = {{seeded_features(14, 1, 1, kDim).mat().row(0), 3}};
  const auto g = interaction_head_gradient(h, batch);
  const double norm = std::sqrt(g.hidden.w.squaredNorm() + g.hidden.b.squaredNorm() +
                                g.out.w.squaredNorm() + g.out.b.squaredNorm());
  EXPECT_LT(norm, 1e-6);
}

TEST(InteractionHead, DuplicatedBatchSameMean) {
  const auto h = InteractionHeadParams::seeded(15, kDim, kDim, 335);
  auto batch = seeded_batch(15, 8, 336);
  const auto g1 = interaction_head_gradient(h, batch);
  const auto copy = batch;
  batch.insert(batch.end(), copy.begin(), copy.end());
  const auto g2 = interaction_head_gradient(h, batch);
  EXPECT_LE((g1.out.w - g2.out.w).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((g1.hidden.w - g2.hidden.w).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(InteractionHead, LabelRange) {
  const auto h = InteractionHeadParams::seeded(16, kDim, kDim, 5);
  try {
    interaction_head_gradient(h, {{RowVector::Zero(kDim), 6}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLabelRange);
  }
  EXPECT_NO_THROW(interaction_head_gradient(h, {{RowVector::Zero(kDim), 5}}));
}

// The acceptance run covers 100 seeds; a quarter keeps this suite quick.
TEST(InteractionHead, FiniteDifferenceCheck) {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto h = InteractionHeadParams::seeded(seed, kDim, kDim, 335);
    const auto batch = seeded_batch(seed, 8, 336);
    const auto analytic = interaction_head_gradient(h, batch);
    const double err = oracle::head_gradient_error(
        h, analytic, [&](const InteractionHeadParams& x) { return interaction_head_loss(x, batch); },
        1e-3);
    worst = std::max(worst, err);
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(Container, RoundTrip) {
  const std::vector<NamedMatrix> entries = {{"a", seeded_matrix(1, 1, 3, 4, 4)},
                                            {"empty", Matrix(0, 5)},
                                            {"logits", seeded_matrix(1, 2, 1, 336, 8)}};
  const std::string bytes = encode_matrices(entries);
  EXPECT_EQ(bytes.substr(0, 8), "SMOTMAT1");
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 3u);
  EXPECT_EQ(decode_matrices(bytes), entries);
  EXPECT_EQ(bytes.size(), 16u + (4 + 1 + 16 + 96) + (4 + 5 + 16) + (4 + 6 + 16 + 336 * 8));
}

TEST(Container, MalformedInput) {
  const std::string bytes = encode_matrices({{"m", seeded_matrix(2, 1, 2, 2, 2)}});
  for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
    try {
      decode_matrices(std::string_view(bytes).substr(0, cut));
      FAIL() << "cut " << cut;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kSyntax);
    }
  }
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_matrices(bad), Error);
  EXPECT_THROW(decode_matrices(bytes + "junk"), Error);
}

}  // namespace
}  // namespace smot
