#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "kcrec/encoder.hpp"

using namespace kcrec;

namespace {

SpMatI binary_from(const std::vector<std::pair<int, int>>& edges, int n) {
    SpMatI m(n, n);
    std::vector<Eigen::Triplet<std::int64_t>> trips;
    for (auto [i, j] : edges) {
        trips.emplace_back(i, j, 1);
        trips.emplace_back(j, i, 1);
    }
    m.setFromTriplets(trips.begin(), trips.end(),
                      [](std::int64_t, std::int64_t) { return std::int64_t{1}; });
    return m;
}

std::vector<Mat> random_reps(int nodes, int d, int paths, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Mat> reps;
    for (int p = 0; p < paths; ++p) {
        Mat m(nodes, d);
        for (int i = 0; i < nodes; ++i)
            for (int j = 0; j < d; ++j) m(i, j) = rng.uniform(-2.0, 2.0);
        reps.push_back(m);
    }
    return reps;
}

}  // namespace

TEST_CASE("two nodes, one edge: P is the averaging matrix") {
    NormalizedAdjacency norm = normalize_binary(binary_from({{0, 1}}, 2));
    Mat p = Mat(norm.p);
    CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p(1, 1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("isolated node gets P = [[1]]") {
    NormalizedAdjacency norm = normalize_binary(binary_from({}, 1));
    CHECK(Mat(norm.p)(0, 0) == 1.0);
}

TEST_CASE("normalization properties on a random graph") {
    Rng rng(5);
    int n = 20;
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < 0.2) edges.push_back({i, j});
    Mat p = Mat(normalize_binary(binary_from(edges, n)).p);
    CHECK((p - p.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(p.minCoeff() >= 0.0);
    for (int i = 0; i < n; ++i) CHECK(p(i, i) > 0.0);
    // spectral radius of the symmetric-normalized operator is at most 1
    Eigen::SelfAdjointEigenSolver<Mat> eig(p);
    CHECK(eig.eigenvalues().cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
}

TEST_CASE("glorot init: bounded, seeded, fan-scaled") {
    Rng rng1(3), rng2(3);
    Mat a = glorot_uniform(4, 6, rng1);
    Mat b = glorot_uniform(4, 6, rng2);
    CHECK((a.array() == b.array()).all());
    double s = std::sqrt(6.0 / (4 + 6));
    CHECK(a.cwiseAbs().maxCoeff() <= s);
    Rng rng3(4);
    Mat c = glorot_uniform(4, 6, rng3);
    CHECK(!(a.array() == c.array()).all());
}

TEST_CASE("gcn stack wiring: widths chain input -> hidden -> output") {
    Rng rng(1);
    GcnStack stack = make_gcn_stack("MP1", 7, 5, 3, 3, rng);
    CHECK(stack.meta_path_name == "MP1");
    REQUIRE(stack.layers() == 3);
    CHECK(stack.weights[0].rows() == 7);
    CHECK(stack.weights[0].cols() == 5);
    CHECK(stack.weights[1].rows() == 5);
    CHECK(stack.weights[2].cols() == 3);
    CHECK(stack.input_width() == 7);
    CHECK(stack.output_width() == 3);

    GcnStack one = make_gcn_stack("MP2", 7, 5, 3, 1, rng);
    CHECK(one.layers() == 1);
    CHECK(one.weights[0].rows() == 7);
    CHECK(one.weights[0].cols() == 3);
}

TEST_CASE("gcn forward: averaging P with identity weights keeps the average") {
    NormalizedAdjacency p = normalize_binary(binary_from({{0, 1}}, 2));
    GcnStack stack;
    stack.meta_path_name = "MP1";
    stack.weights = {Mat::Identity(2, 2), Mat::Identity(2, 2), Mat::Identity(2, 2)};
    Mat x = Mat::Identity(2, 2);
    Mat out = gcn_forward(p, x, stack);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(out(i, j) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("gcn forward: ReLU clamps negatives, zero weights give zeros") {
    NormalizedAdjacency p = identity_adjacency(1);
    GcnStack stack;
    stack.meta_path_name = "t";
    stack.weights = {Mat::Ones(1, 1), Mat::Ones(1, 1), Mat::Ones(1, 1)};
    Mat x(1, 1);
    x << -3.0;
    CHECK(gcn_forward(p, x, stack)(0, 0) == 0.0);

    GcnStack zero;
    zero.meta_path_name = "z";
    zero.weights = {Mat::Zero(1, 1)};
    Mat out = gcn_forward(p, Mat::Ones(1, 1), zero);
    CHECK(out(0, 0) == 0.0);
}

TEST_CASE("gcn forward rejects width mismatches naming the layer") {
    NormalizedAdjacency p = identity_adjacency(2);
    GcnStack stack;
    stack.meta_path_name = "MP1";
    stack.weights = {Mat::Identity(3, 3)};  // features are 2 wide
    CHECK_THROWS_WITH_AS(gcn_forward(p, Mat::Identity(2, 2), stack), doctest::Contains("layer"),
                         std::runtime_error);
}

TEST_CASE("identity P means no cross-node mixing") {
    // per-node oracle: row i of the output depends only on row i of X
    Rng rng(11);
    GcnStack stack = make_gcn_stack("MP1", 4, 4, 3, 2, rng);
    Mat x(3, 4);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j) x(i, j) = rng.uniform(-1.0, 1.0);
    Mat full = gcn_forward(identity_adjacency(3), x, stack);
    for (int i = 0; i < 3; ++i) {
        Mat row = gcn_forward(identity_adjacency(1), x.row(i), stack);
        CHECK((full.row(i) - row).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("attention: single path gets weight exactly 1") {
    auto reps = random_reps(4, 3, 1, 2);
    AttentionParams params{Vec::Ones(3), false};
    Mat alpha = attention_scores(reps, params);
    CHECK(alpha.rows() == 4);
    CHECK(alpha.cols() == 1);
    CHECK((alpha.array() == 1.0).all());
}

TEST_CASE("attention: identical representations split evenly") {
    auto reps = random_reps(4, 3, 1, 7);
    std::vector<Mat> two = {reps[0], reps[0]};
    AttentionParams params{Vec::Ones(3), false};
    Mat alpha = attention_scores(two, params);
    CHECK((alpha.array() - 0.5).abs().maxCoeff() <= 1e-15);
}

TEST_CASE("attention oracle: softmax over (tanh 0, tanh 1)") {
    Mat r0(1, 1), r1(1, 1);
    r0 << 0.0;
    r1 << 1.0;
    AttentionParams params{Vec::Ones(1), false};
    AttentionActivations acts;
    Mat alpha = attention_scores({r0, r1}, params, &acts);
    double t = std::tanh(1.0);
    double denom = std::exp(0.0) + std::exp(t);
    CHECK(alpha(0, 0) == doctest::Approx(1.0 / denom).epsilon(1e-12));
    CHECK(alpha(0, 1) == doctest::Approx(std::exp(t) / denom).epsilon(1e-12));
    // calculator-level reference values
    CHECK(alpha(0, 0) == doctest::Approx(0.3184).epsilon(2e-3));
    CHECK(alpha(0, 1) == doctest::Approx(0.6816).epsilon(2e-3));
    CHECK(acts.gate(0, 1) == doctest::Approx(t));
}

TEST_CASE("attention rows sum to one and entries are positive") {
    auto reps = random_reps(30, 5, 4, 13);
    Rng rng(14);
    Vec a(5);
    for (int i = 0; i < 5; ++i) a(i) = rng.uniform(-1.0, 1.0);
    Mat alpha = attention_scores(reps, AttentionParams{a, false});
    for (int i = 0; i < alpha.rows(); ++i) {
        CHECK(std::abs(alpha.row(i).sum() - 1.0) <= 1e-12);
        CHECK(alpha.row(i).minCoeff() > 0.0);
    }
}

TEST_CASE("permuting the path list permutes alpha columns bit-exactly") {
    auto reps = random_reps(12, 4, 4, 21);
    Rng rng(22);
    Vec a(4);
    for (int i = 0; i < 4; ++i) a(i) = rng.uniform(-1.0, 1.0);
    AttentionParams params{a, false};
    Mat alpha = attention_scores(reps, params);

    std::vector<std::size_t> perm = {2, 0, 3, 1};
    std::vector<Mat> shuffled;
    for (std::size_t p : perm) shuffled.push_back(reps[p]);
    Mat alpha_perm = attention_scores(shuffled, params);
    for (std::size_t c = 0; c < perm.size(); ++c)
        CHECK((alpha_perm.col(static_cast<int>(c)).array() ==
               alpha.col(static_cast<int>(perm[c])).array())
                  .all());
}

TEST_CASE("global attention mode shares one weight row across nodes") {
    auto reps = random_reps(9, 4, 3, 31);
    Rng rng(32);
    Vec a(4);
    for (int i = 0; i < 4; ++i) a(i) = rng.uniform(-1.0, 1.0);
    Mat alpha = attention_scores(reps, AttentionParams{a, true});
    for (int i = 1; i < alpha.rows(); ++i)
        CHECK((alpha.row(i).array() == alpha.row(0).array()).all());
}

TEST_CASE("fuse: hand-weighted sum and the one-path identity") {
    Mat r0(1, 2), r1(1, 2);
    r0 << 4.0, 4.0;
    r1 << 0.0, 0.0;
    Mat alpha(1, 2);
    alpha << 0.25, 0.75;
    FusedRepresentation fused = fuse({r0, r1}, alpha);
    CHECK(fused.e(0, 0) == doctest::Approx(1.0));
    CHECK(fused.e(0, 1) == doctest::Approx(1.0));

    auto reps = random_reps(5, 3, 1, 44);
    Mat ones = Mat::Ones(5, 1);
    FusedRepresentation single = fuse({reps[0]}, ones);
    CHECK((single.e.array() == reps[0].array()).all());
}

TEST_CASE("attention backward matches finite differences on a") {
    auto reps = random_reps(6, 4, 3, 55);
    Rng rng(56);
    Vec a(4);
    for (int i = 0; i < 4; ++i) a(i) = rng.uniform(-0.5, 0.5);
    Mat grad_fused(6, 4);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 4; ++j) grad_fused(i, j) = rng.uniform(-1.0, 1.0);

    auto objective = [&](const Vec& av) {
        AttentionActivations acts;
        Mat alpha = attention_scores(reps, AttentionParams{av, false}, &acts);
        return (fuse(reps, alpha).e.array() * grad_fused.array()).sum();
    };

    AttentionParams params{a, false};
    AttentionActivations acts;
    Mat alpha = attention_scores(reps, params, &acts);
    AttentionGradients grads = attention_backward(reps, params, acts, grad_fused);

    const double h = 1e-6;
    for (int i = 0; i < 4; ++i) {
        Vec up = a, dn = a;
        up(i) += h;
        dn(i) -= h;
        double fd = (objective(up) - objective(dn)) / (2 * h);
        CHECK(grads.d_a(i) == doctest::Approx(fd).epsilon(1e-5));
    }

    // d_reps has one matrix per path, each rep-shaped
    REQUIRE(grads.d_reps.size() == 3);
    for (const Mat& g : grads.d_reps) {
        CHECK(g.rows() == 6);
        CHECK(g.cols() == 4);
    }
}

TEST_CASE("encode_side runs the composed pipeline end to end") {
    Hin hin = test::tiny_hin();
    auto specs = user_meta_path_catalog();
    FeatureMatrix features = hashed_features(EntityType::User, hin, 6, 9);
    Rng rng(10);
    std::vector<GcnStack> stacks;
    for (const auto& s : specs) stacks.push_back(make_gcn_stack(s.name, 6, 5, 4, 2, rng));
    Vec a(4);
    for (int i = 0; i < 4; ++i) a(i) = rng.uniform(-1.0, 1.0);

    FusedRepresentation fused = encode_side(hin, specs, features, stacks, AttentionParams{a, false});
    CHECK(fused.e.rows() == 2);
    CHECK(fused.e.cols() == 4);
    CHECK(fused.alpha.cols() == 4);
    for (int i = 0; i < fused.alpha.rows(); ++i)
        CHECK(std::abs(fused.alpha.row(i).sum() - 1.0) <= 1e-12);
}
