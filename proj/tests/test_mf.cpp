#include <doctest.h>

#include "helpers.hpp"
#include "kcrec/mf.hpp"

using namespace kcrec;

namespace {

MfParams zero_params(int latent, int rep, int users, int concepts) {
    MfParams p;
    p.x = Mat::Zero(latent, users);
    p.y = Mat::Zero(latent, concepts);
    p.t_user = Mat::Zero(rep, users);
    p.t_concept = Mat::Zero(rep, concepts);
    return p;
}

}  // namespace

TEST_CASE("predict_rating: zero parameters score zero") {
    MfParams p = zero_params(2, 2, 1, 1);
    p.beta_user = 0.0;
    p.beta_concept = 0.0;
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Ones(2);
    CHECK(predict_rating(p, e, e, 0, 0) == 0.0);
}

TEST_CASE("predict_rating: latent-factor dot product oracle") {
    MfParams p = zero_params(2, 2, 1, 1);
    p.beta_user = 0.0;
    p.beta_concept = 0.0;
    p.x.col(0) << 1.0, 2.0;
    p.y.col(0) << 3.0, 4.0;
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(2);
    CHECK(predict_rating(p, e, e, 0, 0) == doctest::Approx(11.0));
}

TEST_CASE("predict_rating: user bridge term oracle") {
    MfParams p = zero_params(2, 2, 1, 1);
    p.beta_user = 1.0;
    p.beta_concept = 0.0;
    p.t_concept.col(0) << 0.5, 9.0;
    Eigen::RowVectorXd e_u(2), e_k(2);
    e_u << 1.0, 0.0;
    e_k << 0.0, 0.0;
    CHECK(predict_rating(p, e_u, e_k, 0, 0) == doctest::Approx(0.5));
}

TEST_CASE("predict_rating: full form sums all three terms") {
    MfParams p = zero_params(2, 2, 1, 1);
    p.x.col(0) << 1.0, 1.0;
    p.y.col(0) << 2.0, 0.0;
    p.t_user.col(0) << 1.0, 3.0;
    p.t_concept.col(0) << 0.0, 1.0;
    p.beta_user = 2.0;
    p.beta_concept = 0.5;
    Eigen::RowVectorXd e_u(2), e_k(2);
    e_u << 1.0, 1.0;
    e_k << 4.0, 0.0;
    // 2 + 2*(0+1) + 0.5*(4+0) = 6
    CHECK(predict_rating(p, e_u, e_k, 0, 0) == doctest::Approx(6.0));
}

TEST_CASE("predict_rating rejects out-of-range indices") {
    MfParams p = zero_params(2, 2, 2, 3);
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(2);
    CHECK_THROWS_AS(predict_rating(p, e, e, 2, 0), std::out_of_range);
    CHECK_THROWS_AS(predict_rating(p, e, e, 0, 3), std::out_of_range);
    CHECK_THROWS_AS(predict_rating(p, e, e, -1, 0), std::out_of_range);
}

TEST_CASE("predict_all_for_user equals repeated single calls, order preserved") {
    Rng rng(6);
    MfParams p = MfParams::init(3, 4, 5, 7, rng);
    Mat e_user(5, 4), e_concept(7, 4);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 4; ++j) e_user(i, j) = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 4; ++j) e_concept(i, j) = rng.uniform(-1.0, 1.0);

    std::vector<int> candidates = {3, 0, 3, 6};
    auto scores = predict_all_for_user(p, e_user, e_concept, 2, candidates);
    REQUIRE(scores.size() == 4);
    for (std::size_t i = 0; i < candidates.size(); ++i)
        CHECK(scores[i] ==
              predict_rating(p, e_user.row(2), e_concept.row(candidates[i]), 2, candidates[i]));
    CHECK(scores[0] == scores[2]);  // duplicate candidate, identical score

    CHECK(predict_all_for_user(p, e_user, e_concept, 2, {}).empty());
}

TEST_CASE("top_n: ranking, exclusion, tie-break and exhaustion") {
    // scores are controlled through x.y alone
    MfParams p = zero_params(1, 1, 1, 5);
    p.beta_user = 0.0;
    p.beta_concept = 0.0;
    p.x.col(0) << 1.0;
    p.y.row(0) << 3.0, 1.0, 3.0, 2.0, 0.5;
    Mat e_user = Mat::Zero(1, 1);
    Mat e_concept = Mat::Zero(5, 1);

    TopN top = top_n(p, e_user, e_concept, 0, 3, {});
    REQUIRE(top.items.size() == 3);
    CHECK(top.items[0].first == 0);  // 3.0, index tie broken upward
    CHECK(top.items[1].first == 2);  // 3.0
    CHECK(top.items[2].first == 3);  // 2.0
    CHECK(!top.exhausted);

    TopN filtered = top_n(p, e_user, e_concept, 0, 3, {0, 2});
    REQUIRE(filtered.items.size() == 3);
    CHECK(filtered.items[0].first == 3);
    CHECK(filtered.items[1].first == 1);
    CHECK(filtered.items[2].first == 4);

    TopN drained = top_n(p, e_user, e_concept, 0, 10, {0, 2});
    CHECK(drained.items.size() == 3);
    CHECK(drained.exhausted);
}

TEST_CASE("MfParams::init sizes tensors and seeds deterministically") {
    Rng rng1(8), rng2(8);
    MfParams a = MfParams::init(3, 5, 4, 6, rng1);
    MfParams b = MfParams::init(3, 5, 4, 6, rng2);
    CHECK(a.latent_dim() == 3);
    CHECK(a.rep_dim() == 5);
    CHECK(a.users() == 4);
    CHECK(a.concepts() == 6);
    CHECK(a.beta_user == 1.0);
    CHECK(a.beta_concept == 1.0);
    CHECK((a.x.array() == b.x.array()).all());
    CHECK((a.t_concept.array() == b.t_concept.array()).all());
}

TEST_CASE("rating matrix: observation mask, accumulation, sorted positives") {
    RatingMatrix r(3, 4);
    r.add(0, 2, 1.0);
    r.add(0, 1, 2.0);
    r.add(0, 2, 3.0);  // accumulates
    r.add(2, 0, 1.0);

    CHECK(r.users() == 3);
    CHECK(r.concepts() == 4);
    CHECK(r.observed(0, 2));
    CHECK(!r.observed(1, 0));
    CHECK(r.rating(0, 2) == doctest::Approx(4.0));
    CHECK(r.rating(0, 1) == doctest::Approx(2.0));
    CHECK(r.rating(1, 3) == 0.0);

    auto positives = r.positives();
    REQUIRE(positives.size() == 3);
    CHECK(positives[0].user == 0);
    CHECK(positives[0].concept_id == 1);  // per-user lists stay sorted
    CHECK(positives[1].concept_id == 2);
    CHECK(positives[2].user == 2);

    CHECK(r.by_user()[0].size() == 2);
    CHECK(r.by_user()[1].empty());
}
