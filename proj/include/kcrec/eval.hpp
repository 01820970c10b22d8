#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kcrec/mf.hpp"

namespace kcrec {

// One ranked-candidate trial: the positive plus sampled negatives.
struct EvalInstance {
    int user = 0;
    int positive = 0;
    std::vector<int> negatives;
};

// One instance per test pair, in input order. Negatives are drawn uniformly
// without replacement from the concepts the user never touched in train or
// test; too few eligible concepts is a hard error naming the user.
std::vector<EvalInstance> build_eval_instances(const RatingMatrix& train,
                                               const std::vector<std::pair<int, int>>& test_pairs,
                                               int negatives, std::uint64_t seed);

// 1-based rank of `positive` among `candidates` under `scores`, ordered by
// descending score with ties broken by ascending concept index.
int ranked_position(const std::vector<int>& candidates, const std::vector<double>& scores,
                    int positive);

// Mann-Whitney AUC for one instance: negatives strictly below the positive
// count 1, ties count 1/2.
double instance_auc(const std::vector<int>& candidates, const std::vector<double>& scores,
                    int positive);

// Ideal DCG for `positives` relevant items cut at k; the single-positive
// protocol always normalizes by 1.
double ideal_dcg(int positives, int k);

struct MetricReport {
    std::map<int, double> hr;    // K in {1,5,10,20}
    std::map<int, double> ndcg;  // K in {5,10,20}
    double mrr = 0.0;
    double auc = 0.0;
    std::int64_t n_instances = 0;

    std::string to_tsv() const;
    std::string to_json() const;
};

struct ScoredInstance {
    int positive = 0;
    std::vector<int> candidates;
    std::vector<double> scores;
};

MetricReport evaluate_scored(const std::vector<ScoredInstance>& instances);

// Scores every instance with the rating predictor and aggregates.
MetricReport evaluate(const MfParams& mf, const Mat& e_user, const Mat& e_concept,
                      const std::vector<EvalInstance>& instances);

}  // namespace kcrec
