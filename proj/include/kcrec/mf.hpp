#pragma once

#include <cstdint>
#include <set>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "kcrec/encoder.hpp"
#include "kcrec/rng.hpp"

namespace kcrec {

// Extended matrix factorization parameters. Columns index entities:
// x is D x m, y is D x n, the bridge vectors t are d x m / d x n. The
// bridges project encoder representations into rating space; beta_u and
// beta_k scale the two bridge terms and are trained (init 1.0).
struct MfParams {
    Mat x;
    Mat y;
    Mat t_user;
    Mat t_concept;
    double beta_user = 1.0;
    double beta_concept = 1.0;

    int latent_dim() const { return static_cast<int>(x.rows()); }
    int users() const { return static_cast<int>(x.cols()); }
    int concepts() const { return static_cast<int>(y.cols()); }
    int rep_dim() const { return static_cast<int>(t_user.rows()); }

    static MfParams init(int latent_dim, int rep_dim, int users, int concepts, Rng& rng);
};

// r_hat = x_u . y_k + beta_u (e_u . t_k) + beta_k (t_u . e_k)
double predict_rating(const MfParams& params, const Eigen::Ref<const Eigen::RowVectorXd>& e_user,
                      const Eigen::Ref<const Eigen::RowVectorXd>& e_concept, int user,
                      int concept_id);

std::vector<double> predict_all_for_user(const MfParams& params, const Mat& e_user,
                                         const Mat& e_concept, int user,
                                         const std::vector<int>& candidates);

struct TopN {
    std::vector<std::pair<int, double>> items;  // (concept index, score), best first
    bool exhausted = false;                     // fewer candidates than requested
};

// N best-scoring concepts outside `exclude`; ties broken by ascending
// concept index so rankings are reproducible.
TopN top_n(const MfParams& params, const Mat& e_user, const Mat& e_concept, int user, int n,
           const std::unordered_set<int>& exclude);

// Sparse click-count ratings with the observed-pair mask.
class RatingMatrix {
public:
    RatingMatrix(int users, int concepts) : users_(users), concepts_(concepts), by_user_(users) {}

    void add(int user, int concept_id, double rating);
    bool observed(int user, int concept_id) const;
    double rating(int user, int concept_id) const;  // implicit 0 off the observed set

    int users() const { return users_; }
    int concepts() const { return concepts_; }

    const std::vector<std::vector<std::pair<int, double>>>& by_user() const { return by_user_; }

    struct Entry {
        int user;
        int concept_id;
        double rating;
    };
    std::vector<Entry> positives() const;

private:
    int users_;
    int concepts_;
    std::vector<std::vector<std::pair<int, double>>> by_user_;  // sorted by concept
};

}  // namespace kcrec
