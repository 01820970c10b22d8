#include "kcrec/mf.hpp"

#include <algorithm>
#include <stdexcept>

namespace kcrec {

MfParams MfParams::init(int latent_dim, int rep_dim, int users, int concepts, Rng& rng) {
    MfParams p;
    p.x = glorot_uniform(latent_dim, users, rng);
    p.y = glorot_uniform(latent_dim, concepts, rng);
    p.t_user = glorot_uniform(rep_dim, users, rng);
    p.t_concept = glorot_uniform(rep_dim, concepts, rng);
    p.beta_user = 1.0;
    p.beta_concept = 1.0;
    return p;
}

double predict_rating(const MfParams& params, const Eigen::Ref<const Eigen::RowVectorXd>& e_user,
                      const Eigen::Ref<const Eigen::RowVectorXd>& e_concept, int user,
                      int concept_id) {
    if (user < 0 || user >= params.users())
        throw std::out_of_range("predict_rating: user index " + std::to_string(user));
    if (concept_id < 0 || concept_id >= params.concepts())
        throw std::out_of_range("predict_rating: concept index " + std::to_string(concept_id));
    double score = params.x.col(user).dot(params.y.col(concept_id));
    score += params.beta_user * (e_user * params.t_concept.col(concept_id))(0);
    score += params.beta_concept * (params.t_user.col(user).transpose() * e_concept.transpose())(0);
    return score;
}

std::vector<double> predict_all_for_user(const MfParams& params, const Mat& e_user,
                                         const Mat& e_concept, int user,
                                         const std::vector<int>& candidates) {
    std::vector<double> out;
    out.reserve(candidates.size());
    for (int k : candidates)
        out.push_back(predict_rating(params, e_user.row(user), e_concept.row(k), user, k));
    return out;
}

TopN top_n(const MfParams& params, const Mat& e_user, const Mat& e_concept, int user, int n,
           const std::unordered_set<int>& exclude) {
    if (n < 1) throw std::invalid_argument("top_n: N must be >= 1");
    std::vector<std::pair<int, double>> scored;
    scored.reserve(static_cast<std::size_t>(params.concepts()));
    for (int k = 0; k < params.concepts(); ++k) {
        if (exclude.count(k)) continue;
        scored.emplace_back(k,
                            predict_rating(params, e_user.row(user), e_concept.row(k), user, k));
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    TopN out;
    out.exhausted = static_cast<int>(scored.size()) < n;
    scored.resize(std::min<std::size_t>(scored.size(), static_cast<std::size_t>(n)));
    out.items = std::move(scored);
    return out;
}

void RatingMatrix::add(int user, int concept_id, double rating) {
    auto& row = by_user_.at(static_cast<std::size_t>(user));
    auto it = std::lower_bound(row.begin(), row.end(), concept_id,
                               [](const auto& p, int k) { return p.first < k; });
    if (it != row.end() && it->first == concept_id)
        it->second += rating;
    else
        row.insert(it, {concept_id, rating});
}

bool RatingMatrix::observed(int user, int concept_id) const {
    const auto& row = by_user_.at(static_cast<std::size_t>(user));
    auto it = std::lower_bound(row.begin(), row.end(), concept_id,
                               [](const auto& p, int k) { return p.first < k; });
    return it != row.end() && it->first == concept_id;
}

double RatingMatrix::rating(int user, int concept_id) const {
    const auto& row = by_user_.at(static_cast<std::size_t>(user));
    auto it = std::lower_bound(row.begin(), row.end(), concept_id,
                               [](const auto& p, int k) { return p.first < k; });
    return (it != row.end() && it->first == concept_id) ? it->second : 0.0;
}

std::vector<RatingMatrix::Entry> RatingMatrix::positives() const {
    std::vector<Entry> out;
    for (int u = 0; u < users_; ++u)
        for (const auto& [k, r] : by_user_[static_cast<std::size_t>(u)]) out.push_back({u, k, r});
    return out;
}

}  // namespace kcrec
