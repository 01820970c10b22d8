#include "kcrec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "kcrec/rng.hpp"
#include "kcrec/tsv.hpp"

namespace kcrec {

std::vector<EvalInstance> build_eval_instances(const RatingMatrix& train,
                                               const std::vector<std::pair<int, int>>& test_pairs,
                                               int negatives, std::uint64_t seed) {
    if (test_pairs.empty()) throw std::runtime_error("eval: empty test split");
    if (negatives < 1) throw std::runtime_error("eval: negatives must be >= 1");
    int n = train.concepts();

    // union of train and test interactions per user appearing in the test set
    std::map<int, std::set<int>> touched;
    for (const auto& [u, k] : test_pairs) touched[u].insert(k);
    for (auto& [u, ks] : touched)
        for (const auto& [k, r] : train.by_user()[static_cast<std::size_t>(u)]) ks.insert(k);

    std::map<int, std::vector<int>> eligible;
    for (const auto& [u, ks] : touched) {
        std::vector<int> open;
        open.reserve(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k)
            if (!ks.count(k)) open.push_back(k);
        if (static_cast<int>(open.size()) < negatives)
            throw std::runtime_error("eval: user " + std::to_string(u) + " has only " +
                                     std::to_string(open.size()) + " eligible negatives, need " +
                                     std::to_string(negatives));
        eligible[u] = std::move(open);
    }

    Rng rng(seed);
    std::vector<EvalInstance> instances;
    instances.reserve(test_pairs.size());
    for (const auto& [u, k] : test_pairs) {
        EvalInstance inst;
        inst.user = u;
        inst.positive = k;
        inst.negatives = rng.sample_without_replacement(eligible[u],
                                                        static_cast<std::size_t>(negatives));
        instances.push_back(std::move(inst));
    }
    return instances;
}

int ranked_position(const std::vector<int>& candidates, const std::vector<double>& scores,
                    int positive) {
    if (candidates.size() != scores.size())
        throw std::runtime_error("ranked_position: candidate/score length mismatch");
    double pos_score = 0.0;
    bool found = false;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i] == positive) {
            pos_score = scores[i];
            found = true;
            break;
        }
    }
    if (!found) throw std::runtime_error("ranked_position: positive not among candidates");
    int rank = 1;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i] == positive) continue;
        if (scores[i] > pos_score || (scores[i] == pos_score && candidates[i] < positive)) ++rank;
    }
    return rank;
}

double instance_auc(const std::vector<int>& candidates, const std::vector<double>& scores,
                    int positive) {
    double pos_score = 0.0;
    bool found = false;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i] == positive) {
            pos_score = scores[i];
            found = true;
            break;
        }
    }
    if (!found) throw std::runtime_error("instance_auc: positive not among candidates");
    int below = 0;
    int tied = 0;
    int negatives = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (candidates[i] == positive) continue;
        ++negatives;
        if (scores[i] < pos_score)
            ++below;
        else if (scores[i] == pos_score)
            ++tied;
    }
    if (negatives == 0) throw std::runtime_error("instance_auc: no negatives");
    return (below + 0.5 * tied) / static_cast<double>(negatives);
}

double ideal_dcg(int positives, int k) {
    double z = 0.0;
    for (int i = 1; i <= std::min(positives, k); ++i) z += 1.0 / std::log2(i + 1.0);
    return z;
}

MetricReport evaluate_scored(const std::vector<ScoredInstance>& instances) {
    if (instances.empty()) throw std::runtime_error("evaluate: no instances");
    const std::vector<int> hr_ks = {1, 5, 10, 20};
    const std::vector<int> ndcg_ks = {5, 10, 20};

    MetricReport report;
    for (int k : hr_ks) report.hr[k] = 0.0;
    for (int k : ndcg_ks) report.ndcg[k] = 0.0;

    for (const ScoredInstance& inst : instances) {
        int rank = ranked_position(inst.candidates, inst.scores, inst.positive);
        for (int k : hr_ks)
            if (rank <= k) report.hr[k] += 1.0;
        for (int k : ndcg_ks)
            if (rank <= k) report.ndcg[k] += (1.0 / std::log2(rank + 1.0)) / ideal_dcg(1, k);
        report.mrr += 1.0 / rank;
        report.auc += instance_auc(inst.candidates, inst.scores, inst.positive);
    }
    double n = static_cast<double>(instances.size());
    for (int k : hr_ks) report.hr[k] /= n;
    for (int k : ndcg_ks) report.ndcg[k] /= n;
    report.mrr /= n;
    report.auc /= n;
    report.n_instances = static_cast<std::int64_t>(instances.size());
    return report;
}

MetricReport evaluate(const MfParams& mf, const Mat& e_user, const Mat& e_concept,
                      const std::vector<EvalInstance>& instances) {
    std::vector<ScoredInstance> scored;
    scored.reserve(instances.size());
    for (const EvalInstance& inst : instances) {
        ScoredInstance s;
        s.positive = inst.positive;
        s.candidates.reserve(inst.negatives.size() + 1);
        s.candidates.push_back(inst.positive);
        s.candidates.insert(s.candidates.end(), inst.negatives.begin(), inst.negatives.end());
        s.scores = predict_all_for_user(mf, e_user, e_concept, inst.user, s.candidates);
        scored.push_back(std::move(s));
    }
    return evaluate_scored(scored);
}

namespace {

std::vector<std::pair<std::string, std::string>> report_cells(const MetricReport& r) {
    std::vector<std::pair<std::string, std::string>> cells;
    for (int k : {1, 5, 10, 20})
        cells.emplace_back("hr@" + std::to_string(k), format_double(r.hr.at(k), 6));
    for (int k : {5, 10, 20})
        cells.emplace_back("ndcg@" + std::to_string(k), format_double(r.ndcg.at(k), 6));
    cells.emplace_back("mrr", format_double(r.mrr, 6));
    cells.emplace_back("auc", format_double(r.auc, 6));
    cells.emplace_back("n_instances", std::to_string(r.n_instances));
    return cells;
}

}  // namespace

std::string MetricReport::to_tsv() const {
    auto cells = report_cells(*this);
    std::string header;
    std::string values;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) {
            header += '\t';
            values += '\t';
        }
        header += cells[i].first;
        values += cells[i].second;
    }
    return header + "\n" + values + "\n";
}

std::string MetricReport::to_json() const {
    nlohmann::json j;
    for (int k : {1, 5, 10, 20}) j["hr@" + std::to_string(k)] = hr.at(k);
    for (int k : {5, 10, 20}) j["ndcg@" + std::to_string(k)] = ndcg.at(k);
    j["mrr"] = mrr;
    j["auc"] = auc;
    j["n_instances"] = n_instances;
    return j.dump(2) + "\n";
}

}  // namespace kcrec
