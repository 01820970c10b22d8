#include "kcrec/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace kcrec {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::runtime_error("train config: learning_rate must be > 0");
    if (lambda < 0.0) throw std::runtime_error("train config: lambda must be >= 0");
    if (epochs < 0) throw std::runtime_error("train config: epochs must be >= 0");
    if (batch_size < 1) throw std::runtime_error("train config: batch_size must be >= 1");
    if (negatives_per_positive < 1)
        throw std::runtime_error("train config: negatives_per_positive must be >= 1");
}

namespace {

double clip_scale(double norm, double clip) {
    if (clip <= 0.0 || norm <= clip) return 1.0;
    return clip / norm;
}

void apply(Mat& param, const Mat& g, double lr, double clip) {
    if (param.rows() != g.rows() || param.cols() != g.cols())
        throw std::runtime_error("sgd_step: gradient shape mismatch");
    param -= (lr * clip_scale(g.norm(), clip)) * g;
}

void apply_vec(Vec& param, const Vec& g, double lr, double clip) {
    if (param.size() != g.size()) throw std::runtime_error("sgd_step: gradient shape mismatch");
    param -= (lr * clip_scale(g.norm(), clip)) * g;
}

}  // namespace

void sgd_step(ModelState& state, const GradientBundle& g, double learning_rate, double clip_norm,
              bool freeze_beta) {
    if (g.blocks.size() != state.blocks.size())
        throw std::runtime_error("sgd_step: gradient block count mismatch");
    for (std::size_t b = 0; b < state.blocks.size(); ++b) {
        BlockParams& bp = state.blocks[b];
        const BlockGradients& bg = g.blocks[b];
        if (bg.d_w.size() != bp.stacks.size())
            throw std::runtime_error("sgd_step: gradient path count mismatch");
        for (std::size_t p = 0; p < bp.stacks.size(); ++p) {
            if (bg.d_w[p].size() != bp.stacks[p].weights.size())
                throw std::runtime_error("sgd_step: gradient layer count mismatch");
            for (std::size_t l = 0; l < bp.stacks[p].weights.size(); ++l)
                apply(bp.stacks[p].weights[l], bg.d_w[p][l], learning_rate, clip_norm);
        }
        apply_vec(bp.attn.a, bg.d_a, learning_rate, clip_norm);
    }
    apply(state.mf.x, g.d_x, learning_rate, clip_norm);
    apply(state.mf.y, g.d_y, learning_rate, clip_norm);
    apply(state.mf.t_user, g.d_t_user, learning_rate, clip_norm);
    apply(state.mf.t_concept, g.d_t_concept, learning_rate, clip_norm);
    if (!freeze_beta) {
        state.mf.beta_user -=
            learning_rate * clip_scale(std::abs(g.d_beta_user), clip_norm) * g.d_beta_user;
        state.mf.beta_concept -=
            learning_rate * clip_scale(std::abs(g.d_beta_concept), clip_norm) * g.d_beta_concept;
    }
}

namespace {

// Uniform over the user's unobserved concepts. Rejection sampling first;
// after repeated collisions, falls back to an exact scan so dense users
// terminate. Returns -1 when the user observed everything.
int sample_negative(const RatingMatrix& ratings, int user, Rng& rng) {
    int n = ratings.concepts();
    int observed = static_cast<int>(ratings.by_user()[static_cast<std::size_t>(user)].size());
    if (observed >= n) return -1;
    for (int attempt = 0; attempt < 64; ++attempt) {
        int k = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
        if (!ratings.observed(user, k)) return k;
    }
    std::vector<int> open;
    open.reserve(static_cast<std::size_t>(n - observed));
    for (int k = 0; k < n; ++k)
        if (!ratings.observed(user, k)) open.push_back(k);
    return open[static_cast<std::size_t>(rng.uniform_index(open.size()))];
}

}  // namespace

TrainResult train(ModelState& state, const ModelInputs& inputs, const RatingMatrix& ratings,
                  const TrainConfig& config,
                  const std::function<void(int, const ModelState&)>& on_epoch) {
    config.validate();
    auto positives = ratings.positives();
    if (positives.empty()) throw std::runtime_error("no training positives");

    LossOptions opts;
    opts.lambda = config.lambda;
    opts.squared_norms = config.squared_norms;
    opts.full_grid = config.full_grid;

    Rng rng(config.seed);
    TrainResult result;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        auto t0 = std::chrono::steady_clock::now();
        double epoch_loss = 0.0;

        if (config.full_grid) {
            ForwardCache cache = model_forward(state, inputs);
            epoch_loss = model_loss({}, state, cache, opts, &ratings);
            GradientBundle g = model_backward({}, state, inputs, cache, opts, &ratings);
            sgd_step(state, g, config.learning_rate, config.clip_norm, config.freeze_beta);
        } else {
            std::vector<std::size_t> order(positives.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            rng.shuffle(order);

            std::vector<TrainSample> samples;
            samples.reserve(order.size() *
                            static_cast<std::size_t>(1 + config.negatives_per_positive));
            for (std::size_t idx : order) {
                const auto& pos = positives[idx];
                double target =
                    config.log1p_ratings ? std::log1p(pos.rating) : pos.rating;
                samples.push_back({pos.user, pos.concept_id, target, false});
                for (int j = 0; j < config.negatives_per_positive; ++j) {
                    int k = sample_negative(ratings, pos.user, rng);
                    if (k >= 0) samples.push_back({pos.user, k, 0.0, true});
                }
            }

            std::size_t total = samples.size();
            for (std::size_t start = 0; start < total; start += config.batch_size) {
                std::size_t end = std::min(total, start + config.batch_size);
                std::vector<TrainSample> batch(samples.begin() + start, samples.begin() + end);
                ForwardCache cache = model_forward(state, inputs);
                epoch_loss += model_loss(batch, state, cache, opts) *
                              static_cast<double>(batch.size());
                GradientBundle g = model_backward(batch, state, inputs, cache, opts);
                sgd_step(state, g, config.learning_rate, config.clip_norm, config.freeze_beta);
            }
            epoch_loss /= static_cast<double>(total);
        }

        auto t1 = std::chrono::steady_clock::now();
        result.epoch_losses.push_back(epoch_loss);
        result.epoch_wall_ms.push_back(
            std::chrono::duration<double, std::milli>(t1 - t0).count());
        if (on_epoch) on_epoch(epoch + 1, state);
    }
    return result;
}

}  // namespace kcrec
