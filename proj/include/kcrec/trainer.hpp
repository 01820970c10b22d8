#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "kcrec/model.hpp"

namespace kcrec {

struct TrainConfig {
    double learning_rate = 0.01;
    double lambda = 1e-4;
    int epochs = 0;
    int batch_size = 256;
    int negatives_per_positive = 1;
    std::uint64_t seed = 0;
    Mode mode = Mode::Full;
    double clip_norm = 5.0;       // per-tensor; <= 0 disables clipping
    bool squared_norms = false;
    bool full_grid = false;       // one full-grid step per epoch, tiny instances only
    bool freeze_beta = false;
    bool log1p_ratings = false;   // tame count-scale targets
    int checkpoint_every = 0;     // epochs between checkpoints; consumed by the runner

    void validate() const;
};

// theta <- theta - lr * g, each tensor clipped to clip_norm first. Update
// order is fixed (blocks in order: per-path W then a; then x, y, t_user,
// t_concept, betas) so runs are bitwise reproducible.
void sgd_step(ModelState& state, const GradientBundle& g, double learning_rate, double clip_norm,
              bool freeze_beta = false);

struct TrainResult {
    std::vector<double> epoch_losses;   // sample-weighted mean loss per epoch
    std::vector<double> epoch_wall_ms;
};

// Shuffles observed positives each epoch with the seeded generator, pairs
// each with freshly sampled negatives (never colliding with the user's
// observed set), and steps per batch. The encoder forward runs on the full
// graph every batch. epochs = 0 returns the state untouched. on_epoch, when
// set, runs after each epoch with the 1-based epoch number.
TrainResult train(ModelState& state, const ModelInputs& inputs, const RatingMatrix& ratings,
                  const TrainConfig& config,
                  const std::function<void(int, const ModelState&)>& on_epoch = {});

}  // namespace kcrec
