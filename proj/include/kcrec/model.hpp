#pragma once

#include <array>
#include <string>
#include <vector>

#include "kcrec/encoder.hpp"
#include "kcrec/mf.hpp"

namespace kcrec {

// Feature-input variants. s keeps content features but switches context
// mixing off (P = I per path); r keeps the meta-path graphs but replaces
// features with one-hot rows; s+r is the full model; h collapses the typed
// graph into one untyped adjacency over every entity.
enum class Mode { ContentOnly, ContextOnly, Full, Homogeneous };

const char* to_string(Mode mode);
Mode mode_from_string(const std::string& s);  // accepts s, r, s+r, h or the long names

// Trainable parameters of one encoder block: the user side, the concept
// side, or the single merged block in homogeneous mode.
struct BlockParams {
    std::vector<std::string> path_names;
    std::vector<GcnStack> stacks;
    AttentionParams attn;
};

// Fixed per-run inputs matching one BlockParams: a propagation operator per
// path plus h^0.
struct BlockInputs {
    std::vector<std::string> path_names;
    std::vector<NormalizedAdjacency> adjacency;
    Mat features;
};

// Row range of one entity side inside a block's fused output.
struct SliceRef {
    int block = 0;
    int offset = 0;
    int count = 0;
};

struct ModelState {
    Mode mode = Mode::Full;
    std::vector<BlockParams> blocks;
    MfParams mf;
};

struct ModelInputs {
    std::vector<BlockInputs> blocks;
    SliceRef user_slice;
    SliceRef concept_slice;
};

// Per-type content features for input building. Only the anchor types are
// read outside homogeneous mode; h needs rows for every type.
using FeatureSet = std::array<FeatureMatrix, kEntityTypeCount>;

// Realizes the mode semantics: composes and normalizes meta-path graphs,
// swaps in identity P or one-hot X where the mode says so, or builds the
// merged adjacency with zero-padded stacked features.
ModelInputs build_model_inputs(const Hin& hin, Mode mode,
                               const std::vector<MetaPathSpec>& user_specs,
                               const std::vector<MetaPathSpec>& concept_specs,
                               const FeatureSet& features);

// Fresh parameters sized against `inputs`; draws every tensor from `rng` in
// a fixed order (blocks, then paths, then MF) so a seed pins the state.
ModelState init_model_state(Mode mode, const ModelInputs& inputs, int users, int concepts,
                            int latent_dim, int rep_dim, int hidden_width, int layers,
                            bool global_attention, Rng& rng);

// Everything a forward pass retains for the backward pass.
struct BlockCache {
    std::vector<GcnActivations> gcn;
    std::vector<Mat> reps;
    AttentionActivations attn;
    FusedRepresentation fused;
};

struct ForwardCache {
    std::vector<BlockCache> blocks;
    Mat e_user;
    Mat e_concept;
};

ForwardCache model_forward(const ModelState& state, const ModelInputs& inputs);

struct TrainSample {
    int user = 0;
    int concept_id = 0;
    double rating = 0.0;
    bool is_negative = false;
};

struct LossOptions {
    double lambda = 1e-4;
    bool squared_norms = false;  // lambda * ||col||^2 instead of lambda * ||col||
    bool full_grid = false;      // literal sum over every (user, concept) cell
};

// Mean over the batch of (r - r_hat)^2 plus lambda times the norms of the
// x / y / t columns the batch touches, each distinct column once. full_grid
// replaces the batch with every cell of `grid` and sums instead of
// averaging (the objective as printed, for tiny instances).
double model_loss(const std::vector<TrainSample>& batch, const ModelState& state,
                  const ForwardCache& cache, const LossOptions& opts,
                  const RatingMatrix* grid = nullptr);

struct BlockGradients {
    std::vector<std::vector<Mat>> d_w;  // [path][layer]
    Vec d_a;
};

struct GradientBundle {
    std::vector<BlockGradients> blocks;
    Mat d_x;
    Mat d_y;
    Mat d_t_user;
    Mat d_t_concept;
    double d_beta_user = 0.0;
    double d_beta_concept = 0.0;
};

GradientBundle zero_gradients(const ModelState& state);

// Analytic gradient of model_loss for every trainable tensor. Throws naming
// the tensor when any gradient entry comes out non-finite.
GradientBundle model_backward(const std::vector<TrainSample>& batch, const ModelState& state,
                              const ModelInputs& inputs, const ForwardCache& cache,
                              const LossOptions& opts, const RatingMatrix* grid = nullptr);

}  // namespace kcrec
