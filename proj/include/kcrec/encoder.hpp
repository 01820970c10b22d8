#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "kcrec/features.hpp"
#include "kcrec/meta_path.hpp"
#include "kcrec/rng.hpp"

namespace kcrec {

// Symmetric-normalized propagation operator P = D^{-1/2} (A + I) D^{-1/2}.
// Self-loops keep every degree >= 1; isolated nodes get P[i][i] = 1.
struct NormalizedAdjacency {
    SpMatD p;
};

NormalizedAdjacency normalize_adjacency(const PathAdjacency& adj);
NormalizedAdjacency normalize_binary(const SpMatI& binary);

// P = I; used when context mixing is switched off.
NormalizedAdjacency identity_adjacency(int n);

// Per-meta-path convolution weights W^0..W^{L-1}. Weights are shared across
// nodes within a layer; each meta-path has its own stack.
struct GcnStack {
    std::string meta_path_name;
    std::vector<Mat> weights;

    int layers() const { return static_cast<int>(weights.size()); }
    int input_width() const { return static_cast<int>(weights.front().rows()); }
    int output_width() const { return static_cast<int>(weights.back().cols()); }
};

// Uniform in [-s, s], s = sqrt(6 / (fan_in + fan_out)).
Mat glorot_uniform(int rows, int cols, Rng& rng);

GcnStack make_gcn_stack(const std::string& meta_path_name, int input_width, int hidden_width,
                        int output_width, int layers, Rng& rng);

// Layer inputs and propagated products kept for the backward pass:
// h[0] = X, ph[l] = P h[l], h[l+1] = ReLU(ph[l] W^l).
struct GcnActivations {
    std::vector<Mat> h;
    std::vector<Mat> ph;
};

// Runs the propagation stack; returns h^L. Throws naming the layer on a
// width-chain mismatch. Pass `cache` to retain activations.
Mat gcn_forward(const NormalizedAdjacency& p, const Mat& features, const GcnStack& stack,
                GcnActivations* cache = nullptr);

// dW per layer for an upstream gradient on the stack output.
std::vector<Mat> gcn_backward(const NormalizedAdjacency& p, const GcnStack& stack,
                              const GcnActivations& acts, const Mat& grad_output,
                              Mat* grad_input = nullptr);

// Trainable attention vector; the gating nonlinearity is fixed to tanh.
// global_mode averages logits over nodes so every node shares one weight
// row (ablation switch); default is per-node attention.
struct AttentionParams {
    Vec a;
    bool global_mode = false;
};

struct AttentionActivations {
    Mat z;      // node x path, a . e_p[i]
    Mat gate;   // tanh(z)
    Mat alpha;  // softmax rows
};

// alpha[i][p] = exp(tanh(a . e_p[i])) / sum_q exp(tanh(a . e_q[i])).
// The softmax denominator is accumulated in value-sorted order so that
// permuting the meta-path list permutes alpha columns bit-exactly.
Mat attention_scores(const std::vector<Mat>& reps, const AttentionParams& params,
                     AttentionActivations* cache = nullptr);

struct FusedRepresentation {
    Mat e;      // node x d
    Mat alpha;  // node x |MP|
};

FusedRepresentation fuse(const std::vector<Mat>& reps, const Mat& alpha);

struct AttentionGradients {
    std::vector<Mat> d_reps;
    Vec d_a;
};

AttentionGradients attention_backward(const std::vector<Mat>& reps,
                                      const AttentionParams& params,
                                      const AttentionActivations& acts, const Mat& grad_fused);

// compose -> normalize -> gcn_forward per spec, then attention + fuse.
FusedRepresentation encode_side(const Hin& hin, const std::vector<MetaPathSpec>& specs,
                                const FeatureMatrix& features,
                                const std::vector<GcnStack>& stacks,
                                const AttentionParams& attn);

}  // namespace kcrec
