#include "kcrec/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kcrec {

NormalizedAdjacency normalize_binary(const SpMatI& binary) {
    if (binary.rows() != binary.cols())
        throw std::runtime_error("normalize_adjacency: adjacency must be square");
    int n = static_cast<int>(binary.rows());

    SpMatD tilde(n, n);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(binary.nonZeros()) + static_cast<std::size_t>(n));
    for (int k = 0; k < binary.outerSize(); ++k)
        for (SpMatI::InnerIterator it(binary, k); it; ++it)
            if (it.row() != it.col()) trip.emplace_back(it.row(), it.col(), 1.0);
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, 1.0);  // A + I
    tilde.setFromTriplets(trip.begin(), trip.end());

    Vec inv_sqrt_deg(n);
    for (int i = 0; i < n; ++i) inv_sqrt_deg[i] = 0.0;
    for (int k = 0; k < tilde.outerSize(); ++k)
        for (SpMatD::InnerIterator it(tilde, k); it; ++it) inv_sqrt_deg[it.row()] += it.value();
    for (int i = 0; i < n; ++i) inv_sqrt_deg[i] = 1.0 / std::sqrt(inv_sqrt_deg[i]);

    NormalizedAdjacency out;
    out.p = tilde;
    for (int k = 0; k < out.p.outerSize(); ++k)
        for (SpMatD::InnerIterator it(out.p, k); it; ++it)
            it.valueRef() = inv_sqrt_deg[it.row()] * it.value() * inv_sqrt_deg[it.col()];
    return out;
}

NormalizedAdjacency normalize_adjacency(const PathAdjacency& adj) { return normalize_binary(adj.binary); }

NormalizedAdjacency identity_adjacency(int n) {
    NormalizedAdjacency out;
    out.p.resize(n, n);
    out.p.setIdentity();
    return out;
}

Mat glorot_uniform(int rows, int cols, Rng& rng) {
    double s = std::sqrt(6.0 / (static_cast<double>(rows) + static_cast<double>(cols)));
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-s, s);
    return m;
}

GcnStack make_gcn_stack(const std::string& meta_path_name, int input_width, int hidden_width,
                        int output_width, int layers, Rng& rng) {
    if (layers < 1 || layers > 4)
        throw std::runtime_error("gcn stack: layer count must be in 1..4, got " +
                                 std::to_string(layers));
    GcnStack stack;
    stack.meta_path_name = meta_path_name;
    int in = input_width;
    for (int l = 0; l < layers; ++l) {
        int out = (l == layers - 1) ? output_width : hidden_width;
        stack.weights.push_back(glorot_uniform(in, out, rng));
        in = out;
    }
    return stack;
}

Mat gcn_forward(const NormalizedAdjacency& p, const Mat& features, const GcnStack& stack,
                GcnActivations* cache) {
    if (features.cols() != stack.weights.front().rows())
        throw std::runtime_error("gcn_forward: feature width " + std::to_string(features.cols()) +
                                 " does not match layer 0 input width " +
                                 std::to_string(stack.weights.front().rows()));
    if (cache) {
        cache->h.clear();
        cache->ph.clear();
    }

    Mat h = features;
    for (int l = 0; l < stack.layers(); ++l) {
        if (h.cols() != stack.weights[l].rows())
            throw std::runtime_error("gcn_forward: width chain mismatch at layer " +
                                     std::to_string(l));
        Mat ph = p.p * h;
        if (cache) {
            cache->h.push_back(std::move(h));
            cache->ph.push_back(ph);
        }
        h = (ph * stack.weights[l]).cwiseMax(0.0);
    }
    if (cache) cache->h.push_back(h);
    return h;
}

std::vector<Mat> gcn_backward(const NormalizedAdjacency& p, const GcnStack& stack,
                              const GcnActivations& acts, const Mat& grad_output,
                              Mat* grad_input) {
    int layers = stack.layers();
    std::vector<Mat> d_w(static_cast<std::size_t>(layers));
    Mat d_h = grad_output;
    for (int l = layers - 1; l >= 0; --l) {
        // ReLU subgradient at 0 is 0; the post-activation sign carries the mask.
        Mat d_z = (acts.h[static_cast<std::size_t>(l) + 1].array() > 0.0)
                      .select(d_h, Mat::Zero(d_h.rows(), d_h.cols()));
        d_w[static_cast<std::size_t>(l)] =
            acts.ph[static_cast<std::size_t>(l)].transpose() * d_z;
        if (l > 0 || grad_input) {
            Mat d_ph = d_z * stack.weights[static_cast<std::size_t>(l)].transpose();
            d_h = p.p * d_ph;  // P symmetric
        }
    }
    if (grad_input) *grad_input = d_h;
    return d_w;
}

Mat attention_scores(const std::vector<Mat>& reps, const AttentionParams& params,
                     AttentionActivations* cache) {
    if (reps.empty()) throw std::runtime_error("attention_scores: need at least one meta-path");
    int n = static_cast<int>(reps.front().rows());
    int paths = static_cast<int>(reps.size());
    for (const auto& r : reps)
        if (r.rows() != n || r.cols() != reps.front().cols())
            throw std::runtime_error("attention_scores: representation shapes differ");

    Mat z(n, paths);
    for (int p = 0; p < paths; ++p) z.col(p) = reps[static_cast<std::size_t>(p)] * params.a;
    Mat gate = z.array().tanh();

    Mat alpha(n, paths);
    std::vector<double> exps(static_cast<std::size_t>(paths));
    std::vector<double> sorted(static_cast<std::size_t>(paths));
    if (params.global_mode) {
        Vec mean_gate = gate.colwise().mean().transpose();
        for (int p = 0; p < paths; ++p) exps[static_cast<std::size_t>(p)] = std::exp(mean_gate[p]);
        sorted = exps;
        std::sort(sorted.begin(), sorted.end());
        double denom = 0.0;
        for (double v : sorted) denom += v;
        for (int p = 0; p < paths; ++p)
            alpha.col(p).setConstant(exps[static_cast<std::size_t>(p)] / denom);
    } else {
        for (int i = 0; i < n; ++i) {
            for (int p = 0; p < paths; ++p)
                exps[static_cast<std::size_t>(p)] = std::exp(gate(i, p));
            // Value-sorted accumulation keeps the denominator identical under
            // any permutation of the meta-path list.
            sorted = exps;
            std::sort(sorted.begin(), sorted.end());
            double denom = 0.0;
            for (double v : sorted) denom += v;
            for (int p = 0; p < paths; ++p) alpha(i, p) = exps[static_cast<std::size_t>(p)] / denom;
        }
    }

    if (cache) {
        cache->z = std::move(z);
        cache->gate = std::move(gate);
        cache->alpha = alpha;
    }
    return alpha;
}

FusedRepresentation fuse(const std::vector<Mat>& reps, const Mat& alpha) {
    int n = static_cast<int>(reps.front().rows());
    int d = static_cast<int>(reps.front().cols());
    FusedRepresentation out;
    out.alpha = alpha;
    out.e = Mat::Zero(n, d);
    for (std::size_t p = 0; p < reps.size(); ++p)
        out.e += (reps[p].array().colwise() * alpha.col(static_cast<int>(p)).array()).matrix();
    return out;
}

AttentionGradients attention_backward(const std::vector<Mat>& reps,
                                      const AttentionParams& params,
                                      const AttentionActivations& acts, const Mat& grad_fused) {
    int n = static_cast<int>(grad_fused.rows());
    int paths = static_cast<int>(reps.size());

    AttentionGradients out;
    out.d_reps.assign(static_cast<std::size_t>(paths), Mat::Zero(n, grad_fused.cols()));
    out.d_a = Vec::Zero(params.a.size());

    // s[i][p] = dL/d alpha[i][p]
    Mat s(n, paths);
    for (int p = 0; p < paths; ++p)
        s.col(p) = (grad_fused.array() * reps[static_cast<std::size_t>(p)].array()).rowwise().sum();

    Mat d_gate_arg;  // dL/d z[i][p] through the softmax and tanh
    if (params.global_mode) {
        Vec alpha_row = acts.alpha.row(0).transpose();
        Vec s_total = s.colwise().sum().transpose();
        double weighted = alpha_row.dot(s_total);
        Vec d_mean_gate(paths);
        for (int p = 0; p < paths; ++p) d_mean_gate[p] = alpha_row[p] * (s_total[p] - weighted);
        d_gate_arg = (1.0 - acts.gate.array().square()).matrix() * (1.0 / n);
        for (int p = 0; p < paths; ++p) d_gate_arg.col(p) *= d_mean_gate[p];
    } else {
        Vec weighted = (acts.alpha.array() * s.array()).rowwise().sum();
        Mat d_gate = acts.alpha.array() * (s.array().colwise() - weighted.array());
        d_gate_arg = d_gate.array() * (1.0 - acts.gate.array().square());
    }

    for (int p = 0; p < paths; ++p) {
        const Mat& rep = reps[static_cast<std::size_t>(p)];
        out.d_reps[static_cast<std::size_t>(p)] =
            (grad_fused.array().colwise() * acts.alpha.col(p).array()).matrix() +
            d_gate_arg.col(p) * params.a.transpose();
        out.d_a += rep.transpose() * d_gate_arg.col(p);
    }
    return out;
}

FusedRepresentation encode_side(const Hin& hin, const std::vector<MetaPathSpec>& specs,
                                const FeatureMatrix& features,
                                const std::vector<GcnStack>& stacks,
                                const AttentionParams& attn) {
    if (specs.empty()) throw std::runtime_error("encode_side: no meta-paths given");
    if (specs.size() != stacks.size())
        throw std::runtime_error("encode_side: spec/stack count mismatch");
    for (const auto& spec : specs)
        if (spec.anchor != features.entity_type)
            throw std::runtime_error("encode_side: meta-path " + spec.name +
                                     " anchor does not match feature entity type");

    std::vector<Mat> reps;
    reps.reserve(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        PathAdjacency adj = compose_meta_path(hin, specs[i]);
        NormalizedAdjacency p = normalize_adjacency(adj);
        reps.push_back(gcn_forward(p, features.rows, stacks[i]));
    }
    Mat alpha = attention_scores(reps, attn);
    return fuse(reps, alpha);
}

}  // namespace kcrec
