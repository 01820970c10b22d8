#include "kcrec/model.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace kcrec {

const char* to_string(Mode mode) {
    switch (mode) {
        case Mode::ContentOnly: return "s";
        case Mode::ContextOnly: return "r";
        case Mode::Full: return "s+r";
        case Mode::Homogeneous: return "h";
    }
    return "?";
}

Mode mode_from_string(const std::string& s) {
    if (s == "s" || s == "content_only") return Mode::ContentOnly;
    if (s == "r" || s == "context_only") return Mode::ContextOnly;
    if (s == "s+r" || s == "content_plus_context") return Mode::Full;
    if (s == "h" || s == "homogeneous") return Mode::Homogeneous;
    throw std::runtime_error("unknown mode '" + s + "' (expected s, r, s+r or h)");
}

namespace {

int type_offset(const Hin& hin, EntityType type) {
    int off = 0;
    for (int t = 0; t < static_cast<int>(type); ++t) off += hin.count(static_cast<EntityType>(t));
    return off;
}

// Union of every relation's edges, direction dropped. Relations connect
// distinct types, so no self-edges arise.
SpMatI merged_adjacency(const Hin& hin) {
    int n = hin.total_entities();
    std::vector<Eigen::Triplet<std::int64_t>> trip;
    for (std::size_t r = 0; r < hin.schema().relation_types.size(); ++r) {
        for (const HinEdge& e : hin.edges(static_cast<int>(r))) {
            int gi = type_offset(hin, e.src.type) + e.src.index;
            int gj = type_offset(hin, e.dst.type) + e.dst.index;
            if (gi == gj) continue;
            trip.emplace_back(gi, gj, 1);
            trip.emplace_back(gj, gi, 1);
        }
    }
    SpMatI a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    for (int k = 0; k < a.outerSize(); ++k)
        for (SpMatI::InnerIterator it(a, k); it; ++it) it.valueRef() = 1;
    return a;
}

void require_feature_rows(const FeatureMatrix& f, const Hin& hin, EntityType type) {
    if (f.rows.rows() != hin.count(type))
        throw std::runtime_error(std::string("feature matrix for ") + to_string(type) + " has " +
                                 std::to_string(f.rows.rows()) + " rows, graph has " +
                                 std::to_string(hin.count(type)));
}

}  // namespace

ModelInputs build_model_inputs(const Hin& hin, Mode mode,
                               const std::vector<MetaPathSpec>& user_specs,
                               const std::vector<MetaPathSpec>& concept_specs,
                               const FeatureSet& features) {
    ModelInputs inputs;
    int m = hin.count(EntityType::User);
    int n = hin.count(EntityType::Concept);

    if (mode == Mode::Homogeneous) {
        BlockInputs block;
        block.path_names = {"merged"};
        block.adjacency.push_back(normalize_binary(merged_adjacency(hin)));
        int total_width = 0;
        for (const auto& f : features) total_width += static_cast<int>(f.rows.cols());
        Mat x = Mat::Zero(hin.total_entities(), total_width);
        int col = 0;
        for (int t = 0; t < kEntityTypeCount; ++t) {
            EntityType type = static_cast<EntityType>(t);
            require_feature_rows(features[t], hin, type);
            const Mat& rows = features[t].rows;
            x.block(type_offset(hin, type), col, rows.rows(), rows.cols()) = rows;
            col += static_cast<int>(rows.cols());
        }
        block.features = std::move(x);
        inputs.blocks.push_back(std::move(block));
        inputs.user_slice = {0, type_offset(hin, EntityType::User), m};
        inputs.concept_slice = {0, type_offset(hin, EntityType::Concept), n};
        return inputs;
    }

    if (user_specs.empty() || concept_specs.empty())
        throw std::runtime_error("model inputs: at least one meta-path per side is required");

    auto build_side = [&](const std::vector<MetaPathSpec>& specs, EntityType anchor) {
        BlockInputs block;
        for (const auto& spec : specs) {
            if (spec.anchor != anchor)
                throw std::runtime_error("meta-path " + spec.name + " is anchored at " +
                                         to_string(spec.anchor) + ", expected " +
                                         to_string(anchor));
            block.path_names.push_back(spec.name);
            if (mode == Mode::ContentOnly)
                block.adjacency.push_back(identity_adjacency(hin.count(anchor)));
            else
                block.adjacency.push_back(normalize_adjacency(compose_meta_path(hin, spec)));
        }
        if (mode == Mode::ContextOnly) {
            block.features = one_hot_features(anchor, hin).rows;
        } else {
            const FeatureMatrix& f = features[static_cast<int>(anchor)];
            require_feature_rows(f, hin, anchor);
            block.features = f.rows;
        }
        return block;
    };

    inputs.blocks.push_back(build_side(user_specs, EntityType::User));
    inputs.blocks.push_back(build_side(concept_specs, EntityType::Concept));
    inputs.user_slice = {0, 0, m};
    inputs.concept_slice = {1, 0, n};
    return inputs;
}

ModelState init_model_state(Mode mode, const ModelInputs& inputs, int users, int concepts,
                            int latent_dim, int rep_dim, int hidden_width, int layers,
                            bool global_attention, Rng& rng) {
    ModelState state;
    state.mode = mode;
    for (const BlockInputs& bi : inputs.blocks) {
        BlockParams bp;
        bp.path_names = bi.path_names;
        int in_width = static_cast<int>(bi.features.cols());
        for (const std::string& name : bi.path_names)
            bp.stacks.push_back(make_gcn_stack(name, in_width, hidden_width, rep_dim, layers, rng));
        double s = std::sqrt(6.0 / (static_cast<double>(rep_dim) + 1.0));
        bp.attn.a = Vec(rep_dim);
        for (int i = 0; i < rep_dim; ++i) bp.attn.a[i] = rng.uniform(-s, s);
        bp.attn.global_mode = global_attention;
        state.blocks.push_back(std::move(bp));
    }
    state.mf = MfParams::init(latent_dim, rep_dim, users, concepts, rng);
    return state;
}

ForwardCache model_forward(const ModelState& state, const ModelInputs& inputs) {
    if (state.blocks.size() != inputs.blocks.size())
        throw std::runtime_error("model_forward: state has " + std::to_string(state.blocks.size()) +
                                 " encoder blocks, inputs have " +
                                 std::to_string(inputs.blocks.size()));
    ForwardCache cache;
    cache.blocks.resize(state.blocks.size());
    for (std::size_t b = 0; b < state.blocks.size(); ++b) {
        const BlockParams& bp = state.blocks[b];
        const BlockInputs& bi = inputs.blocks[b];
        if (bp.stacks.size() != bi.adjacency.size())
            throw std::runtime_error("model_forward: block " + std::to_string(b) + " has " +
                                     std::to_string(bp.stacks.size()) + " stacks but " +
                                     std::to_string(bi.adjacency.size()) + " adjacencies");
        BlockCache& bc = cache.blocks[b];
        bc.gcn.resize(bp.stacks.size());
        bc.reps.resize(bp.stacks.size());
        for (std::size_t p = 0; p < bp.stacks.size(); ++p)
            bc.reps[p] = gcn_forward(bi.adjacency[p], bi.features, bp.stacks[p], &bc.gcn[p]);
        Mat alpha = attention_scores(bc.reps, bp.attn, &bc.attn);
        bc.fused = fuse(bc.reps, alpha);
    }
    auto slice = [&](const SliceRef& s) {
        return Mat(cache.blocks[s.block].fused.e.middleRows(s.offset, s.count));
    };
    cache.e_user = slice(inputs.user_slice);
    cache.e_concept = slice(inputs.concept_slice);
    return cache;
}

namespace {

double column_norm_term(const Vec& col, bool squared) {
    double sq = col.squaredNorm();
    return squared ? sq : std::sqrt(sq);
}

std::vector<TrainSample> grid_batch(const RatingMatrix& grid) {
    std::vector<TrainSample> all;
    all.reserve(static_cast<std::size_t>(grid.users()) * static_cast<std::size_t>(grid.concepts()));
    for (int u = 0; u < grid.users(); ++u)
        for (int k = 0; k < grid.concepts(); ++k)
            all.push_back({u, k, grid.rating(u, k), !grid.observed(u, k)});
    return all;
}

// full_grid swaps the batch for every grid cell and weights residuals by 1
// (plain sum); batch mode averages.
const std::vector<TrainSample>* select_batch(const std::vector<TrainSample>& batch,
                                             const LossOptions& opts, const RatingMatrix* grid,
                                             std::vector<TrainSample>& storage, double& weight) {
    if (opts.full_grid) {
        if (!grid) throw std::runtime_error("full-grid loss requires a rating matrix");
        storage = grid_batch(*grid);
        weight = 1.0;
        return &storage;
    }
    if (batch.empty()) throw std::runtime_error("loss: empty batch");
    weight = 1.0 / static_cast<double>(batch.size());
    return &batch;
}

}  // namespace

double model_loss(const std::vector<TrainSample>& batch, const ModelState& state,
                  const ForwardCache& cache, const LossOptions& opts, const RatingMatrix* grid) {
    std::vector<TrainSample> storage;
    double weight = 0.0;
    const std::vector<TrainSample>* use = select_batch(batch, opts, grid, storage, weight);

    double residual = 0.0;
    std::set<int> users_touched;
    std::set<int> concepts_touched;
    for (const TrainSample& s : *use) {
        double rhat = predict_rating(state.mf, cache.e_user.row(s.user),
                                     cache.e_concept.row(s.concept_id), s.user, s.concept_id);
        double diff = s.rating - rhat;
        residual += weight * diff * diff;
        users_touched.insert(s.user);
        concepts_touched.insert(s.concept_id);
    }
    double reg = 0.0;
    for (int u : users_touched)
        reg += column_norm_term(state.mf.x.col(u), opts.squared_norms) +
               column_norm_term(state.mf.t_user.col(u), opts.squared_norms);
    for (int k : concepts_touched)
        reg += column_norm_term(state.mf.y.col(k), opts.squared_norms) +
               column_norm_term(state.mf.t_concept.col(k), opts.squared_norms);
    return residual + opts.lambda * reg;
}

GradientBundle zero_gradients(const ModelState& state) {
    GradientBundle g;
    g.blocks.resize(state.blocks.size());
    for (std::size_t b = 0; b < state.blocks.size(); ++b) {
        const BlockParams& bp = state.blocks[b];
        g.blocks[b].d_w.resize(bp.stacks.size());
        for (std::size_t p = 0; p < bp.stacks.size(); ++p)
            for (const Mat& w : bp.stacks[p].weights)
                g.blocks[b].d_w[p].push_back(Mat::Zero(w.rows(), w.cols()));
        g.blocks[b].d_a = Vec::Zero(bp.attn.a.size());
    }
    g.d_x = Mat::Zero(state.mf.x.rows(), state.mf.x.cols());
    g.d_y = Mat::Zero(state.mf.y.rows(), state.mf.y.cols());
    g.d_t_user = Mat::Zero(state.mf.t_user.rows(), state.mf.t_user.cols());
    g.d_t_concept = Mat::Zero(state.mf.t_concept.rows(), state.mf.t_concept.cols());
    return g;
}

namespace {

void require_finite(const Mat& m, const std::string& name) {
    if (!m.allFinite()) throw std::runtime_error("non-finite gradient in " + name);
}

}  // namespace

GradientBundle model_backward(const std::vector<TrainSample>& batch, const ModelState& state,
                              const ModelInputs& inputs, const ForwardCache& cache,
                              const LossOptions& opts, const RatingMatrix* grid) {
    std::vector<TrainSample> storage;
    double weight = 0.0;
    const std::vector<TrainSample>* use = select_batch(batch, opts, grid, storage, weight);

    GradientBundle g = zero_gradients(state);
    const MfParams& mf = state.mf;
    Mat d_e_user = Mat::Zero(cache.e_user.rows(), cache.e_user.cols());
    Mat d_e_concept = Mat::Zero(cache.e_concept.rows(), cache.e_concept.cols());
    std::set<int> users_touched;
    std::set<int> concepts_touched;

    for (const TrainSample& s : *use) {
        int u = s.user;
        int k = s.concept_id;
        double rhat =
            predict_rating(mf, cache.e_user.row(u), cache.e_concept.row(k), u, k);
        double c = weight * 2.0 * (rhat - s.rating);
        g.d_x.col(u) += c * mf.y.col(k);
        g.d_y.col(k) += c * mf.x.col(u);
        g.d_beta_user += c * cache.e_user.row(u).dot(mf.t_concept.col(k));
        g.d_beta_concept += c * mf.t_user.col(u).dot(cache.e_concept.row(k));
        g.d_t_concept.col(k) += (c * mf.beta_user) * cache.e_user.row(u).transpose();
        g.d_t_user.col(u) += (c * mf.beta_concept) * cache.e_concept.row(k).transpose();
        d_e_user.row(u) += (c * mf.beta_user) * mf.t_concept.col(k).transpose();
        d_e_concept.row(k) += (c * mf.beta_concept) * mf.t_user.col(u).transpose();
        users_touched.insert(u);
        concepts_touched.insert(k);
    }

    // d/dcol of lambda*||col|| is lambda*col/||col||, taken as 0 at the
    // origin; the squared option gives 2*lambda*col.
    auto add_reg = [&](Mat& grad, const Mat& param, int col) {
        if (opts.squared_norms) {
            grad.col(col) += (2.0 * opts.lambda) * param.col(col);
            return;
        }
        double norm = param.col(col).norm();
        if (norm > 0.0) grad.col(col) += (opts.lambda / norm) * param.col(col);
    };
    for (int u : users_touched) {
        add_reg(g.d_x, mf.x, u);
        add_reg(g.d_t_user, mf.t_user, u);
    }
    for (int k : concepts_touched) {
        add_reg(g.d_y, mf.y, k);
        add_reg(g.d_t_concept, mf.t_concept, k);
    }

    std::vector<Mat> d_fused(state.blocks.size());
    for (std::size_t b = 0; b < state.blocks.size(); ++b)
        d_fused[b] = Mat::Zero(cache.blocks[b].fused.e.rows(), cache.blocks[b].fused.e.cols());
    d_fused[static_cast<std::size_t>(inputs.user_slice.block)].middleRows(
        inputs.user_slice.offset, inputs.user_slice.count) += d_e_user;
    d_fused[static_cast<std::size_t>(inputs.concept_slice.block)].middleRows(
        inputs.concept_slice.offset, inputs.concept_slice.count) += d_e_concept;

    for (std::size_t b = 0; b < state.blocks.size(); ++b) {
        const BlockParams& bp = state.blocks[b];
        const BlockCache& bc = cache.blocks[b];
        AttentionGradients ag = attention_backward(bc.reps, bp.attn, bc.attn, d_fused[b]);
        g.blocks[b].d_a = ag.d_a;
        for (std::size_t p = 0; p < bp.stacks.size(); ++p)
            g.blocks[b].d_w[p] = gcn_backward(inputs.blocks[b].adjacency[p], bp.stacks[p],
                                              bc.gcn[p], ag.d_reps[p]);
    }

    require_finite(g.d_x, "x");
    require_finite(g.d_y, "y");
    require_finite(g.d_t_user, "t_user");
    require_finite(g.d_t_concept, "t_concept");
    if (!std::isfinite(g.d_beta_user)) throw std::runtime_error("non-finite gradient in beta_user");
    if (!std::isfinite(g.d_beta_concept))
        throw std::runtime_error("non-finite gradient in beta_concept");
    for (std::size_t b = 0; b < g.blocks.size(); ++b) {
        std::string side = "block " + std::to_string(b);
        require_finite(g.blocks[b].d_a, side + " attention vector");
        for (std::size_t p = 0; p < g.blocks[b].d_w.size(); ++p)
            for (std::size_t l = 0; l < g.blocks[b].d_w[p].size(); ++l)
                require_finite(g.blocks[b].d_w[p][l], side + " path " +
                                                          state.blocks[b].path_names[p] + " W" +
                                                          std::to_string(l));
    }
    return g;
}

}  // namespace kcrec
