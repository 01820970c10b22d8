#include "kcrec/experiment.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>
#include <thread>

#include "kcrec/meta_path.hpp"
#include "kcrec/tsv.hpp"

namespace kcrec {

namespace fs = std::filesystem;

FeatureSpec FeatureSpec::parse(const std::string& text) {
    FeatureSpec spec;
    auto colon = text.find(':');
    std::string head = colon == std::string::npos ? text : text.substr(0, colon);
    std::string arg = colon == std::string::npos ? std::string() : text.substr(colon + 1);
    if (head == "hashed") {
        spec.source = FeatureSource::Hashed;
        if (!arg.empty()) {
            char* end = nullptr;
            long w = std::strtol(arg.c_str(), &end, 10);
            if (end != arg.c_str() + arg.size() || w < 1)
                throw std::runtime_error("feature spec '" + text + "': bad hashed width");
            spec.hashed_width = static_cast<int>(w);
        }
    } else if (head == "onehot") {
        if (!arg.empty())
            throw std::runtime_error("feature spec '" + text + "': onehot takes no argument");
        spec.source = FeatureSource::OneHot;
    } else if (head == "embedding") {
        if (arg.empty())
            throw std::runtime_error("feature spec '" + text + "': embedding needs a file path");
        spec.source = FeatureSource::EmbeddingFile;
        spec.embedding_path = arg;
    } else {
        throw std::runtime_error("unknown feature source '" + head +
                                 "' (expected hashed, onehot or embedding)");
    }
    return spec;
}

ExperimentConfig ExperimentConfig::from_config(const Config& cfg, const fs::path& base_dir) {
    ExperimentConfig out;
    auto resolve = [&](const std::string& p) {
        fs::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };
    out.paths.manifest = resolve(cfg.require_string("manifest"));
    for (const auto& p : cfg.get_list("relations", {}))
        out.paths.relation_files.push_back(resolve(p));
    out.paths.interaction_file = resolve(cfg.require_string("interactions"));
    out.boundary = cfg.get_int("boundary", 0);
    std::string split = cfg.get_string("split", "boundary");
    if (split == "boundary")
        out.split = SplitKind::Boundary;
    else if (split == "leave_last_out")
        out.split = SplitKind::LeaveLastOut;
    else
        throw std::runtime_error("unknown split '" + split +
                                 "' (expected boundary or leave_last_out)");
    out.mode = mode_from_string(cfg.get_string("mode", "s+r"));
    out.user_paths = cfg.get_list("user_meta_paths", out.user_paths);
    out.concept_paths = cfg.get_list("concept_meta_paths", out.concept_paths);
    for (int t = 0; t < kEntityTypeCount; ++t) {
        std::string key = std::string("features.") + to_string(static_cast<EntityType>(t));
        out.features[static_cast<std::size_t>(t)] =
            FeatureSpec::parse(cfg.get_string(key, "hashed:32"));
        auto& f = out.features[static_cast<std::size_t>(t)];
        if (f.source == FeatureSource::EmbeddingFile)
            f.embedding_path = resolve(f.embedding_path).string();
    }
    out.latent_factors = static_cast<int>(cfg.get_int("latent_factors", 30));
    out.dimension = static_cast<int>(cfg.get_int("dimension", 100));
    out.hidden_width = static_cast<int>(cfg.get_int("hidden_width", 0));
    out.layers = static_cast<int>(cfg.get_int("layers", 3));
    out.global_attention = cfg.get_bool("global_attention", false);
    out.train.learning_rate = cfg.get_double("learning_rate", 0.01);
    out.train.lambda = cfg.get_double("lambda", 1e-4);
    out.train.epochs = static_cast<int>(cfg.get_int("epochs", 30));
    out.train.batch_size = static_cast<int>(cfg.get_int("batch_size", 256));
    out.train.negatives_per_positive =
        static_cast<int>(cfg.get_int("negatives_per_positive", 1));
    out.train.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 7));
    out.train.mode = out.mode;
    out.train.clip_norm = cfg.get_double("clip_norm", 5.0);
    out.train.squared_norms = cfg.get_bool("squared_norms", false);
    out.train.full_grid = cfg.get_bool("full_grid", false);
    out.train.freeze_beta = cfg.get_bool("freeze_beta", false);
    out.train.log1p_ratings = cfg.get_bool("log1p_ratings", false);
    out.train.checkpoint_every = static_cast<int>(cfg.get_int("checkpoint_every", 0));
    out.eval_negatives = static_cast<int>(cfg.get_int("eval_negatives", 99));
    out.out_dir = resolve(cfg.get_string("out", "out"));
    return out;
}

void ExperimentConfig::validate() const {
    train.validate();
    if (latent_factors < 1) throw std::runtime_error("config: latent_factors must be >= 1");
    if (dimension < 1) throw std::runtime_error("config: dimension must be >= 1");
    if (hidden_width < 0) throw std::runtime_error("config: hidden_width must be >= 0");
    if (layers < 1 || layers > 4) throw std::runtime_error("config: layers must be in 1..4");
    if (eval_negatives < 1) throw std::runtime_error("config: eval_negatives must be >= 1");
    if (mode != Mode::Homogeneous) {
        if (user_paths.empty() || concept_paths.empty())
            throw std::runtime_error("config: at least one meta-path per side is required");
        for (const auto& name : user_paths)
            if (catalog_spec(name).anchor != EntityType::User)
                throw std::runtime_error("config: " + name + " is not a user-side meta-path");
        for (const auto& name : concept_paths)
            if (catalog_spec(name).anchor != EntityType::Concept)
                throw std::runtime_error("config: " + name + " is not a concept-side meta-path");
    }
}

namespace {

template <typename F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(name) + ": " + e.what());
    }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const Config& resolved) {
    cfg.validate();
    ExperimentResult result;

    DatasetBundle bundle =
        stage("ingest", [&] { return ingest(cfg.paths, cfg.boundary, cfg.split); });
    result.ingest_summary = bundle.summary;

    FeatureSet features = stage("features", [&] {
        FeatureSet fs{};
        for (int t = 0; t < kEntityTypeCount; ++t) {
            EntityType type = static_cast<EntityType>(t);
            const FeatureSpec& want = cfg.features[static_cast<std::size_t>(t)];
            switch (want.source) {
                case FeatureSource::Hashed:
                    fs[static_cast<std::size_t>(t)] =
                        hashed_features(type, bundle.hin, want.hashed_width, cfg.train.seed);
                    break;
                case FeatureSource::OneHot:
                    fs[static_cast<std::size_t>(t)] = one_hot_features(type, bundle.hin);
                    break;
                case FeatureSource::EmbeddingFile: {
                    int fallback = 0;
                    fs[static_cast<std::size_t>(t)] =
                        load_embedding_features(want.embedding_path, type, bundle.hin, &fallback);
                    break;
                }
            }
        }
        return fs;
    });

    std::vector<MetaPathSpec> user_specs;
    std::vector<MetaPathSpec> concept_specs;
    if (cfg.mode != Mode::Homogeneous) {
        for (const auto& name : cfg.user_paths) user_specs.push_back(catalog_spec(name));
        for (const auto& name : cfg.concept_paths) concept_specs.push_back(catalog_spec(name));
    }
    ModelInputs inputs = stage("encode", [&] {
        return build_model_inputs(bundle.hin, cfg.mode, user_specs, concept_specs, features);
    });

    Rng init_rng(cfg.train.seed);
    ModelState state = init_model_state(
        cfg.mode, inputs, bundle.hin.count(EntityType::User), bundle.hin.count(EntityType::Concept),
        cfg.latent_factors, cfg.dimension, cfg.hidden_width > 0 ? cfg.hidden_width : cfg.dimension,
        cfg.layers, cfg.global_attention, init_rng);

    auto make_checkpoint = [&](const ModelState& s) {
        ForwardCache cache = model_forward(s, inputs);
        Checkpoint cp;
        cp.state = s;
        cp.extras.seed = cfg.train.seed;
        cp.extras.e_user = cache.e_user;
        cp.extras.e_concept = cache.e_concept;
        cp.extras.user_ids = bundle.hin.ids(EntityType::User);
        cp.extras.concept_ids = bundle.hin.ids(EntityType::Concept);
        cp.extras.clicked.resize(static_cast<std::size_t>(bundle.train.users()));
        for (int u = 0; u < bundle.train.users(); ++u)
            for (const auto& [k, r] : bundle.train.by_user()[static_cast<std::size_t>(u)])
                cp.extras.clicked[static_cast<std::size_t>(u)].push_back(k);
        return cp;
    };

    std::function<void(int, const ModelState&)> on_epoch;
    if (cfg.train.checkpoint_every > 0)
        on_epoch = [&](int epoch, const ModelState& s) {
            if (epoch % cfg.train.checkpoint_every == 0)
                save_checkpoint(make_checkpoint(s),
                                cfg.out_dir /
                                    ("checkpoint_epoch" + std::to_string(epoch) + ".json"));
        };

    result.training =
        stage("train", [&] { return train(state, inputs, bundle.train, cfg.train, on_epoch); });

    result.checkpoint = make_checkpoint(state);

    result.report = stage("evaluate", [&] {
        if (bundle.test_pairs.empty()) {
            MetricReport empty;
            for (int k : {1, 5, 10, 20}) empty.hr[k] = 0.0;
            for (int k : {5, 10, 20}) empty.ndcg[k] = 0.0;
            return empty;
        }
        auto instances = build_eval_instances(bundle.train, bundle.test_pairs, cfg.eval_negatives,
                                              cfg.train.seed);
        return evaluate(state.mf, result.checkpoint.extras.e_user,
                        result.checkpoint.extras.e_concept, instances);
    });

    stage("write", [&] {
        atomic_write(cfg.out_dir / "report.tsv", result.report.to_tsv());
        atomic_write(cfg.out_dir / "report.json", result.report.to_json());
        save_checkpoint(result.checkpoint, cfg.out_dir / "checkpoint.json");
        std::string log;
        for (std::size_t i = 0; i < result.training.epoch_losses.size(); ++i)
            log += std::to_string(i + 1) + "\t" + format_double(result.training.epoch_losses[i], 9) +
                   "\t" + format_double(result.training.epoch_wall_ms[i], 3) + "\n";
        atomic_write(cfg.out_dir / "train_log.tsv", log);
        atomic_write(cfg.out_dir / "config.resolved", resolved.resolved_text());
        atomic_write(cfg.out_dir / "ingest_summary.txt", bundle.summary.to_string());
        return 0;
    });

    return result;
}

SweepAxis sweep_axis_from_string(const std::string& s) {
    if (s == "latent_factors") return SweepAxis::LatentFactors;
    if (s == "dimension") return SweepAxis::Dimension;
    if (s == "layers") return SweepAxis::Layers;
    if (s == "meta_paths") return SweepAxis::MetaPaths;
    throw std::runtime_error("unknown sweep axis '" + s +
                             "' (expected latent_factors, dimension, layers or meta_paths)");
}

int worker_cap_from_env() {
    const char* v = std::getenv("KCREC_WORKERS");
    if (!v) return 1;
    char* end = nullptr;
    long n = std::strtol(v, &end, 10);
    if (end == v || *end != '\0' || n < 1) return 1;
    return static_cast<int>(n);
}

namespace {

std::string join_names(const std::vector<std::string>& names, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += sep;
        out += names[i];
    }
    return out;
}

// all nonempty subsets of MP1..MP4, sized then lexicographic: the order of
// the reference combination table.
std::vector<std::vector<std::string>> meta_path_grid() {
    const std::vector<std::string> all = {"MP1", "MP2", "MP3", "MP4"};
    std::vector<std::vector<std::string>> grid;
    for (std::size_t size = 1; size <= all.size(); ++size) {
        std::vector<std::size_t> pick(size);
        std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start,
                                                                std::size_t depth) {
            if (depth == size) {
                std::vector<std::string> combo;
                for (std::size_t i : pick) combo.push_back(all[i]);
                grid.push_back(std::move(combo));
                return;
            }
            for (std::size_t i = start; i < all.size(); ++i) {
                pick[depth] = i;
                rec(i + 1, depth + 1);
            }
        };
        rec(0, 0);
    }
    return grid;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::vector<SweepRow> sweep(const ExperimentConfig& base, const Config& resolved, SweepAxis axis,
                            const fs::path& out_dir, int workers) {
    struct RowSpec {
        std::string label;
        ExperimentConfig cfg;
        Config resolved;
    };
    std::vector<RowSpec> rows;
    auto push = [&](const std::string& label, const std::string& key, const std::string& value,
                    auto mutate) {
        RowSpec row;
        row.label = label;
        row.cfg = base;
        mutate(row.cfg);
        row.cfg.out_dir = out_dir / label;
        row.resolved = resolved;
        row.resolved.set(key, value);
        row.resolved.set("out", row.cfg.out_dir.string());
        rows.push_back(std::move(row));
    };

    switch (axis) {
        case SweepAxis::LatentFactors:
            for (int v : {10, 20, 30, 40})
                push("D" + std::to_string(v), "latent_factors", std::to_string(v),
                     [v](ExperimentConfig& c) { c.latent_factors = v; });
            break;
        case SweepAxis::Dimension:
            for (int v : {20, 50, 100, 150, 200})
                push("d" + std::to_string(v), "dimension", std::to_string(v),
                     [v](ExperimentConfig& c) { c.dimension = v; });
            break;
        case SweepAxis::Layers:
            for (int v : {1, 2, 3, 4})
                push("L" + std::to_string(v), "layers", std::to_string(v),
                     [v](ExperimentConfig& c) { c.layers = v; });
            break;
        case SweepAxis::MetaPaths:
            for (const auto& combo : meta_path_grid())
                push(join_names(combo, "+"), "user_meta_paths", join_names(combo, ","),
                     [&combo](ExperimentConfig& c) { c.user_paths = combo; });
            break;
    }

    std::vector<SweepRow> out(rows.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= rows.size()) break;
            SweepRow row;
            row.label = rows[i].label;
            try {
                row.report = run_experiment(rows[i].cfg, rows[i].resolved).report;
            } catch (const std::exception& e) {
                row.failed = true;
                row.error = e.what();
            }
            out[i] = std::move(row);
        }
    };
    int n_workers = std::max(1, std::min(workers, static_cast<int>(rows.size())));
    if (n_workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    std::string csv =
        "label,hr@1,hr@5,hr@10,hr@20,ndcg@5,ndcg@10,ndcg@20,mrr,auc,n_instances,status,error\n";
    for (const SweepRow& row : out) {
        csv += csv_escape(row.label) + ",";
        if (row.failed) {
            csv += ",,,,,,,,,,failed," + csv_escape(row.error) + "\n";
        } else {
            const MetricReport& r = row.report;
            for (int k : {1, 5, 10, 20}) csv += format_double(r.hr.at(k), 6) + ",";
            for (int k : {5, 10, 20}) csv += format_double(r.ndcg.at(k), 6) + ",";
            csv += format_double(r.mrr, 6) + "," + format_double(r.auc, 6) + "," +
                   std::to_string(r.n_instances) + ",ok,\n";
        }
    }
    atomic_write(out_dir / "sweep.csv", csv);
    return out;
}

}  // namespace kcrec
