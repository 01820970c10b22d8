#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kcrec/checkpoint.hpp"
#include "kcrec/dataset.hpp"
#include "kcrec/experiment.hpp"
#include "kcrec/synthetic.hpp"
#include "kcrec/tsv.hpp"

namespace fs = std::filesystem;
using namespace kcrec;

namespace {

struct CommonOpts {
    std::string config;
    std::string out;
    std::string mode;
    std::string meta_paths;
    std::int64_t seed = 0;
    int negatives = 0;
};

// Registers the shared override flags on a subcommand. Which of them were
// actually given is read back through sub->count() at run time.
void add_common(CLI::App* sub, CommonOpts& opts, bool config_required) {
    auto* c = sub->add_option("--config", opts.config, "run configuration file (key = value)");
    if (config_required) c->required();
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option("--seed", opts.seed, "random seed override");
    sub->add_option("--mode", opts.mode, "feature mode: s, r, s+r or h");
    sub->add_option("--meta-paths", opts.meta_paths,
                    "comma-separated user-side meta-paths (e.g. MP1,MP3)");
    sub->add_option("--negatives", opts.negatives, "sampled negatives per evaluation positive");
}

Config resolved_config(const CLI::App* sub, const CommonOpts& opts) {
    Config cfg = opts.config.empty() ? Config() : Config::from_file(opts.config);
    if (sub->count("--seed")) cfg.set("seed", std::to_string(opts.seed));
    if (sub->count("--out")) cfg.set("out", opts.out);
    if (sub->count("--mode")) cfg.set("mode", opts.mode);
    if (sub->count("--meta-paths")) cfg.set("user_meta_paths", opts.meta_paths);
    if (sub->count("--negatives")) cfg.set("eval_negatives", std::to_string(opts.negatives));
    return cfg;
}

ExperimentConfig experiment_config(const Config& cfg, const std::string& config_path) {
    return ExperimentConfig::from_config(cfg, fs::path(config_path).parent_path());
}

int run_build_graph(const CLI::App* sub, const CommonOpts& opts) {
    Config cfg = resolved_config(sub, opts);
    ExperimentConfig ec = experiment_config(cfg, opts.config);
    DatasetBundle bundle = ingest(ec.paths, ec.boundary, ec.split);
    export_bundle(bundle, ec.out_dir);
    atomic_write(ec.out_dir / "ingest_summary.txt", bundle.summary.to_string());
    std::cout << bundle.summary.to_string();
    std::cout << "graph exported to " << ec.out_dir.string() << "\n";
    return 0;
}

int run_gen_synthetic(const CLI::App* sub, const CommonOpts& opts, const SyntheticSpec& spec_in) {
    if (opts.out.empty()) throw std::runtime_error("gen-synthetic: --out is required");
    SyntheticSpec spec = spec_in;
    if (sub->count("--seed")) spec.seed = static_cast<std::uint64_t>(opts.seed);
    SyntheticFiles files = generate_synthetic(spec, opts.out);
    std::cout << "wrote " << files.manifest.string() << "\n"
              << "wrote " << files.relations.string() << "\n"
              << "wrote " << files.interactions.string() << "\n"
              << "wrote " << files.config.string() << "\n";
    return 0;
}

int run_train(const CLI::App* sub, const CommonOpts& opts) {
    Config cfg = resolved_config(sub, opts);
    ExperimentConfig ec = experiment_config(cfg, opts.config);
    ExperimentResult result = run_experiment(ec, cfg);
    std::cout << result.report.to_tsv();
    std::cout << "artifacts in " << ec.out_dir.string() << "\n";
    return 0;
}

int run_evaluate(const CLI::App* sub, const CommonOpts& opts, const std::string& checkpoint_path) {
    Config cfg = resolved_config(sub, opts);
    ExperimentConfig ec = experiment_config(cfg, opts.config);
    Checkpoint cp = load_checkpoint(checkpoint_path);
    DatasetBundle bundle = ingest(ec.paths, ec.boundary, ec.split);
    if (bundle.hin.ids(EntityType::User) != cp.extras.user_ids ||
        bundle.hin.ids(EntityType::Concept) != cp.extras.concept_ids)
        throw std::runtime_error("checkpoint does not match dataset (entity ids differ)");
    std::uint64_t seed = sub->count("--seed") ? static_cast<std::uint64_t>(opts.seed)
                                              : cp.extras.seed;
    auto instances =
        build_eval_instances(bundle.train, bundle.test_pairs, ec.eval_negatives, seed);
    MetricReport report = evaluate(cp.state.mf, cp.extras.e_user, cp.extras.e_concept, instances);
    std::cout << report.to_tsv();
    if (sub->count("--out")) {
        atomic_write(fs::path(opts.out) / "report.tsv", report.to_tsv());
        atomic_write(fs::path(opts.out) / "report.json", report.to_json());
    }
    return 0;
}

int run_recommend(const CLI::App* sub, const CommonOpts& opts, const std::string& checkpoint_path,
                  const std::string& users_csv, int top) {
    if (top < 1) throw std::runtime_error("recommend: -n must be >= 1");
    Checkpoint cp = load_checkpoint(checkpoint_path);
    std::unordered_map<std::string, int> index;
    for (std::size_t i = 0; i < cp.extras.user_ids.size(); ++i)
        index.emplace(cp.extras.user_ids[i], static_cast<int>(i));

    std::vector<std::string> wanted;
    if (users_csv.empty()) {
        wanted = cp.extras.user_ids;
    } else {
        std::size_t start = 0;
        while (start <= users_csv.size()) {
            std::size_t comma = users_csv.find(',', start);
            if (comma == std::string::npos) comma = users_csv.size();
            std::string id = users_csv.substr(start, comma - start);
            if (!id.empty()) wanted.push_back(id);
            start = comma + 1;
        }
        if (wanted.empty()) throw std::runtime_error("recommend: --users parsed to an empty list");
    }

    std::string tsv = "user_id\trank\tconcept_id\tscore\n";
    for (const std::string& id : wanted) {
        auto it = index.find(id);
        if (it == index.end()) {
            tsv += id + "\terror\tunknown user id\t\n";
            continue;
        }
        int u = it->second;
        std::unordered_set<int> exclude;
        if (static_cast<std::size_t>(u) < cp.extras.clicked.size())
            exclude.insert(cp.extras.clicked[static_cast<std::size_t>(u)].begin(),
                           cp.extras.clicked[static_cast<std::size_t>(u)].end());
        TopN result = top_n(cp.state.mf, cp.extras.e_user, cp.extras.e_concept, u, top, exclude);
        int rank = 1;
        for (const auto& [concept_idx, score] : result.items) {
            tsv += id + "\t" + std::to_string(rank++) + "\t" +
                   cp.extras.concept_ids[static_cast<std::size_t>(concept_idx)] + "\t" +
                   format_double(score, 6) + "\n";
        }
    }
    if (sub->count("--out"))
        atomic_write(opts.out, tsv);
    else
        std::cout << tsv;
    return 0;
}

int run_sweep(const CLI::App* sub, const CommonOpts& opts, const std::string& axis_name) {
    Config cfg = resolved_config(sub, opts);
    ExperimentConfig ec = experiment_config(cfg, opts.config);
    SweepAxis axis = sweep_axis_from_string(axis_name);
    std::vector<SweepRow> rows = sweep(ec, cfg, axis, ec.out_dir, worker_cap_from_env());
    int failed = 0;
    for (const SweepRow& row : rows) {
        if (row.failed) {
            ++failed;
            std::cout << row.label << "\tfailed\t" << row.error << "\n";
        } else {
            std::cout << row.label << "\thr@5=" << format_double(row.report.hr.at(5), 6)
                      << "\tmrr=" << format_double(row.report.mrr, 6) << "\n";
        }
    }
    std::cout << "sweep table: " << (ec.out_dir / "sweep.csv").string() << "\n";
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"heterogeneous-graph knowledge concept recommender"};
    app.require_subcommand(1);

    CommonOpts bg_opts;
    auto* bg = app.add_subcommand("build-graph",
                                  "ingest raw logs, validate the graph and export the bundle");
    add_common(bg, bg_opts, true);

    CommonOpts gen_opts;
    SyntheticSpec spec;
    auto* gen = app.add_subcommand("gen-synthetic", "generate a synthetic MOOC-style corpus");
    add_common(gen, gen_opts, false);
    gen->add_option("--users", spec.users, "user count");
    gen->add_option("--courses", spec.courses, "course count");
    gen->add_option("--videos", spec.videos, "video count");
    gen->add_option("--teachers", spec.teachers, "teacher count");
    gen->add_option("--concepts", spec.concepts, "concept count");
    gen->add_option("--blocks", spec.blocks, "latent interest block count");
    gen->add_option("--p-within", spec.p_within, "within-block click probability");
    gen->add_option("--p-cross", spec.p_cross, "cross-block click probability");
    gen->add_option("--boundary", spec.boundary, "train/test boundary timestamp");

    CommonOpts train_opts;
    auto* tr = app.add_subcommand("train", "train a model and evaluate it");
    add_common(tr, train_opts, true);

    CommonOpts eval_opts;
    std::string eval_checkpoint;
    auto* ev = app.add_subcommand("evaluate", "score a saved checkpoint on the test split");
    add_common(ev, eval_opts, true);
    ev->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();

    CommonOpts rec_opts;
    std::string rec_checkpoint;
    std::string rec_users;
    int rec_n = 10;
    auto* rec = app.add_subcommand("recommend", "emit top-N concepts per user from a checkpoint");
    add_common(rec, rec_opts, false);
    rec->add_option("--checkpoint", rec_checkpoint, "checkpoint file")->required();
    rec->add_option("--users", rec_users, "comma-separated user external ids (default: all)");
    rec->add_option("-n,--top-n", rec_n, "list length");

    CommonOpts sweep_opts;
    std::string sweep_axis;
    auto* sw = app.add_subcommand("sweep", "run a hyperparameter grid and collect a CSV");
    add_common(sw, sweep_opts, true);
    sw->add_option("--axis", sweep_axis,
                   "one of latent_factors, dimension, layers, meta_paths")
        ->required();

    try {
        app.parse(argc, argv);
        if (bg->parsed()) return run_build_graph(bg, bg_opts);
        if (gen->parsed()) return run_gen_synthetic(gen, gen_opts, spec);
        if (tr->parsed()) return run_train(tr, train_opts);
        if (ev->parsed()) return run_evaluate(ev, eval_opts, eval_checkpoint);
        if (rec->parsed()) return run_recommend(rec, rec_opts, rec_checkpoint, rec_users, rec_n);
        if (sw->parsed()) return run_sweep(sw, sweep_opts, sweep_axis);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
