#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "kcrec/checkpoint.hpp"
#include "kcrec/config.hpp"
#include "kcrec/dataset.hpp"
#include "kcrec/eval.hpp"
#include "kcrec/trainer.hpp"

namespace kcrec {

struct FeatureSpec {
    FeatureSource source = FeatureSource::Hashed;
    int hashed_width = 32;
    std::string embedding_path;  // EmbeddingFile only

    // "hashed:32", "onehot", "embedding:path/to.tsv"
    static FeatureSpec parse(const std::string& text);
};

struct ExperimentConfig {
    IngestPaths paths;
    std::int64_t boundary = 0;
    SplitKind split = SplitKind::Boundary;
    Mode mode = Mode::Full;
    std::vector<std::string> user_paths = {"MP1", "MP2", "MP3", "MP4"};
    std::vector<std::string> concept_paths = {"KK", "KUK", "KCK"};
    std::array<FeatureSpec, kEntityTypeCount> features;
    int latent_factors = 30;  // D
    int dimension = 100;      // d
    int hidden_width = 0;     // 0 means dimension
    int layers = 3;
    bool global_attention = false;
    TrainConfig train;
    int eval_negatives = 99;
    std::filesystem::path out_dir;

    // Relative paths resolve against base_dir (the config file's directory).
    static ExperimentConfig from_config(const Config& cfg, const std::filesystem::path& base_dir);
    void validate() const;
};

struct ExperimentResult {
    MetricReport report;
    TrainResult training;
    IngestSummary ingest_summary;
    Checkpoint checkpoint;
};

// ingest -> features -> encode -> train -> evaluate, writing report.tsv,
// report.json, checkpoint.json, train_log.tsv, config.resolved and
// ingest_summary.txt under cfg.out_dir. Failures carry the stage name.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const Config& resolved);

enum class SweepAxis { LatentFactors, Dimension, Layers, MetaPaths };
SweepAxis sweep_axis_from_string(const std::string& s);

struct SweepRow {
    std::string label;
    bool failed = false;
    std::string error;
    MetricReport report;
};

// One experiment per axis value under out_dir/<label>/, shared seed, rows
// in grid order. Failed rows are marked and the sweep continues. Rows run
// in parallel up to `workers`; the CSV lands at out_dir/sweep.csv in grid
// order regardless of worker count.
std::vector<SweepRow> sweep(const ExperimentConfig& base, const Config& resolved, SweepAxis axis,
                            const std::filesystem::path& out_dir, int workers);

// Worker cap from the environment (KCREC_WORKERS), default 1.
int worker_cap_from_env();

}  // namespace kcrec
