#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "kcrec/hin.hpp"
#include "kcrec/mf.hpp"

namespace kcrec {

// One click event from the interaction file, entity-resolved.
struct Interaction {
    int user = 0;
    int concept_id = 0;
    std::int64_t count = 1;
    std::int64_t timestamp = 0;
};

struct IngestSummary {
    std::array<std::int64_t, kEntityTypeCount> entity_counts{};
    std::vector<std::pair<std::string, std::int64_t>> relation_counts;
    int dropped_cold_start_users = 0;
    std::int64_t train_events = 0;
    std::int64_t test_events = 0;
    std::vector<std::string> warnings;

    std::string to_string() const;
};

// Ingested corpus: the typed graph (click edges from the train window
// only), the raw event list, and the derived split. Test pairs are
// deduplicated and exclude anything the user already clicked in training.
struct DatasetBundle {
    Hin hin{NetworkSchema::mooc()};
    std::vector<Interaction> interactions;
    std::int64_t boundary = 0;
    RatingMatrix train{0, 0};
    std::vector<std::pair<int, int>> test_pairs;
    IngestSummary summary;
};

struct IngestPaths {
    std::filesystem::path manifest;
    std::vector<std::filesystem::path> relation_files;
    std::filesystem::path interaction_file;
};

// Boundary: train strictly before the boundary timestamp, test at or after
// it. LeaveLastOut: each user's latest click is the test target.
enum class SplitKind { Boundary, LeaveLastOut };

DatasetBundle ingest(const IngestPaths& paths, std::int64_t boundary,
                     SplitKind split = SplitKind::Boundary);

// Writes manifest.tsv, relations.tsv and interactions.tsv in the ingestion
// format; re-ingesting with the same boundary reproduces the graph.
void export_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir);

}  // namespace kcrec
