#pragma once

#include <cstdint>
#include <filesystem>

namespace kcrec {

// Block-structured stand-in for real MOOC logs. Users, courses and concepts
// are assigned round-robin to interest blocks; a user clicks within-block
// concepts at p_within and the rest at p_cross, so recommenders that read
// the graph can beat random by a wide margin.
struct SyntheticSpec {
    int users = 500;
    int courses = 40;
    int videos = 120;
    int teachers = 12;
    int concepts = 200;
    int blocks = 4;
    double p_within = 0.3;
    double p_cross = 0.01;
    std::uint64_t seed = 7;
    std::int64_t boundary = 1000000;  // clicks before this are train, after are test

    void validate() const;
};

struct SyntheticFiles {
    std::filesystem::path manifest;
    std::filesystem::path relations;
    std::filesystem::path interactions;
    std::filesystem::path config;
};

// Writes manifest.tsv, relations.tsv, interactions.tsv and dataset.conf in
// the ingestion format. Per user, one observed pair is pushed past the
// boundary as the held-out target (users with a single pair keep it in
// train). Byte-identical for identical spec.
SyntheticFiles generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& dir);

}  // namespace kcrec
