#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "kcrec/hin.hpp"

namespace kcrec {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

enum class FeatureSource { EmbeddingFile, OneHot, Hashed };

// Content feature rows for one entity type; h^0 of the encoder. Row i is
// the entity with dense index i.
struct FeatureMatrix {
    EntityType entity_type;
    Mat rows;
    FeatureSource source;
};

// Seed for hashed fallback rows of entities missing from an embedding file.
inline constexpr std::uint64_t kEmbeddingFallbackSeed = 0x414B52ECULL;

// TSV: external_id followed by a constant number of decimal floats, no
// header. Rows are aligned to dense entity indices; entities missing from
// the file get hashed fallback rows and are counted in *fallback_count.
FeatureMatrix load_embedding_features(const std::string& path, EntityType type, const Hin& hin,
                                      int* fallback_count = nullptr);

FeatureMatrix one_hot_features(EntityType type, const Hin& hin);

// Rows are a deterministic function of (external_id, seed); values in
// [-1, 1], identical across runs and platforms.
FeatureMatrix hashed_features(EntityType type, const Hin& hin, int width, std::uint64_t seed);

// The four user context-relation matrices A^u_1..A^u_4. R1..R3 come
// straight from edge lists; R4 = binarize(user-learn-course x
// course-taught-by-teacher).
struct ContextRelationSet {
    SpMatI r1_user_click_concept;
    SpMatI r2_user_learn_course;
    SpMatI r3_user_watch_video;
    SpMatI r4_user_course_teacher;
};

ContextRelationSet build_context_relations(const Hin& hin);

}  // namespace kcrec
