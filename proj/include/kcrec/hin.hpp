#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/SparseCore>

namespace kcrec {

using SpMatI = Eigen::SparseMatrix<std::int64_t>;
using SpMatD = Eigen::SparseMatrix<double>;

// The five MOOC entity types. Closed enumeration; every entity carries
// exactly one.
enum class EntityType { User = 0, Course, Video, Teacher, Concept };
inline constexpr int kEntityTypeCount = 5;

const char* to_string(EntityType t);
std::optional<EntityType> entity_type_from_string(const std::string& s);

struct RelationType {
    std::string name;
    EntityType src;
    EntityType dst;
    bool symmetric_closure = false;  // whether the inverse relation is implied
};

struct NetworkSchema {
    std::vector<EntityType> entity_types;
    std::vector<RelationType> relation_types;

    const RelationType* find_relation(const std::string& name) const;
    int relation_index(const std::string& name) const;  // -1 when absent

    // The MOOC schema: 5 entity types, 7 relations.
    static NetworkSchema mooc();
};

// Canonical MOOC relation names.
inline constexpr const char* kRelUserClickConcept = "user-click-concept";
inline constexpr const char* kRelUserLearnCourse = "user-learn-course";
inline constexpr const char* kRelUserWatchVideo = "user-watch-video";
inline constexpr const char* kRelTeacherCourse = "teacher-course";
inline constexpr const char* kRelCourseVideo = "course-video";
inline constexpr const char* kRelVideoConcept = "video-concept";
inline constexpr const char* kRelCourseConcept = "course-concept";

struct EntityRef {
    EntityType type;
    int index;
    bool operator==(const EntityRef&) const = default;
};

struct HinEdge {
    EntityRef src;
    EntityRef dst;
    std::int64_t weight = 1;  // accumulated observation count, >= 1
};

// Typed heterogeneous graph store. Entities get a dense per-type index in
// insertion order; external ids are unique across all types. Mutable while
// loading, treated as immutable afterwards (all downstream ops take const
// references and are pure).
class Hin {
public:
    explicit Hin(NetworkSchema schema);

    const NetworkSchema& schema() const { return schema_; }

    int add_entity(EntityType type, const std::string& external_id);
    int count(EntityType type) const { return static_cast<int>(ids_[static_cast<int>(type)].size()); }
    int total_entities() const;
    const std::string& external_id(EntityType type, int index) const;
    const std::vector<std::string>& ids(EntityType type) const { return ids_[static_cast<int>(type)]; }
    std::optional<EntityRef> lookup(const std::string& external_id) const;

    // Resolves both ids and accumulates weight on repeats. Unknown relation
    // or id throws; endpoint-type mismatches are stored and left for
    // validate_schema to flag.
    void add_edge(const std::string& relation, const std::string& src_id,
                  const std::string& dst_id, std::int64_t weight = 1);
    void add_edge(int relation_index, EntityRef src, EntityRef dst, std::int64_t weight = 1);

    const std::vector<HinEdge>& edges(int relation_index) const { return edges_[relation_index]; }
    const std::vector<HinEdge>& edges(const std::string& relation) const;
    std::int64_t edge_count(int relation_index) const {
        return static_cast<std::int64_t>(edges_[relation_index].size());
    }

    // Binarized incidence matrix of one relation over its declared endpoint
    // types. Edges whose endpoints mismatch the declaration are skipped;
    // validate_schema reports them.
    SpMatI incidence(int relation_index) const;
    SpMatI incidence(const std::string& relation) const;

    // Expected per-type counts recorded at manifest load, checked by
    // validate_schema.
    void set_expected_count(EntityType type, std::int64_t n) {
        expected_counts_[static_cast<int>(type)] = n;
    }

    const std::array<std::optional<std::int64_t>, kEntityTypeCount>& expected_counts() const {
        return expected_counts_;
    }

private:
    NetworkSchema schema_;
    std::array<std::vector<std::string>, kEntityTypeCount> ids_;
    std::unordered_map<std::string, EntityRef> lookup_;
    std::vector<std::vector<HinEdge>> edges_;  // parallel to schema_.relation_types
    // (relation, src.type, src.index, dst.type, dst.index) -> position in edges_[relation]
    std::vector<std::map<std::tuple<int, int, int, int>, std::size_t>> edge_pos_;
    std::array<std::optional<std::int64_t>, kEntityTypeCount> expected_counts_;
};

struct Violation {
    std::string code;
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

// Static check of all Hin invariants: heterogeneity condition, declared
// relation endpoints, endpoint type/index agreement per edge, duplicate
// triples, manifest count agreement. Violations are report entries, not
// faults; downstream ops require an empty report.
ValidationReport validate_schema(const Hin& hin);

}  // namespace kcrec
