#include "kcrec/hin.hpp"

#include <set>
#include <stdexcept>

namespace kcrec {

const char* to_string(EntityType t) {
    switch (t) {
        case EntityType::User: return "user";
        case EntityType::Course: return "course";
        case EntityType::Video: return "video";
        case EntityType::Teacher: return "teacher";
        case EntityType::Concept: return "concept";
    }
    return "?";
}

std::optional<EntityType> entity_type_from_string(const std::string& s) {
    if (s == "user") return EntityType::User;
    if (s == "course") return EntityType::Course;
    if (s == "video") return EntityType::Video;
    if (s == "teacher") return EntityType::Teacher;
    if (s == "concept") return EntityType::Concept;
    return std::nullopt;
}

const RelationType* NetworkSchema::find_relation(const std::string& name) const {
    for (const auto& r : relation_types)
        if (r.name == name) return &r;
    return nullptr;
}

int NetworkSchema::relation_index(const std::string& name) const {
    for (std::size_t i = 0; i < relation_types.size(); ++i)
        if (relation_types[i].name == name) return static_cast<int>(i);
    return -1;
}

NetworkSchema NetworkSchema::mooc() {
    NetworkSchema s;
    s.entity_types = {EntityType::User, EntityType::Course, EntityType::Video,
                      EntityType::Teacher, EntityType::Concept};
    s.relation_types = {
        {kRelUserClickConcept, EntityType::User, EntityType::Concept},
        {kRelUserLearnCourse, EntityType::User, EntityType::Course},
        {kRelUserWatchVideo, EntityType::User, EntityType::Video},
        {kRelTeacherCourse, EntityType::Teacher, EntityType::Course},
        {kRelCourseVideo, EntityType::Course, EntityType::Video},
        {kRelVideoConcept, EntityType::Video, EntityType::Concept},
        {kRelCourseConcept, EntityType::Course, EntityType::Concept},
    };
    return s;
}

Hin::Hin(NetworkSchema schema) : schema_(std::move(schema)) {
    edges_.resize(schema_.relation_types.size());
    edge_pos_.resize(schema_.relation_types.size());
}

int Hin::add_entity(EntityType type, const std::string& external_id) {
    if (lookup_.count(external_id))
        throw std::runtime_error("duplicate external id: " + external_id);
    auto& v = ids_[static_cast<int>(type)];
    int index = static_cast<int>(v.size());
    v.push_back(external_id);
    lookup_[external_id] = {type, index};
    return index;
}

int Hin::total_entities() const {
    int n = 0;
    for (const auto& v : ids_) n += static_cast<int>(v.size());
    return n;
}

const std::string& Hin::external_id(EntityType type, int index) const {
    return ids_[static_cast<int>(type)].at(index);
}

std::optional<EntityRef> Hin::lookup(const std::string& external_id) const {
    auto it = lookup_.find(external_id);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

void Hin::add_edge(const std::string& relation, const std::string& src_id,
                   const std::string& dst_id, std::int64_t weight) {
    int ri = schema_.relation_index(relation);
    if (ri < 0) throw std::runtime_error("unknown relation: " + relation);
    auto src = lookup(src_id);
    if (!src) throw std::runtime_error("unknown entity id: " + src_id);
    auto dst = lookup(dst_id);
    if (!dst) throw std::runtime_error("unknown entity id: " + dst_id);
    add_edge(ri, *src, *dst, weight);
}

void Hin::add_edge(int relation_index, EntityRef src, EntityRef dst, std::int64_t weight) {
    auto key = std::make_tuple(static_cast<int>(src.type), src.index,
                               static_cast<int>(dst.type), dst.index);
    auto& pos = edge_pos_[relation_index];
    auto it = pos.find(key);
    if (it != pos.end()) {
        edges_[relation_index][it->second].weight += weight;
        return;
    }
    pos[key] = edges_[relation_index].size();
    edges_[relation_index].push_back({src, dst, weight});
}

const std::vector<HinEdge>& Hin::edges(const std::string& relation) const {
    int ri = schema_.relation_index(relation);
    if (ri < 0) throw std::runtime_error("unknown relation: " + relation);
    return edges_[ri];
}

SpMatI Hin::incidence(int relation_index) const {
    const RelationType& rel = schema_.relation_types.at(relation_index);
    SpMatI m(count(rel.src), count(rel.dst));
    std::vector<Eigen::Triplet<std::int64_t>> trip;
    trip.reserve(edges_[relation_index].size());
    for (const auto& e : edges_[relation_index]) {
        if (e.src.type != rel.src || e.dst.type != rel.dst) continue;
        if (e.src.index >= count(rel.src) || e.dst.index >= count(rel.dst)) continue;
        trip.emplace_back(e.src.index, e.dst.index, 1);  // binarized
    }
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

SpMatI Hin::incidence(const std::string& relation) const {
    int ri = schema_.relation_index(relation);
    if (ri < 0) throw std::runtime_error("unknown relation: " + relation);
    return incidence(ri);
}

std::string ValidationReport::to_string() const {
    std::string out;
    for (const auto& v : violations) {
        out += v.code;
        out += ": ";
        out += v.detail;
        out += '\n';
    }
    return out;
}

ValidationReport validate_schema(const Hin& hin) {
    ValidationReport report;
    const NetworkSchema& s = hin.schema();

    if (s.entity_types.size() + s.relation_types.size() <= 2)
        report.violations.push_back(
            {"heterogeneity", "heterogeneity condition |N|+|R|>2 violated: |N|=" +
                                  std::to_string(s.entity_types.size()) +
                                  " |R|=" + std::to_string(s.relation_types.size())});

    std::set<EntityType> declared(s.entity_types.begin(), s.entity_types.end());
    std::set<std::tuple<std::string, int, int>> rel_keys;
    for (const auto& r : s.relation_types) {
        if (!declared.count(r.src) || !declared.count(r.dst))
            report.violations.push_back(
                {"relation-endpoint", "relation " + r.name + " references undeclared entity type"});
        auto key = std::make_tuple(r.name, static_cast<int>(r.src), static_cast<int>(r.dst));
        if (!rel_keys.insert(key).second)
            report.violations.push_back(
                {"relation-duplicate", "duplicate relation declaration: " + r.name});
    }

    for (std::size_t ri = 0; ri < s.relation_types.size(); ++ri) {
        const RelationType& rel = s.relation_types[ri];
        std::set<std::tuple<int, int, int, int>> seen;
        for (const auto& e : hin.edges(static_cast<int>(ri))) {
            if (e.src.type != rel.src || e.dst.type != rel.dst) {
                report.violations.push_back(
                    {"endpoint-type-mismatch",
                     "edge (" + std::string(to_string(e.src.type)) + "->" + to_string(e.dst.type) +
                         ") declared under relation " + rel.name + " (" + to_string(rel.src) +
                         "->" + to_string(rel.dst) + ")"});
                continue;
            }
            if (e.src.index < 0 || e.src.index >= hin.count(e.src.type) || e.dst.index < 0 ||
                e.dst.index >= hin.count(e.dst.type)) {
                report.violations.push_back(
                    {"endpoint-missing", "edge endpoint index out of range under " + rel.name});
                continue;
            }
            if (e.weight < 1)
                report.violations.push_back(
                    {"edge-weight", "edge weight < 1 under relation " + rel.name});
            auto key = std::make_tuple(static_cast<int>(e.src.type), e.src.index,
                                       static_cast<int>(e.dst.type), e.dst.index);
            if (!seen.insert(key).second)
                report.violations.push_back(
                    {"edge-duplicate", "duplicate (relation, src, dst) triple under " + rel.name});
        }
    }

    for (int t = 0; t < kEntityTypeCount; ++t) {
        const auto& expected = hin.expected_counts()[t];
        if (expected && *expected != hin.count(static_cast<EntityType>(t)))
            report.violations.push_back(
                {"entity-count",
                 std::string(to_string(static_cast<EntityType>(t))) + " count " +
                     std::to_string(hin.count(static_cast<EntityType>(t))) +
                     " does not match manifest count " + std::to_string(*expected)});
    }

    return report;
}

}  // namespace kcrec
