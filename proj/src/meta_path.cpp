#include "kcrec/meta_path.hpp"

#include <stdexcept>

namespace kcrec {

static EntityType step_src(const RelationType& rel, bool inverse) {
    return inverse ? rel.dst : rel.src;
}

static EntityType step_dst(const RelationType& rel, bool inverse) {
    return inverse ? rel.src : rel.dst;
}

void MetaPathSpec::validate(const NetworkSchema& schema) const {
    if (steps.empty()) throw std::runtime_error("meta-path " + name + ": no steps");
    const RelationType* prev = nullptr;
    bool prev_inverse = false;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const RelationType* rel = schema.find_relation(steps[i].relation);
        if (!rel)
            throw std::runtime_error("meta-path " + name + ": unknown relation " +
                                     steps[i].relation);
        if (i == 0) {
            if (step_src(*rel, steps[i].inverse) != anchor)
                throw std::runtime_error("meta-path " + name + ": first step does not leave anchor type " +
                                         to_string(anchor));
        } else if (step_dst(*prev, prev_inverse) != step_src(*rel, steps[i].inverse)) {
            throw std::runtime_error("meta-path " + name + ": type-incompatible steps " +
                                     std::to_string(i - 1) + " (" + prev->name + ") and " +
                                     std::to_string(i) + " (" + rel->name + ")");
        }
        prev = rel;
        prev_inverse = steps[i].inverse;
    }
    if (step_dst(*prev, prev_inverse) != anchor)
        throw std::runtime_error("meta-path " + name + ": last step does not return to anchor type " +
                                 to_string(anchor));
}

bool MetaPathSpec::is_palindromic() const {
    std::size_t n = steps.size();
    for (std::size_t i = 0; i < n; ++i) {
        const MetaPathStep& a = steps[i];
        const MetaPathStep& b = steps[n - 1 - i];
        if (a.relation != b.relation || a.inverse == b.inverse) return false;
    }
    return true;
}

PathAdjacency compose_meta_path(const Hin& hin, const MetaPathSpec& spec) {
    spec.validate(hin.schema());

    SpMatI product;
    bool first = true;
    for (const auto& step : spec.steps) {
        SpMatI inc = hin.incidence(step.relation);
        SpMatI m = step.inverse ? SpMatI(inc.transpose()) : inc;
        if (first) {
            product = std::move(m);
            first = false;
        } else {
            product = (product * m).eval();
        }
    }

    PathAdjacency out;
    out.meta_path = spec;
    out.counts = product;
    out.counts.prune([](int, int, std::int64_t v) { return v != 0; });

    std::vector<Eigen::Triplet<std::int64_t>> trip;
    for (int k = 0; k < out.counts.outerSize(); ++k)
        for (SpMatI::InnerIterator it(out.counts, k); it; ++it)
            if (it.row() != it.col() && it.value() > 0) trip.emplace_back(it.row(), it.col(), 1);
    out.binary = SpMatI(out.counts.rows(), out.counts.cols());
    out.binary.setFromTriplets(trip.begin(), trip.end());
    return out;
}

std::vector<MetaPathSpec> user_meta_path_catalog() {
    return {
        {"MP1", {{kRelUserClickConcept, false}, {kRelUserClickConcept, true}}, EntityType::User},
        {"MP2", {{kRelUserLearnCourse, false}, {kRelUserLearnCourse, true}}, EntityType::User},
        {"MP3", {{kRelUserWatchVideo, false}, {kRelUserWatchVideo, true}}, EntityType::User},
        {"MP4",
         {{kRelUserLearnCourse, false},
          {kRelTeacherCourse, true},
          {kRelTeacherCourse, false},
          {kRelUserLearnCourse, true}},
         EntityType::User},
    };
}

std::vector<MetaPathSpec> concept_meta_path_catalog() {
    return {
        {"KK", {{kRelVideoConcept, true}, {kRelVideoConcept, false}}, EntityType::Concept},
        {"KUK", {{kRelUserClickConcept, true}, {kRelUserClickConcept, false}}, EntityType::Concept},
        {"KCK", {{kRelCourseConcept, true}, {kRelCourseConcept, false}}, EntityType::Concept},
    };
}

MetaPathSpec catalog_spec(const std::string& name) {
    for (const auto& s : user_meta_path_catalog())
        if (s.name == name) return s;
    for (const auto& s : concept_meta_path_catalog())
        if (s.name == name) return s;
    throw std::runtime_error("unknown meta-path: " + name);
}

const PathAdjacency& MetaPathComposer::compose(const MetaPathSpec& spec) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(spec.name);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(spec.name, compose_meta_path(*hin_, spec)).first->second;
}

}  // namespace kcrec
