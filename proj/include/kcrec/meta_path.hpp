#pragma once

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "kcrec/hin.hpp"

namespace kcrec {

struct MetaPathStep {
    std::string relation;
    bool inverse = false;  // traverse dst -> src
};

// An ordered relation-type sequence connecting same-typed endpoints. The
// first step must leave the anchor type and the last step must return to it.
struct MetaPathSpec {
    std::string name;
    std::vector<MetaPathStep> steps;
    EntityType anchor;

    // Throws naming the offending step pair when the chain is
    // type-incompatible or the endpoints are not the anchor.
    void validate(const NetworkSchema& schema) const;

    // Whether the step sequence equals its own reversal with directions
    // flipped; such paths compose to symmetric matrices.
    bool is_palindromic() const;
};

// Composed path-instance counts over anchor entities, plus the binarized
// adjacency with zeroed diagonal the encoder consumes.
struct PathAdjacency {
    MetaPathSpec meta_path;
    SpMatI counts;
    SpMatI binary;
};

// Product over steps of the binarized step incidence (transpose for inverse
// steps). counts keeps the raw integer path counts; binary drops the
// diagonal so self-loops come only from the encoder's A + I.
PathAdjacency compose_meta_path(const Hin& hin, const MetaPathSpec& spec);

// The four user-side paths: MP1 U-K-U, MP2 U-C-U, MP3 U-V-U,
// MP4 U-C-T-C-U.
std::vector<MetaPathSpec> user_meta_path_catalog();

// Concept-side paths: KK (co-occurrence in a shared video), KUK, KCK.
std::vector<MetaPathSpec> concept_meta_path_catalog();

// Finds a catalog spec by name on either side; throws on unknown names.
MetaPathSpec catalog_spec(const std::string& name);

// Name-keyed cache over compose_meta_path; composition is pure, so
// concurrent callers for different specs are fine.
class MetaPathComposer {
public:
    explicit MetaPathComposer(const Hin& hin) : hin_(&hin) {}

    const PathAdjacency& compose(const MetaPathSpec& spec);

private:
    const Hin* hin_;
    std::map<std::string, PathAdjacency> cache_;
    std::mutex mutex_;
};

}  // namespace kcrec
