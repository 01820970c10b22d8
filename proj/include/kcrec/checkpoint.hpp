#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kcrec/model.hpp"

namespace kcrec {

// What the recommend command needs beyond parameters: entity ids, the fused
// representations as of the save, and each user's training clicks (the
// exclusion set). Keeping these in the container makes a checkpoint
// self-sufficient for scoring.
struct CheckpointExtras {
    std::uint64_t seed = 0;
    Mat e_user;
    Mat e_concept;
    std::vector<std::string> user_ids;
    std::vector<std::string> concept_ids;
    std::vector<std::vector<int>> clicked;  // per user, ascending concept indices
};

struct Checkpoint {
    ModelState state;
    CheckpointExtras extras;
};

inline constexpr int kCheckpointVersion = 1;

// JSON with sorted keys and exact-round-trip doubles: save -> load -> save
// is byte-identical. Non-finite parameters are rejected (they would not
// survive the trip).
std::string checkpoint_to_json(const Checkpoint& cp);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const Checkpoint& cp, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace kcrec
