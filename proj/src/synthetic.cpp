#include "kcrec/synthetic.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "kcrec/hin.hpp"
#include "kcrec/rng.hpp"
#include "kcrec/tsv.hpp"

namespace kcrec {

void SyntheticSpec::validate() const {
    if (users < 1 || courses < 1 || videos < 1 || teachers < 1 || concepts < 1)
        throw std::runtime_error("synthetic: every entity count must be >= 1");
    if (blocks < 1) throw std::runtime_error("synthetic: blocks must be >= 1");
    if (blocks > courses || blocks > concepts)
        throw std::runtime_error("synthetic: blocks must not exceed course or concept counts");
    if (!(p_within > p_cross))
        throw std::runtime_error("synthetic: p_within must exceed p_cross");
    if (p_cross < 0.0 || p_within > 1.0)
        throw std::runtime_error("synthetic: probabilities must lie in [0, 1]");
    if (boundary < 1) throw std::runtime_error("synthetic: boundary must be >= 1");
}

SyntheticFiles generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& dir) {
    spec.validate();
    Rng rng(spec.seed);

    auto uid = [](int i) { return "u" + std::to_string(i); };
    auto cid = [](int i) { return "c" + std::to_string(i); };
    auto vid = [](int i) { return "v" + std::to_string(i); };
    auto tid = [](int i) { return "t" + std::to_string(i); };
    auto kid = [](int i) { return "k" + std::to_string(i); };

    auto block_of = [&](int i) { return i % spec.blocks; };

    std::vector<std::vector<int>> block_courses(spec.blocks);
    for (int c = 0; c < spec.courses; ++c) block_courses[static_cast<std::size_t>(block_of(c))].push_back(c);
    std::vector<std::vector<int>> block_concepts(spec.blocks);
    for (int k = 0; k < spec.concepts; ++k)
        block_concepts[static_cast<std::size_t>(block_of(k))].push_back(k);

    // static wiring
    std::vector<int> course_of_video(spec.videos);
    for (int v = 0; v < spec.videos; ++v) course_of_video[static_cast<std::size_t>(v)] = v % spec.courses;
    std::vector<std::vector<int>> videos_of_course(spec.courses);
    for (int v = 0; v < spec.videos; ++v)
        videos_of_course[static_cast<std::size_t>(course_of_video[static_cast<std::size_t>(v)])].push_back(v);

    // teachers stay within their subject block, like real MOOC staff
    std::vector<std::vector<int>> block_teachers(spec.blocks);
    for (int t = 0; t < spec.teachers; ++t)
        block_teachers[static_cast<std::size_t>(block_of(t))].push_back(t);
    std::vector<int> teacher_of_course(spec.courses);
    for (int c = 0; c < spec.courses; ++c) {
        const auto& pool = block_teachers[static_cast<std::size_t>(block_of(c))];
        teacher_of_course[static_cast<std::size_t>(c)] =
            pool.empty()
                ? static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(spec.teachers)))
                : pool[static_cast<std::size_t>(rng.uniform_index(pool.size()))];
    }

    std::vector<std::vector<int>> concepts_of_video(spec.videos);
    for (int v = 0; v < spec.videos; ++v) {
        const auto& pool = block_concepts[static_cast<std::size_t>(
            block_of(course_of_video[static_cast<std::size_t>(v)]))];
        std::size_t want = 1 + static_cast<std::size_t>(rng.uniform_index(3));
        auto picked = rng.sample_without_replacement(pool, want);
        std::sort(picked.begin(), picked.end());
        concepts_of_video[static_cast<std::size_t>(v)] = std::move(picked);
    }

    std::vector<std::vector<int>> enrolled(spec.users);
    for (int u = 0; u < spec.users; ++u) {
        const auto& pool = block_courses[static_cast<std::size_t>(block_of(u))];
        std::size_t cap = std::min<std::size_t>(3, pool.size());
        std::size_t want = 1 + static_cast<std::size_t>(rng.uniform_index(cap));
        auto picked = rng.sample_without_replacement(pool, want);
        if (spec.blocks > 1 && rng.uniform() < 0.1) {
            int c = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(spec.courses)));
            if (block_of(c) != block_of(u)) picked.push_back(c);
        }
        std::sort(picked.begin(), picked.end());
        picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
        enrolled[static_cast<std::size_t>(u)] = std::move(picked);
    }

    std::vector<std::pair<int, int>> watched;  // (user, video)
    for (int u = 0; u < spec.users; ++u)
        for (int c : enrolled[static_cast<std::size_t>(u)])
            for (int v : videos_of_course[static_cast<std::size_t>(c)])
                if (rng.uniform() < 0.5) watched.emplace_back(u, v);

    // clicks with one held-out target per user
    struct Click {
        int user;
        int concept_id;
        std::int64_t count;
        std::int64_t timestamp;
    };
    std::vector<Click> clicks;
    for (int u = 0; u < spec.users; ++u) {
        std::vector<int> pairs;
        for (int k = 0; k < spec.concepts; ++k) {
            double p = block_of(u) == block_of(k) ? spec.p_within : spec.p_cross;
            if (rng.uniform() < p) pairs.push_back(k);
        }
        std::size_t test_idx = pairs.size();
        if (pairs.size() >= 2)
            test_idx = static_cast<std::size_t>(rng.uniform_index(pairs.size()));
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            Click click;
            click.user = u;
            click.concept_id = pairs[i];
            click.count = 1 + static_cast<std::int64_t>(rng.uniform_index(3));
            std::int64_t window = static_cast<std::int64_t>(
                rng.uniform_index(static_cast<std::uint64_t>(spec.boundary)));
            click.timestamp = i == test_idx ? spec.boundary + window : window;
            clicks.push_back(click);
        }
    }

    // emit
    std::string manifest = join_tsv({"external_id", "entity_type", "display_name"}) + "\n";
    for (int i = 0; i < spec.users; ++i) manifest += join_tsv({uid(i), "user", uid(i)}) + "\n";
    for (int i = 0; i < spec.courses; ++i) manifest += join_tsv({cid(i), "course", cid(i)}) + "\n";
    for (int i = 0; i < spec.videos; ++i) manifest += join_tsv({vid(i), "video", vid(i)}) + "\n";
    for (int i = 0; i < spec.teachers; ++i) manifest += join_tsv({tid(i), "teacher", tid(i)}) + "\n";
    for (int i = 0; i < spec.concepts; ++i) manifest += join_tsv({kid(i), "concept", kid(i)}) + "\n";

    std::string rel_header =
        join_tsv({"relation_name", "src_external_id", "dst_external_id", "count", "timestamp"}) +
        "\n";
    std::string relations = rel_header;
    for (int u = 0; u < spec.users; ++u)
        for (int c : enrolled[static_cast<std::size_t>(u)])
            relations += join_tsv({kRelUserLearnCourse, uid(u), cid(c), "1", ""}) + "\n";
    for (const auto& [u, v] : watched)
        relations += join_tsv({kRelUserWatchVideo, uid(u), vid(v), "1", ""}) + "\n";
    for (int c = 0; c < spec.courses; ++c)
        relations += join_tsv({kRelTeacherCourse, tid(teacher_of_course[static_cast<std::size_t>(c)]),
                               cid(c), "1", ""}) +
                     "\n";
    for (int v = 0; v < spec.videos; ++v)
        relations +=
            join_tsv({kRelCourseVideo, cid(course_of_video[static_cast<std::size_t>(v)]), vid(v),
                      "1", ""}) +
            "\n";
    for (int v = 0; v < spec.videos; ++v)
        for (int k : concepts_of_video[static_cast<std::size_t>(v)])
            relations += join_tsv({kRelVideoConcept, vid(v), kid(k), "1", ""}) + "\n";
    for (int c = 0; c < spec.courses; ++c) {
        std::set<int> covered;
        for (int v : videos_of_course[static_cast<std::size_t>(c)])
            covered.insert(concepts_of_video[static_cast<std::size_t>(v)].begin(),
                           concepts_of_video[static_cast<std::size_t>(v)].end());
        for (int k : covered)
            relations += join_tsv({kRelCourseConcept, cid(c), kid(k), "1", ""}) + "\n";
    }

    std::string interactions = rel_header;
    for (const Click& click : clicks)
        interactions += join_tsv({kRelUserClickConcept, uid(click.user), kid(click.concept_id),
                                  std::to_string(click.count), std::to_string(click.timestamp)}) +
                        "\n";

    std::string config;
    config += "manifest = manifest.tsv\n";
    config += "relations = relations.tsv\n";
    config += "interactions = interactions.tsv\n";
    config += "boundary = " + std::to_string(spec.boundary) + "\n";
    config += "seed = " + std::to_string(spec.seed) + "\n";
    config += "synthetic_users = " + std::to_string(spec.users) + "\n";
    config += "synthetic_courses = " + std::to_string(spec.courses) + "\n";
    config += "synthetic_videos = " + std::to_string(spec.videos) + "\n";
    config += "synthetic_teachers = " + std::to_string(spec.teachers) + "\n";
    config += "synthetic_concepts = " + std::to_string(spec.concepts) + "\n";
    config += "synthetic_blocks = " + std::to_string(spec.blocks) + "\n";
    config += "synthetic_p_within = " + format_double(spec.p_within, 6) + "\n";
    config += "synthetic_p_cross = " + format_double(spec.p_cross, 6) + "\n";

    SyntheticFiles files;
    files.manifest = dir / "manifest.tsv";
    files.relations = dir / "relations.tsv";
    files.interactions = dir / "interactions.tsv";
    files.config = dir / "dataset.conf";
    atomic_write(files.manifest, manifest);
    atomic_write(files.relations, relations);
    atomic_write(files.interactions, interactions);
    atomic_write(files.config, config);
    return files;
}

}  // namespace kcrec
