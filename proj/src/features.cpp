#include "kcrec/features.hpp"

#include <cmath>
#include <stdexcept>

#include "kcrec/rng.hpp"
#include "kcrec/tsv.hpp"

namespace kcrec {

static void fill_hashed_row(Mat& rows, int row, const std::string& id, std::uint64_t seed) {
    for (int j = 0; j < rows.cols(); ++j)
        rows(row, j) = hashed_unit_value(id, seed, static_cast<std::uint64_t>(j));
}

FeatureMatrix load_embedding_features(const std::string& path, EntityType type, const Hin& hin,
                                      int* fallback_count) {
    TsvFile file = read_tsv(path, /*with_header=*/false);
    int n = hin.count(type);

    int width = -1;
    std::vector<char> filled(static_cast<std::size_t>(n), 0);
    Mat rows;
    for (const auto& row : file.rows) {
        if (row.fields.size() < 2)
            throw std::runtime_error(path + ":" + std::to_string(row.line) +
                                     ": expected id followed by at least one value");
        int w = static_cast<int>(row.fields.size()) - 1;
        if (width < 0) {
            width = w;
            rows = Mat::Zero(n, width);
        } else if (w != width) {
            throw std::runtime_error(path + ":" + std::to_string(row.line) +
                                     ": inconsistent width " + std::to_string(w) + " (expected " +
                                     std::to_string(width) + ")");
        }
        auto ref = hin.lookup(row.fields[0]);
        if (!ref || ref->type != type)
            throw std::runtime_error(path + ":" + std::to_string(row.line) +
                                     ": unknown " + std::string(to_string(type)) + " id: " +
                                     row.fields[0]);
        for (int j = 0; j < width; ++j) {
            const std::string& tok = row.fields[j + 1];
            std::size_t used = 0;
            double v = 0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size() || !std::isfinite(v))
                throw std::runtime_error(path + ":" + std::to_string(row.line) +
                                         ": non-numeric token: " + tok);
            rows(ref->index, j) = v;
        }
        filled[static_cast<std::size_t>(ref->index)] = 1;
    }

    if (width < 0) {
        // Empty file: every row falls back.
        width = 1;
        rows = Mat::Zero(n, width);
    }

    int fallbacks = 0;
    for (int i = 0; i < n; ++i) {
        if (filled[static_cast<std::size_t>(i)]) continue;
        fill_hashed_row(rows, i, hin.external_id(type, i), kEmbeddingFallbackSeed);
        ++fallbacks;
    }
    if (fallback_count) *fallback_count = fallbacks;

    return {type, std::move(rows), FeatureSource::EmbeddingFile};
}

FeatureMatrix one_hot_features(EntityType type, const Hin& hin) {
    int n = hin.count(type);
    return {type, Mat::Identity(n, n), FeatureSource::OneHot};
}

FeatureMatrix hashed_features(EntityType type, const Hin& hin, int width, std::uint64_t seed) {
    if (width <= 0) throw std::runtime_error("hashed features: width must be > 0");
    int n = hin.count(type);
    Mat rows(n, width);
    for (int i = 0; i < n; ++i) fill_hashed_row(rows, i, hin.external_id(type, i), seed);
    return {type, std::move(rows), FeatureSource::Hashed};
}

static SpMatI require_incidence(const Hin& hin, const char* relation) {
    if (hin.schema().relation_index(relation) < 0)
        throw std::runtime_error(std::string("missing required relation type in schema: ") +
                                 relation);
    return hin.incidence(relation);
}

ContextRelationSet build_context_relations(const Hin& hin) {
    ContextRelationSet out;
    out.r1_user_click_concept = require_incidence(hin, kRelUserClickConcept);
    out.r2_user_learn_course = require_incidence(hin, kRelUserLearnCourse);
    out.r3_user_watch_video = require_incidence(hin, kRelUserWatchVideo);

    SpMatI learn = out.r2_user_learn_course;
    SpMatI taught_by = SpMatI(require_incidence(hin, kRelTeacherCourse).transpose());
    SpMatI product = learn * taught_by;  // user x teacher path counts
    std::vector<Eigen::Triplet<std::int64_t>> trip;
    for (int k = 0; k < product.outerSize(); ++k)
        for (SpMatI::InnerIterator it(product, k); it; ++it)
            if (it.value() > 0) trip.emplace_back(it.row(), it.col(), 1);
    out.r4_user_course_teacher = SpMatI(product.rows(), product.cols());
    out.r4_user_course_teacher.setFromTriplets(trip.begin(), trip.end());
    return out;
}

}  // namespace kcrec
