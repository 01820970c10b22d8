#include "kcrec/dataset.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>
#include <stdexcept>

#include "kcrec/tsv.hpp"

namespace kcrec {

namespace {

int col_of(const TsvFile& f, const std::string& name) {
    for (std::size_t i = 0; i < f.header.size(); ++i)
        if (f.header[i] == name) return static_cast<int>(i);
    throw std::runtime_error(f.path + ": missing column '" + name + "'");
}

// -1 when the column is absent (optional columns).
int col_of_optional(const TsvFile& f, const std::string& name) {
    for (std::size_t i = 0; i < f.header.size(); ++i)
        if (f.header[i] == name) return static_cast<int>(i);
    return -1;
}

std::string row_error(const std::string& path, int line, const std::string& what) {
    return path + ":" + std::to_string(line) + ": " + what;
}

const std::string& cell(const TsvFile& f, const TsvRow& row, int col) {
    if (col < 0 || static_cast<std::size_t>(col) >= row.fields.size())
        throw std::runtime_error(row_error(f.path, row.line, "row has " +
                                                                 std::to_string(row.fields.size()) +
                                                                 " fields, column " +
                                                                 std::to_string(col + 1) +
                                                                 " required"));
    return row.fields[static_cast<std::size_t>(col)];
}

std::int64_t parse_i64(const std::string& s, const std::string& what, const std::string& path,
                       int line) {
    if (s.empty()) throw std::runtime_error(row_error(path, line, "empty " + what));
    char* end = nullptr;
    errno = 0;
    long long v = std::strtoll(s.c_str(), &end, 10);
    if (errno != 0 || end != s.c_str() + s.size())
        throw std::runtime_error(row_error(path, line, "malformed " + what + " '" + s + "'"));
    return static_cast<std::int64_t>(v);
}

void load_manifest(Hin& hin, const std::filesystem::path& path) {
    TsvFile f = read_tsv(path.string(), true);
    int id_col = col_of(f, "external_id");
    int type_col = col_of(f, "entity_type");
    std::array<std::int64_t, kEntityTypeCount> counts{};
    for (const TsvRow& row : f.rows) {
        const std::string& type_str = cell(f, row, type_col);
        auto type = entity_type_from_string(type_str);
        if (!type)
            throw std::runtime_error(
                row_error(f.path, row.line, "unknown entity type '" + type_str + "'"));
        try {
            hin.add_entity(*type, cell(f, row, id_col));
        } catch (const std::exception& e) {
            throw std::runtime_error(row_error(f.path, row.line, e.what()));
        }
        ++counts[static_cast<std::size_t>(*type)];
    }
    for (int t = 0; t < kEntityTypeCount; ++t)
        hin.set_expected_count(static_cast<EntityType>(t), counts[static_cast<std::size_t>(t)]);
}

void load_relation_file(Hin& hin, const std::filesystem::path& path) {
    TsvFile f = read_tsv(path.string(), true);
    int rel_col = col_of(f, "relation_name");
    int src_col = col_of(f, "src_external_id");
    int dst_col = col_of(f, "dst_external_id");
    int count_col = col_of_optional(f, "count");
    for (const TsvRow& row : f.rows) {
        const std::string& rel = cell(f, row, rel_col);
        if (rel == kRelUserClickConcept)
            throw std::runtime_error(row_error(
                f.path, row.line, "user-click-concept rows belong in the interaction file"));
        std::int64_t count = 1;
        if (count_col >= 0 && static_cast<std::size_t>(count_col) < row.fields.size() &&
            !row.fields[static_cast<std::size_t>(count_col)].empty())
            count = parse_i64(row.fields[static_cast<std::size_t>(count_col)], "count", f.path,
                              row.line);
        if (count < 1)
            throw std::runtime_error(row_error(f.path, row.line, "count must be >= 1"));
        try {
            hin.add_edge(rel, cell(f, row, src_col), cell(f, row, dst_col), count);
        } catch (const std::exception& e) {
            throw std::runtime_error(row_error(f.path, row.line, e.what()));
        }
    }
}

std::vector<Interaction> load_interactions(const Hin& hin, const std::filesystem::path& path) {
    TsvFile f;
    try {
        f = read_tsv(path.string(), true);
    } catch (const std::exception& e) {
        // a zero-byte interaction file is an empty training set, not a
        // format problem
        if (std::string(e.what()).find("missing header row") != std::string::npos)
            throw std::runtime_error("no training positives");
        throw;
    }
    int rel_col = col_of(f, "relation_name");
    int src_col = col_of(f, "src_external_id");
    int dst_col = col_of(f, "dst_external_id");
    int count_col = col_of_optional(f, "count");
    int ts_col = col_of(f, "timestamp");

    std::vector<Interaction> events;
    events.reserve(f.rows.size());
    for (const TsvRow& row : f.rows) {
        const std::string& rel = cell(f, row, rel_col);
        if (rel != kRelUserClickConcept)
            throw std::runtime_error(row_error(
                f.path, row.line, "interaction rows must use relation " +
                                      std::string(kRelUserClickConcept) + ", got '" + rel + "'"));
        auto resolve = [&](const std::string& id, EntityType want) {
            auto ref = hin.lookup(id);
            if (!ref)
                throw std::runtime_error(row_error(f.path, row.line, "unknown entity id '" + id +
                                                                         "'"));
            if (ref->type != want)
                throw std::runtime_error(row_error(f.path, row.line, "entity '" + id + "' is a " +
                                                                         to_string(ref->type) +
                                                                         ", expected " +
                                                                         to_string(want)));
            return ref->index;
        };
        Interaction ev;
        ev.user = resolve(cell(f, row, src_col), EntityType::User);
        ev.concept_id = resolve(cell(f, row, dst_col), EntityType::Concept);
        ev.count = 1;
        if (count_col >= 0 && static_cast<std::size_t>(count_col) < row.fields.size() &&
            !row.fields[static_cast<std::size_t>(count_col)].empty())
            ev.count = parse_i64(row.fields[static_cast<std::size_t>(count_col)], "count", f.path,
                                 row.line);
        if (ev.count < 1)
            throw std::runtime_error(row_error(f.path, row.line, "count must be >= 1"));
        ev.timestamp = parse_i64(cell(f, row, ts_col), "timestamp", f.path, row.line);
        events.push_back(ev);
    }
    return events;
}

}  // namespace

std::string IngestSummary::to_string() const {
    std::string out = "entities:\n";
    for (int t = 0; t < kEntityTypeCount; ++t)
        out += "  " + std::string(kcrec::to_string(static_cast<EntityType>(t))) + ": " +
               std::to_string(entity_counts[static_cast<std::size_t>(t)]) + "\n";
    out += "relations:\n";
    for (const auto& [name, count] : relation_counts)
        out += "  " + name + ": " + std::to_string(count) + "\n";
    out += "train events: " + std::to_string(train_events) + "\n";
    out += "test events: " + std::to_string(test_events) + "\n";
    out += "cold-start users dropped: " + std::to_string(dropped_cold_start_users) + "\n";
    for (const std::string& w : warnings) out += "warning: " + w + "\n";
    return out;
}

DatasetBundle ingest(const IngestPaths& paths, std::int64_t boundary, SplitKind split) {
    DatasetBundle bundle;
    bundle.boundary = boundary;

    load_manifest(bundle.hin, paths.manifest);
    for (const auto& rel_path : paths.relation_files) load_relation_file(bundle.hin, rel_path);
    bundle.interactions = load_interactions(bundle.hin, paths.interaction_file);
    if (bundle.interactions.empty()) throw std::runtime_error("no training positives");

    std::vector<char> is_test(bundle.interactions.size(), 0);
    if (split == SplitKind::Boundary) {
        for (std::size_t i = 0; i < bundle.interactions.size(); ++i)
            is_test[i] = bundle.interactions[i].timestamp >= boundary ? 1 : 0;
    } else {
        // latest timestamp per user; later file position wins ties
        std::map<int, std::size_t> last;
        for (std::size_t i = 0; i < bundle.interactions.size(); ++i) {
            const Interaction& ev = bundle.interactions[i];
            auto it = last.find(ev.user);
            if (it == last.end() || bundle.interactions[it->second].timestamp <= ev.timestamp)
                last[ev.user] = i;
        }
        for (const auto& [u, i] : last) is_test[i] = 1;
    }

    int m = bundle.hin.count(EntityType::User);
    int n = bundle.hin.count(EntityType::Concept);
    bundle.train = RatingMatrix(m, n);
    int click_rel = bundle.hin.schema().relation_index(kRelUserClickConcept);

    std::set<std::pair<int, int>> test_set;
    for (std::size_t i = 0; i < bundle.interactions.size(); ++i) {
        const Interaction& ev = bundle.interactions[i];
        if (is_test[i]) {
            ++bundle.summary.test_events;
            test_set.insert({ev.user, ev.concept_id});
        } else {
            ++bundle.summary.train_events;
            bundle.train.add(ev.user, ev.concept_id, static_cast<double>(ev.count));
            bundle.hin.add_edge(click_rel, EntityRef{EntityType::User, ev.user},
                                EntityRef{EntityType::Concept, ev.concept_id}, ev.count);
        }
    }
    if (bundle.summary.train_events == 0) throw std::runtime_error("no training positives");

    std::set<int> cold_users;
    for (const auto& [u, k] : test_set) {
        if (bundle.train.by_user()[static_cast<std::size_t>(u)].empty()) {
            cold_users.insert(u);
            continue;
        }
        if (!bundle.train.observed(u, k)) bundle.test_pairs.emplace_back(u, k);
    }
    bundle.summary.dropped_cold_start_users = static_cast<int>(cold_users.size());
    if (bundle.test_pairs.empty())
        bundle.summary.warnings.push_back("empty test split (no usable test positives)");

    for (int t = 0; t < kEntityTypeCount; ++t)
        bundle.summary.entity_counts[static_cast<std::size_t>(t)] =
            bundle.hin.count(static_cast<EntityType>(t));
    for (std::size_t r = 0; r < bundle.hin.schema().relation_types.size(); ++r)
        bundle.summary.relation_counts.emplace_back(bundle.hin.schema().relation_types[r].name,
                                                    bundle.hin.edge_count(static_cast<int>(r)));

    ValidationReport report = validate_schema(bundle.hin);
    if (!report.ok()) throw std::runtime_error("schema validation failed:\n" + report.to_string());
    return bundle;
}

void export_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir) {
    const Hin& hin = bundle.hin;

    std::string manifest = join_tsv({"external_id", "entity_type", "display_name"}) + "\n";
    for (int t = 0; t < kEntityTypeCount; ++t) {
        EntityType type = static_cast<EntityType>(t);
        for (int i = 0; i < hin.count(type); ++i) {
            const std::string& id = hin.external_id(type, i);
            manifest += join_tsv({id, to_string(type), id}) + "\n";
        }
    }
    atomic_write(dir / "manifest.tsv", manifest);

    std::string relations =
        join_tsv({"relation_name", "src_external_id", "dst_external_id", "count", "timestamp"}) +
        "\n";
    for (std::size_t r = 0; r < hin.schema().relation_types.size(); ++r) {
        const RelationType& rel = hin.schema().relation_types[r];
        if (rel.name == kRelUserClickConcept) continue;
        for (const HinEdge& e : hin.edges(static_cast<int>(r)))
            relations += join_tsv({rel.name, hin.external_id(e.src.type, e.src.index),
                                   hin.external_id(e.dst.type, e.dst.index),
                                   std::to_string(e.weight), ""}) +
                         "\n";
    }
    atomic_write(dir / "relations.tsv", relations);

    std::string interactions =
        join_tsv({"relation_name", "src_external_id", "dst_external_id", "count", "timestamp"}) +
        "\n";
    for (const Interaction& ev : bundle.interactions)
        interactions += join_tsv({kRelUserClickConcept,
                                  hin.external_id(EntityType::User, ev.user),
                                  hin.external_id(EntityType::Concept, ev.concept_id),
                                  std::to_string(ev.count), std::to_string(ev.timestamp)}) +
                        "\n";
    atomic_write(dir / "interactions.tsv", interactions);
}

}  // namespace kcrec
