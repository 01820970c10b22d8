#include <doctest.h>

#include "helpers.hpp"
#include "kcrec/hin.hpp"

using namespace kcrec;

TEST_CASE("mooc schema declares 5 entity types and 7 relations") {
    NetworkSchema schema = NetworkSchema::mooc();
    CHECK(schema.entity_types.size() == 5);
    CHECK(schema.relation_types.size() == 7);
    CHECK(schema.find_relation(kRelUserClickConcept) != nullptr);
    CHECK(schema.find_relation("user-eats-course") == nullptr);
    const RelationType* tc = schema.find_relation(kRelTeacherCourse);
    REQUIRE(tc != nullptr);
    CHECK(tc->src == EntityType::Teacher);
    CHECK(tc->dst == EntityType::Course);
}

TEST_CASE("entities get dense per-type indices in insertion order") {
    Hin hin(NetworkSchema::mooc());
    CHECK(hin.add_entity(EntityType::User, "u0") == 0);
    CHECK(hin.add_entity(EntityType::Concept, "k0") == 0);
    CHECK(hin.add_entity(EntityType::User, "u1") == 1);
    CHECK(hin.count(EntityType::User) == 2);
    CHECK(hin.count(EntityType::Concept) == 1);
    CHECK(hin.total_entities() == 3);
    CHECK(hin.external_id(EntityType::User, 1) == "u1");
    auto ref = hin.lookup("k0");
    REQUIRE(ref.has_value());
    CHECK(ref->type == EntityType::Concept);
    CHECK(ref->index == 0);
    CHECK(!hin.lookup("ghost").has_value());
}

TEST_CASE("duplicate external ids are rejected across types") {
    Hin hin(NetworkSchema::mooc());
    hin.add_entity(EntityType::User, "x");
    CHECK_THROWS_AS(hin.add_entity(EntityType::User, "x"), std::runtime_error);
    CHECK_THROWS_AS(hin.add_entity(EntityType::Concept, "x"), std::runtime_error);
}

TEST_CASE("repeated edges accumulate weight instead of duplicating") {
    Hin hin = test::tiny_hin();
    hin.add_edge(kRelUserClickConcept, "u0", "k0", 2);
    const auto& edges = hin.edges(kRelUserClickConcept);
    REQUIRE(edges.size() == 3);
    std::int64_t u0k0 = 0;
    for (const auto& e : edges)
        if (e.src.index == 0 && e.dst.index == 0) u0k0 = e.weight;
    CHECK(u0k0 == 3);  // 1 initial + 2 accumulated
}

TEST_CASE("add_edge rejects unknown relations and ids") {
    Hin hin = test::tiny_hin();
    CHECK_THROWS_AS(hin.add_edge("user-eats-course", "u0", "c0"), std::runtime_error);
    CHECK_THROWS_WITH_AS(hin.add_edge(kRelUserClickConcept, "ghost", "k0"),
                         doctest::Contains("ghost"), std::runtime_error);
}

TEST_CASE("incidence is the binarized relation matrix") {
    Hin hin = test::tiny_hin();
    hin.add_edge(kRelUserClickConcept, "u0", "k0", 5);  // weight bump must not change incidence
    SpMatI m = hin.incidence(kRelUserClickConcept);
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 2);
    CHECK(m.coeff(0, 0) == 1);
    CHECK(m.coeff(1, 0) == 1);
    CHECK(m.coeff(1, 1) == 1);
    CHECK(m.coeff(0, 1) == 0);
}

TEST_CASE("validate_schema passes a well-formed graph") {
    Hin hin = test::tiny_hin();
    ValidationReport report = validate_schema(hin);
    CHECK(report.ok());
}

TEST_CASE("validate_schema flags endpoint type mismatches") {
    Hin hin = test::tiny_hin();
    int rel = hin.schema().relation_index(kRelUserClickConcept);
    // concept on the user end, stored raw and left for validation
    hin.add_edge(rel, EntityRef{EntityType::Concept, 1}, EntityRef{EntityType::Concept, 0});
    ValidationReport report = validate_schema(hin);
    CHECK(!report.ok());
    CHECK(report.to_string().find(kRelUserClickConcept) != std::string::npos);
}

TEST_CASE("validate_schema flags out-of-range endpoint indices") {
    Hin hin = test::tiny_hin();
    int rel = hin.schema().relation_index(kRelCourseVideo);
    hin.add_edge(rel, EntityRef{EntityType::Course, 0}, EntityRef{EntityType::Video, 99});
    CHECK(!validate_schema(hin).ok());
}

TEST_CASE("validate_schema checks manifest count agreement") {
    Hin hin = test::tiny_hin();
    hin.set_expected_count(EntityType::User, 3);
    ValidationReport report = validate_schema(hin);
    CHECK(!report.ok());
    CHECK(report.to_string().find("does not match manifest count 3") != std::string::npos);

    hin.set_expected_count(EntityType::User, 2);
    CHECK(validate_schema(hin).ok());
}
