#include <doctest.h>

#include "helpers.hpp"
#include "kcrec/tsv.hpp"

using namespace kcrec;

TEST_CASE("read_tsv parses header and rows with line numbers") {
    test::TempDir dir("tsv");
    test::write_file(dir.file("t.tsv"), "a\tb\n1\tx\n\n2\ty\n");
    TsvFile f = read_tsv(dir.file("t.tsv").string(), true);
    REQUIRE(f.header == std::vector<std::string>{"a", "b"});
    REQUIRE(f.rows.size() == 2);
    CHECK(f.rows[0].fields == std::vector<std::string>{"1", "x"});
    CHECK(f.rows[0].line == 2);
    CHECK(f.rows[1].line == 4);
}

TEST_CASE("read_tsv errors") {
    test::TempDir dir("tsv_err");
    CHECK_THROWS_WITH_AS(read_tsv(dir.file("nope.tsv").string(), true),
                         doctest::Contains("cannot open file"), std::runtime_error);
    test::write_file(dir.file("empty.tsv"), "");
    CHECK_THROWS_WITH_AS(read_tsv(dir.file("empty.tsv").string(), true),
                         doctest::Contains("missing header row"), std::runtime_error);
}

TEST_CASE("atomic_write creates parents and replaces content whole") {
    test::TempDir dir("atomic");
    auto target = dir.path / "nested" / "deep" / "out.txt";
    atomic_write(target, "first\n");
    CHECK(test::read_file(target) == "first\n");
    atomic_write(target, "second\n");
    CHECK(test::read_file(target) == "second\n");
    // no temp residue next to the target
    int entries = 0;
    for ([[maybe_unused]] auto& e : std::filesystem::directory_iterator(target.parent_path()))
        ++entries;
    CHECK(entries == 1);
}

TEST_CASE("format_double is fixed precision") {
    CHECK(format_double(0.5) == "0.500000");
    CHECK(format_double(1.0 / 3.0, 3) == "0.333");
    CHECK(format_double(-2.0, 1) == "-2.0");
}

TEST_CASE("join_tsv") {
    CHECK(join_tsv({"a", "b", "c"}) == "a\tb\tc");
    CHECK(join_tsv({}) == "");
}
