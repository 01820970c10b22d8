#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "kcrec/hin.hpp"

namespace kcrec::test {

// Fresh directory under the system temp root, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("kcrec_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path file(const std::string& name) const { return path / name; }
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Two users sharing a concept, a course with a teacher and a video; enough
// structure to give every relation at least one edge.
inline Hin tiny_hin() {
    Hin hin(NetworkSchema::mooc());
    hin.add_entity(EntityType::User, "u0");
    hin.add_entity(EntityType::User, "u1");
    hin.add_entity(EntityType::Course, "c0");
    hin.add_entity(EntityType::Video, "v0");
    hin.add_entity(EntityType::Teacher, "t0");
    hin.add_entity(EntityType::Concept, "k0");
    hin.add_entity(EntityType::Concept, "k1");
    hin.add_edge(kRelUserClickConcept, "u0", "k0");
    hin.add_edge(kRelUserClickConcept, "u1", "k0");
    hin.add_edge(kRelUserClickConcept, "u1", "k1");
    hin.add_edge(kRelUserLearnCourse, "u0", "c0");
    hin.add_edge(kRelUserLearnCourse, "u1", "c0");
    hin.add_edge(kRelUserWatchVideo, "u0", "v0");
    hin.add_edge(kRelTeacherCourse, "t0", "c0");
    hin.add_edge(kRelCourseVideo, "c0", "v0");
    hin.add_edge(kRelVideoConcept, "v0", "k0");
    hin.add_edge(kRelVideoConcept, "v0", "k1");
    hin.add_edge(kRelCourseConcept, "c0", "k0");
    return hin;
}

}  // namespace kcrec::test
