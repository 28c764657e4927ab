#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "riskmin/cache.hpp"

using namespace riskmin;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name)
        : path((std::filesystem::temp_directory_path() / name).string()) {
        std::remove(path.c_str());
    }
    ~TempFile() { std::remove(path.c_str()); }
};

ColumnMap sample_columns() {
    ColumnMap cols;
    cols["alpha"] = {1.0, 2.5, -3.25, 0.0};
    cols["beta"] = {};
    cols["gamma"] = std::vector<double>(1000, 0.125);
    return cols;
}

}  // namespace

TEST_CASE("columns round-trip bit-exactly") {
    TempFile f("riskmin_cache_roundtrip.rmc");
    const ColumnMap written = sample_columns();
    REQUIRE(write_columns(f.path, 0xDEADBEEFULL, written));

    ColumnMap read;
    REQUIRE(read_columns(f.path, 0xDEADBEEFULL, read));
    CHECK(read == written);
    // No stray temp file left behind.
    CHECK_FALSE(std::filesystem::exists(f.path + ".tmp"));
}

TEST_CASE("hash mismatch is a miss") {
    TempFile f("riskmin_cache_hash.rmc");
    REQUIRE(write_columns(f.path, 1u, sample_columns()));
    ColumnMap read;
    CHECK_FALSE(read_columns(f.path, 2u, read));
}

TEST_CASE("missing file is a miss") {
    ColumnMap read;
    CHECK_FALSE(read_columns("/tmp/riskmin_cache_never_written.rmc", 1u, read));
}

TEST_CASE("truncated file is a miss") {
    TempFile f("riskmin_cache_trunc.rmc");
    REQUIRE(write_columns(f.path, 1u, sample_columns()));
    const auto full = std::filesystem::file_size(f.path);
    std::filesystem::resize_file(f.path, full - 16);
    ColumnMap read;
    CHECK_FALSE(read_columns(f.path, 1u, read));
}

TEST_CASE("foreign content is a miss") {
    TempFile f("riskmin_cache_foreign.rmc");
    {
        std::ofstream out(f.path, std::ios::binary);
        out << "this is not a column file, just bytes that happen to exist";
    }
    ColumnMap read;
    CHECK_FALSE(read_columns(f.path, 1u, read));
}

TEST_CASE("unwritable location fails softly") {
    ColumnMap cols = sample_columns();
    CHECK_FALSE(write_columns("/nonexistent_dir/riskmin.rmc", 1u, cols));
}

TEST_CASE("rewrite replaces the previous content atomically") {
    TempFile f("riskmin_cache_rewrite.rmc");
    REQUIRE(write_columns(f.path, 1u, sample_columns()));
    ColumnMap second;
    second["only"] = {42.0};
    REQUIRE(write_columns(f.path, 1u, second));
    ColumnMap read;
    REQUIRE(read_columns(f.path, 1u, read));
    CHECK(read == second);
}
