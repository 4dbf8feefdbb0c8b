#include <doctest.h>

#include <filesystem>

#include "qorpilot/support/glob.hpp"
#include "qorpilot/support/hash.hpp"
#include "qorpilot/support/jsonio.hpp"
#include "qorpilot/support/subprocess.hpp"
#include "qorpilot/support/unidiff.hpp"

using namespace qorpilot;

TEST_CASE("md5 known answers") {
    CHECK(md5_hex("") == "d41d8cd98f00b204e9800998ecf8427e");
    CHECK(md5_hex("abc") == "900150983cd24fb0d6963f7d28e17f72");
    CHECK(md5_hex("The quick brown fox jumps over the lazy dog") ==
          "9e107d9d372bb6826bd81d3542a419d6");
}

TEST_CASE("md5 streaming equals one-shot") {
    Md5 m;
    m.update("The quick brown fox ");
    m.update("jumps over the lazy dog");
    CHECK(m.digest().to_hex() == "9e107d9d372bb6826bd81d3542a419d6");
}

TEST_CASE("hash128 hex round trip and ordering") {
    Hash128 h = md5("abc");
    auto back = Hash128::from_hex(h.to_hex());
    REQUIRE(back.has_value());
    CHECK(*back == h);
    CHECK_FALSE(Hash128::from_hex("xyz").has_value());
    CHECK(md5("a") != md5("b"));
}

TEST_CASE("glob matching") {
    CHECK(glob_match("third_party/**", "third_party/foo/bar.c"));
    CHECK(glob_match("**/test/**", "a/b/test/c.cpp"));
    CHECK_FALSE(glob_match("**/test/**", "a/b/tests/c.cpp"));
    CHECK(glob_match("*.tcl", "run.tcl"));
    CHECK_FALSE(glob_match("*.tcl", "scripts/run.tcl"));
    CHECK(glob_match("**/*.tcl", "scripts/run.tcl"));
    CHECK(glob_match("src/?pl/*.cpp", "src/dpl/opt.cpp"));
    CHECK(glob_match("[a-c]x", "bx"));
    CHECK_FALSE(glob_match("[!a-c]x", "bx"));
    CHECK(glob_match("**", "anything/at/all"));
    CHECK_THROWS_AS(validate_glob("a[bc"), InvalidGlob);
}

TEST_CASE("subprocess round trip") {
    auto r = run_subprocess("cat", "hello\n");
    CHECK(r.exit_code == 0);
    CHECK(r.out == "hello\n");
    auto r2 = run_subprocess("exit 3", "");
    CHECK(r2.exit_code == 3);
}

TEST_CASE("unified diff apply") {
    std::string original = "alpha\nbravo\ncharlie\ndelta\n";
    std::string patch =
        "--- a/f.txt\n"
        "+++ b/f.txt\n"
        "@@ -2,2 +2,2 @@\n"
        " bravo\n"
        "-charlie\n"
        "+charlie2\n";
    auto patches = parse_unified_diff(patch);
    REQUIRE(patches.size() == 1);
    CHECK(patches[0].target_path() == "f.txt");
    std::string out = apply_file_patch(patches[0], original);
    CHECK(out == "alpha\nbravo\ncharlie2\ndelta\n");
}

TEST_CASE("unified diff fuzzy offset") {
    std::string original = "x\ny\nalpha\nbravo\ncharlie\n";
    std::string patch =
        "--- a/f\n"
        "+++ b/f\n"
        "@@ -1,2 +1,2 @@\n"
        " alpha\n"
        "-bravo\n"
        "+bravo!\n";
    auto patches = parse_unified_diff(patch);
    std::string out = apply_file_patch(patches[0], original);
    CHECK(out == "x\ny\nalpha\nbravo!\ncharlie\n");
}

TEST_CASE("unified diff missing context throws") {
    std::string patch =
        "--- a/f\n+++ b/f\n@@ -1,1 +1,1 @@\n-nothere\n+x\n";
    auto patches = parse_unified_diff(patch);
    CHECK_THROWS_AS(apply_file_patch(patches[0], "completely\ndifferent\n"),
                    HunkApplyFailed);
}

TEST_CASE("empty patch set") {
    CHECK(parse_unified_diff("").empty());
}

TEST_CASE("canonical json stays ordered") {
    Json j;
    j["zeta"] = 1;
    j["alpha"] = 2;
    CHECK(canonical_dump(j) == "{\n  \"zeta\": 1,\n  \"alpha\": 2\n}\n");
}
