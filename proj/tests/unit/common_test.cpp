// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <atomic>

#include "support.hpp"
#include "uxsim/common/error.hpp"
#include "uxsim/common/fs.hpp"
#include "uxsim/common/hash.hpp"
#include "uxsim/common/json.hpp"
#include "uxsim/common/parallel.hpp"
#include "uxsim/common/text.hpp"

using namespace uxsim;

TEST(Text, TrimAndCollapse) {
    EXPECT_EQ(text::trim("  a b \n"), "a b");
    EXPECT_EQ(text::collapse_whitespace(" a \t\n b  c "), "a b c");
    EXPECT_EQ(text::to_lower("AbC"), "abc");
}

TEST(Text, SlugifyDropsUnsafeRuns) {
    EXPECT_EQ(text::slugify("Threadline Shop!"), "threadline-shop");
    EXPECT_EQ(text::slugify("55+"), "55");
    EXPECT_EQ(text::slugify("18-34", '_'), "18_34");
    EXPECT_EQ(text::slugify("---"), "");
}

TEST(Text, SubstituteLeavesUnknownPlaceholders) {
    EXPECT_EQ(text::substitute("{a} and {b}", {{"a", "x"}}), "x and {b}");
    EXPECT_EQ(text::substitute("{a}{a}", {{"a", "y"}}), "yy");
}

TEST(Text, FencedBlocks) {
    EXPECT_EQ(text::extract_fenced_block("pre\n```json\n{\"a\":1}\n```\npost"), "{\"a\":1}\n");
    EXPECT_FALSE(text::extract_fenced_block("```json\nunclosed").has_value());
    EXPECT_EQ(text::strip_code_fence("  [1,2] "), "[1,2]");
}

TEST(Text, SplitKeepsEmptyFields) {
    EXPECT_EQ(text::split("a,,b", ','), (std::vector<std::string>{"a", "", "b"}));
}

TEST(Hash, Sha256KnownVector) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Json, ParseErrorNamesDocument) {
    try {
        parse_json("{oops", "config.json");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("config.json"), std::string::npos);
    }
}

TEST(Json, RequireFieldThrowsValidationError) {
    Json j = {{"a", 1}};
    EXPECT_THROW(require_field(j, "b", "ctx"), ValidationError);
    EXPECT_THROW(require_string(j, "a", "ctx"), ValidationError);
}

TEST(Json, DumpKeepsInsertionOrder) {
    Json j;
    j["z"] = 1;
    j["a"] = 2;
    EXPECT_EQ(dump_json(j, -1), "{\"z\":1,\"a\":2}");
}

TEST(Fs, AtomicWriteCreatesParents) {
    testkit::TempDir dir;
    auto p = dir / "x/y/z.txt";
    fs::write_file_atomic(p, "hello");
    EXPECT_EQ(fs::read_file(p), "hello");
    fs::append_file(p, " world");
    EXPECT_EQ(fs::read_file(p), "hello world");
    EXPECT_THROW(fs::read_file(dir / "missing"), Error);
}

TEST(Parallel, VisitsEveryIndexOnce) {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Parallel, RethrowsAfterAllWorkersFinish) {
    std::atomic<int> done{0};
    EXPECT_THROW(parallel_for(20, 3,
                              [&](std::size_t i) {
                                  ++done;
                                  if (i == 5) throw ValidationError("boom");
                              }),
                 ValidationError);
    EXPECT_EQ(done.load(), 20);
}
