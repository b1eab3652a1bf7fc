#include "support.hpp"

#include "personagraph/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <random>
#include <set>

using namespace pgtest;

namespace {

CommitRecord record(int i, std::vector<std::string> parents = {}) {
    return {fake_sha("stream", i), "Author " + std::to_string(i), "a" + std::to_string(i) + "@example.org",
            ts("2020-01-01T00:00:00Z") + std::chrono::hours(i), "Committer", "c@example.org",
            ts("2020-01-01T00:00:00Z") + std::chrono::hours(i + 1), std::move(parents)};
}

std::vector<CommitRecord> sample_records(int n) {
    std::vector<CommitRecord> out;
    for (int i = 0; i < n; ++i) {
        std::vector<std::string> parents;
        if (i > 0) parents.push_back(fake_sha("stream", i - 1));
        if (i > 2 && i % 3 == 0) parents.push_back(fake_sha("stream", i - 3));
        out.push_back(record(i, parents));
    }
    out.front().author_name = "Jörg Ünïcödé";
    out.back().author_email = "";
    return out;
}

std::vector<GitCommitSpec> history(int n) {
    // main line with a side branch merged back every 10 commits
    std::vector<GitCommitSpec> specs;
    for (int i = 0; i < n; ++i) {
        GitCommitSpec s;
        s.author_name = "Dev " + std::to_string(i % 4);
        s.author_email = "dev" + std::to_string(i % 4) + "@example.org";
        s.authored_at = ts("2021-06-01T00:00:00Z") + std::chrono::hours(24 * i);
        s.committer_name = "Maint";
        s.committer_email = "maint@example.org";
        s.committed_at = s.authored_at + std::chrono::minutes(5);
        if (i > 0) s.parents.push_back(i - 1);
        if (i >= 10 && i % 10 == 0) s.parents.push_back(i - 7);
        specs.push_back(s);
    }
    return specs;
}

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::Config;
}

} // namespace

TEST_CASE("commit stream round-trip") {
    const auto records = sample_records(40);
    const auto bytes = serialize_commit_stream(records);
    CHECK(parse_commit_stream(bytes) == records);
    CHECK(serialize_commit_stream(parse_commit_stream(bytes)) == bytes);
    CHECK(parse_commit_stream("").empty());
    CHECK(serialize_commit_stream({}).empty());

    TempDir dir;
    write_commit_stream_file(records, dir / "c.stream");
    CHECK(read_commit_stream_file(dir / "c.stream") == records);
    CHECK(kind_of([&] { read_commit_stream_file(dir / "missing.stream"); }) == ErrorKind::Input);
}

TEST_CASE("serialization refuses separator bytes") {
    auto r = record(0);
    r.author_name = std::string("a") + kFieldSeparator;
    CHECK(kind_of([&] { serialize_commit_stream({r}); }) == ErrorKind::Validation);
    r = record(0);
    r.sha = "abc";
    CHECK(kind_of([&] { serialize_commit_stream({r}); }) == ErrorKind::Validation);
}

TEST_CASE("parse errors name the record index") {
    auto records = sample_records(5);
    auto bytes = serialize_commit_stream(records);
    // break the sha of record 3 where the record starts
    auto pos = bytes.find(std::string(1, kRecordSeparator) + records[3].sha);
    REQUIRE(pos != std::string::npos);
    bytes[pos + 1] = 'g';
    try {
        parse_commit_stream(bytes);
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
        CHECK(std::string(e.what()).find("record 3") != std::string::npos);
    }
    CHECK(kind_of([] { parse_commit_stream("not a stream"); }) == ErrorKind::Parse);
    CHECK(kind_of([] { parse_commit_stream(std::string(1, kRecordSeparator)); }) == ErrorKind::Parse);
}

TEST_CASE("byte mutations either parse to something else or fail to parse") {
    const auto records = sample_records(12);
    const auto bytes = serialize_commit_stream(records);
    std::mt19937 rng(5);
    const char alphabet[] = {'0', 'a', 'g', 'Z', ' ', ':', '-', kFieldSeparator, kRecordSeparator, '\xff'};
    int parsed = 0, rejected = 0;
    for (int i = 0; i < 2000; ++i) {
        auto m = bytes;
        const auto pos = rng() % m.size();
        const char c = alphabet[rng() % sizeof(alphabet)];
        if (m[pos] == c) continue;
        m[pos] = c;
        try {
            auto back = parse_commit_stream(m);
            CHECK(back != records);
            CHECK(serialize_commit_stream(back) == m);
            ++parsed;
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Parse);
            ++rejected;
        }
    }
    CHECK(parsed > 0);
    CHECK(rejected > 0);
}

TEST_CASE("extraction from a fast-import repository") {
    if (!git_available()) {
        MESSAGE("git not available");
        return;
    }
    TempDir dir;
    const auto specs = history(50);
    const auto shas = build_git_repo(dir / "repo", specs);
    const auto got = extract_commit_stream(dir / "repo");
    REQUIRE(got.size() == specs.size());

    std::map<std::string, CommitRecord> by_sha;
    for (const auto& c : got) by_sha.emplace(c.sha, c);
    CHECK(by_sha.size() == specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        REQUIRE(by_sha.count(shas[i]));
        const auto& c = by_sha.at(shas[i]);
        CHECK(c.author_name == specs[i].author_name);
        CHECK(c.author_email == specs[i].author_email);
        CHECK(c.authored_at == specs[i].authored_at);
        CHECK(c.committer_email == specs[i].committer_email);
        CHECK(c.committed_at == specs[i].committed_at);
        std::vector<std::string> parents;
        for (int p : specs[i].parents) parents.push_back(shas[p]);
        CHECK(c.parent_shas == parents);
    }
    // closed under parents
    for (const auto& c : got)
        for (const auto& p : c.parent_shas) CHECK(by_sha.count(p));
    // newest first
    CHECK(got.front().sha == shas.back());
    // deterministic and serializable
    CHECK(extract_commit_stream(dir / "repo") == got);
    CHECK(parse_commit_stream(serialize_commit_stream(got)) == got);
}

TEST_CASE("only commits reachable from the default branch") {
    if (!git_available()) return;
    TempDir dir;
    auto specs = history(6);
    auto side = specs[5];
    side.parents = {2};
    side.branch = "dev";
    side.author_email = "side@example.org";
    specs.push_back(side);
    const auto shas = build_git_repo(dir / "repo", specs, "main", true);

    const auto got = extract_commit_stream(dir / "repo");
    CHECK(got.size() == 6);
    CHECK(std::none_of(got.begin(), got.end(), [&](const auto& c) { return c.sha == shas[6]; }));

    const auto branches = list_branches(dir / "repo");
    REQUIRE(branches.size() == 2);
    CHECK(std::count_if(branches.begin(), branches.end(), [](const auto& b) { return b.is_default; }) == 1);
    for (const auto& b : branches) {
        if (b.name == "main") {
            CHECK(b.is_default);
            CHECK(b.head_sha == shas[5]);
        } else {
            CHECK(b.name == "dev");
            CHECK(b.head_sha == shas[6]);
        }
    }
}

TEST_CASE("single root commit") {
    if (!git_available()) return;
    TempDir dir;
    const auto shas = build_git_repo(dir / "repo", history(1));
    const auto got = extract_commit_stream(dir / "repo");
    REQUIRE(got.size() == 1);
    CHECK(got[0].sha == shas[0]);
    CHECK(got[0].parent_shas.empty());
}

TEST_CASE("unusable locations") {
    TempDir dir;
    std::filesystem::create_directories(dir / "plain");
    CHECK(kind_of([&] { extract_commit_stream(dir / "plain"); }) == ErrorKind::Input);
    CHECK(kind_of([&] { extract_commit_stream(dir / "absent"); }) == ErrorKind::Input);
    if (!git_available()) return;

    CHECK(std::system(("git init -q " + (dir / "empty").string() + " >/dev/null 2>&1").c_str()) == 0);
    CHECK(kind_of([&] { extract_commit_stream(dir / "empty"); }) == ErrorKind::Input);
    CHECK(kind_of([&] { list_branches(dir / "empty"); }) == ErrorKind::Input);

    const auto shas = build_git_repo(dir / "detached", history(3));
    CHECK(std::system(("git -C " + (dir / "detached").string() + " checkout -q --detach " + shas[1] + " 2>/dev/null").c_str()) == 0);
    CHECK(kind_of([&] { list_branches(dir / "detached"); }) == ErrorKind::Input);
}
