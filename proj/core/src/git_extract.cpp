#include "personagraph/git_extract.hpp"

#include "personagraph/error.hpp"
#include "process.hpp"
#include "text.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_set>

namespace personagraph {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void record_error(std::size_t index, const std::string& why) {
    throw Error(ErrorKind::Parse, "commit stream record " + std::to_string(index) + ": " + why);
}

void check_field_text(std::string_view what, std::string_view value) {
    if (value.find(kRecordSeparator) != std::string_view::npos || value.find(kFieldSeparator) != std::string_view::npos)
        throw Error(ErrorKind::Validation, std::string(what) + " contains a separator byte");
}

std::string git_dir_of(const fs::path& clone_path) {
    std::error_code ec;
    if (!fs::is_directory(clone_path, ec)) throw Error(ErrorKind::Input, clone_path.string() + " is not a directory");
    auto r = detail::run_process({"git", "-C", clone_path.string(), "rev-parse", "--absolute-git-dir"});
    if (r.exit_code != 0) throw Error(ErrorKind::Input, clone_path.string() + " is not a git repository");
    std::string dir(detail::trim(r.out));
    // rev-parse walks upward; only accept the clone itself, bare or not.
    const auto self = fs::weakly_canonical(clone_path, ec);
    const auto found = fs::weakly_canonical(dir, ec);
    if (found != self && found != self / ".git")
        throw Error(ErrorKind::Input, clone_path.string() + " is not a git repository");
    return dir;
}

std::vector<std::string> git_base(const std::string& git_dir) {
    return {"git", "--git-dir=" + git_dir, "-c", "log.mailmap=false", "-c", "log.showSignature=false"};
}

std::int64_t parse_unix(std::string_view s, std::string_view sha) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw Error(ErrorKind::Extraction, "commit " + std::string(sha) + ": unreadable timestamp '" + std::string(s) + "'");
    return v;
}

} // namespace

std::string IdentityRecord::key() const {
    std::string k(detail::trim(name));
    k += " <";
    k += detail::trim(email);
    k += '>';
    return k;
}

bool is_sha(std::string_view text) noexcept {
    return text.size() == 40 &&
           std::all_of(text.begin(), text.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

std::string serialize_commit_stream(const std::vector<CommitRecord>& records) {
    std::string out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (!is_sha(r.sha)) throw Error(ErrorKind::Validation, "record " + std::to_string(i) + ": bad sha");
        for (const auto& p : r.parent_shas)
            if (!is_sha(p)) throw Error(ErrorKind::Validation, "record " + std::to_string(i) + ": bad parent sha");
        check_field_text("author name", r.author_name);
        check_field_text("author email", r.author_email);
        check_field_text("committer name", r.committer_name);
        check_field_text("committer email", r.committer_email);
        if (i > 0) out += kRecordSeparator;
        out += r.sha;
        out += kFieldSeparator;
        out += r.author_name;
        out += kFieldSeparator;
        out += r.author_email;
        out += kFieldSeparator;
        out += format_timestamp(r.authored_at);
        out += kFieldSeparator;
        out += r.committer_name;
        out += kFieldSeparator;
        out += r.committer_email;
        out += kFieldSeparator;
        out += format_timestamp(r.committed_at);
        out += kFieldSeparator;
        for (std::size_t p = 0; p < r.parent_shas.size(); ++p) {
            if (p > 0) out += ' ';
            out += r.parent_shas[p];
        }
    }
    return out;
}

std::vector<CommitRecord> parse_commit_stream(std::string_view stream) {
    std::vector<CommitRecord> records;
    if (stream.empty()) return records;
    const auto chunks = detail::split(stream, kRecordSeparator);
    records.reserve(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        const auto f = detail::split(chunks[i], kFieldSeparator);
        if (f.size() != 8) record_error(i, "expected 8 fields, got " + std::to_string(f.size()));
        CommitRecord r;
        if (!is_sha(f[0])) record_error(i, "sha is not 40 lowercase hex digits");
        r.sha = f[0];
        for (std::size_t k : {1u, 2u, 4u, 5u})
            if (!detail::is_valid_utf8(f[k])) record_error(i, "field " + std::to_string(k) + " is not valid UTF-8");
        r.author_name = f[1];
        r.author_email = f[2];
        auto authored = parse_timestamp_strict(f[3]);
        if (!authored) record_error(i, "bad authored timestamp '" + std::string(f[3]) + "'");
        r.authored_at = *authored;
        r.committer_name = f[4];
        r.committer_email = f[5];
        auto committed = parse_timestamp_strict(f[6]);
        if (!committed) record_error(i, "bad committed timestamp '" + std::string(f[6]) + "'");
        r.committed_at = *committed;
        if (!f[7].empty()) {
            for (auto p : detail::split(f[7], ' ')) {
                if (!is_sha(p)) record_error(i, "parent '" + std::string(p) + "' is not a sha");
                r.parent_shas.emplace_back(p);
            }
        }
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<CommitRecord> read_commit_stream_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Input, "cannot read commit stream " + path.string());
    std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return parse_commit_stream(bytes);
}

void write_commit_stream_file(const std::vector<CommitRecord>& records, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Input, "cannot write commit stream " + path.string());
    out << serialize_commit_stream(records);
    if (!out.flush()) throw Error(ErrorKind::Input, "failed writing commit stream " + path.string());
}

std::vector<CommitRecord> extract_commit_stream(const fs::path& clone_path) {
    const auto git_dir = git_dir_of(clone_path);
    auto head = git_base(git_dir);
    head.insert(head.end(), {"rev-parse", "--verify", "--quiet", "HEAD^{commit}"});
    if (detail::run_process(head).exit_code != 0)
        throw Error(ErrorKind::Input, clone_path.string() + ": HEAD does not name a commit (empty repository?)");

    auto cmd = git_base(git_dir);
    cmd.insert(cmd.end(), {"log", "-z", "--date-order", "--no-color", "--no-abbrev",
                           "--format=format:%H%x1f%an%x1f%ae%x1f%at%x1f%cn%x1f%ce%x1f%ct%x1f%P", "HEAD", "--"});
    auto r = detail::run_process(cmd);
    if (r.exit_code != 0)
        throw Error(ErrorKind::Extraction, clone_path.string() + ": git log failed: " + std::string(detail::trim(r.err)));

    std::vector<CommitRecord> records;
    std::unordered_set<std::string> seen;
    for (auto chunk : detail::split(r.out, '\0')) {
        if (chunk.empty()) continue;
        const auto f = detail::split(chunk, kFieldSeparator);
        const std::string sha = f.empty() ? std::string() : std::string(f[0]);
        if (f.size() != 8 || !is_sha(sha))
            throw Error(ErrorKind::Extraction, "unreadable commit record '" + sha + "' in " + clone_path.string());
        CommitRecord c;
        c.sha = sha;
        c.author_name = f[1];
        c.author_email = f[2];
        c.authored_at = from_unix_seconds(parse_unix(f[3], sha));
        c.committer_name = f[4];
        c.committer_email = f[5];
        c.committed_at = from_unix_seconds(parse_unix(f[6], sha));
        if (!f[7].empty())
            for (auto p : detail::split(f[7], ' ')) c.parent_shas.emplace_back(p);
        if (!seen.insert(c.sha).second)
            throw Error(ErrorKind::Extraction, "commit " + c.sha + " enumerated twice");
        records.push_back(std::move(c));
    }
    return records;
}

std::vector<BranchRecord> list_branches(const fs::path& clone_path) {
    const auto git_dir = git_dir_of(clone_path);
    auto sym = git_base(git_dir);
    sym.insert(sym.end(), {"symbolic-ref", "-q", "HEAD"});
    auto head = detail::run_process(sym);
    if (head.exit_code != 0) throw Error(ErrorKind::Input, clone_path.string() + ": HEAD is detached");
    const std::string head_ref(detail::trim(head.out));

    auto cmd = git_base(git_dir);
    cmd.insert(cmd.end(), {"for-each-ref", "--format=%(refname)%1f%(objectname)", "refs/heads"});
    auto r = detail::run_process(cmd);
    if (r.exit_code != 0)
        throw Error(ErrorKind::Extraction, clone_path.string() + ": git for-each-ref failed: " + std::string(detail::trim(r.err)));

    std::vector<BranchRecord> branches;
    std::istringstream lines(r.out);
    std::string line;
    constexpr std::string_view prefix = "refs/heads/";
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        const auto f = detail::split(line, kFieldSeparator);
        if (f.size() != 2 || !is_sha(f[1]) || f[0].substr(0, prefix.size()) != prefix)
            throw Error(ErrorKind::Extraction, "unreadable branch record '" + line + "'");
        branches.push_back({std::string(f[0].substr(prefix.size())), std::string(f[1]), f[0] == head_ref});
    }
    const auto defaults = std::count_if(branches.begin(), branches.end(), [](const auto& b) { return b.is_default; });
    if (defaults != 1)
        throw Error(ErrorKind::Input, clone_path.string() + ": default branch " + head_ref + " has no commits (empty repository?)");
    return branches;
}

} // namespace personagraph
