#include "personagraph/collector.hpp"

#include "personagraph/error.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace personagraph {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fnv1a_hex(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace

ReplayTransport::ReplayTransport(const fs::path& directory) {
    std::error_code ec;
    if (!fs::is_directory(directory, ec)) throw Error(ErrorKind::Input, "replay directory " + directory.string() + " not found");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(directory))
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        std::ifstream in(file, std::ios::binary);
        try {
            const auto j = json::parse(in);
            GraphQLRequest req{j.at("request").at("operation").get<std::string>(), "", j.at("request").at("variables")};
            TransportResponse resp{j.at("response").value("status", 200), j.at("response").at("body")};
            exchanges_.insert_or_assign(req.key(), std::move(resp));
        } catch (const json::exception& e) {
            throw Error(ErrorKind::Parse, "replay exchange " + file.string() + ": " + e.what());
        }
    }
}

TransportResponse ReplayTransport::execute(const GraphQLRequest& request) {
    const auto key = request.key();
    issued_.push_back(key);
    auto it = exchanges_.find(key);
    if (it == exchanges_.end()) throw Error(ErrorKind::Transport, "no recorded exchange for " + key);
    return it->second;
}

void write_exchange(const fs::path& directory, const GraphQLRequest& request, const TransportResponse& response) {
    fs::create_directories(directory);
    const auto key = request.key();
    const auto path = directory / (request.operation + "-" + fnv1a_hex(key) + ".json");
    const json j = {{"request", {{"operation", request.operation}, {"variables", request.variables}}},
                    {"response", {{"status", response.status}, {"body", response.body}}}};
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << j.dump(1) << '\n';
    if (!out.flush()) throw Error(ErrorKind::Input, "cannot write exchange " + path.string());
}

RecordingTransport::RecordingTransport(Transport& inner, fs::path directory)
    : inner_(inner), directory_(std::move(directory)) {}

TransportResponse RecordingTransport::execute(const GraphQLRequest& request) {
    auto response = inner_.execute(request);
    write_exchange(directory_, request, response);
    return response;
}

HttpTransport::HttpTransport(std::string token, std::string host, std::string path)
    : token_(std::move(token)), host_(std::move(host)), path_(std::move(path)) {
    if (token_.empty()) throw Error(ErrorKind::Auth, "empty API token");
}

TransportResponse HttpTransport::execute(const GraphQLRequest& request) {
    httplib::SSLClient client(host_);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    const httplib::Headers headers = {{"Authorization", "bearer " + token_}, {"User-Agent", "personagraph"}};
    const json payload = {{"query", request.query}, {"variables", request.variables}, {"operationName", request.operation}};
    auto res = client.Post(path_, headers, payload.dump(), "application/json");
    if (!res) throw Error(ErrorKind::Transport, request.operation + ": " + httplib::to_string(res.error()));
    TransportResponse out;
    out.status = res->status;
    if (res->status == 200) {
        try {
            out.body = json::parse(res->body);
        } catch (const json::parse_error& e) {
            throw Error(ErrorKind::Parse, request.operation + ": response is not JSON: " + e.what());
        }
    }
    return out;
}

} // namespace personagraph
