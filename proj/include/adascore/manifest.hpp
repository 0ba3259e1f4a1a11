#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace adascore {

/// FNV-1a over a byte stream; enough to notice input or config drift.
inline uint64_t fnv1a(const std::string& bytes) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string checksum_hex(const std::string& bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
    return buf;
}

inline std::string checksum_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return checksum_hex(bytes);
}

inline std::string iso_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

/// Written next to every output; re-running the recorded command on the
/// recorded input reproduces the artifacts byte for byte.
struct RunManifest {
    std::string command;
    nlohmann::json config;
    uint64_t seed = 0;
    std::string input_path;
    std::string input_checksum;
    std::string started_at;
    std::string finished_at;
    std::vector<std::string> output_paths;

    nlohmann::json to_json() const {
        return {{"command", command},       {"config", config},
                {"seed", seed},             {"input_path", input_path},
                {"input_checksum", input_checksum},
                {"started_at", started_at}, {"finished_at", finished_at},
                {"outputs", output_paths}};
    }

    void write(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot open for writing: " + path);
        os << to_json().dump(2) << '\n';
    }
};

}  // namespace adascore
