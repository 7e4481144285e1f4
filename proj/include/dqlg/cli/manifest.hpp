#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "dqlg/errors.hpp"

namespace dqlg::cli {

inline std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
        throw IoError("SHA-256 digest failed");
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned i = 0; i < len; ++i) {
        char buf[3];
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

struct OutputEntry {
    std::string file;
    std::size_t bytes = 0;
    std::string sha256;
};

/// Error classes mapped to process exit codes.
enum class ExitCode : int { ok = 0, config = 2, domain = 3, io = 4 };

struct ErrorRecord {
    ExitCode code = ExitCode::ok;
    std::string kind;
    std::string message;

    /// Single-line JSON record for stderr.
    std::string line() const {
        nlohmann::json j;
        j["error"] = {{"code", static_cast<int>(code)}, {"kind", kind}, {"message", message}};
        return j.dump();
    }
};

/// Outputs staged in memory and written together with their manifest.
class OutputSet {
public:
    void add(std::string name, std::string content) { staged_.push_back({std::move(name), std::move(content)}); }

    /// Writes every staged file, then manifest.json with status "ok".
    std::vector<OutputEntry> commit(const std::filesystem::path& dir, std::string_view command) const {
        ensure_dir(dir);
        std::vector<OutputEntry> entries;
        for (const auto& [name, content] : staged_) {
            write_file(dir / name, content);
            entries.push_back({name, content.size(), sha256_hex(content)});
        }
        write_file(dir / "manifest.json", manifest_text(command, "ok", entries, nullptr));
        return entries;
    }

    /// Manifest marking a failed run; no other outputs are written.
    static void commit_failure(const std::filesystem::path& dir, std::string_view command, const ErrorRecord& error) {
        ensure_dir(dir);
        write_file(dir / "manifest.json", manifest_text(command, "failed", {}, &error));
    }

    static std::string manifest_text(std::string_view command, std::string_view status,
                                     const std::vector<OutputEntry>& entries, const ErrorRecord* error) {
        nlohmann::json j;
        j["command"] = std::string(command);
        j["status"] = std::string(status);
        j["outputs"] = nlohmann::json::array();
        for (const auto& e : entries) j["outputs"].push_back({{"file", e.file}, {"bytes", e.bytes}, {"sha256", e.sha256}});
        if (error) j["error"] = {{"code", static_cast<int>(error->code)}, {"kind", error->kind}, {"message", error->message}};
        return j.dump(2) + "\n";
    }

private:
    static void ensure_dir(const std::filesystem::path& dir) {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    }

    static void write_file(const std::filesystem::path& path, std::string_view content) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + path.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("failed writing " + path.string());
    }

    struct Staged {
        std::string name;
        std::string content;
    };
    std::vector<Staged> staged_;
};

} // namespace dqlg::cli
