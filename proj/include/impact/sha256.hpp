#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace impact {

// Incremental SHA-256, used for artifact content digests and record-tree
// comparison. Self-contained; no external crypto dependency.
class Sha256 {
public:
    Sha256();

    void update(const void* data, size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }

    // Finalizes and returns the lowercase hex digest. The object must not be
    // updated afterwards.
    std::string hex_digest();

private:
    void process_block(const uint8_t* block);

    std::array<uint32_t, 8> state_;
    std::array<uint8_t, 64> buffer_;
    uint64_t total_len_ = 0;
    size_t buffer_len_ = 0;
    bool finalized_ = false;
};

std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::filesystem::path& path);

}  // namespace impact
