#pragma once

#include <string>
#include <string_view>

namespace commgraph {

/// Incremental SHA-256, hex output.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(std::string_view bytes);
    std::string hexDigest();

private:
    void* ctx_;
};

std::string sha256Hex(std::string_view bytes);

} // namespace commgraph
