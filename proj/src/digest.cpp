#include "commgraph/digest.hpp"

#include "commgraph/common.hpp"

#include <openssl/evp.h>

#include <array>

namespace commgraph {

namespace {

EVP_MD_CTX* ctxOf(void* p) { return static_cast<EVP_MD_CTX*>(p); }

} // namespace

Sha256::Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(ctxOf(ctx_), EVP_sha256(), nullptr) != 1) {
        throw Error("sha256: cannot initialize digest context");
    }
}

Sha256::~Sha256() { EVP_MD_CTX_free(ctxOf(ctx_)); }

void Sha256::update(std::string_view bytes) {
    EVP_DigestUpdate(ctxOf(ctx_), bytes.data(), bytes.size());
}

std::string Sha256::hexDigest() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> out{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctxOf(ctx_), out.data(), &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        hex.push_back(kHex[out[i] >> 4]);
        hex.push_back(kHex[out[i] & 0xf]);
    }
    return hex;
}

std::string sha256Hex(std::string_view bytes) {
    Sha256 h;
    h.update(bytes);
    return h.hexDigest();
}

} // namespace commgraph
