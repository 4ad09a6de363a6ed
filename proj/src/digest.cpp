#include "tdo/digest.hpp"

#include <openssl/evp.h>

#include "tdo/errors.hpp"
#include "tdo/textcodec.hpp"

namespace tdo {

std::string Digest::hex() const {
    return hex_encode(bytes);
}

std::optional<std::size_t> digest_length(std::string_view algorithm_tag) {
    if (algorithm_tag == "sha256") {
        return 32;
    }
    return std::nullopt;
}

Digest sha256(std::span<const std::uint8_t> data) {
    std::vector<std::uint8_t> out(32);
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != 32) {
        throw CryptoError("sha256 computation failed");
    }
    return Digest{"sha256", std::move(out)};
}

Digest sha256(std::string_view data) {
    return sha256(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

} // namespace tdo
