#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tdo/model.hpp"
#include "tdo/provenance.hpp"
#include "tdo/trust.hpp"
#include "tdo/vm.hpp"

namespace tdo::testing {

// Deterministic source for property tests; every suite seeds its own.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }
    // Uniform value in [0, bound).
    std::uint64_t below(std::uint64_t bound) { return bound == 0 ? 0 : gen_() % bound; }
    // Uniform value in [lo, hi] inclusive.
    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }
    bool chance(double p) { return std::uniform_real_distribution<>(0, 1)(gen_) < p; }

    std::vector<std::uint8_t> bytes(std::size_t count);
    std::string ident(std::size_t max_len = 12); // [a-z0-9-], non-empty
    Date date();

private:
    std::mt19937_64 gen_;
};

// A structurally valid unsealed first-version object with randomized payload,
// metadata, links, and occasionally durably encoded content.
TrustworthyDigitalObject random_tdo(Rng& rng);

// Keys, a three-link certificate chain, and a trust store grounding it.
struct TrustWorld {
    std::string institution;
    int year;
    KeyPair root_key;
    KeyPair witness_key;
    KeyPair editor_key;
    Certificate root_cert;
    Certificate witness_cert;
    Certificate editor_cert;
    std::vector<Certificate> editor_chain_rest; // witness then root
    TrustStore trust;
    Date seal_date;
};

TrustWorld make_trust_world(int year = 2004);

// Seal with the world's editor chain and encode to canonical bytes.
std::vector<std::uint8_t> seal_bytes(const TrustworthyDigitalObject& tdo, const TrustWorld& world);

// Random event stream with nondecreasing times well away from wraparound.
std::vector<TimedEvent> random_events(Rng& rng, std::size_t max_len = 8);
std::vector<TimedEvent> shift_events(std::vector<TimedEvent> events, std::int64_t delta);

// Self-deleting temporary directory.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::string& path() const { return path_; }
    std::string file(const std::string& name) const { return path_ + "/" + name; }

private:
    std::string path_;
};

} // namespace tdo::testing
