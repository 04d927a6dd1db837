#pragma once

/// Versioned binary blob cache keyed by content hashes. Corrupt or truncated
/// entries count as misses and are recomputed, never fatal.

#include <cstdint>
#include <string>
#include <vector>

#include "k3glue/charge_config.hpp"

namespace k3glue {

struct CacheStatus {
    int hits = 0;
    int misses = 0;
    int corrupt = 0;
    std::vector<std::string> notes;
};

class BlobCache {
public:
    /// Empty directory disables the cache (every lookup is a miss).
    explicit BlobCache(std::string directory);

    bool enabled() const { return !dir_.empty(); }
    const std::string& directory() const { return dir_; }

    /// kind is a short label entering the file name; key the content hash.
    bool load(const std::string& kind, std::uint64_t key, std::vector<double>& payload,
              CacheStatus& status) const;
    void store(const std::string& kind, std::uint64_t key,
               const std::vector<double>& payload, CacheStatus& status) const;

private:
    std::string dir_;
    std::string path_for(const std::string& kind, std::uint64_t key) const;
};

std::uint64_t hash_doubles(const std::vector<double>& values, std::uint64_t seed);

/// Content hash of a puncture configuration (basis, weights, positions) plus
/// a salt naming what is derived from it.
std::uint64_t config_content_hash(const ChargeConfig& config, const std::string& salt);

} // namespace k3glue
