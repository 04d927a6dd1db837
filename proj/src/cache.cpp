#include "k3glue/cache.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace k3glue {

namespace {

constexpr char kMagic[8] = {'K', '3', 'G', 'L', 'U', 'E', 'C', '1'};

std::uint64_t fnv1a_bytes(const void* data, std::size_t n, std::uint64_t h)
{
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace

std::uint64_t hash_doubles(const std::vector<double>& values, std::uint64_t seed)
{
    return fnv1a_bytes(values.data(), values.size() * sizeof(double), seed);
}

std::uint64_t config_content_hash(const ChargeConfig& config, const std::string& salt)
{
    std::vector<double> data;
    const Matrix3& b = config.torus().basis();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) data.push_back(b(i, j));
    for (int j = 0; j < 8; ++j) data.push_back(config.dihedral_weights()[j]);
    for (const auto& p : config.pairs()) {
        data.push_back(p.position[0]);
        data.push_back(p.position[1]);
        data.push_back(p.position[2]);
        data.push_back(p.weight);
    }
    std::uint64_t h = fnv1a_bytes(salt.data(), salt.size(), 1469598103934665603ull);
    return hash_doubles(data, h);
}

BlobCache::BlobCache(std::string directory) : dir_(std::move(directory))
{
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

std::string BlobCache::path_for(const std::string& kind, std::uint64_t key) const
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(key));
    return dir_ + "/" + kind + "-" + buf + ".blob";
}

bool BlobCache::load(const std::string& kind, std::uint64_t key,
                     std::vector<double>& payload, CacheStatus& status) const
{
    if (!enabled()) {
        ++status.misses;
        return false;
    }
    const std::string path = path_for(kind, key);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        ++status.misses;
        return false;
    }
    char magic[8];
    std::uint64_t stored_key = 0, count = 0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&stored_key), 8);
    in.read(reinterpret_cast<char*>(&count), 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0 || stored_key != key ||
        count > (1ull << 32)) {
        ++status.corrupt;
        ++status.misses;
        status.notes.push_back("corrupt cache entry recomputed: " + path);
        return false;
    }
    payload.resize(count);
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    std::uint64_t checksum = 0;
    in.read(reinterpret_cast<char*>(&checksum), 8);
    if (!in || checksum != hash_doubles(payload, key)) {
        ++status.corrupt;
        ++status.misses;
        status.notes.push_back("corrupt cache entry recomputed: " + path);
        payload.clear();
        return false;
    }
    ++status.hits;
    return true;
}

void BlobCache::store(const std::string& kind, std::uint64_t key,
                      const std::vector<double>& payload, CacheStatus& status) const
{
    if (!enabled()) return;
    const std::string path = path_for(kind, key);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        status.notes.push_back("cache directory not writable: " + dir_);
        return;
    }
    const std::uint64_t count = payload.size();
    const std::uint64_t checksum = hash_doubles(payload, key);
    out.write(kMagic, 8);
    out.write(reinterpret_cast<const char*>(&key), 8);
    out.write(reinterpret_cast<const char*>(&count), 8);
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(count * sizeof(double)));
    out.write(reinterpret_cast<const char*>(&checksum), 8);
}

} // namespace k3glue
