#include "riskmin/cache.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

namespace riskmin {

namespace {

constexpr char kMagic[8] = {'R', 'M', 'C', 'O', 'L', '1', '\0', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::ifstream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return in.good();
}

}  // namespace

bool write_columns(const std::string& path, std::uint64_t config_hash, const ColumnMap& columns) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) return false;
        out.write(kMagic, sizeof(kMagic));
        put(out, kFormatVersion);
        put(out, config_hash);
        put(out, static_cast<std::uint32_t>(columns.size()));
        for (const auto& [name, values] : columns) {
            put(out, static_cast<std::uint32_t>(name.size()));
            out.write(name.data(), static_cast<std::streamsize>(name.size()));
            put(out, static_cast<std::uint64_t>(values.size()));
            out.write(reinterpret_cast<const char*>(values.data()),
                      static_cast<std::streamsize>(values.size() * sizeof(double)));
        }
        if (!out.good()) return false;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        return false;
    }
    return true;
}

bool read_columns(const std::string& path, std::uint64_t config_hash, ColumnMap& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in.good() || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) return false;
    std::uint32_t version = 0;
    std::uint64_t hash = 0;
    std::uint32_t n_columns = 0;
    if (!get(in, version) || version != kFormatVersion) return false;
    if (!get(in, hash) || hash != config_hash) return false;
    if (!get(in, n_columns)) return false;
    ColumnMap cols;
    for (std::uint32_t c = 0; c < n_columns; ++c) {
        std::uint32_t name_len = 0;
        if (!get(in, name_len) || name_len > 4096) return false;
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (!in.good()) return false;
        std::uint64_t n_values = 0;
        if (!get(in, n_values)) return false;
        std::vector<double> values(n_values);
        in.read(reinterpret_cast<char*>(values.data()),
                static_cast<std::streamsize>(n_values * sizeof(double)));
        if (!in.good() && !(in.eof() && in.gcount() ==
                                            static_cast<std::streamsize>(n_values * sizeof(double))))
            return false;
        cols.emplace(std::move(name), std::move(values));
    }
    out = std::move(cols);
    return true;
}

}  // namespace riskmin
