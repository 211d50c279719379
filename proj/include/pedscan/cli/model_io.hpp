#pragma once

#include "pedscan/classify.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace pedscan::cli {

inline constexpr int kModelFormatVersion = 1;

struct TrainingMeta {
    std::uint64_t seed = 0;
    std::string manifest_digest;

    friend bool operator==(const TrainingMeta&, const TrainingMeta&) = default;
};

struct ModelFile {
    int format_version = kModelFormatVersion;
    DetectorModel model;
    TrainingMeta meta;

    friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

/// Versioned JSON text. Reals are written in shortest round-trip form, so
/// load(save(m)) == m and save(load(text)) == text.
std::string save_model(const ModelFile& file);

/// Throws ModelVersionError for another format version and FormatError for anything malformed.
ModelFile load_model(std::string_view text);

ModelFile read_model_file(const std::filesystem::path& path);
void write_model_file(const std::filesystem::path& path, const ModelFile& file);

/// 64-bit FNV-1a, lowercase hex.
std::string digest_hex(std::string_view bytes);

}  // namespace pedscan::cli
