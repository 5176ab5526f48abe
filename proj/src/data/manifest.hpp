#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vq/schema.hpp"

namespace abdgen::data {

enum class WorldKind { mario, shapes, attrib };

std::string to_string(WorldKind k);
WorldKind world_from_string(const std::string& s);

struct CaseEntry {
    std::string id;
    bool positive = true;
    bool train = true;
    std::vector<std::string> images;  // paths relative to the dataset root
    std::optional<vq::GroundingAssignment> labels;
};

struct DatasetManifest {
    WorldKind kind = WorldKind::mario;
    std::vector<std::size_t> image_shape;  // c, h, w
    bool binary_images = false;
    std::size_t max_case_len = 6;
    vq::SymbolSchema schema;
    std::string bk_file;
    std::string metarule_file;  // empty when the world ships no metarules
    std::vector<CaseEntry> cases;
};

void save_manifest(const std::string& dir, const DatasetManifest& m);
DatasetManifest load_manifest(const std::string& dir);

std::string manifest_json(const DatasetManifest& m);  // serialized form

}  // namespace abdgen::data
