#include "data/manifest.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "errors.hpp"

namespace abdgen::data {

using nlohmann::json;

std::string to_string(WorldKind k) {
    switch (k) {
        case WorldKind::mario: return "mario";
        case WorldKind::shapes: return "shapes";
        case WorldKind::attrib: return "attrib";
    }
    return "mario";
}

WorldKind world_from_string(const std::string& s) {
    if (s == "mario") return WorldKind::mario;
    if (s == "shapes") return WorldKind::shapes;
    if (s == "attrib") return WorldKind::attrib;
    throw ConfigError("unknown world: " + s);
}

std::string manifest_json(const DatasetManifest& m) {
    json j;
    j["kind"] = to_string(m.kind);
    j["image_shape"] = m.image_shape;
    j["binary_images"] = m.binary_images;
    j["max_case_len"] = m.max_case_len;
    json schema;
    schema["embed_dim"] = m.schema.embed_dim;
    schema["symbols"] = json::array();
    for (const auto& s : m.schema.symbols)
        schema["symbols"].push_back({{"name", s.name}, {"cardinality", s.cardinality}});
    j["schema"] = schema;
    j["bk_file"] = m.bk_file;
    j["metarule_file"] = m.metarule_file;
    j["cases"] = json::array();
    for (const CaseEntry& c : m.cases) {
        json cj;
        cj["id"] = c.id;
        cj["polarity"] = c.positive ? "positive" : "negative";
        cj["split"] = c.train ? "train" : "test";
        cj["images"] = c.images;
        if (c.labels) cj["labels"] = *c.labels;
        j["cases"].push_back(cj);
    }
    return j.dump(2) + "\n";
}

void save_manifest(const std::string& dir, const DatasetManifest& m) {
    std::ofstream os(std::filesystem::path(dir) / "manifest.json");
    if (!os) throw IoError("cannot write manifest in " + dir);
    os << manifest_json(m);
}

DatasetManifest load_manifest(const std::string& dir) {
    std::ifstream is(std::filesystem::path(dir) / "manifest.json");
    if (!is) throw IoError("no manifest.json in " + dir);
    json j = json::parse(is);
    DatasetManifest m;
    m.kind = world_from_string(j.at("kind").get<std::string>());
    m.image_shape = j.at("image_shape").get<std::vector<std::size_t>>();
    m.binary_images = j.at("binary_images").get<bool>();
    m.max_case_len = j.at("max_case_len").get<std::size_t>();
    m.schema.embed_dim = j.at("schema").at("embed_dim").get<std::size_t>();
    for (const auto& s : j.at("schema").at("symbols"))
        m.schema.symbols.push_back(
            {s.at("name").get<std::string>(), s.at("cardinality").get<std::size_t>()});
    m.bk_file = j.at("bk_file").get<std::string>();
    m.metarule_file = j.at("metarule_file").get<std::string>();
    for (const auto& cj : j.at("cases")) {
        CaseEntry c;
        c.id = cj.at("id").get<std::string>();
        c.positive = cj.at("polarity").get<std::string>() == "positive";
        c.train = cj.at("split").get<std::string>() == "train";
        c.images = cj.at("images").get<std::vector<std::string>>();
        if (cj.contains("labels")) c.labels = cj.at("labels").get<vq::GroundingAssignment>();
        m.cases.push_back(std::move(c));
    }
    return m;
}

}  // namespace abdgen::data
