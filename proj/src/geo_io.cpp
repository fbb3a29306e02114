#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tomo/geo.hpp"

using json = nlohmann::json;

namespace tomo {

namespace {

const char* layer_name(LayerTag t) {
    switch (t) {
        case LayerTag::Top: return "top";
        case LayerTag::Bottom: return "bottom";
        case LayerTag::Other: return "other";
    }
    return "other";
}

LayerTag layer_from(const std::string& s) {
    if (s == "top") return LayerTag::Top;
    if (s == "bottom") return LayerTag::Bottom;
    return LayerTag::Other;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

void save_point_cloud_csv(const TomoPointCloud& cloud, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "east,north,height,amplitude,layer\n";
    for (const auto& p : cloud.points)
        out << fmt(p.east) << "," << fmt(p.north) << "," << fmt(p.height) << ","
            << fmt(p.amplitude) << "," << layer_name(p.layer) << "\n";
}

TomoPointCloud load_point_cloud_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    TomoPointCloud cloud;
    std::string line;
    if (!std::getline(in, line) || line.rfind("east,north,height", 0) != 0)
        throw std::runtime_error("bad point cloud header in " + path);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        TomoPoint p;
        std::getline(ls, field, ','); p.east = std::stod(field);
        std::getline(ls, field, ','); p.north = std::stod(field);
        std::getline(ls, field, ','); p.height = std::stod(field);
        std::getline(ls, field, ','); p.amplitude = std::stod(field);
        std::getline(ls, field, ','); p.layer = layer_from(field);
        cloud.points.push_back(p);
    }
    return cloud;
}

std::vector<Polygon> load_footprints_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    json j = json::parse(in);
    std::vector<Polygon> out;
    for (const auto& item : j) {
        Polygon p;
        p.id = item.value("id", "structure_" + std::to_string(out.size()));
        for (const auto& pt : item.at("ring"))
            p.ring.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
        if (item.contains("reference_height"))
            p.reference_height = item["reference_height"].get<double>();
        if (p.ring.size() < 3)
            throw std::runtime_error("footprint " + p.id + ": ring needs >= 3 vertices");
        out.push_back(std::move(p));
    }
    return out;
}

void save_footprints_json(const std::vector<Polygon>& footprints, const std::string& path) {
    json j = json::array();
    for (const auto& p : footprints) {
        json item;
        item["id"] = p.id;
        json ring = json::array();
        for (const auto& [e, n] : p.ring) ring.push_back({e, n});
        item["ring"] = ring;
        if (p.reference_height) item["reference_height"] = *p.reference_height;
        j.push_back(item);
    }
    std::ofstream(path) << j.dump(2) << "\n";
}

void save_structure_report_csv(const StructureReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "id,top_min,top_max,top_std,top_mean,bottom_min,bottom_max,bottom_std,"
           "bottom_mean,relative_height,reference_height,abs_height_difference\n";
    for (const auto& s : report.structures) {
        out << s.id << "," << fmt(s.top.min) << "," << fmt(s.top.max) << ","
            << fmt(s.top.std) << "," << fmt(s.top.mean) << "," << fmt(s.bottom.min) << ","
            << fmt(s.bottom.max) << "," << fmt(s.bottom.std) << "," << fmt(s.bottom.mean)
            << "," << fmt(s.relative_height) << ",";
        out << (s.reference_relative_height ? fmt(*s.reference_relative_height) : "");
        out << ",";
        out << (s.abs_height_difference ? fmt(*s.abs_height_difference) : "");
        out << "\n";
    }
}

void save_citywide_summary_json(const CitywideSummary& summary, const std::string& path) {
    json j;
    j["bin_width_m"] = summary.bin_width;
    j["truncation_m"] = summary.truncation;
    j["counts"] = summary.counts;
    j["frac_within_1m"] = summary.frac_within_1m;
    j["frac_within_2m"] = summary.frac_within_2m;
    j["frac_within_trunc"] = summary.frac_within_trunc;
    j["std_truncated_m"] = summary.std_truncated;
    j["n_retained"] = summary.n_retained;
    j["n_total"] = summary.n_total;
    std::ofstream(path) << j.dump(2) << "\n";
}

}  // namespace tomo
