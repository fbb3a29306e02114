#include "tomo/stack.hpp"

#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace tomo {

namespace {

void write_plane(const fs::path& path, const std::vector<cplx>& data, bool real_part) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    std::vector<float> buf(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        buf[i] = static_cast<float>(real_part ? data[i].real() : data[i].imag());
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

std::vector<float> read_plane(const fs::path& path, std::size_t count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::vector<float> buf(count);
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != count * sizeof(float))
        throw std::runtime_error("truncated plane file " + path.string());
    return buf;
}

}  // namespace

void save_stack(const InterferometricStack& stack, const std::string& dir) {
    stack.validate();
    fs::create_directories(dir);
    json meta;
    meta["width"] = stack.width;
    meta["height"] = stack.height;
    meta["n_acquisitions"] = stack.n_acquisitions();
    meta["az_spacing_m"] = stack.az_spacing_m;
    meta["rg_spacing_m"] = stack.rg_spacing_m;
    std::ofstream(fs::path(dir) / "meta.json") << meta.dump(2) << "\n";
    for (std::size_t n = 0; n < stack.n_acquisitions(); ++n) {
        const auto& a = stack.acquisitions[n];
        auto name = [&](const char* tag) {
            return fs::path(dir) / (std::string(tag) + "_" + std::to_string(n) + ".bin");
        };
        write_plane(name("g1_re"), a.master, true);
        write_plane(name("g1_im"), a.master, false);
        write_plane(name("g2_re"), a.slave, true);
        write_plane(name("g2_im"), a.slave, false);
    }
}

InterferometricStack load_stack(const std::string& dir) {
    std::ifstream meta_in(fs::path(dir) / "meta.json");
    if (!meta_in) throw std::runtime_error("missing meta.json in " + dir);
    json meta = json::parse(meta_in);

    InterferometricStack stack;
    stack.width = meta.at("width").get<std::size_t>();
    stack.height = meta.at("height").get<std::size_t>();
    stack.az_spacing_m = meta.value("az_spacing_m", 2.17);
    stack.rg_spacing_m = meta.value("rg_spacing_m", 1.36);
    auto n_acq = meta.at("n_acquisitions").get<std::size_t>();
    auto count = stack.n_pixels();

    for (std::size_t n = 0; n < n_acq; ++n) {
        auto name = [&](const char* tag) {
            return fs::path(dir) / (std::string(tag) + "_" + std::to_string(n) + ".bin");
        };
        auto g1r = read_plane(name("g1_re"), count);
        auto g1i = read_plane(name("g1_im"), count);
        auto g2r = read_plane(name("g2_re"), count);
        auto g2i = read_plane(name("g2_im"), count);
        InterferogramPair pair;
        pair.master.resize(count);
        pair.slave.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            pair.master[i] = cplx(g1r[i], g1i[i]);
            pair.slave[i] = cplx(g2r[i], g2i[i]);
        }
        stack.acquisitions.push_back(std::move(pair));
    }
    stack.validate();
    return stack;
}

namespace {

void write_scalar_plane(const fs::path& path, const std::vector<double>& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    std::vector<float> buf(data.begin(), data.end());
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

std::vector<double> read_scalar_plane(const fs::path& path, std::size_t count) {
    auto buf = read_plane(path, count);
    return {buf.begin(), buf.end()};
}

}  // namespace

void save_filtered(const std::vector<FilteredInterferogram>& filtered, const std::string& dir) {
    if (filtered.empty()) throw std::invalid_argument("save_filtered: nothing to save");
    fs::create_directories(dir);
    json meta;
    meta["width"] = filtered.front().width;
    meta["height"] = filtered.front().height;
    meta["n_acquisitions"] = filtered.size();
    std::ofstream(fs::path(dir) / "meta.json") << meta.dump(2) << "\n";
    for (std::size_t n = 0; n < filtered.size(); ++n) {
        const auto& f = filtered[n];
        auto name = [&](const char* tag) {
            return fs::path(dir) / (std::string(tag) + "_" + std::to_string(n) + ".bin");
        };
        write_scalar_plane(name("psi"), f.psi);
        write_scalar_plane(name("mu"), f.mu);
        write_scalar_plane(name("sigma2"), f.sigma2);
        write_scalar_plane(name("looks"), f.effective_looks);
        write_scalar_plane(name("pcoh"), f.phase_coherence.empty()
                                             ? std::vector<double>(f.psi.size(), 1.0)
                                             : f.phase_coherence);
    }
}

std::vector<FilteredInterferogram> load_filtered(const std::string& dir) {
    std::ifstream meta_in(fs::path(dir) / "meta.json");
    if (!meta_in) throw std::runtime_error("missing meta.json in " + dir);
    json meta = json::parse(meta_in);
    auto width = meta.at("width").get<std::size_t>();
    auto height = meta.at("height").get<std::size_t>();
    auto n_acq = meta.at("n_acquisitions").get<std::size_t>();
    auto count = width * height;

    std::vector<FilteredInterferogram> out;
    for (std::size_t n = 0; n < n_acq; ++n) {
        auto name = [&](const char* tag) {
            return fs::path(dir) / (std::string(tag) + "_" + std::to_string(n) + ".bin");
        };
        FilteredInterferogram f;
        f.width = width;
        f.height = height;
        f.psi = read_scalar_plane(name("psi"), count);
        f.mu = read_scalar_plane(name("mu"), count);
        f.sigma2 = read_scalar_plane(name("sigma2"), count);
        f.effective_looks = read_scalar_plane(name("looks"), count);
        f.phase_coherence = fs::exists(name("pcoh")) ? read_scalar_plane(name("pcoh"), count)
                                                     : std::vector<double>(count, 1.0);
        f.quality.assign(count, 1);
        out.push_back(std::move(f));
    }
    return out;
}

AcquisitionGeometry load_geometry_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open geometry file " + path);
    json j = json::parse(in);
    AcquisitionGeometry geom;
    geom.wavelength_m = j.at("wavelength_m").get<double>();
    geom.range_m = j.at("range_m").get<double>();
    geom.incidence_rad = j.at("incidence_deg").get<double>() * M_PI / 180.0;
    geom.baselines_m = j.at("baselines_m").get<std::vector<double>>();
    if (j.contains("dates"))
        geom.dates = j["dates"].get<std::vector<std::string>>();
    geom.validate();
    return geom;
}

void save_geometry_json(const AcquisitionGeometry& geom, const std::string& path) {
    json j;
    j["wavelength_m"] = geom.wavelength_m;
    j["range_m"] = geom.range_m;
    j["incidence_deg"] = geom.incidence_rad * 180.0 / M_PI;
    j["baselines_m"] = geom.baselines_m;
    if (!geom.dates.empty()) j["dates"] = geom.dates;
    std::ofstream(path) << j.dump(2) << "\n";
}

}  // namespace tomo
