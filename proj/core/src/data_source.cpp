#include "semiscale/data_source.hpp"

#include <filesystem>
#include <stdexcept>

#include "semiscale/patches.hpp"
#include "semiscale/synthetic.hpp"

namespace semiscale {

DataSource DataSource::parse(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw std::invalid_argument("data source '" + text + "' must be synthetic:SEED or drive:PATH");
    }
    std::string scheme = text.substr(0, colon);
    std::string rest = text.substr(colon + 1);
    DataSource out;
    if (scheme == "synthetic") {
        std::size_t used = 0;
        try {
            out.seed = std::stoull(rest, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (rest.empty() || used != rest.size()) throw std::invalid_argument("bad synthetic seed '" + rest + "'");
        out.kind = Kind::Synthetic;
    } else if (scheme == "drive") {
        if (rest.empty()) throw std::invalid_argument("drive: needs a directory");
        out.kind = Kind::Drive;
        out.path = rest;
    } else {
        throw std::invalid_argument("unknown data scheme '" + scheme + "'");
    }
    return out;
}

Dataset load_split(const DataSource& source, Split split) {
    if (source.kind == DataSource::Kind::Synthetic) {
        return split == Split::Train
                   ? generate_synthetic_vessels(source.seed, kSyntheticTrainCount)
                   : generate_synthetic_vessels(source.seed + kSyntheticTestSeedOffset, kSyntheticTestCount);
    }
    auto dir = std::filesystem::path(source.path) / (split == Split::Train ? "training" : "test");
    DriveSet drive = load_drive(dir.string());
    return extract_patches(drive.images, drive.fov_masks, drive.annotations).data;
}

}  // namespace semiscale
