#pragma once

// `--data` specifications shared by the CLI and the test harness:
//   synthetic:SEED  train = 2000 generated samples from SEED,
//                   test  = 200 samples from SEED + 1000003
//   drive:PATH      PATH/training and PATH/test in the DRIVE layout, cut
//                   into 64x64 patches

#include <cstdint>
#include <string>

#include "semiscale/trainer.hpp"

namespace semiscale {

struct DataSource {
    enum class Kind { Synthetic, Drive } kind = Kind::Synthetic;
    std::uint64_t seed = 0;
    std::string path;

    static DataSource parse(const std::string& text);
};

inline constexpr int kSyntheticTrainCount = 2000;
inline constexpr int kSyntheticTestCount = 200;
inline constexpr std::uint64_t kSyntheticTestSeedOffset = 1000003;

enum class Split { Train, Test };

Dataset load_split(const DataSource& source, Split split);

}  // namespace semiscale
