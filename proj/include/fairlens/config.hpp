#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "fairlens/agnostic.hpp"
#include "fairlens/datagen.hpp"
#include "fairlens/model.hpp"
#include "fairlens/scoring.hpp"

namespace fairlens::config {

// One flat configuration for the whole pipeline. Defaults follow the
// published recipe where one exists (16 epochs, batch 128, the Adam triple,
// top-1000, 24000 profiles, 80/20 split) and documented implementation
// defaults otherwise.
struct RunConfig {
    std::uint64_t seed = 42;
    data::GenConfig gen;
    scoring::ScoreWeights weights;
    scoring::BiasSpec gender_bias = scoring::BiasSpec::gender_default();
    scoring::BiasSpec ethnicity_bias = scoring::BiasSpec::ethnicity_default();
    model::TrainConfig train;
    agnostic::RemovalConfig removal;
    int top_k = 1000;

    // Applies one `key = value` assignment; unknown keys raise ConfigError
    // naming the key.
    void set(const std::string& key, const std::string& value);
    void validate() const;

    // Fully-resolved key -> value map, echoed into every output artifact.
    std::map<std::string, std::string> echo() const;
};

// Flat `key = value` text format; '#' starts a comment.
RunConfig load_config_file(const std::string& path);
RunConfig parse_config_text(const std::string& text);

}  // namespace fairlens::config
