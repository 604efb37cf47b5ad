#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "fairlens/datagen.hpp"
#include "fairlens/numerics.hpp"
#include "fairlens/scoring.hpp"

namespace fairlens::model {

constexpr int kTextEmbedDim = 16;
constexpr int kTextOutDim = 32;
constexpr int kCompDim = 7;
constexpr int kFusionInDim = data::kFaceDim + kTextOutDim + kCompDim;  // 59
constexpr int kHidden1 = 40;
constexpr int kHidden2 = 20;

// Stream purposes 16..23 (datagen owns 1..8).
enum ModelStream : std::uint16_t {
    kStreamModelInit = 16,
    kStreamTrainShuffle = 17,
};

enum class ScenarioKind : std::uint8_t { neutral, biased, agnostic };

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::neutral;
    scoring::BiasAttribute bias_attribute = scoring::BiasAttribute::gender;  // ignored for neutral

    bool uses_agnostic_inputs() const { return kind == ScenarioKind::agnostic; }
    double target_of(const data::Profile& p) const;
    const std::vector<double>& face_of(const data::Profile& p) const;
    const std::vector<std::string>& tokens_of(const data::Profile& p) const;
    std::string label() const;  // e.g. "neutral", "biased_gender", "agnostic_ethnicity"
};

struct TextEncoderParams {
    std::vector<std::string> vocab;              // sorted; embed row = index + 1
    std::unordered_map<std::string, int> index;  // token -> embed row; row 0 = unknown
    numerics::Tensor2 embed;                     // (vocab size + 1) x 16
    numerics::DenseLayer proj;                   // 16 -> 32, tanh

    int row_of(const std::string& token) const {
        const auto it = index.find(token);
        return it == index.end() ? 0 : it->second;
    }
};

struct ModelParams {
    ScenarioSpec scenario;
    TextEncoderParams text;
    numerics::DenseLayer fusion_h1;  // 59 -> 40, relu
    numerics::DenseLayer fusion_h2;  // 40 -> 20, relu
    numerics::DenseLayer out;        // 20 -> 1, sigmoid
};

struct TrainConfig {
    int epochs = 16;
    int batch_size = 128;
    double adam_alpha = 0.001;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    std::uint64_t seed = 42;
};

ModelParams build_model(const data::Dataset& dataset, const ScenarioSpec& scenario,
                        std::uint64_t seed);

std::vector<double> encode_text(const TextEncoderParams& text,
                                const std::vector<std::string>& tokens);

double forward(const ModelParams& params, const std::vector<double>& face,
               const std::vector<std::string>& tokens, const std::array<double, 7>& competencies);

struct TrainResult {
    ModelParams params;
    std::vector<double> loss_history;  // epoch-mean training MAE
};

TrainResult train(const data::Dataset& dataset, const ScenarioSpec& scenario,
                  const TrainConfig& config);

enum class Split : std::uint8_t { train, val };

std::map<int, double> predict_split(const ModelParams& params, const data::Dataset& dataset,
                                    Split split);

// Post-activation output of fusion_h1: the fused 40-d representation the
// leakage probes consume.
std::vector<double> extract_embedding(const ModelParams& params, const data::Profile& profile);

// Flat parameter vector in a fixed layout (embed, proj, h1, h2, out); used
// by training, checkpoints and gradient checks.
std::size_t param_count(const ModelParams& params);
std::vector<double> flatten_params(const ModelParams& params);
void unflatten_params(ModelParams& params, const std::vector<double>& flat);

// Mean MAE over the given profile ids; fills the analytic gradient in the
// flat layout when grad_out is non-null.
double batch_loss_grad(const ModelParams& params, const data::Dataset& dataset,
                       const std::vector<int>& ids, std::vector<double>* grad_out);

}  // namespace fairlens::model
