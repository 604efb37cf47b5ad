#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairlens/rng.hpp"

namespace fairlens::data {

constexpr int kFaceDim = 20;
constexpr int kNumGenders = 2;
constexpr int kNumEthnicities = 3;
constexpr int kNumSectors = 4;
constexpr int kNumOccupations = 10;
constexpr int kNumCells = kNumGenders * kNumEthnicities * kNumSectors;
constexpr int kMaxBioTokens = 64;

// Stream purposes; combined with a profile index via stream_id() so every
// profile draws from its own independent streams.
enum StreamPurpose : std::uint16_t {
    kStreamCells = 1,
    kStreamName = 2,
    kStreamCompetencies = 3,
    kStreamFace = 4,
    kStreamBio = 5,
    kStreamOccupation = 6,
    kStreamSplit = 7,
    kStreamScoreNoise = 8,
};

struct Demographics {
    int gender = 0;     // 0 = male, 1 = female
    int ethnicity = 0;  // 0, 1, 2
};

struct Competencies {
    double education = 0.2;       // x1 in {0.2,0.4,0.6,0.8,1}
    double recommendation = 0.0;  // x2 in {0,1}
    double availability = 0.2;    // x3 in {0.2,0.4,0.6,0.8,1}
    double experience = 0.0;      // x4 in {0,0.2,...,1}
    std::array<double, 3> languages = {0.0, 0.0, 0.0};  // x5..x7 in {0,0.2,...,1}

    std::array<double, 7> as_array() const {
        return {education, recommendation, availability, experience,
                languages[0], languages[1], languages[2]};
    }
};

struct Occupation {
    int occupation_id = 0;  // [0, 9]
    int sector_id = 0;      // [0, 3]
    double suitability = 0.25;
};

struct Bio {
    std::vector<std::string> tokens;
    std::vector<std::string> blinded_tokens;
};

struct TargetScores {
    double t_u = 0.0;
    double t_g = 0.0;
    double t_e = 0.0;
};

struct Profile {
    int id = 0;
    Demographics demographics;
    std::string name;
    Occupation occupation;
    Competencies competencies;
    std::vector<double> face;  // kFaceDim, unit norm
    std::optional<std::vector<double>> agnostic_face;
    Bio bio;
    std::optional<TargetScores> scores;
};

struct GenConfig {
    int n_profiles = 24000;
    std::uint64_t seed = 42;
    // Face leakage strengths are calibration choices: with unit noise, a
    // held-out linear gender probe on raw embeddings lands near 0.89 and an
    // ethnicity probe near 0.75.
    double face_gender_leakage = 1.25;    // delta_g
    double face_ethnicity_leakage = 1.6;  // delta_e
    double face_noise = 1.0;              // sigma_f
    double competency_ethnicity_proxy = 0.15;  // rho
    double train_fraction = 0.8;

    void validate() const;  // throws ConfigError
};

struct Dataset {
    std::vector<Profile> profiles;
    std::vector<int> train_ids;
    std::vector<int> val_ids;
};

// Balanced (gender, ethnicity, sector) cell per profile: each of the 24
// cells appears exactly n/24 times, order fixed by a seeded permutation.
// cell = (gender * 3 + ethnicity) * 4 + sector.
std::vector<std::uint8_t> cell_assignment(const GenConfig& config);

Demographics sample_demographics(int i, const GenConfig& config);
Competencies sample_competencies(const Demographics& demo, const GenConfig& config,
                                 RngStream& rng);
Occupation assign_occupation(int i, int gender, const GenConfig& config);
std::vector<double> synth_face_embedding(const Demographics& demo, const GenConfig& config,
                                         RngStream& rng);
Bio generate_bio(const std::string& name, int gender, const Occupation& occupation,
                 RngStream& rng);
Dataset generate_dataset(const GenConfig& config);

// Stratified 80/20-style split over the 24 (gender, ethnicity, sector)
// cells; deterministic in (seed, train_fraction). Rebuilds train_ids and
// val_ids in place, so a dataset reloaded from disk splits identically to
// the one generate_dataset produced.
void assign_split(Dataset& dataset, std::uint64_t seed, double train_fraction);

// The injected demographic subspace, exposed so removal quality can be
// audited against the known geometry.
const std::vector<double>& gender_direction();
const std::vector<double>& ethnicity_direction(int group);

double suitability_for_sector(int sector_id);
int sector_of_occupation(int occupation_id);

}  // namespace fairlens::data
