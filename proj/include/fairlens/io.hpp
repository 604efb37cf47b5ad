#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "fairlens/agnostic.hpp"
#include "fairlens/datagen.hpp"
#include "fairlens/fairness.hpp"
#include "fairlens/model.hpp"

namespace fairlens::io {

// JSON-Lines, one profile per line. Field names are part of the format:
// id, gender, ethnicity, name, occupation_id, sector_id, suitability,
// competencies (7), face (20), agnostic_face (20 or null), bio, blind_bio,
// score_u, score_g, score_e.
void write_dataset_jsonl(const data::Dataset& dataset, const std::string& path);
data::Dataset read_dataset_jsonl(const std::string& path);
std::string dataset_to_jsonl(const data::Dataset& dataset);

// Versioned JSON checkpoints, reloadable without retraining.
void save_model(const model::ModelParams& params, const std::string& path);
model::ModelParams load_model(const std::string& path);
void save_transform(const agnostic::AgnosticTransform& transform, const std::string& path);
agnostic::AgnosticTransform load_transform(const std::string& path);

void write_loss_csv(const std::vector<double>& loss_history, const std::string& path);

void write_report_json(const fairness::FairnessReport& report, const std::string& path);
std::string report_to_json(const fairness::FairnessReport& report);
// One summary line per scenario; header written when the file is fresh.
std::string report_csv_header();
std::string report_csv_row(const fairness::FairnessReport& report);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
bool file_exists(const std::string& path);

// FNV-1a over the file bytes; used by the determinism checks.
std::uint64_t file_hash(const std::string& path);

}  // namespace fairlens::io
