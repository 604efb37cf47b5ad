#include "fairlens/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <utility>

#include "fairlens/corpus.hpp"
#include "fairlens/errors.hpp"

namespace fairlens::data {

namespace {

constexpr std::array<double, 5> kDomain5 = {0.2, 0.4, 0.6, 0.8, 1.0};
constexpr std::array<double, 6> kDomain6 = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};

// Occupation grouping: 3 + 2 + 3 + 2 occupations over the four sectors.
constexpr std::array<int, kNumOccupations> kOccupationSector = {0, 0, 0, 1, 1, 2, 2, 2, 3, 3};

const std::array<std::vector<int>, kNumSectors>& sector_occupations() {
    static const std::array<std::vector<int>, kNumSectors> occs = {
        std::vector<int>{0, 1, 2}, std::vector<int>{3, 4}, std::vector<int>{5, 6, 7},
        std::vector<int>{8, 9}};
    return occs;
}

std::vector<double> basis_vector(int axis) {
    std::vector<double> v(kFaceDim, 0.0);
    v[axis] = 1.0;
    return v;
}

int gender_of_cell(std::uint8_t cell) { return cell / (kNumEthnicities * kNumSectors); }
int ethnicity_of_cell(std::uint8_t cell) { return (cell / kNumSectors) % kNumEthnicities; }
int sector_of_cell(std::uint8_t cell) { return cell % kNumSectors; }

Occupation occupation_for_sector(int sector, int i, const GenConfig& config) {
    RngStream rng(config.seed, stream_id(kStreamOccupation, static_cast<std::uint64_t>(i)));
    const auto& occs = sector_occupations()[sector];
    Occupation occ;
    occ.occupation_id = occs[rng.uniform_int(occs.size())];
    occ.sector_id = sector;
    occ.suitability = suitability_for_sector(sector);
    return occ;
}

struct RenderedBio {
    std::vector<std::string> full;
    std::vector<std::string> blinded;
};

void render_sentence(const std::vector<std::string>& tmpl, const std::string& name, int gender,
                     int sector, RngStream& rng, RenderedBio& out) {
    const auto& keywords = corpus::sector_keywords()[sector];
    const auto& years = corpus::bio_templates().years;
    for (const std::string& tok : tmpl) {
        std::string full, blind;
        if (tok == "[NAME]") {
            full = name;
            // name dropped entirely in the blinded variant
            out.full.push_back(full);
            continue;
        } else if (tok == "[TITLE]") {
            full = gender == 0 ? "mr." : "ms.";
            blind = "mx.";
        } else if (tok == "[PRONOUN_SUBJ]") {
            full = gender == 0 ? "he" : "she";
            blind = "they";
        } else if (tok == "[PRONOUN_POSS]") {
            full = gender == 0 ? "his" : "her";
            blind = "their";
        } else if (tok == "[PRONOUN_OBJ]") {
            full = gender == 0 ? "him" : "her";
            blind = "them";
        } else if (tok == "[SECTOR_KW]") {
            full = keywords[rng.uniform_int(keywords.size())];
            blind = full;
        } else if (tok == "[YEARS]") {
            full = years[rng.uniform_int(years.size())];
            blind = full;
        } else {
            full = tok;
            blind = tok;
        }
        out.full.push_back(full);
        out.blinded.push_back(blind);
    }
}

}  // namespace

void GenConfig::validate() const {
    if (n_profiles <= 0 || n_profiles % kNumCells != 0)
        throw ConfigError("n_profiles must be a positive multiple of " +
                          std::to_string(kNumCells) + ", got " + std::to_string(n_profiles));
    if (face_gender_leakage < 0.0 || face_ethnicity_leakage < 0.0)
        throw ConfigError("face leakage strengths must be >= 0");
    if (face_noise <= 0.0) throw ConfigError("face_noise must be > 0");
    if (competency_ethnicity_proxy < 0.0 || competency_ethnicity_proxy > 1.0)
        throw ConfigError("competency_ethnicity_proxy must lie in [0, 1]");
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw ConfigError("train_fraction must lie in (0, 1)");
}

std::vector<std::uint8_t> cell_assignment(const GenConfig& config) {
    config.validate();
    // Depends only on (seed, n); memoized because the per-profile ops
    // recompute it when called standalone.
    static std::mutex cache_mutex;
    static std::map<std::pair<std::uint64_t, int>, std::vector<std::uint8_t>> cache;
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        auto it = cache.find({config.seed, config.n_profiles});
        if (it != cache.end()) return it->second;
    }

    const int per_cell = config.n_profiles / kNumCells;
    std::vector<std::uint8_t> cells;
    cells.reserve(config.n_profiles);
    for (int c = 0; c < kNumCells; ++c)
        cells.insert(cells.end(), per_cell, static_cast<std::uint8_t>(c));

    RngStream rng(config.seed, stream_id(kStreamCells));
    for (std::size_t i = cells.size() - 1; i > 0; --i)
        std::swap(cells[i], cells[rng.uniform_int(i + 1)]);

    std::lock_guard<std::mutex> lock(cache_mutex);
    return cache.emplace(std::make_pair(config.seed, config.n_profiles), std::move(cells))
        .first->second;
}

Demographics sample_demographics(int i, const GenConfig& config) {
    const auto cells = cell_assignment(config);
    if (i < 0 || i >= config.n_profiles) throw ArgumentError("profile index out of range");
    return {gender_of_cell(cells[i]), ethnicity_of_cell(cells[i])};
}

Competencies sample_competencies(const Demographics& demo, const GenConfig& config,
                                 RngStream& rng) {
    Competencies c;
    c.education = kDomain5[rng.uniform_int(kDomain5.size())];
    c.recommendation = static_cast<double>(rng.uniform_int(2));
    c.availability = kDomain5[rng.uniform_int(kDomain5.size())];
    c.experience = kDomain6[rng.uniform_int(kDomain6.size())];
    for (double& l : c.languages) l = kDomain6[rng.uniform_int(kDomain6.size())];

    // Soft ethnicity proxy: with probability rho the first language level
    // moves one domain step toward the group anchor (group 0 up, group 2
    // down, group 1 untouched), clamped to the domain.
    const double shift_draw = rng.uniform();
    if (shift_draw < config.competency_ethnicity_proxy) {
        if (demo.ethnicity == 0)
            c.languages[0] = std::min(1.0, c.languages[0] + 0.2);
        else if (demo.ethnicity == 2)
            c.languages[0] = std::max(0.0, c.languages[0] - 0.2);
        // snap back onto the 0.2 grid after the shift
        c.languages[0] = std::round(c.languages[0] * 5.0) / 5.0;
    }
    return c;
}

Occupation assign_occupation(int i, int /*gender*/, const GenConfig& config) {
    const auto cells = cell_assignment(config);
    if (i < 0 || i >= config.n_profiles) throw ArgumentError("profile index out of range");
    return occupation_for_sector(sector_of_cell(cells[i]), i, config);
}

std::vector<double> synth_face_embedding(const Demographics& demo, const GenConfig& config,
                                         RngStream& rng) {
    const double gender_sign = demo.gender == 0 ? 1.0 : -1.0;
    std::vector<double> v(kFaceDim);
    while (true) {
        for (double& x : v) x = rng.normal(0.0, config.face_noise);
        v[0] += config.face_gender_leakage * gender_sign;
        v[1 + demo.ethnicity] += config.face_ethnicity_leakage;
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm > 0.0) {
            for (double& x : v) x /= norm;
            return v;
        }
        // zero vector before normalization: resample
    }
}

Bio generate_bio(const std::string& name, int gender, const Occupation& occupation,
                 RngStream& rng) {
    const auto& templates = corpus::bio_templates();
    RenderedBio rendered;

    const int n_extra = static_cast<int>(rng.uniform_int(3));  // 2..4 sentences total
    const auto& opening = templates.opening[rng.uniform_int(templates.opening.size())];
    const auto& work = templates.work[rng.uniform_int(templates.work.size())];
    render_sentence(opening, name, gender, occupation.sector_id, rng, rendered);
    render_sentence(work, name, gender, occupation.sector_id, rng, rendered);

    // distinct extra sentences
    std::vector<std::size_t> extra_idx(templates.extra.size());
    for (std::size_t k = 0; k < extra_idx.size(); ++k) extra_idx[k] = k;
    for (std::size_t k = extra_idx.size() - 1; k > 0; --k)
        std::swap(extra_idx[k], extra_idx[rng.uniform_int(k + 1)]);
    for (int e = 0; e < n_extra; ++e)
        render_sentence(templates.extra[extra_idx[e]], name, gender, occupation.sector_id, rng,
                        rendered);

    if (rendered.full.size() > kMaxBioTokens || rendered.blinded.size() > kMaxBioTokens)
        throw DataError("bio template corpus produced a bio above the 64-token cap");
    return {std::move(rendered.full), std::move(rendered.blinded)};
}

Dataset generate_dataset(const GenConfig& config) {
    config.validate();
    const auto cells = cell_assignment(config);

    Dataset ds;
    ds.profiles.resize(config.n_profiles);
    for (int i = 0; i < config.n_profiles; ++i) {
        Profile& p = ds.profiles[i];
        p.id = i;
        p.demographics = {gender_of_cell(cells[i]), ethnicity_of_cell(cells[i])};

        RngStream name_rng(config.seed, stream_id(kStreamName, static_cast<std::uint64_t>(i)));
        const auto& names =
            p.demographics.gender == 0 ? corpus::male_names() : corpus::female_names();
        p.name = names[name_rng.uniform_int(names.size())];

        p.occupation = occupation_for_sector(sector_of_cell(cells[i]), i, config);

        RngStream comp_rng(config.seed,
                           stream_id(kStreamCompetencies, static_cast<std::uint64_t>(i)));
        p.competencies = sample_competencies(p.demographics, config, comp_rng);

        RngStream face_rng(config.seed, stream_id(kStreamFace, static_cast<std::uint64_t>(i)));
        p.face = synth_face_embedding(p.demographics, config, face_rng);

        RngStream bio_rng(config.seed, stream_id(kStreamBio, static_cast<std::uint64_t>(i)));
        p.bio = generate_bio(p.name, p.demographics.gender, p.occupation, bio_rng);
    }

    assign_split(ds, config.seed, config.train_fraction);
    return ds;
}

void assign_split(Dataset& dataset, std::uint64_t seed, double train_fraction) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0)
        throw ConfigError("train_fraction must lie in (0, 1)");
    dataset.train_ids.clear();
    dataset.val_ids.clear();

    // Within each of the 24 cells: a seeded shuffle then a floor split,
    // distributing any remainder by ascending cell index.
    std::array<std::vector<int>, kNumCells> members;
    for (const Profile& p : dataset.profiles) {
        const int cell =
            (p.demographics.gender * kNumEthnicities + p.demographics.ethnicity) * kNumSectors +
            p.occupation.sector_id;
        members[cell].push_back(p.id);
    }

    const auto n = static_cast<long long>(dataset.profiles.size());
    const long long target_train = std::llround(static_cast<double>(n) * train_fraction);
    long long base_total = 0;
    std::array<int, kNumCells> base{};
    for (int c = 0; c < kNumCells; ++c) {
        base[c] = static_cast<int>(static_cast<double>(members[c].size()) * train_fraction);
        base_total += base[c];
    }
    long long deficit = target_train - base_total;

    for (int c = 0; c < kNumCells; ++c) {
        auto& ids = members[c];
        if (ids.empty()) continue;
        RngStream split_rng(seed, stream_id(kStreamSplit, static_cast<std::uint64_t>(c)));
        for (std::size_t k = ids.size() - 1; k > 0; --k)
            std::swap(ids[k], ids[split_rng.uniform_int(k + 1)]);
        int take = base[c];
        if (deficit > 0) {
            take += 1;
            deficit -= 1;
        }
        for (std::size_t k = 0; k < ids.size(); ++k)
            (static_cast<int>(k) < take ? dataset.train_ids : dataset.val_ids).push_back(ids[k]);
    }
    std::sort(dataset.train_ids.begin(), dataset.train_ids.end());
    std::sort(dataset.val_ids.begin(), dataset.val_ids.end());
}

const std::vector<double>& gender_direction() {
    static const std::vector<double> u = basis_vector(0);
    return u;
}

const std::vector<double>& ethnicity_direction(int group) {
    static const std::array<std::vector<double>, 3> dirs = {basis_vector(1), basis_vector(2),
                                                            basis_vector(3)};
    if (group < 0 || group >= kNumEthnicities) throw ArgumentError("ethnicity group out of range");
    return dirs[group];
}

double suitability_for_sector(int sector_id) {
    if (sector_id < 0 || sector_id >= kNumSectors) throw ArgumentError("sector out of range");
    return 0.25 * (sector_id + 1);
}

int sector_of_occupation(int occupation_id) {
    if (occupation_id < 0 || occupation_id >= kNumOccupations)
        throw ArgumentError("occupation out of range");
    return kOccupationSector[occupation_id];
}

}  // namespace fairlens::data
