#pragma once

#include <array>
#include <string>
#include <unordered_set>
#include <vector>

namespace fairlens::corpus {

// Sentence templates tokenized at load time. Slot tokens keep their
// [BRACKET] form until a bio is rendered.
struct BioTemplates {
    std::vector<std::vector<std::string>> opening;
    std::vector<std::vector<std::string>> work;
    std::vector<std::vector<std::string>> extra;
    std::vector<std::string> years;
};

const std::vector<std::string>& male_names();
const std::vector<std::string>& female_names();
const BioTemplates& bio_templates();
const std::array<std::vector<std::string>, 4>& sector_keywords();

// Names, pronouns and titles: everything the blinding pass must not leave
// behind.
const std::unordered_set<std::string>& gendered_lexicon();
bool is_gendered_token(const std::string& token);

}  // namespace fairlens::corpus
