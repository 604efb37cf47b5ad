#include "fairlens/corpus.hpp"

#include <sstream>

#include "fairlens/errors.hpp"

#include "corpus_data.inc"

namespace fairlens::corpus {

namespace {

std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

std::vector<std::string> parse_lines(const char* raw) {
    std::vector<std::string> out;
    std::istringstream is(raw);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        out.push_back(line);
    }
    return out;
}

std::vector<std::string> parse_names(const char* raw, const char* which) {
    std::vector<std::string> names = parse_lines(raw);
    if (names.size() < 200)
        throw DataError(std::string("name list '") + which + "' must hold at least 200 names");
    return names;
}

BioTemplates parse_templates(const char* raw) {
    BioTemplates t;
    std::vector<std::vector<std::string>>* section = nullptr;
    bool years = false;
    for (const std::string& line : parse_lines(raw)) {
        if (line == "@opening") { section = &t.opening; years = false; continue; }
        if (line == "@work") { section = &t.work; years = false; continue; }
        if (line == "@extra") { section = &t.extra; years = false; continue; }
        if (line == "@years") { section = nullptr; years = true; continue; }
        if (section) {
            section->push_back(split_tokens(line));
        } else if (years) {
            t.years.push_back(line);
        }
    }
    if (t.opening.size() < 3 || t.work.size() < 3 || t.extra.size() < 2 || t.years.empty())
        throw DataError("bio template corpus is incomplete");
    return t;
}

std::array<std::vector<std::string>, 4> parse_keywords(const char* raw) {
    const std::vector<std::string> lines = parse_lines(raw);
    if (lines.size() != 4) throw DataError("sector keyword corpus must hold exactly 4 sectors");
    std::array<std::vector<std::string>, 4> out;
    for (std::size_t s = 0; s < 4; ++s) {
        out[s] = split_tokens(lines[s]);
        if (out[s].size() < 5) throw DataError("each sector needs at least 5 keywords");
    }
    return out;
}

std::unordered_set<std::string> build_lexicon() {
    std::unordered_set<std::string> lex = {"he",   "she",     "his",     "her", "him", "hers",
                                           "himself", "herself", "mr.", "ms.", "mrs."};
    for (const auto& n : male_names()) lex.insert(n);
    for (const auto& n : female_names()) lex.insert(n);
    return lex;
}

}  // namespace

const std::vector<std::string>& male_names() {
    static const std::vector<std::string> names = parse_names(kCorpus_names_male_txt, "male");
    return names;
}

const std::vector<std::string>& female_names() {
    static const std::vector<std::string> names = parse_names(kCorpus_names_female_txt, "female");
    return names;
}

const BioTemplates& bio_templates() {
    static const BioTemplates t = parse_templates(kCorpus_bio_templates_txt);
    return t;
}

const std::array<std::vector<std::string>, 4>& sector_keywords() {
    static const std::array<std::vector<std::string>, 4> kw =
        parse_keywords(kCorpus_sector_keywords_txt);
    return kw;
}

const std::unordered_set<std::string>& gendered_lexicon() {
    static const std::unordered_set<std::string> lex = build_lexicon();
    return lex;
}

bool is_gendered_token(const std::string& token) {
    return gendered_lexicon().count(token) > 0;
}

}  // namespace fairlens::corpus
