#include "fairlens/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fairlens/errors.hpp"

namespace fairlens::io {

namespace {

using nlohmann::ordered_json;

ordered_json tensor_to_json(const numerics::Tensor2& t) {
    return ordered_json{{"rows", t.rows}, {"cols", t.cols}, {"data", t.data}};
}

numerics::Tensor2 tensor_from_json(const ordered_json& j) {
    numerics::Tensor2 t;
    t.rows = j.at("rows").get<std::size_t>();
    t.cols = j.at("cols").get<std::size_t>();
    t.data = j.at("data").get<std::vector<double>>();
    if (t.data.size() != t.rows * t.cols)
        throw IoError("checkpoint tensor size does not match its shape");
    return t;
}

ordered_json layer_to_json(const numerics::DenseLayer& l) {
    const char* act = "identity";
    switch (l.activation) {
        case numerics::Activation::identity: act = "identity"; break;
        case numerics::Activation::relu: act = "relu"; break;
        case numerics::Activation::sigmoid: act = "sigmoid"; break;
        case numerics::Activation::tanh: act = "tanh"; break;
    }
    return ordered_json{
        {"weights", tensor_to_json(l.weights)}, {"bias", l.bias}, {"activation", act}};
}

numerics::DenseLayer layer_from_json(const ordered_json& j) {
    numerics::DenseLayer l;
    l.weights = tensor_from_json(j.at("weights"));
    l.bias = j.at("bias").get<std::vector<double>>();
    const std::string act = j.at("activation").get<std::string>();
    if (act == "identity") l.activation = numerics::Activation::identity;
    else if (act == "relu") l.activation = numerics::Activation::relu;
    else if (act == "sigmoid") l.activation = numerics::Activation::sigmoid;
    else if (act == "tanh") l.activation = numerics::Activation::tanh;
    else throw IoError("unknown activation '" + act + "' in checkpoint");
    return l;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

}  // namespace

std::string dataset_to_jsonl(const data::Dataset& dataset) {
    std::string buf;
    buf.reserve(dataset.profiles.size() * 1024);
    for (const data::Profile& p : dataset.profiles) {
        ordered_json j;
        j["id"] = p.id;
        j["gender"] = p.demographics.gender;
        j["ethnicity"] = p.demographics.ethnicity;
        j["name"] = p.name;
        j["occupation_id"] = p.occupation.occupation_id;
        j["sector_id"] = p.occupation.sector_id;
        j["suitability"] = p.occupation.suitability;
        j["competencies"] = p.competencies.as_array();
        j["face"] = p.face;
        if (p.agnostic_face.has_value())
            j["agnostic_face"] = *p.agnostic_face;
        else
            j["agnostic_face"] = nullptr;
        j["bio"] = p.bio.tokens;
        j["blind_bio"] = p.bio.blinded_tokens;
        if (p.scores.has_value()) {
            j["score_u"] = p.scores->t_u;
            j["score_g"] = p.scores->t_g;
            j["score_e"] = p.scores->t_e;
        } else {
            j["score_u"] = nullptr;
            j["score_g"] = nullptr;
            j["score_e"] = nullptr;
        }
        buf += j.dump();
        buf += '\n';
    }
    return buf;
}

void write_dataset_jsonl(const data::Dataset& dataset, const std::string& path) {
    auto out = open_out(path);
    out << dataset_to_jsonl(dataset);
}

data::Dataset read_dataset_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open dataset '" + path + "'");

    data::Dataset ds;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IoError("malformed dataset line " + std::to_string(ds.profiles.size() + 1) +
                          ": " + e.what());
        }
        data::Profile p;
        p.id = j.at("id").get<int>();
        p.demographics.gender = j.at("gender").get<int>();
        p.demographics.ethnicity = j.at("ethnicity").get<int>();
        p.name = j.at("name").get<std::string>();
        p.occupation.occupation_id = j.at("occupation_id").get<int>();
        p.occupation.sector_id = j.at("sector_id").get<int>();
        p.occupation.suitability = j.at("suitability").get<double>();
        const auto comps = j.at("competencies").get<std::vector<double>>();
        if (comps.size() != 7) throw IoError("competencies must have 7 entries");
        p.competencies.education = comps[0];
        p.competencies.recommendation = comps[1];
        p.competencies.availability = comps[2];
        p.competencies.experience = comps[3];
        p.competencies.languages = {comps[4], comps[5], comps[6]};
        p.face = j.at("face").get<std::vector<double>>();
        if (!j.at("agnostic_face").is_null())
            p.agnostic_face = j.at("agnostic_face").get<std::vector<double>>();
        p.bio.tokens = j.at("bio").get<std::vector<std::string>>();
        p.bio.blinded_tokens = j.at("blind_bio").get<std::vector<std::string>>();
        if (!j.at("score_u").is_null()) {
            data::TargetScores s;
            s.t_u = j.at("score_u").get<double>();
            s.t_g = j.at("score_g").get<double>();
            s.t_e = j.at("score_e").get<double>();
            p.scores = s;
        }
        ds.profiles.push_back(std::move(p));
    }
    // The split is not part of the file format; callers rebuild it with
    // data::assign_split, which is deterministic in (seed, train_fraction).
    return ds;
}

void save_model(const model::ModelParams& params, const std::string& path) {
    ordered_json j;
    j["format_version"] = 1;
    j["kind"] = "model";
    j["scenario"] = {{"kind", static_cast<int>(params.scenario.kind)},
                     {"bias_attribute", static_cast<int>(params.scenario.bias_attribute)}};
    j["vocab"] = params.text.vocab;
    j["embed"] = tensor_to_json(params.text.embed);
    j["proj"] = layer_to_json(params.text.proj);
    j["fusion_h1"] = layer_to_json(params.fusion_h1);
    j["fusion_h2"] = layer_to_json(params.fusion_h2);
    j["out"] = layer_to_json(params.out);
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

model::ModelParams load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StateError("model checkpoint '" + path + "' does not exist; train first");
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed model checkpoint: " + std::string(e.what()));
    }
    if (j.value("kind", "") != "model") throw IoError("'" + path + "' is not a model checkpoint");

    model::ModelParams m;
    m.scenario.kind = static_cast<model::ScenarioKind>(j.at("scenario").at("kind").get<int>());
    m.scenario.bias_attribute =
        static_cast<scoring::BiasAttribute>(j.at("scenario").at("bias_attribute").get<int>());
    m.text.vocab = j.at("vocab").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < m.text.vocab.size(); ++i)
        m.text.index[m.text.vocab[i]] = static_cast<int>(i) + 1;
    m.text.embed = tensor_from_json(j.at("embed"));
    m.text.proj = layer_from_json(j.at("proj"));
    m.fusion_h1 = layer_from_json(j.at("fusion_h1"));
    m.fusion_h2 = layer_from_json(j.at("fusion_h2"));
    m.out = layer_from_json(j.at("out"));
    return m;
}

void save_transform(const agnostic::AgnosticTransform& transform, const std::string& path) {
    ordered_json j;
    j["format_version"] = 1;
    j["kind"] = "transform";
    j["layer1"] = layer_to_json(transform.layer1);
    j["layer2"] = layer_to_json(transform.layer2);
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

agnostic::AgnosticTransform load_transform(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StateError("transform checkpoint '" + path + "' does not exist; debias first");
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed transform checkpoint: " + std::string(e.what()));
    }
    if (j.value("kind", "") != "transform")
        throw IoError("'" + path + "' is not a transform checkpoint");
    agnostic::AgnosticTransform t;
    t.layer1 = layer_from_json(j.at("layer1"));
    t.layer2 = layer_from_json(j.at("layer2"));
    return t;
}

void write_loss_csv(const std::vector<double>& loss_history, const std::string& path) {
    auto out = open_out(path);
    out << "epoch,train_mae\n";
    for (std::size_t i = 0; i < loss_history.size(); ++i)
        out << i << ',' << nlohmann::json(loss_history[i]).dump() << '\n';
}

std::string report_to_json(const fairness::FairnessReport& r) {
    ordered_json j;
    j["scenario"] = r.scenario;
    j["k"] = r.k;
    j["pool_size"] = r.pool_size;
    j["kl"] = {{"gender", r.kl_gender},
               {"ethnicity_g1_vs_g2", r.kl_ethnicity.g1_vs_g2},
               {"ethnicity_g1_vs_g3", r.kl_ethnicity.g1_vs_g3},
               {"ethnicity_g2_vs_g3", r.kl_ethnicity.g2_vs_g3},
               {"ethnicity_mean", r.kl_ethnicity.mean}};
    j["top_k"] = {{"male", r.top_gender[0]},
                  {"female", r.top_gender[1]},
                  {"ethnicity", r.top_ethnicity},
                  {"share_male", r.share_gender[0]},
                  {"share_female", r.share_gender[1]},
                  {"share_ethnicity", r.share_ethnicity}};
    j["p_percent"] = {{"gender", r.p_gender},
                      {"ethnicity_p1", r.p_ethnicity[0]},
                      {"ethnicity_p2", r.p_ethnicity[1]},
                      {"ethnicity_p3", r.p_ethnicity[2]}};
    j["four_fifths"] = {{"gender", r.flag_gender},
                        {"ethnicity_p1", r.flag_ethnicity[0]},
                        {"ethnicity_p2", r.flag_ethnicity[1]},
                        {"ethnicity_p3", r.flag_ethnicity[2]}};
    auto hist = [](const fairness::ScoreHistogram& h) {
        return ordered_json{{"counts", h.counts}, {"total", h.total}};
    };
    j["histograms"] = {{"male", hist(r.hist_male)},
                       {"female", hist(r.hist_female)},
                       {"ethnicity_g1", hist(r.hist_ethnicity[0])},
                       {"ethnicity_g2", hist(r.hist_ethnicity[1])},
                       {"ethnicity_g3", hist(r.hist_ethnicity[2])}};
    if (r.has_leakage) {
        ordered_json leak = ordered_json::array();
        for (const auto& pr : r.leakage) {
            leak.push_back(
                {{"kind", probes::probe_kind_name(pr.kind)},
                 {"attribute",
                  pr.attribute == scoring::BiasAttribute::gender ? "gender" : "ethnicity"},
                 {"train_accuracy", pr.train_accuracy},
                 {"val_accuracy", pr.val_accuracy},
                 {"chance_level", pr.chance_level}});
        }
        j["leakage"] = leak;
    } else {
        j["leakage"] = nullptr;
    }
    j["config"] = r.config_echo;
    return j.dump(2) + "\n";
}

void write_report_json(const fairness::FairnessReport& report, const std::string& path) {
    auto out = open_out(path);
    out << report_to_json(report);
}

std::string report_csv_header() {
    return "scenario,male_share,female_share,p_gender,g1_share,g2_share,g3_share,"
           "p1_ethnicity,p2_ethnicity,p3_ethnicity,kl_gender,kl_ethnicity_mean,"
           "four_fifths_gender\n";
}

std::string report_csv_row(const fairness::FairnessReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%s,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.6f,%.6f,%d\n",
                  r.scenario.c_str(), r.share_gender[0], r.share_gender[1], r.p_gender,
                  r.share_ethnicity[0], r.share_ethnicity[1], r.share_ethnicity[2],
                  r.p_ethnicity[0], r.p_ethnicity[1], r.p_ethnicity[2], r.kl_gender,
                  r.kl_ethnicity.mean, r.flag_gender ? 1 : 0);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    auto out = open_out(path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool file_exists(const std::string& path) { return std::filesystem::exists(path); }

std::uint64_t file_hash(const std::string& path) {
    const std::string bytes = read_text_file(path);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace fairlens::io
