#include "fairlens/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fairlens/errors.hpp"

namespace fairlens::config {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_real(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' expects a real number, got '" + value + "'");
    }
}

long long to_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' expects an integer, got '" + value + "'");
    }
}

// Shortest round-trip representation, the same one the JSON artifacts use.
std::string real_repr(double v) { return nlohmann::json(v).dump(); }

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "seed") {
        seed = static_cast<std::uint64_t>(to_int(key, value));
        gen.seed = seed;
        train.seed = seed;
        removal.seed = seed;
    } else if (key == "n_profiles") {
        gen.n_profiles = static_cast<int>(to_int(key, value));
    } else if (key == "face_gender_leakage") {
        gen.face_gender_leakage = to_real(key, value);
    } else if (key == "face_ethnicity_leakage") {
        gen.face_ethnicity_leakage = to_real(key, value);
    } else if (key == "face_noise") {
        gen.face_noise = to_real(key, value);
    } else if (key == "competency_ethnicity_proxy") {
        gen.competency_ethnicity_proxy = to_real(key, value);
    } else if (key == "train_fraction") {
        gen.train_fraction = to_real(key, value);
    } else if (key == "alpha") {
        std::stringstream ss(value);
        std::string part;
        std::size_t i = 0;
        while (std::getline(ss, part, ',')) {
            if (i >= weights.alpha.size())
                throw ConfigError("config key 'alpha' expects exactly 7 comma-separated values");
            weights.alpha[i++] = to_real(key, trim(part));
        }
        if (i != weights.alpha.size())
            throw ConfigError("config key 'alpha' expects exactly 7 comma-separated values");
    } else if (key == "alpha_s") {
        weights.alpha_s = to_real(key, value);
    } else if (key == "beta_sigma") {
        weights.beta_sigma = to_real(key, value);
    } else if (key == "gender_penalty") {
        gender_bias.penalty = to_real(key, value);
    } else if (key == "ethnicity_penalty") {
        ethnicity_bias.penalty = to_real(key, value);
    } else if (key == "penalized_ethnicity") {
        ethnicity_bias.penalized_group = static_cast<int>(to_int(key, value));
    } else if (key == "boosted_ethnicity") {
        ethnicity_bias.boosted_group = static_cast<int>(to_int(key, value));
    } else if (key == "epochs") {
        train.epochs = static_cast<int>(to_int(key, value));
    } else if (key == "batch_size") {
        train.batch_size = static_cast<int>(to_int(key, value));
    } else if (key == "adam_alpha") {
        train.adam_alpha = to_real(key, value);
    } else if (key == "adam_beta1") {
        train.adam_beta1 = to_real(key, value);
    } else if (key == "adam_beta2") {
        train.adam_beta2 = to_real(key, value);
    } else if (key == "removal_epochs") {
        removal.epochs = static_cast<int>(to_int(key, value));
    } else if (key == "adversary_steps") {
        removal.adversary_steps = static_cast<int>(to_int(key, value));
    } else if (key == "utility_weight") {
        removal.utility_weight = to_real(key, value);
    } else if (key == "penalty_target") {
        removal.penalty_target = to_real(key, value);
    } else if (key == "transform_lr") {
        removal.transform_lr = to_real(key, value);
    } else if (key == "adversary_alpha") {
        removal.adversary_alpha = to_real(key, value);
    } else if (key == "k") {
        top_k = static_cast<int>(to_int(key, value));
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

void RunConfig::validate() const {
    gen.validate();
    weights.validate();
    gender_bias.validate();
    ethnicity_bias.validate();
    removal.validate();
    if (train.epochs < 0 || train.batch_size < 1)
        throw ConfigError("epochs must be >= 0 and batch_size >= 1");
    if (train.adam_alpha <= 0.0) throw ConfigError("adam_alpha must be > 0");
    if (top_k < 1) throw ConfigError("k must be >= 1");
}

std::map<std::string, std::string> RunConfig::echo() const {
    std::map<std::string, std::string> m;
    m["seed"] = std::to_string(seed);
    m["n_profiles"] = std::to_string(gen.n_profiles);
    m["face_gender_leakage"] = real_repr(gen.face_gender_leakage);
    m["face_ethnicity_leakage"] = real_repr(gen.face_ethnicity_leakage);
    m["face_noise"] = real_repr(gen.face_noise);
    m["competency_ethnicity_proxy"] = real_repr(gen.competency_ethnicity_proxy);
    m["train_fraction"] = real_repr(gen.train_fraction);
    std::string alpha;
    for (std::size_t i = 0; i < weights.alpha.size(); ++i) {
        if (i) alpha += ",";
        alpha += real_repr(weights.alpha[i]);
    }
    m["alpha"] = alpha;
    m["alpha_s"] = real_repr(weights.alpha_s);
    m["beta_sigma"] = real_repr(weights.beta_sigma);
    m["gender_penalty"] = real_repr(gender_bias.penalty);
    m["ethnicity_penalty"] = real_repr(ethnicity_bias.penalty);
    m["penalized_ethnicity"] = std::to_string(ethnicity_bias.penalized_group);
    m["boosted_ethnicity"] = std::to_string(ethnicity_bias.boosted_group.value_or(-1));
    m["epochs"] = std::to_string(train.epochs);
    m["batch_size"] = std::to_string(train.batch_size);
    m["adam_alpha"] = real_repr(train.adam_alpha);
    m["adam_beta1"] = real_repr(train.adam_beta1);
    m["adam_beta2"] = real_repr(train.adam_beta2);
    m["adam_eps"] = real_repr(1e-8);
    m["removal_epochs"] = std::to_string(removal.epochs);
    m["adversary_steps"] = std::to_string(removal.adversary_steps);
    m["utility_weight"] = real_repr(removal.utility_weight);
    m["penalty_target"] = real_repr(removal.penalty_target);
    m["transform_lr"] = real_repr(removal.transform_lr);
    m["adversary_alpha"] = real_repr(removal.adversary_alpha);
    m["k"] = std::to_string(top_k);
    return m;
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        line_no += 1;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              " is not a 'key = value' assignment");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace fairlens::config
