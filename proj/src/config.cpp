#include "punct/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>

#include "punct/error.hpp"

namespace punct {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw Error("config key '" + key + "': cannot parse '" + value + "'");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw Error("config key '" + key + "': expected true/false, got '" + value + "'");
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& input) {
    KeyValueConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(input, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        std::size_t eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw ParseError("config line " + std::to_string(line_no) + ": expected `key = value`");
        }
        std::string key = trim(trimmed.substr(0, eq));
        std::string value = trim(trimmed.substr(eq + 1));
        if (key.empty()) {
            throw ParseError("config line " + std::to_string(line_no) + ": empty key");
        }
        config.values_[key] = value;
    }
    return config;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file '" + path + "'");
    return parse(in);
}

bool KeyValueConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

PipelineConfig PipelineConfig::from_config(const KeyValueConfig& config) {
    PipelineConfig p;
    for (const auto& [key, value] : config.values()) {
        if (key == "paths.time_annotated_dir") p.time_annotated_dir = value;
        else if (key == "paths.punctuated_dir") p.punctuated_dir = value;
        else if (key == "paths.pretrained") p.pretrained = value;
        else if (key == "paths.out_dir") p.out_dir = value;
        else if (key == "corpus.offset_within_speaker") p.offset_within_speaker = parse_bool(key, value);
        else if (key == "vocab.max_size") p.vocab_max_size = parse_number<std::size_t>(key, value);
        else if (key == "vocab.min_count") p.vocab_min_count = parse_number<std::uint64_t>(key, value);
        else if (key == "cooc.window") p.cooc_window = parse_number<std::size_t>(key, value);
        else if (key == "cooc.split") {
            if (value != "train" && value != "all") {
                throw Error("config key 'cooc.split': expected train or all, got '" + value + "'");
            }
            p.cooc_split = value;
        }
        else if (key == "embeddings.dim") p.emb_dim = parse_number<std::size_t>(key, value);
        else if (key == "embeddings.x_max") p.emb_x_max = parse_number<double>(key, value);
        else if (key == "embeddings.alpha") p.emb_alpha = parse_number<double>(key, value);
        else if (key == "embeddings.mu") p.emb_mu = parse_number<double>(key, value);
        else if (key == "embeddings.lr") p.emb_lr = parse_number<double>(key, value);
        else if (key == "embeddings.iters") p.emb_iters = parse_number<std::size_t>(key, value);
        else if (key == "embeddings.seed") p.emb_seed = parse_number<std::uint64_t>(key, value);
        else if (key == "tagger.window_length") p.tagger_window = parse_number<std::size_t>(key, value);
        else if (key == "tagger.filters") p.tagger_filters = parse_number<std::size_t>(key, value);
        else if (key == "tagger.batch_size") p.tagger_batch_size = parse_number<std::size_t>(key, value);
        else if (key == "tagger.epochs") p.tagger_epochs = parse_number<std::size_t>(key, value);
        else if (key == "tagger.lr") p.tagger_lr = parse_number<double>(key, value);
        else if (key == "tagger.final_dilation2") p.tagger_final_dilation2 = parse_bool(key, value);
        else if (key == "tagger.seed") p.tagger_seed = parse_number<std::uint64_t>(key, value);
        else if (key == "tagger.embeddings") p.tagger_embeddings = value;
        else if (key == "seed") p.seed = parse_number<std::uint64_t>(key, value);
        else throw Error("unknown config key '" + key + "'");
    }
    if (p.emb_mu < 0.0) throw Error("config key 'embeddings.mu': must be non-negative");
    return p;
}

}  // namespace punct
