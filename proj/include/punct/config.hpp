#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

namespace punct {

// Flat `section.key = value` text config. '#' starts a comment; blank lines
// are ignored. Unknown keys are rejected when materializing PipelineConfig so
// typos fail loudly.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::istream& input);
    static KeyValueConfig parse_file(const std::string& path);

    bool has(const std::string& key) const;
    std::optional<std::string> get(const std::string& key) const;
    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

// Everything the CLI subcommands need, with the defaults documented in the
// README. CLI flags override config values which override defaults.
struct PipelineConfig {
    // paths
    std::string time_annotated_dir;
    std::string punctuated_dir;
    std::string pretrained;
    std::string out_dir = "out";

    // corpus
    bool offset_within_speaker = false;

    // vocab
    std::size_t vocab_max_size = 50000;
    std::uint64_t vocab_min_count = 1;

    // cooc
    std::size_t cooc_window = 10;
    std::string cooc_split = "train";  // train | all

    // embeddings
    std::size_t emb_dim = 50;
    double emb_x_max = 100.0;
    double emb_alpha = 0.75;
    double emb_mu = 0.1;
    double emb_lr = 0.05;
    std::size_t emb_iters = 200;
    std::optional<std::uint64_t> emb_seed;

    // tagger
    std::size_t tagger_window = 200;
    std::size_t tagger_filters = 128;
    std::size_t tagger_batch_size = 256;
    std::size_t tagger_epochs = 50;
    double tagger_lr = 1e-3;
    bool tagger_final_dilation2 = false;
    std::optional<std::uint64_t> tagger_seed;
    std::string tagger_embeddings;  // embeddings file; default out_dir/embeddings_retrofitted.txt

    std::uint64_t seed = 42;

    static PipelineConfig from_config(const KeyValueConfig& config);

    std::uint64_t embeddings_seed() const { return emb_seed.value_or(seed); }
    std::uint64_t tagger_train_seed() const { return tagger_seed.value_or(seed); }
};

}  // namespace punct
