// punctkit: punctuation restoration for two-channel conversational ASR
// transcripts. Subcommands cover the whole pipeline: prepare the labeled
// dataset, count co-occurrences, train or retrofit embeddings, train the CNN
// tagger, evaluate, predict, and report homonym similarities.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "punct/align.hpp"
#include "punct/config.hpp"
#include "punct/cooc.hpp"
#include "punct/corpus.hpp"
#include "punct/embeddings.hpp"
#include "punct/error.hpp"
#include "punct/eval.hpp"
#include "punct/tagger.hpp"

namespace fs = std::filesystem;
using namespace punct;

namespace {

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "pipeline config file");
    cmd->add_option("--seed", args.seed, "global seed (overrides config)");
    cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
}

PipelineConfig resolve_config(const CommonArgs& args) {
    KeyValueConfig kv;
    if (!args.config_path.empty()) kv = KeyValueConfig::parse_file(args.config_path);
    PipelineConfig config = PipelineConfig::from_config(kv);
    if (args.seed) config.seed = *args.seed;
    if (!args.out_dir.empty()) config.out_dir = args.out_dir;
    return config;
}

std::string file_stem(const fs::path& p) { return p.stem().string(); }

std::vector<std::pair<std::string, fs::path>> list_files(const std::string& dir) {
    if (!fs::is_directory(dir)) throw Error("not a directory: '" + dir + "'");
    std::vector<std::pair<std::string, fs::path>> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file()) files.emplace_back(file_stem(entry.path()), entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::ofstream open_output(const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    return out;
}

std::vector<std::string> read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open split manifest '" + path.string() + "' (run prepare first)");
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) ids.push_back(line);
    }
    return ids;
}

Conversation load_labeled_conversation(const PipelineConfig& config, const std::string& id) {
    fs::path path = fs::path(config.out_dir) / "labeled" / (id + ".tsv");
    std::ifstream in(path);
    if (!in) throw Error("cannot open labeled file '" + path.string() + "' (run prepare first)");
    return load_labeled(in, id);
}

std::vector<Conversation> load_split(const PipelineConfig& config, const std::string& name) {
    std::vector<Conversation> convs;
    for (const std::string& id : read_manifest(fs::path(config.out_dir) / "splits" / (name + ".txt"))) {
        convs.push_back(load_labeled_conversation(config, id));
    }
    return convs;
}

EmbeddingTable load_tagger_embeddings(const PipelineConfig& config) {
    std::string path = config.tagger_embeddings.empty()
                           ? (fs::path(config.out_dir) / "embeddings_retrofitted.txt").string()
                           : config.tagger_embeddings;
    return load_pretrained_file(path, config.emb_dim);
}

int cmd_prepare(const CommonArgs& args) {
    PipelineConfig config = resolve_config(args);
    if (config.time_annotated_dir.empty() || config.punctuated_dir.empty()) {
        throw Error("prepare needs paths.time_annotated_dir and paths.punctuated_dir");
    }
    auto annotated = list_files(config.time_annotated_dir);
    auto punctuated = list_files(config.punctuated_dir);

    std::set<std::string> annotated_stems, punctuated_stems;
    for (const auto& [stem, _] : annotated) annotated_stems.insert(stem);
    for (const auto& [stem, _] : punctuated) punctuated_stems.insert(stem);
    std::vector<std::string> missing;
    std::set_symmetric_difference(annotated_stems.begin(), annotated_stems.end(),
                                  punctuated_stems.begin(), punctuated_stems.end(),
                                  std::back_inserter(missing));
    if (!missing.empty()) {
        std::string list;
        for (const std::string& stem : missing) list += " " + stem;
        throw Error("transcript stems without a counterpart:" + list);
    }

    std::vector<Conversation> labeled;
    for (std::size_t k = 0; k < annotated.size(); ++k) {
        const std::string& id = annotated[k].first;
        std::ifstream ta(annotated[k].second);
        if (!ta) throw Error("cannot open '" + annotated[k].second.string() + "'");
        std::ifstream pu(punctuated[k].second);
        if (!pu) throw Error("cannot open '" + punctuated[k].second.string() + "'");
        Conversation conv;
        std::vector<std::pair<std::string, PunctuationClass>> punct;
        try {
            conv = parse_time_annotated(ta, id);
            punct = parse_punctuated(pu);
            std::vector<std::string> a;
            a.reserve(conv.tokens.size());
            for (const Token& t : conv.tokens) a.push_back(t.text);
            std::vector<std::string> b;
            b.reserve(punct.size());
            for (const auto& [word, _] : punct) b.push_back(word);
            Alignment alignment = align(a, b);
            labeled.push_back(transfer_labels(conv, punct, alignment));
        } catch (const Error& e) {
            throw Error("conversation '" + id + "': " + e.what());
        }
    }

    const fs::path out_dir(config.out_dir);
    for (const Conversation& conv : labeled) {
        auto out = open_output(out_dir / "labeled" / (conv.id + ".tsv"));
        write_labeled(conv, out);
    }

    DatasetSplit split = split_dataset(labeled, config.seed);
    auto write_manifest = [&out_dir](const std::string& name, const std::vector<Conversation>& convs) {
        auto out = open_output(out_dir / "splits" / (name + ".txt"));
        for (const Conversation& c : convs) out << c.id << '\n';
    };
    write_manifest("train", split.train);
    write_manifest("val", split.validation);
    write_manifest("test", split.test);

    ClassDistribution dist = class_distribution(labeled);
    auto report = open_output(out_dir / "distribution.tsv");
    char buf[96];
    for (int c = 0; c < kNumClasses; ++c) {
        std::snprintf(buf, sizeof(buf), "%s\t%llu\t%.1f\n",
                      std::string(class_name(static_cast<PunctuationClass>(c))).c_str(),
                      static_cast<unsigned long long>(dist.counts[c]), dist.percentages[c]);
        report << buf;
    }
    std::cout << "prepared " << labeled.size() << " conversations (" << dist.total << " tokens) -> "
              << out_dir.string() << "\n";
    return 0;
}

std::pair<Vocabulary, CoocMatrix> load_vocab_and_cooc(const PipelineConfig& config) {
    fs::path vocab_path = fs::path(config.out_dir) / "vocab.tsv";
    std::ifstream vin(vocab_path);
    if (!vin) throw Error("cannot open '" + vocab_path.string() + "' (run cooc first)");
    Vocabulary vocab = Vocabulary::load(vin);
    fs::path cooc_path = fs::path(config.out_dir) / "cooc.txt";
    std::ifstream cin_(cooc_path);
    if (!cin_) throw Error("cannot open '" + cooc_path.string() + "' (run cooc first)");
    CoocMatrix x = CoocMatrix::load(cin_);
    return {std::move(vocab), std::move(x)};
}

int cmd_cooc(const CommonArgs& args) {
    PipelineConfig config = resolve_config(args);
    std::vector<Conversation> convs = load_split(config, "train");
    if (config.cooc_split == "all") {
        for (const char* name : {"val", "test"}) {
            for (Conversation& c : load_split(config, name)) convs.push_back(std::move(c));
        }
    }
    Vocabulary vocab = Vocabulary::build(convs, config.vocab_max_size, config.vocab_min_count);
    CoocMatrix x = build_cooc(convs, vocab, config.cooc_window);
    {
        auto out = open_output(fs::path(config.out_dir) / "vocab.tsv");
        vocab.save(out);
    }
    {
        auto out = open_output(fs::path(config.out_dir) / "cooc.txt");
        x.save(out);
    }
    std::cout << "vocabulary " << vocab.size() << " words, co-occurrence " << x.nnz_upper()
              << " pairs\n";
    return 0;
}

int run_embedding_training(const PipelineConfig& config, bool retrofit) {
    auto [vocab, x] = load_vocab_and_cooc(config);
    TrainConfig train_config;
    train_config.dim = config.emb_dim;
    train_config.x_max = config.emb_x_max;
    train_config.alpha = config.emb_alpha;
    train_config.mu = config.emb_mu;
    train_config.learning_rate = config.emb_lr;
    train_config.iterations = config.emb_iters;
    train_config.seed = config.embeddings_seed();

    EmbeddingTable pretrained;
    if (retrofit) {
        if (config.pretrained.empty()) throw Error("retrofit needs paths.pretrained");
        pretrained = load_pretrained_file(config.pretrained, config.emb_dim);
    }
    TrainResult result = train(x, vocab, train_config, retrofit ? &pretrained : nullptr);
    EmbeddingTable table = final_embedding(result.params, vocab);

    const std::string stem = retrofit ? "embeddings_retrofitted" : "embeddings_plain";
    {
        // written in vocabulary (frequency) order
        auto out = open_output(fs::path(config.out_dir) / (stem + ".txt"));
        char buf[64];
        for (const auto& [token, _] : vocab.entries()) {
            out << token;
            for (double v : *table.find(token)) {
                std::snprintf(buf, sizeof(buf), " %.17g", v);
                out << buf;
            }
            out << '\n';
        }
    }
    {
        auto out = open_output(fs::path(config.out_dir) / (stem + "_cost.tsv"));
        char buf[64];
        for (std::size_t i = 0; i < result.cost_log.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%zu\t%.17g\n", i, result.cost_log[i]);
            out << buf;
        }
    }
    std::cout << (retrofit ? "retrofitted" : "trained") << " " << table.size() << " embeddings, final cost "
              << result.cost_log.back() << "\n";
    return 0;
}

int cmd_train_tagger(const CommonArgs& args) {
    PipelineConfig config = resolve_config(args);
    EmbeddingTable embeddings = load_tagger_embeddings(config);
    TimingOptions timing{config.offset_within_speaker};

    auto windows_for = [&](const std::string& split_name) {
        std::vector<FeatureWindow> windows;
        for (const Conversation& conv : load_split(config, split_name)) {
            for (FeatureWindow& w : make_windows(conv, embeddings, config.tagger_window, timing)) {
                windows.push_back(std::move(w));
            }
        }
        return windows;
    };
    std::vector<FeatureWindow> train_windows = windows_for("train");
    std::vector<FeatureWindow> val_windows = windows_for("val");

    CnnOptions options;
    CnnModel model = make_cnn(
        default_architecture(embeddings.dim() + 3, config.tagger_filters, config.tagger_final_dilation2),
        options, config.tagger_train_seed());

    TrainSchedule schedule;
    schedule.batch_size = config.tagger_batch_size;
    schedule.epochs = config.tagger_epochs;
    schedule.initial_lr = config.tagger_lr;
    schedule.seed = config.tagger_train_seed();

    TrainedTagger trained = train_model(train_windows, val_windows, std::move(model), schedule);

    save_checkpoint(trained.model, (fs::path(config.out_dir) / "model.ckpt").string());
    {
        auto out = open_output(fs::path(config.out_dir) / "training_log.tsv");
        char buf[160];
        for (const EpochLog& e : trained.log) {
            std::snprintf(buf, sizeof(buf), "%zu\t%.17g\t%.17g\t%.17g\n", e.epoch, e.train_loss,
                          e.val_loss, e.lr);
            out << buf;
        }
    }
    std::cout << "trained tagger for " << trained.log.size() << " epochs, best val loss "
              << evaluate_loss(trained.model, val_windows) << "\n";
    return 0;
}

int cmd_evaluate(const CommonArgs& args) {
    PipelineConfig config = resolve_config(args);
    EmbeddingTable embeddings = load_tagger_embeddings(config);
    CnnModel model = load_checkpoint((fs::path(config.out_dir) / "model.ckpt").string());
    TimingOptions timing{config.offset_within_speaker};

    std::vector<PunctuationClass> preds, golds;
    for (const Conversation& conv : load_split(config, "test")) {
        std::vector<PunctuationClass> p =
            predict(model, conv, embeddings, config.tagger_window, timing);
        for (std::size_t i = 0; i < conv.tokens.size(); ++i) {
            preds.push_back(p[i]);
            golds.push_back(*conv.tokens[i].label);
        }
    }
    auto [metrics, confusion] = score(preds, golds);
    {
        auto out = open_output(fs::path(config.out_dir) / "metrics.tsv");
        write_metrics(metrics, out);
    }
    {
        auto out = open_output(fs::path(config.out_dir) / "confusion.tsv");
        write_confusion(confusion, out);
    }
    {
        auto out = open_output(fs::path(config.out_dir) / "report.txt");
        write_report(metrics, confusion, out);
    }
    std::cout << "evaluated " << preds.size() << " tokens, accuracy " << metrics.accuracy << "\n";
    return 0;
}

int cmd_predict(const CommonArgs& args, const std::string& input_path,
                const std::string& output_path) {
    PipelineConfig config = resolve_config(args);
    EmbeddingTable embeddings = load_tagger_embeddings(config);
    CnnModel model = load_checkpoint((fs::path(config.out_dir) / "model.ckpt").string());

    std::ifstream in(input_path);
    if (!in) throw Error("cannot open input transcript '" + input_path + "'");
    Conversation conv = parse_time_annotated(in, fs::path(input_path).stem().string());
    std::vector<PunctuationClass> classes =
        predict(model, conv, embeddings, config.tagger_window, TimingOptions{config.offset_within_speaker});

    std::string rendered;
    for (std::size_t i = 0; i < conv.tokens.size(); ++i) {
        if (i > 0) rendered += ' ';
        rendered += conv.tokens[i].text;
        rendered += class_mark(classes[i]);
    }
    rendered += '\n';
    if (!output_path.empty()) {
        auto out = open_output(output_path);
        out << rendered;
    }
    std::cout << rendered;
    return 0;
}

int cmd_similarity(const CommonArgs& args, const std::string& pairs_path, std::string original_path,
                   std::string retrofitted_path) {
    PipelineConfig config = resolve_config(args);
    if (original_path.empty()) original_path = config.pretrained;
    if (retrofitted_path.empty()) {
        retrofitted_path = (fs::path(config.out_dir) / "embeddings_retrofitted.txt").string();
    }
    if (original_path.empty()) throw Error("similarity needs --original or paths.pretrained");
    EmbeddingTable original = load_pretrained_file(original_path, config.emb_dim);
    EmbeddingTable retrofitted = load_pretrained_file(retrofitted_path, config.emb_dim);

    std::ifstream in(pairs_path);
    if (!in) throw Error("cannot open pairs file '" + pairs_path + "'");
    std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::size_t bar = line.find('|');
        if (bar == std::string::npos) {
            throw ParseError("pairs file line " + std::to_string(line_no) + ": expected `phrase a | phrase b`");
        }
        auto words_of = [](const std::string& text) {
            std::vector<std::string> words;
            std::istringstream ws(text);
            std::string w;
            while (ws >> w) {
                std::string norm = normalize_word(w);
                if (!norm.empty()) words.push_back(std::move(norm));
            }
            return words;
        };
        auto a = words_of(line.substr(0, bar));
        auto b = words_of(line.substr(bar + 1));
        if (a.empty() || b.empty()) {
            throw ParseError("pairs file line " + std::to_string(line_no) + ": empty phrase");
        }
        pairs.emplace_back(std::move(a), std::move(b));
    }

    SimilarityReport report = similarity_report(pairs, original, retrofitted);
    auto render = [&report](std::ostream& out) {
        char buf[64];
        for (const SimilarityRow& row : report.rows) {
            std::string a, b;
            for (const std::string& w : row.phrase_a) a += a.empty() ? w : " " + w;
            for (const std::string& w : row.phrase_b) b += b.empty() ? w : " " + w;
            std::snprintf(buf, sizeof(buf), "\t%.6f\t%.6f\n", row.cosine_original,
                          row.cosine_retrofitted);
            out << a << " | " << b << buf;
        }
        out << "increased\t" << report.increased << "\tof\t" << report.rows.size() << '\n';
    };
    auto out = open_output(fs::path(config.out_dir) / "similarity.tsv");
    render(out);
    render(std::cout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"punctuation restoration toolkit for two-channel ASR transcripts"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string predict_input, predict_output;
    std::string pairs_path, original_path, retrofitted_path;

    CLI::App* prepare = app.add_subcommand("prepare", "align transcripts, transfer labels, split");
    CLI::App* cooc = app.add_subcommand("cooc", "build vocabulary and co-occurrence matrix");
    CLI::App* train_emb = app.add_subcommand("train-embeddings", "train GloVe embeddings from scratch");
    CLI::App* retrofit = app.add_subcommand("retrofit", "retrofit pre-trained embeddings (Mittens)");
    CLI::App* train_tagger = app.add_subcommand("train-tagger", "train the CNN punctuation tagger");
    CLI::App* evaluate = app.add_subcommand("evaluate", "score the tagger on the test split");
    CLI::App* predict_cmd = app.add_subcommand("predict", "punctuate a time-annotated transcript");
    CLI::App* similarity = app.add_subcommand("similarity", "compare phrase similarities in two embedding spaces");

    for (CLI::App* cmd : {prepare, cooc, train_emb, retrofit, train_tagger, evaluate, predict_cmd, similarity}) {
        add_common(cmd, common);
    }
    predict_cmd->add_option("--input", predict_input, "time-annotated transcript")->required();
    predict_cmd->add_option("--output", predict_output, "write the punctuated text here too");
    similarity->add_option("--pairs", pairs_path, "pairs file, `phrase a | phrase b` per line")->required();
    similarity->add_option("--original", original_path, "original embedding file");
    similarity->add_option("--retrofitted", retrofitted_path, "retrofitted embedding file");

    try {
        app.parse(argc, argv);
        if (prepare->parsed()) return cmd_prepare(common);
        if (cooc->parsed()) return cmd_cooc(common);
        if (train_emb->parsed()) return run_embedding_training(resolve_config(common), false);
        if (retrofit->parsed()) return run_embedding_training(resolve_config(common), true);
        if (train_tagger->parsed()) return cmd_train_tagger(common);
        if (evaluate->parsed()) return cmd_evaluate(common);
        if (predict_cmd->parsed()) return cmd_predict(common, predict_input, predict_output);
        if (similarity->parsed()) return cmd_similarity(common, pairs_path, original_path, retrofitted_path);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
