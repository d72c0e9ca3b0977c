#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "punct/corpus.hpp"
#include "punct/embeddings.hpp"
#include "punct/rng.hpp"

namespace punct {

// Row-major L x C matrix of doubles; the only tensor shape the tagger needs.
struct Mat {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

inline constexpr double kSeluLambda = 1.0507009873554805;
inline constexpr double kSeluAlpha = 1.6732632423543772;

double selu(double x);
double selu_derivative(double x);  // w.r.t. the pre-activation

struct ConvLayerSpec {
    std::size_t kernel = 3;
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    std::size_t dilation = 1;
};

struct ConvLayer {
    ConvLayerSpec spec;
    std::vector<double> weight;  // [out][kernel][in], row-major
    std::vector<double> bias;    // [out]
};

// Zero same-padding: (kernel-1)*dilation zeros split left/right, extra zero on
// the right when odd, so output length equals input length.
Mat pad_same(const Mat& input, const ConvLayerSpec& spec);
Mat conv1d_forward(const Mat& input, const ConvLayer& layer);

// Six conv layers: kernel 3 everywhere except the kernel-20 final layer,
// dilation 2 on the four hidden layers, SELU after each.
std::vector<ConvLayerSpec> default_architecture(std::size_t input_features,
                                                std::size_t filters = 128,
                                                bool final_dilation2 = false);

struct CnnOptions {
    std::size_t num_classes = 4;
    double dropout = 0.5;        // applied before the classifier, inverted scaling
    double noise_sigma = 0.1;    // added to each pre-activation and the classifier input
    double weight_decay = 1e-3;  // l2 on classifier weights
};

struct CnnModel {
    std::size_t input_features = 0;
    std::size_t num_classes = 4;
    double dropout = 0.5;
    double noise_sigma = 0.1;
    double weight_decay = 1e-3;
    std::vector<ConvLayer> layers;
    std::vector<double> classifier_weight;  // num_classes x hidden, row-major
    std::vector<double> classifier_bias;    // num_classes

    std::size_t hidden() const { return layers.back().spec.out_channels; }
};

// LeCun-normal initialization (variance 1/fan_in), the SELU-compatible scheme.
CnnModel make_cnn(const std::vector<ConvLayerSpec>& specs, const CnnOptions& options,
                  std::uint64_t seed);

// One training sample: window_length tokens with F = d + 3 features each
// (embedding, offset z-score, duration z-score, side indicator). Padding
// positions carry all-zero features and mask = 0.
struct FeatureWindow {
    std::size_t length = 0;
    std::size_t feature_dim = 0;
    std::vector<double> features;     // length x feature_dim, row-major
    std::vector<int> labels;          // length (0 where unlabeled/padded)
    std::vector<std::uint8_t> mask;   // length, 1 = real token
};

inline constexpr std::size_t kDefaultWindowLength = 200;

// Consecutive non-overlapping windows over the merged token sequence; the
// final short window is zero-padded. Out-of-vocabulary tokens get the
// all-zero embedding.
std::vector<FeatureWindow> make_windows(const Conversation& conv, const EmbeddingTable& embeddings,
                                        std::size_t window_length = kDefaultWindowLength,
                                        const TimingOptions& timing = {});

struct ForwardCache {
    std::vector<Mat> padded_inputs;  // per layer
    std::vector<Mat> preacts;        // per layer, post-noise
    Mat classifier_input;            // post-noise, post-dropout
    Mat dropout_scale;               // elementwise 0 or 1/keep (all 1 when off)
    Mat probs;
};

// Runs the conv stack and the per-time-step softmax classifier. In train mode
// Gaussian noise and inverted dropout are sampled from rng (required); in
// inference mode the pass is deterministic and rng may be null.
Mat forward(const CnnModel& model, const FeatureWindow& window, bool train_mode,
            Rng* rng = nullptr, ForwardCache* cache = nullptr);

// Mean cross-entropy over unmasked tokens plus the classifier weight-decay
// term. Throws if every position is masked.
double loss(const Mat& probs, std::span<const int> labels, std::span<const std::uint8_t> mask,
            const CnnModel& model);

struct CnnGradients {
    std::vector<std::vector<double>> layer_weight;
    std::vector<std::vector<double>> layer_bias;
    std::vector<double> classifier_weight;
    std::vector<double> classifier_bias;

    static CnnGradients zeros_like(const CnnModel& model);
};

// Exact gradients of loss() for one window under the noise and dropout draws
// recorded in the cache.
CnnGradients backward(const CnnModel& model, const ForwardCache& cache,
                      std::span<const int> labels, std::span<const std::uint8_t> mask);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t steps = 0;
};

// Standard Adam (beta1 0.9, beta2 0.999, eps 1e-8) with bias correction.
void adam_step(std::span<double> weights, std::span<const double> grads, AdamState& state,
               double lr);

// Halves the learning rate after `patience` epochs without improvement
// (strict decrease by at least min_delta), never below min_lr.
class PlateauScheduler {
public:
    explicit PlateauScheduler(double initial_lr, double factor = 0.5, std::size_t patience = 3,
                              double min_lr = 1e-5, double min_delta = 1e-4);

    // Feed one epoch's validation loss; returns the lr for the next epoch.
    double observe(double validation_loss);
    double lr() const { return lr_; }

private:
    double lr_;
    double factor_;
    double min_lr_;
    double min_delta_;
    std::size_t patience_;
    std::size_t bad_epochs_ = 0;
    double best_;
};

struct TrainSchedule {
    std::size_t batch_size = 256;
    std::size_t epochs = 50;
    double initial_lr = 1e-3;
    double plateau_factor = 0.5;
    std::size_t plateau_patience = 3;
    double min_lr = 1e-5;
    double min_delta = 1e-4;
    std::uint64_t seed = 42;
};

struct EpochLog {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double lr = 0.0;  // lr in effect during this epoch
};

struct TrainedTagger {
    CnnModel model;  // weights of the best validation epoch
    std::vector<EpochLog> log;
};

TrainedTagger train_model(const std::vector<FeatureWindow>& train_windows,
                          const std::vector<FeatureWindow>& val_windows, CnnModel model,
                          const TrainSchedule& schedule);

// Cross-entropy (+ decay) over a window set in inference mode.
double evaluate_loss(const CnnModel& model, const std::vector<FeatureWindow>& windows);

// Argmax class per token; ties resolve to the lowest class index.
std::vector<PunctuationClass> predict(const CnnModel& model, const Conversation& conv,
                                      const EmbeddingTable& embeddings,
                                      std::size_t window_length = kDefaultWindowLength,
                                      const TimingOptions& timing = {});

// Checkpoint: text header (format version, architecture) followed by the
// weights as flat little-endian 64-bit floats in declared layer order.
void save_checkpoint(const CnnModel& model, const std::string& path);
CnnModel load_checkpoint(const std::string& path);

}  // namespace punct
