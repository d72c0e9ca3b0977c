#include "punct/tagger.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "punct/error.hpp"

namespace punct {

namespace {

void check_finite(const Mat& m, std::size_t layer_index) {
    for (double v : m.data) {
        if (!std::isfinite(v)) {
            throw Error("non-finite activation in conv layer " + std::to_string(layer_index));
        }
    }
}

std::size_t count_unmasked(std::span<const std::uint8_t> mask) {
    std::size_t n = 0;
    for (std::uint8_t m : mask) n += m != 0;
    return n;
}

Mat conv1d_on_padded(const Mat& padded, const ConvLayer& layer, std::size_t out_len) {
    const std::size_t kernel = layer.spec.kernel;
    const std::size_t in_ch = layer.spec.in_channels;
    const std::size_t out_ch = layer.spec.out_channels;
    const std::size_t dilation = layer.spec.dilation;
    Mat out(out_len, out_ch);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t t = 0; t < out_len; ++t) {
        double* orow = out.row(t);
        for (std::size_t o = 0; o < out_ch; ++o) {
            double acc = layer.bias[o];
            const double* w = layer.weight.data() + o * kernel * in_ch;
            for (std::size_t k = 0; k < kernel; ++k) {
                const double* in = padded.row(t + k * dilation);
                const double* wk = w + k * in_ch;
                for (std::size_t c = 0; c < in_ch; ++c) acc += wk[c] * in[c];
            }
            orow[o] = acc;
        }
    }
    return out;
}

// Gradient scale is 1/N where N is the number of unmasked tokens the loss
// averages over (the whole batch during training, one window in backward()).
void backward_into(const CnnModel& model, const ForwardCache& cache, std::span<const int> labels,
                   std::span<const std::uint8_t> mask, double scale, CnnGradients& grads) {
    const std::size_t length = cache.probs.rows;
    const std::size_t classes = model.num_classes;
    const std::size_t hidden = model.hidden();

    Mat dlogits(length, classes);
    for (std::size_t t = 0; t < length; ++t) {
        if (!mask[t]) continue;
        const double* p = cache.probs.row(t);
        double* d = dlogits.row(t);
        for (std::size_t c = 0; c < classes; ++c) d[c] = p[c] * scale;
        d[labels[t]] -= scale;
    }

    // classifier
    for (std::size_t c = 0; c < classes; ++c) {
        double* gw = grads.classifier_weight.data() + c * hidden;
        double gb = 0.0;
        for (std::size_t t = 0; t < length; ++t) {
            double d = dlogits.at(t, c);
            if (d == 0.0) continue;
            const double* h = cache.classifier_input.row(t);
            for (std::size_t k = 0; k < hidden; ++k) gw[k] += d * h[k];
            gb += d;
        }
        grads.classifier_bias[c] += gb;
    }

    // into the hidden sequence (through dropout; the additive noise is identity)
    Mat dcur(length, hidden);
    for (std::size_t t = 0; t < length; ++t) {
        double* dh = dcur.row(t);
        const double* drop = cache.dropout_scale.row(t);
        const double* d = dlogits.row(t);
        for (std::size_t c = 0; c < classes; ++c) {
            double dc = d[c];
            if (dc == 0.0) continue;
            const double* w = model.classifier_weight.data() + c * hidden;
            for (std::size_t k = 0; k < hidden; ++k) dh[k] += dc * w[k];
        }
        for (std::size_t k = 0; k < hidden; ++k) dh[k] *= drop[k];
    }

    for (std::size_t l = model.layers.size(); l-- > 0;) {
        const ConvLayer& layer = model.layers[l];
        const std::size_t kernel = layer.spec.kernel;
        const std::size_t in_ch = layer.spec.in_channels;
        const std::size_t out_ch = layer.spec.out_channels;
        const std::size_t dilation = layer.spec.dilation;
        const Mat& preact = cache.preacts[l];
        const Mat& padded = cache.padded_inputs[l];
        const std::size_t pad_total = (kernel - 1) * dilation;
        const std::size_t pad_left = pad_total / 2;

        // dZ = dA * selu'(Z)
        Mat dz(length, out_ch);
        for (std::size_t t = 0; t < length; ++t) {
            const double* da = dcur.row(t);
            const double* z = preact.row(t);
            double* d = dz.row(t);
            for (std::size_t o = 0; o < out_ch; ++o) d[o] = da[o] * selu_derivative(z[o]);
        }

        std::vector<double>& gw = grads.layer_weight[l];
        std::vector<double>& gb = grads.layer_bias[l];
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::size_t o = 0; o < out_ch; ++o) {
            double bias_sum = 0.0;
            for (std::size_t t = 0; t < length; ++t) {
                double d = dz.at(t, o);
                if (d == 0.0) continue;
                bias_sum += d;
                for (std::size_t k = 0; k < kernel; ++k) {
                    const double* in = padded.row(t + k * dilation);
                    double* g = gw.data() + (o * kernel + k) * in_ch;
                    for (std::size_t c = 0; c < in_ch; ++c) g[c] += d * in[c];
                }
            }
            gb[o] += bias_sum;
        }

        // gradient w.r.t. the padded input; each padded row is owned by one
        // iteration, so the loop is safe to parallelize
        Mat dpadded(padded.rows, in_ch);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::size_t u = 0; u < padded.rows; ++u) {
            double* drow = dpadded.row(u);
            for (std::size_t k = 0; k < kernel; ++k) {
                std::size_t offset = k * dilation;
                if (u < offset) continue;
                std::size_t t = u - offset;
                if (t >= length) continue;
                const double* d = dz.row(t);
                for (std::size_t o = 0; o < out_ch; ++o) {
                    double dv = d[o];
                    if (dv == 0.0) continue;
                    const double* w = layer.weight.data() + (o * kernel + k) * in_ch;
                    for (std::size_t c = 0; c < in_ch; ++c) drow[c] += dv * w[c];
                }
            }
        }

        Mat dinput(length, in_ch);
        for (std::size_t t = 0; t < length; ++t) {
            std::memcpy(dinput.row(t), dpadded.row(t + pad_left), in_ch * sizeof(double));
        }
        dcur = std::move(dinput);
    }
}

void add_decay_gradients(const CnnModel& model, CnnGradients& grads) {
    for (std::size_t k = 0; k < model.classifier_weight.size(); ++k) {
        grads.classifier_weight[k] += 2.0 * model.weight_decay * model.classifier_weight[k];
    }
}

double decay_term(const CnnModel& model) {
    double sum = 0.0;
    for (double w : model.classifier_weight) sum += w * w;
    return model.weight_decay * sum;
}

}  // namespace

double selu(double x) {
    return x > 0.0 ? kSeluLambda * x : kSeluLambda * kSeluAlpha * (std::exp(x) - 1.0);
}

double selu_derivative(double x) {
    return x > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(x);
}

Mat pad_same(const Mat& input, const ConvLayerSpec& spec) {
    const std::size_t pad_total = (spec.kernel - 1) * spec.dilation;
    const std::size_t pad_left = pad_total / 2;
    Mat padded(input.rows + pad_total, input.cols);
    for (std::size_t t = 0; t < input.rows; ++t) {
        std::memcpy(padded.row(t + pad_left), input.row(t), input.cols * sizeof(double));
    }
    return padded;
}

Mat conv1d_forward(const Mat& input, const ConvLayer& layer) {
    require(input.cols == layer.spec.in_channels,
            "conv1d_forward: input has " + std::to_string(input.cols) + " channels, layer expects " +
                std::to_string(layer.spec.in_channels));
    require(layer.weight.size() ==
                layer.spec.out_channels * layer.spec.kernel * layer.spec.in_channels,
            "conv1d_forward: weight shape mismatch");
    Mat padded = pad_same(input, layer.spec);
    return conv1d_on_padded(padded, layer, input.rows);
}

std::vector<ConvLayerSpec> default_architecture(std::size_t input_features, std::size_t filters,
                                                bool final_dilation2) {
    std::vector<ConvLayerSpec> specs;
    specs.push_back({3, input_features, filters, 1});
    for (int l = 0; l < 4; ++l) specs.push_back({3, filters, filters, 2});
    specs.push_back({20, filters, filters, final_dilation2 ? std::size_t{2} : std::size_t{1}});
    return specs;
}

CnnModel make_cnn(const std::vector<ConvLayerSpec>& specs, const CnnOptions& options,
                  std::uint64_t seed) {
    require(!specs.empty(), "make_cnn: at least one conv layer required");
    for (std::size_t l = 1; l < specs.size(); ++l) {
        require(specs[l].in_channels == specs[l - 1].out_channels,
                "make_cnn: channel mismatch between layers " + std::to_string(l - 1) + " and " +
                    std::to_string(l));
    }
    CnnModel model;
    model.input_features = specs.front().in_channels;
    model.num_classes = options.num_classes;
    model.dropout = options.dropout;
    model.noise_sigma = options.noise_sigma;
    model.weight_decay = options.weight_decay;

    Rng rng(seed);
    for (const ConvLayerSpec& spec : specs) {
        ConvLayer layer;
        layer.spec = spec;
        const double stddev = 1.0 / std::sqrt(static_cast<double>(spec.kernel * spec.in_channels));
        layer.weight.resize(spec.out_channels * spec.kernel * spec.in_channels);
        for (double& w : layer.weight) w = rng.normal(0.0, stddev);
        layer.bias.assign(spec.out_channels, 0.0);
        model.layers.push_back(std::move(layer));
    }
    const std::size_t hidden = model.hidden();
    const double cls_stddev = 1.0 / std::sqrt(static_cast<double>(hidden));
    model.classifier_weight.resize(options.num_classes * hidden);
    for (double& w : model.classifier_weight) w = rng.normal(0.0, cls_stddev);
    model.classifier_bias.assign(options.num_classes, 0.0);
    return model;
}

std::vector<FeatureWindow> make_windows(const Conversation& conv, const EmbeddingTable& embeddings,
                                        std::size_t window_length, const TimingOptions& timing) {
    require(window_length >= 1, "make_windows: window length must be >= 1");
    const std::size_t dim = embeddings.dim();
    const std::size_t feature_dim = dim + 3;
    const std::vector<TimingFeatures> feats = timing_features(conv, timing);
    const std::size_t n = conv.tokens.size();
    const std::size_t n_windows = n == 0 ? 0 : (n + window_length - 1) / window_length;

    std::vector<FeatureWindow> windows;
    windows.reserve(n_windows);
    for (std::size_t w = 0; w < n_windows; ++w) {
        FeatureWindow window;
        window.length = window_length;
        window.feature_dim = feature_dim;
        window.features.assign(window_length * feature_dim, 0.0);
        window.labels.assign(window_length, 0);
        window.mask.assign(window_length, 0);
        for (std::size_t p = 0; p < window_length; ++p) {
            const std::size_t i = w * window_length + p;
            if (i >= n) break;
            const Token& token = conv.tokens[i];
            double* row = window.features.data() + p * feature_dim;
            if (const std::vector<double>* vec = embeddings.find(token.text)) {
                std::memcpy(row, vec->data(), dim * sizeof(double));
            }
            row[dim] = feats[i].offset;
            row[dim + 1] = feats[i].duration_z;
            row[dim + 2] = token.side == Side::A ? 0.0 : 1.0;
            window.labels[p] = token.label ? static_cast<int>(*token.label) : 0;
            window.mask[p] = 1;
        }
        windows.push_back(std::move(window));
    }
    return windows;
}

Mat forward(const CnnModel& model, const FeatureWindow& window, bool train_mode, Rng* rng,
            ForwardCache* cache) {
    require(window.feature_dim == model.input_features,
            "forward: window has " + std::to_string(window.feature_dim) +
                " features per token, model expects " + std::to_string(model.input_features));
    require(!train_mode || rng != nullptr, "forward: train mode needs an rng");

    const std::size_t length = window.length;
    Mat cur(length, window.feature_dim);
    std::memcpy(cur.data.data(), window.features.data(), window.features.size() * sizeof(double));

    if (cache != nullptr) {
        cache->padded_inputs.clear();
        cache->preacts.clear();
    }
    const bool add_noise = train_mode && model.noise_sigma > 0.0;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const ConvLayer& layer = model.layers[l];
        Mat padded = pad_same(cur, layer.spec);
        Mat z = conv1d_on_padded(padded, layer, length);
        if (add_noise) {
            for (double& v : z.data) v += rng->normal(0.0, model.noise_sigma);
        }
        check_finite(z, l);
        Mat act(length, layer.spec.out_channels);
        for (std::size_t k = 0; k < z.data.size(); ++k) act.data[k] = selu(z.data[k]);
        if (cache != nullptr) {
            cache->padded_inputs.push_back(std::move(padded));
            cache->preacts.push_back(std::move(z));
        }
        cur = std::move(act);
    }

    const std::size_t hidden = model.hidden();
    if (add_noise) {
        for (double& v : cur.data) v += rng->normal(0.0, model.noise_sigma);
    }
    Mat drop_scale(length, hidden);
    if (train_mode && model.dropout > 0.0) {
        const double keep = 1.0 - model.dropout;
        for (double& s : drop_scale.data) s = rng->uniform() < keep ? 1.0 / keep : 0.0;
        for (std::size_t k = 0; k < cur.data.size(); ++k) cur.data[k] *= drop_scale.data[k];
    } else {
        std::fill(drop_scale.data.begin(), drop_scale.data.end(), 1.0);
    }

    Mat probs(length, model.num_classes);
    for (std::size_t t = 0; t < length; ++t) {
        const double* h = cur.row(t);
        double* p = probs.row(t);
        double max_logit = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < model.num_classes; ++c) {
            const double* w = model.classifier_weight.data() + c * hidden;
            double logit = model.classifier_bias[c];
            for (std::size_t k = 0; k < hidden; ++k) logit += w[k] * h[k];
            p[c] = logit;
            max_logit = std::max(max_logit, logit);
        }
        double sum = 0.0;
        for (std::size_t c = 0; c < model.num_classes; ++c) {
            p[c] = std::exp(p[c] - max_logit);
            sum += p[c];
        }
        for (std::size_t c = 0; c < model.num_classes; ++c) p[c] /= sum;
    }

    if (cache != nullptr) {
        cache->classifier_input = std::move(cur);
        cache->dropout_scale = std::move(drop_scale);
        cache->probs = probs;
    }
    return probs;
}

double loss(const Mat& probs, std::span<const int> labels, std::span<const std::uint8_t> mask,
            const CnnModel& model) {
    require(probs.rows == labels.size() && probs.rows == mask.size(),
            "loss: probs, labels, and mask lengths disagree");
    const std::size_t n = count_unmasked(mask);
    if (n == 0) throw Error("loss: every position in the batch is masked");
    double ce = 0.0;
    for (std::size_t t = 0; t < probs.rows; ++t) {
        if (!mask[t]) continue;
        double p = probs.at(t, labels[t]);
        ce -= std::log(std::max(p, 1e-300));
    }
    return ce / static_cast<double>(n) + decay_term(model);
}

CnnGradients CnnGradients::zeros_like(const CnnModel& model) {
    CnnGradients grads;
    for (const ConvLayer& layer : model.layers) {
        grads.layer_weight.emplace_back(layer.weight.size(), 0.0);
        grads.layer_bias.emplace_back(layer.bias.size(), 0.0);
    }
    grads.classifier_weight.assign(model.classifier_weight.size(), 0.0);
    grads.classifier_bias.assign(model.classifier_bias.size(), 0.0);
    return grads;
}

CnnGradients backward(const CnnModel& model, const ForwardCache& cache, std::span<const int> labels,
                      std::span<const std::uint8_t> mask) {
    require(cache.preacts.size() == model.layers.size(),
            "backward: cache does not match the model (run forward in train mode first)");
    const std::size_t n = count_unmasked(mask);
    if (n == 0) throw Error("backward: every position is masked");
    CnnGradients grads = CnnGradients::zeros_like(model);
    backward_into(model, cache, labels, mask, 1.0 / static_cast<double>(n), grads);
    add_decay_gradients(model, grads);
    return grads;
}

void adam_step(std::span<double> weights, std::span<const double> grads, AdamState& state,
               double lr) {
    require(weights.size() == grads.size(), "adam_step: weight/gradient size mismatch");
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    if (state.m.empty()) {
        state.m.assign(weights.size(), 0.0);
        state.v.assign(weights.size(), 0.0);
    }
    require(state.m.size() == weights.size(), "adam_step: state size mismatch");
    ++state.steps;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.steps));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.steps));
    for (std::size_t k = 0; k < weights.size(); ++k) {
        state.m[k] = beta1 * state.m[k] + (1.0 - beta1) * grads[k];
        state.v[k] = beta2 * state.v[k] + (1.0 - beta2) * grads[k] * grads[k];
        weights[k] -= lr * (state.m[k] / bc1) / (std::sqrt(state.v[k] / bc2) + eps);
    }
}

PlateauScheduler::PlateauScheduler(double initial_lr, double factor, std::size_t patience,
                                   double min_lr, double min_delta)
    : lr_(initial_lr),
      factor_(factor),
      min_lr_(min_lr),
      min_delta_(min_delta),
      patience_(patience),
      best_(std::numeric_limits<double>::infinity()) {}

double PlateauScheduler::observe(double validation_loss) {
    if (validation_loss < best_ - min_delta_ || !std::isfinite(best_)) {
        best_ = validation_loss;
        bad_epochs_ = 0;
    } else {
        ++bad_epochs_;
        if (bad_epochs_ >= patience_) {
            lr_ = std::max(lr_ * factor_, min_lr_);
            bad_epochs_ = 0;
        }
    }
    return lr_;
}

double evaluate_loss(const CnnModel& model, const std::vector<FeatureWindow>& windows) {
    require(!windows.empty(), "evaluate_loss: empty window set");
    double ce_sum = 0.0;
    std::size_t tokens = 0;
    for (const FeatureWindow& window : windows) {
        Mat probs = forward(model, window, /*train_mode=*/false);
        for (std::size_t t = 0; t < window.length; ++t) {
            if (!window.mask[t]) continue;
            ce_sum -= std::log(std::max(probs.at(t, window.labels[t]), 1e-300));
            ++tokens;
        }
    }
    if (tokens == 0) throw Error("evaluate_loss: no unmasked tokens");
    return ce_sum / static_cast<double>(tokens) + decay_term(model);
}

TrainedTagger train_model(const std::vector<FeatureWindow>& train_windows,
                          const std::vector<FeatureWindow>& val_windows, CnnModel model,
                          const TrainSchedule& schedule) {
    require(!train_windows.empty() && !val_windows.empty(),
            "train_model: train and validation sets must be non-empty");
    require(schedule.batch_size >= 1, "train_model: batch size must be >= 1");

    Rng rng(schedule.seed);
    PlateauScheduler scheduler(schedule.initial_lr, schedule.plateau_factor,
                               schedule.plateau_patience, schedule.min_lr, schedule.min_delta);

    AdamState cls_w_state, cls_b_state;
    std::vector<AdamState> layer_w_states(model.layers.size());
    std::vector<AdamState> layer_b_states(model.layers.size());

    std::vector<std::size_t> order(train_windows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainedTagger result;
    double best_val = std::numeric_limits<double>::infinity();
    ForwardCache cache;

    for (std::size_t epoch = 0; epoch < schedule.epochs; ++epoch) {
        const double epoch_lr = scheduler.lr();
        rng.shuffle(order);
        double epoch_ce = 0.0;
        std::size_t epoch_tokens = 0;
        for (std::size_t batch_start = 0, batch_index = 0; batch_start < order.size();
             batch_start += schedule.batch_size, ++batch_index) {
            const std::size_t batch_end =
                std::min(order.size(), batch_start + schedule.batch_size);
            std::size_t batch_tokens = 0;
            for (std::size_t k = batch_start; k < batch_end; ++k) {
                batch_tokens += count_unmasked(train_windows[order[k]].mask);
            }
            if (batch_tokens == 0) continue;

            CnnGradients grads = CnnGradients::zeros_like(model);
            double batch_ce = 0.0;
            for (std::size_t k = batch_start; k < batch_end; ++k) {
                const FeatureWindow& window = train_windows[order[k]];
                Mat probs = forward(model, window, /*train_mode=*/true, &rng, &cache);
                for (std::size_t t = 0; t < window.length; ++t) {
                    if (!window.mask[t]) continue;
                    batch_ce -= std::log(std::max(probs.at(t, window.labels[t]), 1e-300));
                }
                backward_into(model, cache, window.labels, window.mask,
                              1.0 / static_cast<double>(batch_tokens), grads);
            }
            add_decay_gradients(model, grads);
            const double batch_loss = batch_ce / static_cast<double>(batch_tokens) + decay_term(model);
            if (!std::isfinite(batch_loss)) {
                throw Error("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                            ", batch " + std::to_string(batch_index));
            }
            epoch_ce += batch_ce;
            epoch_tokens += batch_tokens;

            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                adam_step(model.layers[l].weight, grads.layer_weight[l], layer_w_states[l], epoch_lr);
                adam_step(model.layers[l].bias, grads.layer_bias[l], layer_b_states[l], epoch_lr);
            }
            adam_step(model.classifier_weight, grads.classifier_weight, cls_w_state, epoch_lr);
            adam_step(model.classifier_bias, grads.classifier_bias, cls_b_state, epoch_lr);
        }

        const double train_loss =
            epoch_ce / static_cast<double>(std::max<std::size_t>(epoch_tokens, 1)) + decay_term(model);
        const double val_loss = evaluate_loss(model, val_windows);
        if (!std::isfinite(val_loss)) {
            throw Error("training diverged: non-finite validation loss at epoch " +
                        std::to_string(epoch));
        }
        if (val_loss < best_val) {
            best_val = val_loss;
            result.model = model;
        }
        result.log.push_back({epoch, train_loss, val_loss, epoch_lr});
        scheduler.observe(val_loss);
    }
    return result;
}

std::vector<PunctuationClass> predict(const CnnModel& model, const Conversation& conv,
                                      const EmbeddingTable& embeddings, std::size_t window_length,
                                      const TimingOptions& timing) {
    std::vector<PunctuationClass> out;
    out.reserve(conv.tokens.size());
    for (const FeatureWindow& window : make_windows(conv, embeddings, window_length, timing)) {
        Mat probs = forward(model, window, /*train_mode=*/false);
        for (std::size_t t = 0; t < window.length; ++t) {
            if (!window.mask[t]) continue;
            const double* p = probs.row(t);
            std::size_t best = 0;
            for (std::size_t c = 1; c < model.num_classes; ++c) {
                if (p[c] > p[best]) best = c;
            }
            out.push_back(static_cast<PunctuationClass>(best));
        }
    }
    return out;
}

void save_checkpoint(const CnnModel& model, const std::string& path) {
    static_assert(sizeof(double) == 8);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open checkpoint file '" + path + "' for writing");
    char buf[160];
    out << "PUNCT-CNN v1\n";
    out << "input_features " << model.input_features << '\n';
    out << "classes " << model.num_classes << '\n';
    std::snprintf(buf, sizeof(buf), "dropout %.17g\nnoise_sigma %.17g\nweight_decay %.17g\n",
                  model.dropout, model.noise_sigma, model.weight_decay);
    out << buf;
    out << "layers " << model.layers.size() << '\n';
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const ConvLayerSpec& s = model.layers[l].spec;
        out << "layer " << l << ' ' << s.kernel << ' ' << s.in_channels << ' ' << s.out_channels
            << ' ' << s.dilation << '\n';
    }
    out << "end_header\n";
    auto write_block = [&out](const std::vector<double>& block) {
        out.write(reinterpret_cast<const char*>(block.data()),
                  static_cast<std::streamsize>(block.size() * sizeof(double)));
    };
    for (const ConvLayer& layer : model.layers) {
        write_block(layer.weight);
        write_block(layer.bias);
    }
    write_block(model.classifier_weight);
    write_block(model.classifier_bias);
    if (!out) throw Error("failed writing checkpoint '" + path + "'");
}

CnnModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint file '" + path + "'");
    std::string line;
    auto next_line = [&]() {
        if (!std::getline(in, line)) throw ParseError("checkpoint '" + path + "': truncated header");
        return line;
    };
    if (next_line() != "PUNCT-CNN v1") {
        throw ParseError("checkpoint '" + path + "': unrecognized format");
    }
    CnnModel model;
    std::vector<ConvLayerSpec> specs;
    std::size_t n_layers = 0;
    while (next_line() != "end_header") {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "input_features") ls >> model.input_features;
        else if (key == "classes") ls >> model.num_classes;
        else if (key == "dropout") ls >> model.dropout;
        else if (key == "noise_sigma") ls >> model.noise_sigma;
        else if (key == "weight_decay") ls >> model.weight_decay;
        else if (key == "layers") ls >> n_layers;
        else if (key == "layer") {
            std::size_t idx = 0;
            ConvLayerSpec spec;
            ls >> idx >> spec.kernel >> spec.in_channels >> spec.out_channels >> spec.dilation;
            specs.push_back(spec);
        } else {
            throw ParseError("checkpoint '" + path + "': unknown header key '" + key + "'");
        }
        if (!ls) throw ParseError("checkpoint '" + path + "': malformed header line '" + line + "'");
    }
    if (specs.size() != n_layers || specs.empty()) {
        throw ParseError("checkpoint '" + path + "': layer count mismatch");
    }
    auto read_block = [&in, &path](std::vector<double>& block, std::size_t count) {
        block.resize(count);
        in.read(reinterpret_cast<char*>(block.data()),
                static_cast<std::streamsize>(count * sizeof(double)));
        if (in.gcount() != static_cast<std::streamsize>(count * sizeof(double))) {
            throw ParseError("checkpoint '" + path + "': truncated weight data");
        }
    };
    for (const ConvLayerSpec& spec : specs) {
        ConvLayer layer;
        layer.spec = spec;
        read_block(layer.weight, spec.out_channels * spec.kernel * spec.in_channels);
        read_block(layer.bias, spec.out_channels);
        model.layers.push_back(std::move(layer));
    }
    read_block(model.classifier_weight, model.num_classes * model.hidden());
    read_block(model.classifier_bias, model.num_classes);
    char extra = 0;
    if (in.read(&extra, 1)) throw ParseError("checkpoint '" + path + "': trailing data");
    return model;
}

}  // namespace punct
