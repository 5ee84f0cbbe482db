#include "triage/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "triage/errors.hpp"
#include "triage/rng.hpp"

namespace triage {

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> words;
    std::string current;
    for (unsigned char c : text) {
        bool keep = c >= 0x80 || std::isalnum(c);
        if (keep) {
            current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c))
                                       : static_cast<char>(c));
        } else if (!current.empty()) {
            words.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        words.push_back(std::move(current));
    }
    return words;
}

Vocab build_vocab(const std::vector<std::string>& texts, std::size_t size_limit) {
    if (size_limit < 5) {
        throw ValidationError("vocabulary size limit must be at least 5");
    }
    std::map<std::string, std::size_t> counts;
    for (const auto& text : texts) {
        for (auto& word : split_words(text)) {
            ++counts[word];
        }
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });

    Vocab vocab;
    vocab.tokens = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
    for (const auto& [word, count] : ranked) {
        (void)count;
        if (vocab.tokens.size() >= size_limit) {
            break;
        }
        vocab.tokens.push_back(word);
    }
    for (std::size_t i = 0; i < vocab.tokens.size(); ++i) {
        vocab.ids.emplace(vocab.tokens[i], static_cast<int>(i));
    }
    return vocab;
}

Encoded tokenize(const std::string& text, const Vocab& vocab, std::size_t max_len) {
    if (max_len < 3) {
        throw ValidationError("max_len must be at least 3");
    }
    Encoded encoded;
    encoded.ids.assign(max_len, Vocab::kPad);
    encoded.mask.assign(max_len, 0);

    encoded.ids[0] = Vocab::kCls;
    std::size_t pos = 1;
    for (const auto& word : split_words(text)) {
        if (pos >= max_len - 1) {
            break;
        }
        encoded.ids[pos++] = vocab.id_of(word);
    }
    encoded.ids[pos] = Vocab::kSep;
    for (std::size_t i = 0; i <= pos; ++i) {
        encoded.mask[i] = 1;
    }
    return encoded;
}

void ModelConfig::validate() const {
    if (d_model == 0 || n_layers == 0 || n_heads == 0 || d_ff == 0 || vocab_size == 0 ||
        n_types == 0) {
        throw ValidationError("all model dimensions must be at least 1");
    }
    if (d_model % n_heads != 0) {
        throw ValidationError("d_model must be divisible by n_heads");
    }
    if (max_len < 3) {
        throw ValidationError("max_len must be at least 3");
    }
    if (vocab_size < 4) {
        throw ValidationError("vocab_size must cover the reserved tokens");
    }
}

namespace {

void fill_uniform(Matrix& m, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (auto& value : m.data) {
        value = rng.uniform(-bound, bound);
    }
}

} // namespace

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);

    ModelParams params;
    params.config = config;
    params.token_embedding = Matrix(config.vocab_size, config.d_model);
    fill_uniform(params.token_embedding, config.vocab_size, config.d_model, rng);
    params.position_embedding = Matrix(config.max_len, config.d_model);
    fill_uniform(params.position_embedding, config.max_len, config.d_model, rng);

    params.layers.resize(config.n_layers);
    for (auto& layer : params.layers) {
        for (Matrix* m : {&layer.w_query, &layer.w_key, &layer.w_value, &layer.w_output}) {
            *m = Matrix(config.d_model, config.d_model);
            fill_uniform(*m, config.d_model, config.d_model, rng);
        }
        layer.ln1_scale.assign(config.d_model, 1.0);
        layer.ln1_shift.assign(config.d_model, 0.0);
        layer.w_ff1 = Matrix(config.d_model, config.d_ff);
        fill_uniform(layer.w_ff1, config.d_model, config.d_ff, rng);
        layer.w_ff2 = Matrix(config.d_ff, config.d_model);
        fill_uniform(layer.w_ff2, config.d_ff, config.d_model, rng);
        layer.ln2_scale.assign(config.d_model, 1.0);
        layer.ln2_shift.assign(config.d_model, 0.0);
    }

    params.w_type = Matrix(config.d_model, config.n_types);
    fill_uniform(params.w_type, config.d_model, config.n_types, rng);
    params.w_priority = Matrix(config.d_model, 1);
    fill_uniform(params.w_priority, config.d_model, 1, rng);
    return params;
}

ModelParams zeros_like(const ModelParams& params) {
    ModelParams z;
    z.config = params.config;
    z.token_embedding = Matrix(params.token_embedding.rows, params.token_embedding.cols);
    z.position_embedding = Matrix(params.position_embedding.rows, params.position_embedding.cols);
    z.layers.resize(params.layers.size());
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        const auto& src = params.layers[i];
        auto& dst = z.layers[i];
        dst.w_query = Matrix(src.w_query.rows, src.w_query.cols);
        dst.w_key = Matrix(src.w_key.rows, src.w_key.cols);
        dst.w_value = Matrix(src.w_value.rows, src.w_value.cols);
        dst.w_output = Matrix(src.w_output.rows, src.w_output.cols);
        dst.ln1_scale.assign(src.ln1_scale.size(), 0.0);
        dst.ln1_shift.assign(src.ln1_shift.size(), 0.0);
        dst.w_ff1 = Matrix(src.w_ff1.rows, src.w_ff1.cols);
        dst.w_ff2 = Matrix(src.w_ff2.rows, src.w_ff2.cols);
        dst.ln2_scale.assign(src.ln2_scale.size(), 0.0);
        dst.ln2_shift.assign(src.ln2_shift.size(), 0.0);
    }
    z.w_type = Matrix(params.w_type.rows, params.w_type.cols);
    z.w_priority = Matrix(params.w_priority.rows, params.w_priority.cols);
    return z;
}

std::vector<TensorRef> named_tensors(ModelParams& params) {
    std::vector<TensorRef> refs;
    auto add_matrix = [&](const std::string& name, Matrix& m) {
        refs.push_back({name, {m.rows, m.cols}, m.data.data(), m.data.size()});
    };
    auto add_vector = [&](const std::string& name, std::vector<double>& v) {
        refs.push_back({name, {v.size()}, v.data(), v.size()});
    };
    add_matrix("token_embedding", params.token_embedding);
    add_matrix("position_embedding", params.position_embedding);
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        auto& layer = params.layers[i];
        const std::string prefix = "layer" + std::to_string(i) + ".";
        add_matrix(prefix + "w_query", layer.w_query);
        add_matrix(prefix + "w_key", layer.w_key);
        add_matrix(prefix + "w_value", layer.w_value);
        add_matrix(prefix + "w_output", layer.w_output);
        add_vector(prefix + "ln1_scale", layer.ln1_scale);
        add_vector(prefix + "ln1_shift", layer.ln1_shift);
        add_matrix(prefix + "w_ff1", layer.w_ff1);
        add_matrix(prefix + "w_ff2", layer.w_ff2);
        add_vector(prefix + "ln2_scale", layer.ln2_scale);
        add_vector(prefix + "ln2_shift", layer.ln2_shift);
    }
    add_matrix("w_type", params.w_type);
    add_matrix("w_priority", params.w_priority);
    return refs;
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * M_SQRT1_2)); }

double gelu_derivative(double x) {
    constexpr double inv_sqrt_2pi = 0.3989422804014327;
    return 0.5 * (1.0 + std::erf(x * M_SQRT1_2)) + x * inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

namespace {

// Per-row normalization; caches mean and reciprocal stddev for the backward
// pass.
void layer_norm(const Matrix& input, const std::vector<double>& scale,
                const std::vector<double>& shift, Matrix& out, std::vector<double>& means,
                std::vector<double>& rstds) {
    const std::size_t d = input.cols;
    means.resize(input.rows);
    rstds.resize(input.rows);
    for (std::size_t t = 0; t < input.rows; ++t) {
        const double* row = input.row(t);
        double mean = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            mean += row[j];
        }
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double delta = row[j] - mean;
            var += delta * delta;
        }
        var /= static_cast<double>(d);
        const double rstd = 1.0 / std::sqrt(var + kLayerNormEpsilon);
        means[t] = mean;
        rstds[t] = rstd;
        double* out_row = out.row(t);
        for (std::size_t j = 0; j < d; ++j) {
            out_row[j] = scale[j] * (row[j] - mean) * rstd + shift[j];
        }
    }
}

} // namespace

Matrix encoder_forward(const ModelParams& params, const std::vector<int>& ids,
                       const std::vector<int>& mask, EncoderCache* cache) {
    const auto& config = params.config;
    const std::size_t seq = config.max_len;
    if (ids.size() != seq || mask.size() != seq) {
        throw std::logic_error("token/mask length must equal max_len");
    }
    const std::size_t d = config.d_model;
    const std::size_t heads = config.n_heads;
    const std::size_t d_head = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_head));

    Matrix x(seq, d);
    for (std::size_t t = 0; t < seq; ++t) {
        const int id = ids[t];
        if (id < 0 || static_cast<std::size_t>(id) >= config.vocab_size) {
            throw std::logic_error("token index out of vocabulary range");
        }
        const double* tok = params.token_embedding.row(static_cast<std::size_t>(id));
        const double* pos = params.position_embedding.row(t);
        double* row = x.row(t);
        for (std::size_t j = 0; j < d; ++j) {
            row[j] = tok[j] + pos[j];
        }
    }

    if (cache) {
        cache->ids = ids;
        cache->mask = mask;
        cache->embedded = x;
        cache->layers.assign(config.n_layers, LayerCache{});
    }

    for (std::size_t l = 0; l < config.n_layers; ++l) {
        const auto& layer = params.layers[l];
        LayerCache* lc = cache ? &cache->layers[l] : nullptr;
        if (lc) {
            lc->input = x;
        }

        Matrix q = matmul(x, layer.w_query);
        Matrix k = matmul(x, layer.w_key);
        Matrix v = matmul(x, layer.w_value);

        Matrix heads_concat(seq, d);
        std::vector<Matrix> attn(heads);
        for (std::size_t h = 0; h < heads; ++h) {
            const std::size_t off = h * d_head;
            Matrix& a = attn[h];
            a = Matrix(seq, seq);
            for (std::size_t i = 0; i < seq; ++i) {
                const double* qi = q.row(i) + off;
                double* arow = a.row(i);
                double max_score = -std::numeric_limits<double>::infinity();
                for (std::size_t j = 0; j < seq; ++j) {
                    if (!mask[j]) {
                        continue;
                    }
                    const double* kj = k.row(j) + off;
                    double dot = 0.0;
                    for (std::size_t c = 0; c < d_head; ++c) {
                        dot += qi[c] * kj[c];
                    }
                    arow[j] = dot * scale;
                    max_score = std::max(max_score, arow[j]);
                }
                double denom = 0.0;
                for (std::size_t j = 0; j < seq; ++j) {
                    if (mask[j]) {
                        arow[j] = std::exp(arow[j] - max_score);
                        denom += arow[j];
                    } else {
                        arow[j] = 0.0;  // masked to -inf before the softmax
                    }
                }
                for (std::size_t j = 0; j < seq; ++j) {
                    arow[j] /= denom;
                }
                double* out = heads_concat.row(i) + off;
                for (std::size_t j = 0; j < seq; ++j) {
                    const double w = arow[j];
                    if (w == 0.0) {
                        continue;
                    }
                    const double* vj = v.row(j) + off;
                    for (std::size_t c = 0; c < d_head; ++c) {
                        out[c] += w * vj[c];
                    }
                }
            }
        }

        Matrix attn_out = matmul(heads_concat, layer.w_output);
        Matrix attn_res = x;
        add_inplace(attn_res, attn_out);

        Matrix x1(seq, d);
        std::vector<double> ln1_mean, ln1_rstd;
        layer_norm(attn_res, layer.ln1_scale, layer.ln1_shift, x1, ln1_mean, ln1_rstd);

        Matrix ff_pre = matmul(x1, layer.w_ff1);
        Matrix ff_act(seq, config.d_ff);
        for (std::size_t i = 0; i < ff_pre.data.size(); ++i) {
            ff_act.data[i] = gelu(ff_pre.data[i]);
        }
        Matrix ff_out = matmul(ff_act, layer.w_ff2);
        Matrix ff_res = x1;
        add_inplace(ff_res, ff_out);

        Matrix x2(seq, d);
        std::vector<double> ln2_mean, ln2_rstd;
        layer_norm(ff_res, layer.ln2_scale, layer.ln2_shift, x2, ln2_mean, ln2_rstd);

        if (lc) {
            lc->q = std::move(q);
            lc->k = std::move(k);
            lc->v = std::move(v);
            lc->attn = std::move(attn);
            lc->heads_concat = std::move(heads_concat);
            lc->attn_res = std::move(attn_res);
            lc->ln1_mean = std::move(ln1_mean);
            lc->ln1_rstd = std::move(ln1_rstd);
            lc->x1 = x1;
            lc->ff_pre = std::move(ff_pre);
            lc->ff_act = std::move(ff_act);
            lc->ff_res = std::move(ff_res);
            lc->ln2_mean = std::move(ln2_mean);
            lc->ln2_rstd = std::move(ln2_rstd);
        }
        x = std::move(x2);
    }
    return x;
}

ForwardOutput mtl_forward(const ModelParams& params, const Matrix& token_outputs) {
    const std::size_t d = params.config.d_model;
    const std::size_t n = params.config.n_types;
    if (token_outputs.cols != d || token_outputs.rows == 0) {
        throw std::logic_error("token output shape does not match configuration");
    }
    ForwardOutput out;
    out.token_outputs = token_outputs;
    const double* cls = token_outputs.row(0);

    out.type_logits.assign(n, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        const double o = cls[i];
        if (o == 0.0) {
            continue;
        }
        const double* wrow = params.w_type.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            out.type_logits[j] += o * wrow[j];
        }
    }
    out.type_probs.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.type_probs[j] = sigmoid(out.type_logits[j]);
    }

    out.priority_logit = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        out.priority_logit += cls[i] * params.w_priority(i, 0);
    }
    out.priority_score = sigmoid(out.priority_logit);
    return out;
}

std::vector<RunRecord> predict_run(const ModelParams& params, const Vocab& vocab,
                                   const std::vector<Tweet>& tweets, const Ontology& ontology) {
    if (ontology.size() != params.config.n_types) {
        throw ValidationError("model predicts " + std::to_string(params.config.n_types) +
                              " types but the ontology defines " +
                              std::to_string(ontology.size()));
    }
    std::vector<RunRecord> records;
    records.reserve(tweets.size());
    for (const auto& tweet : tweets) {
        Encoded encoded = tokenize(tweet.text, vocab, params.config.max_len);
        Matrix outputs = encoder_forward(params, encoded.ids, encoded.mask);
        ForwardOutput forward = mtl_forward(params, outputs);

        RunRecord record;
        record.tweet_id = tweet.tweet_id;
        record.event_id = tweet.event_id;
        for (std::size_t j = 0; j < forward.type_probs.size(); ++j) {
            if (forward.type_probs[j] > 0.5) {
                record.info_types.push_back(ontology.at(j).name);
            }
        }
        record.priority_score = forward.priority_score;
        records.push_back(std::move(record));
    }
    return records;
}

} // namespace triage
