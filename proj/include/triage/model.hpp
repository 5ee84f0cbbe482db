#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "triage/corpus.hpp"
#include "triage/matrix.hpp"
#include "triage/ontology.hpp"

namespace triage {

// Whole-word vocabulary with fixed reserved slots.
struct Vocab {
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kCls = 2;
    static constexpr int kSep = 3;

    std::vector<std::string> tokens;
    std::unordered_map<std::string, int> ids;

    std::size_t size() const { return tokens.size(); }

    int id_of(const std::string& token) const {
        auto it = ids.find(token);
        return it == ids.end() ? kUnk : it->second;
    }
};

// Lowercases and splits on whitespace and ASCII punctuation; bytes >= 0x80
// are kept so multi-byte UTF-8 words survive as single tokens.
std::vector<std::string> split_words(const std::string& text);

// Reserved tokens plus the most frequent surface tokens, capped at
// size_limit total; ties broken lexicographically. size_limit must be >= 5.
Vocab build_vocab(const std::vector<std::string>& texts, std::size_t size_limit);

struct Encoded {
    std::vector<int> ids;   // length max_len
    std::vector<int> mask;  // 1 for real tokens (incl. [CLS]/[SEP]), 0 for padding
};

// [CLS] body [SEP] padded to max_len; the body is truncated so both specials
// always survive. max_len must be >= 3.
Encoded tokenize(const std::string& text, const Vocab& vocab, std::size_t max_len);

struct ModelConfig {
    std::size_t d_model = 64;
    std::size_t n_layers = 2;
    std::size_t n_heads = 2;
    std::size_t d_ff = 128;
    std::size_t vocab_size = 2000;
    std::size_t max_len = 128;
    std::size_t n_types = 25;

    // Throws ValidationError when dimensions are inconsistent.
    void validate() const;
};

struct LayerParams {
    Matrix w_query, w_key, w_value, w_output;  // d_model x d_model
    std::vector<double> ln1_scale, ln1_shift;  // d_model
    Matrix w_ff1;                              // d_model x d_ff
    Matrix w_ff2;                              // d_ff x d_model
    std::vector<double> ln2_scale, ln2_shift;  // d_model
};

struct ModelParams {
    ModelConfig config;
    Matrix token_embedding;     // vocab_size x d_model
    Matrix position_embedding;  // max_len x d_model
    std::vector<LayerParams> layers;
    Matrix w_type;      // d_model x n_types
    Matrix w_priority;  // d_model x 1
};

// Uniform in +-sqrt(6 / (fan_in + fan_out)) per matrix; layer-norm scale 1,
// shift 0. Deterministic per seed.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

// Same shapes, all weights zero.
ModelParams zeros_like(const ModelParams& params);

// Flat view over every parameter tensor in a fixed, documented order; used by
// the optimizer, the checkpoint codec and gradient checks.
struct TensorRef {
    std::string name;
    std::vector<std::size_t> shape;
    double* data = nullptr;
    std::size_t size = 0;
};

std::vector<TensorRef> named_tensors(ModelParams& params);

// Intermediates retained by the forward pass for exact backpropagation.
struct LayerCache {
    Matrix input;                 // seq x d_model, layer input
    Matrix q, k, v;               // seq x d_model
    std::vector<Matrix> attn;     // per head, seq x seq, rows sum to 1 over real tokens
    Matrix heads_concat;          // seq x d_model
    Matrix attn_res;              // input + attention output, pre layer-norm
    std::vector<double> ln1_mean, ln1_rstd;
    Matrix x1;                    // after first layer-norm
    Matrix ff_pre;                // seq x d_ff, pre-activation
    Matrix ff_act;                // gelu(ff_pre)
    Matrix ff_res;                // x1 + feed-forward output, pre layer-norm
    std::vector<double> ln2_mean, ln2_rstd;
};

struct EncoderCache {
    std::vector<int> ids;
    std::vector<int> mask;
    Matrix embedded;  // token + position embeddings
    std::vector<LayerCache> layers;
};

// Token + position embeddings followed by n_layers of post-norm blocks:
// multi-head scaled dot-product self-attention (padding keys masked out
// before the softmax), residual + layer-norm, position-wise GELU
// feed-forward, residual + layer-norm. Returns one vector per position.
Matrix encoder_forward(const ModelParams& params, const std::vector<int>& ids,
                       const std::vector<int>& mask, EncoderCache* cache = nullptr);

struct ForwardOutput {
    Matrix token_outputs;
    std::vector<double> type_logits;
    std::vector<double> type_probs;
    double priority_logit = 0.0;
    double priority_score = 0.0;
};

// Both heads read the [CLS] position: type_probs = sigmoid(o_cls * w_type),
// priority_score = sigmoid(o_cls * w_priority).
ForwardOutput mtl_forward(const ModelParams& params, const Matrix& token_outputs);

double sigmoid(double x);
double gelu(double x);
double gelu_derivative(double x);

inline constexpr double kLayerNormEpsilon = 1e-5;

// One RunRecord per tweet in input order. A type is assigned only when its
// probability is strictly above 0.5.
std::vector<RunRecord> predict_run(const ModelParams& params, const Vocab& vocab,
                                   const std::vector<Tweet>& tweets,
                                   const Ontology& ontology = Ontology::defaults());

} // namespace triage
