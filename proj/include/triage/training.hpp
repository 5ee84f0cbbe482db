#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "triage/corpus.hpp"
#include "triage/metrics.hpp"
#include "triage/model.hpp"
#include "triage/ontology.hpp"

namespace triage {

struct TrainConfig {
    double lambda = 0.5;  // weight of the information-type loss
    double lr = 5e-5;
    std::size_t batch_size = 32;
    std::size_t epochs = 12;
    double warmup_ratio = 0.10;
    std::size_t eval_every_steps = 400;
    std::uint64_t seed = 42;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;
};

// Flat key = value file holding both training and model hyperparameters.
struct FileConfig {
    ModelConfig model;
    TrainConfig train;
};

FileConfig parse_train_config(const std::string& path);

// One tokenized training example with its targets.
struct TrainExample {
    std::vector<int> ids;
    std::vector<int> mask;
    std::vector<double> type_targets;  // 0/1 per information type
    double priority_target = 0.0;      // m(gold level)
};

TrainExample make_example(const GoldRecord& record, const Vocab& vocab,
                          const Ontology& ontology, std::size_t max_len);

// Per-example multi-label cross entropy, summed over types; probabilities are
// clamped to [1e-12, 1-1e-12] before the logs.
double info_type_loss(std::span<const double> type_probs, std::span<const double> targets);

double priority_loss(double priority_score, PriorityLevel gold_level);

// lambda * l_it + (1 - lambda) * l_pri
double total_loss(double lambda, double l_it, double l_pri);

struct BatchLoss {
    double total = 0.0;
    double info_type = 0.0;
    double priority = 0.0;
};

// Mean losses over a batch, forward only.
BatchLoss batch_loss(const ModelParams& params, const std::vector<TrainExample>& batch,
                     double lambda);

// Gradient of the mean total loss with respect to every parameter tensor.
// At lambda extremes the excluded head contributes nothing, so the result is
// exactly the corresponding single-task gradient. Throws on non-finite
// gradients, naming the tensor.
ModelParams backward(const ModelParams& params, const std::vector<TrainExample>& batch,
                     double lambda, BatchLoss* loss_out = nullptr);

struct AdamState {
    ModelParams m;
    ModelParams v;
    std::uint64_t step = 0;

    static AdamState init(const ModelParams& params);
};

// Bias-corrected Adam update: theta -= lr_t * m_hat / (sqrt(v_hat) + eps).
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, double lr_t,
               double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8);

// Linear ramp 0 -> base_lr over [0, w] with w = round(warmup_ratio * total),
// then linear decay back to 0 at total_steps.
double lr_at_step(std::size_t step, std::size_t total_steps, double base_lr,
                  double warmup_ratio);

struct EvalPoint {
    std::size_t step = 0;
    double l_total = 0.0;
    double l_it = 0.0;
    double l_pri = 0.0;
    std::optional<MetricReport> dev;
};

struct TrainHistory {
    std::vector<EvalPoint> points;
    std::size_t best_step = 0;
    double best_dev_harm = 0.0;
    std::size_t total_steps = 0;
};

struct TrainResult {
    ModelParams params;
    Vocab vocab;
    TrainHistory history;
};

// Full training loop: vocabulary from the training texts, per-epoch shuffles
// from a dedicated (seed, epoch) stream, Adam with the warmup/decay schedule,
// and dev evaluation every eval_every_steps (plus the final step). Returns
// the checkpoint with the highest dev harmonic mean (earlier step on ties);
// with an empty dev set, the final checkpoint.
TrainResult train(const ModelConfig& model_config, const TrainConfig& train_config,
                  const std::vector<GoldRecord>& train_set,
                  const std::vector<GoldRecord>& dev_set,
                  const Ontology& ontology = Ontology::defaults());

struct GridCell {
    double lr = 0.0;
    std::size_t batch_size = 0;
    double dev_harm = 0.0;
};

inline const std::vector<double> kDefaultLrGrid = {5e-4, 2e-4, 1e-4, 5e-5, 2e-5, 1e-5};
inline const std::vector<std::size_t> kDefaultBatchGrid = {8, 16, 32, 64};

// One full train per (lr, batch size) cell; rows sorted by dev harmonic mean,
// best first.
std::vector<GridCell> grid_search(const ModelConfig& model_config,
                                  const TrainConfig& train_config,
                                  const std::vector<GoldRecord>& train_set,
                                  const std::vector<GoldRecord>& dev_set,
                                  const std::vector<double>& lr_grid = kDefaultLrGrid,
                                  const std::vector<std::size_t>& bs_grid = kDefaultBatchGrid,
                                  const Ontology& ontology = Ontology::defaults());

// `step,L_total,L_it,L_pri,ndcg,aw_hc,aw_a,cf1_h,cf1_a,cacc,perr_h,perr_a,harm`
void write_history_csv(const TrainHistory& history, const std::string& path);

void write_grid_csv(const std::vector<GridCell>& cells, const std::string& path);

} // namespace triage
