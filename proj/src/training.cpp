#include "triage/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "triage/errors.hpp"
#include "triage/rng.hpp"

namespace triage {

namespace {

constexpr double kProbFloor = 1e-12;

double clamp_prob(double p) { return std::min(1.0 - kProbFloor, std::max(kProbFloor, p)); }

} // namespace

void TrainConfig::validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw ValidationError("lambda must lie in [0,1]");
    }
    if (!(lr > 0.0)) {
        throw ValidationError("learning rate must be positive");
    }
    if (batch_size < 1) {
        throw ValidationError("batch_size must be at least 1");
    }
    if (epochs < 1) {
        throw ValidationError("epochs must be at least 1");
    }
    if (!(warmup_ratio >= 0.0 && warmup_ratio < 1.0)) {
        throw ValidationError("warmup_ratio must lie in [0,1)");
    }
    if (eval_every_steps < 1) {
        throw ValidationError("eval_every_steps must be at least 1");
    }
}

FileConfig parse_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open config file: " + path);
    }
    FileConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t"));
        if (trimmed.empty() || trimmed[0] == '#') {
            continue;
        }
        auto eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": expected 'key = value'");
        }
        auto strip = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t"));
            s.erase(s.find_last_not_of(" \t") + 1);
            return s;
        };
        const std::string key = strip(trimmed.substr(0, eq));
        const std::string value = strip(trimmed.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": expected 'key = value'");
        }
        try {
            if (key == "lambda") config.train.lambda = std::stod(value);
            else if (key == "lr") config.train.lr = std::stod(value);
            else if (key == "batch_size") config.train.batch_size = std::stoul(value);
            else if (key == "epochs") config.train.epochs = std::stoul(value);
            else if (key == "warmup_ratio") config.train.warmup_ratio = std::stod(value);
            else if (key == "eval_every_steps") config.train.eval_every_steps = std::stoul(value);
            else if (key == "seed") config.train.seed = std::stoull(value);
            else if (key == "d_model") config.model.d_model = std::stoul(value);
            else if (key == "n_layers") config.model.n_layers = std::stoul(value);
            else if (key == "n_heads") config.model.n_heads = std::stoul(value);
            else if (key == "d_ff") config.model.d_ff = std::stoul(value);
            else if (key == "vocab_size") config.model.vocab_size = std::stoul(value);
            else if (key == "max_len") config.model.max_len = std::stoul(value);
            else {
                throw ValidationError(path + ":" + std::to_string(line_no) +
                                      ": unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": bad value for '" + key + "'");
        } catch (const std::out_of_range&) {
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": value out of range for '" + key + "'");
        }
    }
    return config;
}

TrainExample make_example(const GoldRecord& record, const Vocab& vocab,
                          const Ontology& ontology, std::size_t max_len) {
    TrainExample example;
    Encoded encoded = tokenize(record.text, vocab, max_len);
    example.ids = std::move(encoded.ids);
    example.mask = std::move(encoded.mask);
    example.type_targets.assign(ontology.size(), 0.0);
    for (const auto& name : record.info_types) {
        const int index = ontology.index_of(name);
        if (index < 0) {
            throw ValidationError("label '" + name + "' is not in the ontology");
        }
        example.type_targets[static_cast<std::size_t>(index)] = 1.0;
    }
    example.priority_target = priority_to_score(record.priority);
    return example;
}

double info_type_loss(std::span<const double> type_probs, std::span<const double> targets) {
    if (type_probs.size() != targets.size()) {
        throw std::logic_error("probability/target length mismatch");
    }
    double loss = 0.0;
    for (std::size_t j = 0; j < type_probs.size(); ++j) {
        const double p = clamp_prob(type_probs[j]);
        loss += -targets[j] * std::log(p) - (1.0 - targets[j]) * std::log(1.0 - p);
    }
    return loss;
}

double priority_loss(double priority_score, PriorityLevel gold_level) {
    const double delta = priority_to_score(gold_level) - priority_score;
    return delta * delta;
}

double total_loss(double lambda, double l_it, double l_pri) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw ValidationError("lambda must lie in [0,1]");
    }
    return lambda * l_it + (1.0 - lambda) * l_pri;
}

namespace {

struct ExampleLoss {
    double it = 0.0;
    double pri = 0.0;
};

ExampleLoss example_loss(const ForwardOutput& forward, const TrainExample& example) {
    ExampleLoss loss;
    loss.it = info_type_loss(forward.type_probs, example.type_targets);
    const double delta = example.priority_target - forward.priority_score;
    loss.pri = delta * delta;
    return loss;
}

// Backward through one layer-norm row: dy -> dx given the cached mean/rstd.
void layer_norm_backward_row(const double* input, double mean, double rstd,
                             const std::vector<double>& scale, const double* dy, double* dx,
                             double* dscale, double* dshift) {
    const std::size_t d = scale.size();
    double mean_dxhat = 0.0;
    double mean_dxhat_xhat = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double xhat = (input[j] - mean) * rstd;
        const double dxhat = dy[j] * scale[j];
        dscale[j] += dy[j] * xhat;
        dshift[j] += dy[j];
        mean_dxhat += dxhat;
        mean_dxhat_xhat += dxhat * xhat;
    }
    mean_dxhat /= static_cast<double>(d);
    mean_dxhat_xhat /= static_cast<double>(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double xhat = (input[j] - mean) * rstd;
        const double dxhat = dy[j] * scale[j];
        dx[j] += rstd * (dxhat - mean_dxhat - xhat * mean_dxhat_xhat);
    }
}

// Accumulates the gradient contribution of one example into grads; d_cls is
// the upstream gradient at the [CLS] output row.
void encoder_backward(const ModelParams& params, const EncoderCache& cache,
                      const std::vector<double>& d_cls, ModelParams& grads) {
    const auto& config = params.config;
    const std::size_t seq = config.max_len;
    const std::size_t d = config.d_model;
    const std::size_t heads = config.n_heads;
    const std::size_t d_head = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_head));

    Matrix dx(seq, d);
    for (std::size_t j = 0; j < d; ++j) {
        dx(0, j) = d_cls[j];
    }

    for (std::size_t l = config.n_layers; l-- > 0;) {
        const auto& layer = params.layers[l];
        auto& layer_grads = grads.layers[l];
        const auto& lc = cache.layers[l];

        // second layer-norm
        Matrix d_ff_res(seq, d);
        for (std::size_t t = 0; t < seq; ++t) {
            layer_norm_backward_row(lc.ff_res.row(t), lc.ln2_mean[t], lc.ln2_rstd[t],
                                    layer.ln2_scale, dx.row(t), d_ff_res.row(t),
                                    layer_grads.ln2_scale.data(), layer_grads.ln2_shift.data());
        }

        // feed-forward: ff_res = x1 + gelu(x1 w_ff1) w_ff2
        Matrix d_act = matmul_bt(d_ff_res, layer.w_ff2);      // seq x d_ff
        accumulate_at_b(lc.ff_act, d_ff_res, layer_grads.w_ff2);
        for (std::size_t i = 0; i < d_act.data.size(); ++i) {
            d_act.data[i] *= gelu_derivative(lc.ff_pre.data[i]);
        }
        Matrix d_x1 = matmul_bt(d_act, layer.w_ff1);          // seq x d
        accumulate_at_b(lc.x1, d_act, layer_grads.w_ff1);
        add_inplace(d_x1, d_ff_res);                          // residual path

        // first layer-norm
        Matrix d_attn_res(seq, d);
        for (std::size_t t = 0; t < seq; ++t) {
            layer_norm_backward_row(lc.attn_res.row(t), lc.ln1_mean[t], lc.ln1_rstd[t],
                                    layer.ln1_scale, d_x1.row(t), d_attn_res.row(t),
                                    layer_grads.ln1_scale.data(), layer_grads.ln1_shift.data());
        }

        // attention output projection
        Matrix d_concat = matmul_bt(d_attn_res, layer.w_output);  // seq x d
        accumulate_at_b(lc.heads_concat, d_attn_res, layer_grads.w_output);

        Matrix dq(seq, d);
        Matrix dk(seq, d);
        Matrix dv(seq, d);
        for (std::size_t h = 0; h < heads; ++h) {
            const std::size_t off = h * d_head;
            const Matrix& attn = lc.attn[h];
            for (std::size_t i = 0; i < seq; ++i) {
                const double* d_out = d_concat.row(i) + off;
                const double* a_row = attn.row(i);

                // dv += a^T d_out, and the softmax Jacobian for the scores
                double row_dot = 0.0;
                std::vector<double> d_attn_row(seq, 0.0);
                for (std::size_t j = 0; j < seq; ++j) {
                    const double a = a_row[j];
                    if (a == 0.0) {
                        continue;
                    }
                    double* dv_row = dv.row(j) + off;
                    const double* v_row = lc.v.row(j) + off;
                    double da = 0.0;
                    for (std::size_t c = 0; c < d_head; ++c) {
                        dv_row[c] += a * d_out[c];
                        da += d_out[c] * v_row[c];
                    }
                    d_attn_row[j] = da;
                    row_dot += da * a;
                }
                for (std::size_t j = 0; j < seq; ++j) {
                    const double a = a_row[j];
                    if (a == 0.0) {
                        continue;
                    }
                    const double d_score = a * (d_attn_row[j] - row_dot) * scale;
                    double* dq_row = dq.row(i) + off;
                    double* dk_row = dk.row(j) + off;
                    const double* k_row = lc.k.row(j) + off;
                    const double* q_row = lc.q.row(i) + off;
                    for (std::size_t c = 0; c < d_head; ++c) {
                        dq_row[c] += d_score * k_row[c];
                        dk_row[c] += d_score * q_row[c];
                    }
                }
            }
        }

        // projections back to the layer input
        Matrix d_input = matmul_bt(dq, layer.w_query);
        accumulate_at_b(lc.input, dq, layer_grads.w_query);
        Matrix d_input_k = matmul_bt(dk, layer.w_key);
        accumulate_at_b(lc.input, dk, layer_grads.w_key);
        Matrix d_input_v = matmul_bt(dv, layer.w_value);
        accumulate_at_b(lc.input, dv, layer_grads.w_value);
        add_inplace(d_input, d_input_k);
        add_inplace(d_input, d_input_v);
        add_inplace(d_input, d_attn_res);  // residual path

        dx = std::move(d_input);
    }

    for (std::size_t t = 0; t < seq; ++t) {
        const auto id = static_cast<std::size_t>(cache.ids[t]);
        double* d_tok = grads.token_embedding.row(id);
        double* d_pos = grads.position_embedding.row(t);
        const double* dx_row = dx.row(t);
        for (std::size_t j = 0; j < d; ++j) {
            d_tok[j] += dx_row[j];
            d_pos[j] += dx_row[j];
        }
    }
}

} // namespace

BatchLoss batch_loss(const ModelParams& params, const std::vector<TrainExample>& batch,
                     double lambda) {
    if (batch.empty()) {
        throw ValidationError("batch must be non-empty");
    }
    BatchLoss loss;
    for (const auto& example : batch) {
        Matrix outputs = encoder_forward(params, example.ids, example.mask);
        ForwardOutput forward = mtl_forward(params, outputs);
        const ExampleLoss el = example_loss(forward, example);
        loss.info_type += el.it;
        loss.priority += el.pri;
    }
    const auto b = static_cast<double>(batch.size());
    loss.info_type /= b;
    loss.priority /= b;
    loss.total = total_loss(lambda, loss.info_type, loss.priority);
    return loss;
}

ModelParams backward(const ModelParams& params, const std::vector<TrainExample>& batch,
                     double lambda, BatchLoss* loss_out) {
    if (batch.empty()) {
        throw ValidationError("batch must be non-empty");
    }
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw ValidationError("lambda must lie in [0,1]");
    }
    const auto& config = params.config;
    const std::size_t d = config.d_model;
    const std::size_t n = config.n_types;
    const double batch_scale = 1.0 / static_cast<double>(batch.size());

    ModelParams grads = zeros_like(params);
    BatchLoss loss;

    for (const auto& example : batch) {
        EncoderCache cache;
        Matrix outputs = encoder_forward(params, example.ids, example.mask, &cache);
        ForwardOutput forward = mtl_forward(params, outputs);
        const ExampleLoss el = example_loss(forward, example);
        loss.info_type += el.it;
        loss.priority += el.pri;

        const double* cls = outputs.row(0);
        std::vector<double> d_cls(d, 0.0);

        // information-type head; skipped entirely at lambda == 0 so the
        // gradient matches the priority single task bit for bit
        if (lambda != 0.0) {
            const double it_scale = lambda * batch_scale;
            std::vector<double> d_logits(n);
            for (std::size_t j = 0; j < n; ++j) {
                const double p = forward.type_probs[j];
                const bool clamped = p < kProbFloor || p > 1.0 - kProbFloor;
                d_logits[j] = clamped ? 0.0 : it_scale * (p - example.type_targets[j]);
            }
            for (std::size_t i = 0; i < d; ++i) {
                const double* w_row = params.w_type.row(i);
                double* g_row = grads.w_type.row(i);
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    g_row[j] += cls[i] * d_logits[j];
                    acc += w_row[j] * d_logits[j];
                }
                d_cls[i] += acc;
            }
        }

        // priority head; skipped at lambda == 1
        if (lambda != 1.0) {
            const double s = forward.priority_score;
            const double d_logit = (1.0 - lambda) * batch_scale * 2.0 *
                                   (s - example.priority_target) * s * (1.0 - s);
            for (std::size_t i = 0; i < d; ++i) {
                grads.w_priority(i, 0) += cls[i] * d_logit;
                d_cls[i] += params.w_priority(i, 0) * d_logit;
            }
        }

        encoder_backward(params, cache, d_cls, grads);
    }

    const auto b = static_cast<double>(batch.size());
    loss.info_type /= b;
    loss.priority /= b;
    loss.total = total_loss(lambda, loss.info_type, loss.priority);
    if (loss_out) {
        *loss_out = loss;
    }

    for (const auto& ref : named_tensors(grads)) {
        for (std::size_t i = 0; i < ref.size; ++i) {
            if (!std::isfinite(ref.data[i])) {
                throw std::runtime_error("non-finite gradient in tensor '" + ref.name + "'");
            }
        }
    }
    return grads;
}

AdamState AdamState::init(const ModelParams& params) {
    AdamState state;
    state.m = zeros_like(params);
    state.v = zeros_like(params);
    state.step = 0;
    return state;
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, double lr_t,
               double beta1, double beta2, double epsilon) {
    state.step += 1;
    const double bias1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));

    auto param_refs = named_tensors(params);
    auto grad_refs = named_tensors(const_cast<ModelParams&>(grads));
    auto m_refs = named_tensors(state.m);
    auto v_refs = named_tensors(state.v);
    for (std::size_t r = 0; r < param_refs.size(); ++r) {
        double* theta = param_refs[r].data;
        const double* g = grad_refs[r].data;
        double* m = m_refs[r].data;
        double* v = v_refs[r].data;
        for (std::size_t i = 0; i < param_refs[r].size; ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            const double m_hat = m[i] / bias1;
            const double v_hat = v[i] / bias2;
            theta[i] -= lr_t * m_hat / (std::sqrt(v_hat) + epsilon);
        }
    }
}

double lr_at_step(std::size_t step, std::size_t total_steps, double base_lr,
                  double warmup_ratio) {
    if (total_steps == 0 || step > total_steps) {
        throw ValidationError("step must lie in [0, total_steps]");
    }
    const auto warmup =
        static_cast<std::size_t>(std::llround(warmup_ratio * static_cast<double>(total_steps)));
    if (warmup == 0) {
        // no warmup: pure linear decay
        return base_lr * static_cast<double>(total_steps - step) /
               static_cast<double>(total_steps);
    }
    if (step <= warmup) {
        return base_lr * static_cast<double>(step) / static_cast<double>(warmup);
    }
    return base_lr * static_cast<double>(total_steps - step) /
           static_cast<double>(total_steps - warmup);
}

TrainResult train(const ModelConfig& model_config, const TrainConfig& train_config,
                  const std::vector<GoldRecord>& train_set,
                  const std::vector<GoldRecord>& dev_set, const Ontology& ontology) {
    train_config.validate();
    if (train_set.empty()) {
        throw ValidationError("training set must be non-empty");
    }
    if (model_config.n_types != ontology.size()) {
        throw ValidationError("model n_types must equal the ontology size");
    }

    std::vector<std::string> texts;
    texts.reserve(train_set.size());
    for (const auto& record : train_set) {
        texts.push_back(record.text);
    }
    Vocab vocab = build_vocab(texts, model_config.vocab_size);

    ModelConfig config = model_config;
    config.vocab_size = vocab.size();
    config.validate();

    ModelParams params = init_params(config, train_config.seed);
    AdamState adam = AdamState::init(params);

    std::vector<TrainExample> examples;
    examples.reserve(train_set.size());
    for (const auto& record : train_set) {
        examples.push_back(make_example(record, vocab, ontology, config.max_len));
    }

    std::vector<Tweet> dev_tweets;
    dev_tweets.reserve(dev_set.size());
    for (const auto& record : dev_set) {
        dev_tweets.push_back(to_tweet(record));
    }

    const std::size_t n = examples.size();
    const std::size_t steps_per_epoch = (n + train_config.batch_size - 1) / train_config.batch_size;
    const std::size_t total_steps = steps_per_epoch * train_config.epochs;

    TrainHistory history;
    history.total_steps = total_steps;
    ModelParams best_params = params;
    double best_harm = -1.0;
    std::size_t best_step = 0;

    BatchLoss accum;
    std::size_t accum_batches = 0;
    std::size_t step = 0;

    for (std::size_t epoch = 0; epoch < train_config.epochs; ++epoch) {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) {
            order[i] = i;
        }
        Rng shuffle_rng = Rng::for_epoch(train_config.seed, epoch);
        shuffle_rng.shuffle(order);

        for (std::size_t start = 0; start < n; start += train_config.batch_size) {
            const std::size_t end = std::min(n, start + train_config.batch_size);
            std::vector<TrainExample> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(examples[order[i]]);
            }

            ++step;
            const double lr_t =
                lr_at_step(step, total_steps, train_config.lr, train_config.warmup_ratio);
            BatchLoss loss;
            ModelParams grads = backward(params, batch, train_config.lambda, &loss);
            if (!std::isfinite(loss.total)) {
                throw std::runtime_error("non-finite loss at step " + std::to_string(step));
            }
            adam_step(params, grads, adam, lr_t, train_config.beta1, train_config.beta2,
                      train_config.epsilon);

            accum.total += loss.total;
            accum.info_type += loss.info_type;
            accum.priority += loss.priority;
            ++accum_batches;

            if (step % train_config.eval_every_steps == 0 || step == total_steps) {
                EvalPoint point;
                point.step = step;
                point.l_total = accum.total / static_cast<double>(accum_batches);
                point.l_it = accum.info_type / static_cast<double>(accum_batches);
                point.l_pri = accum.priority / static_cast<double>(accum_batches);
                accum = BatchLoss{};
                accum_batches = 0;

                if (!dev_set.empty()) {
                    auto run = predict_run(params, vocab, dev_tweets, ontology);
                    point.dev = evaluate_all(run, dev_set, ontology);
                    if (point.dev->harm > best_harm) {
                        best_harm = point.dev->harm;
                        best_params = params;
                        best_step = step;
                    }
                }
                history.points.push_back(std::move(point));
            }
        }
    }

    TrainResult result;
    if (dev_set.empty()) {
        result.params = std::move(params);
        history.best_step = total_steps;
        history.best_dev_harm = 0.0;
    } else {
        result.params = std::move(best_params);
        history.best_step = best_step;
        history.best_dev_harm = best_harm;
    }
    result.vocab = std::move(vocab);
    result.history = std::move(history);
    return result;
}

std::vector<GridCell> grid_search(const ModelConfig& model_config,
                                  const TrainConfig& train_config,
                                  const std::vector<GoldRecord>& train_set,
                                  const std::vector<GoldRecord>& dev_set,
                                  const std::vector<double>& lr_grid,
                                  const std::vector<std::size_t>& bs_grid,
                                  const Ontology& ontology) {
    if (lr_grid.empty() || bs_grid.empty()) {
        throw ValidationError("grids must be non-empty");
    }
    if (dev_set.empty()) {
        throw ValidationError("grid search requires a non-empty dev set");
    }
    std::vector<GridCell> cells;
    for (double lr : lr_grid) {
        for (std::size_t bs : bs_grid) {
            TrainConfig cell_config = train_config;
            cell_config.lr = lr;
            cell_config.batch_size = bs;
            TrainResult result = train(model_config, cell_config, train_set, dev_set, ontology);
            cells.push_back({lr, bs, result.history.best_dev_harm});
        }
    }
    std::stable_sort(cells.begin(), cells.end(),
                     [](const GridCell& a, const GridCell& b) { return a.dev_harm > b.dev_harm; });
    return cells;
}

namespace {

std::string format_double(double value) {
    std::ostringstream out;
    out.precision(12);
    out << value;
    return out.str();
}

} // namespace

void write_history_csv(const TrainHistory& history, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot open file for writing: " + path);
    }
    out << "step,L_total,L_it,L_pri,ndcg,aw_hc,aw_a,cf1_h,cf1_a,cacc,perr_h,perr_a,harm\n";
    for (const auto& point : history.points) {
        out << point.step << ',' << format_double(point.l_total) << ','
            << format_double(point.l_it) << ',' << format_double(point.l_pri);
        if (point.dev) {
            const auto& m = *point.dev;
            for (double value : {m.ndcg, m.aw_hc, m.aw_a, m.cf1_h, m.cf1_a, m.cacc, m.perr_h,
                                 m.perr_a, m.harm}) {
                out << ',' << format_double(value);
            }
        } else {
            for (int i = 0; i < 9; ++i) {
                out << ",nan";
            }
        }
        out << '\n';
    }
    if (!out.flush()) {
        throw ValidationError("write failed: " + path);
    }
}

void write_grid_csv(const std::vector<GridCell>& cells, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot open file for writing: " + path);
    }
    out << "lr,batch_size,dev_harm\n";
    for (const auto& cell : cells) {
        out << format_double(cell.lr) << ',' << cell.batch_size << ','
            << format_double(cell.dev_harm) << '\n';
    }
    if (!out.flush()) {
        throw ValidationError("write failed: " + path);
    }
}

} // namespace triage
