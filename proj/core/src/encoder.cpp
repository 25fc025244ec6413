#include "internal/encoder_model.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "snap/errors.hpp"

namespace snap::internal {

namespace {

constexpr double kInitStd = 0.02;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / kSqrt2)); }

double gelu_grad(double x) {
    return 0.5 * (1.0 + std::erf(x / kSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

// y = x * w^T + b, with w stored [out, in] as in HF checkpoints
Eigen::MatrixXd linear(const Eigen::MatrixXd& x, const Param& w, const Param& b) {
    return (x * w.value.transpose()).rowwise() + b.value.row(0);
}

// accumulates dw/db (scaled) and returns dx
Eigen::MatrixXd linear_backward(const Eigen::MatrixXd& dy, const Eigen::MatrixXd& x, Param& w,
                                Param& b) {
    w.grad.noalias() += dy.transpose() * x;
    b.grad.row(0) += dy.colwise().sum();
    return dy * w.value;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
    Eigen::VectorXd out = (z.array() - z.maxCoeff()).exp();
    return out / out.sum();
}

} // namespace

EncoderModel::EncoderModel(const EncoderArchitecture& arch, std::uint64_t seed) : arch_(arch) {
    if (arch.hidden_size <= 0 || arch.num_layers <= 0 || arch.num_heads <= 0 ||
        arch.vocab_size <= 0 || arch.intermediate_size <= 0 || arch.num_classes <= 0)
        throw ConfigError("encoder architecture fields must be positive");
    if (arch.hidden_size % arch.num_heads != 0)
        throw ConfigError("hidden size must be divisible by the head count");

    const int h = arch.hidden_size;
    word_emb_.init("embeddings.word", arch.vocab_size, h);
    pos_emb_.init("embeddings.position", arch.max_position_embeddings, h);
    type_emb_.init("embeddings.token_type", arch.type_vocab_size, h);
    emb_ln_g_.init("embeddings.ln.gamma", 1, h);
    emb_ln_b_.init("embeddings.ln.beta", 1, h);

    layers_.resize(arch.num_layers);
    for (int i = 0; i < arch.num_layers; ++i) {
        const std::string p = "layer." + std::to_string(i) + ".";
        auto& layer = layers_[i];
        layer.q_w.init(p + "attn.q.w", h, h);
        layer.q_b.init(p + "attn.q.b", 1, h);
        layer.k_w.init(p + "attn.k.w", h, h);
        layer.k_b.init(p + "attn.k.b", 1, h);
        layer.v_w.init(p + "attn.v.w", h, h);
        layer.v_b.init(p + "attn.v.b", 1, h);
        layer.attn_out_w.init(p + "attn.out.w", h, h);
        layer.attn_out_b.init(p + "attn.out.b", 1, h);
        layer.attn_ln_g.init(p + "attn.ln.gamma", 1, h);
        layer.attn_ln_b.init(p + "attn.ln.beta", 1, h);
        layer.ffn_in_w.init(p + "ffn.in.w", arch.intermediate_size, h);
        layer.ffn_in_b.init(p + "ffn.in.b", 1, arch.intermediate_size);
        layer.ffn_out_w.init(p + "ffn.out.w", h, arch.intermediate_size);
        layer.ffn_out_b.init(p + "ffn.out.b", 1, h);
        layer.ffn_ln_g.init(p + "ffn.ln.gamma", 1, h);
        layer.ffn_ln_b.init(p + "ffn.ln.beta", 1, h);
    }

    head_dense_w_.init("head.dense.w", h, h);
    head_dense_b_.init("head.dense.b", 1, h);
    head_out_w_.init("head.out.w", arch.num_classes, h);
    head_out_b_.init("head.out.b", 1, arch.num_classes);

    register_params();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, kInitStd);
    for (Param* param : registry_) {
        if (param->name.find("ln.gamma") != std::string::npos ||
            param->name.find("ln.beta") != std::string::npos)
            continue;
        for (Eigen::Index r = 0; r < param->value.rows(); ++r)
            for (Eigen::Index c = 0; c < param->value.cols(); ++c)
                param->value(r, c) = dist(rng);
    }
    // layer norms start at identity, biases at zero
    for (Param* param : registry_) {
        if (param->name.find("ln.gamma") != std::string::npos) param->value.setOnes();
        if (param->name.find("ln.beta") != std::string::npos) param->value.setZero();
        if (param->name.size() > 2 && param->name.substr(param->name.size() - 2) == ".b")
            param->value.setZero();
    }
}

void EncoderModel::register_params() {
    registry_.clear();
    registry_.push_back(&word_emb_);
    registry_.push_back(&pos_emb_);
    registry_.push_back(&type_emb_);
    registry_.push_back(&emb_ln_g_);
    registry_.push_back(&emb_ln_b_);
    for (auto& layer : layers_) {
        for (Param* p : {&layer.q_w, &layer.q_b, &layer.k_w, &layer.k_b, &layer.v_w, &layer.v_b,
                         &layer.attn_out_w, &layer.attn_out_b, &layer.attn_ln_g, &layer.attn_ln_b,
                         &layer.ffn_in_w, &layer.ffn_in_b, &layer.ffn_out_w, &layer.ffn_out_b,
                         &layer.ffn_ln_g, &layer.ffn_ln_b})
            registry_.push_back(p);
    }
    if (!arch_.literal_single_layer_head) {
        registry_.push_back(&head_dense_w_);
        registry_.push_back(&head_dense_b_);
    }
    registry_.push_back(&head_out_w_);
    registry_.push_back(&head_out_b_);
}

Param& EncoderModel::parameter(const std::string& name) {
    for (Param* param : registry_)
        if (param->name == name) return *param;
    throw ConfigError("unknown encoder parameter: " + name);
}

namespace {

Eigen::MatrixXd ln_forward(const Eigen::MatrixXd& x, const Param& gamma, const Param& beta,
                           double eps, Eigen::MatrixXd* xhat_out, Eigen::VectorXd* inv_std_out) {
    const Eigen::Index rows = x.rows(), cols = x.cols();
    Eigen::MatrixXd xhat(rows, cols);
    Eigen::VectorXd inv_std(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        double mean = x.row(r).mean();
        double var = (x.row(r).array() - mean).square().sum() / static_cast<double>(cols);
        double istd = 1.0 / std::sqrt(var + eps);
        xhat.row(r) = (x.row(r).array() - mean) * istd;
        inv_std(r) = istd;
    }
    if (xhat_out) *xhat_out = xhat;
    if (inv_std_out) *inv_std_out = inv_std;
    Eigen::MatrixXd y = xhat;
    for (Eigen::Index r = 0; r < rows; ++r)
        y.row(r) = xhat.row(r).cwiseProduct(gamma.value.row(0)) + beta.value.row(0);
    return y;
}

Eigen::MatrixXd ln_backward(const Eigen::MatrixXd& dy, const Eigen::MatrixXd& xhat,
                            const Eigen::VectorXd& inv_std, Param& gamma, Param& beta) {
    const Eigen::Index rows = dy.rows(), cols = dy.cols();
    gamma.grad.row(0) += dy.cwiseProduct(xhat).colwise().sum();
    beta.grad.row(0) += dy.colwise().sum();
    Eigen::MatrixXd dx(rows, cols);
    const double n = static_cast<double>(cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        Eigen::RowVectorXd dxhat = dy.row(r).cwiseProduct(gamma.value.row(0));
        double mean_dxhat = dxhat.mean();
        double mean_dxhat_xhat = dxhat.cwiseProduct(xhat.row(r)).sum() / n;
        dx.row(r) = inv_std(r) *
                    (dxhat.array() - mean_dxhat - xhat.row(r).array() * mean_dxhat_xhat);
    }
    return dx;
}

} // namespace

void EncoderModel::check_token_ids(const std::vector<int>& token_ids) const {
    if (token_ids.empty()) throw DataError("cannot run the encoder on an empty token sequence");
    if (static_cast<int>(token_ids.size()) > arch_.max_position_embeddings)
        throw DataError("token sequence exceeds the position embedding table");
    for (int id : token_ids)
        if (id < 0 || id >= arch_.vocab_size)
            throw DataError("token id out of vocabulary range: " + std::to_string(id));
}

Eigen::MatrixXd EncoderModel::forward(const std::vector<int>& token_ids, ForwardCache* cache,
                                      double dropout, std::mt19937_64* rng) const {
    check_token_ids(token_ids);
    const Eigen::Index s = static_cast<Eigen::Index>(token_ids.size());
    const int h = arch_.hidden_size;
    const int heads = arch_.num_heads;
    const int dh = h / heads;
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

    Eigen::MatrixXd x(s, h);
    for (Eigen::Index i = 0; i < s; ++i)
        x.row(i) = word_emb_.value.row(token_ids[i]) + pos_emb_.value.row(i) +
                   type_emb_.value.row(0);
    if (cache) cache->embedded = x;

    Eigen::MatrixXd hcur =
        ln_forward(x, emb_ln_g_, emb_ln_b_, arch_.layer_norm_eps,
                   cache ? &cache->emb_ln.xhat : nullptr, cache ? &cache->emb_ln.inv_std : nullptr);
    if (cache) {
        cache->emb_out = hcur;
        cache->layers.resize(layers_.size());
    }

    for (std::size_t li = 0; li < layers_.size(); ++li) {
        const auto& layer = layers_[li];
        LayerCache* lc = cache ? &cache->layers[li] : nullptr;
        if (lc) lc->input = hcur;

        Eigen::MatrixXd q = linear(hcur, layer.q_w, layer.q_b);
        Eigen::MatrixXd k = linear(hcur, layer.k_w, layer.k_b);
        Eigen::MatrixXd v = linear(hcur, layer.v_w, layer.v_b);
        if (lc) {
            lc->q = q;
            lc->k = k;
            lc->v = v;
            lc->attn.resize(heads);
        }

        Eigen::MatrixXd context(s, h);
        for (int head = 0; head < heads; ++head) {
            const Eigen::Index off = static_cast<Eigen::Index>(head) * dh;
            Eigen::MatrixXd scores =
                q.middleCols(off, dh) * k.middleCols(off, dh).transpose() * inv_sqrt_dh;
            Eigen::MatrixXd probs(s, s);
            for (Eigen::Index r = 0; r < s; ++r) {
                Eigen::RowVectorXd row = (scores.row(r).array() - scores.row(r).maxCoeff()).exp();
                probs.row(r) = row / row.sum();
            }
            if (lc) lc->attn[head] = probs;
            context.middleCols(off, dh) = probs * v.middleCols(off, dh);
        }
        if (lc) lc->context = context;

        Eigen::MatrixXd attn_out = linear(context, layer.attn_out_w, layer.attn_out_b);
        Eigen::MatrixXd res1 = hcur + attn_out;
        if (lc) lc->attn_res = res1;
        Eigen::MatrixXd norm1 = ln_forward(res1, layer.attn_ln_g, layer.attn_ln_b,
                                           arch_.layer_norm_eps, lc ? &lc->ln1.xhat : nullptr,
                                           lc ? &lc->ln1.inv_std : nullptr);
        if (lc) lc->ln1_out = norm1;

        Eigen::MatrixXd pre = linear(norm1, layer.ffn_in_w, layer.ffn_in_b);
        Eigen::MatrixXd act = pre.unaryExpr([](double z) { return gelu(z); });
        if (lc) {
            lc->ffn_pre = pre;
            lc->ffn_act = act;
        }
        Eigen::MatrixXd ffn_out = linear(act, layer.ffn_out_w, layer.ffn_out_b);
        Eigen::MatrixXd res2 = norm1 + ffn_out;
        if (lc) lc->ffn_res = res2;
        hcur = ln_forward(res2, layer.ffn_ln_g, layer.ffn_ln_b, arch_.layer_norm_eps,
                          lc ? &lc->ln2.xhat : nullptr, lc ? &lc->ln2.inv_std : nullptr);
        if (lc) lc->output = hcur;
    }

    Eigen::VectorXd cls = hcur.row(0).transpose();
    if (cache) cache->cls = cls;

    auto dropout_mask = [&](Eigen::Index n) {
        Eigen::VectorXd mask = Eigen::VectorXd::Ones(n);
        if (dropout > 0.0 && rng) {
            std::bernoulli_distribution keep(1.0 - dropout);
            for (Eigen::Index i = 0; i < n; ++i)
                mask(i) = keep(*rng) ? 1.0 / (1.0 - dropout) : 0.0;
        }
        return mask;
    };

    Eigen::VectorXd cls_mask = dropout_mask(cls.size());
    Eigen::VectorXd cls_dropped = cls.cwiseProduct(cls_mask);
    if (cache) cache->cls_dropout_mask = cls_mask;

    Eigen::VectorXd scores;
    if (arch_.literal_single_layer_head) {
        Eigen::VectorXd pre =
            head_out_w_.value * cls_dropped + head_out_b_.value.row(0).transpose();
        if (cache) cache->head_scores_pre = pre;
        scores = pre.cwiseMax(0.0);
    } else {
        Eigen::VectorXd hidden_pre =
            head_dense_w_.value * cls_dropped + head_dense_b_.value.row(0).transpose();
        Eigen::VectorXd hidden = hidden_pre.cwiseMax(0.0);
        Eigen::VectorXd hidden_mask = dropout_mask(hidden.size());
        Eigen::VectorXd hidden_dropped = hidden.cwiseProduct(hidden_mask);
        if (cache) {
            cache->head_hidden_pre = hidden_pre;
            cache->head_hidden = hidden_dropped;
            cache->head_dropout_mask = hidden_mask;
        }
        scores = head_out_w_.value * hidden_dropped + head_out_b_.value.row(0).transpose();
    }
    if (cache) cache->scores = scores;
    return scores;
}

Eigen::VectorXd EncoderModel::scores(const std::vector<int>& token_ids) const {
    return forward(token_ids, nullptr, 0.0, nullptr).col(0);
}

double EncoderModel::train_sample(const std::vector<int>& token_ids, int label, double scale,
                                  double dropout, std::mt19937_64& rng) {
    if (label < 0 || label >= arch_.num_classes)
        throw DataError("label index out of range: " + std::to_string(label));

    ForwardCache cache;
    forward(token_ids, &cache, dropout, &rng);

    Eigen::VectorXd probs = softmax(cache.scores);
    const double loss = -std::log(std::max(probs(label), 1e-300));

    // initial gradient carries the batch scale so every parameter gradient
    // below inherits it
    Eigen::VectorXd dscores = probs * scale;
    dscores(label) -= scale;

    Eigen::VectorXd dcls_dropped;
    if (arch_.literal_single_layer_head) {
        Eigen::VectorXd dpre =
            (cache.head_scores_pre.array() > 0.0).select(dscores.array(), 0.0);
        head_out_w_.grad.noalias() += dpre * cache.cls_dropout_mask.cwiseProduct(cache.cls)
                                                 .transpose();
        head_out_b_.grad.row(0) += dpre.transpose();
        dcls_dropped = head_out_w_.value.transpose() * dpre;
    } else {
        head_out_w_.grad.noalias() += dscores * cache.head_hidden.transpose();
        head_out_b_.grad.row(0) += dscores.transpose();
        Eigen::VectorXd dhidden_dropped = head_out_w_.value.transpose() * dscores;
        Eigen::VectorXd dhidden = dhidden_dropped.cwiseProduct(cache.head_dropout_mask);
        Eigen::VectorXd dhidden_pre =
            (cache.head_hidden_pre.array() > 0.0).select(dhidden.array(), 0.0);
        Eigen::VectorXd cls_dropped = cache.cls.cwiseProduct(cache.cls_dropout_mask);
        head_dense_w_.grad.noalias() += dhidden_pre * cls_dropped.transpose();
        head_dense_b_.grad.row(0) += dhidden_pre.transpose();
        dcls_dropped = head_dense_w_.value.transpose() * dhidden_pre;
    }
    Eigen::VectorXd dcls = dcls_dropped.cwiseProduct(cache.cls_dropout_mask);

    const Eigen::Index s = static_cast<Eigen::Index>(token_ids.size());
    const int h = arch_.hidden_size;
    const int heads = arch_.num_heads;
    const int dh = h / heads;
    const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

    Eigen::MatrixXd dh_cur = Eigen::MatrixXd::Zero(s, h);
    dh_cur.row(0) = dcls.transpose();

    for (std::size_t li = layers_.size(); li-- > 0;) {
        auto& layer = layers_[li];
        LayerCache& lc = cache.layers[li];

        // LN2
        Eigen::MatrixXd dres2 =
            ln_backward(dh_cur, lc.ln2.xhat, lc.ln2.inv_std, layer.ffn_ln_g, layer.ffn_ln_b);
        // res2 = ln1_out + ffn_out
        Eigen::MatrixXd dffn_out = dres2;
        Eigen::MatrixXd dnorm1 = dres2;
        // ffn out projection
        Eigen::MatrixXd dact = linear_backward(dffn_out, lc.ffn_act, layer.ffn_out_w,
                                               layer.ffn_out_b);
        Eigen::MatrixXd dpre =
            dact.cwiseProduct(lc.ffn_pre.unaryExpr([](double z) { return gelu_grad(z); }));
        dnorm1 += linear_backward(dpre, lc.ln1_out, layer.ffn_in_w, layer.ffn_in_b);
        // LN1
        Eigen::MatrixXd dres1 =
            ln_backward(dnorm1, lc.ln1.xhat, lc.ln1.inv_std, layer.attn_ln_g, layer.attn_ln_b);
        // res1 = input + attn_out
        Eigen::MatrixXd dinput = dres1;
        Eigen::MatrixXd dattn_out = dres1;
        Eigen::MatrixXd dcontext =
            linear_backward(dattn_out, lc.context, layer.attn_out_w, layer.attn_out_b);

        Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(s, h);
        Eigen::MatrixXd dk = Eigen::MatrixXd::Zero(s, h);
        Eigen::MatrixXd dv = Eigen::MatrixXd::Zero(s, h);
        for (int head = 0; head < heads; ++head) {
            const Eigen::Index off = static_cast<Eigen::Index>(head) * dh;
            const Eigen::MatrixXd& probs = lc.attn[head];
            Eigen::MatrixXd dctx_h = dcontext.middleCols(off, dh);
            Eigen::MatrixXd dprobs = dctx_h * lc.v.middleCols(off, dh).transpose();
            dv.middleCols(off, dh) = probs.transpose() * dctx_h;
            Eigen::MatrixXd dscore(s, s);
            for (Eigen::Index r = 0; r < s; ++r) {
                double dot = dprobs.row(r).cwiseProduct(probs.row(r)).sum();
                dscore.row(r) =
                    (probs.row(r).array() * (dprobs.row(r).array() - dot)).matrix();
            }
            dq.middleCols(off, dh) = dscore * lc.k.middleCols(off, dh) * inv_sqrt_dh;
            dk.middleCols(off, dh) = dscore.transpose() * lc.q.middleCols(off, dh) * inv_sqrt_dh;
        }
        dinput += linear_backward(dq, lc.input, layer.q_w, layer.q_b);
        dinput += linear_backward(dk, lc.input, layer.k_w, layer.k_b);
        dinput += linear_backward(dv, lc.input, layer.v_w, layer.v_b);
        dh_cur = dinput;
    }

    Eigen::MatrixXd dembedded =
        ln_backward(dh_cur, cache.emb_ln.xhat, cache.emb_ln.inv_std, emb_ln_g_, emb_ln_b_);
    for (Eigen::Index i = 0; i < s; ++i) {
        word_emb_.grad.row(token_ids[i]) += dembedded.row(i);
        pos_emb_.grad.row(i) += dembedded.row(i);
        type_emb_.grad.row(0) += dembedded.row(i);
    }
    return loss;
}

void EncoderModel::zero_grad() {
    for (Param* param : registry_) param->grad.setZero();
}

void EncoderModel::adam_step(double learning_rate) {
    ++adam_t_;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(adam_t_));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(adam_t_));
    for (Param* param : registry_) {
        param->m = kAdamBeta1 * param->m + (1.0 - kAdamBeta1) * param->grad;
        param->v = kAdamBeta2 * param->v.array() +
                   (1.0 - kAdamBeta2) * param->grad.array().square();
        param->value.array() -=
            learning_rate * (param->m.array() / bc1) /
            ((param->v.array() / bc2).sqrt() + kAdamEps);
    }
}

std::vector<Eigen::MatrixXd> EncoderModel::snapshot() const {
    std::vector<Eigen::MatrixXd> out;
    out.reserve(registry_.size());
    for (const Param* param : registry_) out.push_back(param->value);
    return out;
}

void EncoderModel::restore(const std::vector<Eigen::MatrixXd>& snapshot) {
    if (snapshot.size() != registry_.size())
        throw ConfigError("parameter snapshot does not match the model");
    for (std::size_t i = 0; i < registry_.size(); ++i) registry_[i]->value = snapshot[i];
}

namespace {

void fill_param(Param& param, const snap::SafetensorsFile& file, const std::string& hf_name) {
    std::string resolved;
    if (file.contains(hf_name)) resolved = hf_name;
    else if (file.contains("bert." + hf_name)) resolved = "bert." + hf_name;
    else throw DataError("checkpoint is missing tensor " + hf_name);

    const auto& info = file.info(resolved);
    const auto data = file.tensor_as_double(resolved);
    Eigen::Index rows = param.value.rows(), cols = param.value.cols();
    if (info.shape.size() == 1) {
        if (rows != 1 || info.shape[0] != cols)
            throw DataError("tensor shape mismatch for " + hf_name);
    } else if (info.shape.size() == 2) {
        if (info.shape[0] != rows || info.shape[1] != cols)
            throw DataError("tensor shape mismatch for " + hf_name);
    } else {
        throw DataError("unsupported tensor rank for " + hf_name);
    }
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            param.value(r, c) = data[static_cast<std::size_t>(r) * cols + c];
}

} // namespace

void EncoderModel::load_backbone(const snap::SafetensorsFile& checkpoint) {
    fill_param(word_emb_, checkpoint, "embeddings.word_embeddings.weight");
    fill_param(pos_emb_, checkpoint, "embeddings.position_embeddings.weight");
    fill_param(type_emb_, checkpoint, "embeddings.token_type_embeddings.weight");
    fill_param(emb_ln_g_, checkpoint, "embeddings.LayerNorm.weight");
    fill_param(emb_ln_b_, checkpoint, "embeddings.LayerNorm.bias");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const std::string p = "encoder.layer." + std::to_string(i) + ".";
        auto& layer = layers_[i];
        fill_param(layer.q_w, checkpoint, p + "attention.self.query.weight");
        fill_param(layer.q_b, checkpoint, p + "attention.self.query.bias");
        fill_param(layer.k_w, checkpoint, p + "attention.self.key.weight");
        fill_param(layer.k_b, checkpoint, p + "attention.self.key.bias");
        fill_param(layer.v_w, checkpoint, p + "attention.self.value.weight");
        fill_param(layer.v_b, checkpoint, p + "attention.self.value.bias");
        fill_param(layer.attn_out_w, checkpoint, p + "attention.output.dense.weight");
        fill_param(layer.attn_out_b, checkpoint, p + "attention.output.dense.bias");
        fill_param(layer.attn_ln_g, checkpoint, p + "attention.output.LayerNorm.weight");
        fill_param(layer.attn_ln_b, checkpoint, p + "attention.output.LayerNorm.bias");
        fill_param(layer.ffn_in_w, checkpoint, p + "intermediate.dense.weight");
        fill_param(layer.ffn_in_b, checkpoint, p + "intermediate.dense.bias");
        fill_param(layer.ffn_out_w, checkpoint, p + "output.dense.weight");
        fill_param(layer.ffn_out_b, checkpoint, p + "output.dense.bias");
        fill_param(layer.ffn_ln_g, checkpoint, p + "output.LayerNorm.weight");
        fill_param(layer.ffn_ln_b, checkpoint, p + "output.LayerNorm.bias");
    }
}

CheckpointFiles resolve_checkpoint(const std::string& backbone_id) {
    const char* cache_root = std::getenv("SNAP_MODEL_CACHE");
    if (cache_root == nullptr || *cache_root == '\0')
        throw ConfigError("SNAP_MODEL_CACHE is not set; point it at a directory holding "
                          "<backbone_id>/config.json, vocab.txt and model.safetensors");
    std::filesystem::path dir = std::filesystem::path(cache_root) / backbone_id;
    CheckpointFiles files;
    files.config_json = dir / "config.json";
    files.vocab_txt = dir / "vocab.txt";
    files.weights = dir / "model.safetensors";
    for (const auto& p : {files.config_json, files.vocab_txt, files.weights})
        if (!std::filesystem::exists(p))
            throw ConfigError("backbone checkpoint not found: missing " + p.string());

    std::ifstream in(files.config_json);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed checkpoint config.json: " + std::string(e.what()));
    }
    const std::string model_type = doc.value("model_type", "bert");
    if (model_type != "bert")
        throw ConfigError("unsupported backbone architecture '" + model_type +
                          "'; only BERT-style encoders are supported");
    EncoderArchitecture arch;
    arch.vocab_size = doc.at("vocab_size").get<int>();
    arch.hidden_size = doc.at("hidden_size").get<int>();
    arch.num_layers = doc.at("num_hidden_layers").get<int>();
    arch.num_heads = doc.at("num_attention_heads").get<int>();
    arch.intermediate_size = doc.at("intermediate_size").get<int>();
    arch.max_position_embeddings = doc.value("max_position_embeddings", 512);
    arch.type_vocab_size = doc.value("type_vocab_size", 2);
    arch.layer_norm_eps = doc.value("layer_norm_eps", 1e-12);
    files.architecture = arch;

    if (doc.contains("do_lower_case")) files.lower_case = doc["do_lower_case"].get<bool>();
    else files.lower_case = backbone_id.find("uncased") != std::string::npos;
    return files;
}

} // namespace snap::internal
