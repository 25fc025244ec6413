#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "snap/safetensors.hpp"

namespace snap::internal {

// One trainable tensor with its gradient and Adam moments. Vectors are kept
// as 1xN matrices so every parameter goes through the same update path.
struct Param {
    std::string name;
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;
    Eigen::MatrixXd m;
    Eigen::MatrixXd v;

    void init(const std::string& param_name, Eigen::Index rows, Eigen::Index cols) {
        name = param_name;
        value = Eigen::MatrixXd::Zero(rows, cols);
        grad = Eigen::MatrixXd::Zero(rows, cols);
        m = Eigen::MatrixXd::Zero(rows, cols);
        v = Eigen::MatrixXd::Zero(rows, cols);
    }
};

struct EncoderArchitecture {
    int vocab_size = 0;
    int hidden_size = 0;
    int num_layers = 0;
    int num_heads = 0;
    int intermediate_size = 0;
    int max_position_embeddings = 512;
    int type_vocab_size = 2;
    double layer_norm_eps = 1e-12;
    int num_classes = 0;
    bool literal_single_layer_head = false;
};

// Bidirectional transformer encoder (BERT layout) with a classification head
// on the [CLS] position, in double precision for gradient checking.
class EncoderModel {
public:
    EncoderModel(const EncoderArchitecture& arch, std::uint64_t seed);

    const EncoderArchitecture& architecture() const { return arch_; }
    std::vector<Param*>& parameters() { return registry_; }
    Param& parameter(const std::string& name);

    // copies backbone weights out of a safetensors checkpoint (HF names,
    // with or without the "bert." prefix); the head stays at its random init
    void load_backbone(const snap::SafetensorsFile& checkpoint);

    // per-class raw scores for one tokenized input (no dropout)
    Eigen::VectorXd scores(const std::vector<int>& token_ids) const;

    // forward + backward for one sample; gradients are ACCUMULATED, scaled by
    // `scale` (use 1/batch for a mean-loss batch). Returns the unscaled loss.
    double train_sample(const std::vector<int>& token_ids, int label, double scale,
                        double dropout, std::mt19937_64& rng);

    void zero_grad();
    void adam_step(double learning_rate);

    std::vector<Eigen::MatrixXd> snapshot() const;
    void restore(const std::vector<Eigen::MatrixXd>& snapshot);

private:
    struct LayerParams {
        Param q_w, q_b, k_w, k_b, v_w, v_b;
        Param attn_out_w, attn_out_b, attn_ln_g, attn_ln_b;
        Param ffn_in_w, ffn_in_b, ffn_out_w, ffn_out_b, ffn_ln_g, ffn_ln_b;
    };

    struct LnCache {
        Eigen::MatrixXd xhat;
        Eigen::VectorXd inv_std;
    };

    struct LayerCache {
        Eigen::MatrixXd input; // S x H
        Eigen::MatrixXd q, k, v;
        std::vector<Eigen::MatrixXd> attn; // per head, S x S
        Eigen::MatrixXd context;           // S x H, input of the output projection
        Eigen::MatrixXd attn_res;          // residual sum entering LN1
        LnCache ln1;
        Eigen::MatrixXd ln1_out;
        Eigen::MatrixXd ffn_pre; // S x I, pre-activation
        Eigen::MatrixXd ffn_act; // S x I
        Eigen::MatrixXd ffn_res; // residual sum entering LN2
        LnCache ln2;
        Eigen::MatrixXd output;
    };

    struct ForwardCache {
        Eigen::MatrixXd embedded; // sum of the three embeddings
        LnCache emb_ln;
        Eigen::MatrixXd emb_out;
        std::vector<LayerCache> layers;
        Eigen::VectorXd cls;
        Eigen::VectorXd cls_dropout_mask;
        Eigen::VectorXd head_hidden_pre; // before ReLU
        Eigen::VectorXd head_hidden;
        Eigen::VectorXd head_dropout_mask;
        Eigen::VectorXd head_scores_pre; // literal head: before ReLU
        Eigen::VectorXd scores;
    };

    Eigen::MatrixXd forward(const std::vector<int>& token_ids, ForwardCache* cache,
                            double dropout, std::mt19937_64* rng) const;
    void register_params();
    void check_token_ids(const std::vector<int>& token_ids) const;

    EncoderArchitecture arch_;
    Param word_emb_, pos_emb_, type_emb_, emb_ln_g_, emb_ln_b_;
    std::vector<LayerParams> layers_;
    Param head_dense_w_, head_dense_b_, head_out_w_, head_out_b_;
    std::vector<Param*> registry_;
    std::int64_t adam_t_ = 0;
};

// resolves a checkpoint directory (config.json, vocab.txt, model.safetensors)
// under the SNAP_MODEL_CACHE root; missing pieces raise ConfigError
struct CheckpointFiles {
    std::filesystem::path config_json;
    std::filesystem::path vocab_txt;
    std::filesystem::path weights;
    bool lower_case = false;
    EncoderArchitecture architecture; // num_classes left at 0
};

CheckpointFiles resolve_checkpoint(const std::string& backbone_id);

} // namespace snap::internal
