#pragma once

#include <map>
#include <memory>
#include <string>

#include "orch/abduction.hpp"

namespace abdgen::orch {

struct TrainConfig {
    std::string dataset;
    std::string mode = "no_induction";     // no_induction | induction
    std::uint64_t seed = 0;
    double label_fraction = 0.1;
    std::size_t pool_size = 50;
    std::size_t candidate_budget = 200;
    nn::LossWeights loss_weights;
    double alpha = 1.0;
    std::size_t pretrain_iters = 1200;
    std::size_t train_iters = 1500;        // stage-2 iterations (instances in induction mode)
    std::size_t batch_cases = 6;
    double learning_rate = 1e-3;
    double momentum = 0.9;
    std::string sampler = "attverify";     // attverify | uniform
    std::string induction = "contrastive"; // contrastive | positives_only
    bool bindings = true;
    std::size_t instance_positives = 10;
    std::size_t instance_negatives = 20;
    std::size_t eval_interval = 25;
    std::size_t max_clauses = 4;
    std::size_t att_dim = 32;
    std::size_t rule_window = 50;          // mode over the last N induced rules
    std::string checkpoint_out;
    std::string metrics_out;

    static TrainConfig from_file(const std::string& path);
    static TrainConfig from_json_text(const std::string& text);
};

struct TrainResult {
    double final_accuracy = 0.0;
    std::size_t verify_calls = 0;
    std::string metrics_csv;
    std::string final_rule;                  // canonical text, induction mode
    data::RuleClass final_rule_class = data::RuleClass::wrong;
    std::size_t standstill_negatives = 0;    // across all returned instances
    std::size_t abduction_failures = 0;
    std::size_t discarded_cases = 0;
};

// Owns the dataset, the model+sampler parameter store, and the two-stage
// training loop (pre-training on the labeled subset, then abduction-driven
// training with or without rule induction).
class Trainer {
public:
    explicit Trainer(TrainConfig cfg);

    TrainResult run();

    nn::Model& model() { return *model_; }
    attv::Sampler& sampler() { return *sampler_; }
    math::ParamStore& params() { return params_; }
    const data::DatasetManifest& manifest() const { return manifest_; }
    const logic::Program& background() const { return bk_; }
    const std::vector<Case>& cases() const { return cases_; }
    data::WorldKind kind() const { return manifest_.kind; }

    // Grounding accuracy of the current model on held-out labeled cases.
    double heldout_accuracy() const;

    void save_checkpoint(const std::string& path) const;

private:
    void pretrain_step(Rng& rng, std::size_t iter);
    void train_step_no_induction(Rng& rng, std::size_t iter);
    void train_step_induction(Rng& rng, std::size_t iter);
    void log_row(std::size_t iter, const nn::LossReport& report, std::uint64_t rule_hash);
    std::vector<const Case*> sample_cases(Rng& rng, bool positives_only, std::size_t count,
                                          bool labeled_only);
    void update_sampler_on_disagreement(const Case& c, const vq::GroundingAssignment& initial,
                                        const vq::GroundingAssignment& target);

    TrainConfig cfg_;
    data::DatasetManifest manifest_;
    logic::Program bk_;
    std::vector<mil::Metarule> metarules_;
    std::vector<Case> cases_;
    std::vector<std::size_t> train_positive_, train_negative_, test_positive_, labeled_;

    math::ParamStore params_;
    std::unique_ptr<nn::Model> model_;
    std::unique_ptr<attv::Sampler> sampler_;

    std::string csv_;
    double last_eval_acc_ = 0.0;
    std::size_t verify_calls_ = 0;
    std::vector<std::string> rule_history_;
    std::map<std::string, mil::Hypothesis> rules_seen_;
    TrainResult result_;
};

// Loads a dataset directory into memory.
std::vector<Case> load_cases(const data::DatasetManifest& m, const std::string& dir);

std::uint64_t fnv1a(const std::string& s);

}  // namespace abdgen::orch
