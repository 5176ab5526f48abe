#pragma once

#include <optional>
#include <string>
#include <vector>

#include "attv/sampler.hpp"
#include "data/worlds.hpp"
#include "induce/mil.hpp"
#include "logic/verify.hpp"
#include "nn/model.hpp"
#include "rng.hpp"

namespace abdgen::orch {

// A case: ordered image sequence (first image is the context), polarity, and
// optional ground-truth symbol values.
struct Case {
    std::string id;
    bool positive = true;
    bool train = true;
    std::vector<math::Tensor> images;
    std::optional<vq::GroundingAssignment> labels;
    bool labels_visible = false;
};

enum class AbductionStatus { abduced, discarded, labeled };

struct AbducedCase {
    AbductionStatus status = AbductionStatus::discarded;
    vq::GroundingAssignment values;   // meaningful unless discarded
    vq::GroundingAssignment initial;  // the model's own grounding Y_G
    std::size_t verify_calls = 0;
};

struct AbduceContext {
    const nn::Model* model = nullptr;
    const attv::Sampler* sampler = nullptr;  // null: uniform-sampling ablation
    const logic::Program* bk = nullptr;
    std::size_t pool_size = 50;
};

// Symbol verification loop: accept the model's grounding when consistent,
// otherwise verify sampled candidates in draw order; discard when the pool is
// exhausted.
AbducedCase abduce_labels(const Case& c, const AbduceContext& ctx, Rng& rng);

// --- joint abduction with rule induction -------------------------------------

struct PreparedInstance {
    std::vector<const Case*> positives;
    std::vector<const Case*> negatives;
    // per positive case / image / symbol: value probabilities
    std::vector<std::vector<std::vector<std::vector<double>>>> pos_probs;
    std::vector<vq::GroundingAssignment> pos_argmax;
    std::vector<vq::GroundingAssignment> neg_argmax;

    struct Bound {
        int pcase = -1;  // -1: unbound (bindings disabled)
        std::size_t image = 0;
        std::size_t symbol = 0;
    };
    std::vector<std::vector<std::vector<Bound>>> bindings;  // [neg case][image][symbol]
    std::vector<vq::BindingConstraint> binding_list;
};

// Encodes every instance image and, when enabled, ties each negative slot to
// its nearest positive slot in embedding space.
PreparedInstance prepare_instance(const std::vector<const Case*>& positives,
                                  const std::vector<const Case*>& negatives,
                                  const nn::Model& model, bool bindings_enabled);

struct JointConfig {
    data::WorldKind kind = data::WorldKind::mario;
    const logic::Program* bk = nullptr;
    std::vector<mil::Metarule> metarules;
    std::size_t max_clauses = 4;
    std::size_t candidate_budget = 200;
};

struct JointResult {
    std::vector<vq::GroundingAssignment> positive_values;
    std::vector<vq::GroundingAssignment> negative_values;
    mil::Hypothesis hypothesis;
    double joint_score = 0.0;
    std::size_t candidates_tried = 0;
    std::size_t standstill_negatives = 0;  // negatives returned with a constant grounding
};

// Best-first search over joint positive groundings by descending product
// probability; negatives follow their bindings(or argmax). For each candidate
// the smallest admissible hypothesis is induced; the pair maximizing
// P(H|B,Y) * P(Y|x) wins. Throws AbductionFailure when no candidate within the
// budget admits a hypothesis.
JointResult joint_abduce(const PreparedInstance& inst, const JointConfig& cfg);

}  // namespace abdgen::orch
