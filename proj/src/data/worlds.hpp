#pragma once

#include <string>
#include <vector>

#include "data/manifest.hpp"
#include "math/tensor.hpp"
#include "induce/mil.hpp"
#include "logic/verify.hpp"
#include "rng.hpp"

namespace abdgen::data {

// Fixed per-world dataset geometry.
struct WorldInfo {
    std::vector<std::size_t> image_shape;
    vq::SymbolSchema schema;
    bool binary_images = false;
    std::size_t max_case_len = 6;
};
WorldInfo world_info(WorldKind kind);

// Procedural dataset generators. Images are written as ABDT tensor files under
// <dir>/images/, clause files as text, and the manifest as manifest.json.
// Labels carry the generating ground truth for every case; training decides
// how much of it is visible.
DatasetManifest gen_mario(const std::string& dir, std::size_t n_cases, std::uint64_t seed);
DatasetManifest gen_shapes(const std::string& dir, std::size_t n_cases, std::uint64_t seed);
DatasetManifest gen_attrib(const std::string& dir, std::size_t n_cases, std::uint64_t seed);

DatasetManifest generate_dataset(WorldKind kind, const std::string& dir, std::size_t n_cases,
                                 std::uint64_t seed);

// Renders the image for one symbol-value assignment (style chosen by the
// tint parameters where the world supports it).
math::Tensor render_values(WorldKind kind, const std::vector<std::size_t>& values, double tint_a,
                           double tint_b);

// --- rule-induction plumbing ------------------------------------------------

// Appends the case's derived relational facts (movement steps, pair values,
// terminate marks) over image constants "<prefix>0".."<prefix>{n-1}".
void append_case_facts(WorldKind kind, const vq::GroundingAssignment& grounding,
                       const std::string& prefix, logic::FactSet& facts);

// The ground goal(s) whose entailment expresses "this case follows the rule".
mil::Goal case_goal(WorldKind kind, const std::string& prefix, std::size_t n_images);

// The generating rule in induction form.
const logic::Program& reference_rule(WorldKind kind);

// Static helper facts needed to evaluate induction-form rules outside the
// full background file (comparison facts for the attribute world).
const logic::Program& world_support(WorldKind kind);

// Every symbol-value case sequence of the desk-scale domain, used to compare
// hypotheses for logical equivalence.
const std::vector<vq::GroundingAssignment>& domain_cases(WorldKind kind);

enum class RuleClass { correct, less_informative, wrong };
const char* rule_class_name(RuleClass c);

// correct: mutually entails the reference's case set; less_informative: its
// entailed set strictly contains the reference's; wrong: anything else.
RuleClass classify_rule(const std::vector<logic::Clause>& hypothesis, WorldKind kind);

// --- generation-time successor search ----------------------------------------

// Candidate next-image symbol assignments in deterministic preference order.
std::vector<std::vector<std::size_t>> successor_values(WorldKind kind,
                                                       const std::vector<std::size_t>& current);

// True when the walk has nothing left to generate from this assignment.
bool at_terminal(WorldKind kind, const std::vector<std::size_t>& current);

// True when the grounding satisfies the world's generating rule (computed
// directly, used by the generators to reject consistent perturbations).
bool rule_consistent(WorldKind kind, const vq::GroundingAssignment& grounding);

}  // namespace abdgen::data
