#include "orch/trainer.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"
#include "logic/parser.hpp"

namespace abdgen::orch {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

TrainConfig TrainConfig::from_json_text(const std::string& text) {
    json j = json::parse(text);
    TrainConfig cfg;
    auto get = [&j](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("dataset", cfg.dataset);
    get("mode", cfg.mode);
    get("seed", cfg.seed);
    get("label_fraction", cfg.label_fraction);
    get("pool_size", cfg.pool_size);
    get("candidate_budget", cfg.candidate_budget);
    if (j.contains("loss_weights")) {
        const json& w = j.at("loss_weights");
        if (w.contains("grounding")) cfg.loss_weights.grounding = w.at("grounding").get<double>();
        if (w.contains("reconstruction"))
            cfg.loss_weights.reconstruction = w.at("reconstruction").get<double>();
        if (w.contains("adv")) cfg.loss_weights.adv = w.at("adv").get<double>();
        if (w.contains("gan")) cfg.loss_weights.gan = w.at("gan").get<double>();
    }
    get("alpha", cfg.alpha);
    get("pretrain_iters", cfg.pretrain_iters);
    get("train_iters", cfg.train_iters);
    get("batch_cases", cfg.batch_cases);
    get("learning_rate", cfg.learning_rate);
    get("momentum", cfg.momentum);
    get("sampler", cfg.sampler);
    get("induction", cfg.induction);
    get("bindings", cfg.bindings);
    get("instance_positives", cfg.instance_positives);
    get("instance_negatives", cfg.instance_negatives);
    get("eval_interval", cfg.eval_interval);
    get("max_clauses", cfg.max_clauses);
    get("att_dim", cfg.att_dim);
    get("rule_window", cfg.rule_window);
    get("checkpoint_out", cfg.checkpoint_out);
    get("metrics_out", cfg.metrics_out);
    if (cfg.mode != "no_induction" && cfg.mode != "induction")
        throw ConfigError("mode must be no_induction or induction");
    if (cfg.sampler != "attverify" && cfg.sampler != "uniform")
        throw ConfigError("sampler must be attverify or uniform");
    if (cfg.induction != "contrastive" && cfg.induction != "positives_only")
        throw ConfigError("induction must be contrastive or positives_only");
    return cfg;
}

TrainConfig TrainConfig::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return from_json_text(ss.str());
}

std::vector<Case> load_cases(const data::DatasetManifest& m, const std::string& dir) {
    std::vector<Case> cases;
    for (const data::CaseEntry& e : m.cases) {
        Case c;
        c.id = e.id;
        c.positive = e.positive;
        c.train = e.train;
        c.labels = e.labels;
        for (const std::string& rel : e.images)
            c.images.push_back(math::load_tensor((fs::path(dir) / rel).string()));
        cases.push_back(std::move(c));
    }
    return cases;
}

Trainer::Trainer(TrainConfig cfg) : cfg_(std::move(cfg)) {
    manifest_ = data::load_manifest(cfg_.dataset);
    cases_ = load_cases(manifest_, cfg_.dataset);

    {
        std::ifstream is(fs::path(cfg_.dataset) / manifest_.bk_file);
        if (!is) throw ConfigError("missing background file " + manifest_.bk_file);
        std::stringstream ss;
        ss << is.rdbuf();
        bk_ = logic::parse_program(ss.str());
    }
    if (!manifest_.metarule_file.empty()) {
        std::ifstream is(fs::path(cfg_.dataset) / manifest_.metarule_file);
        if (is) {
            std::stringstream ss;
            ss << is.rdbuf();
            metarules_ = mil::parse_metarules(ss.str());
        }
    }
    if (cfg_.mode == "induction" && metarules_.empty())
        throw ConfigError("induction mode needs a metarule file");

    for (std::size_t i = 0; i < cases_.size(); ++i) {
        if (!cases_[i].train) {
            if (cases_[i].positive) test_positive_.push_back(i);
        } else if (cases_[i].positive) {
            train_positive_.push_back(i);
        } else {
            train_negative_.push_back(i);
        }
    }
    if (train_positive_.empty()) throw ConfigError("dataset has no positive training cases");

    // Label visibility: a seed-stable subset of the training cases.
    Rng label_rng(cfg_.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<std::size_t> all_train = train_positive_;
    all_train.insert(all_train.end(), train_negative_.begin(), train_negative_.end());
    label_rng.shuffle(all_train);
    std::size_t visible =
        static_cast<std::size_t>(std::ceil(cfg_.label_fraction * all_train.size()));
    visible = std::min(visible, all_train.size());
    for (std::size_t k = 0; k < visible; ++k) {
        cases_[all_train[k]].labels_visible = true;
        labeled_.push_back(all_train[k]);
    }
    std::sort(labeled_.begin(), labeled_.end());
    if (labeled_.empty()) throw ConfigError("label_fraction leaves no labeled cases");

    // Model and sampler share the parameter store (one checkpoint).
    nn::ModelConfig mc;
    mc.img_c = manifest_.image_shape.at(0);
    mc.img_h = manifest_.image_shape.at(1);
    mc.img_w = manifest_.image_shape.at(2);
    mc.schema = manifest_.schema;
    mc.binary_images = manifest_.binary_images;
    mc.alpha = cfg_.alpha;
    mc.weights = cfg_.loss_weights;
    Rng init_rng(cfg_.seed);
    model_ = std::make_unique<nn::Model>(mc, params_, init_rng);

    attv::SamplerConfig sc;
    sc.schema = manifest_.schema;
    sc.max_case_len = manifest_.max_case_len;
    sc.rule_count = std::max<std::size_t>(1, bk_.rule_groups.size());
    sc.att_dim = cfg_.att_dim;
    sampler_ = std::make_unique<attv::Sampler>(sc, params_, init_rng);

    csv_ = "iter,loss_grounding,loss_recon,loss_adv,loss_gan,loss_total,grounding_acc,"
           "verify_calls,rule_hash\n";
}

double Trainer::heldout_accuracy() const {
    std::size_t total = 0, hits = 0;
    const auto& eval_set = test_positive_.empty() ? train_positive_ : test_positive_;
    for (std::size_t idx : eval_set) {
        const Case& c = cases_[idx];
        if (!c.labels) continue;
        for (std::size_t img = 0; img < c.images.size(); ++img) {
            auto pred = model_->predict_values(c.images[img]);
            for (std::size_t s = 0; s < pred.size(); ++s) {
                ++total;
                if (pred[s] == (*c.labels)[img][s]) ++hits;
            }
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
}

std::vector<const Case*> Trainer::sample_cases(Rng& rng, bool positives_only, std::size_t count,
                                               bool labeled_only) {
    const std::vector<std::size_t>& pool =
        labeled_only ? labeled_ : (positives_only ? train_positive_ : train_negative_);
    std::vector<const Case*> out;
    for (std::size_t k = 0; k < count; ++k)
        out.push_back(&cases_[pool[rng.index(pool.size())]]);
    return out;
}

void Trainer::update_sampler_on_disagreement(const Case& c,
                                             const vq::GroundingAssignment& initial,
                                             const vq::GroundingAssignment& target) {
    if (cfg_.sampler != "attverify") return;
    std::vector<std::vector<bool>> mask(initial.size());
    bool any = false;
    for (std::size_t i = 0; i < initial.size(); ++i) {
        for (std::size_t s = 0; s < initial[i].size(); ++s) {
            bool differ = initial[i][s] != target[i][s];
            mask[i].push_back(differ);
            any = any || differ;
        }
    }
    if (!any) return;
    auto report = logic::verify_case(bk_, manifest_.schema, initial, c.id);
    ++verify_calls_;
    sampler_->update(initial, report, model_->codebooks(), target, mask, cfg_.learning_rate,
                     cfg_.momentum);
}

void Trainer::log_row(std::size_t iter, const nn::LossReport& report, std::uint64_t rule_hash) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%zu,%016llx\n", iter,
                  report.grounding_ce, report.reconstruction, report.adv, report.gan,
                  report.total, last_eval_acc_, verify_calls_,
                  static_cast<unsigned long long>(rule_hash));
    csv_ += buf;
}

void Trainer::pretrain_step(Rng& rng, std::size_t iter) {
    std::vector<const Case*> batch_cases =
        sample_cases(rng, false, std::min(cfg_.batch_cases, labeled_.size()), true);
    std::vector<nn::BatchItem> items;
    for (const Case* c : batch_cases)
        for (std::size_t img = 0; img < c->images.size(); ++img)
            items.push_back({&c->images[img], (*c->labels)[img]});
    nn::LossReport report = model_->train_step(items, cfg_.learning_rate, cfg_.momentum, rng);

    // The verification sampler pre-trains against the ground-truth labels on
    // every slot.
    if (cfg_.sampler == "attverify") {
        for (const Case* c : batch_cases) {
            vq::GroundingAssignment initial;
            for (const auto& img : c->images) initial.push_back(model_->predict_values(img));
            auto rep = logic::verify_case(bk_, manifest_.schema, initial, c->id);
            std::vector<std::vector<bool>> mask(initial.size());
            for (std::size_t i = 0; i < initial.size(); ++i)
                mask[i].assign(initial[i].size(), true);
            sampler_->update(initial, rep, model_->codebooks(), *c->labels, mask,
                             cfg_.learning_rate, cfg_.momentum);
        }
    }
    if (iter % cfg_.eval_interval == 0) last_eval_acc_ = heldout_accuracy();
    log_row(iter, report, 0);
}

void Trainer::train_step_no_induction(Rng& rng, std::size_t iter) {
    std::vector<const Case*> batch_cases = sample_cases(rng, true, cfg_.batch_cases, false);
    AbduceContext ctx{model_.get(), cfg_.sampler == "attverify" ? sampler_.get() : nullptr, &bk_,
                      cfg_.pool_size};

    std::vector<nn::BatchItem> items;
    struct SamplerWork {
        const Case* c;
        vq::GroundingAssignment initial, target;
    };
    std::vector<SamplerWork> sampler_work;

    for (const Case* c : batch_cases) {
        if (c->labels_visible) {
            for (std::size_t img = 0; img < c->images.size(); ++img)
                items.push_back({&c->images[img], (*c->labels)[img]});
            continue;
        }
        AbducedCase abd = abduce_labels(*c, ctx, rng);
        verify_calls_ += abd.verify_calls;
        if (abd.status == AbductionStatus::discarded) {
            ++result_.discarded_cases;
            for (const auto& img : c->images) items.push_back({&img, std::nullopt});
            continue;
        }
        for (std::size_t img = 0; img < c->images.size(); ++img)
            items.push_back({&c->images[img], abd.values[img]});
        sampler_work.push_back({c, abd.initial, abd.values});
    }
    nn::LossReport report = model_->train_step(items, cfg_.learning_rate, cfg_.momentum, rng);
    for (const SamplerWork& w : sampler_work)
        update_sampler_on_disagreement(*w.c, w.initial, w.target);

    if (iter % cfg_.eval_interval == 0) last_eval_acc_ = heldout_accuracy();
    log_row(iter, report, 0);
}

void Trainer::train_step_induction(Rng& rng, std::size_t iter) {
    bool contrastive = cfg_.induction == "contrastive";
    std::vector<const Case*> pos = sample_cases(rng, true, cfg_.instance_positives, false);
    std::vector<const Case*> neg;
    if (contrastive && !train_negative_.empty()) {
        for (std::size_t k = 0; k < cfg_.instance_negatives; ++k)
            neg.push_back(&cases_[train_negative_[rng.index(train_negative_.size())]]);
    }

    PreparedInstance inst = prepare_instance(pos, neg, *model_, cfg_.bindings);
    JointConfig jc;
    jc.kind = manifest_.kind;
    jc.bk = &bk_;
    jc.metarules = metarules_;
    jc.max_clauses = cfg_.max_clauses;
    jc.candidate_budget = cfg_.candidate_budget;

    std::uint64_t rule_hash = 0;
    nn::LossReport report;
    try {
        JointResult joint = joint_abduce(inst, jc);
        result_.standstill_negatives += joint.standstill_negatives;
        rule_hash = fnv1a(joint.hypothesis.canonical);
        rule_history_.push_back(joint.hypothesis.canonical);
        rules_seen_.emplace(joint.hypothesis.canonical, joint.hypothesis);

        std::vector<nn::BatchItem> items;
        for (std::size_t pi = 0; pi < pos.size(); ++pi)
            for (std::size_t img = 0; img < pos[pi]->images.size(); ++img)
                items.push_back({&pos[pi]->images[img], joint.positive_values[pi][img]});
        for (std::size_t ni = 0; ni < neg.size(); ++ni)
            for (std::size_t img = 0; img < neg[ni]->images.size(); ++img)
                items.push_back({&neg[ni]->images[img], joint.negative_values[ni][img]});
        report = model_->train_step(items, cfg_.learning_rate, cfg_.momentum, rng);

        for (std::size_t pi = 0; pi < pos.size(); ++pi)
            update_sampler_on_disagreement(*pos[pi], inst.pos_argmax[pi],
                                           joint.positive_values[pi]);
    } catch (const AbductionFailure&) {
        ++result_.abduction_failures;
        // reconstruction-only step keeps the generator moving
        std::vector<nn::BatchItem> items;
        for (const Case* c : pos)
            for (const auto& img : c->images) items.push_back({&img, std::nullopt});
        report = model_->train_step(items, cfg_.learning_rate, cfg_.momentum, rng);
    }

    if (iter % cfg_.eval_interval == 0) last_eval_acc_ = heldout_accuracy();
    log_row(iter, report, rule_hash);
}

TrainResult Trainer::run() {
    Rng rng(cfg_.seed);
    std::size_t iter = 0;
    for (std::size_t k = 0; k < cfg_.pretrain_iters; ++k, ++iter) pretrain_step(rng, iter);
    for (std::size_t k = 0; k < cfg_.train_iters; ++k, ++iter) {
        if (cfg_.mode == "no_induction")
            train_step_no_induction(rng, iter);
        else
            train_step_induction(rng, iter);
    }

    last_eval_acc_ = heldout_accuracy();
    result_.final_accuracy = last_eval_acc_;
    result_.verify_calls = verify_calls_;

    if (cfg_.mode == "induction" && !rule_history_.empty()) {
        std::size_t window = std::min(cfg_.rule_window, rule_history_.size());
        std::map<std::string, std::size_t> counts;
        for (std::size_t k = rule_history_.size() - window; k < rule_history_.size(); ++k)
            ++counts[rule_history_[k]];
        std::string best;
        std::size_t best_count = 0;
        for (const auto& [rule, count] : counts) {
            if (count > best_count || (count == best_count && rule < best)) {
                best = rule;
                best_count = count;
            }
        }
        result_.final_rule = best;
        result_.final_rule_class =
            data::classify_rule(rules_seen_.at(best).clauses, manifest_.kind);
    }

    result_.metrics_csv = csv_;
    if (!cfg_.metrics_out.empty()) {
        std::ofstream os(cfg_.metrics_out);
        os << csv_;
    }
    if (!cfg_.checkpoint_out.empty()) save_checkpoint(cfg_.checkpoint_out);
    return result_;
}

void Trainer::save_checkpoint(const std::string& path) const {
    math::save_checkpoint(path, params_);
}

}  // namespace abdgen::orch
