#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "data/metrics.hpp"
#include "data/worlds.hpp"
#include "logic/parser.hpp"
#include "orch/generate.hpp"
#include "orch/trainer.hpp"

namespace fs = std::filesystem;
using namespace abdgen;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct ModelBundle {
    math::ParamStore params;
    std::unique_ptr<nn::Model> model;
};

ModelBundle load_model(const std::string& checkpoint, data::WorldKind kind) {
    data::WorldInfo info = data::world_info(kind);
    nn::ModelConfig mc;
    mc.img_c = info.image_shape[0];
    mc.img_h = info.image_shape[1];
    mc.img_w = info.image_shape[2];
    mc.schema = info.schema;
    mc.binary_images = info.binary_images;
    ModelBundle b;
    Rng init(0);
    b.model = std::make_unique<nn::Model>(mc, b.params, init);
    math::load_checkpoint(checkpoint, b.params);
    return b;
}

int cmd_gen_data(const std::string& world, const std::string& out, std::size_t cases,
                 std::uint64_t seed) {
    data::WorldKind kind = data::world_from_string(world);
    data::DatasetManifest m = data::generate_dataset(kind, out, cases, seed);
    std::size_t pos = 0, neg = 0;
    for (const auto& c : m.cases) (c.positive ? pos : neg)++;
    std::cout << "wrote " << out << ": " << pos << " positive / " << neg
              << " negative cases\n";
    return 0;
}

int cmd_train(const std::string& config_path, bool pretrain_only) {
    orch::TrainConfig cfg = orch::TrainConfig::from_file(config_path);
    if (pretrain_only) cfg.train_iters = 0;
    orch::Trainer trainer(cfg);
    orch::TrainResult r = trainer.run();
    std::cout << "final grounding accuracy " << r.final_accuracy << ", verification calls "
              << r.verify_calls << "\n";
    if (!r.final_rule.empty()) {
        std::cout << "induced rule ("
                  << data::rule_class_name(r.final_rule_class) << "):\n"
                  << r.final_rule;
    }
    if (!cfg.metrics_out.empty()) std::cout << "metrics: " << cfg.metrics_out << "\n";
    if (!cfg.checkpoint_out.empty()) std::cout << "checkpoint: " << cfg.checkpoint_out << "\n";
    return 0;
}

int cmd_induce(const std::string& config_path, std::size_t runs) {
    orch::TrainConfig base = orch::TrainConfig::from_file(config_path);
    base.mode = "induction";
    std::size_t correct = 0, less = 0, wrong = 0;
    for (std::size_t r = 0; r < runs; ++r) {
        orch::TrainConfig cfg = base;
        cfg.seed = base.seed + r;
        cfg.metrics_out.clear();
        cfg.checkpoint_out.clear();
        orch::Trainer trainer(cfg);
        orch::TrainResult res = trainer.run();
        const char* cls = res.final_rule.empty() ? "none"
                                                 : data::rule_class_name(res.final_rule_class);
        std::cout << "run " << r << " (seed " << cfg.seed << "): " << cls << "\n";
        if (!res.final_rule.empty()) {
            std::cout << res.final_rule;
            switch (res.final_rule_class) {
                case data::RuleClass::correct: ++correct; break;
                case data::RuleClass::less_informative: ++less; break;
                case data::RuleClass::wrong: ++wrong; break;
            }
        } else {
            ++wrong;
        }
    }
    double n = static_cast<double>(runs);
    std::cout << "proportions: correct " << correct / n << ", less_informative " << less / n
              << ", wrong " << wrong / n << "\n";
    return 0;
}

int cmd_generate(const std::string& checkpoint, const std::string& context_path,
                 std::size_t steps, const std::string& rules_path, const std::string& world,
                 const std::string& out_dir) {
    data::WorldKind kind = data::world_from_string(world);
    ModelBundle b = load_model(checkpoint, kind);
    math::Tensor context = math::load_tensor(context_path);
    logic::Program rules = logic::parse_program(slurp(rules_path));
    orch::GenerateResult gen = orch::generate(context, rules, *b.model, steps, kind);
    std::cout << "context grounding:";
    for (std::size_t v : gen.context_values) std::cout << ' ' << v;
    std::cout << "\n";
    fs::create_directories(out_dir);
    for (std::size_t k = 0; k < gen.images.size(); ++k) {
        std::string path = (fs::path(out_dir) / ("gen_" + std::to_string(k) + ".abdt")).string();
        math::save_tensor(path, gen.images[k], "image");
        std::cout << "step " << k << " ->";
        for (std::size_t v : gen.values[k]) std::cout << ' ' << v;
        std::cout << "  (" << path << ")\n";
    }
    return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& data_dir,
             const std::string& metrics_out) {
    data::DatasetManifest m = data::load_manifest(data_dir);
    ModelBundle b = load_model(checkpoint, m.kind);
    auto cases = orch::load_cases(m, data_dir);

    std::size_t slots = 0, hits = 0;
    double mse_acc = 0.0;
    std::size_t mse_n = 0;
    std::size_t piece = m.image_shape[1] == 27 ? 9 : 8;
    for (const orch::Case& c : cases) {
        if (c.train || !c.positive || !c.labels) continue;
        for (std::size_t img = 0; img < c.images.size(); ++img) {
            auto pred = b.model->predict_values(c.images[img]);
            for (std::size_t s = 0; s < pred.size(); ++s) {
                ++slots;
                if (pred[s] == (*c.labels)[img][s]) ++hits;
            }
            auto enc = b.model->encode(c.images[img]);
            auto ground = b.model->ground(enc);
            math::Tensor recon = b.model->decode(ground.embeddings, enc.z_sub);
            mse_acc += data::clipped_mse(c.images[img], recon, piece);
            ++mse_n;
        }
    }
    double acc = slots ? static_cast<double>(hits) / slots : 0.0;
    double cmse = mse_n ? mse_acc / mse_n : 0.0;
    std::ostringstream csv;
    csv << "metric,value\n";
    csv << "grounding_accuracy," << acc << "\n";
    csv << "clipped_mse," << cmse << "\n";
    csv << "test_images," << mse_n << "\n";
    std::cout << csv.str();
    if (!metrics_out.empty()) std::ofstream(metrics_out) << csv.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"abdgen: logic-guided visual generation at desk scale"};
    app.require_subcommand(1);

    std::string world = "mario", out = "dataset", config, checkpoint, context, rules,
                data_dir, metrics_out = "metrics.csv", gen_out = "generated";
    std::size_t cases = 100, steps = 4, runs = 10;
    std::uint64_t seed = 0;

    auto* gen_data = app.add_subcommand("gen-data", "generate a procedural dataset");
    gen_data->add_option("--world", world, "mario|shapes|attrib")->required();
    gen_data->add_option("--out", out, "output directory")->required();
    gen_data->add_option("--cases", cases, "number of positive cases");
    gen_data->add_option("--seed", seed, "rng seed");

    auto* pretrain = app.add_subcommand("pretrain", "stage-1 training on the labeled subset");
    pretrain->add_option("--config", config, "experiment config (json)")->required();

    auto* train = app.add_subcommand("train", "full two-stage training");
    train->add_option("--config", config, "experiment config (json)")->required();

    auto* induce = app.add_subcommand("induce", "seeded rule-induction runs");
    induce->add_option("--config", config, "experiment config (json)")->required();
    induce->add_option("--runs", runs, "number of seeded runs");

    auto* generate = app.add_subcommand("generate", "generate target images from a context");
    generate->add_option("--checkpoint", checkpoint, "ABDC checkpoint")->required();
    generate->add_option("--context", context, "context image (ABDT)")->required();
    generate->add_option("--steps", steps, "maximum generated images");
    generate->add_option("--rules", rules, "clause file with the generative rules")->required();
    generate->add_option("--world", world, "mario|shapes|attrib");
    generate->add_option("--out", gen_out, "output directory");

    auto* eval = app.add_subcommand("eval", "grounding accuracy and clipped MSE on a dataset");
    eval->add_option("--checkpoint", checkpoint, "ABDC checkpoint")->required();
    eval->add_option("--data", data_dir, "dataset directory")->required();
    eval->add_option("--metrics", metrics_out, "output csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_data->parsed()) return cmd_gen_data(world, out, cases, seed);
        if (pretrain->parsed()) return cmd_train(config, true);
        if (train->parsed()) return cmd_train(config, false);
        if (induce->parsed()) return cmd_induce(config, runs);
        if (generate->parsed())
            return cmd_generate(checkpoint, context, steps, rules, world, gen_out);
        if (eval->parsed()) return cmd_eval(checkpoint, data_dir, metrics_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
