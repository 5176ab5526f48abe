#include <doctest.h>

#include <cmath>

#include "errors.hpp"
#include "helpers.hpp"
#include "nn_gradcheck.hpp"
#include "nn/model.hpp"

using namespace abdgen;
using namespace abdgen::nn;
using math::ParamStore;
using math::Tensor;

namespace {

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.img_c = 1;
    cfg.img_h = 9;
    cfg.img_w = 9;
    cfg.schema.symbols = {{"pos", 4}};
    cfg.schema.embed_dim = 4;
    cfg.z_sub_dim = 3;
    cfg.conv1_c = 2;
    cfg.conv2_c = 3;
    cfg.adv_hidden = 5;
    cfg.disc_hidden = 6;
    return cfg;
}

Tensor random_image(const ModelConfig& cfg, Rng& rng) {
    Tensor t{{cfg.img_c, cfg.img_h, cfg.img_w}};
    for (double& v : t.data) v = rng.uniform(0.0, 1.0);
    return t;
}

}  // namespace

TEST_CASE("zero image through a zeroed biasless network gives zero embeddings") {
    ParamStore ps;
    Rng rng(1);
    Model model(tiny_config(), ps, rng);
    for (auto& [name, t] : ps.all())
        if (name.rfind("codebook.", 0) != 0)
            for (double& v : t.data) v = 0.0;
    Tensor zero{{1, 9, 9}};
    auto enc = model.encode(zero);
    for (const auto& z : enc.z_sym)
        for (double v : z.data) CHECK(v == 0.0);
    for (double v : enc.z_sub.data) CHECK(v == 0.0);
}

TEST_CASE("encode is deterministic for a fixed seed and input") {
    ParamStore ps1, ps2;
    Rng r1(42), r2(42);
    Model m1(tiny_config(), ps1, r1), m2(tiny_config(), ps2, r2);
    Rng ri(7);
    Tensor x = random_image(m1.config(), ri);
    auto e1 = m1.encode(x), e2 = m2.encode(x);
    CHECK(e1.z_sub.data == e2.z_sub.data);
    for (std::size_t s = 0; s < e1.z_sym.size(); ++s)
        CHECK(e1.z_sym[s].data == e2.z_sym[s].data);
}

TEST_CASE("decode output lies in [0,1] and matches the image shape") {
    ParamStore ps;
    Rng rng(3);
    Model model(tiny_config(), ps, rng);
    std::vector<Tensor> zl{Tensor{{4}}};
    Tensor zsub{{3}};
    Tensor img = model.decode(zl, zsub);
    CHECK(img.dims == std::vector<std::size_t>{1, 9, 9});
    for (double v : img.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    SUBCASE("shape errors are reported") {
        CHECK_THROWS_AS(model.decode({Tensor{{5}}}, zsub), ShapeMismatch);
        CHECK_THROWS_AS(model.decode(zl, Tensor{{2}}), ShapeMismatch);
    }
}

TEST_CASE("loss identities") {
    ParamStore ps;
    Rng rng(11);
    Model model(tiny_config(), ps, rng);
    Rng ri(5);
    Tensor x = random_image(model.config(), ri);

    SUBCASE("uniform probabilities give ln K grounding CE") {
        // Zero the symbolic head and give the codebook equal-norm rows so the
        // distance softmax is exactly uniform.
        for (double& v : ps.get("enc.sym.pos.w").data) v = 0.0;
        for (double& v : ps.get("enc.sym.pos.b").data) v = 0.0;
        Tensor& cb = ps.get("codebook.pos");
        for (double& v : cb.data) v = 0.0;
        for (std::size_t r = 0; r < 4; ++r) cb.at2(r, r) = 1.0;
        std::vector<BatchItem> batch{{&x, std::vector<std::size_t>{2}}};
        Rng rloss(1);
        auto report = model.losses(batch, rloss);
        CHECK(report.grounding_ce == doctest::Approx(std::log(4.0)).epsilon(1e-9));
    }

    SUBCASE("point-mass prediction gives zero grounding CE") {
        // Move codebook row 1 onto the encoder output so its distance is zero
        // and all other rows are far away.
        auto enc = model.encode(x);
        Tensor& cb = ps.get("codebook.pos");
        for (std::size_t c = 0; c < 4; ++c) {
            cb.at2(1, c) = enc.z_sym[0][c];
            cb.at2(0, c) = enc.z_sym[0][c] + 60.0;
            cb.at2(2, c) = enc.z_sym[0][c] - 60.0;
            cb.at2(3, c) = enc.z_sym[0][c] + 120.0;
        }
        std::vector<BatchItem> batch{{&x, std::vector<std::size_t>{1}}};
        Rng rloss(1);
        auto report = model.losses(batch, rloss);
        CHECK(report.grounding_ce == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("zero learning rate leaves parameters untouched") {
    ParamStore ps;
    Rng rng(13);
    Model model(tiny_config(), ps, rng);
    Rng ri(5);
    Tensor x = random_image(model.config(), ri);
    std::map<std::string, Tensor> before = ps.all();
    std::vector<BatchItem> batch{{&x, std::vector<std::size_t>{0}}};
    Rng rstep(2);
    model.train_step(batch, 0.0, 0.9, rstep);
    for (const auto& [name, t] : ps.all()) CHECK(t.data == before.at(name).data);
}

TEST_CASE("training loss gradients match central finite differences per component") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        auto report = testutil::check_loss_gradients(
            seed,
            [&] {
                ModelConfig cfg = tiny_config();
                if (seed % 2 == 0) cfg.binary_images = true;
                return cfg;
            },
            [](const ModelConfig& cfg, Rng& ri) {
                Tensor x{{cfg.img_c, cfg.img_h, cfg.img_w}};
                for (double& v : x.data)
                    v = cfg.binary_images ? (ri.uniform() < 0.5 ? 0.0 : 1.0)
                                          : ri.uniform(0.0, 1.0);
                return x;
            });
        CAPTURE(seed);
        CAPTURE(report.worst);
        CHECK(report.checked > 100);
        CHECK(report.max_err < 1e-4);
    }
}

TEST_CASE("fifty steps on a tiny set reduce the loss") {
    ParamStore ps;
    Rng rng(17);
    Model model(tiny_config(), ps, rng);
    Rng ri(23);
    std::vector<Tensor> images;
    for (int i = 0; i < 6; ++i) images.push_back(random_image(model.config(), ri));
    std::vector<BatchItem> batch;
    for (int i = 0; i < 6; ++i)
        batch.push_back({&images[i], std::vector<std::size_t>{static_cast<std::size_t>(i % 4)}});
    Rng rstep(31);
    double first = model.train_step(batch, 1e-2, 0.9, rstep).total;
    double last = first;
    for (int step = 0; step < 49; ++step) last = model.train_step(batch, 1e-2, 0.9, rstep).total;
    CHECK(last < first);
}

TEST_CASE("non-finite gradients abort the step and name the block") {
    // The contract lives in apply_sgd: gradients overflow in the backward
    // pass while every forward value stays finite (zero input through two
    // huge linear maps), so the step must throw before touching parameters.
    ParamStore ps;
    ps.create("w1", Tensor{{2, 2}, 0.0});
    ps.create("w2", Tensor{{2, 2}, 1e200});
    ps.create("w3", Tensor{{2, 2}, 1e200});
    math::Graph g;
    auto x = g.constant(Tensor{{1, 2}, 1.0});
    auto h = g.matmul(x, g.param("w1", ps.get("w1")));
    auto h2 = g.matmul(h, g.param("w2", ps.get("w2")));
    auto out = g.matmul(h2, g.param("w3", ps.get("w3")));
    auto loss = g.sum(out);
    CHECK(g.value(loss)[0] == 0.0);
    g.backward(loss);
    Tensor before = ps.get("w1");
    bool threw = false;
    std::string block;
    try {
        ps.apply_sgd(g, 1e-3, 0.9, [](const std::string&) { return true; });
    } catch (const NonFiniteGradient& e) {
        threw = true;
        block = e.block;
    }
    CHECK(threw);
    CHECK(block == "w1");
    CHECK(ps.get("w1").data == before.data);  // nothing applied
}
