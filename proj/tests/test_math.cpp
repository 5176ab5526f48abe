#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "helpers.hpp"
#include "math/graph.hpp"
#include "math/kernels.hpp"
#include "math/params.hpp"
#include "rng.hpp"

using namespace abdgen;
using namespace abdgen::math;

namespace {

Tensor random_tensor(std::vector<std::size_t> dims, Rng& rng, double scale = 1.0) {
    Tensor t{std::move(dims)};
    for (double& v : t.data) v = rng.uniform(-scale, scale);
    return t;
}

struct BackendGuard {
    kernels::Backend prev;
    explicit BackendGuard(kernels::Backend b) : prev(kernels::backend()) {
        kernels::set_backend(b);
    }
    ~BackendGuard() { kernels::set_backend(prev); }
};

}  // namespace

TEST_CASE("serial and openmp kernels agree bitwise") {
    Rng rng(7);
    for (int round = 0; round < 5; ++round) {
        std::size_t in_c = 1 + rng.index(3), out_c = 1 + rng.index(4);
        std::size_t h = 9 + rng.index(8), w = 9 + rng.index(8);
        std::size_t stride = 1 + rng.index(2);
        kernels::ConvGeom g = kernels::conv_geom(in_c, h, w, out_c, 3, stride, 1);

        Tensor x = random_tensor({in_c, h, w}, rng);
        Tensor wt = random_tensor({out_c, in_c, 3, 3}, rng);
        Tensor gout = random_tensor({g.out_c, g.out_h, g.out_w}, rng);

        Tensor out_a{{g.out_c, g.out_h, g.out_w}}, out_b = out_a;
        kernels::serial::conv2d_forward(x.data.data(), wt.data.data(), out_a.data.data(), g);
        kernels::openmp::conv2d_forward(x.data.data(), wt.data.data(), out_b.data.data(), g);
        CHECK(out_a.data == out_b.data);

        Tensor gx_a{{in_c, h, w}}, gx_b = gx_a;
        kernels::serial::conv2d_grad_input(gout.data.data(), wt.data.data(), gx_a.data.data(), g);
        kernels::openmp::conv2d_grad_input(gout.data.data(), wt.data.data(), gx_b.data.data(), g);
        CHECK(gx_a.data == gx_b.data);

        Tensor gw_a{{out_c, in_c, 3, 3}}, gw_b = gw_a;
        kernels::serial::conv2d_grad_weight(gout.data.data(), x.data.data(), gw_a.data.data(), g);
        kernels::openmp::conv2d_grad_weight(gout.data.data(), x.data.data(), gw_b.data.data(), g);
        CHECK(gw_a.data == gw_b.data);

        // Transposed convolution: map h' back up to h via the inverse geometry.
        kernels::DeconvGeom dg =
            kernels::deconv_geom(out_c, g.out_h, g.out_w, in_c, 3, stride, 1, h, w);
        Tensor dx = random_tensor({out_c, g.out_h, g.out_w}, rng);
        Tensor dw = random_tensor({out_c, in_c, 3, 3}, rng);
        Tensor dout_a{{in_c, h, w}}, dout_b = dout_a;
        kernels::serial::deconv2d_forward(dx.data.data(), dw.data.data(), dout_a.data.data(), dg);
        kernels::openmp::deconv2d_forward(dx.data.data(), dw.data.data(), dout_b.data.data(), dg);
        CHECK(dout_a.data == dout_b.data);
    }

    Rng mrng(11);
    for (int round = 0; round < 4; ++round) {
        std::size_t m = 1 + mrng.index(12), k = 1 + mrng.index(12), n = 1 + mrng.index(12);
        bool ta = mrng.uniform() < 0.5, tb = mrng.uniform() < 0.5;
        Tensor a = random_tensor(ta ? std::vector<std::size_t>{k, m}
                                    : std::vector<std::size_t>{m, k},
                                 mrng);
        Tensor b = random_tensor(tb ? std::vector<std::size_t>{n, k}
                                    : std::vector<std::size_t>{k, n},
                                 mrng);
        Tensor c1{{m, n}}, c2{{m, n}};
        kernels::serial::matmul(a.data.data(), b.data.data(), c1.data.data(), m, k, n, ta, tb,
                                false);
        kernels::openmp::matmul(a.data.data(), b.data.data(), c2.data.data(), m, k, n, ta, tb,
                                false);
        CHECK(c1.data == c2.data);
    }
}

TEST_CASE("graph ops match finite differences") {
    Rng rng(3);
    std::string worst;

    SUBCASE("linear + relu + mse") {
        ParamStore ps;
        ps.create("w", random_tensor({4, 6}, rng, 0.7));
        ps.create("b", random_tensor({4}, rng, 0.5));
        Tensor x = random_tensor({6}, rng);
        Tensor target = random_tensor({4}, rng);
        auto build = [&](Graph& g, ParamStore& p) {
            auto xv = g.reshape(g.constant(x), {1, 6});
            auto y = g.add_rowvec(g.matmul(xv, g.param("w", p.get("w")), false, true),
                                  g.param("b", p.get("b")));
            auto a = g.leaky_relu(y, 0.1);
            return g.mse_vs(g.reshape(a, {4}), target);
        };
        CHECK(testutil::grad_check_max_err(ps, build, 1e-4, &worst) < 1e-4);
    }

    SUBCASE("conv -> sigmoid -> bce") {
        ParamStore ps;
        ps.create("cw", random_tensor({2, 1, 3, 3}, rng, 0.5));
        ps.create("cb", random_tensor({2}, rng, 0.3));
        Tensor x = random_tensor({1, 6, 6}, rng);
        Tensor target{{2, 3, 3}};
        for (double& v : target.data) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
        auto build = [&](Graph& g, ParamStore& p) {
            auto y = g.conv2d(g.constant(x), g.param("cw", p.get("cw")),
                              g.param("cb", p.get("cb")), 2, 1);
            return g.bce_logits_vs(y, target);
        };
        CHECK(testutil::grad_check_max_err(ps, build, 1e-4, &worst) < 1e-4);
    }

    SUBCASE("deconv -> mse") {
        ParamStore ps;
        ps.create("dw", random_tensor({2, 1, 3, 3}, rng, 0.5));
        ps.create("db", random_tensor({1}, rng, 0.3));
        Tensor x = random_tensor({2, 3, 3}, rng);
        Tensor target = random_tensor({1, 6, 6}, rng);
        auto build = [&](Graph& g, ParamStore& p) {
            auto y = g.deconv2d(g.constant(x), g.param("dw", p.get("dw")),
                                g.param("db", p.get("db")), 2, 1, 6, 6);
            return g.mse_vs(y, target);
        };
        CHECK(testutil::grad_check_max_err(ps, build, 1e-4, &worst) < 1e-4);
    }

    SUBCASE("attention block") {
        ParamStore ps;
        ps.create("wq", random_tensor({5, 4}, rng, 0.6));
        ps.create("wk", random_tensor({5, 4}, rng, 0.6));
        ps.create("wv", random_tensor({5, 4}, rng, 0.6));
        Tensor x = random_tensor({3, 4}, rng);
        Tensor target = random_tensor({5}, rng);
        auto build = [&](Graph& g, ParamStore& p) {
            auto xv = g.constant(x);
            auto q = g.matmul(xv, g.param("wq", p.get("wq")), false, true);
            auto k = g.matmul(xv, g.param("wk", p.get("wk")), false, true);
            auto v = g.matmul(xv, g.param("wv", p.get("wv")), false, true);
            auto att = g.softmax_rows(g.scale(g.matmul(q, k, false, true), 1.0 / 2.23606797749979));
            auto e = g.matmul(att, v);
            auto pooled = g.mean_rows(e);
            return g.mse_vs(pooled, target);
        };
        CHECK(testutil::grad_check_max_err(ps, build, 1e-4, &worst) < 1e-4);
    }

    SUBCASE("distance softmax into nll, both arguments") {
        ParamStore ps;
        ps.create("z", random_tensor({2, 3}, rng, 0.8));
        ps.create("cb", random_tensor({4, 3}, rng, 0.8));
        std::vector<std::size_t> targets{1, 3};
        std::vector<bool> mask{true, true};
        auto build = [&](Graph& g, ParamStore& p) {
            auto probs =
                g.dist_softmax_rows(g.param("z", p.get("z")), g.param("cb", p.get("cb")));
            return g.nll_rows(probs, targets, mask);
        };
        CHECK(testutil::grad_check_max_err(ps, build, 1e-4, &worst) < 1e-4);
    }

    SUBCASE("softmax cross-entropy rows") {
        ParamStore ps;
        ps.create("l", random_tensor({3, 5}, rng, 1.5));
        std::vector<std::size_t> targets{4, 0, 2};
        std::vector<bool> mask{true, false, true};
        auto build = [&](Graph& g, ParamStore& p) {
            return g.softmax_ce_rows(g.param("l", p.get("l")), targets, mask);
        };
        CHECK(testutil::grad_check_max_err(ps, build, 1e-4, &worst) < 1e-4);
    }

    SUBCASE("select_rows routes gradients by mask") {
        ParamStore ps;
        ps.create("a", random_tensor({3, 4}, rng));
        ps.create("b", random_tensor({3, 4}, rng));
        Tensor target = random_tensor({4}, rng);
        std::vector<bool> mask{true, false, true};
        auto build = [&](Graph& g, ParamStore& p) {
            auto sel = g.select_rows(g.param("a", p.get("a")), g.param("b", p.get("b")), mask);
            return g.mse_vs(g.mean_rows(sel), target);
        };
        CHECK(testutil::grad_check_max_err(ps, build, 1e-4, &worst) < 1e-4);
    }
}

TEST_CASE("grad_reverse negates and scales the backward signal") {
    ParamStore ps;
    ps.create("v", Tensor::vec({0.2, -0.3}));
    Graph g;
    auto v = g.param("v", ps.get("v"));
    auto rev = g.grad_reverse(v, 1.0);
    auto loss = g.sum(rev);
    g.backward(loss);
    // upstream gradient is (1,1); alpha=1 flips it to (-1,-1)
    g.visit_param_grads([&](const std::string& name, const Tensor& grad) {
        CHECK(name == "v");
        CHECK(grad[0] == doctest::Approx(-1.0));
        CHECK(grad[1] == doctest::Approx(-1.0));
    });

    Graph g2;
    auto v2 = g2.param("v", ps.get("v"));
    auto loss2 = g2.sum(g2.grad_reverse(v2, 0.0));
    g2.backward(loss2);
    g2.visit_param_grads([&](const std::string&, const Tensor& grad) {
        CHECK(grad[0] == 0.0);
        CHECK(grad[1] == 0.0);
    });

    Graph g3;
    auto v3 = g3.param("v", Tensor::vec({1.0, 1.0}));
    auto loss3 = g3.sum(g3.grad_reverse(v3, 0.5));
    g3.backward(loss3);
    g3.visit_param_grads([&](const std::string&, const Tensor& grad) {
        CHECK(grad[0] == doctest::Approx(-0.5));
        CHECK(grad[1] == doctest::Approx(-0.5));
    });
}

TEST_CASE("straight-through lookup forwards the codebook row and passes gradient to z") {
    Tensor codebook{{3, 2}};
    codebook.data = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    ParamStore ps;
    ps.create("z", Tensor::vec({0.1, 0.2}));
    Graph g;
    auto z = g.param("z", ps.get("z"));
    auto looked = g.st_lookup(z, codebook, 1);
    CHECK(g.value(looked)[0] == 3.0);
    CHECK(g.value(looked)[1] == 4.0);
    auto loss = g.sum(g.scale(looked, 2.0));
    g.backward(loss);
    g.visit_param_grads([&](const std::string&, const Tensor& grad) {
        CHECK(grad[0] == doctest::Approx(2.0));
        CHECK(grad[1] == doctest::Approx(2.0));
    });
}

TEST_CASE("momentum sgd with zero learning rate is the identity") {
    ParamStore ps;
    Rng rng(5);
    ps.create("w", random_tensor({3, 3}, rng));
    Tensor before = ps.get("w");
    Graph g;
    auto w = g.param("w", ps.get("w"));
    auto loss = g.mse_vs(g.reshape(w, {9}), Tensor{{9}, 0.5});
    g.backward(loss);
    ps.apply_sgd(g, 0.0, 0.9, [](const std::string&) { return true; });
    CHECK(ps.get("w").data == before.data);
}

TEST_CASE("checkpoint and tensor files round-trip") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "abdgen_io_test";
    fs::create_directories(dir);

    Rng rng(9);
    ParamStore ps;
    ps.create("enc.w", random_tensor({4, 3}, rng));
    ps.create("dec.b", random_tensor({7}, rng));
    std::string ckpt = (dir / "model.abdc").string();
    save_checkpoint(ckpt, ps);

    ParamStore loaded;
    load_checkpoint(ckpt, loaded);
    CHECK(loaded.has("enc.w"));
    CHECK(loaded.get("dec.b").dims == std::vector<std::size_t>{7});
    // Values survive the f32 round-trip within f32 precision.
    for (std::size_t i = 0; i < ps.get("enc.w").numel(); ++i)
        CHECK(loaded.get("enc.w")[i] ==
              doctest::Approx(ps.get("enc.w")[i]).epsilon(1e-6));

    Tensor img = random_tensor({3, 5, 5}, rng);
    std::string tfile = (dir / "img.abdt").string();
    save_tensor(tfile, img);
    Tensor back = load_tensor(tfile);
    CHECK(back.dims == img.dims);
    for (std::size_t i = 0; i < img.numel(); ++i)
        CHECK(back[i] == doctest::Approx(img[i]).epsilon(1e-6));

    fs::remove_all(dir);
}
