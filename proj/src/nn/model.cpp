#include "nn/model.hpp"

#include <cmath>

#include "errors.hpp"

namespace abdgen::nn {

using math::Graph;
using math::ParamStore;
using math::Tensor;

namespace {

Tensor he_init(std::vector<std::size_t> dims, std::size_t fan_in, Rng& rng) {
    Tensor t{std::move(dims)};
    double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (double& v : t.data) v = rng.normal() * scale;
    return t;
}

// Small positive bias keeps ReLU pre-activations off the exact kink.
Tensor bias_init(std::size_t n) { return Tensor{{n}, 0.01}; }

}  // namespace

Graph::Id Model::Binder::operator()(const std::string& name) {
    auto it = cache.find(name);
    if (it != cache.end()) return it->second;
    Graph::Id id = trainable ? g.param(name, ps.get(name)) : g.constant(ps.get(name));
    cache.emplace(name, id);
    return id;
}

Model::Model(ModelConfig cfg, ParamStore& ps, Rng& rng) : cfg_(std::move(cfg)), ps_(&ps) {
    cfg_.schema.validate();
    const std::size_t k = cfg_.kernel;
    const std::size_t flat = cfg_.flat_dim();

    ps.create("enc.conv1.w", he_init({cfg_.conv1_c, cfg_.img_c, k, k}, cfg_.img_c * k * k, rng));
    ps.create("enc.conv1.b", bias_init(cfg_.conv1_c));
    ps.create("enc.conv2.w", he_init({cfg_.conv2_c, cfg_.conv1_c, k, k}, cfg_.conv1_c * k * k, rng));
    ps.create("enc.conv2.b", bias_init(cfg_.conv2_c));
    for (const auto& s : cfg_.schema.symbols) {
        ps.create("enc.sym." + s.name + ".w", he_init({cfg_.schema.embed_dim, flat}, flat, rng));
        ps.create("enc.sym." + s.name + ".b", Tensor{{cfg_.schema.embed_dim}});
    }
    ps.create("enc.sub.w", he_init({cfg_.z_sub_dim, flat}, flat, rng));
    ps.create("enc.sub.b", Tensor{{cfg_.z_sub_dim}});

    ps.create("dec.fc.w", he_init({flat, cfg_.dec_in_dim()}, cfg_.dec_in_dim(), rng));
    ps.create("dec.fc.b", bias_init(flat));
    ps.create("dec.deconv1.w",
              he_init({cfg_.conv2_c, cfg_.conv1_c, k, k}, cfg_.conv2_c * k * k, rng));
    ps.create("dec.deconv1.b", bias_init(cfg_.conv1_c));
    ps.create("dec.deconv2.w", he_init({cfg_.conv1_c, cfg_.img_c, k, k}, cfg_.conv1_c * k * k, rng));
    ps.create("dec.deconv2.b", bias_init(cfg_.img_c));

    ps.create("adv.fc.w", he_init({cfg_.adv_hidden, cfg_.z_sub_dim}, cfg_.z_sub_dim, rng));
    ps.create("adv.fc.b", bias_init(cfg_.adv_hidden));
    for (const auto& s : cfg_.schema.symbols) {
        ps.create("adv.head." + s.name + ".w",
                  he_init({s.cardinality, cfg_.adv_hidden}, cfg_.adv_hidden, rng));
        ps.create("adv.head." + s.name + ".b", Tensor{{s.cardinality}});
    }

    std::size_t disc_in = cfg_.img_c * cfg_.img_h * cfg_.img_w + cfg_.onehot_dim();
    ps.create("disc.fc1.w", he_init({cfg_.disc_hidden, disc_in}, disc_in, rng));
    ps.create("disc.fc1.b", Tensor{{cfg_.disc_hidden}});
    ps.create("disc.fc2.w", he_init({1, cfg_.disc_hidden}, cfg_.disc_hidden, rng));
    ps.create("disc.fc2.b", Tensor{{1}});

    for (const auto& s : cfg_.schema.symbols)
        ps.create(vq::codebook_block(s.name),
                  vq::init_codebook(s.cardinality, cfg_.schema.embed_dim, rng));
}

const Tensor& Model::codebook(std::size_t symbol) const {
    return ps_->get(vq::codebook_block(cfg_.schema.symbols.at(symbol).name));
}

std::vector<const Tensor*> Model::codebooks() const {
    std::vector<const Tensor*> out;
    for (std::size_t s = 0; s < cfg_.schema.count(); ++s) out.push_back(&codebook(s));
    return out;
}

namespace {
Graph::Id linear(Graph& g, Graph::Id x_rowvec, Graph::Id w, Graph::Id b) {
    return g.add_rowvec(g.matmul(x_rowvec, w, false, true), b);
}
}  // namespace

Model::GraphRefs Model::build_forward(Graph& g, Binder& bind, const Tensor& x) const {
    if (x.rank() != 3 || x.dims[0] != cfg_.img_c || x.dims[1] != cfg_.img_h ||
        x.dims[2] != cfg_.img_w)
        throw ShapeMismatch("encode: image " + x.shape_str() + " does not match config");
    GraphRefs refs;
    Graph::Id xin = g.constant(x);
    Graph::Id c1 = g.relu(g.conv2d(xin, bind("enc.conv1.w"), bind("enc.conv1.b"), cfg_.stride,
                                   cfg_.pad));
    Graph::Id c2 = g.relu(g.conv2d(c1, bind("enc.conv2.w"), bind("enc.conv2.b"), cfg_.stride,
                                   cfg_.pad));
    Graph::Id flat = g.reshape(c2, {1, cfg_.flat_dim()});
    for (const auto& s : cfg_.schema.symbols) {
        Graph::Id zs = linear(g, flat, bind("enc.sym." + s.name + ".w"),
                              bind("enc.sym." + s.name + ".b"));
        refs.z_sym.push_back(g.reshape(zs, {cfg_.schema.embed_dim}));
    }
    refs.z_sub = g.reshape(linear(g, flat, bind("enc.sub.w"), bind("enc.sub.b")),
                           {cfg_.z_sub_dim});
    for (std::size_t s = 0; s < cfg_.schema.count(); ++s) {
        Graph::Id z2 = g.reshape(refs.z_sym[s], {1, cfg_.schema.embed_dim});
        Graph::Id probs =
            g.dist_softmax_rows(z2, bind(vq::codebook_block(cfg_.schema.symbols[s].name)));
        refs.probs.push_back(probs);
        const Tensor& pv = g.value(probs);
        std::size_t best = 0;
        for (std::size_t v = 1; v < pv.dims[1]; ++v)
            if (pv.at2(0, v) > pv.at2(0, best)) best = v;
        refs.pred_values.push_back(best);
    }
    return refs;
}

std::pair<Graph::Id, Graph::Id> Model::build_decoder(Graph& g, Binder& bind,
                                                     Graph::Id d_in) const {
    Graph::Id h = g.relu(
        g.reshape(linear(g, g.reshape(d_in, {1, cfg_.dec_in_dim()}), bind("dec.fc.w"),
                         bind("dec.fc.b")),
                  {cfg_.conv2_c, cfg_.h2(), cfg_.w2()}));
    Graph::Id u1 = g.relu(g.deconv2d(h, bind("dec.deconv1.w"), bind("dec.deconv1.b"), cfg_.stride,
                                     cfg_.pad, cfg_.h1(), cfg_.w1()));
    Graph::Id logits = g.deconv2d(u1, bind("dec.deconv2.w"), bind("dec.deconv2.b"), cfg_.stride,
                                  cfg_.pad, cfg_.img_h, cfg_.img_w);
    return {logits, g.sigmoid(logits)};
}

Tensor Model::onehot(const std::vector<std::size_t>& values) const {
    Tensor t{{cfg_.onehot_dim()}};
    std::size_t off = 0;
    for (std::size_t s = 0; s < cfg_.schema.count(); ++s) {
        if (values[s] >= cfg_.schema.symbols[s].cardinality)
            throw ValueOutOfRange("onehot: symbol value out of range");
        t[off + values[s]] = 1.0;
        off += cfg_.schema.symbols[s].cardinality;
    }
    return t;
}

Graph::Id Model::build_disc(Graph& g, Binder& bind, Graph::Id image,
                            const std::vector<std::size_t>& values) const {
    Graph::Id flat = g.reshape(image, {cfg_.img_c * cfg_.img_h * cfg_.img_w});
    Graph::Id cond = g.constant(onehot(values));
    Graph::Id in = g.reshape(g.concat_vecs({flat, cond}),
                             {1, cfg_.img_c * cfg_.img_h * cfg_.img_w + cfg_.onehot_dim()});
    Graph::Id h = g.leaky_relu(linear(g, in, bind("disc.fc1.w"), bind("disc.fc1.b")), 0.1);
    return g.reshape(linear(g, h, bind("disc.fc2.w"), bind("disc.fc2.b")), {1});
}

Model::Encoded Model::encode(const math::Tensor& x) const {
    Graph g;
    Binder bind{g, *ps_, false, {}};
    GraphRefs refs = build_forward(g, bind, x);
    Encoded out;
    for (Graph::Id id : refs.z_sym) out.z_sym.push_back(g.value(id));
    out.z_sub = g.value(refs.z_sub);
    return out;
}

vq::GroundingResult Model::ground(const Encoded& e) const {
    return vq::ground(e.z_sym, codebooks());
}

std::vector<std::size_t> Model::predict_values(const math::Tensor& x) const {
    return ground(encode(x)).values;
}

math::Tensor Model::decode(const std::vector<math::Tensor>& z_l,
                           const math::Tensor& z_sub) const {
    if (z_l.size() != cfg_.schema.count())
        throw ShapeMismatch("decode: expected one embedding per symbol");
    Graph g;
    Binder bind{g, *ps_, false, {}};
    std::vector<Graph::Id> parts;
    for (const auto& z : z_l) {
        if (z.numel() != cfg_.schema.embed_dim)
            throw ShapeMismatch("decode: embedding dim " + z.shape_str());
        parts.push_back(g.constant(z));
    }
    if (z_sub.numel() != cfg_.z_sub_dim) throw ShapeMismatch("decode: z_sub dim");
    parts.push_back(g.constant(z_sub));
    Graph::Id d_in = g.concat_vecs(parts);
    auto [logits, out] = build_decoder(g, bind, d_in);
    (void)logits;
    return g.value(out);
}

LossReport Model::losses(const std::vector<BatchItem>& batch, Rng& rng) const {
    return const_cast<Model*>(this)->run_batch(batch, rng, false, 0.0, 0.0, nullptr);
}

LossReport Model::gradients(const std::vector<BatchItem>& batch, Rng& rng,
                            std::map<std::string, math::Tensor>& out) const {
    return const_cast<Model*>(this)->run_batch(batch, rng, false, 0.0, 0.0, &out);
}

LossReport Model::train_step(const std::vector<BatchItem>& batch, double lr, double momentum,
                             Rng& rng) {
    return run_batch(batch, rng, true, lr, momentum, nullptr);
}

LossReport Model::run_batch(const std::vector<BatchItem>& batch, Rng& rng, bool update, double lr,
                            double momentum, std::map<std::string, math::Tensor>* grads_out) {
    if (batch.empty()) throw ConfigError("train_step: empty batch");
    Graph g;
    Binder bind{g, *ps_, true, {}};

    std::vector<Graph::Id> ce_terms, recon_terms, adv_terms, gan_terms;
    std::size_t labeled_slots = 0, labeled_images = 0;

    struct FakeSample {
        Tensor image;
        std::vector<std::size_t> values;
    };
    std::vector<FakeSample> fakes;
    std::vector<const BatchItem*> labeled_items;

    for (const BatchItem& item : batch) {
        if (!item.image) throw ConfigError("train_step: missing image");
        GraphRefs refs = build_forward(g, bind, *item.image);

        // Grounding cross-entropy on abduced or ground-truth targets.
        if (item.targets) {
            if (item.targets->size() != cfg_.schema.count())
                throw MissingLabels("targets must cover every symbol");
            for (std::size_t s = 0; s < cfg_.schema.count(); ++s) {
                ce_terms.push_back(
                    g.nll_rows(refs.probs[s], {(*item.targets)[s]}, {true}));
                ++labeled_slots;
            }
            ++labeled_images;
            labeled_items.push_back(&item);
        }

        // Reconstruction through the straight-through quantized embeddings.
        std::vector<Graph::Id> dec_parts;
        for (std::size_t s = 0; s < cfg_.schema.count(); ++s)
            dec_parts.push_back(g.st_lookup(refs.z_sym[s], codebook(s), refs.pred_values[s]));
        dec_parts.push_back(refs.z_sub);
        auto [logits, xhat] = build_decoder(g, bind, g.concat_vecs(dec_parts));
        recon_terms.push_back(cfg_.binary_images ? g.bce_logits_vs(logits, *item.image)
                                                 : g.mse_vs(xhat, *item.image));

        // Adversarial classifier on z_sub through the gradient-reversal layer.
        if (item.targets) {
            Graph::Id rev = g.grad_reverse(refs.z_sub, cfg_.alpha);
            Graph::Id hidden = g.relu(g.reshape(
                linear(g, g.reshape(rev, {1, cfg_.z_sub_dim}), bind("adv.fc.w"),
                       bind("adv.fc.b")),
                {1, cfg_.adv_hidden}));
            for (std::size_t s = 0; s < cfg_.schema.count(); ++s) {
                Graph::Id logit = linear(g, hidden, bind("adv.head." + cfg_.schema.symbols[s].name + ".w"),
                                         bind("adv.head." + cfg_.schema.symbols[s].name + ".b"));
                adv_terms.push_back(g.softmax_ce_rows(logit, {(*item.targets)[s]}, {true}));
            }
        }

        // Generator GAN term with uniformly substituted symbol values.
        std::vector<std::size_t> fake_values(cfg_.schema.count());
        std::vector<Graph::Id> fake_parts;
        for (std::size_t s = 0; s < cfg_.schema.count(); ++s) {
            fake_values[s] = rng.index(cfg_.schema.symbols[s].cardinality);
            fake_parts.push_back(g.constant(vq::retrieve_one(fake_values[s], codebook(s))));
        }
        fake_parts.push_back(refs.z_sub);
        auto [flogits, fimage] = build_decoder(g, bind, g.concat_vecs(fake_parts));
        (void)flogits;
        Graph::Id fake_logit = build_disc(g, bind, fimage, fake_values);
        gan_terms.push_back(g.sum(g.softplus(g.scale(fake_logit, -1.0))));
        fakes.push_back({g.value(fimage), fake_values});
    }

    auto mean_of = [&g](const std::vector<Graph::Id>& terms, std::size_t n) {
        Graph::Id acc = terms.front();
        for (std::size_t i = 1; i < terms.size(); ++i) acc = g.add(acc, terms[i]);
        return g.scale(acc, 1.0 / static_cast<double>(n));
    };

    LossReport report;
    std::vector<Graph::Id> weighted;
    Graph::Id recon = mean_of(recon_terms, recon_terms.size());
    report.reconstruction = g.value(recon)[0];
    weighted.push_back(g.scale(recon, cfg_.weights.reconstruction));
    if (!ce_terms.empty()) {
        Graph::Id ce = mean_of(ce_terms, labeled_slots);
        report.grounding_ce = g.value(ce)[0];
        weighted.push_back(g.scale(ce, cfg_.weights.grounding));
        Graph::Id adv = mean_of(adv_terms, labeled_slots);
        report.adv = g.value(adv)[0];
        weighted.push_back(g.scale(adv, cfg_.weights.adv));
    }
    Graph::Id gan = mean_of(gan_terms, gan_terms.size());
    report.gan = g.value(gan)[0];
    weighted.push_back(g.scale(gan, cfg_.weights.gan));

    Graph::Id total = weighted.front();
    for (std::size_t i = 1; i < weighted.size(); ++i) total = g.add(total, weighted[i]);
    report.total = g.value(total)[0];

    if (grads_out) {
        g.backward(total);
        g.visit_param_grads([&](const std::string& name, const Tensor& grad) {
            if (name.rfind("disc.", 0) == 0) return;
            auto [it, fresh] = grads_out->emplace(name, grad);
            if (!fresh)
                for (std::size_t i = 0; i < grad.numel(); ++i) it->second[i] += grad[i];
        });
        return report;
    }
    if (!update) return report;

    g.backward(total);
    ps_->apply_sgd(g, lr, momentum,
                   [](const std::string& name) { return name.rfind("disc.", 0) != 0; });

    // Discriminator step: real images carry their (abduced) labels, fakes the
    // random substitutions used above.
    Graph dg;
    Binder dbind{dg, *ps_, true, {}};
    std::vector<Graph::Id> d_terms;
    for (const BatchItem* item : labeled_items) {
        Graph::Id real_logit = build_disc(dg, dbind, dg.constant(*item->image), *item->targets);
        d_terms.push_back(dg.sum(dg.softplus(dg.scale(real_logit, -1.0))));
    }
    for (const FakeSample& f : fakes) {
        Graph::Id fake_logit = build_disc(dg, dbind, dg.constant(f.image), f.values);
        d_terms.push_back(dg.sum(dg.softplus(fake_logit)));
    }
    if (!d_terms.empty()) {
        Graph::Id d_total = d_terms.front();
        for (std::size_t i = 1; i < d_terms.size(); ++i) d_total = dg.add(d_total, d_terms[i]);
        d_total = dg.scale(d_total, 1.0 / static_cast<double>(d_terms.size()));
        dg.backward(d_total);
        ps_->apply_sgd(dg, lr, momentum,
                       [](const std::string& name) { return name.rfind("disc.", 0) == 0; });
    }
    return report;
}

}  // namespace abdgen::nn
