#include "math/graph.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "errors.hpp"

namespace abdgen::math {

namespace {

double stable_softplus(double x) {
    // log(1 + e^x) without overflow.
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

}  // namespace

Graph::Id Graph::push(Tensor value, bool needs_grad, std::function<void(Graph&)> back) {
    assert(value.all_finite());
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<Id>(nodes_.size() - 1);
}

Tensor& Graph::grad_buf(Id id) {
    Node& n = nodes_[id];
    if (n.grad.data.empty()) n.grad = Tensor(n.value.dims);
    return n.grad;
}

void Graph::check_vec(Id a, const char* op) const {
    if (nodes_[a].value.rank() != 1)
        throw ShapeMismatch(std::string(op) + ": expected rank-1 tensor, got " +
                            nodes_[a].value.shape_str());
}

void Graph::check_mat(Id a, const char* op) const {
    if (nodes_[a].value.rank() != 2)
        throw ShapeMismatch(std::string(op) + ": expected rank-2 tensor, got " +
                            nodes_[a].value.shape_str());
}

Graph::Id Graph::constant(Tensor v) { return push(std::move(v), false, nullptr); }

Graph::Id Graph::param(const std::string& name, const Tensor& v) {
    Id id = push(v, true, nullptr);
    params_.emplace_back(name, id);
    return id;
}

Graph::Id Graph::add(Id a, Id b) {
    const Tensor& av = nodes_[a].value;
    const Tensor& bv = nodes_[b].value;
    if (!av.same_shape(bv))
        throw ShapeMismatch("add: " + av.shape_str() + " vs " + bv.shape_str());
    Tensor out = av;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += bv[i];
    bool ng = nodes_[a].needs_grad || nodes_[b].needs_grad;
    Id id = push(std::move(out), ng, nullptr);
    if (ng)
        nodes_[id].back = [a, b, id](Graph& g) {
            const Tensor& go = g.nodes_[id].grad;
            if (g.nodes_[a].needs_grad) {
                Tensor& ga = g.grad_buf(a);
                for (std::size_t i = 0; i < go.numel(); ++i) ga[i] += go[i];
            }
            if (g.nodes_[b].needs_grad) {
                Tensor& gb = g.grad_buf(b);
                for (std::size_t i = 0; i < go.numel(); ++i) gb[i] += go[i];
            }
        };
    return id;
}

Graph::Id Graph::scale(Id a, double s) {
    Tensor out = nodes_[a].value;
    for (double& v : out.data) v *= s;
    bool ng = nodes_[a].needs_grad;
    Id id = push(std::move(out), ng, nullptr);
    if (ng)
        nodes_[id].back = [a, s, id](Graph& g) {
            const Tensor& go = g.nodes_[id].grad;
            Tensor& ga = g.grad_buf(a);
            for (std::size_t i = 0; i < go.numel(); ++i) ga[i] += s * go[i];
        };
    return id;
}

Graph::Id Graph::relu(Id a) { return leaky_relu(a, 0.0); }

Graph::Id Graph::leaky_relu(Id a, double slope) {
    Tensor out = nodes_[a].value;
    for (double& v : out.data) v = v > 0.0 ? v : slope * v;
    bool ng = nodes_[a].needs_grad;
    Id id = push(std::move(out), ng, nullptr);
    if (ng)
        nodes_[id].back = [a, slope, id](Graph& g) {
            const Tensor& go = g.nodes_[id].grad;
            const Tensor& av = g.nodes_[a].value;
            Tensor& ga = g.grad_buf(a);
            for (std::size_t i = 0; i < go.numel(); ++i)
                ga[i] += (av[i] > 0.0 ? 1.0 : slope) * go[i];
        };
    return id;
}

Graph::Id Graph::sigmoid(Id a) {
    Tensor out = nodes_[a].value;
    for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
    bool ng = nodes_[a].needs_grad;
    Id id = push(std::move(out), ng, nullptr);
    if (ng)
        nodes_[id].back = [a, id](Graph& g) {
            const Tensor& go = g.nodes_[id].grad;
            const Tensor& ov = g.nodes_[id].value;
            Tensor& ga = g.grad_buf(a);
            for (std::size_t i = 0; i < go.numel(); ++i) ga[i] += ov[i] * (1.0 - ov[i]) * go[i];
        };
    return id;
}

Graph::Id Graph::softplus(Id a) {
    Tensor out = nodes_[a].value;
    for (double& v : out.data) v = stable_softplus(v);
    bool ng = nodes_[a].needs_grad;
    Id id = push(std::move(out), ng, nullptr);
    if (ng)
        nodes_[id].back = [a, id](Graph& g) {
            const Tensor& go = g.nodes_[id].grad;
            const Tensor& av = g.nodes_[a].value;
            Tensor& ga = g.grad_buf(a);
            for (std::size_t i = 0; i < go.numel(); ++i)
                ga[i] += go[i] / (1.0 + std::exp(-av[i]));
        };
    return id;
}

Graph::Id Graph::reshape(Id a, std::vector<std::size_t> dims) {
    if (shape_numel(dims) != nodes_[a].value.numel())
        throw ShapeMismatch("reshape: element count mismatch");
    Tensor out = nodes_[a].value;
    out.dims = dims;
    bool ng = nodes_[a].needs_grad;
    Id id = push(std::move(out), ng, nullptr);
    if (ng)
        nodes_[id].back = [a, id](Graph& g) {
            const Tensor& go = g.nodes_[id].grad;
            Tensor& ga = g.grad_buf(a);
            for (std::size_t i = 0; i < go.numel(); ++i) ga[i] += go[i];
        };
    return id;
}

Graph::Id Graph::grad_reverse(Id a, double alpha) {
    Tensor out = nodes_[a].value;
    bool ng = nodes_[a].needs_grad;
    Id id = push(std::move(out), ng, nullptr);
    if (ng)
        nodes_[id].back = [a, alpha, id](Graph& g) {
            const Tensor& go = g.nodes_[id].grad;
            Tensor& ga = g.grad_buf(a);
            for (std::size_t i = 0; i < go.numel(); ++i) ga[i] += -alpha * go[i];
        };
    return id;
}

Graph::Id Graph::concat_vecs(const std::vector<Id>& parts) {
    std::size_t total = 0;
    bool ng = false;
    for (Id p : parts) {
        check_vec(p, "concat_vecs");
        total += nodes_[p].value.numel();
        ng = ng || nodes_[p].needs_grad;
    }
    Tensor out{{total}};
    std::size_t off = 0;
    for (Id p : parts) {
        const Tensor& v = nodes_[p].value;
        std::copy(v.data.begin(), v.data.end(), out.data.begin() + off);
        off += v.numel();
    }
    std::vector<Id> ps = parts;
    Id id = push(std::move(out), ng, nullptr);
    if (ng)
        nodes_[id].back = [ps, id](Graph& g) {
            const Tensor& go = g.nodes_[id].grad;
            std::size_t off = 0;
            for (Id p : ps) {
                std::size_t n = g.nodes_[p].value.numel();
                if (g.nodes_[p].needs_grad) {
                    Tensor& gp = g.grad_buf(p);
                    for (std::size_t i = 0; i < n; ++i) gp[i] += go[off + i];
                }
                off += n;
            }
        };
    return id;
}

Graph::Id Graph::matmul(Id a, Id b, bool trans_a, bool trans_b) {
    check_mat(a, "matmul");
    check_mat(b, "matmul");
    const Tensor& av = nodes_[a].value;
    const Tensor& bv = nodes_[b].value;
    std::size_t m = trans_a ? av.dims[1] : av.dims[0];
    std::size_t k = trans_a ? av.dims[0] : av.dims[1];
    std::size_t kb = trans_b ? bv.dims[1] : bv.dims[0];
    std::size_t n = trans_b ? bv.dims[0] : bv.dims[1];
    if (k != kb)
        throw ShapeMismatch("matmul: inner dims " + av.shape_str() + " vs " + bv.shape_str());
    Tensor out{{m, n}};
    kernels::matmul(av.data.data(), bv.data.data(), out.data.data(), m, k, n, trans_a, trans_b,
                    false);
    bool ng = nodes_[a].needs_grad || nodes_[b].needs_grad;
    Id id = push(std::move(out), ng, nullptr);
    if (ng)
        nodes_[id].back = [a, b, trans_a, trans_b, m, k, n, id](Graph& g) {
            const Tensor& go = g.nodes_[id].grad;
            const Tensor& av2 = g.nodes_[a].value;
            const Tensor& bv2 = g.nodes_[b].value;
            if (g.nodes_[a].needs_grad) {
                Tensor& ga = g.grad_buf(a);
                // dA = dC * B^T (or transposed variants).
                if (!trans_a)
                    kernels::matmul(go.data.data(), bv2.data.data(), ga.data.data(), m, n, k,
                                    false, !trans_b, true);
                else
                    kernels::matmul(bv2.data.data(), go.data.data(), ga.data.data(), k, n, m,
                                    trans_b, true, true);
            }
            if (g.nodes_[b].needs_grad) {
                Tensor& gb = g.grad_buf(b);
                if (!trans_b)
                    kernels::matmul(av2.data.data(), go.data.data(), gb.data.data(), k, m, n,
                                    !trans_a, false, true);
                else
                    kernels::matmul(go.data.data(), av2.data.data(), gb.data.data(), n, m, k, true,
                                    trans_a, true);
            }
        };
    return id;
}

Graph::Id Graph::add_rowvec(Id m, Id v) {
    check_mat(m, "add_rowvec");
    check_vec(v, "add_rowvec");
    const Tensor& mv = nodes_[m].value;
    const Tensor& vv = nodes_[v].value;
    if (mv.dims[1] != vv.dims[0])
        throw ShapeMismatch("add_rowvec: " + mv.shape_str() + " vs " + vv.shape_str());
    Tensor out = mv;
    for (std::size_t r = 0; r < mv.dims[0]; ++r)
        for (std::size_t c = 0; c < mv.dims[1]; ++c) out.at2(r, c) += vv[c];
    bool ng = nodes_[m].needs_grad || nodes_[v].needs_grad;
    Id id = push(std::move(out), ng, nullptr);
    if (ng)
        nodes_[id].back = [m, v, id](Graph& g) {
            const Tensor& go = g.nodes_[id].grad;
            if (g.nodes_[m].needs_grad) {
                Tensor& gm = g.grad_buf(m);
                for (std::size_t i = 0; i < go.numel(); ++i) gm[i] += go[i];
            }
            if (g.nodes_[v].needs_grad) {
                Tensor& gv = g.grad_buf(v);
                for (std::size_t r = 0; r < go.dims[0]; ++r)
                    for (std::size_t c = 0; c < go.dims[1]; ++c) gv[c] += go.at2(r, c);
            }
        };
    return id;
}

Graph::Id Graph::stack_rows(const std::vector<Id>& rows) {
    if (rows.empty()) throw ShapeMismatch("stack_rows: no rows");
    std::size_t d = nodes_[rows[0]].value.numel();
    bool ng = false;
    for (Id r : rows) {
        check_vec(r, "stack_rows");
        if (nodes_[r].value.numel() != d) throw ShapeMismatch("stack_rows: ragged rows");
        ng = ng || nodes_[r].needs_grad;
    }
    Tensor out{{rows.size(), d}};
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy(nodes_[rows[i]].value.data.begin(), nodes_[rows[i]].value.data.end(),
                  out.data.begin() + i * d);
    std::vector<Id> rs = rows;
    Id id = push(std::move(out), ng, nullptr);
    if (ng)
        nodes_[id].back = [rs, d, id](Graph& g) {
            const Tensor& go = g.nodes_[id].grad;
            for (std::size_t i = 0; i < rs.size(); ++i) {
                if (!g.nodes_[rs[i]].needs_grad) continue;
                Tensor& gr = g.grad_buf(rs[i]);
                for (std::size_t c = 0; c < d; ++c) gr[c] += go[i * d + c];
            }
        };
    return id;
}

Graph::Id Graph::mean_rows(Id m) {
    check_mat(m, "mean_rows");
    const Tensor& mv = nodes_[m].value;
    std::size_t n = mv.dims[0], d = mv.dims[1];
    Tensor out{{d}};
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) out[c] += mv.at2(r, c);
    for (double& v : out.data) v /= static_cast<double>(n);
    bool ng = nodes_[m].needs_grad;
    Id id = push(std::move(out), ng, nullptr);
    if (ng)
        nodes_[id].back = [m, n, d, id](Graph& g) {
            const Tensor& go = g.nodes_[id].grad;
            Tensor& gm = g.grad_buf(m);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < d; ++c)
                    gm.at2(r, c) += go[c] / static_cast<double>(n);
        };
    return id;
}

Graph::Id Graph::repeat_row(Id v, std::size_t n) {
    check_vec(v, "repeat_row");
    const Tensor& vv = nodes_[v].value;
    std::size_t d = vv.numel();
    Tensor out{{n, d}};
    for (std::size_t r = 0; r < n; ++r)
        std::copy(vv.data.begin(), vv.data.end(), out.data.begin() + r * d);
    bool ng = nodes_[v].needs_grad;
    Id id = push(std::move(out), ng, nullptr);
    if (ng)
        nodes_[id].back = [v, n, d, id](Graph& g) {
            const Tensor& go = g.nodes_[id].grad;
            Tensor& gv = g.grad_buf(v);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < d; ++c) gv[c] += go[r * d + c];
        };
    return id;
}

Graph::Id Graph::hconcat(Id a, Id b) {
    check_mat(a, "hconcat");
    check_mat(b, "hconcat");
    const Tensor& av = nodes_[a].value;
    const Tensor& bv = nodes_[b].value;
    if (av.dims[0] != bv.dims[0])
        throw ShapeMismatch("hconcat: row counts " + av.shape_str() + " vs " + bv.shape_str());
    std::size_t n = av.dims[0], da = av.dims[1], db = bv.dims[1];
    Tensor out{{n, da + db}};
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < da; ++c) out.at2(r, c) = av.at2(r, c);
        for (std::size_t c = 0; c < db; ++c) out.at2(r, da + c) = bv.at2(r, c);
    }
    bool ng = nodes_[a].needs_grad || nodes_[b].needs_grad;
    Id id = push(std::move(out), ng, nullptr);
    if (ng)
        nodes_[id].back = [a, b, n, da, db, id](Graph& g) {
            const Tensor& go = g.nodes_[id].grad;
            if (g.nodes_[a].needs_grad) {
                Tensor& ga = g.grad_buf(a);
                for (std::size_t r = 0; r < n; ++r)
                    for (std::size_t c = 0; c < da; ++c) ga.at2(r, c) += go.at2(r, c);
            }
            if (g.nodes_[b].needs_grad) {
                Tensor& gb = g.grad_buf(b);
                for (std::size_t r = 0; r < n; ++r)
                    for (std::size_t c = 0; c < db; ++c) gb.at2(r, c) += go.at2(r, da + c);
            }
        };
    return id;
}

Graph::Id Graph::softmax_rows(Id m) {
    check_mat(m, "softmax_rows");
    const Tensor& mv = nodes_[m].value;
    std::size_t n = mv.dims[0], d = mv.dims[1];
    Tensor out{{n, d}};
    for (std::size_t r = 0; r < n; ++r) {
        double mx = mv.at2(r, 0);
        for (std::size_t c = 1; c < d; ++c) mx = std::max(mx, mv.at2(r, c));
        double z = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            out.at2(r, c) = std::exp(mv.at2(r, c) - mx);
            z += out.at2(r, c);
        }
        for (std::size_t c = 0; c < d; ++c) out.at2(r, c) /= z;
    }
    bool ng = nodes_[m].needs_grad;
    Id id = push(std::move(out), ng, nullptr);
    if (ng)
        nodes_[id].back = [m, n, d, id](Graph& g) {
            const Tensor& go = g.nodes_[id].grad;
            const Tensor& p = g.nodes_[id].value;
            Tensor& gm = g.grad_buf(m);
            for (std::size_t r = 0; r < n; ++r) {
                double dot = 0.0;
                for (std::size_t c = 0; c < d; ++c) dot += go.at2(r, c) * p.at2(r, c);
                for (std::size_t c = 0; c < d; ++c)
                    gm.at2(r, c) += p.at2(r, c) * (go.at2(r, c) - dot);
            }
        };
    return id;
}

Graph::Id Graph::select_rows(Id a, Id b, const std::vector<bool>& mask) {
    check_mat(a, "select_rows");
    check_mat(b, "select_rows");
    const Tensor& av = nodes_[a].value;
    const Tensor& bv = nodes_[b].value;
    if (!av.same_shape(bv) || av.dims[0] != mask.size())
        throw ShapeMismatch("select_rows: shape/mask mismatch");
    std::size_t n = av.dims[0], d = av.dims[1];
    Tensor out{{n, d}};
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) out.at2(r, c) = mask[r] ? av.at2(r, c) : bv.at2(r, c);
    bool ng = nodes_[a].needs_grad || nodes_[b].needs_grad;
    std::vector<bool> mk = mask;
    Id id = push(std::move(out), ng, nullptr);
    if (ng)
        nodes_[id].back = [a, b, mk, n, d, id](Graph& g) {
            const Tensor& go = g.nodes_[id].grad;
            for (std::size_t r = 0; r < n; ++r) {
                Id tgt = mk[r] ? a : b;
                if (!g.nodes_[tgt].needs_grad) continue;
                Tensor& gt = g.grad_buf(tgt);
                for (std::size_t c = 0; c < d; ++c) gt.at2(r, c) += go.at2(r, c);
            }
        };
    return id;
}

Graph::Id Graph::dist_softmax_rows(Id z, Id codebook) {
    check_mat(z, "dist_softmax_rows");
    check_mat(codebook, "dist_softmax_rows");
    const Tensor& zv = nodes_[z].value;
    const Tensor& cv = nodes_[codebook].value;
    if (zv.dims[1] != cv.dims[1])
        throw DimensionMismatch("dist_softmax_rows: embed dim " + zv.shape_str() + " vs " +
                                cv.shape_str());
    std::size_t n = zv.dims[0], k = cv.dims[0], e = zv.dims[1];
    Tensor dist{{n, k}};
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < k; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < e; ++c) {
                double d = zv.at2(r, c) - cv.at2(j, c);
                s += d * d;
            }
            dist.at2(r, j) = std::sqrt(s);
        }
    Tensor out{{n, k}};
    for (std::size_t r = 0; r < n; ++r) {
        double mn = dist.at2(r, 0);
        for (std::size_t j = 1; j < k; ++j) mn = std::min(mn, dist.at2(r, j));
        double zsum = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            out.at2(r, j) = std::exp(mn - dist.at2(r, j));
            zsum += out.at2(r, j);
        }
        for (std::size_t j = 0; j < k; ++j) out.at2(r, j) /= zsum;
    }
    bool ng = nodes_[z].needs_grad || nodes_[codebook].needs_grad;
    Id id = push(std::move(out), ng, nullptr);
    if (ng) {
        Tensor dist_copy = dist;
        nodes_[id].back = [z, codebook, dist_copy, n, k, e, id](Graph& g) {
            const Tensor& go = g.nodes_[id].grad;
            const Tensor& p = g.nodes_[id].value;
            const Tensor& zv2 = g.nodes_[z].value;
            const Tensor& cv2 = g.nodes_[codebook].value;
            for (std::size_t r = 0; r < n; ++r) {
                double dot = 0.0;
                for (std::size_t j = 0; j < k; ++j) dot += go.at2(r, j) * p.at2(r, j);
                for (std::size_t j = 0; j < k; ++j) {
                    // d(loss)/d(dist_rj); softmax over negated distances.
                    double gd = -p.at2(r, j) * (go.at2(r, j) - dot);
                    double dn = std::max(dist_copy.at2(r, j), 1e-12);
                    for (std::size_t c = 0; c < e; ++c) {
                        double dir = (zv2.at2(r, c) - cv2.at2(j, c)) / dn;
                        if (g.nodes_[z].needs_grad) g.grad_buf(z).at2(r, c) += gd * dir;
                        if (g.nodes_[codebook].needs_grad)
                            g.grad_buf(codebook).at2(j, c) -= gd * dir;
                    }
                }
            }
        };
    }
    return id;
}

Graph::Id Graph::st_lookup(Id z, const Tensor& codebook, std::size_t row) {
    check_vec(z, "st_lookup");
    if (codebook.rank() != 2 || row >= codebook.dims[0])
        throw ValueOutOfRange("st_lookup: row " + std::to_string(row));
    if (codebook.dims[1] != nodes_[z].value.numel())
        throw DimensionMismatch("st_lookup: embed dim mismatch");
    std::size_t e = codebook.dims[1];
    Tensor out{{e}};
    for (std::size_t c = 0; c < e; ++c) out[c] = codebook.at2(row, c);
    bool ng = nodes_[z].needs_grad;
    Id id = push(std::move(out), ng, nullptr);
    if (ng)
        nodes_[id].back = [z, id](Graph& g) {
            const Tensor& go = g.nodes_[id].grad;
            Tensor& gz = g.grad_buf(z);
            for (std::size_t i = 0; i < go.numel(); ++i) gz[i] += go[i];
        };
    return id;
}

Graph::Id Graph::nll_rows(Id probs, const std::vector<std::size_t>& targets,
                          const std::vector<bool>& mask) {
    check_mat(probs, "nll_rows");
    const Tensor& pv = nodes_[probs].value;
    std::size_t n = pv.dims[0];
    if (targets.size() != n || mask.size() != n) throw ShapeMismatch("nll_rows: target count");
    double loss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        if (!mask[r]) continue;
        if (targets[r] >= pv.dims[1]) throw ValueOutOfRange("nll_rows: target index");
        loss += -std::log(std::max(pv.at2(r, targets[r]), 1e-300));
    }
    bool ng = nodes_[probs].needs_grad;
    std::vector<std::size_t> t = targets;
    std::vector<bool> mk = mask;
    Id id = push(Tensor::scalar(loss), ng, nullptr);
    if (ng)
        nodes_[id].back = [probs, t, mk, n, id](Graph& g) {
            double go = g.nodes_[id].grad[0];
            const Tensor& pv2 = g.nodes_[probs].value;
            Tensor& gp = g.grad_buf(probs);
            for (std::size_t r = 0; r < n; ++r) {
                if (!mk[r]) continue;
                gp.at2(r, t[r]) += -go / std::max(pv2.at2(r, t[r]), 1e-300);
            }
        };
    return id;
}

Graph::Id Graph::softmax_ce_rows(Id logits, const std::vector<std::size_t>& targets,
                                 const std::vector<bool>& mask) {
    check_mat(logits, "softmax_ce_rows");
    const Tensor& lv = nodes_[logits].value;
    std::size_t n = lv.dims[0], k = lv.dims[1];
    if (targets.size() != n || mask.size() != n)
        throw ShapeMismatch("softmax_ce_rows: target count");
    double loss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        if (!mask[r]) continue;
        double mx = lv.at2(r, 0);
        for (std::size_t c = 1; c < k; ++c) mx = std::max(mx, lv.at2(r, c));
        double z = 0.0;
        for (std::size_t c = 0; c < k; ++c) z += std::exp(lv.at2(r, c) - mx);
        loss += mx + std::log(z) - lv.at2(r, targets[r]);
    }
    bool ng = nodes_[logits].needs_grad;
    std::vector<std::size_t> t = targets;
    std::vector<bool> mk = mask;
    Id id = push(Tensor::scalar(loss), ng, nullptr);
    if (ng)
        nodes_[id].back = [logits, t, mk, n, k, id](Graph& g) {
            double go = g.nodes_[id].grad[0];
            const Tensor& lv2 = g.nodes_[logits].value;
            Tensor& gl = g.grad_buf(logits);
            for (std::size_t r = 0; r < n; ++r) {
                if (!mk[r]) continue;
                double mx = lv2.at2(r, 0);
                for (std::size_t c = 1; c < k; ++c) mx = std::max(mx, lv2.at2(r, c));
                double z = 0.0;
                for (std::size_t c = 0; c < k; ++c) z += std::exp(lv2.at2(r, c) - mx);
                for (std::size_t c = 0; c < k; ++c) {
                    double p = std::exp(lv2.at2(r, c) - mx) / z;
                    gl.at2(r, c) += go * (p - (c == t[r] ? 1.0 : 0.0));
                }
            }
        };
    return id;
}

Graph::Id Graph::mse_vs(Id a, const Tensor& target) {
    const Tensor& av = nodes_[a].value;
    if (!av.same_shape(target))
        throw ShapeMismatch("mse_vs: " + av.shape_str() + " vs target");
    double n = static_cast<double>(av.numel());
    double loss = 0.0;
    for (std::size_t i = 0; i < av.numel(); ++i) {
        double d = av[i] - target[i];
        loss += d * d;
    }
    loss /= n;
    bool ng = nodes_[a].needs_grad;
    Tensor tgt = target;
    Id id = push(Tensor::scalar(loss), ng, nullptr);
    if (ng)
        nodes_[id].back = [a, tgt, n, id](Graph& g) {
            double go = g.nodes_[id].grad[0];
            const Tensor& av2 = g.nodes_[a].value;
            Tensor& ga = g.grad_buf(a);
            for (std::size_t i = 0; i < av2.numel(); ++i)
                ga[i] += go * 2.0 * (av2[i] - tgt[i]) / n;
        };
    return id;
}

Graph::Id Graph::bce_logits_vs(Id logits, const Tensor& target) {
    const Tensor& lv = nodes_[logits].value;
    if (!lv.same_shape(target))
        throw ShapeMismatch("bce_logits_vs: " + lv.shape_str() + " vs target");
    double n = static_cast<double>(lv.numel());
    double loss = 0.0;
    for (std::size_t i = 0; i < lv.numel(); ++i)
        loss += stable_softplus(lv[i]) - lv[i] * target[i];
    loss /= n;
    bool ng = nodes_[logits].needs_grad;
    Tensor tgt = target;
    Id id = push(Tensor::scalar(loss), ng, nullptr);
    if (ng)
        nodes_[id].back = [logits, tgt, n, id](Graph& g) {
            double go = g.nodes_[id].grad[0];
            const Tensor& lv2 = g.nodes_[logits].value;
            Tensor& gl = g.grad_buf(logits);
            for (std::size_t i = 0; i < lv2.numel(); ++i) {
                double s = 1.0 / (1.0 + std::exp(-lv2[i]));
                gl[i] += go * (s - tgt[i]) / n;
            }
        };
    return id;
}

Graph::Id Graph::sum(Id a) {
    const Tensor& av = nodes_[a].value;
    double s = 0.0;
    for (double v : av.data) s += v;
    bool ng = nodes_[a].needs_grad;
    Id id = push(Tensor::scalar(s), ng, nullptr);
    if (ng)
        nodes_[id].back = [a, id](Graph& g) {
            double go = g.nodes_[id].grad[0];
            Tensor& ga = g.grad_buf(a);
            for (double& v : ga.data) v += go;
        };
    return id;
}

Graph::Id Graph::conv2d(Id x, Id w, Id b, std::size_t stride, std::size_t pad) {
    const Tensor& xv = nodes_[x].value;
    const Tensor& wv = nodes_[w].value;
    const Tensor& bv = nodes_[b].value;
    if (xv.rank() != 3 || wv.rank() != 4 || bv.rank() != 1)
        throw ShapeMismatch("conv2d: ranks");
    if (wv.dims[1] != xv.dims[0] || bv.dims[0] != wv.dims[0])
        throw ShapeMismatch("conv2d: channels " + xv.shape_str() + " vs " + wv.shape_str());
    kernels::ConvGeom g = kernels::conv_geom(xv.dims[0], xv.dims[1], xv.dims[2], wv.dims[0],
                                             wv.dims[2], stride, pad);
    Tensor out{{g.out_c, g.out_h, g.out_w}};
    kernels::conv2d_forward(xv.data.data(), wv.data.data(), out.data.data(), g);
    for (std::size_t o = 0; o < g.out_c; ++o)
        for (std::size_t i = 0; i < g.out_h * g.out_w; ++i)
            out.data[o * g.out_h * g.out_w + i] += bv[o];
    bool ng = nodes_[x].needs_grad || nodes_[w].needs_grad || nodes_[b].needs_grad;
    Id id = push(std::move(out), ng, nullptr);
    if (ng)
        nodes_[id].back = [x, w, b, g, id](Graph& gr) {
            const Tensor& go = gr.nodes_[id].grad;
            if (gr.nodes_[x].needs_grad)
                kernels::conv2d_grad_input(go.data.data(), gr.nodes_[w].value.data.data(),
                                           gr.grad_buf(x).data.data(), g);
            if (gr.nodes_[w].needs_grad)
                kernels::conv2d_grad_weight(go.data.data(), gr.nodes_[x].value.data.data(),
                                            gr.grad_buf(w).data.data(), g);
            if (gr.nodes_[b].needs_grad) {
                Tensor& gb = gr.grad_buf(b);
                for (std::size_t o = 0; o < g.out_c; ++o)
                    for (std::size_t i = 0; i < g.out_h * g.out_w; ++i)
                        gb[o] += go.data[o * g.out_h * g.out_w + i];
            }
        };
    return id;
}

Graph::Id Graph::deconv2d(Id x, Id w, Id b, std::size_t stride, std::size_t pad,
                          std::size_t out_h, std::size_t out_w) {
    const Tensor& xv = nodes_[x].value;
    const Tensor& wv = nodes_[w].value;
    const Tensor& bv = nodes_[b].value;
    if (xv.rank() != 3 || wv.rank() != 4 || bv.rank() != 1)
        throw ShapeMismatch("deconv2d: ranks");
    if (wv.dims[0] != xv.dims[0] || bv.dims[0] != wv.dims[1])
        throw ShapeMismatch("deconv2d: channels " + xv.shape_str() + " vs " + wv.shape_str());
    kernels::DeconvGeom g = kernels::deconv_geom(xv.dims[0], xv.dims[1], xv.dims[2], wv.dims[1],
                                                 wv.dims[2], stride, pad, out_h, out_w);
    Tensor out{{g.out_c, g.out_h, g.out_w}};
    kernels::deconv2d_forward(xv.data.data(), wv.data.data(), out.data.data(), g);
    for (std::size_t o = 0; o < g.out_c; ++o)
        for (std::size_t i = 0; i < g.out_h * g.out_w; ++i)
            out.data[o * g.out_h * g.out_w + i] += bv[o];
    bool ng = nodes_[x].needs_grad || nodes_[w].needs_grad || nodes_[b].needs_grad;
    Id id = push(std::move(out), ng, nullptr);
    if (ng)
        nodes_[id].back = [x, w, b, g, id](Graph& gr) {
            const Tensor& go = gr.nodes_[id].grad;
            if (gr.nodes_[x].needs_grad)
                kernels::deconv2d_grad_input(go.data.data(), gr.nodes_[w].value.data.data(),
                                             gr.grad_buf(x).data.data(), g);
            if (gr.nodes_[w].needs_grad)
                kernels::deconv2d_grad_weight(go.data.data(), gr.nodes_[x].value.data.data(),
                                              gr.grad_buf(w).data.data(), g);
            if (gr.nodes_[b].needs_grad) {
                Tensor& gb = gr.grad_buf(b);
                for (std::size_t o = 0; o < g.out_c; ++o)
                    for (std::size_t i = 0; i < g.out_h * g.out_w; ++i)
                        gb[o] += go.data[o * g.out_h * g.out_w + i];
            }
        };
    return id;
}

void Graph::backward(Id root) {
    if (nodes_[root].value.numel() != 1)
        throw ShapeMismatch("backward: root must be scalar, got " +
                            nodes_[root].value.shape_str());
    grad_buf(root)[0] = 1.0;
    for (Id i = root; i >= 0; --i) {
        Node& n = nodes_[i];
        if (!n.needs_grad || n.grad.data.empty() || !n.back) continue;
        n.back(*this);
    }
}

void Graph::visit_param_grads(
    const std::function<void(const std::string&, const Tensor&)>& fn) const {
    static const Tensor empty;
    for (const auto& [name, id] : params_) {
        const Tensor& g = nodes_[id].grad;
        if (g.data.empty()) {
            Tensor zeros(nodes_[id].value.dims);
            fn(name, zeros);
        } else {
            fn(name, g);
        }
    }
}

}  // namespace abdgen::math
