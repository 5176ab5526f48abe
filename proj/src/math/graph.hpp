#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "math/kernels.hpp"
#include "math/tensor.hpp"

namespace abdgen::math {

// Reverse-mode tape. Nodes are appended in topological order; backward walks
// the tape in reverse. Values are eagerly computed at construction, so a Graph
// doubles as a plain forward evaluator.
class Graph {
public:
    using Id = int;

    Id constant(Tensor v);
    Id param(const std::string& name, const Tensor& v);

    // --- elementwise ---
    Id add(Id a, Id b);
    Id scale(Id a, double s);
    Id relu(Id a);
    Id leaky_relu(Id a, double slope);
    Id sigmoid(Id a);
    Id softplus(Id a);
    Id reshape(Id a, std::vector<std::size_t> dims);
    // Identity forward; backward multiplies the upstream gradient by -alpha.
    Id grad_reverse(Id a, double alpha);

    // --- vectors and matrices ---
    Id concat_vecs(const std::vector<Id>& parts);
    Id matmul(Id a, Id b, bool trans_a = false, bool trans_b = false);
    Id add_rowvec(Id m, Id v);
    Id stack_rows(const std::vector<Id>& rows);
    Id mean_rows(Id m);
    Id repeat_row(Id v, std::size_t n);
    Id hconcat(Id a, Id b);
    Id softmax_rows(Id m);
    // out[r] = mask[r] ? a[r] : b[r] for [R,D] inputs.
    Id select_rows(Id a, Id b, const std::vector<bool>& mask);

    // --- grounding ---
    // Rows of z against codebook rows: P[n,k] = softmax_k(-||z_n - c_k||).
    Id dist_softmax_rows(Id z, Id codebook);
    // Straight-through lookup: value = codebook row, gradient passes to z.
    Id st_lookup(Id z, const Tensor& codebook, std::size_t row);

    // --- losses (sums over selected rows; caller scales) ---
    Id nll_rows(Id probs, const std::vector<std::size_t>& targets, const std::vector<bool>& mask);
    Id softmax_ce_rows(Id logits, const std::vector<std::size_t>& targets,
                       const std::vector<bool>& mask);
    Id mse_vs(Id a, const Tensor& target);
    Id bce_logits_vs(Id logits, const Tensor& target);
    Id sum(Id a);

    // --- convolution ---
    Id conv2d(Id x, Id w, Id b, std::size_t stride, std::size_t pad);
    Id deconv2d(Id x, Id w, Id b, std::size_t stride, std::size_t pad, std::size_t out_h,
                std::size_t out_w);

    const Tensor& value(Id id) const { return nodes_[id].value; }
    const Tensor& grad(Id id) const { return nodes_[id].grad; }
    bool has_grad(Id id) const { return !nodes_[id].grad.data.empty(); }

    // Backpropagate from a scalar node.
    void backward(Id root);

    // Iterate (name, grad) over parameter leaves touched by this graph.
    void visit_param_grads(const std::function<void(const std::string&, const Tensor&)>& fn) const;

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool needs_grad = false;
        std::function<void(Graph&)> back;
    };

    Id push(Tensor value, bool needs_grad, std::function<void(Graph&)> back);
    Tensor& grad_buf(Id id);
    void check_vec(Id a, const char* op) const;
    void check_mat(Id a, const char* op) const;

    std::vector<Node> nodes_;
    std::vector<std::pair<std::string, Id>> params_;
};

}  // namespace abdgen::math
