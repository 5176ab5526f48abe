#pragma once

#include <map>
#include <string>

#include "math/graph.hpp"
#include "math/tensor.hpp"

namespace abdgen::math {

// Named parameter blocks plus momentum-SGD state. Iteration order is the map
// order, so updates are deterministic.
class ParamStore {
public:
    Tensor& create(const std::string& name, Tensor init);
    Tensor& get(const std::string& name);
    const Tensor& get(const std::string& name) const;
    bool has(const std::string& name) const { return params_.count(name) > 0; }

    const std::map<std::string, Tensor>& all() const { return params_; }
    std::map<std::string, Tensor>& all() { return params_; }

    // One momentum-SGD step from the gradients recorded in `g`. Only blocks
    // whose name passes `filter` are touched (used to split the discriminator
    // step from the generator step). Throws NonFiniteGradient naming the first
    // offending block; no parameter is modified in that case.
    void apply_sgd(const Graph& g, double lr, double momentum,
                   const std::function<bool(const std::string&)>& filter);

private:
    std::map<std::string, Tensor> params_;
    std::map<std::string, Tensor> velocity_;
};

// Checkpoint file ("ABDC"): magic, format version u32, then named blocks
// (name length u16, name bytes, rank u32, dims u32 x rank, f32 little-endian
// data). Values round to f32 on save.
void save_checkpoint(const std::string& path, const ParamStore& ps);
void load_checkpoint(const std::string& path, ParamStore& ps);

// Standalone tensor file ("ABDT"): same layout with a single block.
void save_tensor(const std::string& path, const Tensor& t, const std::string& name = "tensor");
Tensor load_tensor(const std::string& path);

}  // namespace abdgen::math
