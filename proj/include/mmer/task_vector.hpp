#pragma once

#include <optional>

#include "mmer/tensor.hpp"

namespace mmer {

enum class TrimScope { Global, PerTensor };

// Preprocessing already applied to a task vector, recorded for provenance
// and serialized into container meta.
struct TaskVectorPrep {
    std::optional<double> topk_percent;
    std::optional<double> dare_p;
    std::optional<std::uint64_t> seed;
};

// Checkpoint-shaped delta between a fine-tuned model and its base.
struct TaskVector {
    Checkpoint deltas;
    std::string base_id;
    std::string source_id;
    TaskVectorPrep prep;

    const Tensor& at(const std::string& name) const { return deltas.at(name); }
};

// deltas[name] = model[name] - base[name], computed in 64-bit and rounded
// to f32 on store.
TaskVector extract(const Checkpoint& model, const Checkpoint& base);

// Keeps the ceil(k% * P_scope) largest-|value| entries per scope, zeroes the
// rest.  Ties at the threshold magnitude keep the entry with the smaller
// (tensor name, flat index) in canonical order.
TaskVector topk_trim(const TaskVector& tau, double k_percent, TrimScope scope = TrimScope::Global);

// Drop-and-rescale: each entry is independently zeroed with probability p
// (one splitmix64/xoshiro256** draw per entry in canonical order, zeros
// included) and survivors are scaled by 1/(1-p).
TaskVector dare(const TaskVector& tau, double p, std::uint64_t seed);

// Element-wise sum of coefficient * task vector over congruent inputs.
TaskVector axpy(const std::vector<std::pair<double, const TaskVector*>>& vectors);

// Container meta <-> task vector fields (role=task_vector, base_id,
// source_id, topk_percent, dare_p, seed).
Checkpoint to_checkpoint(const TaskVector& tau);
TaskVector task_vector_from_checkpoint(Checkpoint ckpt);

}  // namespace mmer
