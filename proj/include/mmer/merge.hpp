#pragma once

#include "mmer/task_vector.hpp"

namespace mmer {

enum class MergeMethod { TA, TIES };

struct MergeRecipe {
    MergeMethod method = MergeMethod::TIES;
    double alpha = 1.0;
    std::vector<std::string> inputs;
    double k_percent = 80.0;
    std::string notes;
};

const char* merge_method_name(MergeMethod m);
MergeMethod merge_method_from_name(const std::string& name);

// Per-element elected signs (-1/0/+1), schema-congruent with the inputs.
struct SignMap {
    std::map<std::string, std::vector<std::int8_t>> signs;
};

// alpha * sum of task vectors.
TaskVector ta_merge(const std::vector<TaskVector>& taus, double alpha);

// Elected sign per element: sign of (sum of positive magnitudes - sum of
// negative magnitudes); 0 iff every input is zero there; an exact tie of
// masses elects +1.
SignMap ties_sign_elect(const std::vector<TaskVector>& taus);

// TIES: TopK%-trim each input (global scope), elect signs, average the
// entries matching the elected sign, scale by alpha.
TaskVector ties_merge(const std::vector<TaskVector>& taus, double k_percent, double alpha);

// base + scale * tau, element-wise.
Checkpoint apply_to_base(const Checkpoint& base, const TaskVector& tau, double scale);

// Records the recipe into a merged task vector's meta
// (role=merged_task_vector plus method/alpha/k_percent/inputs).
void record_recipe(Checkpoint& ckpt, const MergeRecipe& recipe);
MergeRecipe recipe_from_meta(const std::map<std::string, std::string>& meta);

}  // namespace mmer
