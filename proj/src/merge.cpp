#include "mmer/merge.hpp"

#include <charconv>
#include <sstream>

namespace mmer {

namespace {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void check_congruent(const std::vector<TaskVector>& taus) {
    if (taus.empty()) {
        throw ValidationError("merge requires at least one task vector");
    }
    for (std::size_t j = 1; j < taus.size(); ++j) {
        congruence_check(taus[0].deltas, taus[j].deltas);
    }
}

}  // namespace

const char* merge_method_name(MergeMethod m) {
    return m == MergeMethod::TA ? "ta" : "ties";
}

MergeMethod merge_method_from_name(const std::string& name) {
    if (name == "ta") return MergeMethod::TA;
    if (name == "ties") return MergeMethod::TIES;
    throw ValidationError("unknown merge method '" + name + "' (expected ta|ties)");
}

TaskVector ta_merge(const std::vector<TaskVector>& taus, double alpha) {
    check_congruent(taus);
    std::vector<std::pair<double, const TaskVector*>> terms;
    terms.reserve(taus.size());
    for (const auto& t : taus) terms.emplace_back(alpha, &t);
    TaskVector out = axpy(terms);
    out.base_id = taus[0].base_id;
    return out;
}

SignMap ties_sign_elect(const std::vector<TaskVector>& taus) {
    check_congruent(taus);
    SignMap map;
    for (const auto& [name, t0] : taus[0].deltas.tensors) {
        std::vector<std::int8_t> signs(t0.data.size(), 0);
        for (std::size_t i = 0; i < signs.size(); ++i) {
            double pos = 0.0, neg = 0.0;
            bool any = false;
            for (const auto& tau : taus) {
                const float v = tau.at(name).data[i];
                if (v > 0.0f) {
                    pos += v;
                    any = true;
                } else if (v < 0.0f) {
                    neg -= v;
                    any = true;
                }
            }
            signs[i] = !any ? std::int8_t{0} : (pos >= neg ? std::int8_t{1} : std::int8_t{-1});
        }
        map.signs.emplace(name, std::move(signs));
    }
    return map;
}

TaskVector ties_merge(const std::vector<TaskVector>& taus, double k_percent, double alpha) {
    check_congruent(taus);
    std::vector<TaskVector> trimmed;
    trimmed.reserve(taus.size());
    for (const auto& tau : taus) {
        // Re-trimming an already trimmed vector is legitimate here; TIES owns
        // its own sparsification step.
        TaskVector fresh = tau;
        fresh.prep.topk_percent.reset();
        trimmed.push_back(topk_trim(fresh, k_percent, TrimScope::Global));
    }
    const SignMap elected = ties_sign_elect(trimmed);

    TaskVector out;
    out.base_id = taus[0].base_id;
    for (const auto& [name, signs] : elected.signs) {
        const Tensor& t0 = trimmed[0].at(name);
        Tensor merged;
        merged.name = name;
        merged.shape = t0.shape;
        merged.data.assign(t0.data.size(), 0.0f);
        for (std::size_t i = 0; i < signs.size(); ++i) {
            if (signs[i] == 0) continue;
            double sum = 0.0;
            int count = 0;
            for (const auto& tau : trimmed) {
                const float v = tau.at(name).data[i];
                const int s = (v > 0.0f) - (v < 0.0f);
                if (s == signs[i]) {
                    sum += v;
                    ++count;
                }
            }
            if (count > 0) {
                merged.data[i] = static_cast<float>(alpha * (sum / count));
            }
        }
        out.deltas.tensors.emplace(name, std::move(merged));
    }
    return out;
}

Checkpoint apply_to_base(const Checkpoint& base, const TaskVector& tau, double scale) {
    congruence_check(base, tau.deltas);
    Checkpoint out;
    out.meta = base.meta;
    for (const auto& [name, tb] : base.tensors) {
        const Tensor& tt = tau.at(name);
        Tensor t;
        t.name = name;
        t.shape = tb.shape;
        t.data.resize(tb.data.size());
        for (std::size_t i = 0; i < t.data.size(); ++i) {
            t.data[i] = static_cast<float>(static_cast<double>(tb.data[i]) +
                                           scale * static_cast<double>(tt.data[i]));
        }
        out.tensors.emplace(name, std::move(t));
    }
    return out;
}

void record_recipe(Checkpoint& ckpt, const MergeRecipe& recipe) {
    ckpt.meta["role"] = "merged_task_vector";
    ckpt.meta["method"] = merge_method_name(recipe.method);
    ckpt.meta["alpha"] = format_double(recipe.alpha);
    ckpt.meta["k_percent"] = format_double(recipe.k_percent);
    std::ostringstream inputs;
    for (std::size_t i = 0; i < recipe.inputs.size(); ++i) {
        if (i) inputs << ",";
        inputs << recipe.inputs[i];
    }
    ckpt.meta["inputs"] = inputs.str();
    if (!recipe.notes.empty()) ckpt.meta["notes"] = recipe.notes;
}

MergeRecipe recipe_from_meta(const std::map<std::string, std::string>& meta) {
    MergeRecipe recipe;
    if (meta.count("method")) recipe.method = merge_method_from_name(meta.at("method"));
    if (meta.count("alpha")) recipe.alpha = std::stod(meta.at("alpha"));
    if (meta.count("k_percent")) recipe.k_percent = std::stod(meta.at("k_percent"));
    if (meta.count("notes")) recipe.notes = meta.at("notes");
    if (meta.count("inputs")) {
        std::istringstream is(meta.at("inputs"));
        std::string item;
        while (std::getline(is, item, ',')) {
            if (!item.empty()) recipe.inputs.push_back(item);
        }
    }
    return recipe;
}

}  // namespace mmer
