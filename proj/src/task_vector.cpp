#include "mmer/task_vector.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "mmer/prng.hpp"

namespace mmer {

namespace {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Number of entries to keep in a scope of p elements.
std::int64_t keep_count(double k_percent, std::int64_t p) {
    const auto n = static_cast<std::int64_t>(std::ceil(k_percent * static_cast<double>(p) / 100.0));
    return std::min(p, std::max<std::int64_t>(n, 0));
}

struct Entry {
    float magnitude;
    std::uint32_t tensor;  // canonical tensor index
    std::int64_t flat;
};

// |value| descending; canonical position ascending breaks ties, so the
// threshold keeps the earlier entry.
bool entry_before(const Entry& a, const Entry& b) {
    if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
    if (a.tensor != b.tensor) return a.tensor < b.tensor;
    return a.flat < b.flat;
}

}  // namespace

TaskVector extract(const Checkpoint& model, const Checkpoint& base) {
    congruence_check(model, base);
    TaskVector tau;
    tau.base_id = base.meta.count("model_id") ? base.meta.at("model_id") : "";
    tau.source_id = model.meta.count("model_id") ? model.meta.at("model_id") : "";
    for (const auto& [name, tm] : model.tensors) {
        const Tensor& tb = base.at(name);
        Tensor out;
        out.name = name;
        out.shape = tm.shape;
        out.data.resize(tm.data.size());
        for (std::size_t i = 0; i < tm.data.size(); ++i) {
            out.data[i] = static_cast<float>(static_cast<double>(tm.data[i]) -
                                             static_cast<double>(tb.data[i]));
        }
        tau.deltas.tensors.emplace(name, std::move(out));
    }
    return tau;
}

TaskVector topk_trim(const TaskVector& tau, double k_percent, TrimScope scope) {
    if (!(k_percent > 0.0 && k_percent <= 100.0)) {
        throw ValidationError("k_percent must be in (0,100], got " + format_double(k_percent));
    }
    if (tau.prep.topk_percent) {
        throw ValidationError("task vector already trimmed (topk_percent=" +
                              format_double(*tau.prep.topk_percent) + ")");
    }

    TaskVector out = tau;
    out.prep.topk_percent = k_percent;

    const auto trim_scope = [&](const std::vector<std::pair<std::string, std::int64_t>>& scopes) {
        // scopes: (tensor name, element count); one selection over all of them.
        std::int64_t total = 0;
        for (const auto& s : scopes) total += s.second;
        const std::int64_t keep = keep_count(k_percent, total);

        std::vector<Entry> entries;
        entries.reserve(static_cast<std::size_t>(total));
        std::uint32_t tensor_idx = 0;
        for (const auto& [name, count] : scopes) {
            const Tensor& t = out.deltas.at(name);
            for (std::int64_t i = 0; i < count; ++i) {
                entries.push_back({std::fabs(t.data[static_cast<std::size_t>(i)]), tensor_idx, i});
            }
            ++tensor_idx;
        }
        if (keep < total) {
            // entry_before is a total order, so nth_element selects exactly
            // the same TopK set a full sort would.
            std::nth_element(entries.begin(), entries.begin() + keep, entries.end(), entry_before);
            for (auto it = entries.begin() + keep; it != entries.end(); ++it) {
                Tensor& t = out.deltas.tensors.at(scopes[it->tensor].first);
                t.data[static_cast<std::size_t>(it->flat)] = 0.0f;
            }
        }
    };

    if (scope == TrimScope::Global) {
        std::vector<std::pair<std::string, std::int64_t>> scopes;
        for (const auto& [name, t] : out.deltas.tensors) scopes.emplace_back(name, t.numel());
        trim_scope(scopes);
    } else {
        for (const auto& [name, t] : out.deltas.tensors) {
            trim_scope({{name, t.numel()}});
        }
    }
    return out;
}

TaskVector dare(const TaskVector& tau, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p < 1.0)) {
        throw ValidationError("dare p must be in [0,1), got " + format_double(p));
    }
    TaskVector out = tau;
    out.prep.dare_p = p;
    out.prep.seed = seed;

    const float scale = static_cast<float>(1.0 / (1.0 - p));
    Xoshiro256ss rng(seed);
    for (auto& [name, t] : out.deltas.tensors) {
        for (auto& v : t.data) {
            const double draw = rng.uniform();
            v = (draw < p) ? 0.0f : v * scale;
        }
    }
    return out;
}

TaskVector axpy(const std::vector<std::pair<double, const TaskVector*>>& vectors) {
    if (vectors.empty()) {
        throw ValidationError("axpy requires at least one task vector");
    }
    for (std::size_t j = 1; j < vectors.size(); ++j) {
        congruence_check(vectors[0].second->deltas, vectors[j].second->deltas);
    }
    TaskVector out;
    out.base_id = vectors[0].second->base_id;
    for (const auto& [name, t0] : vectors[0].second->deltas.tensors) {
        Tensor acc;
        acc.name = name;
        acc.shape = t0.shape;
        acc.data.assign(t0.data.size(), 0.0f);
        std::vector<double> sum(t0.data.size(), 0.0);
        for (const auto& [coeff, tv] : vectors) {
            const Tensor& t = tv->at(name);
            for (std::size_t i = 0; i < sum.size(); ++i) {
                sum[i] += coeff * static_cast<double>(t.data[i]);
            }
        }
        for (std::size_t i = 0; i < sum.size(); ++i) {
            acc.data[i] = static_cast<float>(sum[i]);
        }
        out.deltas.tensors.emplace(name, std::move(acc));
    }
    return out;
}

Checkpoint to_checkpoint(const TaskVector& tau) {
    Checkpoint ckpt;
    ckpt.tensors = tau.deltas.tensors;
    ckpt.meta = tau.deltas.meta;
    ckpt.meta["role"] = "task_vector";
    ckpt.meta["base_id"] = tau.base_id;
    ckpt.meta["source_id"] = tau.source_id;
    if (tau.prep.topk_percent) ckpt.meta["topk_percent"] = format_double(*tau.prep.topk_percent);
    if (tau.prep.dare_p) ckpt.meta["dare_p"] = format_double(*tau.prep.dare_p);
    if (tau.prep.seed) ckpt.meta["seed"] = std::to_string(*tau.prep.seed);
    return ckpt;
}

TaskVector task_vector_from_checkpoint(Checkpoint ckpt) {
    TaskVector tau;
    const auto take = [&](const char* key) -> std::optional<std::string> {
        const auto it = ckpt.meta.find(key);
        if (it == ckpt.meta.end()) return std::nullopt;
        return it->second;
    };
    if (const auto v = take("base_id")) tau.base_id = *v;
    if (const auto v = take("source_id")) tau.source_id = *v;
    if (const auto v = take("topk_percent")) tau.prep.topk_percent = std::stod(*v);
    if (const auto v = take("dare_p")) tau.prep.dare_p = std::stod(*v);
    if (const auto v = take("seed")) tau.prep.seed = std::stoull(*v);
    tau.deltas = std::move(ckpt);
    return tau;
}

}  // namespace mmer
