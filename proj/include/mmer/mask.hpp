#pragma once

#include "mmer/task_vector.hpp"

namespace mmer {

// Row-major bit array congruent to one tensor, LSB-first within bytes.
struct BitTensor {
    std::string name;
    std::vector<std::int64_t> shape;
    std::vector<std::uint8_t> bytes;  // ceil(numel/8)
    std::int64_t nbits = 0;

    static BitTensor zeros(const std::string& name, const std::vector<std::int64_t>& shape);

    bool get(std::int64_t i) const {
        return (bytes[static_cast<std::size_t>(i >> 3)] >> (i & 7)) & 1;
    }
    void set(std::int64_t i, bool v) {
        auto& b = bytes[static_cast<std::size_t>(i >> 3)];
        const auto bit = static_cast<std::uint8_t>(1u << (i & 7));
        b = v ? (b | bit) : (b & static_cast<std::uint8_t>(~bit));
    }
    std::int64_t popcount() const;
};

// Modality-specific binary mask over a checkpoint schema.
struct ModalityMask {
    std::map<std::string, BitTensor> bits;
    std::string modality;
    double lambda = 1.0;
    std::map<std::string, std::string> meta;

    std::int64_t total_bits() const;
    std::int64_t total_set() const;
};

// Element-wise mean of N binary masks; every value is k/N.
struct FractionalMask {
    std::map<std::string, Tensor> values;  // in [0,1]
    int n_sources = 0;
};

enum class MaskVariant { Full, NoDirection, NoDominance };

// Eq-style decoupling rule: bit = 1 iff sign(tau_i) == sign(tau_star) != 0
// and |tau_i| >= lambda * 0.5 * |tau_star|.  sign(0) matches nothing.
ModalityMask build_mask(const TaskVector& tau_i, const TaskVector& tau_star, double lambda,
                        const std::string& modality = "",
                        MaskVariant variant = MaskVariant::Full);

inline ModalityMask build_mask_ablation(const TaskVector& tau_i, const TaskVector& tau_star,
                                        double lambda, MaskVariant variant,
                                        const std::string& modality = "") {
    return build_mask(tau_i, tau_star, lambda, modality, variant);
}

FractionalMask average_masks(const std::vector<const ModalityMask*>& masks);

// Manhattan distance sum_p |m_p * tau_star_p - tau_i_p|, accumulated in
// 64-bit in canonical element order.
double mask_l1(const TaskVector& tau_i, const TaskVector& tau_star, const ModalityMask& mask);

// popcount / element count.
double mask_density(const ModalityMask& mask);

void mask_congruence_check(const ModalityMask& mask, const Checkpoint& schema);
void mask_congruence_check(const ModalityMask& a, const ModalityMask& b);

}  // namespace mmer
