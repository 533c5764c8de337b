#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mmer {

// Thrown for bad arguments, schema mismatches, invalid configs.  CLI maps it
// to exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown for unreadable/corrupt/unwritable files.  CLI maps it to exit code 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Named, shaped buffer of 32-bit floats, row-major.
struct Tensor {
    std::string name;
    std::vector<std::int64_t> shape;
    std::vector<float> data;

    Tensor() = default;
    Tensor(std::string name_, std::vector<std::int64_t> shape_, std::vector<float> data_);

    std::int64_t numel() const {
        std::int64_t n = 1;
        for (const auto d : shape) n *= d;
        return n;
    }

    Eigen::Map<const Eigen::ArrayXf> flat() const {
        return {data.data(), static_cast<Eigen::Index>(data.size())};
    }
    Eigen::Map<Eigen::ArrayXf> flat() {
        return {data.data(), static_cast<Eigen::Index>(data.size())};
    }

    // Rank-2 view; throws for other ranks.
    Eigen::Map<const RowMatrixXf> matrix() const;
};

// Checks shape/data consistency; rejects NaN payloads when reject_nan is set.
void validate_tensor(const Tensor& t, bool reject_nan);

std::string shape_to_string(const std::vector<std::int64_t>& shape);

// Ordered tensor collection plus free-form metadata.  Iteration over
// `tensors` is lexicographic by name, which fixes the canonical element
// order (tensor name, then row-major flat index) used by every operation
// that must be order-stable.
struct Checkpoint {
    std::map<std::string, Tensor> tensors;
    std::map<std::string, std::string> meta;

    bool has(const std::string& name) const { return tensors.count(name) != 0; }

    const Tensor& at(const std::string& name) const;

    // Inserts keyed by t.name; duplicate names are rejected.
    void put(Tensor t);

    std::int64_t total_elements() const {
        std::int64_t n = 0;
        for (const auto& [name, t] : tensors) n += t.numel();
        return n;
    }
};

// Succeeds iff a and b have identical name sets and identical per-name
// shapes; throws ValidationError naming the first mismatch otherwise.
void congruence_check(const Checkpoint& a, const Checkpoint& b);

}  // namespace mmer
