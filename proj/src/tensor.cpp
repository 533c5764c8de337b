#include "mmer/tensor.hpp"

#include <cmath>
#include <sstream>

namespace mmer {

Tensor::Tensor(std::string name_, std::vector<std::int64_t> shape_, std::vector<float> data_)
    : name(std::move(name_)), shape(std::move(shape_)), data(std::move(data_)) {
    validate_tensor(*this, false);
}

Eigen::Map<const RowMatrixXf> Tensor::matrix() const {
    if (shape.size() != 2) {
        throw ValidationError("tensor '" + name + "' is not rank-2 (shape " +
                              shape_to_string(shape) + ")");
    }
    return {data.data(), static_cast<Eigen::Index>(shape[0]),
            static_cast<Eigen::Index>(shape[1])};
}

std::string shape_to_string(const std::vector<std::int64_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

void validate_tensor(const Tensor& t, bool reject_nan) {
    if (t.shape.empty()) {
        throw ValidationError("tensor '" + t.name + "' has empty shape");
    }
    for (const auto d : t.shape) {
        if (d < 1) {
            throw ValidationError("tensor '" + t.name + "' has non-positive dimension in " +
                                  shape_to_string(t.shape));
        }
    }
    if (t.numel() != static_cast<std::int64_t>(t.data.size())) {
        throw ValidationError("tensor '" + t.name + "': shape " + shape_to_string(t.shape) +
                              " implies " + std::to_string(t.numel()) + " elements, buffer has " +
                              std::to_string(t.data.size()));
    }
    if (reject_nan) {
        for (const float v : t.data) {
            if (std::isnan(v)) {
                throw IoError("tensor '" + t.name + "' contains NaN (corrupt data)");
            }
        }
    }
}

const Tensor& Checkpoint::at(const std::string& name) const {
    const auto it = tensors.find(name);
    if (it == tensors.end()) {
        throw ValidationError("no tensor named '" + name + "'");
    }
    return it->second;
}

void Checkpoint::put(Tensor t) {
    const std::string name = t.name;
    if (!tensors.emplace(name, std::move(t)).second) {
        throw ValidationError("duplicate tensor name '" + name + "'");
    }
}

void congruence_check(const Checkpoint& a, const Checkpoint& b) {
    for (const auto& [name, ta] : a.tensors) {
        const auto it = b.tensors.find(name);
        if (it == b.tensors.end()) {
            throw ValidationError("schema mismatch: tensor '" + name + "' missing from second checkpoint");
        }
        if (it->second.shape != ta.shape) {
            throw ValidationError("schema mismatch: tensor '" + name + "' has shape " +
                                  shape_to_string(ta.shape) + " vs " +
                                  shape_to_string(it->second.shape));
        }
    }
    for (const auto& [name, tb] : b.tensors) {
        if (!a.has(name)) {
            throw ValidationError("schema mismatch: tensor '" + name + "' missing from first checkpoint");
        }
    }
}

}  // namespace mmer
