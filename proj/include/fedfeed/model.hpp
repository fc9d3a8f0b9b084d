#pragma once
// Hashed bag-of-words multinomial linear categorizer.
//
// Parameters are a dense (num_categories x feature_dim) matrix; features are
// sparse hashed token counts. Everything here is a pure function over
// immutable values, so it can be called from any number of worker threads.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fedfeed {

inline constexpr std::uint32_t kDefaultFeatureDim = 4096;

// Raised when two values that must share dimensions do not.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Ordered category labels; index <-> label is a bijection for a deployment.
class CategorySet {
public:
    CategorySet() = default;
    explicit CategorySet(std::vector<std::string> names);

    static CategorySet defaults();
    // First k default labels, padded with "cat<k>" beyond the default list.
    static CategorySet first(std::size_t k);

    std::size_t size() const { return names_.size(); }
    bool empty() const { return names_.empty(); }
    const std::string& name(std::size_t i) const { return names_.at(i); }
    const std::vector<std::string>& names() const { return names_; }
    // Returns size() when the label is unknown.
    std::size_t index_of(std::string_view label) const;
    bool contains(std::string_view label) const { return index_of(label) < size(); }

    bool operator==(const CategorySet&) const = default;

private:
    std::vector<std::string> names_;
};

/// Sparse hashed token counts. Indices strictly increasing.
struct FeatureVector {
    std::vector<std::uint32_t> indices;
    std::vector<double> values;

    bool empty() const { return indices.empty(); }
    std::size_t nnz() const { return indices.size(); }
    bool operator==(const FeatureVector&) const = default;
};

std::uint64_t fnv1a64(std::string_view bytes);

// Lowercased maximal ASCII-alphanumeric runs.
std::vector<std::string> tokenize(std::string_view text);

// Hashes tokens with FNV-1a 64 modulo feature_dim and accumulates counts.
// feature_dim must be a nonzero power of two.
FeatureVector featurize(std::string_view text, std::uint32_t feature_dim = kDefaultFeatureDim);

struct Example {
    FeatureVector features;
    std::size_t label = 0;
};

template <typename Scalar>
class BasicModelParams {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    BasicModelParams(std::uint32_t num_categories, std::uint32_t feature_dim)
        : weights_(Matrix::Zero(num_categories, feature_dim)) {
        check_dims(num_categories, feature_dim);
    }

    explicit BasicModelParams(Matrix weights) : weights_(std::move(weights)) {
        check_dims(static_cast<std::uint32_t>(weights_.rows()), static_cast<std::uint32_t>(weights_.cols()));
        if (!weights_.allFinite()) throw ContractViolation("model weights must be finite");
    }

    std::uint32_t num_categories() const { return static_cast<std::uint32_t>(weights_.rows()); }
    std::uint32_t feature_dim() const { return static_cast<std::uint32_t>(weights_.cols()); }
    const Matrix& weights() const { return weights_; }

    bool compatible_with(const BasicModelParams& other) const {
        return num_categories() == other.num_categories() && feature_dim() == other.feature_dim();
    }

    bool operator==(const BasicModelParams& other) const {
        return compatible_with(other) && weights_ == other.weights_;
    }

private:
    static void check_dims(std::uint32_t k, std::uint32_t d) {
        if (k == 0) throw ContractViolation("num_categories must be positive");
        if (d == 0 || (d & (d - 1)) != 0) throw ContractViolation("feature_dim must be a power of two");
    }

    Matrix weights_;
};

using ModelParams = BasicModelParams<double>;

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> logits(const BasicModelParams<Scalar>& params,
                                                const FeatureVector& features) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z =
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(params.num_categories());
    for (std::size_t n = 0; n < features.nnz(); ++n) {
        const auto j = features.indices[n];
        if (j >= params.feature_dim())
            throw ContractViolation("feature index " + std::to_string(j) + " outside feature_dim " +
                                    std::to_string(params.feature_dim()));
        z.noalias() += params.weights().col(j) * static_cast<Scalar>(features.values[n]);
    }
    return z;
}

// Numerically stable softmax.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> softmax(const Eigen::MatrixBase<Derived>& z) {
    using Scalar = typename Derived::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> p = (z.array() - z.maxCoeff()).exp().matrix();
    p /= p.sum();
    return p;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> predict_category(const BasicModelParams<Scalar>& params,
                                                          const FeatureVector& features) {
    return softmax(logits(params, features));
}

// Lowest index wins ties.
template <typename Derived>
std::size_t argmax(const Eigen::MatrixBase<Derived>& v) {
    std::size_t best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (v(i) > v(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(i);
    return best;
}

template <typename Scalar>
struct LossGradient {
    Scalar loss;
    typename BasicModelParams<Scalar>::Matrix gradient;
};

/// Mean cross-entropy over the batch and its exact gradient.
///
/// For one example with features x and softmax output p, the gradient of
/// -log p[y] with respect to W is (p - e_y) x^T. Summation runs in batch
/// order, so the result is a deterministic function of the batch sequence.
template <typename Scalar>
LossGradient<Scalar> loss_and_gradient(const BasicModelParams<Scalar>& params, std::span<const Example> batch) {
    if (batch.empty()) throw std::invalid_argument("loss_and_gradient: empty batch");
    using Matrix = typename BasicModelParams<Scalar>::Matrix;
    Matrix grad = Matrix::Zero(params.num_categories(), params.feature_dim());
    Scalar loss = 0;
    for (const auto& ex : batch) {
        if (ex.label >= params.num_categories())
            throw std::invalid_argument("loss_and_gradient: label " + std::to_string(ex.label) + " out of range");
        auto z = logits(params, ex.features);
        const Scalar zmax = z.maxCoeff();
        const Scalar lse = zmax + std::log((z.array() - zmax).exp().sum());
        loss += lse - z(static_cast<Eigen::Index>(ex.label));
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> residual = (z.array() - lse).exp().matrix();
        residual(static_cast<Eigen::Index>(ex.label)) -= Scalar(1);
        for (std::size_t n = 0; n < ex.features.nnz(); ++n)
            grad.col(ex.features.indices[n]) += residual * static_cast<Scalar>(ex.features.values[n]);
    }
    const Scalar inv = Scalar(1) / static_cast<Scalar>(batch.size());
    grad *= inv;
    return {loss * inv, std::move(grad)};
}

struct Evaluation {
    double loss = 0.0;
    double accuracy = 0.0;
};

Evaluation evaluate(const ModelParams& params, std::span<const Example> examples);

// Binary checkpoint: "FFML", u32 version, u32 num_categories, u32 feature_dim,
// then row-major little-endian f64 weights.
inline constexpr std::uint32_t kCheckpointVersion = 1;
std::vector<std::uint8_t> encode_checkpoint(const ModelParams& params);
ModelParams decode_checkpoint(std::span<const std::uint8_t> bytes);
void write_checkpoint(const std::filesystem::path& path, const ModelParams& params);
ModelParams read_checkpoint(const std::filesystem::path& path);

}  // namespace fedfeed
