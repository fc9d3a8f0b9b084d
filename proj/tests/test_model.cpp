#include "fedfeed/model.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace fedfeed;

namespace {

// Random params and batch over a small feature space.
struct Problem {
    ModelParams params;
    std::vector<Example> batch;
};

Problem random_problem(testing::Gen& g, std::uint32_t K, std::uint32_t D, int n) {
    ModelParams::Matrix w(K, D);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = g.uniform(-1.0, 1.0);
    std::vector<Example> batch;
    for (int i = 0; i < n; ++i) {
        Example ex;
        for (std::uint32_t j = 0; j < D; ++j)
            if (g.coin(0.4)) {
                ex.features.indices.push_back(j);
                ex.features.values.push_back(static_cast<double>(g.integer(1, 3)));
            }
        ex.label = static_cast<std::size_t>(g.integer(0, static_cast<int>(K) - 1));
        batch.push_back(std::move(ex));
    }
    return {ModelParams(std::move(w)), std::move(batch)};
}

ModelParams nudged(const ModelParams& p, Eigen::Index r, Eigen::Index c, double h) {
    ModelParams::Matrix w = p.weights();
    w(r, c) += h;
    return ModelParams(std::move(w));
}

}  // namespace

TEST_CASE("fnv1a64 published test vectors") {
    CHECK(fnv1a64("") == 14695981039346656037ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("tokenize lowercases alphanumeric runs") {
    CHECK(tokenize("Hello, World! x2 -- 42") == std::vector<std::string>{"hello", "world", "x2", "42"});
    CHECK(tokenize("  \t\n").empty());
}

TEST_CASE("featurize") {
    CHECK(featurize("", 4096).empty());
    CHECK(featurize("  ...  ", 4096).empty());

    // "a" -> ...ec8c mod 4096 = 3212, "b" -> ...f1a5 mod 4096 = 421.
    const auto fv = featurize("a a b", 4096);
    CHECK(fv.indices == std::vector<std::uint32_t>{421, 3212});
    CHECK(fv.values == std::vector<double>{1.0, 2.0});
    CHECK(featurize("A a B", 4096) == fv);
    CHECK(featurize("a a b", 4096) == featurize("a a b", 4096));

    CHECK_THROWS_AS(featurize("x", 1000), ContractViolation);
    CHECK_THROWS_AS(featurize("x", 0), ContractViolation);
}

TEST_CASE("model params validate dimensions and finiteness") {
    CHECK_THROWS_AS(ModelParams(0, 16), ContractViolation);
    CHECK_THROWS_AS(ModelParams(3, 12), ContractViolation);
    ModelParams::Matrix w = ModelParams::Matrix::Zero(2, 4);
    w(1, 1) = std::nan("");
    CHECK_THROWS_AS(ModelParams{w}, ContractViolation);
    CHECK(ModelParams(2, 4).compatible_with(ModelParams(2, 4)));
    CHECK_FALSE(ModelParams(2, 4).compatible_with(ModelParams(3, 4)));
}

TEST_CASE("predict_category") {
    const ModelParams zero(5, 64);
    const auto p = predict_category(zero, featurize("some words here", 64));
    for (Eigen::Index k = 0; k < p.size(); ++k) CHECK(p(k) == doctest::Approx(0.2).epsilon(1e-15));

    testing::Gen g(7);
    auto [params, batch] = random_problem(g, 4, 32, 1);
    const auto empty = predict_category(params, FeatureVector{});
    for (Eigen::Index k = 0; k < empty.size(); ++k) CHECK(empty(k) == doctest::Approx(0.25).epsilon(1e-15));

    FeatureVector bad{{64}, {1.0}};
    CHECK_THROWS_AS(predict_category(params, bad), ContractViolation);
}

TEST_CASE("predict_category sums to one for large logits") {
    testing::Gen g(11);
    for (int trial = 0; trial < 200; ++trial) {
        auto [params, batch] = random_problem(g, 6, 16, 1);
        ModelParams big(ModelParams::Matrix(params.weights() * g.uniform(1.0, 500.0)));
        const auto p = predict_category(big, batch.front().features);
        CHECK(std::abs(p.sum() - 1.0) <= 1e-9);
        CHECK(p.minCoeff() >= 0.0);
    }
}

TEST_CASE("argmax prefers the lowest index on ties") {
    Eigen::VectorXd v(4);
    v << 0.1, 0.4, 0.4, 0.1;
    CHECK(argmax(v) == 1);
    CHECK(argmax(Eigen::VectorXd::Constant(3, 1.0 / 3.0)) == 0);
}

TEST_CASE("loss at zero weights is ln K") {
    const ModelParams zero(6, 128);
    std::vector<Example> batch = {{featurize("alpha beta", 128), 0}, {featurize("gamma", 128), 5}};
    CHECK(loss_and_gradient(zero, std::span<const Example>(batch)).loss == doctest::Approx(std::log(6.0)));
}

TEST_CASE("loss_and_gradient rejects bad batches") {
    const ModelParams zero(3, 16);
    CHECK_THROWS_AS(loss_and_gradient(zero, std::span<const Example>{}), std::invalid_argument);
    std::vector<Example> batch = {{featurize("x", 16), 3}};
    CHECK_THROWS_AS(loss_and_gradient(zero, std::span<const Example>(batch)), std::invalid_argument);
}

TEST_CASE("gradient matches central finite differences") {
    testing::Gen g(2024);
    const double h = 1e-4;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        auto [params, batch] = random_problem(g, 3 + trial % 3, 16, 1 + trial % 7);
        const std::span<const Example> b(batch);
        const auto analytic = loss_and_gradient(params, b).gradient;
        for (int probe = 0; probe < 10; ++probe) {
            const auto r = static_cast<Eigen::Index>(g.integer(0, static_cast<int>(params.num_categories()) - 1));
            const auto c = static_cast<Eigen::Index>(g.integer(0, 15));
            const double numeric =
                (loss_and_gradient(nudged(params, r, c, h), b).loss - loss_and_gradient(nudged(params, r, c, -h), b).loss) /
                (2 * h);
            const double a = analytic(r, c);
            const double scale = std::max({std::abs(a), std::abs(numeric), 1e-6});
            worst = std::max(worst, std::abs(a - numeric) / scale);
        }
    }
    INFO("worst relative error " << worst);
    CHECK(worst < 1e-5);
}

TEST_CASE("gradient is generic over the scalar type") {
    using LParams = BasicModelParams<long double>;
    testing::Gen g(5);
    auto [params, batch] = random_problem(g, 3, 8, 4);
    const LParams lp(LParams::Matrix(params.weights().cast<long double>()));
    const auto ld = loss_and_gradient(lp, std::span<const Example>(batch));
    const auto d = loss_and_gradient(params, std::span<const Example>(batch));
    CHECK(static_cast<double>(ld.loss) == doctest::Approx(d.loss).epsilon(1e-12));
    CHECK((ld.gradient.cast<double>() - d.gradient).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("loss and gradient are invariant under duplication and permutation") {
    testing::Gen g(99);
    for (int trial = 0; trial < 50; ++trial) {
        auto [params, batch] = random_problem(g, 4, 16, 5);
        const auto base = loss_and_gradient(params, std::span<const Example>(batch));

        auto doubled = batch;
        doubled.insert(doubled.end(), batch.begin(), batch.end());
        const auto dup = loss_and_gradient(params, std::span<const Example>(doubled));
        CHECK(dup.loss == doctest::Approx(base.loss).epsilon(1e-12));
        CHECK((dup.gradient - base.gradient).cwiseAbs().maxCoeff() < 1e-12);

        auto shuffled = batch;
        std::shuffle(shuffled.begin(), shuffled.end(), g.engine());
        const auto perm = loss_and_gradient(params, std::span<const Example>(shuffled));
        CHECK(perm.loss == doctest::Approx(base.loss).epsilon(1e-12));
        CHECK((perm.gradient - base.gradient).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("separable two-category corpus is learned") {
    // Disjoint vocabularies; every text is classifiable by construction.
    const std::vector<std::string> left = {"apple", "pear", "plum", "fig", "kiwi", "lime"};
    const std::vector<std::string> right = {"oak", "elm", "pine", "ash", "yew", "fir"};
    testing::Gen g(3);
    auto make = [&](int n) {
        std::vector<Example> out;
        for (int i = 0; i < n; ++i) {
            const std::size_t y = static_cast<std::size_t>(i % 2);
            const auto& vocab = y == 0 ? left : right;
            std::string text;
            for (int w = 0; w < 4; ++w) text += vocab[static_cast<std::size_t>(g.integer(0, 5))] + " ";
            out.push_back({featurize(text, 256), y});
        }
        return out;
    };
    const auto train = make(200);
    const auto held_out = make(100);
    ModelParams params(2, 256);
    for (int step = 0; step < 50; ++step) {
        const auto lg = loss_and_gradient(params, std::span<const Example>(train));
        params = ModelParams(ModelParams::Matrix(params.weights() - 0.5 * lg.gradient));
    }
    CHECK(evaluate(params, held_out).accuracy >= 0.95);
}

TEST_CASE("checkpoint round trip") {
    testing::Gen g(1);
    auto [params, batch] = random_problem(g, 4, 32, 1);
    const auto bytes = encode_checkpoint(params);
    REQUIRE(bytes.size() == 16 + 4 * 32 * 8);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "FFML");
    CHECK(bytes[4] == 1);
    CHECK(bytes[8] == 4);
    CHECK(bytes[12] == 32);
    CHECK(decode_checkpoint(bytes) == params);

    testing::TempDir dir;
    write_checkpoint(dir / "m.bin", params);
    CHECK(read_checkpoint(dir / "m.bin") == params);

    auto truncated = bytes;
    truncated.pop_back();
    CHECK_THROWS(decode_checkpoint(truncated));
    auto wrong_magic = bytes;
    wrong_magic[0] = 'X';
    CHECK_THROWS(decode_checkpoint(wrong_magic));
    auto wrong_version = bytes;
    wrong_version[4] = 2;
    CHECK_THROWS(decode_checkpoint(wrong_version));
}

TEST_CASE("category set") {
    const auto cats = CategorySet::defaults();
    CHECK(cats.size() == 6);
    CHECK(cats.name(0) == "news");
    CHECK(cats.index_of("sports") == 3);
    CHECK(cats.index_of("weather") == cats.size());
    CHECK(CategorySet::first(2).names() == std::vector<std::string>{"news", "media"});
    CHECK_THROWS(CategorySet(std::vector<std::string>{}));
    CHECK_THROWS(CategorySet({"a", "a"}));
}
