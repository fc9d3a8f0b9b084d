#include "fedfeed/federated.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <stdexcept>

namespace fedfeed {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Fisher-Yates with raw engine output so the permutation is identical across
// standard library implementations.
template <typename T>
void seeded_shuffle(std::vector<T>& v, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

std::vector<std::size_t> sample_clients(std::size_t n, double fraction, std::uint64_t seed, std::uint32_t round) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (fraction >= 1.0) return idx;
    auto take = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
    take = std::clamp<std::size_t>(take, 1, n);
    seeded_shuffle(idx, splitmix64(seed ^ (0xC11E17ULL + round)));
    idx.resize(take);
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw std::invalid_argument("learning_rate must be positive and finite");
    if (local_epochs == 0) throw std::invalid_argument("local_epochs must be >= 1");
    if (rounds == 0) throw std::invalid_argument("rounds must be >= 1");
    if (num_clients == 0) throw std::invalid_argument("num_clients must be >= 1");
    if (!(participation > 0.0 && participation <= 1.0))
        throw std::invalid_argument("participation must be in (0, 1]");
}

ClientState::ClientState(std::string client_id, std::vector<Example> dataset)
    : id_(std::move(client_id)), dataset_(std::move(dataset)) {}

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t round, std::string_view client_id) {
    return splitmix64(splitmix64(seed ^ fnv1a64(client_id)) + round);
}

ClientUpdate client_update(const ModelParams& global, const ClientState& client, const TrainConfig& cfg,
                           std::uint32_t round) {
    ClientUpdate out;
    out.client_id = client.id_;
    out.num_examples = client.dataset_.size();
    if (client.dataset_.empty()) {
        out.status = ClientStatus::skipped_empty;
        out.message = "client " + client.id_ + " has no examples; skipped";
        return out;
    }

    const std::size_t n = client.dataset_.size();
    const std::size_t batch = cfg.batch_size == 0 ? n : std::min<std::size_t>(cfg.batch_size, n);
    ModelParams::Matrix w = global.weights();
    std::mt19937_64 rng(derive_seed(cfg.seed, round, client.id_));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    double loss_sum = 0.0;
    std::size_t steps = 0;
    std::vector<Example> scratch;
    for (std::uint32_t epoch = 0; epoch < cfg.local_epochs; ++epoch) {
        if (batch < n) seeded_shuffle(order, rng());
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(start + batch, n);
            ModelParams current(w);
            LossGradient<double> lg = [&] {
                if (batch == n) return loss_and_gradient(current, std::span<const Example>(client.dataset_));
                scratch.clear();
                for (std::size_t i = start; i < end; ++i) scratch.push_back(client.dataset_[order[i]]);
                return loss_and_gradient(current, std::span<const Example>(scratch));
            }();
            w -= cfg.learning_rate * lg.gradient;
            loss_sum += lg.loss;
            ++steps;
        }
    }
    out.params = ModelParams(std::move(w));
    out.train_loss = loss_sum / static_cast<double>(steps);
    return out;
}

ModelParams aggregate(std::vector<WeightedParams> updates, bool size_weighted) {
    if (updates.empty()) throw std::invalid_argument("aggregate: no updates");
    std::sort(updates.begin(), updates.end(),
              [](const WeightedParams& a, const WeightedParams& b) { return a.client_id < b.client_id; });
    const auto& ref = updates.front().params;
    for (const auto& u : updates) {
        if (!u.params.compatible_with(ref))
            throw ContractViolation("aggregate: client " + u.client_id + " has dimensions " +
                                    std::to_string(u.params.num_categories()) + "x" +
                                    std::to_string(u.params.feature_dim()) + ", expected " +
                                    std::to_string(ref.num_categories()) + "x" + std::to_string(ref.feature_dim()));
    }
    if (updates.size() == 1) return updates.front().params;

    using Matrix = ModelParams::Matrix;
    Matrix sum = Matrix::Zero(ref.num_categories(), ref.feature_dim());
    Matrix lo = ref.weights();
    Matrix hi = ref.weights();
    if (size_weighted) {
        double total = 0.0;
        for (const auto& u : updates) {
            if (!(u.weight >= 0.0)) throw std::invalid_argument("aggregate: negative weight for " + u.client_id);
            total += u.weight;
        }
        if (!(total > 0.0)) throw std::invalid_argument("aggregate: weights sum to zero");
        for (const auto& u : updates) sum += (u.weight / total) * u.params.weights();
    } else {
        for (const auto& u : updates) sum += u.params.weights();
        sum /= static_cast<double>(updates.size());
    }
    for (const auto& u : updates) {
        lo = lo.cwiseMin(u.params.weights());
        hi = hi.cwiseMax(u.params.weights());
    }
    return ModelParams(sum.cwiseMax(lo).cwiseMin(hi));
}

ModelParams aggregate(std::span<const ModelParams> updates) {
    std::vector<WeightedParams> named;
    named.reserve(updates.size());
    // Zero-padded so lexicographic order equals positional order.
    for (std::size_t i = 0; i < updates.size(); ++i) {
        auto id = std::to_string(i);
        named.push_back({std::string(10 - std::min<std::size_t>(10, id.size()), '0') + id, updates[i], 1.0});
    }
    return aggregate(std::move(named));
}

bool RoundReport::same_outcome(const RoundReport& other) const {
    return round == other.round && client_losses == other.client_losses && eval_loss == other.eval_loss &&
           eval_acc == other.eval_acc && warnings == other.warnings;
}

RoundResult run_round(const ModelParams& global, std::span<const ClientState> clients, const TrainConfig& cfg,
                      std::uint32_t round, std::span<const Example> eval_set) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const auto chosen = sample_clients(clients.size(), cfg.participation, cfg.seed, round);

    std::vector<ClientUpdate> results(chosen.size());
    if (cfg.parallel && chosen.size() > 1) {
        std::vector<std::future<ClientUpdate>> futures;
        futures.reserve(chosen.size());
        for (auto i : chosen)
            futures.push_back(std::async(std::launch::async, [&, i] {
                return client_update(global, clients[i], cfg, round);
            }));
        for (std::size_t k = 0; k < futures.size(); ++k) results[k] = futures[k].get();
    } else {
        for (std::size_t k = 0; k < chosen.size(); ++k) results[k] = client_update(global, clients[chosen[k]], cfg, round);
    }

    RoundReport report;
    report.round = round;
    std::vector<WeightedParams> updates;
    for (auto& r : results) {
        if (r.status == ClientStatus::skipped_empty) {
            report.warnings.push_back(r.message);
            continue;
        }
        report.client_losses.push_back(r.train_loss);
        updates.push_back({r.client_id, std::move(*r.params), static_cast<double>(r.num_examples)});
    }
    if (updates.empty()) throw std::invalid_argument("run_round: every participating client has an empty dataset");

    ModelParams next = aggregate(std::move(updates), cfg.size_weighted);
    if (!eval_set.empty()) {
        const auto ev = evaluate(next, eval_set);
        report.eval_loss = ev.loss;
        report.eval_acc = ev.accuracy;
    }
    report.wall_time = std::chrono::steady_clock::now() - start;
    return {std::move(next), std::move(report)};
}

PartitionKind parse_partition(std::string_view name) {
    if (name == "iid") return PartitionKind::iid;
    if (name == "skew") return PartitionKind::skew;
    throw std::invalid_argument("unknown partition '" + std::string(name) + "' (expected iid or skew)");
}

SimulationResult run_simulation(const TrainConfig& cfg, std::span<const Example> corpus, const PartitionSpec& split,
                                std::uint32_t num_categories, std::uint32_t feature_dim,
                                std::optional<ModelParams> initial, std::uint32_t first_round) {
    cfg.validate();
    if (corpus.empty()) throw std::invalid_argument("run_simulation: empty corpus");
    if (!(split.holdout_fraction >= 0.0 && split.holdout_fraction < 1.0))
        throw std::invalid_argument("run_simulation: holdout_fraction must be in [0, 1)");
    if (split.kind == PartitionKind::explicit_assignment) {
        if (split.assignment.size() != corpus.size())
            throw std::invalid_argument("run_simulation: partition assigns " + std::to_string(split.assignment.size()) +
                                        " examples, corpus has " + std::to_string(corpus.size()));
        for (std::size_t i = 0; i < split.assignment.size(); ++i)
            if (split.assignment[i] >= cfg.num_clients)
                throw std::invalid_argument("run_simulation: example " + std::to_string(i) + " assigned to client " +
                                            std::to_string(split.assignment[i]) + " of " +
                                            std::to_string(cfg.num_clients));
    }
    for (const auto& ex : corpus)
        if (ex.label >= num_categories) throw std::invalid_argument("run_simulation: label out of range");

    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    seeded_shuffle(order, splitmix64(cfg.seed ^ 0x401D07ULL));
    auto holdout = static_cast<std::size_t>(std::floor(split.holdout_fraction * static_cast<double>(corpus.size())));
    if (holdout >= corpus.size()) holdout = 0;

    std::vector<Example> eval_set;
    std::vector<std::size_t> train_idx;
    std::vector<bool> held(corpus.size(), false);
    for (std::size_t k = 0; k < holdout; ++k) held[order[k]] = true;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (held[i]) eval_set.push_back(corpus[i]);
        else train_idx.push_back(i);
    }

    std::vector<std::vector<Example>> shards(cfg.num_clients);
    switch (split.kind) {
    case PartitionKind::iid: {
        auto shuffled = train_idx;
        seeded_shuffle(shuffled, splitmix64(cfg.seed ^ 0x11DULL));
        for (std::size_t k = 0; k < shuffled.size(); ++k) shards[k % cfg.num_clients].push_back(corpus[shuffled[k]]);
        break;
    }
    case PartitionKind::skew: {
        auto sorted = train_idx;
        std::stable_sort(sorted.begin(), sorted.end(),
                         [&](std::size_t a, std::size_t b) { return corpus[a].label < corpus[b].label; });
        const std::size_t n = sorted.size();
        for (std::size_t k = 0; k < n; ++k) shards[k * cfg.num_clients / n].push_back(corpus[sorted[k]]);
        break;
    }
    case PartitionKind::explicit_assignment:
        for (auto i : train_idx) shards[split.assignment[i]].push_back(corpus[i]);
        break;
    }

    std::vector<ClientState> clients;
    clients.reserve(cfg.num_clients);
    for (std::uint32_t c = 0; c < cfg.num_clients; ++c)
        clients.emplace_back("client-" + std::to_string(c + 1), std::move(shards[c]));

    if (eval_set.empty())
        for (auto i : train_idx) eval_set.push_back(corpus[i]);

    SimulationResult result{initial ? std::move(*initial) : ModelParams(num_categories, feature_dim), {}};
    if (result.global.num_categories() != num_categories || result.global.feature_dim() != feature_dim)
        throw ContractViolation("run_simulation: initial params do not match model dimensions");
    for (std::uint32_t r = 0; r < cfg.rounds; ++r) {
        auto rr = run_round(result.global, clients, cfg, first_round + r, eval_set);
        result.global = std::move(rr.global);
        result.reports.push_back(std::move(rr.report));
    }
    return result;
}

}  // namespace fedfeed
