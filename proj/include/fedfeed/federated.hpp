#pragma once
// Federated training: clients take local gradient steps from the broadcast
// global parameters; the server averages the returned parameters.
//
// Only ModelParams and scalar loss telemetry cross the client boundary.
// ClientState keeps its examples private and exposes no accessor for them.

#include "fedfeed/model.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fedfeed {

struct TrainConfig {
    double learning_rate = 0.1;
    std::uint32_t local_epochs = 1;
    std::uint32_t batch_size = 0;  // 0 = full batch
    std::uint32_t rounds = 1;
    std::uint32_t num_clients = 4;
    std::uint64_t seed = 42;
    bool size_weighted = false;  // off: uniform 1/N averaging
    double participation = 1.0;  // fraction of clients sampled per round
    bool parallel = true;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

enum class ClientStatus { ok, skipped_empty };

struct ClientUpdate {
    std::string client_id;
    ClientStatus status = ClientStatus::ok;
    std::optional<ModelParams> params;
    double train_loss = 0.0;
    std::size_t num_examples = 0;
    std::string message;
};

class ClientState {
public:
    ClientState(std::string client_id, std::vector<Example> dataset);

    const std::string& id() const { return id_; }
    std::size_t num_examples() const { return dataset_.size(); }

private:
    friend ClientUpdate client_update(const ModelParams& global, const ClientState& client,
                                      const TrainConfig& cfg, std::uint32_t round);

    std::string id_;
    std::vector<Example> dataset_;
};

// Seed for one client's batch shuffling in one round; independent of
// scheduling order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t round, std::string_view client_id);

/// Local training from the global parameters: for each of cfg.local_epochs
/// passes, step params -= lr * grad over each batch. With one epoch and a
/// full batch this is exactly one step on the whole client dataset, with no
/// reordering. An empty dataset yields status skipped_empty and no params.
ClientUpdate client_update(const ModelParams& global, const ClientState& client, const TrainConfig& cfg,
                           std::uint32_t round = 1);

struct WeightedParams {
    std::string client_id;
    ModelParams params;
    double weight = 1.0;
};

// Coordinate-wise mean, summed in client_id order. Each coordinate is
// clamped into [min, max] across updates, so N copies of P average to P.
// With size_weighted, weights are normalized; otherwise every weight is 1/N.
ModelParams aggregate(std::vector<WeightedParams> updates, bool size_weighted = false);
ModelParams aggregate(std::span<const ModelParams> updates);

struct RoundReport {
    std::uint32_t round = 0;
    std::vector<double> client_losses;
    double eval_loss = 0.0;
    double eval_acc = 0.0;
    std::chrono::nanoseconds wall_time{0};
    std::vector<std::string> warnings;

    // Equality ignores wall_time.
    bool same_outcome(const RoundReport& other) const;
};

struct RoundResult {
    ModelParams global;
    RoundReport report;
};

RoundResult run_round(const ModelParams& global, std::span<const ClientState> clients, const TrainConfig& cfg,
                      std::uint32_t round, std::span<const Example> eval_set = {});

enum class PartitionKind { iid, skew, explicit_assignment };

struct PartitionSpec {
    PartitionKind kind = PartitionKind::iid;
    std::vector<std::size_t> assignment;  // client index per corpus example (explicit_assignment)
    double holdout_fraction = 0.2;
};

PartitionKind parse_partition(std::string_view name);

struct SimulationResult {
    ModelParams global;
    std::vector<RoundReport> reports;
};

/// Holds out a seeded fraction of the corpus for evaluation, partitions the
/// rest across cfg.num_clients clients, then runs cfg.rounds rounds starting
/// from `initial` (zeros when absent). Round numbers start at first_round.
SimulationResult run_simulation(const TrainConfig& cfg, std::span<const Example> corpus,
                                const PartitionSpec& split, std::uint32_t num_categories,
                                std::uint32_t feature_dim, std::optional<ModelParams> initial = std::nullopt,
                                std::uint32_t first_round = 1);

}  // namespace fedfeed
