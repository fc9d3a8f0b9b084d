#include "fedfeed/cli.hpp"

#include "fedfeed/pipeline.hpp"
#include "fedfeed/service.hpp"
#include "fedfeed/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <iomanip>
#include <thread>

namespace fedfeed {

namespace {

// Data and validation failures map to exit code 1.
struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Config load_config(const std::string& path) {
    return Config::from_environment(path.empty() ? std::nullopt : std::optional<std::filesystem::path>(path));
}

std::shared_ptr<Store> open_state(const Config& cfg, const std::string& path) {
    if (!std::filesystem::exists(path)) throw Failure("state file not found: " + path);
    auto store = std::make_shared<Store>(cfg.categories, cfg.feature_dim);
    store->restore(path);
    return store;
}

Timestamp wall_now() {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

std::string clip(const std::string& text, std::size_t n) {
    if (text.size() <= n) return text;
    return text.substr(0, n - 3) + "...";
}

int serve(const Config& cfg, const std::string& state, int port, std::ostream& out) {
    auto store = open_state(cfg, state);
    auto pipeline = std::make_shared<const Pipeline>(cfg);

    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    Service service(pipeline, store, std::filesystem::path(state));
    std::atomic<bool> done{false};
    std::thread waiter([&] {
        const timespec tick{0, 200'000'000};
        while (!done) {
            if (sigtimedwait(&set, nullptr, &tick) > 0) {
                service.stop();
                return;
            }
        }
    });
    out << "listening on port " << port << std::endl;
    const bool ok = service.listen("0.0.0.0", port);
    done = true;
    waiter.join();
    service.persist();
    pthread_sigmask(SIG_UNBLOCK, &set, nullptr);
    if (!ok) throw Failure("cannot bind port " + std::to_string(port));
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Federated content filtering and feed ranking", "fedfeed"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);

    std::string users, posts, interactions, state, user, categories, partition = "author", out_dir;
    auto* ingest = app.add_subcommand("ingest", "Load JSONL files into a new state file");
    ingest->add_option("--users", users)->required();
    ingest->add_option("--posts", posts)->required();
    ingest->add_option("--interactions", interactions)->required();
    ingest->add_option("--state", state)->required();
    ingest->add_option("--categories", categories, "Comma-separated category names");

    SynthConfig sc;
    auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic corpus");
    synth->add_option("--users", sc.users)->check(CLI::PositiveNumber);
    synth->add_option("--posts-per-user", sc.posts_per_user);
    synth->add_option("--categories", sc.categories)->check(CLI::Range(1, 6));
    synth->add_option("--seed", sc.seed);
    synth->add_option("--interactions-per-user", sc.interactions_per_user);
    synth->add_option("--friend-prob", sc.friend_probability)->check(CLI::Range(0.0, 1.0));
    synth->add_option("--out", out_dir)->required();

    std::optional<std::uint32_t> clients, rounds, batch, epochs;
    std::optional<double> lr;
    std::optional<std::uint64_t> seed;
    auto* train = app.add_subcommand("train", "Run federated training over the labeled posts in a state");
    train->add_option("--state", state)->required();
    train->add_option("--clients", clients)->check(CLI::PositiveNumber);
    train->add_option("--rounds", rounds)->check(CLI::PositiveNumber);
    train->add_option("--lr", lr)->check(CLI::PositiveNumber);
    train->add_option("--seed", seed);
    train->add_option("--partition", partition)->check(CLI::IsMember({"author", "iid", "skew"}));
    train->add_option("--batch-size", batch, "0 means full batch");
    train->add_option("--local-epochs", epochs)->check(CLI::PositiveNumber);

    bool as_json = false;
    std::size_t limit = 20;
    auto* feed = app.add_subcommand("feed", "Print a user's ranked feed");
    feed->add_option("--state", state)->required();
    feed->add_option("--user", user)->required();
    feed->add_option("--limit", limit)->check(CLI::Range(1, 200));
    feed->add_flag("--json", as_json);

    auto* persona = app.add_subcommand("persona", "Print a user's persona distribution");
    persona->add_option("--state", state)->required();
    persona->add_option("--user", user)->required();
    persona->add_flag("--json", as_json);

    int port = -1;
    auto* srv = app.add_subcommand("serve", "Run the HTTP service");
    srv->add_option("--state", state)->required();
    srv->add_option("--port", port)->check(CLI::Range(0, 65535));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << "run with --help for usage\n";
        return 2;
    }

    try {
        auto cfg = load_config(config_path);
        if (*ingest) {
            if (!categories.empty()) {
                std::vector<std::string> names;
                std::stringstream ss(categories);
                for (std::string n; std::getline(ss, n, ',');)
                    if (!n.empty()) names.push_back(n);
                cfg.categories = CategorySet(names);
            }
            Store store(cfg.categories, cfg.feature_dim);
            const auto counts = store.ingest({users, posts, interactions}, wall_now());
            store.persist(state);
            out << "users: " << counts.users << ", posts: " << counts.posts << ", interactions: " << counts.interactions
                << "\n";
        } else if (*synth) {
            const auto corpus = synthesize(sc);
            const auto paths = write_corpus(corpus, out_dir);
            out << "wrote " << corpus.users.size() << " users, " << corpus.posts.size() << " posts, "
                << corpus.interactions.size() << " interactions to " << out_dir << "\n";
            out << "categories: ";
            for (std::size_t k = 0; k < corpus.categories.size(); ++k)
                out << (k ? "," : "") << corpus.categories.name(k);
            out << "\n";
            (void)paths;
        } else if (*train) {
            auto store = open_state(cfg, state);
            TrainConfig tc = cfg.training;
            if (clients) tc.num_clients = *clients;
            if (rounds) tc.rounds = *rounds;
            if (lr) tc.learning_rate = *lr;
            if (seed) tc.seed = *seed;
            if (batch) tc.batch_size = *batch;
            if (epochs) tc.local_epochs = *epochs;
            PartitionSpec split;
            split.holdout_fraction = cfg.holdout_fraction;
            split.kind = partition == "author" ? PartitionKind::explicit_assignment : parse_partition(partition);
            const Pipeline pipeline(cfg);
            auto outcome = pipeline.train(*store->snapshot(), tc, split);
            for (const auto& r : outcome.reports) out << round_report_json(r).dump() << "\n";
            const auto& last = outcome.reports.back();
            store->set_model(std::move(outcome.global), last.round, last.eval_acc);
            store->persist(state);
        } else if (*feed) {
            auto store = open_state(cfg, state);
            const Pipeline pipeline(cfg);
            const auto snap = store->snapshot();
            if (!snap->find_user(user)) throw Failure("unknown user " + user);
            const auto body = pipeline.feed_body(*snap, user, {cfg.filter, limit});
            if (as_json) {
                out << body.dump() << "\n";
            } else {
                out << std::left << std::setw(5) << "rank" << std::setw(10) << "post" << std::setw(10) << "author"
                    << std::setw(20) << "category" << std::setw(14) << "score" << "text\n";
                for (const auto& it : body["items"]) {
                    std::ostringstream score;
                    score << std::setprecision(6) << it["final_score"].get<double>();
                    std::string cat = it["category"].get<std::string>();
                    if (it["general"].get<bool>()) cat += "*";
                    out << std::left << std::setw(5) << it["rank"].get<std::size_t>() << std::setw(10)
                        << it["post_id"].get<std::string>() << std::setw(10) << it["author_id"].get<std::string>()
                        << std::setw(20) << cat << std::setw(14) << score.str()
                        << clip(it["text"].get<std::string>(), 60) << "\n";
                }
                out << body["items"].size() << " of " << body["total"].get<std::size_t>()
                    << " posts (* = general)\n";
                for (const auto& w : body["warnings"]) err << "warning: " << w.get<std::string>() << "\n";
            }
        } else if (*persona) {
            auto store = open_state(cfg, state);
            const Pipeline pipeline(cfg);
            const auto snap = store->snapshot();
            if (!snap->find_user(user)) throw Failure("unknown user " + user);
            const auto body = pipeline.persona_body(*snap, user);
            if (as_json) {
                out << body.dump() << "\n";
            } else {
                out << std::left << std::setw(20) << "category" << std::setw(14) << "distribution" << "beta\n";
                for (const auto& [name, mass] : body["distribution"].items()) {
                    out << std::left << std::setw(20) << name << std::setw(14) << std::fixed << std::setprecision(6)
                        << mass.get<double>() << body["beta"][name].get<double>() << "\n";
                    out.unsetf(std::ios::fixed);
                }
            }
        } else if (*srv) {
            if (port >= 0) cfg.port = static_cast<std::uint16_t>(port);
            return serve(cfg, state, cfg.port, out);
        }
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace fedfeed
