#include "fedfeed/cli.hpp"
#include "fedfeed/synth.hpp"
#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <sstream>

using namespace fedfeed;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> v;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);)
        if (!l.empty()) v.push_back(l);
    return v;
}

Run ingest_fixture(const std::filesystem::path& state) {
    const auto d = testing::data_dir() / "fixture";
    return cli({"ingest", "--users", (d / "users.jsonl").string(), "--posts", (d / "posts.jsonl").string(),
                "--interactions", (d / "interactions.jsonl").string(), "--state", state.string(), "--categories",
                "news,media,politics,sports"});
}

std::string argmax(const json& dist) {
    std::string best;
    double top = -1.0;
    for (const auto& [k, v] : dist.items())
        if (v.get<double>() > top) top = v.get<double>(), best = k;
    return best;
}

}  // namespace

TEST_CASE("usage errors exit 2, help exits 0") {
    CHECK(cli({}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({"feed", "--user", "u1"}).code == 2);
}

TEST_CASE("ingest reports counts and errors") {
    testing::TempDir dir;
    const auto r = ingest_fixture(dir / "s.json");
    CHECK(r.code == 0);
    CHECK(r.out.find("users: 4, posts: 20, interactions: 60") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "s.json"));

    const auto d = testing::data_dir() / "fixture";
    const auto missing = cli({"ingest", "--users", (dir / "absent.jsonl").string(), "--posts",
                              (d / "posts.jsonl").string(), "--interactions", (d / "interactions.jsonl").string(),
                              "--state", (dir / "t.json").string()});
    CHECK(missing.code == 1);
    CHECK(missing.err.find("absent.jsonl") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "t.json"));

    auto posts = testing::slurp(d / "posts.jsonl");
    std::size_t at = 0;
    for (int i = 0; i < 6; ++i) at = posts.find('\n', at) + 1;
    posts.insert(at, "{\"post_id\": truncated\n");
    testing::spit(dir / "posts.jsonl", posts);
    const auto malformed = cli({"ingest", "--users", (d / "users.jsonl").string(), "--posts",
                                (dir / "posts.jsonl").string(), "--interactions",
                                (d / "interactions.jsonl").string(), "--state", (dir / "u.json").string(),
                                "--categories", "news,media,politics,sports"});
    CHECK(malformed.code == 1);
    CHECK(malformed.err.find("posts.jsonl:7") != std::string::npos);
}

TEST_CASE("synth is reproducible") {
    testing::TempDir dir;
    const auto a = cli({"synth", "--users", "4", "--posts-per-user", "25", "--seed", "7", "--out", (dir / "a").string()});
    const auto b = cli({"synth", "--users", "4", "--posts-per-user", "25", "--seed", "7", "--out", (dir / "b").string()});
    const auto c = cli({"synth", "--users", "4", "--posts-per-user", "25", "--seed", "8", "--out", (dir / "c").string()});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    for (const auto* f : {"users.jsonl", "posts.jsonl", "interactions.jsonl"})
        CHECK(testing::slurp(dir / "a" / f) == testing::slurp(dir / "b" / f));
    CHECK(testing::slurp(dir / "a" / "posts.jsonl") != testing::slurp(dir / "c" / "posts.jsonl"));
    CHECK(lines(testing::slurp(dir / "a" / "posts.jsonl")).size() == 100);
    CHECK(lines(testing::slurp(dir / "a" / "users.jsonl")).size() == 4);
    CHECK(cli({"synth", "--categories", "7", "--out", (dir / "d").string()}).code == 2);
}

TEST_CASE("train prints one json line per round") {
    testing::TempDir dir;
    const auto state = (dir / "s.json").string();
    REQUIRE(ingest_fixture(state).code == 0);
    CHECK(cli({"train", "--state", state, "--rounds", "0"}).code == 2);
    CHECK(cli({"train", "--state", state, "--partition", "diagonal"}).code != 0);

    const auto r = cli({"train", "--state", state, "--rounds", "3", "--clients", "2"});
    REQUIRE(r.code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 3);
    for (std::size_t i = 0; i < ls.size(); ++i) {
        const auto j = json::parse(ls[i]);
        CHECK(j["round"] == i + 1);
        CHECK(j["client_losses"].size() == 2);
        CHECK(j.contains("eval_acc"));
    }
    // Training resumes from the saved model.
    const auto more = lines(cli({"train", "--state", state, "--rounds", "1"}).out);
    REQUIRE(more.size() == 1);
    CHECK(json::parse(more[0])["round"] == 4);

    CHECK(cli({"train", "--state", (dir / "none.json").string()}).code == 1);
}

TEST_CASE("feed and persona commands") {
    testing::TempDir dir;
    const auto state = (dir / "s.json").string();
    REQUIRE(ingest_fixture(state).code == 0);
    REQUIRE(cli({"train", "--state", state, "--rounds", "5"}).code == 0);

    const auto table = cli({"feed", "--state", state, "--user", "u1"});
    CHECK(table.code == 0);
    CHECK(table.out.find("rank") != std::string::npos);

    const auto j = cli({"feed", "--state", state, "--user", "u1", "--json", "--limit", "2"});
    REQUIRE(j.code == 0);
    const auto body = json::parse(j.out);
    CHECK(body["items"].size() <= 2);
    CHECK(body["user_id"] == "u1");

    const auto unknown = cli({"feed", "--state", state, "--user", "ghost"});
    CHECK(unknown.code == 1);
    CHECK(unknown.err.find("ghost") != std::string::npos);
    CHECK(cli({"feed", "--state", state, "--user", "u1", "--limit", "0"}).code == 2);

    const auto p = cli({"persona", "--state", state, "--user", "u1", "--json"});
    REQUIRE(p.code == 0);
    const auto persona = json::parse(p.out);
    double sum = 0.0;
    for (const auto& [_, v] : persona["distribution"].items()) sum += v.get<double>();
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cli({"persona", "--state", state, "--user", "u1"}).out.find("sports") != std::string::npos);
}

TEST_CASE("a bad config file is an error") {
    testing::TempDir dir;
    testing::spit(dir / "c.json", "{\"feedback\": {\"eta\": 7}}");
    const auto r = cli({"--config", (dir / "c.json").string(), "synth", "--out", (dir / "x").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("error:") == 0);
}

TEST_CASE("persona recovers the planted preference") {
    testing::TempDir dir;
    const auto corpus_dir = dir / "corpus";
    const auto state = (dir / "s.json").string();
    REQUIRE(cli({"synth", "--users", "40", "--posts-per-user", "25", "--categories", "4", "--seed", "42", "--out",
                 corpus_dir.string()}).code == 0);

    SynthConfig sc;
    const auto corpus = synthesize(sc);
    std::string names;
    for (std::size_t k = 0; k < corpus.categories.size(); ++k)
        names += (k ? "," : "") + corpus.categories.name(k);
    REQUIRE(cli({"ingest", "--users", (corpus_dir / "users.jsonl").string(), "--posts",
                 (corpus_dir / "posts.jsonl").string(), "--interactions",
                 (corpus_dir / "interactions.jsonl").string(), "--state", state, "--categories", names})
                .code == 0);
    REQUIRE(cli({"train", "--state", state, "--clients", "4", "--rounds", "20", "--lr", "0.1", "--seed", "42"}).code == 0);

    const auto& planted = corpus.planted.at("u1");
    const auto want = corpus.categories.name(
        static_cast<std::size_t>(std::max_element(planted.begin(), planted.end()) - planted.begin()));
    const auto p = json::parse(cli({"persona", "--state", state, "--user", "u1", "--json"}).out);
    CHECK(argmax(p["distribution"]) == want);
}
