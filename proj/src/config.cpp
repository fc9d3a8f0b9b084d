#include "fedfeed/config.hpp"

#include <json.hpp>

#include <cstdlib>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fedfeed {

using nlohmann::json;

namespace {

template <typename T>
void read_opt(const json& obj, const char* key, T& dst) {
    if (auto it = obj.find(key); it != obj.end() && !it->is_null()) dst = it->get<T>();
}

const json& section(const json& doc, const char* key) {
    static const json empty = json::object();
    auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) return empty;
    if (!it->is_object()) throw std::invalid_argument(std::string("config: \"") + key + "\" must be an object");
    return *it;
}

}  // namespace

Config Config::parse(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: malformed JSON (") + e.what() + ")");
    }
    if (!doc.is_object()) throw std::invalid_argument("config: top level must be an object");

    Config c;
    try {
        if (auto it = doc.find("categories"); it != doc.end())
            c.categories = CategorySet(it->get<std::vector<std::string>>());
        read_opt(doc, "feature_dim", c.feature_dim);

        const auto& p = section(doc, "persona");
        EngagementWeights ew = c.persona.engagement();
        ScoreMix mix = c.persona.mix();
        double max_e = c.persona.max_engagement();
        read_opt(p, "w_likes", ew.likes);
        read_opt(p, "w_shares", ew.shares);
        read_opt(p, "w_comments", ew.comments);
        read_opt(p, "max_engagement", max_e);
        read_opt(p, "w_engagement", mix.engagement);
        read_opt(p, "w_sentiment", mix.sentiment);
        read_opt(p, "w_readability", mix.readability);
        c.persona = PersonaWeights(ew, max_e, mix);

        const auto& r = section(doc, "ranking");
        read_opt(r, "w_like", c.ranking.w_like);
        read_opt(r, "w_comment", c.ranking.w_comment);
        read_opt(r, "w_share", c.ranking.w_share);
        read_opt(r, "w_comments", c.ranking.w_comments);
        read_opt(r, "w_likes", c.ranking.w_likes);
        read_opt(r, "w_shares", c.ranking.w_shares);
        read_opt(r, "w_recency", c.ranking.w_recency);
        read_opt(r, "epsilon_seconds", c.ranking.epsilon_seconds);

        const auto& f = section(doc, "filter");
        read_opt(f, "tau", c.filter.tau);
        read_opt(f, "exclude_negative", c.filter.exclude_negative);
        read_opt(f, "exclude_spam", c.filter.exclude_spam);
        read_opt(f, "max_grade", c.filter.max_grade);
        read_opt(f, "trend_window_seconds", c.filter.trend_window);
        read_opt(f, "general_post_factor", c.filter.general_post_factor);
        if (auto it = f.find("category_whitelist"); it != f.end() && !it->is_null())
            c.filter.category_whitelist = it->get<std::set<std::string>>();

        const auto& fb = section(doc, "feedback");
        read_opt(fb, "eta", c.feedback.eta);
        read_opt(fb, "floor", c.feedback.floor);

        const auto& rd = section(doc, "readability");
        read_opt(rd, "professional_grade", c.readability.professional_grade);
        read_opt(rd, "min_dictionary_ratio", c.readability.min_dictionary_ratio);
        read_opt(rd, "max_unterminated_tokens", c.readability.max_unterminated_tokens);

        const auto& t = section(doc, "training");
        read_opt(t, "learning_rate", c.training.learning_rate);
        read_opt(t, "local_epochs", c.training.local_epochs);
        read_opt(t, "batch_size", c.training.batch_size);
        read_opt(t, "rounds", c.training.rounds);
        read_opt(t, "num_clients", c.training.num_clients);
        read_opt(t, "seed", c.training.seed);
        read_opt(t, "size_weighted", c.training.size_weighted);
        read_opt(t, "participation", c.training.participation);
        read_opt(t, "holdout_fraction", c.holdout_fraction);

        if (auto it = doc.find("lexicon_path"); it != doc.end() && it->is_string())
            c.lexicon_path = it->get<std::string>();
        if (auto it = doc.find("common_words_path"); it != doc.end() && it->is_string())
            c.common_words_path = it->get<std::string>();
        if (auto it = doc.find("state_path"); it != doc.end() && it->is_string())
            c.state_path = it->get<std::string>();
        read_opt(doc, "port", c.port);
        read_opt(doc, "cors_origin", c.cors_origin);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

Config Config::from_environment(std::optional<std::filesystem::path> explicit_path) {
    Config c;
    if (explicit_path) c = load(*explicit_path);
    else if (const char* p = std::getenv("FEDFEED_CONFIG"); p && *p) c = load(p);
    if (const char* port = std::getenv("FEDFEED_PORT"); port && *port) {
        const std::string_view text(port);
        int v = 0;
        const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || end != text.data() + text.size() || v <= 0 || v > 65535) throw std::invalid_argument("FEDFEED_PORT must be a port number");
        c.port = static_cast<std::uint16_t>(v);
    }
    if (const char* s = std::getenv("FEDFEED_STATE_PATH"); s && *s) c.state_path = s;
    return c;
}

void Config::validate() const {
    try {
        ModelParams(static_cast<std::uint32_t>(categories.size()), feature_dim);
    } catch (const ContractViolation& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    ranking.validate();
    filter.validate();
    feedback.validate();
    training.validate();
    if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0))
        throw std::invalid_argument("config: holdout_fraction must be in [0, 1)");
}

}  // namespace fedfeed
