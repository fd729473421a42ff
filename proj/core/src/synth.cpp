#include "facet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "facet/distance.hpp"
#include "facet/errors.hpp"
#include "facet/io.hpp"
#include "facet/rng.hpp"

namespace facet::synth {

namespace {

void validate(const WorldConfig& c) {
    if (c.dimension < 2) throw ValidationError("world: dimension must be at least 2");
    if (c.topics == 0 || c.pins_per_topic == 0) throw ValidationError("world: no pins");
    if (c.users == 0 || c.days == 0) throw ValidationError("world: no activity");
    if (c.interests_min == 0 || c.interests_min > c.interests_max ||
        c.interests_max > c.topics) {
        throw ValidationError("world: interest range must fit inside [1, topics]");
    }
    if (c.actions_min == 0 || c.actions_min > c.actions_max) {
        throw ValidationError("world: actions range is empty");
    }
    if (!(c.dominant_weight > 0.0) || !(c.focus_boost > 0.0)) {
        throw ValidationError("world: interest weights must be positive");
    }
    if (c.niche_candidates == 0) {
        throw ValidationError("world: niche_candidates must be at least 1");
    }
    if (!(c.anchor_spread >= 0.0)) {
        throw ValidationError("world: anchor_spread must be non-negative");
    }
    if (!(c.impression_focus >= 0.0) || !(c.impression_focus <= 1.0) ||
        !(c.impression_blend >= 0.0) || !(c.impression_blend <= 1.0) ||
        c.impression_focus + c.impression_blend > 1.0) {
        throw ValidationError("world: impression shares must be in [0, 1] and sum to at most 1");
    }
    if (!(c.noise_sigma >= 0.0) || !(c.max_center_cosine > -1.0) ||
        !(c.max_center_cosine <= 1.0)) {
        throw ValidationError("world: bad noise or separation parameter");
    }
    if (!(c.mixture_beta_min >= 0.0) || !(c.mixture_beta_max <= 1.0) ||
        !(c.mixture_beta_min <= c.mixture_beta_max)) {
        throw ValidationError("world: mixture blend range must lie in [0, 1]");
    }
    if (c.switch_probability < 0.0 || c.switch_probability > 1.0 ||
        c.repeat_probability < 0.0 || c.repeat_probability > 1.0 ||
        c.exploration_probability < 0.0 || c.exploration_probability > 1.0) {
        throw ValidationError("world: probabilities must lie in [0, 1]");
    }
}

std::vector<float> random_unit(std::size_t d, Rng& rng) {
    std::vector<double> v(d);
    double norm_sq = 0.0;
    do {
        norm_sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            v[j] = rng.next_gaussian();
            norm_sq += v[j] * v[j];
        }
    } while (!(norm_sq > 0.0));
    const double norm = std::sqrt(norm_sq);
    std::vector<float> out(d);
    for (std::size_t j = 0; j < d; ++j) out[j] = static_cast<float>(v[j] / norm);
    return out;
}

// Rejection-sampled unit centers with every pairwise cosine below the bound.
std::vector<std::vector<float>> place_centers(const WorldConfig& c, Rng& rng) {
    std::vector<std::vector<float>> centers;
    centers.reserve(c.topics);
    std::size_t attempts = 0;
    while (centers.size() < c.topics) {
        if (++attempts > 10000 * c.topics) {
            throw ValidationError("world: could not separate topic centers; lower "
                                  "max_center_cosine or the topic count");
        }
        std::vector<float> candidate = random_unit(c.dimension, rng);
        bool ok = true;
        for (const auto& center : centers) {
            if (cosine_similarity(center, candidate) >= c.max_center_cosine) {
                ok = false;
                break;
            }
        }
        if (ok) centers.push_back(std::move(candidate));
    }
    return centers;
}

std::size_t pick_weighted(std::span<const double> weights, Rng& rng) {
    double total = 0.0;
    for (const double w : weights) total += w;
    const double mark = rng.next_double() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (mark < acc) return i;
    }
    return weights.size() - 1;
}

} // namespace

World generate_world(const WorldConfig& config) {
    validate(config);
    World world(config.dimension);
    Rng root(config.seed);

    Rng center_rng = root.fork(1);
    const auto centers = place_centers(config, center_rng);

    // Pins: ids are 1-based and topic-major, so pin (t * pins_per_topic + i + 1)
    // belongs to topic t.
    Rng pin_rng = root.fork(2);
    for (std::size_t t = 0; t < config.topics; ++t) {
        for (std::size_t i = 0; i < config.pins_per_topic; ++i) {
            std::vector<double> v(config.dimension);
            double norm_sq = 0.0;
            for (std::size_t j = 0; j < config.dimension; ++j) {
                v[j] = centers[t][j] + config.noise_sigma * pin_rng.next_gaussian();
                norm_sq += v[j] * v[j];
            }
            if (!(norm_sq > 0.0)) throw ValidationError("world: degenerate pin embedding");
            const double norm = std::sqrt(norm_sq);
            std::vector<float> emb(config.dimension);
            for (std::size_t j = 0; j < config.dimension; ++j) {
                emb[j] = static_cast<float>(v[j] / norm);
            }
            const PinId id = static_cast<PinId>(t * config.pins_per_topic + i + 1);
            world.pins.add(id, emb, static_cast<float>(pin_rng.next_double()));
            world.pin_topics.push_back(static_cast<std::uint32_t>(t));
        }
    }

    // Mixture pins blend two topic centers each.  Ids continue after the
    // topical block; the blend weight stays away from 0 and 1 so no mixture
    // lands on a topic core.
    Rng mixture_rng = root.fork(3);
    if (config.mixture_per_pair > 0 && config.topics > 1) {
        PinId next_id = static_cast<PinId>(config.topics * config.pins_per_topic + 1);
        for (std::size_t a = 0; a < config.topics; ++a) {
            for (std::size_t b = a + 1; b < config.topics; ++b) {
                for (std::size_t i = 0; i < config.mixture_per_pair; ++i) {
                    const double beta =
                        config.mixture_beta_min +
                        mixture_rng.next_double() *
                            (config.mixture_beta_max - config.mixture_beta_min);
                    std::vector<double> v(config.dimension);
                    double norm_sq = 0.0;
                    for (std::size_t j = 0; j < config.dimension; ++j) {
                        v[j] = beta * centers[a][j] + (1.0 - beta) * centers[b][j] +
                               config.noise_sigma * mixture_rng.next_gaussian();
                        norm_sq += v[j] * v[j];
                    }
                    if (!(norm_sq > 0.0)) {
                        throw ValidationError("world: degenerate mixture embedding");
                    }
                    const double norm = std::sqrt(norm_sq);
                    std::vector<float> emb(config.dimension);
                    for (std::size_t j = 0; j < config.dimension; ++j) {
                        emb[j] = static_cast<float>(v[j] / norm);
                    }
                    world.pins.add(next_id++, emb,
                                   static_cast<float>(mixture_rng.next_double()));
                    world.pin_topics.push_back(static_cast<std::uint32_t>(config.topics));
                }
            }
        }
    }

    // Impressions follow a fixed popularity curve. The head interleaves each
    // topic's most central pins (popular content is mainstream content);
    // mixtures fill the tail.
    const std::size_t total_pins = world.pins.size();
    std::vector<std::vector<PinId>> central(config.topics);
    for (std::size_t t = 0; t < config.topics; ++t) {
        central[t].resize(config.pins_per_topic);
        for (std::size_t i = 0; i < config.pins_per_topic; ++i) {
            central[t][i] = static_cast<PinId>(t * config.pins_per_topic + i + 1);
        }
        std::sort(central[t].begin(), central[t].end(), [&](PinId a, PinId b) {
            const double da = squared_euclidean(world.pins.embedding(a), centers[t]);
            const double db = squared_euclidean(world.pins.embedding(b), centers[t]);
            return da != db ? da < db : a < b;
        });
    }
    std::vector<PinId> by_popularity;
    by_popularity.reserve(total_pins);
    for (std::size_t i = 0; i < config.pins_per_topic; ++i) {
        for (std::size_t t = 0; t < config.topics; ++t) {
            by_popularity.push_back(central[t][i]);
        }
    }
    for (std::size_t id = config.topics * config.pins_per_topic; id < total_pins;
         ++id) {
        by_popularity.push_back(static_cast<PinId>(id + 1));
    }
    const auto harmonic_prefix = [](std::size_t n) {
        std::vector<double> prefix(n);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += 1.0 / static_cast<double>(i + 1);
            prefix[i] = acc;
        }
        return prefix;
    };
    const std::vector<double> popularity_prefix = harmonic_prefix(total_pins);
    const std::vector<double> topic_prefix = harmonic_prefix(config.pins_per_topic);
    const auto draw_ranked = [](Rng& rng, const std::vector<double>& prefix,
                                const std::vector<PinId>& ranked) {
        const double mark = rng.next_double() * prefix.back();
        const auto it = std::upper_bound(prefix.begin(), prefix.end(), mark);
        const std::size_t idx = std::min(
            static_cast<std::size_t>(it - prefix.begin()), ranked.size() - 1);
        return ranked[idx];
    };
    // Pair (a, b) with a < b maps to its block of mixture pins.
    const auto mixture_block = [&](std::size_t a, std::size_t b) {
        if (a > b) std::swap(a, b);
        const std::size_t pair_index =
            a * config.topics - a * (a + 1) / 2 + (b - a - 1);
        return config.topics * config.pins_per_topic +
               pair_index * config.mixture_per_pair;
    };
    // Some impressions come from the surface the user is browsing or from
    // crossover content next to it; the rest follow the global feed.
    const auto draw_impression = [&](Rng& rng, std::size_t topic) {
        double share = rng.next_double();
        if (share < config.impression_focus) {
            return draw_ranked(rng, topic_prefix, central[topic]);
        }
        share -= config.impression_focus;
        if (share < config.impression_blend && config.mixture_per_pair > 0 &&
            config.topics > 1) {
            std::size_t other = static_cast<std::size_t>(
                rng.next_below(config.topics - 1));
            if (other >= topic) ++other;
            const std::size_t offset = static_cast<std::size_t>(
                rng.next_below(config.mixture_per_pair));
            return static_cast<PinId>(mixture_block(topic, other) + offset + 1);
        }
        return draw_ranked(rng, popularity_prefix, by_popularity);
    };

    for (std::size_t u = 0; u < config.users; ++u) {
        const UserId user = static_cast<UserId>(u + 1);
        Rng rng = root.fork(100 + u);

        const std::size_t n_interests =
            config.interests_min +
            static_cast<std::size_t>(
                rng.next_below(config.interests_max - config.interests_min + 1));
        std::vector<std::size_t> topics(config.topics);
        for (std::size_t t = 0; t < config.topics; ++t) topics[t] = t;
        for (std::size_t i = 0; i < n_interests; ++i) {
            const std::size_t j =
                i + static_cast<std::size_t>(rng.next_below(config.topics - i));
            std::swap(topics[i], topics[j]);
        }
        topics.resize(n_interests);
        // One dominant interest; the rest draw light Exp(1) weights.
        std::vector<double> weights(n_interests);
        weights[0] = config.dominant_weight;
        for (std::size_t i = 1; i < n_interests; ++i) {
            weights[i] = -std::log(rng.next_double_open()) + 1e-9;
        }
        // A personal anchor inside each interest; pin picks gravitate to it.
        std::vector<std::vector<float>> anchors(n_interests);
        for (std::size_t i = 0; i < n_interests; ++i) {
            std::vector<double> v(config.dimension);
            double norm_sq = 0.0;
            for (std::size_t j = 0; j < config.dimension; ++j) {
                v[j] = centers[topics[i]][j] +
                       config.anchor_spread * config.noise_sigma * rng.next_gaussian();
                norm_sq += v[j] * v[j];
            }
            if (!(norm_sq > 0.0)) throw ValidationError("world: degenerate anchor");
            const double norm = std::sqrt(norm_sq);
            anchors[i].resize(config.dimension);
            for (std::size_t j = 0; j < config.dimension; ++j) {
                anchors[i][j] = static_cast<float>(v[j] / norm);
            }
        }

        ActionLog log;
        log.user = user;
        std::size_t focus = pick_weighted(weights, rng);
        std::size_t current = focus;
        std::map<std::size_t, std::vector<PinId>> engaged_by_topic;

        for (std::size_t day = 0; day < config.days; ++day) {
            // Each day centers on a fresh focus topic.
            if (day > 0 && n_interests > 1) {
                std::vector<double> other = weights;
                other[focus] = 0.0;
                focus = pick_weighted(other, rng);
            }
            const std::int64_t base =
                (config.start_day + static_cast<std::int64_t>(day)) * kSecondsPerDay;
            const std::size_t n_actions =
                config.actions_min +
                static_cast<std::size_t>(
                    rng.next_below(config.actions_max - config.actions_min + 1));
            // Distinct seconds keep each user's stream strictly ordered.
            std::set<std::uint64_t> seconds;
            while (seconds.size() < n_actions) {
                seconds.insert(rng.next_below(kSecondsPerDay));
            }
            const std::vector<std::uint64_t> ordered(seconds.begin(), seconds.end());
            for (std::size_t a = 0; a < ordered.size(); ++a) {
                std::size_t topic = 0;
                PinId pin = 0;
                if (a + 1 == ordered.size() &&
                    rng.next_double() < config.exploration_probability) {
                    // Days often end on a one-off pin from anywhere, far from
                    // the user's anchors and never repeated.
                    topic = static_cast<std::size_t>(rng.next_below(config.topics));
                    pin = static_cast<PinId>(
                        topic * config.pins_per_topic +
                        static_cast<std::size_t>(rng.next_below(config.pins_per_topic)) + 1);
                } else {
                    if (n_interests > 1 &&
                        rng.next_double() < config.switch_probability) {
                        std::vector<double> hop = weights;
                        hop[focus] *= config.focus_boost;
                        hop[current] = 0.0; // hops always land somewhere new
                        current = pick_weighted(hop, rng);
                    }
                    topic = topics[current];
                    auto& past = engaged_by_topic[topic];
                    if (!past.empty() && rng.next_double() < config.repeat_probability) {
                        pin = past[static_cast<std::size_t>(rng.next_below(past.size()))];
                    } else {
                        // Best of a few uniform draws, judged by the anchor.
                        double best_d2 = std::numeric_limits<double>::infinity();
                        for (std::size_t c = 0; c < config.niche_candidates; ++c) {
                            const PinId candidate = static_cast<PinId>(
                                topic * config.pins_per_topic +
                                static_cast<std::size_t>(
                                    rng.next_below(config.pins_per_topic)) +
                                1);
                            const double d2 = squared_euclidean(
                                world.pins.embedding(candidate), anchors[current]);
                            if (d2 < best_d2) {
                                best_d2 = d2;
                                pin = candidate;
                            }
                        }
                    }
                    past.push_back(pin);
                }

                const std::int64_t ts = base + static_cast<std::int64_t>(ordered[a]);
                const ActionKind kind =
                    rng.next_double() < 0.5 ? ActionKind::repin : ActionKind::click;
                log.records.push_back({pin, ts, kind});
                world.labels.push_back(
                    {user, ts, pin, static_cast<std::uint32_t>(topic)});
                for (std::size_t imp = 0; imp < config.impressions_per_action; ++imp) {
                    log.records.push_back(
                        {draw_impression(rng, topic), ts, ActionKind::impression});
                }
            }
        }
        world.logs.push_back(std::move(log));
    }
    return world;
}

WorldPaths write_world(const World& world, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("could not create directory " + dir.string() + ": " + ec.message());

    WorldPaths paths;
    paths.embeddings = dir / "embeddings.bin";
    paths.actions = dir / "actions.jsonl";
    paths.labels = dir / "labels.jsonl";

    write_pin_store(world.pins, paths.embeddings);
    write_action_logs(world.logs, paths.actions);
    atomic_write_file(paths.labels, [&](std::ostream& out) {
        for (const LabelRecord& label : world.labels) {
            nlohmann::ordered_json line;
            line["user"] = label.user;
            line["ts"] = label.timestamp;
            line["pin"] = label.pin;
            line["topic"] = label.topic;
            out << line.dump() << '\n';
        }
    });
    return paths;
}

std::vector<LabelRecord> read_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("could not open " + path.string());
    std::vector<LabelRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(line);
            out.push_back({parsed.at("user").get<UserId>(),
                           parsed.at("ts").get<std::int64_t>(),
                           parsed.at("pin").get<PinId>(),
                           parsed.at("topic").get<std::uint32_t>()});
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": bad label record: " + e.what());
        }
    }
    return out;
}

std::map<UserId, std::size_t> interest_counts(const std::vector<LabelRecord>& labels) {
    std::map<UserId, std::set<std::uint32_t>> topics;
    for (const LabelRecord& label : labels) topics[label.user].insert(label.topic);
    std::map<UserId, std::size_t> out;
    for (const auto& [user, set] : topics) out[user] = set.size();
    return out;
}

} // namespace facet::synth
