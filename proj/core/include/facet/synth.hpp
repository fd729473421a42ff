#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "facet/dates.hpp"
#include "facet/defaults.hpp"
#include "facet/pin_store.hpp"
#include "facet/types.hpp"

namespace facet::synth {

// A world of topical pins browsed by users with a handful of persistent
// interests.  Everything is a pure function of this config.
//
// Besides the topical pins, the catalog carries "mixture" pins blended from
// pairs of topic centers.  They model the content that lives between popular
// topics: users never engage them, but they crowd the region where averaged
// user embeddings land.
//
// Each user has one dominant interest plus a few minor ones, engages pins
// near a personal anchor inside each topic, hops topics between consecutive
// actions, and centers each day on a focus topic that differs from the
// previous day's.
struct WorldConfig {
    std::uint64_t seed = defaults::kSeed;
    std::size_t dimension = 64;
    std::size_t topics = 10;
    std::size_t pins_per_topic = 150;
    double noise_sigma = 0.02;       // per-coordinate Gaussian spread inside a topic
    double max_center_cosine = 0.5;  // rejection bound between topic centers
    std::size_t mixture_per_pair = 120; // blended pins per topic pair
    double mixture_beta_min = 0.55;  // blend weight range; keeps mixtures off
    double mixture_beta_max = 0.9;   // the topic cores
    std::size_t users = 150;
    std::size_t days = 30;
    std::int64_t start_day = days_from_civil(2020, 1, 1);
    std::size_t interests_min = 5;   // distinct topics per user
    std::size_t interests_max = 7;
    double dominant_weight = 16.0;   // weight of the strongest interest; the
                                     // rest draw Exp(1)
    double focus_boost = 3.0;        // weight multiplier for the day's focus topic
    std::size_t actions_min = 3;     // engagements per user per day
    std::size_t actions_max = 8;
    double switch_probability = 0.85; // chance the next action changes topic
    double repeat_probability = 0.1;  // chance of re-engaging an already seen pin
    double exploration_probability = 0.65; // chance a day ends on a one-off pin
                                           // from a uniformly random topic
    std::size_t niche_candidates = 8; // uniform draws per pick; the one nearest
                                      // the user's anchor wins
    double anchor_spread = 1.5;       // anchor offset from the topic center, in
                                      // units of noise_sigma
    std::size_t impressions_per_action = 5;
    double impression_focus = 0.0;    // share of impressions drawn from the
                                      // action's own topic instead of the
                                      // global feed
    double impression_blend = 0.3;    // share of impressions drawn from mixture
                                      // pins adjacent to the action's topic
};

// Ground-truth topic of one engagement.
struct LabelRecord {
    UserId user = 0;
    std::int64_t timestamp = 0;
    PinId pin = 0;
    std::uint32_t topic = 0;
};

struct World {
    PinStore pins;
    std::vector<std::uint32_t> pin_topics; // by store position; mixtures use config.topics
    std::vector<ActionLog> logs;           // users ascending
    std::vector<LabelRecord> labels;       // engagements only, emission order

    explicit World(std::size_t dimension) : pins(dimension) {}
};

World generate_world(const WorldConfig& config);

struct WorldPaths {
    std::filesystem::path embeddings;
    std::filesystem::path actions;
    std::filesystem::path labels;
};

// Writes embeddings.bin, actions.jsonl, labels.jsonl under `dir` (created if
// missing).
WorldPaths write_world(const World& world, const std::filesystem::path& dir);

// Labels sidecar: one JSON object per line with keys user, ts, pin, topic.
std::vector<LabelRecord> read_labels(const std::filesystem::path& path);

// Distinct engagement topics per user.
std::map<UserId, std::size_t> interest_counts(const std::vector<LabelRecord>& labels);

} // namespace facet::synth
