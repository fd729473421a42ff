#include "facet/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <unordered_set>

#include "facet/dates.hpp"
#include "facet/distance.hpp"
#include "facet/errors.hpp"
#include "facet/parallel.hpp"

namespace facet::eval {

namespace {

// Engagements that can be embedded: present in the store with non-zero norm.
// Everything else is invisible to the models and the metrics.
std::vector<ProfilePoint> usable_points(const ActionLog& log, const PinStore& store) {
    std::vector<ProfilePoint> out;
    for (const ActionRecord& r : log.records) {
        if (!is_engagement(r.kind) || !store.contains(r.pin)) continue;
        if (l2_norm(store.embedding(r.pin)) == 0.0) continue;
        out.push_back({r.pin, r.timestamp});
    }
    return out;
}

void check_chronology(const UserModel& model, std::int64_t eval_ts, const std::string& name) {
    if (model.last_seen() >= eval_ts) {
        throw ValidationError("model '" + name + "' observed a timestamp at or after its "
                              "evaluation point");
    }
}

std::vector<std::string> spec_names(std::span<const ModelSpec> specs) {
    std::vector<std::string> names;
    for (const ModelSpec& s : specs) names.push_back(s.name.empty() ? describe(s) : s.name);
    return names;
}

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::string lift_cell(double value, double baseline, bool is_baseline) {
    if (is_baseline) return "baseline";
    const auto lift = lift_percent(value, baseline);
    if (!lift) return "n/a";
    return fmt("%+.1f%%", *lift);
}

} // namespace

std::optional<double> lift_percent(double value, double baseline) {
    if (baseline == 0.0) return std::nullopt;
    return (value - baseline) / baseline * 100.0;
}

// ---- next action ------------------------------------------------------------

std::vector<NextActionRow> next_action_task(std::span<const ModelSpec> specs,
                                            const std::vector<ActionLog>& logs,
                                            const PinStore& store, double threshold,
                                            std::uint64_t seed, std::size_t threads) {
    if (specs.empty()) throw ValidationError("next action task: no models");
    const auto names = spec_names(specs);

    struct Partial {
        std::vector<std::size_t> successes;
        std::size_t events = 0;
    };
    std::vector<Partial> partials(logs.size());

    parallel_for(logs.size(), threads, [&](std::size_t u) {
        Partial& part = partials[u];
        part.successes.assign(specs.size(), 0);
        const std::vector<ProfilePoint> points = usable_points(logs[u], store);
        if (points.size() < 2) return;

        std::vector<std::unique_ptr<UserModel>> models;
        for (const ModelSpec& s : specs) models.push_back(make_model(s, store));
        for (auto& m : models) m->observe(points[0]);

        const Rng user_rng = Rng(seed).fork(logs[u].user);
        for (std::size_t i = 1; i < points.size(); ++i) {
            const auto target = store.embedding(points[i].pin);
            const std::int64_t now = points[i].timestamp;
            // Every model sees a copy of the same event stream so paired
            // models (the k-means oracle and its committed twin) refit on
            // identical draws.
            const Rng event_rng = user_rng.fork(i);
            for (std::size_t m = 0; m < models.size(); ++m) {
                check_chronology(*models[m], now, names[m]);
                Rng r = event_rng;
                if (models[m]->best_similarity(target, now, r) >= threshold) {
                    ++part.successes[m];
                }
            }
            ++part.events;
            for (auto& m : models) m->observe(points[i]);
        }
    });

    std::vector<NextActionRow> rows(specs.size());
    for (std::size_t m = 0; m < specs.size(); ++m) {
        rows[m].model = names[m];
        for (const Partial& p : partials) {
            if (p.successes.empty()) continue;
            rows[m].events += p.events;
            rows[m].successes += p.successes[m];
        }
        rows[m].accuracy = rows[m].events == 0
                               ? 0.0
                               : static_cast<double>(rows[m].successes) /
                                     static_cast<double>(rows[m].events);
    }
    return rows;
}

// ---- shared day-batch walking ----------------------------------------------

namespace {

struct DayGroup {
    std::int64_t day = 0;
    std::vector<ProfilePoint> engagements;    // usable only
    std::vector<PinId> raw_engagement_pins;   // every engagement, for exclusion
    std::vector<PinId> impressions;           // distinct usable impression pins
};

struct UserTimeline {
    std::vector<ProfilePoint> train;        // usable engagements before the split
    std::vector<PinId> train_raw_pins;      // all engaged pins before the split
    std::vector<DayGroup> days;             // evaluated days, ascending
};

UserTimeline build_timeline(const ActionLog& log, const PinStore& store,
                            std::int64_t split_day) {
    UserTimeline t;
    const std::int64_t split_start = split_day * kSecondsPerDay;
    std::map<std::int64_t, DayGroup> by_day;
    for (const ActionRecord& r : log.records) {
        const bool usable = store.contains(r.pin) && l2_norm(store.embedding(r.pin)) != 0.0;
        if (r.timestamp < split_start) {
            if (is_engagement(r.kind)) {
                t.train_raw_pins.push_back(r.pin);
                if (usable) t.train.push_back({r.pin, r.timestamp});
            }
            continue;
        }
        DayGroup& g = by_day[day_of_timestamp(r.timestamp)];
        if (is_engagement(r.kind)) {
            g.raw_engagement_pins.push_back(r.pin);
            if (usable) g.engagements.push_back({r.pin, r.timestamp});
        } else if (usable) {
            g.impressions.push_back(r.pin);
        }
    }
    for (auto& [day, group] : by_day) {
        group.day = day;
        std::sort(group.impressions.begin(), group.impressions.end());
        group.impressions.erase(
            std::unique(group.impressions.begin(), group.impressions.end()),
            group.impressions.end());
        t.days.push_back(std::move(group));
    }
    return t;
}

bool all_ready(const std::vector<std::unique_ptr<UserModel>>& models) {
    return std::all_of(models.begin(), models.end(),
                       [](const auto& m) { return m->ready(); });
}

} // namespace

// ---- retrieval ---------------------------------------------------------------

std::vector<RetrievalRow> retrieval_task(std::span<const ModelSpec> specs,
                                         const EvalDataset& data,
                                         const retrieval::RetrievalConfig& config) {
    if (specs.empty()) throw ValidationError("retrieval task: no models");
    if (!data.logs || !data.store || !data.index) {
        throw ValidationError("retrieval task: dataset is incomplete");
    }
    const auto names = spec_names(specs);
    const PinStore& store = *data.store;
    ann::MedoidCache cache(1 << 14);

    struct Partial {
        std::size_t groups = 0;
        std::size_t test_points = 0;
        std::vector<std::size_t> relevant;
        std::vector<std::size_t> recalled;
        std::vector<double> diversity_sum;
        std::vector<std::size_t> diversity_groups;
    };
    const std::vector<ActionLog>& logs = *data.logs;
    std::vector<Partial> partials(logs.size());

    parallel_for(logs.size(), data.threads, [&](std::size_t u) {
        Partial& part = partials[u];
        part.relevant.assign(specs.size(), 0);
        part.recalled.assign(specs.size(), 0);
        part.diversity_sum.assign(specs.size(), 0.0);
        part.diversity_groups.assign(specs.size(), 0);
        if (data.user_filter && !data.user_filter->count(logs[u].user)) return;

        const UserTimeline timeline = build_timeline(logs[u], store, data.split_day);
        std::vector<std::unique_ptr<UserModel>> models;
        for (const ModelSpec& s : specs) models.push_back(make_model(s, store));
        std::unordered_set<PinId> acted(timeline.train_raw_pins.begin(),
                                        timeline.train_raw_pins.end());
        for (auto& m : models) {
            for (const ProfilePoint& p : timeline.train) m->observe(p);
        }

        const Rng user_rng = Rng(data.seed).fork(logs[u].user);
        for (const DayGroup& group : timeline.days) {
            const std::int64_t now = group.day * kSecondsPerDay;
            if (!group.engagements.empty() && all_ready(models)) {
                bool evaluated_any = false;
                for (std::size_t m = 0; m < specs.size(); ++m) {
                    check_chronology(*models[m], now, names[m]);
                    Rng r = user_rng.fork(static_cast<std::uint64_t>(group.day));
                    const auto queries = models[m]->queries(now, r);
                    if (queries.empty()) continue;
                    const retrieval::RecommendationSet rec = retrieval::fetch_candidates(
                        queries, *data.index, &cache, store, config, &acted);
                    evaluated_any = true;

                    std::vector<PinId> rec_pins;
                    rec_pins.reserve(rec.pins.size());
                    for (const auto& c : rec.pins) rec_pins.push_back(c.pin);
                    std::unordered_set<PinId> rec_set(rec_pins.begin(), rec_pins.end());

                    for (const ProfilePoint& p : group.engagements) {
                        const auto target = store.embedding(p.pin);
                        bool near = false;
                        for (const auto& c : rec.pins) {
                            if (cosine_similarity(store.embedding(c.pin), target) >=
                                data.threshold) {
                                near = true;
                                break;
                            }
                        }
                        part.relevant[m] += near ? 1 : 0;
                        part.recalled[m] += rec_set.count(p.pin) ? 1 : 0;
                    }
                    const retrieval::Diversity div = retrieval::diversity(rec_pins, store);
                    if (div.defined) {
                        part.diversity_sum[m] += div.value;
                        ++part.diversity_groups[m];
                    }
                }
                if (evaluated_any) {
                    ++part.groups;
                    part.test_points += group.engagements.size();
                }
            }
            for (const PinId pin : group.raw_engagement_pins) acted.insert(pin);
            for (const ProfilePoint& p : group.engagements) {
                for (auto& m : models) m->observe(p);
            }
        }
    });

    std::vector<RetrievalRow> rows(specs.size());
    for (std::size_t m = 0; m < specs.size(); ++m) {
        rows[m].model = names[m];
        std::size_t relevant = 0;
        std::size_t recalled = 0;
        double div_sum = 0.0;
        std::size_t div_groups = 0;
        for (const Partial& p : partials) {
            if (p.relevant.empty()) continue;
            rows[m].groups += p.groups;
            rows[m].test_points += p.test_points;
            relevant += p.relevant[m];
            recalled += p.recalled[m];
            div_sum += p.diversity_sum[m];
            div_groups += p.diversity_groups[m];
        }
        if (rows[m].test_points > 0) {
            rows[m].relevance =
                static_cast<double>(relevant) / static_cast<double>(rows[m].test_points);
            rows[m].recall =
                static_cast<double>(recalled) / static_cast<double>(rows[m].test_points);
        }
        if (div_groups > 0) rows[m].diversity = div_sum / static_cast<double>(div_groups);
    }
    return rows;
}

// ---- ranking -------------------------------------------------------------------

std::vector<RankingRow> ranking_task(std::span<const ModelSpec> specs,
                                     const EvalDataset& data) {
    if (specs.empty()) throw ValidationError("ranking task: no models");
    if (!data.logs || !data.store) throw ValidationError("ranking task: dataset is incomplete");
    const auto names = spec_names(specs);
    const PinStore& store = *data.store;
    constexpr std::size_t kNegativesPerAction = 20;

    struct Partial {
        std::size_t groups = 0;
        std::vector<double> r_precision;
        std::vector<double> reciprocal_rank;
    };
    const std::vector<ActionLog>& logs = *data.logs;
    std::vector<Partial> partials(logs.size());

    // Shortfall padding draws from pins users actually saw, so negatives
    // match the candidate pool rather than the raw catalog.
    std::vector<PinId> observed;
    {
        std::unordered_set<PinId> seen;
        for (const ActionLog& log : logs) {
            for (const ActionRecord& r : log.records) {
                if (store.contains(r.pin) && seen.insert(r.pin).second) {
                    observed.push_back(r.pin);
                }
            }
        }
        std::sort(observed.begin(), observed.end());
    }

    parallel_for(logs.size(), data.threads, [&](std::size_t u) {
        Partial& part = partials[u];
        part.r_precision.assign(specs.size(), 0.0);
        part.reciprocal_rank.assign(specs.size(), 0.0);
        if (data.user_filter && !data.user_filter->count(logs[u].user)) return;

        const UserTimeline timeline = build_timeline(logs[u], store, data.split_day);
        std::vector<std::unique_ptr<UserModel>> models;
        for (const ModelSpec& s : specs) models.push_back(make_model(s, store));
        for (auto& m : models) {
            for (const ProfilePoint& p : timeline.train) m->observe(p);
        }

        const Rng user_rng = Rng(data.seed).fork(logs[u].user);
        for (const DayGroup& group : timeline.days) {
            const std::int64_t now = group.day * kSecondsPerDay;
            std::vector<PinId> targets;
            for (const ProfilePoint& p : group.engagements) targets.push_back(p.pin);
            std::sort(targets.begin(), targets.end());
            targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

            if (!targets.empty() && all_ready(models)) {
                const std::size_t want = kNegativesPerAction * targets.size();
                std::unordered_set<PinId> used(targets.begin(), targets.end());

                // The day's own impressions first, sampled without
                // replacement; uniform pool pins fill any shortfall.
                Rng sample_rng = user_rng.fork(static_cast<std::uint64_t>(group.day));
                std::vector<PinId> pool;
                for (const PinId pin : group.impressions) {
                    if (!used.count(pin)) pool.push_back(pin);
                }
                std::vector<PinId> negatives;
                while (negatives.size() < want && !pool.empty()) {
                    const std::size_t j = static_cast<std::size_t>(
                        sample_rng.next_below(pool.size()));
                    negatives.push_back(pool[j]);
                    used.insert(pool[j]);
                    pool[j] = pool.back();
                    pool.pop_back();
                }
                std::size_t attempts = 0;
                while (negatives.size() < want && attempts < 100 * want &&
                       used.size() < observed.size()) {
                    ++attempts;
                    const PinId pin = observed[static_cast<std::size_t>(
                        sample_rng.next_below(observed.size()))];
                    if (used.count(pin) || l2_norm(store.embedding(pin)) == 0.0) continue;
                    negatives.push_back(pin);
                    used.insert(pin);
                }

                std::vector<PinId> candidates = targets;
                candidates.insert(candidates.end(), negatives.begin(), negatives.end());

                for (std::size_t m = 0; m < specs.size(); ++m) {
                    check_chronology(*models[m], now, names[m]);
                    Rng r = user_rng.fork(static_cast<std::uint64_t>(group.day));
                    const auto embs = models[m]->embeddings(now, r);
                    if (embs.empty()) continue;

                    std::vector<std::pair<double, PinId>> scored;
                    scored.reserve(candidates.size());
                    for (const PinId pin : candidates) {
                        const auto row = store.embedding(pin);
                        double best = -2.0;
                        for (const auto& emb : embs) {
                            best = std::max(best, cosine_similarity(emb, row));
                        }
                        scored.emplace_back(best, pin);
                    }
                    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
                        if (a.first != b.first) return a.first > b.first;
                        return a.second < b.second;
                    });

                    const std::unordered_set<PinId> target_set(targets.begin(), targets.end());
                    std::size_t hits_at_n = 0;
                    double rr_sum = 0.0;
                    for (std::size_t rank = 0; rank < scored.size(); ++rank) {
                        if (!target_set.count(scored[rank].second)) continue;
                        if (rank < targets.size()) ++hits_at_n;
                        rr_sum += 1.0 / static_cast<double>(rank + 1);
                    }
                    part.r_precision[m] +=
                        static_cast<double>(hits_at_n) / static_cast<double>(targets.size());
                    part.reciprocal_rank[m] += rr_sum / static_cast<double>(targets.size());
                }
                ++part.groups;
            }
            for (const ProfilePoint& p : group.engagements) {
                for (auto& m : models) m->observe(p);
            }
        }
    });

    std::vector<RankingRow> rows(specs.size());
    for (std::size_t m = 0; m < specs.size(); ++m) {
        rows[m].model = names[m];
        double rp = 0.0;
        double rr = 0.0;
        for (const Partial& p : partials) {
            if (p.r_precision.empty()) continue;
            rows[m].groups += p.groups;
            rp += p.r_precision[m];
            rr += p.reciprocal_rank[m];
        }
        if (rows[m].groups > 0) {
            rows[m].r_precision = rp / static_cast<double>(rows[m].groups);
            rows[m].reciprocal_rank = rr / static_cast<double>(rows[m].groups);
        }
    }
    return rows;
}

// ---- sweep ------------------------------------------------------------------------

std::vector<SweepRow> diversity_relevance_sweep(const ModelSpec& base,
                                                const EvalDataset& data,
                                                const retrieval::RetrievalConfig& config,
                                                std::span<const std::size_t> e_values) {
    std::vector<SweepRow> rows;
    for (const std::size_t e : e_values) {
        ModelSpec spec = base;
        spec.sample_e = e;
        spec.name = describe(spec);
        const auto result = retrieval_task({&spec, 1}, data, config);
        rows.push_back({e, result[0].relevance, result[0].recall, result[0].diversity});
    }
    return rows;
}

// ---- reports ------------------------------------------------------------------------

namespace {

double baseline_value(std::span<const NextActionRow> rows, const std::string& baseline) {
    for (const auto& r : rows) {
        if (r.model == baseline) return r.accuracy;
    }
    return 0.0;
}

} // namespace

std::string next_action_markdown(std::span<const NextActionRow> rows,
                                 const std::string& baseline) {
    const double base = baseline_value(rows, baseline);
    std::string out = "| model | events | accuracy | lift |\n|---|---|---|---|\n";
    for (const auto& r : rows) {
        out += "| " + r.model + " | " + std::to_string(r.events) + " | " +
               fmt("%.4f", r.accuracy) + " | " +
               lift_cell(r.accuracy, base, r.model == baseline) + " |\n";
    }
    return out;
}

std::string next_action_csv(std::span<const NextActionRow> rows) {
    std::string out = "model,events,successes,accuracy\n";
    for (const auto& r : rows) {
        out += r.model + "," + std::to_string(r.events) + "," + std::to_string(r.successes) +
               "," + fmt("%.6f", r.accuracy) + "\n";
    }
    return out;
}

std::string retrieval_markdown(std::span<const RetrievalRow> rows, const std::string& baseline) {
    double base_rel = 0.0;
    double base_rec = 0.0;
    for (const auto& r : rows) {
        if (r.model == baseline) {
            base_rel = r.relevance;
            base_rec = r.recall;
        }
    }
    std::string out =
        "| model | groups | relevance | recall | diversity | relevance lift | recall lift |\n"
        "|---|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
        out += "| " + r.model + " | " + std::to_string(r.groups) + " | " +
               fmt("%.4f", r.relevance) + " | " + fmt("%.4f", r.recall) + " | " +
               fmt("%.4f", r.diversity) + " | " +
               lift_cell(r.relevance, base_rel, r.model == baseline) + " | " +
               lift_cell(r.recall, base_rec, r.model == baseline) + " |\n";
    }
    return out;
}

std::string retrieval_csv(std::span<const RetrievalRow> rows) {
    std::string out = "model,groups,test_points,relevance,recall,diversity\n";
    for (const auto& r : rows) {
        out += r.model + "," + std::to_string(r.groups) + "," + std::to_string(r.test_points) +
               "," + fmt("%.6f", r.relevance) + "," + fmt("%.6f", r.recall) + "," +
               fmt("%.6f", r.diversity) + "\n";
    }
    return out;
}

std::string ranking_markdown(std::span<const RankingRow> rows, const std::string& baseline) {
    double base_rp = 0.0;
    double base_rr = 0.0;
    for (const auto& r : rows) {
        if (r.model == baseline) {
            base_rp = r.r_precision;
            base_rr = r.reciprocal_rank;
        }
    }
    std::string out =
        "| model | groups | R-precision | reciprocal rank | R-precision lift | RR lift |\n"
        "|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
        out += "| " + r.model + " | " + std::to_string(r.groups) + " | " +
               fmt("%.4f", r.r_precision) + " | " + fmt("%.4f", r.reciprocal_rank) + " | " +
               lift_cell(r.r_precision, base_rp, r.model == baseline) + " | " +
               lift_cell(r.reciprocal_rank, base_rr, r.model == baseline) + " |\n";
    }
    return out;
}

std::string ranking_csv(std::span<const RankingRow> rows) {
    std::string out = "model,groups,r_precision,reciprocal_rank\n";
    for (const auto& r : rows) {
        out += r.model + "," + std::to_string(r.groups) + "," + fmt("%.6f", r.r_precision) +
               "," + fmt("%.6f", r.reciprocal_rank) + "\n";
    }
    return out;
}

std::string sweep_markdown(std::span<const SweepRow> rows) {
    std::string out = "| e | relevance | recall | diversity |\n|---|---|---|---|\n";
    for (const auto& r : rows) {
        out += "| " + std::to_string(r.e) + " | " + fmt("%.4f", r.relevance) + " | " +
               fmt("%.4f", r.recall) + " | " + fmt("%.4f", r.diversity) + " |\n";
    }
    return out;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
    std::string out = "e,relevance,recall,diversity\n";
    for (const auto& r : rows) {
        out += std::to_string(r.e) + "," + fmt("%.6f", r.relevance) + "," +
               fmt("%.6f", r.recall) + "," + fmt("%.6f", r.diversity) + "\n";
    }
    return out;
}

} // namespace facet::eval
