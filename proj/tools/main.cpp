// Command-line front end: synthetic worlds, batch and online profile jobs,
// index lifecycle, retrieval and the offline evaluation suites.
//
// Exit codes: 0 success, 1 usage or validation failure, 2 I/O failure.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "facet/ann.hpp"
#include "facet/dates.hpp"
#include "facet/defaults.hpp"
#include "facet/distance.hpp"
#include "facet/errors.hpp"
#include "facet/eval.hpp"
#include "facet/io.hpp"
#include "facet/medoid_cache.hpp"
#include "facet/parallel.hpp"
#include "facet/pipeline.hpp"
#include "facet/retrieval.hpp"
#include "facet/synth.hpp"

#include "logging.hpp"

namespace {

using namespace facet;
using cli::log_info;
using cli::log_warn;

std::size_t resolve_threads(std::size_t requested) {
    return requested == 0 ? default_thread_count() : requested;
}

// Last civil day with an engagement, the default "as of" for batch jobs.
std::int64_t last_engagement_day(const std::vector<ActionLog>& logs) {
    std::optional<std::int64_t> last;
    for (const ActionLog& log : logs) {
        for (const ActionRecord& r : log.records) {
            if (!is_engagement(r.kind)) continue;
            const std::int64_t day = day_of_timestamp(r.timestamp);
            if (!last || day > *last) last = day;
        }
    }
    if (!last) throw ValidationError("action log holds no engagements");
    return *last;
}

// ---- gen ----------------------------------------------------------------

struct GenOpts {
    std::string out;
    synth::WorldConfig config;
    std::string start_date;
};

void run_gen(const GenOpts& o) {
    synth::WorldConfig config = o.config;
    if (!o.start_date.empty()) config.start_day = parse_iso_date(o.start_date);
    const synth::World world = synth::generate_world(config);
    const synth::WorldPaths paths = synth::write_world(world, o.out);
    std::size_t engagements = 0;
    std::size_t records = 0;
    for (const ActionLog& log : world.logs) {
        records += log.records.size();
        for (const ActionRecord& r : log.records) engagements += is_engagement(r.kind) ? 1 : 0;
    }
    log_info("world: " + std::to_string(world.pins.size()) + " pins, " +
             std::to_string(world.logs.size()) + " users, " + std::to_string(records) +
             " records (" + std::to_string(engagements) + " engagements)");
    log_info("wrote " + paths.embeddings.string() + ", " + paths.actions.string() + ", " +
             paths.labels.string());
}

// ---- batch --------------------------------------------------------------

struct BatchOpts {
    std::string embeddings;
    std::string actions;
    std::string out;
    std::string as_of;
    ProfileParams params;
    std::size_t threads = 0;
};

void run_batch(const BatchOpts& o) {
    const PinStore store = read_pin_store(o.embeddings);
    const std::vector<ActionLog> logs = read_action_logs(o.actions);
    const std::int64_t as_of_day =
        o.as_of.empty() ? last_engagement_day(logs) : parse_iso_date(o.as_of);

    pipeline::BatchStats stats;
    const pipeline::ProfileStore profiles =
        pipeline::batch_infer(logs, store, o.params, as_of_day, resolve_threads(o.threads),
                              &stats);
    profiles.save(o.out);
    log_info("batch as of " + iso_date(as_of_day) + ": " +
             std::to_string(stats.users_profiled) + " profiles, " +
             std::to_string(stats.users_skipped_empty) + " users without usable activity, " +
             std::to_string(stats.skipped_missing_embedding) + " records without embeddings");
    log_info("wrote " + o.out);
}

// ---- replay -------------------------------------------------------------

struct ReplayOpts {
    std::string embeddings;
    std::string actions;
    std::string profiles;
    std::string out;
    std::string as_of;
    double alpha = defaults::kAlpha;
    double lambda = defaults::kLambda;
    std::size_t buffer = defaults::kOnlineBuffer;
};

void run_replay(const ReplayOpts& o) {
    const PinStore store = read_pin_store(o.embeddings);
    const pipeline::ProfileStore batch = pipeline::ProfileStore::load(o.profiles);

    std::optional<std::int64_t> as_of_day;
    if (!o.as_of.empty()) {
        as_of_day = parse_iso_date(o.as_of);
    } else {
        for (const auto& [user, profile] : batch.all()) {
            if (!as_of_day || profile.version.date > *as_of_day) {
                as_of_day = profile.version.date;
            }
        }
        if (!as_of_day) throw ValidationError("profile store is empty; pass --as-of");
    }

    pipeline::OnlineState state(o.buffer);
    pipeline::OnlineUpdateStats stats;
    std::set<UserId> touched;
    for (const Event& event : read_event_stream(o.actions)) {
        if (day_of_timestamp(event.record.timestamp) <= *as_of_day) continue;
        pipeline::online_update(batch, state, event.user, event.record, store, o.alpha,
                                o.lambda, &stats);
        touched.insert(event.user);
    }

    std::set<UserId> users = touched;
    for (const auto& [user, profile] : batch.all()) users.insert(user);
    pipeline::ProfileStore merged;
    for (const UserId user : users) {
        auto profile = pipeline::serve(batch, state, user, store, o.alpha, o.lambda);
        if (profile) merged.put(std::move(*profile));
    }
    merged.save(o.out);
    log_info("replayed events after " + iso_date(*as_of_day) + ": " +
             std::to_string(stats.applied) + " applied, " +
             std::to_string(stats.skipped_not_engagement) + " impressions, " +
             std::to_string(stats.skipped_unknown_pin) + " unknown pins, " +
             std::to_string(stats.skipped_stale) + " stale");
    log_info("wrote " + o.out);
}

// ---- index build / query / bench -----------------------------------------

struct IndexBuildOpts {
    std::string embeddings;
    std::string out;
    ann::RefineConfig refine;
    bool skip_refine = false;
    ann::IndexConfig config;
};

void run_index_build(const IndexBuildOpts& o) {
    const PinStore store = read_pin_store(o.embeddings);
    std::vector<PinId> pool;
    if (o.skip_refine) {
        pool = store.ids();
        std::sort(pool.begin(), pool.end());
    } else {
        ann::RefineStats stats;
        pool = ann::refine_pool(store, o.refine, &stats);
        log_info("refined pool: " + std::to_string(pool.size()) + " kept, " +
                 std::to_string(stats.dropped_quality) + " below quality floor, " +
                 std::to_string(stats.dropped_duplicate) + " near-duplicates");
    }
    const auto t0 = std::chrono::steady_clock::now();
    const ann::GraphIndex index = ann::GraphIndex::build(store, pool, o.config);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    index.save(o.out);
    log_info("built index over " + std::to_string(index.size()) + " pins in " +
             std::to_string(ms) + " ms");
    log_info("wrote " + o.out);
}

struct IndexQueryOpts {
    std::string index;
    std::string embeddings;
    std::vector<PinId> pins;
    std::size_t k = 10;
    std::size_t beam = 0;
};

void run_index_query(const IndexQueryOpts& o) {
    const PinStore store = read_pin_store(o.embeddings);
    const ann::GraphIndex index = ann::GraphIndex::load(o.index);
    for (const PinId pin : o.pins) {
        const auto neighbors = ann::query_by_medoid(index, nullptr, store, pin, o.k, o.beam);
        nlohmann::ordered_json line;
        line["query"] = pin;
        line["neighbors"] = nlohmann::ordered_json::array();
        for (const ann::Neighbor& n : neighbors) {
            line["neighbors"].push_back({{"pin", n.pin}, {"distance", n.distance}});
        }
        std::cout << line.dump() << '\n';
    }
}

struct IndexBenchOpts {
    std::string index;
    std::string embeddings;
    std::string out;
    std::size_t queries = 200;
    std::size_t k = 10;
    std::string beams = "20,50,100,200";
    std::uint64_t seed = defaults::kSeed;
};

void run_index_bench(const IndexBenchOpts& o) {
    const PinStore store = read_pin_store(o.embeddings);
    const ann::GraphIndex index = ann::GraphIndex::load(o.index);
    if (index.size() == 0) throw ValidationError("index is empty");

    std::vector<std::size_t> beams;
    std::stringstream parse(o.beams);
    std::string token;
    while (std::getline(parse, token, ',')) {
        if (token.empty()) continue;
        beams.push_back(static_cast<std::size_t>(std::stoull(token)));
    }
    if (beams.empty()) throw ValidationError("no beam widths given");

    // Queries are catalog embeddings; ground truth is the exact scan over the
    // indexed pool.
    Rng rng(o.seed);
    std::vector<std::span<const float>> queries;
    for (std::size_t i = 0; i < o.queries; ++i) {
        queries.push_back(store.row(static_cast<std::size_t>(rng.next_below(store.size()))));
    }
    std::vector<std::vector<ann::Neighbor>> exact;
    exact.reserve(queries.size());
    for (const auto& q : queries) {
        exact.push_back(ann::exact_knn(store, index.pins(), q, o.k));
    }

    std::string csv = "beam,k,recall,mean_query_us\n";
    for (const std::size_t beam : beams) {
        double recall_sum = 0.0;
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<std::vector<ann::Neighbor>> got;
        got.reserve(queries.size());
        for (const auto& q : queries) got.push_back(index.query(q, o.k, beam));
        const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
        for (std::size_t i = 0; i < queries.size(); ++i) {
            std::unordered_set<PinId> truth;
            for (const ann::Neighbor& n : exact[i]) truth.insert(n.pin);
            std::size_t hit = 0;
            for (const ann::Neighbor& n : got[i]) hit += truth.count(n.pin);
            recall_sum += static_cast<double>(hit) /
                          static_cast<double>(std::max<std::size_t>(1, exact[i].size()));
        }
        char row[128];
        std::snprintf(row, sizeof row, "%zu,%zu,%.6f,%.3f\n", beam, o.k,
                      recall_sum / static_cast<double>(queries.size()),
                      static_cast<double>(ns) / 1000.0 / static_cast<double>(queries.size()));
        csv += row;
    }
    if (o.out.empty()) {
        std::cout << csv;
    } else {
        atomic_write_file(o.out, [&](std::ostream& out) { out << csv; });
        log_info("wrote " + o.out);
    }
}

// ---- retrieve -------------------------------------------------------------

struct RetrieveOpts {
    std::string embeddings;
    std::string index;
    std::string profiles;
    std::string actions; // optional: source of already-acted pins to exclude
    std::string out;     // default stdout
    std::vector<UserId> users;
    retrieval::RetrievalConfig config;
    std::uint64_t seed = defaults::kSeed;
    std::size_t cache_capacity = 4096;
    bool no_cache = false;
};

void run_retrieve(const RetrieveOpts& o) {
    const PinStore store = read_pin_store(o.embeddings);
    const ann::GraphIndex index = ann::GraphIndex::load(o.index);
    const pipeline::ProfileStore profiles = pipeline::ProfileStore::load(o.profiles);

    std::unordered_map<UserId, std::unordered_set<PinId>> acted;
    if (!o.actions.empty()) {
        for (const ActionLog& log : read_action_logs(o.actions)) {
            auto& set = acted[log.user];
            for (const ActionRecord& r : log.records) {
                if (is_engagement(r.kind)) set.insert(r.pin);
            }
        }
    }

    std::vector<UserId> users = o.users;
    if (users.empty()) {
        for (const auto& [user, profile] : profiles.all()) users.push_back(user);
    }
    std::sort(users.begin(), users.end());
    users.erase(std::unique(users.begin(), users.end()), users.end());

    ann::MedoidCache cache(o.cache_capacity);
    ann::MedoidCache* cache_ptr = o.no_cache ? nullptr : &cache;
    const Rng root(o.seed);

    std::string out_text;
    std::size_t served = 0;
    for (const UserId user : users) {
        const UserProfile* profile = profiles.get(user);
        if (!profile || profile->summaries.empty()) {
            log_warn("user " + std::to_string(user) + " has no profile; skipped");
            continue;
        }
        const auto it = acted.find(user);
        const std::unordered_set<PinId>* exclude = it == acted.end() ? nullptr : &it->second;
        Rng rng = root.fork(user);
        const retrieval::RecommendationSet rec =
            retrieval::recommend(*profile, index, cache_ptr, store, o.config, rng, exclude);

        nlohmann::ordered_json line;
        line["user"] = user;
        line["sampled_medoids"] = rec.sampled_medoids;
        line["pins"] = nlohmann::ordered_json::array();
        for (const retrieval::Candidate& c : rec.pins) {
            line["pins"].push_back({{"pin", c.pin},
                                    {"similarity", c.similarity},
                                    {"source_medoid", c.source_medoid}});
        }
        out_text += line.dump() + "\n";
        ++served;
    }

    if (o.out.empty()) {
        std::cout << out_text;
    } else {
        atomic_write_file(o.out, [&](std::ostream& out) { out << out_text; });
        log_info("wrote " + o.out);
    }
    log_info("served " + std::to_string(served) + " users; cache " +
             std::to_string(cache.hits()) + " hits / " + std::to_string(cache.misses()) +
             " misses");
}

// ---- eval -----------------------------------------------------------------

struct EvalOpts {
    std::string embeddings;
    std::string actions;
    std::string index;
    std::string labels;
    std::string out_dir;
    std::string suite = "all";
    std::string split_date;
    double threshold = 0.8;
    double lambda = defaults::kLambda;
    double alpha = defaults::kAlpha;
    retrieval::RetrievalConfig config;
    std::uint64_t seed = defaults::kSeed;
    std::size_t threads = 0;
    std::size_t min_interests = 3;
};

std::vector<eval::ModelSpec> retrieval_model_set(const EvalOpts& o) {
    using eval::Clusterer;
    using eval::ModelKind;
    using eval::ModelSpec;
    using eval::SummaryKind;
    std::vector<ModelSpec> specs;
    specs.push_back({.kind = ModelKind::last_pin});
    specs.push_back({.kind = ModelKind::decay_avg, .lambda = o.lambda});
    for (const std::size_t e : {std::size_t{1}, std::size_t{3}}) {
        ModelSpec spec;
        spec.kind = ModelKind::multi_interest;
        spec.lambda = o.lambda;
        spec.alpha = o.alpha;
        spec.sample_e = e;
        specs.push_back(spec);
    }
    ModelSpec kmeans;
    kmeans.kind = ModelKind::multi_interest;
    kmeans.clusterer = Clusterer::kmeans;
    kmeans.k = 5;
    kmeans.lambda = o.lambda;
    specs.push_back(kmeans);
    ModelSpec complete;
    complete.kind = ModelKind::multi_interest;
    complete.clusterer = Clusterer::complete_linkage;
    complete.lambda = o.lambda;
    complete.alpha = o.alpha;
    specs.push_back(complete);
    ModelSpec centroid;
    centroid.kind = ModelKind::multi_interest;
    centroid.summary = SummaryKind::centroid;
    centroid.lambda = o.lambda;
    centroid.alpha = o.alpha;
    specs.push_back(centroid);
    for (eval::ModelSpec& s : specs) s.name = eval::describe(s);
    return specs;
}

void emit_report(const EvalOpts& o, const std::string& stem, const std::string& markdown,
                 const std::string& csv) {
    std::cout << "# " << stem << "\n\n" << markdown << "\n";
    if (o.out_dir.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(o.out_dir, ec);
    if (ec) throw IoError("could not create " + o.out_dir + ": " + ec.message());
    const std::filesystem::path dir(o.out_dir);
    atomic_write_file(dir / (stem + ".md"), [&](std::ostream& out) { out << markdown; });
    atomic_write_file(dir / (stem + ".csv"), [&](std::ostream& out) { out << csv; });
}

void run_eval(const EvalOpts& o) {
    const bool want_next = o.suite == "all" || o.suite == "next-action";
    const bool want_retrieval = o.suite == "all" || o.suite == "retrieval";
    const bool want_ranking = o.suite == "all" || o.suite == "ranking";
    const bool want_sweep = o.suite == "all" || o.suite == "sweep";

    const PinStore store = read_pin_store(o.embeddings);
    const std::vector<ActionLog> logs = read_action_logs(o.actions);
    const std::size_t threads = resolve_threads(o.threads);

    if (want_next) {
        using eval::ModelKind;
        std::vector<eval::ModelSpec> specs;
        specs.push_back({.kind = ModelKind::last_pin});
        specs.push_back({.kind = ModelKind::decay_avg, .lambda = o.lambda});
        specs.push_back({.kind = ModelKind::kmeans_last_cluster, .k = 3});
        specs.push_back({.kind = ModelKind::oracle_kmeans, .k = 3});
        specs.push_back({.kind = ModelKind::oracle_best_pin});
        for (eval::ModelSpec& s : specs) s.name = eval::describe(s);
        const auto rows = eval::next_action_task(specs, logs, store, o.threshold, o.seed,
                                                 threads);
        emit_report(o, "next_action", eval::next_action_markdown(rows, "last-pin"),
                    eval::next_action_csv(rows));
    }

    if (want_retrieval || want_ranking || want_sweep) {
        if (o.index.empty() && (want_retrieval || want_sweep)) {
            throw ValidationError("--index is required for retrieval and sweep");
        }
        if (o.split_date.empty()) {
            throw ValidationError("--split-date is required for retrieval, ranking and sweep");
        }
        std::optional<ann::GraphIndex> index;
        if (!o.index.empty()) index.emplace(ann::GraphIndex::load(o.index));
        eval::EvalDataset data;
        data.logs = &logs;
        data.store = &store;
        data.index = index ? &*index : nullptr;
        data.split_day = parse_iso_date(o.split_date);
        data.threshold = o.threshold;
        data.seed = o.seed;
        data.threads = threads;

        const auto specs = retrieval_model_set(o);
        if (want_retrieval) {
            const auto rows = eval::retrieval_task(specs, data, o.config);
            emit_report(o, "retrieval", eval::retrieval_markdown(rows, "last-pin"),
                        eval::retrieval_csv(rows));
        }
        if (want_ranking) {
            const auto rows = eval::ranking_task(specs, data);
            emit_report(o, "ranking", eval::ranking_markdown(rows, "last-pin"),
                        eval::ranking_csv(rows));
        }
        if (want_sweep) {
            if (o.labels.empty()) {
                throw ValidationError("--labels is required for the diversity sweep");
            }
            std::set<UserId> focus;
            const auto counts = synth::interest_counts(synth::read_labels(o.labels));
            for (const auto& [user, n] : counts) {
                if (n >= o.min_interests) focus.insert(user);
            }
            if (focus.empty()) {
                throw ValidationError("no user reaches " + std::to_string(o.min_interests) +
                                      " ground-truth interests");
            }
            data.user_filter = &focus;
            eval::ModelSpec base;
            base.kind = eval::ModelKind::multi_interest;
            base.lambda = o.lambda;
            base.alpha = o.alpha;
            const std::size_t e_values[] = {1, 2, 3, 4};
            const auto rows = eval::diversity_relevance_sweep(base, data, o.config, e_values);
            emit_report(o, "sweep", eval::sweep_markdown(rows), eval::sweep_csv(rows));
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"facet: clustered multi-interest profiles and retrieval"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "facet 0.1.0");
    app.set_config("--config", "", "Read defaults from a key=value file (sections per command)");
    std::string log_format = "plain";
    app.add_option("--log", log_format, "Log format on stderr")
        ->check(CLI::IsMember({"plain", "json"}));
    const auto apply_log = [&log_format] {
        facet::cli::log_format() =
            log_format == "json" ? facet::cli::LogFormat::json : facet::cli::LogFormat::plain;
    };

    GenOpts gen;
    CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a synthetic world");
    gen_cmd->add_option("--out,--out-dir", gen.out, "Output directory")->required();
    gen_cmd->add_option("--seed", gen.config.seed);
    gen_cmd->add_option("--dim", gen.config.dimension);
    gen_cmd->add_option("--topics", gen.config.topics);
    gen_cmd->add_option("--pins-per-topic", gen.config.pins_per_topic);
    gen_cmd->add_option("--sigma", gen.config.noise_sigma);
    gen_cmd->add_option("--center-cos", gen.config.max_center_cosine);
    gen_cmd->add_option("--mixture-per-pair", gen.config.mixture_per_pair,
                        "Blended between-topic pins per topic pair");
    gen_cmd->add_option("--mixture-beta-min", gen.config.mixture_beta_min);
    gen_cmd->add_option("--mixture-beta-max", gen.config.mixture_beta_max);
    gen_cmd->add_option("--users", gen.config.users);
    gen_cmd->add_option("--days", gen.config.days);
    gen_cmd->add_option("--start-date", gen.start_date, "First activity day (YYYY-MM-DD)");
    gen_cmd->add_option("--interests-min", gen.config.interests_min);
    gen_cmd->add_option("--interests-max", gen.config.interests_max);
    gen_cmd->add_option("--dominant-weight", gen.config.dominant_weight,
                        "Weight of each user's strongest interest");
    gen_cmd->add_option("--focus-boost", gen.config.focus_boost,
                        "Weight multiplier for the day's focus topic");
    gen_cmd->add_option("--actions-min", gen.config.actions_min);
    gen_cmd->add_option("--actions-max", gen.config.actions_max);
    gen_cmd->add_option("--switch-prob", gen.config.switch_probability);
    gen_cmd->add_option("--repeat-prob", gen.config.repeat_probability);
    gen_cmd->add_option("--explore-prob", gen.config.exploration_probability,
                        "Chance a day ends on a one-off pin");
    gen_cmd->add_option("--niche-candidates", gen.config.niche_candidates,
                        "Uniform pin draws per pick; nearest the anchor wins");
    gen_cmd->add_option("--anchor-spread", gen.config.anchor_spread,
                        "Anchor offset from the topic center, in noise sigmas");
    gen_cmd->add_option("--impressions", gen.config.impressions_per_action);
    gen_cmd->add_option("--impression-focus", gen.config.impression_focus,
                        "Share of impressions from the action's own topic");
    gen_cmd->add_option("--impression-blend", gen.config.impression_blend,
                        "Share of impressions from adjacent mixture pins");
    gen_cmd->callback([&] { apply_log(); run_gen(gen); });

    BatchOpts batch;
    CLI::App* batch_cmd = app.add_subcommand("batch", "Build daily profiles from a log");
    batch_cmd->add_option("--embeddings", batch.embeddings)->required();
    batch_cmd->add_option("--actions", batch.actions)->required();
    batch_cmd->add_option("--out", batch.out)->required();
    batch_cmd->add_option("--as-of", batch.as_of, "Profile day (default: last engagement day)");
    batch_cmd->add_option("--alpha", batch.params.alpha);
    batch_cmd->add_option("--lambda", batch.params.lambda);
    batch_cmd->add_option("--window-days", batch.params.window_days);
    batch_cmd->add_option("--point-cap", batch.params.point_cap);
    batch_cmd->add_option("--threads", batch.threads, "0 = hardware");
    batch_cmd->callback([&] { apply_log(); run_batch(batch); });

    ReplayOpts replay;
    CLI::App* replay_cmd =
        app.add_subcommand("replay", "Apply post-batch events to the online view");
    replay_cmd->add_option("--embeddings", replay.embeddings)->required();
    replay_cmd->add_option("--actions", replay.actions)->required();
    replay_cmd->add_option("--profiles", replay.profiles)->required();
    replay_cmd->add_option("--out", replay.out)->required();
    replay_cmd->add_option("--as-of", replay.as_of,
                           "Batch day (default: newest profile version)");
    replay_cmd->add_option("--alpha", replay.alpha);
    replay_cmd->add_option("--lambda", replay.lambda);
    replay_cmd->add_option("--buffer", replay.buffer, "Per-user online buffer size");
    replay_cmd->callback([&] { apply_log(); run_replay(replay); });

    CLI::App* index_cmd = app.add_subcommand("index", "Build, query or benchmark the index");
    index_cmd->require_subcommand(1);

    IndexBuildOpts ib;
    CLI::App* ib_cmd = index_cmd->add_subcommand("build", "Refine the pool and build");
    ib_cmd->add_option("--embeddings", ib.embeddings)->required();
    ib_cmd->add_option("--out", ib.out)->required();
    ib_cmd->add_option("--quality-floor", ib.refine.quality_floor);
    ib_cmd->add_option("--dedup-threshold", ib.refine.dedup_threshold);
    ib_cmd->add_flag("--skip-refine", ib.skip_refine, "Index every catalog pin");
    ib_cmd->add_option("--max-neighbors", ib.config.max_neighbors);
    ib_cmd->add_option("--build-beam", ib.config.build_beam);
    ib_cmd->add_option("--query-beam", ib.config.query_beam, "Default beam stored in the index");
    ib_cmd->add_option("--seed", ib.config.seed);
    ib_cmd->callback([&] { apply_log(); run_index_build(ib); });

    IndexQueryOpts iq;
    CLI::App* iq_cmd = index_cmd->add_subcommand("query", "Neighbors of catalog pins");
    iq_cmd->add_option("--index", iq.index)->required();
    iq_cmd->add_option("--embeddings", iq.embeddings)->required();
    iq_cmd->add_option("--pin", iq.pins, "Query pin id (repeatable)")->required();
    iq_cmd->add_option("--k", iq.k);
    iq_cmd->add_option("--beam", iq.beam, "0 = index default");
    iq_cmd->callback([&] { apply_log(); run_index_query(iq); });

    IndexBenchOpts bench;
    CLI::App* bench_cmd = index_cmd->add_subcommand("bench", "Recall and latency sweep");
    bench_cmd->add_option("--index", bench.index)->required();
    bench_cmd->add_option("--embeddings", bench.embeddings)->required();
    bench_cmd->add_option("--queries", bench.queries);
    bench_cmd->add_option("--k", bench.k);
    bench_cmd->add_option("--beams", bench.beams, "Comma-separated beam widths");
    bench_cmd->add_option("--seed", bench.seed);
    bench_cmd->add_option("--out", bench.out, "CSV path (default stdout)");
    bench_cmd->callback([&] { apply_log(); run_index_bench(bench); });

    RetrieveOpts retrieve;
    CLI::App* retrieve_cmd = app.add_subcommand("retrieve", "Recommend pins for users");
    retrieve_cmd->add_option("--embeddings", retrieve.embeddings)->required();
    retrieve_cmd->add_option("--index", retrieve.index)->required();
    retrieve_cmd->add_option("--profiles", retrieve.profiles)->required();
    retrieve_cmd->add_option("--actions", retrieve.actions,
                             "Exclude pins the user already acted on");
    retrieve_cmd->add_option("--user", retrieve.users, "User id (repeatable; default all)");
    retrieve_cmd->add_option("--e", retrieve.config.sample_e, "Interests sampled per request");
    retrieve_cmd->add_option("--budget", retrieve.config.budget);
    retrieve_cmd->add_option("--beam", retrieve.config.beam, "0 = index default");
    retrieve_cmd->add_option("--seed", retrieve.seed);
    retrieve_cmd->add_option("--cache-capacity", retrieve.cache_capacity);
    retrieve_cmd->add_flag("--no-cache", retrieve.no_cache);
    retrieve_cmd->add_option("--out", retrieve.out, "JSONL path (default stdout)");
    retrieve_cmd->callback([&] { apply_log(); run_retrieve(retrieve); });

    EvalOpts eval_opts;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Offline evaluation suites");
    eval_cmd->add_option("--embeddings", eval_opts.embeddings)->required();
    eval_cmd->add_option("--actions", eval_opts.actions)->required();
    eval_cmd->add_option("--index", eval_opts.index, "Needed for retrieval, ranking, sweep");
    eval_cmd->add_option("--labels", eval_opts.labels, "Ground-truth topics (for the sweep)");
    eval_cmd->add_option("--suite", eval_opts.suite)
        ->check(CLI::IsMember({"all", "next-action", "retrieval", "ranking", "sweep"}));
    eval_cmd->add_option("--split-date", eval_opts.split_date,
                         "First evaluated day (YYYY-MM-DD)");
    eval_cmd->add_option("--threshold", eval_opts.threshold, "Cosine relevance bar");
    eval_cmd->add_option("--lambda", eval_opts.lambda);
    eval_cmd->add_option("--alpha", eval_opts.alpha);
    eval_cmd->add_option("--budget", eval_opts.config.budget);
    eval_cmd->add_option("--beam", eval_opts.config.beam);
    eval_cmd->add_option("--seed", eval_opts.seed);
    eval_cmd->add_option("--threads", eval_opts.threads, "0 = hardware");
    eval_cmd->add_option("--min-interests", eval_opts.min_interests,
                         "Sweep user filter on labeled interests");
    eval_cmd->add_option("--out-dir", eval_opts.out_dir, "Write .md and .csv reports here");
    eval_cmd->callback([&] { apply_log(); run_eval(eval_opts); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const facet::IoError& e) {
        facet::cli::log_error(e.what());
        return 2;
    } catch (const facet::ValidationError& e) {
        facet::cli::log_error(e.what());
        return 1;
    } catch (const std::exception& e) {
        facet::cli::log_error(e.what());
        return 1;
    }
    return 0;
}
