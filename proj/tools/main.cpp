// Command-line front end: ingest, split, train, eval, ablate, report, sweep.
// Every command is reproducible from (config, seed); artifacts embed a config
// echo so a stored run can be re-executed exactly.
//
// Exit codes: 0 success, 1 usage/config error, 2 split-audit failure,
// 3 numerical failure.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hrlp/analysis.hpp"
#include "hrlp/eval.hpp"
#include "hrlp/features.hpp"
#include "hrlp/kg.hpp"
#include "hrlp/model.hpp"
#include "hrlp/rng.hpp"
#include "hrlp/split.hpp"
#include "hrlp/training.hpp"
#include "hrlp/workload.hpp"

using json = nlohmann::json;
using namespace hrlp;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename T>
T jget(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(key + ": invalid value");
    }
}

template <typename T>
T pick(const json& j, const std::string& section, const std::string& key,
       const std::vector<std::pair<std::string, T>>& table) {
    const auto def = table.front().second;
    const std::string v = jget<std::string>(j, key, table.front().first);
    for (const auto& [name, value] : table)
        if (name == v) return value;
    std::string allowed;
    for (const auto& [name, value] : table) allowed += (allowed.empty() ? "" : ", ") + name;
    throw ConfigError(section + "." + key + ": '" + v + "' not one of {" + allowed + "}");
}

struct RunConfig {
    json raw;  // echo

    // data
    std::string statements;
    std::string features;  // empty = synthetic
    std::uint64_t feature_seed = 1;

    SplitMode mode = SplitMode::FullyInductive;
    SamplerConfig split;
    bool split_seed_set = false;

    ModelConfig model;
    std::uint64_t model_seed = 1;
    TrainConfig train;
    EvalOptions eval;
};

RunConfig parse_config(const json& j) {
    RunConfig c;
    c.raw = j;

    const json data = j.value("data", json::object());
    c.statements = jget<std::string>(data, "statements", "");
    c.features = jget<std::string>(data, "features", "");
    c.feature_seed = jget<std::uint64_t>(data, "feature_seed", 1);

    const json sp = j.value("split", json::object());
    c.mode = pick<SplitMode>(sp, "split", "mode",
                             {{"fi", SplitMode::FullyInductive}, {"si", SplitMode::SemiInductive}});
    c.split_seed_set = sp.contains("seed");
    c.split.seed = jget<std::uint64_t>(sp, "seed", 0);
    c.split.n = jget<std::size_t>(sp, "n", c.split.n);
    c.split.k = jget<std::size_t>(sp, "k", c.split.k);
    c.split.m = jget<std::size_t>(sp, "m", c.split.m);
    c.split.l = jget<std::size_t>(sp, "l", c.split.l);
    if (sp.contains("ratios")) {
        const auto r = sp.at("ratios").get<std::vector<double>>();
        if (r.size() != 3) throw ConfigError("split.ratios: expected three values");
        std::copy(r.begin(), r.end(), c.split.fi_ratios.begin());
    }
    if (sp.contains("fractions")) {
        const auto f = sp.at("fractions").get<std::vector<double>>();
        if (f.size() != 3) throw ConfigError("split.fractions: expected three values");
        std::copy(f.begin(), f.end(), c.split.si_fractions.begin());
    }

    const json m = j.value("model", json::object());
    c.model.encoder = pick<EncoderKind>(
        m, "model", "encoder", {{"linear", EncoderKind::Linear}, {"stare", EncoderKind::Stare}});
    c.model.feature_dim = jget<int>(m, "feature_dim", c.model.feature_dim);
    c.model.d_r = jget<int>(m, "d_r", c.model.d_r);
    c.model.qp_slots = jget<int>(m, "qp_slots", c.model.qp_slots);
    c.model.stare_layers = jget<int>(m, "stare_layers", c.model.stare_layers);
    c.model.alpha = jget<double>(m, "alpha", c.model.alpha);
    c.model.compose = pick<ComposeOp>(
        m, "model", "compose", {{"multiply", ComposeOp::Multiply}, {"subtract", ComposeOp::Subtract}});
    c.model.activation =
        pick<Activation>(m, "model", "activation",
                         {{"tanh", Activation::Tanh},
                          {"identity", Activation::Identity},
                          {"relu", Activation::Relu}});
    c.model.degree_norm = jget<bool>(m, "degree_norm", c.model.degree_norm);
    c.model.qual_aggr = pick<QualifierAggregation>(m, "model", "qual_aggr",
                                                   {{"sum", QualifierAggregation::Sum},
                                                    {"attention", QualifierAggregation::Attention}});
    c.model.tf_layers = jget<int>(m, "tf_layers", c.model.tf_layers);
    c.model.heads = jget<int>(m, "heads", c.model.heads);
    c.model.ffn_hidden = jget<int>(m, "ffn_hidden", c.model.ffn_hidden);
    c.model_seed = jget<std::uint64_t>(m, "seed", 1);

    const json t = j.value("train", json::object());
    c.train.regime =
        pick<Regime>(t, "train", "regime", {{"lcwa", Regime::LCWA}, {"slcwa", Regime::SLCWA}});
    c.train.loss = pick<LossKind>(t, "train", "loss",
                                  {{"bce", LossKind::BCE}, {"margin", LossKind::MarginRanking}});
    c.train.margin = jget<double>(t, "margin", c.train.margin);
    c.train.label_smoothing = jget<double>(t, "label_smoothing", c.train.label_smoothing);
    c.train.negatives = jget<int>(t, "negatives", c.train.negatives);
    c.train.learning_rate = jget<double>(t, "learning_rate", c.train.learning_rate);
    c.train.batch_size = jget<int>(t, "batch_size", c.train.batch_size);
    c.train.max_epochs = jget<int>(t, "max_epochs", c.train.max_epochs);
    c.train.patience = jget<int>(t, "patience", c.train.patience);
    c.train.min_rel_improvement = jget<double>(t, "min_rel_improvement", c.train.min_rel_improvement);
    c.train.eval_frequency = jget<int>(t, "eval_frequency", c.train.eval_frequency);
    c.train.seed = jget<std::uint64_t>(t, "seed", 0);

    const json e = j.value("eval", json::object());
    c.eval.ks = jget<std::vector<int>>(e, "ks", c.eval.ks);
    c.eval.filtered = jget<bool>(e, "filtered", c.eval.filtered);
    c.eval.tie = pick<TieMode>(e, "eval", "tie",
                               {{"realistic", TieMode::Realistic},
                                {"optimistic", TieMode::Optimistic},
                                {"pessimistic", TieMode::Pessimistic}});
    c.eval.batch_size = jget<int>(e, "batch_size", c.eval.batch_size);
    c.eval.compgcn_mode = jget<bool>(e, "compgcn_mode", c.eval.compgcn_mode);

    const std::vector<int> allowed_qp{0, 2, 4, 6};
    if (std::find(allowed_qp.begin(), allowed_qp.end(), c.model.qp_slots) == allowed_qp.end())
        throw ConfigError("model.qp_slots: must be one of 0, 2, 4, 6");
    if (c.model.encoder == EncoderKind::Stare && c.mode != SplitMode::FullyInductive)
        throw ConfigError("model.encoder: stare requires split.mode=fi (nonempty inference graph)");
    c.model.validate();
    c.train.validate();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config: " + std::string(e.what()));
    }
    return parse_config(j);
}

// Pipeline assembly shared by train / eval / ablate / sweep. The split is
// re-derived from (config, seed), which is cheaper and strictly more
// reproducible than re-parsing a split directory.
struct Pipeline {
    StatementGraph source;
    SplitBundle bundle;
    Workload workload;
    FeatureTable train_features, eval_features;
};

Pipeline assemble(const RunConfig& cfg) {
    if (cfg.statements.empty()) throw ConfigError("data.statements: required");
    if (!cfg.split_seed_set) throw ConfigError("split.seed: required (determinism)");
    Pipeline p;
    p.source = intern(parse_statement_file(cfg.statements));
    p.bundle = cfg.mode == SplitMode::FullyInductive ? build_fi_split(p.source, cfg.split)
                                                     : build_si_split(p.source, cfg.split);
    p.workload = assemble_workload(p.source, p.bundle);
    auto featurize = [&](const Vocab& vocab) {
        if (!cfg.features.empty()) return load_features(cfg.features, vocab);
        return synthetic_features(vocab, static_cast<std::size_t>(cfg.model.feature_dim),
                                  cfg.feature_seed);
    };
    p.train_features = featurize(p.workload.train_graph.entities);
    p.eval_features = featurize(p.workload.eval_graph.entities);
    if (p.train_features.dim != static_cast<std::size_t>(cfg.model.feature_dim))
        throw ConfigError("model.feature_dim: does not match feature file width");
    return p;
}

json metrics_json(const Metrics& m) {
    json h = json::object();
    for (const auto& [k, v] : m.hits) h[std::to_string(k)] = v;
    return json{{"mr", m.mr}, {"mrr", m.mrr}, {"amr", m.amr}, {"hits", h}, {"queries", m.queries}};
}

json outcome_json(const EvalOutcome& o) {
    return json{{"combined", metrics_json(o.combined)},
                {"tail", metrics_json(o.tail)},
                {"head", metrics_json(o.head)}};
}

double hits_at(const Metrics& m, int k) {
    auto it = m.hits.find(k);
    return it == m.hits.end() ? 0.0 : it->second;
}

void write_metrics_files(const std::string& out_prefix, const EvalOutcome& o, const json& echo) {
    json doc = outcome_json(o);
    doc["config"] = echo;
    std::ofstream(out_prefix + ".json") << doc.dump(2) << "\n";
    std::ofstream csv(out_prefix + ".csv");
    csv << "side,amr,mrr,hits@1,hits@5,hits@10\n";
    auto row = [&](const char* side, const Metrics& m) {
        csv << side << "," << m.amr << "," << m.mrr << "," << hits_at(m, 1) << "," << hits_at(m, 5)
            << "," << hits_at(m, 10) << "\n";
    };
    row("combined", o.combined);
    row("tail", o.tail);
    row("head", o.head);
}

FilterDb build_filter(const Workload& w, const ModelParams& params) {
    FilterDb filter;
    filter.add_main_triples(w.filter_statements, params);
    return filter;
}

// ---- commands -------------------------------------------------------------

int cmd_ingest(const std::string& in, const std::string& out_dir, int feature_dim,
               std::uint64_t feature_seed) {
    const auto graph = intern(parse_statement_file(in));
    std::filesystem::create_directories(out_dir);
    write_statement_file(out_dir + "/statements.txt", graph.statements, graph.entities,
                         graph.relations);
    write_vocab_file(out_dir + "/entities.tsv", graph.entities);
    write_vocab_file(out_dir + "/relations.tsv", graph.relations);
    if (feature_dim > 0) {
        write_feature_file(out_dir + "/features.tsv",
                           synthetic_features(graph.entities,
                                              static_cast<std::size_t>(feature_dim), feature_seed),
                           graph.entities);
    }
    json ratio = json::object();
    for (const auto& [n, share] : qualifier_ratio(graph.statements))
        ratio[std::to_string(n)] = share;
    json stats{{"statements", graph.statements.size()},
               {"entities", graph.num_entities()},
               {"relations", graph.num_relations()},
               {"qualifier_share", qualifier_share(graph.statements)},
               {"qualifier_ratio", ratio}};
    std::ofstream(out_dir + "/stats.json") << stats.dump(2) << "\n";
    std::cout << stats.dump(2) << "\n";
    return 0;
}

int cmd_split(const RunConfig& cfg, const std::string& out_dir) {
    if (cfg.statements.empty()) throw ConfigError("data.statements: required");
    if (!cfg.split_seed_set) throw ConfigError("split.seed: required (determinism)");
    const auto graph = intern(parse_statement_file(cfg.statements));
    SplitBundle bundle;
    try {
        bundle = cfg.mode == SplitMode::FullyInductive ? build_fi_split(graph, cfg.split)
                                                       : build_si_split(graph, cfg.split);
    } catch (const SplitError& e) {
        std::cerr << "split failed: " << e.what() << "\n";
        return 2;
    }
    const auto report = audit(bundle, graph);
    if (!report.pass()) {
        std::cerr << report.to_string();
        return 2;
    }
    write_split(out_dir, bundle, graph, cfg.split);
    std::cout << "split written to " << out_dir << " (train " << bundle.train.size() << ", valid "
              << bundle.valid.size() << ", test " << bundle.test.size() << ", inference "
              << bundle.inference.size() << ")\n";
    return 0;
}

int cmd_train(const RunConfig& cfg, const std::string& out_prefix) {
    Pipeline p = assemble(cfg);
    ModelParams model = ModelParams::init(
        cfg.model, static_cast<int>(p.workload.train_graph.num_relations()), cfg.model_seed);
    const FilterDb filter = build_filter(p.workload, model);

    TrainData data;
    data.train_graph = &p.workload.train_graph;
    data.train_features = &p.train_features;
    data.eval_graph = &p.workload.eval_graph;
    data.eval_features = &p.eval_features;
    data.valid = &p.workload.valid;
    data.eval_candidates = &p.workload.eval_candidates;
    data.filter = &filter;
    data.eval_options = cfg.eval;

    auto result = train(std::move(model), data, cfg.train);
    save_checkpoint(out_prefix, result.params, cfg.raw.dump());
    std::ofstream log(out_prefix + ".log.jsonl");
    for (const auto& e : result.log) {
        log << json{{"epoch", e.epoch},
                    {"train_loss", e.train_loss},
                    {"valid", metrics_json(e.valid)}}
                   .dump()
            << "\n";
    }
    std::cout << "trained " << result.epochs_run << " epochs; best epoch " << result.best_epoch
              << " valid Hits@10 " << result.best_hits10 << "; checkpoint " << out_prefix
              << ".bin\n";
    return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& checkpoint, const std::string& out_prefix,
             bool on_valid) {
    Pipeline p = assemble(cfg);
    ModelParams model = load_checkpoint(checkpoint);
    if (static_cast<std::size_t>(model.num_relations) != p.workload.train_graph.num_relations())
        throw ConfigError("checkpoint: relation vocabulary does not match config data");
    const FilterDb filter = build_filter(p.workload, model);
    const auto& queries = on_valid ? p.workload.valid : p.workload.test;
    const auto outcome = evaluate(model, p.workload.eval_graph, p.eval_features, queries,
                                  p.workload.eval_candidates, filter, cfg.eval);
    write_metrics_files(out_prefix, outcome, cfg.raw);
    std::cout << "AMR " << outcome.combined.amr << "% | MRR " << outcome.combined.mrr << " | H@1 "
              << hits_at(outcome.combined, 1) << " | H@5 " << hits_at(outcome.combined, 5)
              << " | H@10 " << hits_at(outcome.combined, 10) << "\n";
    return 0;
}

int cmd_ablate(const RunConfig& cfg, const std::string& checkpoint, const std::string& out_dir) {
    Pipeline p = assemble(cfg);
    ModelParams model = load_checkpoint(checkpoint);
    const FilterDb filter = build_filter(p.workload, model);
    std::filesystem::create_directories(out_dir);

    AnalysisContext ctx;
    ctx.rep_graph = &p.workload.eval_graph;
    ctx.features = &p.eval_features;
    ctx.queries = &p.workload.test;
    ctx.candidates = &p.workload.eval_candidates;
    ctx.filter = &filter;
    ctx.options = cfg.eval;

    std::ofstream csv(out_dir + "/mask_report.csv");
    csv << "relation,label,scope,delta_mr,occurrences,affected_queries\n";
    for (std::size_t r = 0; r < p.workload.relations.size(); ++r) {
        const auto rel = static_cast<RelationId>(r);
        for (MaskScope scope : {MaskScope::PerStatement, MaskScope::Global}) {
            const auto rep = delta_mr(model, ctx, rel, scope);
            csv << rel << "," << rep.label << ","
                << (scope == MaskScope::PerStatement ? "per_statement" : "global") << ","
                << rep.delta_mr << "," << rep.occurrences << "," << rep.affected_queries << "\n";
        }
    }

    const auto outcome = evaluate(model, *ctx.rep_graph, *ctx.features, *ctx.queries,
                                  *ctx.candidates, filter, cfg.eval);
    json buckets = json::object();
    for (const auto& [count, ranks] : ranks_by_qualifier_count(outcome)) {
        std::vector<double> sorted = ranks;
        std::sort(sorted.begin(), sorted.end());
        double mean = 0.0;
        for (double v : sorted) mean += v;
        mean /= static_cast<double>(sorted.size());
        buckets[std::to_string(count)] = {{"queries", sorted.size()},
                                          {"mean_rank", mean},
                                          {"median_rank", sorted[sorted.size() / 2]},
                                          {"ranks", sorted}};
    }
    std::ofstream(out_dir + "/rank_buckets.json") << buckets.dump(2) << "\n";
    std::cout << "mask report and rank buckets written to " << out_dir << "\n";
    return 0;
}

int cmd_report(const std::string& run_a, const std::string& run_b, const std::string& out_path) {
    auto load = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("report: cannot open " + path);
        json j;
        in >> j;
        return j;
    };
    const json a = load(run_a);
    const json b = load(run_b);
    auto field = [](const json& j, const char* name) {
        return j.at("combined").at(name).get<double>();
    };
    auto hits10 = [](const json& j) {
        return j.at("combined").at("hits").at("10").get<double>();
    };
    std::ofstream csv(out_path);
    csv << "run,amr,mrr,hits@1,hits@5,hits@10,hits@10_delta\n";
    auto row = [&](const std::string& name, const json& j, double delta, bool with_delta) {
        csv << name << "," << field(j, "amr") << "," << field(j, "mrr") << ","
            << j.at("combined").at("hits").at("1").get<double>() << ","
            << j.at("combined").at("hits").at("5").get<double>() << "," << hits10(j) << ",";
        if (with_delta) csv << delta;
        csv << "\n";
    };
    row(run_a, a, 0.0, false);
    row(run_b, b, hits10(b) - hits10(a), true);
    std::cout << "report written to " << out_path << " (Hits@10 delta "
              << hits10(b) - hits10(a) << ")\n";
    return 0;
}

// Random search over the hyperparameter ranges in the config's `sweep`
// section (arrays of candidate values); defaults cover the usual knobs.
int cmd_sweep(const RunConfig& base, int trials, std::uint64_t seed, const std::string& out_dir) {
    json ranges = base.raw.value("sweep", json::object());
    if (ranges.empty()) {
        ranges = {{"model.d_r", {16, 32, 64}},
                  {"train.learning_rate", {1e-3, 5e-3}},
                  {"train.batch_size", {64, 128}},
                  {"train.label_smoothing", {0.0, 0.1}}};
    }
    std::filesystem::create_directories(out_dir);

    struct Trial {
        int index;
        json params;
        double hits10;
        int best_epoch;
    };
    std::vector<Trial> board;

    for (int trial = 0; trial < trials; ++trial) {
        Rng rng(seed * 1000003ULL + static_cast<std::uint64_t>(trial));
        json overrides = json::object();
        json raw = base.raw;
        for (const auto& [path, values] : ranges.items()) {
            if (!values.is_array() || values.empty())
                throw ConfigError("sweep." + path + ": expected a nonempty array");
            const json v = values.at(rng.below(values.size()));
            overrides[path] = v;
            const auto dot = path.find('.');
            if (dot == std::string::npos) throw ConfigError("sweep." + path + ": expected section.key");
            raw[path.substr(0, dot)][path.substr(dot + 1)] = v;
        }
        RunConfig cfg = parse_config(raw);

        Pipeline p = assemble(cfg);
        ModelParams model = ModelParams::init(
            cfg.model, static_cast<int>(p.workload.train_graph.num_relations()), cfg.model_seed);
        const FilterDb filter = build_filter(p.workload, model);
        TrainData data;
        data.train_graph = &p.workload.train_graph;
        data.train_features = &p.train_features;
        data.eval_graph = &p.workload.eval_graph;
        data.eval_features = &p.eval_features;
        data.valid = &p.workload.valid;
        data.eval_candidates = &p.workload.eval_candidates;
        data.filter = &filter;
        data.eval_options = cfg.eval;
        const auto result = train(std::move(model), data, cfg.train);

        board.push_back({trial, overrides, result.best_hits10, result.best_epoch});
        std::cout << "trial " << trial << " " << overrides.dump() << " valid Hits@10 "
                  << result.best_hits10 << "\n";
    }

    std::stable_sort(board.begin(), board.end(),
                     [](const Trial& x, const Trial& y) { return x.hits10 > y.hits10; });
    std::ofstream csv(out_dir + "/leaderboard.csv");
    csv << "rank,trial,valid_hits@10,best_epoch,params\n";
    for (std::size_t i = 0; i < board.size(); ++i) {
        const auto& t = board[i];
        std::string params = t.params.dump();
        std::string quoted;
        for (char ch : params) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        csv << i + 1 << "," << t.index << "," << t.hits10 << "," << t.best_epoch << ",\"" << quoted
            << "\"\n";
    }
    std::cout << "leaderboard written to " << out_dir << "/leaderboard.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Link prediction on hyper-relational knowledge graphs"};
    app.require_subcommand(1);

    // ingest
    std::string in_path, out_dir = "out", config_path;
    int feature_dim = 0;
    std::uint64_t feature_seed = 1;
    auto* ingest = app.add_subcommand("ingest", "Parse and canonicalize a statement file");
    ingest->add_option("--in", in_path, "statement file (h,r,t[,qr,qe]* per line)")->required();
    ingest->add_option("--out", out_dir, "output directory")->required();
    ingest->add_option("--feature-dim", feature_dim, "emit synthetic features of this width");
    ingest->add_option("--feature-seed", feature_seed, "synthetic feature seed");

    // shared config + overrides for the pipeline commands
    struct Overrides {
        std::optional<std::string> mode, statements, features, encoder;
        std::optional<std::uint64_t> seed;
        std::optional<std::string> ratios;
        std::optional<int> qp_slots, max_epochs;
        std::optional<double> learning_rate;

        void attach(CLI::App* cmd, std::string& config_path) {
            cmd->add_option("--config", config_path, "run config JSON");
            cmd->add_option("--mode", mode, "fi|si");
            cmd->add_option("--in", statements, "statement file");
            cmd->add_option("--features", features, "feature file (TSV)");
            cmd->add_option("--seed", seed, "split seed");
            cmd->add_option("--ratios", ratios, "FI ratios a,b,c");
            cmd->add_option("--encoder", encoder, "linear|stare");
            cmd->add_option("--qp-slots", qp_slots, "qualifier slots: 0,2,4,6");
            cmd->add_option("--max-epochs", max_epochs, "training epoch cap");
            cmd->add_option("--learning-rate", learning_rate, "optimizer step size");
        }

        json apply(json raw) const {
            if (mode) raw["split"]["mode"] = *mode;
            if (statements) raw["data"]["statements"] = *statements;
            if (features) raw["data"]["features"] = *features;
            if (seed) raw["split"]["seed"] = *seed;
            if (ratios) {
                std::vector<double> r;
                std::stringstream ss(*ratios);
                std::string part;
                while (std::getline(ss, part, ',')) r.push_back(std::stod(part));
                raw["split"]["ratios"] = r;
            }
            if (encoder) raw["model"]["encoder"] = *encoder;
            if (qp_slots) raw["model"]["qp_slots"] = *qp_slots;
            if (max_epochs) raw["train"]["max_epochs"] = *max_epochs;
            if (learning_rate) raw["train"]["learning_rate"] = *learning_rate;
            return raw;
        }
    } ov;

    auto* split = app.add_subcommand("split", "Build an inductive split with audits");
    ov.attach(split, config_path);
    split->add_option("--out", out_dir, "split output directory")->required();

    std::string checkpoint, out_prefix = "run";
    auto* train_cmd = app.add_subcommand("train", "Train a model from a run config");
    ov.attach(train_cmd, config_path);
    train_cmd->add_option("--out", out_prefix, "checkpoint path prefix");

    bool on_valid = false;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint (filtered ranking)");
    ov.attach(eval_cmd, config_path);
    eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint path prefix")->required();
    eval_cmd->add_option("--out", out_prefix, "metrics output prefix");
    eval_cmd->add_flag("--valid", on_valid, "evaluate the validation split instead of test");

    auto* ablate = app.add_subcommand("ablate", "Qualifier-masking ablation (delta MR)");
    ov.attach(ablate, config_path);
    ablate->add_option("--checkpoint", checkpoint, "checkpoint path prefix")->required();
    ablate->add_option("--out", out_dir, "analysis output directory")->required();

    std::string run_a, run_b;
    auto* report = app.add_subcommand("report", "Side-by-side comparison of two stored runs");
    report->add_option("--run-a", run_a, "metrics JSON of the first run")->required();
    report->add_option("--run-b", run_b, "metrics JSON of the second run")->required();
    report->add_option("--out", out_prefix, "output CSV path")->required();

    int trials = 8;
    std::uint64_t sweep_seed = 0;
    auto* sweep = app.add_subcommand("sweep", "Seeded random hyperparameter search");
    ov.attach(sweep, config_path);
    sweep->add_option("--trials", trials, "number of sampled configurations");
    sweep->add_option("--sweep-seed", sweep_seed, "sampler seed");
    sweep->add_option("--out", out_dir, "leaderboard output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) return cmd_ingest(in_path, out_dir, feature_dim, feature_seed);
        if (*report) return cmd_report(run_a, run_b, out_prefix);

        json raw = json::object();
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("config: cannot open " + config_path);
            in >> raw;
        }
        const RunConfig cfg = parse_config(ov.apply(std::move(raw)));

        if (*split) return cmd_split(cfg, out_dir);
        if (*train_cmd) return cmd_train(cfg, out_prefix);
        if (*eval_cmd) return cmd_eval(cfg, checkpoint, out_prefix, on_valid);
        if (*ablate) return cmd_ablate(cfg, checkpoint, out_dir);
        if (*sweep) return cmd_sweep(cfg, trials, sweep_seed, out_dir);
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const SplitError& e) {
        std::cerr << "split failure: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
