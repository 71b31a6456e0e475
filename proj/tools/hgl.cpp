// Command-line front end: synth | label | estimate | train | block |
// denoise | eval. Every run writes a manifest next to its outputs (resolved
// configuration, seed, tool version — no timestamps, so reruns are
// byte-identical); partially written outputs are removed if a run fails.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hgl/block.hpp"
#include "hgl/checkpoint.hpp"
#include "hgl/config.hpp"
#include "hgl/corpus.hpp"
#include "hgl/dictionary.hpp"
#include "hgl/errors.hpp"
#include "hgl/eval.hpp"
#include "hgl/model.hpp"
#include "hgl/noise.hpp"
#include "hgl/synth.hpp"
#include "hgl/train.hpp"
#include "hgl/weak_label.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

// Removes every registered output if the run dies before release().
struct OutputGuard {
    std::vector<fs::path> paths;
    bool armed = true;

    void add(const fs::path& p) { paths.push_back(p); }
    void release() { armed = false; }
    ~OutputGuard() {
        if (!armed) return;
        for (const fs::path& p : paths) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }
};

void write_manifest(const fs::path& path, const std::string& command, const json& config,
                    const json& inputs, const std::vector<std::string>& outputs) {
    json m;
    m["command"] = command;
    m["config"] = config;
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    m["tool_version"] = kToolVersion;
    std::ofstream out(path);
    if (!out) throw hgl::data_error("cannot write manifest: " + path.string());
    out << m.dump(2) << '\n';
    if (!out) throw hgl::data_error("failed while writing manifest: " + path.string());
}

std::pair<std::string, std::string> split_kv(const std::string& spec, const char* what) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
        throw hgl::usage_error(std::string(what) + " must look like KEY=VALUE, got '" + spec +
                               "'");
    return {spec.substr(0, eq), spec.substr(eq + 1)};
}

double parse_probability(const std::string& what, const std::string& value) {
    std::size_t used = 0;
    double p = 0.0;
    try {
        p = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size() || value.empty() || !(p >= 0.0 && p <= 1.0))
        throw hgl::usage_error(what + " needs a probability in [0, 1], got '" + value + "'");
    return p;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true") return true;
    if (value == "0" || value == "false") return false;
    throw hgl::data_error("config key '" + key + "' needs a boolean (0/1/true/false), got '" +
                          value + "'");
}

long long parse_int(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    long long out = 0;
    try {
        out = std::stoll(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size() || value.empty())
        throw hgl::data_error("config key '" + key + "' needs an integer, got '" + value + "'");
    return out;
}

double parse_real(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size() || value.empty())
        throw hgl::data_error("config key '" + key + "' needs a number, got '" + value + "'");
    return out;
}

// Training keys a config file may set; command-line flags win over these.
void apply_train_kv(const std::map<std::string, std::string>& kv, hgl::TrainConfig& cfg,
                    std::string& loss, bool& with_block, double& block_fraction,
                    double& block_lambda) {
    for (const auto& [key, value] : kv) {
        if (key == "batch_size")
            cfg.batch_size = static_cast<int>(parse_int(key, value));
        else if (key == "learning_rate")
            cfg.learning_rate = parse_real(key, value);
        else if (key == "epochs")
            cfg.epochs = static_cast<int>(parse_int(key, value));
        else if (key == "dim")
            cfg.dim = static_cast<int>(parse_int(key, value));
        else if (key == "min_count")
            cfg.min_count = static_cast<int>(parse_int(key, value));
        else if (key == "use_context")
            cfg.use_context = parse_bool(key, value);
        else if (key == "em_epoch_frozen")
            cfg.em_epoch_frozen = parse_bool(key, value);
        else if (key == "epoch_frozen_ranking")
            cfg.epoch_frozen_ranking = parse_bool(key, value);
        else if (key == "loss")
            loss = value;
        else if (key == "with_block")
            with_block = parse_bool(key, value);
        else if (key == "block_fraction")
            block_fraction = parse_real(key, value);
        else if (key == "block_lambda")
            block_lambda = parse_real(key, value);
        else
            throw hgl::data_error("unknown train config key '" + key + "'");
    }
}

std::map<std::string, long long> type_counts(const std::vector<hgl::Instance>& instances) {
    std::map<std::string, long long> counts;
    for (const hgl::Instance& inst : instances) ++counts[inst.entity_type];
    return counts;
}

// Profile resolution shared by train and denoise: a profile file, explicit
// TYPE=rate overrides on top (command line wins), pool sizes from the
// instance counts. The flag takes the noise rate; the profile stores the
// complementary accuracy p = 1 - noise.
hgl::NoiseProfile resolve_profile(const std::string& profile_path,
                                  const std::vector<std::string>& rate_overrides,
                                  const std::map<std::string, long long>& counts) {
    hgl::NoiseProfile profile;
    if (!profile_path.empty()) profile = hgl::load_profile(profile_path);
    for (const std::string& spec : rate_overrides) {
        const auto [type, value] = split_kv(spec, "--noise-rate");
        const auto it = counts.find(type);
        if (it == counts.end())
            throw hgl::usage_error("--noise-rate names type '" + type +
                                   "' but the instances contain none of it");
        const double noise = parse_probability("--noise-rate " + type, value);
        profile.by_type[type] = {1.0 - noise, it->second};
    }
    if (profile.by_type.empty())
        throw hgl::usage_error("need --profile or at least one --noise-rate TYPE=P");
    return profile;
}

json config_echo(const std::map<std::string, std::string>& kv) {
    json j = json::object();
    for (const auto& [k, v] : kv) j[k] = v;
    return j;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
    std::string config_path;
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    std::string out_dir;
};

void run_synth(const SynthArgs& args) {
    std::map<std::string, std::string> kv;
    if (!args.config_path.empty()) kv = hgl::load_kv_config(args.config_path);
    for (const std::string& spec : args.sets) {
        const auto [key, value] = split_kv(spec, "--set");
        kv[key] = value; // command line wins
    }
    const hgl::SynthConfig cfg = hgl::synth_config_from_kv(kv);

    fs::create_directories(args.out_dir);
    const fs::path dir(args.out_dir);
    OutputGuard guard;
    const fs::path train_path = dir / "train.bio";
    const fs::path dev_path = dir / "dev.bio";
    const fs::path dict_path = dir / "dict.tsv";
    const fs::path manifest_path = dir / "manifest.json";
    for (const fs::path& p : {train_path, dev_path, dict_path, manifest_path}) guard.add(p);

    const hgl::SynthOutput out = hgl::synth_generate(cfg, args.seed);
    hgl::write_corpus(out.train, train_path.string());
    hgl::write_corpus(out.dev, dev_path.string());
    hgl::write_dictionary(out.dict, dict_path.string());

    json config = config_echo(kv);
    config["seed"] = args.seed;
    write_manifest(manifest_path, "synth", config,
                   json{{"config_file", args.config_path}},
                   {"train.bio", "dev.bio", "dict.tsv"});
    guard.release();
}

// ---------------------------------------------------------------------------
// label

struct LabelArgs {
    std::string corpus_path;
    std::string dict_path;
    std::string out_path;
};

void run_label(const LabelArgs& args) {
    const hgl::Corpus corpus = hgl::load_corpus(args.corpus_path);
    const hgl::Dictionary dict = hgl::load_dictionary(args.dict_path);
    const std::vector<hgl::Instance> instances = hgl::weak_label(corpus, dict);

    OutputGuard guard;
    guard.add(args.out_path);
    const fs::path manifest_path = args.out_path + ".manifest.json";
    guard.add(manifest_path);
    hgl::write_instances(instances, args.out_path);
    write_manifest(manifest_path, "label", json::object(),
                   json{{"corpus", args.corpus_path}, {"dict", args.dict_path}},
                   {fs::path(args.out_path).filename().string()});
    guard.release();
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateArgs {
    std::string dev_path;
    std::string dict_path;
    std::string train_instances_path;
    std::string out_path;
};

void run_estimate(const EstimateArgs& args) {
    const hgl::Corpus dev = hgl::load_corpus(args.dev_path);
    const hgl::Dictionary dict = hgl::load_dictionary(args.dict_path);
    const std::vector<hgl::Instance> dev_instances = hgl::weak_label(dev, dict);
    const std::vector<hgl::Instance> train_instances =
        hgl::load_instances(args.train_instances_path);

    hgl::NoiseProfile profile;
    for (const auto& [type, n] : type_counts(train_instances))
        profile.by_type[type] = hgl::estimate_noise_rate(dev_instances, type, n);

    OutputGuard guard;
    guard.add(args.out_path);
    const fs::path manifest_path = args.out_path + ".manifest.json";
    guard.add(manifest_path);
    hgl::write_profile(profile, args.out_path);
    write_manifest(manifest_path, "estimate", json::object(),
                   json{{"dev", args.dev_path},
                        {"dict", args.dict_path},
                        {"train_instances", args.train_instances_path}},
                   {fs::path(args.out_path).filename().string()});
    guard.release();
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    std::string corpus_path;
    std::string instances_path;
    std::string profile_path;
    std::vector<std::string> rate_overrides;
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;

    // Mirrors of command-line flags; applied over the config file only when
    // the flag was actually given (checked via CLI11 counts).
    std::string loss = "hgl";
    int epochs = 0;
    int batch_size = 0;
    double learning_rate = 0.0;
    int dim = 0;
    int min_count = 0;
    bool use_context = false;
    bool em_frozen = false;
    bool frozen_ranking = false;

    bool with_block = false;
    std::string dict_path;
    double block_fraction = 0.10;
    double block_lambda = 1.0;
    std::vector<std::string> p_blk_overrides;
    std::string dev_path;

    CLI::App* cmd = nullptr;
};

void run_train(const TrainArgs& args) {
    hgl::TrainConfig cfg;
    std::string loss = "hgl";
    bool with_block = false;
    double block_fraction = 0.10;
    double block_lambda = 1.0;
    std::map<std::string, std::string> file_kv;
    if (!args.config_path.empty()) {
        file_kv = hgl::load_kv_config(args.config_path);
        apply_train_kv(file_kv, cfg, loss, with_block, block_fraction, block_lambda);
    }
    const auto given = [&](const std::string& flag) { return args.cmd->count(flag) > 0; };
    if (given("--loss")) loss = args.loss;
    if (given("--epochs")) cfg.epochs = args.epochs;
    if (given("--batch-size")) cfg.batch_size = args.batch_size;
    if (given("--lr")) cfg.learning_rate = args.learning_rate;
    if (given("--dim")) cfg.dim = args.dim;
    if (given("--min-count")) cfg.min_count = args.min_count;
    if (given("--use-context")) cfg.use_context = args.use_context;
    if (given("--em-frozen")) cfg.em_epoch_frozen = args.em_frozen;
    if (given("--frozen-ranking")) cfg.epoch_frozen_ranking = args.frozen_ranking;
    if (given("--with-block")) with_block = args.with_block;
    if (given("--block-fraction")) block_fraction = args.block_fraction;
    if (given("--block-lambda")) block_lambda = args.block_lambda;
    cfg.loss = hgl::parse_loss_kind(loss);
    cfg.seed = args.seed;

    const hgl::Corpus corpus = hgl::load_corpus(args.corpus_path);
    const std::vector<hgl::Instance> instances = hgl::load_instances(args.instances_path);
    const std::map<std::string, long long> counts = type_counts(instances);
    const hgl::NoiseProfile profile =
        resolve_profile(args.profile_path, args.rate_overrides, counts);

    fs::create_directories(args.out_dir);
    const fs::path dir(args.out_dir);
    OutputGuard guard;

    std::map<std::string, hgl::TrainResult> results;
    if (with_block) {
        if (args.dict_path.empty())
            throw hgl::usage_error("--with-block needs --dict to build the candidate pool");
        const hgl::Dictionary dict = hgl::load_dictionary(args.dict_path);
        std::map<std::string, double> p_blk;
        for (const std::string& spec : args.p_blk_overrides) {
            const auto [type, value] = split_kv(spec, "--p-blk");
            p_blk[type] = parse_probability("--p-blk " + type, value);
        }
        hgl::Corpus dev;
        if (!args.dev_path.empty()) dev = hgl::load_corpus(args.dev_path);
        for (const auto& [type, n] : counts) {
            (void)n;
            const std::vector<hgl::PhraseCandidate> candidates =
                hgl::extract_candidates(corpus, dict, type);
            const hgl::PhraseClassifier classifier =
                hgl::train_phrase_classifier(dict, type, candidates, args.seed, &std::cerr);
            hgl::Block block = hgl::build_block(candidates, classifier, block_fraction);
            if (const auto it = p_blk.find(type); it != p_blk.end())
                block.p_blk = it->second;
            else if (!args.dev_path.empty())
                block.p_blk = hgl::estimate_block_accuracy(block, dev, type);
            else
                throw hgl::usage_error("--with-block needs --p-blk " + type +
                                       "=P or --dev for estimation");
            results.emplace(type, hgl::joint_train(corpus, instances, type, block, profile,
                                                   cfg, block_lambda, &std::cout));
        }
    } else {
        results = hgl::train(corpus, instances, profile, cfg, &std::cout);
    }

    std::vector<std::string> outputs;
    const fs::path manifest_path = dir / "manifest.json";
    guard.add(manifest_path);
    for (const auto& [type, result] : results) {
        const fs::path model_path = dir / ("model_" + type + ".ckpt");
        guard.add(model_path);
        hgl::save_checkpoint(result.model, model_path.string());
        outputs.push_back(model_path.filename().string());
    }

    json config = config_echo(file_kv);
    config["seed"] = args.seed;
    config["loss"] = hgl::loss_kind_name(cfg.loss);
    config["epochs"] = cfg.epochs;
    config["batch_size"] = cfg.batch_size;
    config["learning_rate"] = cfg.learning_rate;
    config["dim"] = cfg.dim;
    config["min_count"] = cfg.min_count;
    config["use_context"] = cfg.use_context;
    config["em_epoch_frozen"] = cfg.em_epoch_frozen;
    config["epoch_frozen_ranking"] = cfg.epoch_frozen_ranking;
    config["with_block"] = with_block;
    if (with_block) {
        config["block_fraction"] = block_fraction;
        config["block_lambda"] = block_lambda;
    }
    json profile_echo = json::object();
    for (const auto& [type, entry] : profile.by_type)
        profile_echo[type] = json{{"p", entry.p}, {"n", entry.n}};
    config["noise_profile"] = profile_echo;
    write_manifest(manifest_path, "train", config,
                   json{{"corpus", args.corpus_path},
                        {"instances", args.instances_path},
                        {"profile", args.profile_path},
                        {"dict", args.dict_path},
                        {"dev", args.dev_path},
                        {"config_file", args.config_path}},
                   outputs);
    guard.release();
}

// ---------------------------------------------------------------------------
// block

struct BlockArgs {
    std::string corpus_path;
    std::string dict_path;
    std::string type;
    double fraction = 0.10;
    std::uint64_t seed = 0;
    std::string dev_path;
    std::string out_path;
};

void run_block(const BlockArgs& args) {
    const hgl::Corpus corpus = hgl::load_corpus(args.corpus_path);
    const hgl::Dictionary dict = hgl::load_dictionary(args.dict_path);
    const std::vector<hgl::PhraseCandidate> candidates =
        hgl::extract_candidates(corpus, dict, args.type);
    const hgl::PhraseClassifier classifier =
        hgl::train_phrase_classifier(dict, args.type, candidates, args.seed, &std::cerr);
    const std::vector<hgl::PhraseCandidate> ranked = hgl::rank_candidates(candidates, classifier);
    hgl::Block block = hgl::build_block(candidates, classifier, args.fraction);
    if (!args.dev_path.empty())
        block.p_blk =
            hgl::estimate_block_accuracy(block, hgl::load_corpus(args.dev_path), args.type);

    OutputGuard guard;
    guard.add(args.out_path);
    const fs::path manifest_path = args.out_path + ".manifest.json";
    guard.add(manifest_path);
    hgl::write_block_dump(ranked, block.admitted.size(), args.out_path);
    write_manifest(manifest_path, "block",
                   json{{"type", args.type},
                        {"fraction", args.fraction},
                        {"seed", args.seed},
                        {"admitted", block.admitted.size()},
                        {"candidates", ranked.size()},
                        {"p_blk", block.p_blk}},
                   json{{"corpus", args.corpus_path},
                        {"dict", args.dict_path},
                        {"dev", args.dev_path}},
                   {fs::path(args.out_path).filename().string()});
    guard.release();
}

// ---------------------------------------------------------------------------
// denoise

struct DenoiseArgs {
    std::string corpus_path;
    std::string instances_path;
    std::vector<std::string> model_paths;
    std::string profile_path;
    std::vector<std::string> rate_overrides;
    std::string out_path;
};

void run_denoise(const DenoiseArgs& args) {
    const hgl::Corpus corpus = hgl::load_corpus(args.corpus_path);
    const std::vector<hgl::Instance> instances = hgl::load_instances(args.instances_path);
    const std::map<std::string, long long> counts = type_counts(instances);
    const hgl::NoiseProfile profile =
        resolve_profile(args.profile_path, args.rate_overrides, counts);

    std::map<std::string, hgl::DenoiserModel> models;
    for (const std::string& path : args.model_paths) {
        hgl::DenoiserModel model = hgl::load_checkpoint(path);
        const std::string type = model.entity_type;
        if (!models.emplace(type, std::move(model)).second)
            throw hgl::usage_error("two models claim type " + type);
    }
    for (const auto& [type, n] : counts) {
        (void)n;
        if (!models.count(type))
            throw hgl::usage_error("no model supplied for type " + type);
    }

    std::vector<hgl::ScoredInstance> scored;
    for (const auto& [type, model] : models) {
        const std::vector<hgl::ScoredInstance> part =
            hgl::score_instances(model, corpus, instances);
        scored.insert(scored.end(), part.begin(), part.end());
    }
    const hgl::Corpus denoised = hgl::export_denoised(corpus, scored, profile);

    OutputGuard guard;
    guard.add(args.out_path);
    const fs::path manifest_path = args.out_path + ".manifest.json";
    guard.add(manifest_path);
    hgl::write_corpus(denoised, args.out_path);
    json profile_echo = json::object();
    for (const auto& [type, entry] : profile.by_type)
        profile_echo[type] = json{{"p", entry.p}, {"n", entry.n}};
    write_manifest(manifest_path, "denoise", json{{"noise_profile", profile_echo}},
                   json{{"corpus", args.corpus_path},
                        {"instances", args.instances_path},
                        {"profile", args.profile_path},
                        {"models", args.model_paths}},
                   {fs::path(args.out_path).filename().string()});
    guard.release();
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    std::string ranking_path;
    std::string corpus_path;
    std::string instances_path;
    std::vector<std::string> model_paths;
    std::string denoised_path;
    std::string out_path;
};

std::vector<hgl::ScoredInstance> load_ranking_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw hgl::data_error("cannot open ranking fixture: " + path);
    std::vector<hgl::ScoredInstance> scored;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string score_s;
        std::string gold_s;
        std::string len_s;
        if (!std::getline(fields, score_s, '\t') || !std::getline(fields, gold_s, '\t') ||
            !std::getline(fields, len_s))
            throw hgl::data_error(path + ":" + std::to_string(line_no) +
                                  ": expected score<TAB>gold<TAB>span_len");
        hgl::Instance inst;
        inst.entity_type = "ranking";
        if (gold_s != "0" && gold_s != "1")
            throw hgl::data_error(path + ":" + std::to_string(line_no) +
                                  ": gold must be 0 or 1");
        inst.gold = gold_s == "1";
        const long long len = parse_int("span_len", len_s);
        if (len < 1)
            throw hgl::data_error(path + ":" + std::to_string(line_no) +
                                  ": span_len must be >= 1");
        inst.span = {0, static_cast<int>(len)};
        scored.push_back({inst, parse_real("score", score_s)});
    }
    if (scored.empty()) throw hgl::data_error("ranking fixture is empty: " + path);
    return scored;
}

void run_eval(const EvalArgs& args) {
    const std::vector<double> levels = {0.25, 0.50, 0.75};
    std::map<std::string, hgl::TypeEvalReport> by_type;

    if (!args.ranking_path.empty()) {
        const hgl::RankedResult ranked =
            hgl::make_ranking(load_ranking_fixture(args.ranking_path));
        hgl::TypeEvalReport report;
        report.curve = hgl::pr_auc(ranked);
        report.p_at_r = hgl::precision_at_recall(ranked, levels);
        by_type.emplace("ranking", std::move(report));
    } else {
        if (args.corpus_path.empty() || args.instances_path.empty() ||
            args.model_paths.empty())
            throw hgl::usage_error(
                "eval needs either --ranking or --corpus + --instances + --model");
        const hgl::Corpus corpus = hgl::load_corpus(args.corpus_path);
        const std::vector<hgl::Instance> instances =
            hgl::load_instances(args.instances_path);
        std::set<hgl::SpanKey> denoised_spans;
        bool have_denoised = false;
        if (!args.denoised_path.empty()) {
            denoised_spans = hgl::span_set(hgl::load_corpus(args.denoised_path));
            have_denoised = true;
        }
        const std::set<hgl::SpanKey> gold_spans = hgl::span_set(corpus);
        for (const std::string& path : args.model_paths) {
            const hgl::DenoiserModel model = hgl::load_checkpoint(path);
            const hgl::RankedResult ranked =
                hgl::make_ranking(hgl::score_instances(model, corpus, instances));
            hgl::TypeEvalReport report;
            report.curve = hgl::pr_auc(ranked);
            report.p_at_r = hgl::precision_at_recall(ranked, levels);
            if (have_denoised) {
                auto filter = [&](const std::set<hgl::SpanKey>& all) {
                    std::set<hgl::SpanKey> mine;
                    for (const hgl::SpanKey& k : all)
                        if (k.type == model.entity_type) mine.insert(k);
                    return mine;
                };
                report.span = hgl::span_f1(filter(denoised_spans), filter(gold_spans));
            }
            if (!by_type.emplace(model.entity_type, std::move(report)).second)
                throw hgl::usage_error("two models claim type " + model.entity_type);
        }
    }

    OutputGuard guard;
    guard.add(args.out_path);
    const fs::path manifest_path = args.out_path + ".manifest.json";
    guard.add(manifest_path);
    std::vector<std::string> outputs = {fs::path(args.out_path).filename().string()};
    const fs::path out(args.out_path);
    hgl::write_eval_report(by_type, args.out_path);
    for (const auto& [type, report] : by_type) {
        const fs::path csv =
            out.parent_path() / (out.stem().string() + "_" + type + "_pr.csv");
        guard.add(csv);
        hgl::write_pr_csv(report.curve, csv.string());
        outputs.push_back(csv.filename().string());
    }
    write_manifest(manifest_path, "eval", json::object(),
                   json{{"ranking", args.ranking_path},
                        {"corpus", args.corpus_path},
                        {"instances", args.instances_path},
                        {"models", args.model_paths},
                        {"denoised", args.denoised_path}},
                   outputs);
    guard.release();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distant-supervision denoising pipeline"};
    app.require_subcommand(1);

    SynthArgs synth;
    CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic benchmark");
    synth_cmd->add_option("--config", synth.config_path, "key=value generation config");
    synth_cmd->add_option("--set", synth.sets, "override config entries (KEY=VALUE)");
    synth_cmd->add_option("--seed", synth.seed, "generation seed")->required();
    synth_cmd->add_option("--out", synth.out_dir, "output directory")->required();
    synth_cmd->callback([&] { run_synth(synth); });

    LabelArgs label;
    CLI::App* label_cmd = app.add_subcommand("label", "Weak-label a corpus with a dictionary");
    label_cmd->add_option("--corpus", label.corpus_path, "corpus file")->required();
    label_cmd->add_option("--dict", label.dict_path, "dictionary file")->required();
    label_cmd->add_option("--out", label.out_path, "instances TSV")->required();
    label_cmd->callback([&] { run_label(label); });

    EstimateArgs estimate;
    CLI::App* estimate_cmd =
        app.add_subcommand("estimate", "Estimate the per-type noise profile from dev gold");
    estimate_cmd->add_option("--dev", estimate.dev_path, "gold-annotated dev corpus")
        ->required();
    estimate_cmd->add_option("--dict", estimate.dict_path, "dictionary file")->required();
    estimate_cmd
        ->add_option("--train-instances", estimate.train_instances_path,
                     "training instances TSV (pool sizes)")
        ->required();
    estimate_cmd->add_option("--out", estimate.out_path, "profile TSV")->required();
    estimate_cmd->callback([&] { run_estimate(estimate); });

    TrainArgs train;
    CLI::App* train_cmd = app.add_subcommand("train", "Train per-type denoisers");
    train.cmd = train_cmd;
    train_cmd->add_option("--corpus", train.corpus_path, "training corpus")->required();
    train_cmd->add_option("--instances", train.instances_path, "instances TSV")->required();
    train_cmd->add_option("--profile", train.profile_path, "noise profile TSV");
    train_cmd->add_option("--noise-rate", train.rate_overrides,
                          "explicit noise profile entry (TYPE=p)");
    train_cmd->add_option("--config", train.config_path, "key=value training config");
    train_cmd->add_option("--out", train.out_dir, "output directory")->required();
    train_cmd->add_option("--seed", train.seed, "training seed")->required();
    train_cmd->add_option("--loss", train.loss, "hgl | instance_em | xr | naive");
    train_cmd->add_option("--epochs", train.epochs, "training epochs");
    train_cmd->add_option("--batch-size", train.batch_size, "batch size");
    train_cmd->add_option("--lr", train.learning_rate, "Adam learning rate");
    train_cmd->add_option("--dim", train.dim, "model width");
    train_cmd->add_option("--min-count", train.min_count, "vocabulary frequency cutoff");
    train_cmd->add_flag("--use-context", train.use_context, "average +-1 sentence context");
    train_cmd->add_flag("--em-frozen", train.em_frozen,
                        "instance_em targets frozen at epoch start");
    train_cmd->add_flag("--frozen-ranking", train.frozen_ranking,
                        "rank batches with epoch-start confidences");
    train_cmd->add_flag("--with-block", train.with_block,
                        "joint training with a candidate block");
    train_cmd->add_option("--dict", train.dict_path, "dictionary (for --with-block)");
    train_cmd->add_option("--block-fraction", train.block_fraction, "block keep fraction");
    train_cmd->add_option("--block-lambda", train.block_lambda, "block loss weight");
    train_cmd->add_option("--p-blk", train.p_blk_overrides,
                          "block true-mention rate (TYPE=p)");
    train_cmd->add_option("--dev", train.dev_path, "dev corpus for p_blk estimation");
    train_cmd->callback([&] { run_train(train); });

    BlockArgs block;
    CLI::App* block_cmd = app.add_subcommand("block", "Build and dump a candidate block");
    block_cmd->add_option("--corpus", block.corpus_path, "corpus file")->required();
    block_cmd->add_option("--dict", block.dict_path, "dictionary file")->required();
    block_cmd->add_option("--type", block.type, "entity type")->required();
    block_cmd->add_option("--fraction", block.fraction, "keep fraction");
    block_cmd->add_option("--seed", block.seed, "classifier seed");
    block_cmd->add_option("--dev", block.dev_path, "dev corpus for p_blk estimation");
    block_cmd->add_option("--out", block.out_path, "block dump TSV")->required();
    block_cmd->callback([&] { run_block(block); });

    DenoiseArgs denoise;
    CLI::App* denoise_cmd =
        app.add_subcommand("denoise", "Rank instances and export the denoised corpus");
    denoise_cmd->add_option("--corpus", denoise.corpus_path, "corpus file")->required();
    denoise_cmd->add_option("--instances", denoise.instances_path, "instances TSV")
        ->required();
    denoise_cmd->add_option("--model", denoise.model_paths, "model checkpoint (repeatable)")
        ->required();
    denoise_cmd->add_option("--profile", denoise.profile_path, "noise profile TSV");
    denoise_cmd->add_option("--noise-rate", denoise.rate_overrides,
                            "explicit noise profile entry (TYPE=p)");
    denoise_cmd->add_option("--out", denoise.out_path, "denoised corpus file")->required();
    denoise_cmd->callback([&] { run_denoise(denoise); });

    EvalArgs eval;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Write the metrics report");
    eval_cmd->add_option("--ranking", eval.ranking_path,
                         "ranking fixture TSV (score<TAB>gold<TAB>span_len)");
    eval_cmd->add_option("--corpus", eval.corpus_path, "gold-annotated corpus");
    eval_cmd->add_option("--instances", eval.instances_path, "instances TSV");
    eval_cmd->add_option("--model", eval.model_paths, "model checkpoint (repeatable)");
    eval_cmd->add_option("--denoised", eval.denoised_path, "denoised corpus for span F1");
    eval_cmd->add_option("--out", eval.out_path, "report JSON")->required();
    eval_cmd->callback([&] { run_eval(eval); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e); // prints CLI11's diagnostic
        return 1;    // bad invocation is a usage error
    } catch (const hgl::usage_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const hgl::data_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const hgl::numeric_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
