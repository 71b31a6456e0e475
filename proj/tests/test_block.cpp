#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hgl/block.hpp"
#include "hgl/errors.hpp"
#include "hgl/model.hpp"
#include "hgl/synth.hpp"
#include "hgl/weak_label.hpp"

using namespace hgl;

namespace {

Sentence make_sentence(const std::vector<std::string>& tokens, int sent_id) {
    Sentence s;
    s.tokens = tokens;
    s.doc_id = "d0";
    s.sent_id = sent_id;
    return s;
}

Phrase phrase_of(const std::string& joined) {
    Phrase p;
    std::istringstream in(joined);
    std::string tok;
    while (in >> tok) p.push_back(tok);
    return p;
}

double mean_block_confidence(const DenoiserModel& model, const Corpus& corpus,
                             const Block& block) {
    double sum = 0.0;
    long long n = 0;
    for (const PhraseCandidate& c : block.admitted)
        for (const SpanRef& occ : c.occurrences) {
            const MarkedInstance minst = mark_instance(
                model, corpus.sentences[static_cast<std::size_t>(occ.sent_index)], occ.span);
            ForwardCache cache;
            sum += encode_and_score(model, minst, cache);
            ++n;
        }
    return sum / static_cast<double>(n);
}

} // namespace

TEST_CASE("candidate extraction: chunker, exclusions, dedup, aux column") {
    Dictionary dict;
    dict.entries["PER"] = {phrase_of("George Washington")};

    Corpus corpus;
    corpus.sentences.push_back(
        make_sentence({"George", "Washington", "visited", "Mount", "Vernon"}, 0));
    corpus.sentences.push_back(make_sentence({"all", "lowercase", "words", "here"}, 1));
    corpus.sentences.push_back(make_sentence({"then", "Mount", "Vernon", "again"}, 2));

    std::vector<PhraseCandidate> cands = extract_candidates(corpus, dict, "PER");
    REQUIRE(cands.size() == 1);
    CHECK(cands[0].phrase == phrase_of("Mount Vernon"));
    REQUIRE(cands[0].occurrences.size() == 2);
    CHECK(cands[0].occurrences[0] == SpanRef{0, {3, 5}});
    CHECK(cands[0].occurrences[1] == SpanRef{2, {1, 3}});

    // Runs longer than six tokens are not mention-shaped.
    Corpus runs;
    runs.sentences.push_back(
        make_sentence({"A", "B", "C", "D", "E", "F", "G", "stop"}, 0)); // run of 7
    runs.sentences.push_back(make_sentence({"H", "I", "J", "K", "L", "M", "stop"}, 1));
    Dictionary empty_dict;
    const std::vector<PhraseCandidate> from_runs = extract_candidates(runs, empty_dict, "PER");
    REQUIRE(from_runs.size() == 1);
    CHECK(from_runs[0].phrase == phrase_of("H I J K L M"));

    // A phrase of the target type never becomes a candidate, even at spans
    // the greedy matcher left unlabeled; other types' phrases stay eligible.
    Dictionary loc;
    loc.entries["LOC"] = {phrase_of("Mount Vernon")};
    const std::vector<PhraseCandidate> for_per = extract_candidates(corpus, loc, "PER");
    bool has_mount = false;
    for (const PhraseCandidate& c : for_per)
        if (c.phrase == phrase_of("Mount Vernon")) has_mount = true;
    CHECK(has_mount);
    const std::vector<PhraseCandidate> for_loc = extract_candidates(corpus, loc, "LOC");
    for (const PhraseCandidate& c : for_loc) CHECK_FALSE(c.phrase == phrase_of("Mount Vernon"));

    // Auxiliary column: exactly the listed spans, minus dictionary matches.
    Corpus aux;
    aux.has_aux = true;
    Sentence s = make_sentence({"George", "Washington", "liked", "quiet", "rivers"}, 0);
    s.aux_candidates = {{0, 2}, {3, 5}};
    aux.sentences.push_back(s);
    const std::vector<PhraseCandidate> from_aux = extract_candidates(aux, dict, "PER");
    REQUIRE(from_aux.size() == 1);
    CHECK(from_aux[0].phrase == phrase_of("quiet rivers"));
}

TEST_CASE("phrase classifier: separability, warnings, failure modes") {
    const SynthConfig cfg = [&] {
        SynthConfig c;
        SynthTypeParams tp;
        tp.type = "ENT";
        tp.instances = 1500;
        tp.noise_rate = 0.2;
        tp.ambiguity = 0.7;
        tp.fn = 0.3;
        c.types = {tp};
        return c;
    }();
    const SynthOutput out = synth_generate(cfg, 13);
    const std::vector<PhraseCandidate> cands = extract_candidates(out.train, out.dict, "ENT");
    REQUIRE(cands.size() > 20);
    const PhraseClassifier clf = train_phrase_classifier(out.dict, "ENT", cands, 7);

    long long above = 0;
    const std::vector<Phrase>& positives = out.dict.entries.at("ENT");
    for (const Phrase& p : positives)
        if (clf.score(p) > 0.5) ++above;
    CHECK(static_cast<double>(above) >= 0.9 * static_cast<double>(positives.size()));

    // Scores depend only on the phrase, and identically shaped unseen
    // phrases tie exactly.
    CHECK(clf.score(phrase_of("Mount Vernon")) == clf.score(phrase_of("Mount Vernon")));
    CHECK(clf.score(phrase_of("Xllo")) == clf.score(phrase_of("Yllo")));

    std::ostringstream warn;
    Dictionary tiny;
    tiny.entries["ENT"] = {phrase_of("Aa Bb"), phrase_of("Cc")};
    (void)train_phrase_classifier(tiny, "ENT", cands, 7, &warn);
    CHECK(warn.str().find("warning") != std::string::npos);

    CHECK_THROWS_AS((void)train_phrase_classifier(tiny, "MISSING", cands, 7), data_error);
}

TEST_CASE("block admission: size law, ordering, determinism") {
    Dictionary dict;
    dict.entries["ENT"] = {phrase_of("Qq Rr")};
    Corpus corpus;
    // 30 distinct single-token capitalized candidates.
    for (int i = 0; i < 30; ++i)
        corpus.sentences.push_back(
            make_sentence({"x", "T" + std::to_string(i) + "zz", "y"}, i));
    const std::vector<PhraseCandidate> cands = extract_candidates(corpus, dict, "ENT");
    REQUIRE(cands.size() == 30);
    const PhraseClassifier clf = train_phrase_classifier(dict, "ENT", cands, 3);

    CHECK(build_block(cands, clf, 0.10).admitted.size() == 3);
    CHECK(build_block(cands, clf, 1.0).admitted.size() == 30);
    CHECK(build_block(cands, clf, 0.0).admitted.size() == 0);
    CHECK(build_block({}, clf, 0.10).admitted.empty());
    CHECK(build_block(std::vector<PhraseCandidate>(cands.begin(), cands.begin() + 7), clf, 0.5)
              .admitted.size() == 4);
    CHECK_THROWS_AS((void)build_block(cands, clf, 1.5), usage_error);

    const std::vector<PhraseCandidate> ranked = rank_candidates(cands, clf);
    for (std::size_t i = 1; i < ranked.size(); ++i) {
        const bool ordered = ranked[i - 1].score > ranked[i].score ||
                             (ranked[i - 1].score == ranked[i].score &&
                              ranked[i - 1].phrase < ranked[i].phrase);
        REQUIRE(ordered);
    }

    const PhraseClassifier again = train_phrase_classifier(dict, "ENT", cands, 3);
    const std::vector<PhraseCandidate> reranked = rank_candidates(cands, again);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        REQUIRE(ranked[i].phrase == reranked[i].phrase);
        REQUIRE(ranked[i].score == reranked[i].score);
    }
}

TEST_CASE("block accuracy comes from dev gold surfaces on the 5% grid") {
    Block block;
    block.admitted.push_back({phrase_of("Mount Vernon"), {{0, {0, 2}}}, 0.9});
    block.admitted.push_back({phrase_of("Foo Bar"), {{0, {0, 2}}}, 0.8});

    Corpus dev;
    Sentence s = make_sentence({"Mount", "Vernon", "is", "quiet"}, 0);
    s.has_gold = true;
    s.gold = {{{0, 2}, "LOC"}};
    dev.sentences.push_back(s);

    CHECK(estimate_block_accuracy(block, dev, "LOC") == 0.5);
    CHECK(estimate_block_accuracy(block, dev, "PER") == 0.0);
    CHECK(estimate_block_accuracy(Block{}, dev, "LOC") == 0.0);

    block.admitted.push_back({phrase_of("Baz"), {{0, {0, 1}}}, 0.7});
    CHECK(estimate_block_accuracy(block, dev, "LOC") == 0.35); // 1/3 snapped

    Corpus no_gold;
    no_gold.sentences.push_back(make_sentence({"plain", "text"}, 0));
    CHECK_THROWS_AS((void)estimate_block_accuracy(block, no_gold, "LOC"), data_error);
}

TEST_CASE("top slice covers most withheld mentions") {
    SynthConfig cfg;
    SynthTypeParams tp;
    tp.type = "ENT";
    tp.instances = 2500;
    tp.noise_rate = 0.2;
    tp.ambiguity = 0.75;
    tp.fn = 0.5;
    cfg.types = {tp};
    const SynthOutput out = synth_generate(cfg, 17);

    const std::vector<Instance> labeled = weak_label(out.train, out.dict);
    std::set<std::pair<int, Span>> matched;
    for (const Instance& inst : labeled) matched.insert({inst.sent_index, inst.span});
    std::set<std::pair<int, Span>> withheld;
    for (std::size_t si = 0; si < out.train.sentences.size(); ++si)
        for (const GoldMention& g : out.train.sentences[si].gold)
            if (!matched.count({static_cast<int>(si), g.span}))
                withheld.insert({static_cast<int>(si), g.span});
    REQUIRE(withheld.size() > 100);

    const std::vector<PhraseCandidate> cands = extract_candidates(out.train, out.dict, "ENT");
    const PhraseClassifier clf = train_phrase_classifier(out.dict, "ENT", cands, 11);
    const Block block = build_block(cands, clf, 0.10);
    REQUIRE(!block.admitted.empty());

    long long covered = 0;
    for (const PhraseCandidate& c : block.admitted)
        for (const SpanRef& occ : c.occurrences)
            if (withheld.count({occ.sent_index, occ.span})) ++covered;
    CHECK(static_cast<double>(covered) >= 0.5 * static_cast<double>(withheld.size()));
}

TEST_CASE("joint training: degeneracy and the pull of the block") {
    SynthConfig scfg;
    SynthTypeParams tp;
    tp.type = "ENT";
    tp.instances = 600;
    tp.noise_rate = 0.2;
    tp.ambiguity = 0.7;
    tp.fn = 0.3;
    scfg.types = {tp};
    const SynthOutput out = synth_generate(scfg, 19);
    const std::vector<Instance> labeled = weak_label(out.train, out.dict);

    NoiseProfile profile;
    profile.by_type["ENT"] = {0.8, static_cast<long long>(labeled.size())};

    TrainConfig cfg;
    cfg.dim = 16;
    cfg.epochs = 2;
    cfg.batch_size = 64;
    cfg.seed = 5;

    const TrainResult base = train(out.train, labeled, profile, cfg).at("ENT");

    const std::vector<PhraseCandidate> cands = extract_candidates(out.train, out.dict, "ENT");
    const PhraseClassifier clf = train_phrase_classifier(out.dict, "ENT", cands, 23);
    Block block = build_block(cands, clf, 0.10);
    block.p_blk = 0.0;

    const TrainResult lambda_zero =
        joint_train(out.train, labeled, "ENT", block, profile, cfg, 0.0);
    CHECK(lambda_zero.model.p.w2 == base.model.p.w2);
    CHECK(lambda_zero.model.p.emb == base.model.p.emb);

    const TrainResult no_block =
        joint_train(out.train, labeled, "ENT", Block{}, profile, cfg, 1.0);
    CHECK(no_block.model.p.w2 == base.model.p.w2);
    CHECK(no_block.model.p.emb == base.model.p.emb);

    // With p_blk = 0 every admitted occurrence is pushed toward zero, so the
    // block's mean confidence must drop relative to positive-only training.
    const TrainResult joint = joint_train(out.train, labeled, "ENT", block, profile, cfg, 1.0);
    CHECK(mean_block_confidence(joint.model, out.train, block) <
          mean_block_confidence(base.model, out.train, block));

    CHECK_THROWS_AS(
        (void)joint_train(out.train, labeled, "MISSING", block, profile, cfg, 1.0),
        usage_error);
    CHECK_THROWS_AS((void)joint_train(out.train, {}, "ENT", block, profile, cfg, 1.0),
                    data_error);
}
