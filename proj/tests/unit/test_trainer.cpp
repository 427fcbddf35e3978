#include "support.hpp"

#include "dascn/trainer.hpp"

#include <doctest.h>

#include <cmath>

using namespace dascn;

namespace {

DatasetBundle oracle() { return make_synthetic_dataset(SyntheticSpec{}); }

TrainConfig desk(int epochs = 1) {
    TrainConfig c;
    c.hidden_dim = 16;
    c.epochs = epochs;
    c.batch_size = 38; // 150 oracle rows -> 4 batches
    c.n1 = 2;
    c.n2 = 2;
    c.record_wall_clock = false;
    c.seed = 5;
    return c;
}

bool same_log(const TrainLog& a, const TrainLog& b) {
    if (a.steps.size() != b.steps.size()) return false;
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
        const StepRecord &x = a.steps[i], &y = b.steps[i];
        if (x.iteration != y.iteration || x.kind != y.kind || x.sub_step != y.sub_step || x.loss != y.loss ||
            x.grad_norm != y.grad_norm || x.terms.size() != y.terms.size())
            return false;
        for (std::size_t t = 0; t < x.terms.size(); ++t)
            if (x.terms[t].name != y.terms[t].name || x.terms[t].value != y.terms[t].value) return false;
    }
    return true;
}

bool same_params(const ModelParams& a, const ModelParams& b) {
    return a.g_sv == b.g_sv && a.g_vs == b.g_vs && a.d_v == b.d_v && a.d_s == b.d_s && a.cls_seen == b.cls_seen;
}

} // namespace

TEST_SUITE("trainer_contract") {

TEST_CASE("one epoch of 4 batches with n1 = n2 = 2 logs 24 steps in schedule order") {
    const DatasetBundle b = oracle();
    const TrainResult r = train(b, desk());
    REQUIRE(r.log.steps.size() == 24);
    CHECK(r.log.iterations == 4);
    const StepKind expected[] = {StepKind::d_v, StepKind::d_v, StepKind::d_s,
                                 StepKind::d_s, StepKind::g_sv, StepKind::g_vs};
    const int sub[] = {0, 1, 0, 1, 0, 0};
    for (std::size_t i = 0; i < r.log.steps.size(); ++i) {
        CHECK(r.log.steps[i].kind == expected[i % 6]);
        CHECK(r.log.steps[i].sub_step == sub[i % 6]);
        CHECK(r.log.steps[i].iteration == static_cast<long>(i / 6));
    }
}

TEST_CASE("single-GAN baseline runs only D_V and G_SV steps") {
    TrainConfig c = desk();
    c.variant = Variant::baseline_single_gan;
    const TrainResult r = train(oracle(), c);
    REQUIRE(r.log.steps.size() == 4 * 3);
    for (std::size_t i = 0; i < r.log.steps.size(); ++i)
        CHECK(r.log.steps[i].kind == (i % 3 == 2 ? StepKind::g_sv : StepKind::d_v));
    CHECK(r.log.steps[2].term("adv_recon") == 0.0);
    CHECK(r.log.effective_weights.lambda2 == c.weights.lambda2);
    CHECK(r.log.effective_weights.lambda3 == 0.0);
}

TEST_CASE("variant masks") {
    TrainConfig c;
    c.variant = Variant::no_sc;
    CHECK(effective_weights(c).lambda5 == 0.0);
    CHECK(effective_weights(c).lambda3 == 0.01);
    c.variant = Variant::no_vc;
    CHECK(effective_weights(c).lambda3 == 0.0);
    CHECK(effective_weights(c).lambda6 == 0.0);
    CHECK(effective_weights(c).lambda5 == 0.1);
    c.variant = Variant::dual_only;
    CHECK(effective_weights(c).lambda3 + effective_weights(c).lambda5 + effective_weights(c).lambda6 == 0.0);
    c.variant = Variant::baseline_single_gan;
    c.baseline_classification = false;
    CHECK(effective_weights(c).lambda2 == 0.0);
    CHECK(parse_variant("no_SC") == Variant::no_sc);
    CHECK(all_variants().size() == 5);
    CHECK_THROWS_AS(parse_variant("dual"), ValidationError);
}

TEST_CASE("no_SC logs an exactly zero L_SC contribution") {
    TrainConfig c = desk();
    c.variant = Variant::no_sc;
    const TrainResult r = train(oracle(), c);
    int seen = 0;
    for (const auto& s : r.log.steps)
        if (s.kind == StepKind::g_vs) {
            CHECK(s.term("sc_weighted") == 0.0);
            CHECK(s.term("sc") > 0.0);
            ++seen;
        }
    CHECK(seen == 4);
}

TEST_CASE("the seen-class classifier is bit-identical after training") {
    const DatasetBundle b = oracle();
    const TrainConfig c = desk(2);
    const ClassifierFit fit = pretrain_classifier(b, c);
    const TrainResult r = train(b, c, fit);
    CHECK(r.params.cls_seen == fit.classifier);
}

TEST_CASE("critic steps touch only their critic, generator steps only their generator") {
    const DatasetBundle b = oracle();
    const TrainConfig c = desk();
    const ClassifierFit fit = pretrain_classifier(b, c);
    ModelParams prev = initial_params(b, c, fit.classifier);
    int checked = 0;
    train(b, c, fit, [&](const StepRecord& s, const ModelParams& now) {
        CHECK(now.cls_seen == prev.cls_seen);
        CHECK((now.d_v == prev.d_v) == (s.kind != StepKind::d_v));
        CHECK((now.d_s == prev.d_s) == (s.kind != StepKind::d_s));
        CHECK((now.g_sv == prev.g_sv) == (s.kind != StepKind::g_sv));
        CHECK((now.g_vs == prev.g_vs) == (s.kind != StepKind::g_vs));
        prev = now;
        ++checked;
    });
    CHECK(checked == 24);
}

TEST_CASE("identical config and seed give identical logs and parameters") {
    const DatasetBundle b = oracle();
    const TrainResult r1 = train(b, desk(2));
    const TrainResult r2 = train(b, desk(2));
    CHECK(same_log(r1.log, r2.log));
    CHECK(same_params(r1.params, r2.params));
    TrainConfig other = desk(2);
    other.seed = 6;
    CHECK_FALSE(same_params(r1.params, train(b, other).params));
}

TEST_CASE("200 iterations with default weights stay finite") {
    TrainConfig c;
    c.hidden_dim = 32;
    c.batch_size = 50; // 3 batches per epoch
    c.epochs = 67;
    c.record_wall_clock = false;
    const TrainResult r = train(oracle(), c);
    CHECK(r.log.iterations >= 200);
    CHECK(r.params.all_finite());
    bool finite = true;
    for (const auto& s : r.log.steps) {
        finite = finite && std::isfinite(s.loss) && std::isfinite(s.grad_norm);
        for (const auto& t : s.terms) finite = finite && std::isfinite(t.value);
    }
    CHECK(finite);
}

TEST_CASE("held-out L_SC falls below its value at initialization") {
    const DatasetBundle b = oracle();
    TrainConfig c;
    c.hidden_dim = 64;
    c.epochs = 100;
    c.record_wall_clock = false;
    c.seed = 1;
    const ClassifierFit fit = pretrain_classifier(b, c);
    const ModelParams start = initial_params(b, c, fit.classifier);
    const TrainResult r = train(b, c, fit);

    // Held-out rows: the seen-class test split.
    FeatureBatch held;
    held.visual = b.visual_test_seen;
    held.labels = b.labels_test_seen;
    held.attributes = gather_rows(b.attributes, held.labels);
    Rng rng(2024);
    held.noise = rng.gaussian_matrix(held.visual.rows(), b.attribute_dim());
    const Matrix cycle = rng.gaussian_matrix(held.visual.rows(), b.attribute_dim());

    const double before = evaluate_losses(start, held, cycle, c).sc;
    const double after = evaluate_losses(r.params, held, cycle, c).sc;
    MESSAGE("held-out L_SC: ", before, " -> ", after);
    CHECK(after < before);
}

TEST_CASE("non-finite values abort with a diagnostic naming term and iteration") {
    TrainConfig c = desk();
    // One critic step at this rate pushes weights to ~1e300; the next forward overflows.
    c.optimizer.learning_rate = 1e300;
    try {
        train(oracle(), c);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("iteration 0") != std::string::npos);
        CHECK(msg.find("d_v") != std::string::npos);
    }
}

TEST_CASE("classifier pretraining") {
    const DatasetBundle b = oracle();
    const TrainConfig c = desk();
    const ClassifierFit a = pretrain_classifier(b, c);
    CHECK(a.train_accuracy >= 0.99);
    CHECK(pretrain_classifier(b, c).classifier == a.classifier);

    SyntheticSpec one;
    one.n_seen_classes = 1;
    CHECK(pretrain_classifier(make_synthetic_dataset(one), c).train_accuracy == 1.0);

    DatasetBundle missing = b;
    std::vector<int> keep;
    for (int i = 0; i < missing.n_train(); ++i)
        if (missing.labels_train[static_cast<std::size_t>(i)] != 1) keep.push_back(i);
    missing.visual_train = gather_rows(b.visual_train, keep);
    Labels y;
    for (int i : keep) y.push_back(b.labels_train[static_cast<std::size_t>(i)]);
    missing.labels_train = y;
    CHECK_THROWS_AS(pretrain_classifier(missing, c), ValidationError);
}

TEST_CASE("config validation") {
    TrainConfig c;
    c.n1 = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = TrainConfig{};
    c.optimizer.learning_rate = 0.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = TrainConfig{};
    c.epochs = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = TrainConfig{};
    CHECK(c.optimizer.learning_rate == 1e-4);
    CHECK(c.optimizer.beta1 == 0.5);
    CHECK(c.optimizer.beta2 == 0.9);
    CHECK(c.n1 == 5);
    CHECK(c.n2 == 5);
    CHECK(c.hidden_dim == 4096);
}

} // TEST_SUITE trainer_contract
