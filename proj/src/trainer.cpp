#include "dascn/trainer.hpp"

#include "dascn/random.hpp"

#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

namespace dascn {

std::string to_string(Variant v) {
    switch (v) {
    case Variant::full: return "full";
    case Variant::no_sc: return "no_SC";
    case Variant::no_vc: return "no_VC";
    case Variant::dual_only: return "dual_only";
    case Variant::baseline_single_gan: return "baseline_single_gan";
    }
    return "?";
}

Variant parse_variant(const std::string& name) {
    for (Variant v : all_variants())
        if (to_string(v) == name) return v;
    if (name == "no_sc") return Variant::no_sc;
    if (name == "no_vc") return Variant::no_vc;
    throw ValidationError("unknown variant '" + name +
                          "' (expected full|no_SC|no_VC|dual_only|baseline_single_gan)");
}

const std::vector<Variant>& all_variants() {
    // Table order: baseline first, full model last.
    static const std::vector<Variant> variants{Variant::baseline_single_gan, Variant::dual_only,
                                               Variant::no_vc, Variant::no_sc, Variant::full};
    return variants;
}

std::string to_string(StepKind k) {
    switch (k) {
    case StepKind::d_v: return "d_v";
    case StepKind::d_s: return "d_s";
    case StepKind::g_sv: return "g_sv";
    case StepKind::g_vs: return "g_vs";
    }
    return "?";
}

double StepRecord::term(const std::string& name) const {
    for (const auto& t : terms)
        if (t.name == name) return t.value;
    throw std::out_of_range("step record has no term '" + name + "'");
}

void TrainConfig::validate() const {
    weights.validate();
    optimizer.validate();
    pretrain.validate();
    if (n1 < 1 || n2 < 1) throw ValidationError("n1 and n2 must be >= 1");
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
    if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
    if (hidden_dim < 1) throw ValidationError("hidden_dim must be >= 1");
    if (!(leaky_slope >= 0.0 && leaky_slope < 1.0))
        throw ValidationError("leaky_slope must lie in [0, 1)");
}

bool variant_uses_dual(Variant v) { return v != Variant::baseline_single_gan; }

LossWeights effective_weights(const TrainConfig& config) {
    LossWeights w = config.weights;
    switch (config.variant) {
    case Variant::full: break;
    case Variant::no_sc: w.lambda5 = 0.0; break;
    case Variant::no_vc: w.lambda3 = w.lambda6 = 0.0; break;
    case Variant::dual_only: w.lambda3 = w.lambda5 = w.lambda6 = 0.0; break;
    case Variant::baseline_single_gan:
        w.lambda3 = w.lambda4 = w.lambda5 = w.lambda6 = 0.0;
        if (!config.baseline_classification) w.lambda2 = 0.0;
        break;
    }
    return w;
}

ClassifierFit pretrain_classifier(const DatasetBundle& bundle, const TrainConfig& config) {
    const std::set<int> present(bundle.labels_train.begin(), bundle.labels_train.end());
    for (int c : bundle.seen_classes)
        if (!present.contains(c))
            throw ValidationError("seen class " + std::to_string(c) + " has no training rows");
    ClassifierFitOptions options = config.pretrain;
    options.seed = derive_seed(config.seed, "classifier");
    return fit_softmax_classifier(bundle.visual_train, bundle.labels_train, bundle.seen_classes,
                                  options);
}

ModelParams initial_params(const DatasetBundle& bundle, const TrainConfig& config,
                           const SoftmaxClassifier& classifier) {
    ModelDims dims;
    dims.feature_dim = bundle.feature_dim();
    dims.attribute_dim = bundle.attribute_dim();
    dims.seen_classes = bundle.seen_classes;
    dims.hidden_dim = config.hidden_dim;
    dims.leaky_slope = config.leaky_slope;
    dims.gvs_output = config.gvs_output;
    ModelParams params = init_params(dims, derive_seed(config.seed, "init"));
    require(classifier.classes == bundle.seen_classes && classifier.feature_dim() == dims.feature_dim,
            "seen-class classifier does not match the bundle");
    params.cls_seen = classifier;
    return params;
}

namespace {

class Trainer {
public:
    Trainer(const DatasetBundle& bundle, const TrainConfig& config, const StepObserver& observer,
            ModelParams params)
        : bundle_(bundle), config_(config), observer_(observer), params_(std::move(params)),
          weights_(effective_weights(config)), dual_(variant_uses_dual(config.variant)),
          adam_dv_(config.optimizer), adam_ds_(config.optimizer), adam_gsv_(config.optimizer),
          adam_gvs_(config.optimizer), start_(std::chrono::steady_clock::now()) {
        gen_options_.pairing = config.dual_pairing;
        gen_options_.dual_term = dual_;
        mix_root_ = derive_seed(config.seed, "mix");
        cycle_root_ = derive_seed(config.seed, "cycle_noise");
        shuffle_root_ = derive_seed(config.seed, "shuffle");
    }

    TrainLog run() {
        TrainLog log;
        log.effective_weights = weights_;
        for (int epoch = 0; epoch < config_.epochs; ++epoch) {
            BatchIterator it(bundle_, config_.batch_size,
                             derive_seed(shuffle_root_, static_cast<std::uint64_t>(epoch)));
            while (auto batch = it.next()) iterate(*batch, epoch, log);
        }
        log.iterations = iteration_;
        return log;
    }

    ModelParams take_params() { return std::move(params_); }

private:
    void iterate(const FeatureBatch& batch, int epoch, TrainLog& log) {
        const long it = iteration_++;
        Rng cycle_rng(derive_seed(cycle_root_, static_cast<std::uint64_t>(it)));
        const Matrix cycle_noise = cycle_rng.gaussian_matrix(batch.noise.rows(), batch.noise.cols());

        // Generators are frozen during critic steps, so x' is fixed for all n1 steps.
        const Matrix synth = gen_sv_forward(params_, batch.attributes, batch.noise);
        for (int s = 0; s < config_.n1; ++s) {
            Mlp grad = params_.d_v.zeros_like();
            const CriticLoss l = disc_v_loss(params_, batch, synth, weights_, next_mix_seed(), &grad);
            adam_dv_.step(params_.d_v.tensors(), grad.tensors());
            record(log, it, epoch, StepKind::d_v, s, l.total, grad,
                   {{"wasserstein", l.fake_mean - l.real_mean},
                    {"fake_mean", l.fake_mean},
                    {"real_mean", l.real_mean},
                    {"gp", l.penalty},
                    {"gp_weighted", weights_.lambda1 * l.penalty}});
            check_net(params_.d_v, "d_v", it);
        }

        if (dual_) {
            const Matrix recon = gen_vs_forward(params_, synth);
            for (int s = 0; s < config_.n2; ++s) {
                Mlp grad = params_.d_s.zeros_like();
                const CriticLoss l =
                    disc_s_loss(params_, batch, recon, weights_, next_mix_seed(), &grad);
                adam_ds_.step(params_.d_s.tensors(), grad.tensors());
                record(log, it, epoch, StepKind::d_s, s, l.total, grad,
                       {{"wasserstein", l.fake_mean - l.real_mean},
                        {"fake_mean", l.fake_mean},
                        {"real_mean", l.real_mean},
                        {"gp", l.penalty},
                        {"gp_weighted", weights_.lambda4 * l.penalty}});
                check_net(params_.d_s, "d_s", it);
            }
        }

        {
            GeneratorGrads grads = zero_generator_grads(params_);
            const GenSvLoss l =
                gen_sv_loss(params_, batch, cycle_noise, weights_, gen_options_, &grads);
            adam_gsv_.step(params_.g_sv.tensors(), grads.g_sv.tensors());
            record(log, it, epoch, StepKind::g_sv, 0, l.total, grads.g_sv,
                   {{"adv_synth", l.adv_synth},
                    {"adv_recon", l.adv_recon},
                    {"cls", l.cls},
                    {"cls_weighted", weights_.lambda2 * l.cls},
                    {"vc", l.vc},
                    {"vc_weighted", weights_.lambda3 * l.vc}});
            check_net(params_.g_sv, "g_sv", it);
        }

        if (dual_) {
            GeneratorGrads grads = zero_generator_grads(params_);
            const GenVsLoss l = gen_vs_loss(params_, batch, cycle_noise, weights_, &grads);
            adam_gvs_.step(params_.g_vs.tensors(), grads.g_vs.tensors());
            record(log, it, epoch, StepKind::g_vs, 0, l.total, grads.g_vs,
                   {{"adv", l.adv},
                    {"sc", l.sc},
                    {"sc_weighted", weights_.lambda5 * l.sc},
                    {"vc", l.vc},
                    {"vc_weighted", weights_.lambda6 * l.vc}});
            check_net(params_.g_vs, "g_vs", it);
        }
    }

    std::uint64_t next_mix_seed() { return derive_seed(mix_root_, mix_counter_++); }

    void record(TrainLog& log, long it, int epoch, StepKind kind, int sub_step, double loss,
                const Mlp& grad, std::vector<NamedValue> terms) {
        StepRecord r;
        r.iteration = it;
        r.epoch = epoch;
        r.kind = kind;
        r.sub_step = sub_step;
        r.loss = loss;
        r.terms = std::move(terms);
        r.grad_norm = global_norm(grad.tensors());
        if (config_.record_wall_clock)
            r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                                     start_)
                               .count();

        const auto fail = [&](const std::string& what) {
            std::ostringstream msg;
            msg << "non-finite " << what << " at iteration " << it << " (" << to_string(kind)
                << " step " << sub_step << ")";
            throw DivergenceError(msg.str());
        };
        if (!std::isfinite(r.loss)) fail("loss");
        for (const auto& t : r.terms)
            if (!std::isfinite(t.value)) fail(to_string(kind) + "." + t.name);
        if (!std::isfinite(r.grad_norm)) fail(to_string(kind) + " gradient");

        if (observer_) observer_(r, params_);
        log.steps.push_back(std::move(r));
    }

    static void check_net(const Mlp& net, const char* name, long it) {
        if (!net.all_finite())
            throw DivergenceError(std::string("non-finite ") + name + " parameters at iteration " +
                                  std::to_string(it));
    }

    const DatasetBundle& bundle_;
    const TrainConfig& config_;
    const StepObserver& observer_;
    ModelParams params_;
    LossWeights weights_;
    bool dual_;
    GeneratorLossOptions gen_options_;
    Adam adam_dv_, adam_ds_, adam_gsv_, adam_gvs_;
    std::chrono::steady_clock::time_point start_;
    std::uint64_t mix_root_ = 0, cycle_root_ = 0, shuffle_root_ = 0;
    std::uint64_t mix_counter_ = 0;
    long iteration_ = 0;
};

} // namespace

TrainResult train(const DatasetBundle& bundle, const TrainConfig& config,
                  const ClassifierFit& classifier, const StepObserver& observer) {
    config.validate();
    bundle.validate();
    Trainer trainer(bundle, config, observer, initial_params(bundle, config, classifier.classifier));
    TrainResult result;
    result.log = trainer.run();
    result.log.classifier_train_accuracy = classifier.train_accuracy;
    result.params = trainer.take_params();
    return result;
}

TrainResult train(const DatasetBundle& bundle, const TrainConfig& config,
                  const StepObserver& observer) {
    config.validate();
    return train(bundle, config, pretrain_classifier(bundle, config), observer);
}

LossSnapshot evaluate_losses(const ModelParams& params, const FeatureBatch& batch,
                             const Matrix& cycle_noise, const TrainConfig& config) {
    const LossWeights w = config.weights;
    LossSnapshot s;
    const GeneratorPass pass = generator_pass(params, batch, cycle_noise);
    s.d_v = disc_v_loss(params, batch, pass.synth_visual, w, 0).total;
    s.d_s = disc_s_loss(params, batch, pass.recon_attrs, w, 0).total;
    s.cls = classification_loss(params.cls_seen, pass.synth_visual, batch.labels);
    const GenVsLoss vs = gen_vs_loss(params, batch, cycle_noise, w);
    s.sc = vs.sc;
    s.vc = vs.vc;
    return s;
}

} // namespace dascn
