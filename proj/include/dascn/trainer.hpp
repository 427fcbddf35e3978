#pragma once

#include "dascn/classifier.hpp"
#include "dascn/data.hpp"
#include "dascn/losses.hpp"
#include "dascn/networks.hpp"
#include "dascn/optim.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace dascn {

// Ablation switch. no_sc keeps the dual GAN and visual consistency; no_vc
// keeps the dual GAN and the semantic centroid term.
enum class Variant { full, no_sc, no_vc, dual_only, baseline_single_gan };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);
const std::vector<Variant>& all_variants();

struct TrainConfig {
    LossWeights weights;
    int batch_size = 64;
    int n1 = 5; // D_V steps per iteration
    int n2 = 5; // D_S steps per iteration
    int epochs = 50;
    AdamSettings optimizer;
    int hidden_dim = 4096;
    double leaky_slope = 0.2;
    OutputActivation gvs_output = OutputActivation::relu;
    DualAdversarialPairing dual_pairing = DualAdversarialPairing::real_visual;
    // Keep lambda2 active in the single-GAN baseline.
    bool baseline_classification = true;
    Variant variant = Variant::full;
    std::uint64_t seed = 0;
    ClassifierFitOptions pretrain;
    bool record_wall_clock = true;

    void validate() const;
};

/// Loss weights after the variant mask is applied.
LossWeights effective_weights(const TrainConfig& config);

bool variant_uses_dual(Variant v);

enum class StepKind { d_v, d_s, g_sv, g_vs };
std::string to_string(StepKind k);

struct NamedValue {
    std::string name;
    double value;
};

// One optimizer step.
struct StepRecord {
    long iteration = 0;
    int epoch = 0;
    StepKind kind = StepKind::d_v;
    int sub_step = 0; // critic step index within the iteration
    double loss = 0.0;
    std::vector<NamedValue> terms;
    double grad_norm = 0.0;
    double elapsed_ms = 0.0;

    double term(const std::string& name) const;
};

struct TrainLog {
    std::vector<StepRecord> steps;
    double classifier_train_accuracy = 0.0;
    long iterations = 0;
    LossWeights effective_weights;
};

/// Fits the frozen seen-class classifier on the real training features.
ClassifierFit pretrain_classifier(const DatasetBundle& bundle, const TrainConfig& config);

using StepObserver = std::function<void(const StepRecord&, const ModelParams&)>;

struct TrainResult {
    ModelParams params;
    TrainLog log;
};

/// Alternating optimization: per mini-batch, n1 critic steps on D_V, n2 on
/// D_S, then one step on G_SV and one on G_VS. Pretrains the classifier first.
TrainResult train(const DatasetBundle& bundle, const TrainConfig& config,
                  const StepObserver& observer = {});

/// As above with an already-fitted seen-class classifier.
TrainResult train(const DatasetBundle& bundle, const TrainConfig& config,
                  const ClassifierFit& classifier, const StepObserver& observer = {});

/// Initial parameters train() starts from, classifier included.
ModelParams initial_params(const DatasetBundle& bundle, const TrainConfig& config,
                           const SoftmaxClassifier& classifier);

// Unweighted loss terms on one batch, for monitoring.
struct LossSnapshot {
    double d_v = 0.0;
    double d_s = 0.0;
    double cls = 0.0;
    double sc = 0.0;
    double vc = 0.0;
};

LossSnapshot evaluate_losses(const ModelParams& params, const FeatureBatch& batch,
                             const Matrix& cycle_noise, const TrainConfig& config);

} // namespace dascn
