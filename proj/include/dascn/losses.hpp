#pragma once

#include "dascn/core.hpp"
#include "dascn/data.hpp"
#include "dascn/networks.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace dascn {

// lambda1/lambda4: gradient-penalty weights of the visual/semantic critics.
// lambda2: classification loss. lambda3/lambda6: visual consistency in the
// G_SV/G_VS objectives. lambda5: semantic centroid regularizer.
struct LossWeights {
    double lambda1 = 10.0;
    double lambda2 = 0.01;
    double lambda3 = 0.01;
    double lambda4 = 10.0;
    double lambda5 = 0.1;
    double lambda6 = 0.01;

    void validate() const;
    bool operator==(const LossWeights&) const = default;
};

// Which (visual, attribute) pair the G_SV objective's second adversarial term
// scores. `real_visual` pairs the batch's real x with the reconstructed a'.
enum class DualAdversarialPairing { real_visual, cycle_visual };

struct GeneratorLossOptions {
    DualAdversarialPairing pairing = DualAdversarialPairing::real_visual;
    // false drops the D_V(x, a') term and any use of G_VS (single-GAN baseline).
    bool dual_term = true;
};

/// Mean negative log-probability of each row's true class.
double classification_loss(const SoftmaxClassifier& cls, const Matrix& synth_visual,
                           const Labels& labels, Matrix* d_visual = nullptr);

/// Column means.
RowVector class_centroid(const Matrix& features_of_class);

/// Mean over batch-present classes of ||centroid(recon rows of c) - a_c||.
double semantic_centroid_loss(const Matrix& recon_attrs, const Labels& labels,
                              const Matrix& attributes, const std::vector<int>& seen_classes,
                              Matrix* d_recon = nullptr);

/// Mean over batch-present classes of ||centroid(cycle rows of c) - centroid(real rows of c)||.
double visual_consistency_loss(const Matrix& cycle_visual, const Labels& labels,
                               const std::map<int, Matrix>& real_visual_by_class,
                               Matrix* d_cycle = nullptr);

// A scalar-valued critic over row inputs with a known input gradient.
class DifferentiableCritic {
public:
    virtual ~DifferentiableCritic() = default;
    virtual Vector scores(const Matrix& input) const = 0;
    virtual Matrix input_gradient(const Matrix& input) const = 0;
};

// D_V with its conditioning attributes bound: a critic over visual rows only.
class ConditionedVisualCritic final : public DifferentiableCritic {
public:
    ConditionedVisualCritic(const Mlp& critic, Matrix attributes)
        : critic_(&critic), attributes_(std::move(attributes)) {}
    Vector scores(const Matrix& visual) const override;
    Matrix input_gradient(const Matrix& visual) const override;

private:
    const Mlp* critic_;
    Matrix attributes_;
};

// An unconditional MLP critic (D_S).
class MlpCritic final : public DifferentiableCritic {
public:
    explicit MlpCritic(const Mlp& critic) : critic_(&critic) {}
    Vector scores(const Matrix& input) const override;
    Matrix input_gradient(const Matrix& input) const override;

private:
    const Mlp* critic_;
};

/// Per-row interpolation weights alpha ~ U(0,1), deterministic in `mix_seed`.
Vector interpolation_weights(Eigen::Index rows, std::uint64_t mix_seed);

/// alpha_i * real_i + (1 - alpha_i) * fake_i.
Matrix interpolate(const Matrix& real, const Matrix& fake, const Vector& alpha);

/// mean_i (||grad critic(x_hat_i)|| - 1)^2 on random interpolants.
double gradient_penalty(const DifferentiableCritic& critic, const Matrix& real, const Matrix& fake,
                        std::uint64_t mix_seed);

struct CriticLoss {
    double total = 0.0;
    double fake_mean = 0.0;
    double real_mean = 0.0;
    double penalty = 0.0; // unweighted
};

/// E[D_V(x',a)] - E[D_V(x,a)] + lambda1 * GP, with the penalty taken w.r.t.
/// the interpolated visual input at the real a.
CriticLoss disc_v_loss(const ModelParams& params, const FeatureBatch& batch,
                       const Matrix& synth_visual, const LossWeights& weights,
                       std::uint64_t mix_seed, Mlp* grad = nullptr);

/// E[D_S(a')] - E[D_S(a)] + lambda4 * GP.
CriticLoss disc_s_loss(const ModelParams& params, const FeatureBatch& batch,
                       const Matrix& recon_attrs, const LossWeights& weights,
                       std::uint64_t mix_seed, Mlp* grad = nullptr);

struct GeneratorGrads {
    Mlp g_sv;
    Mlp g_vs;
};

GeneratorGrads zero_generator_grads(const ModelParams& params);

// Forward products of one generator pass: x' = G_SV(a,z), a' = G_VS(x'),
// x'' = G_SV(a', z').
struct GeneratorPass {
    Matrix synth_visual;
    Matrix recon_attrs;
    Matrix cycle_visual;
};

GeneratorPass generator_pass(const ModelParams& params, const FeatureBatch& batch,
                             const Matrix& cycle_noise);

struct GenSvLoss {
    double total = 0.0;
    double adv_synth = 0.0; // -E[D_V(x', a)]
    double adv_recon = 0.0; // -E[D_V(x, a')]
    double cls = 0.0;       // unweighted
    double vc = 0.0;        // unweighted
};

GenSvLoss gen_sv_loss(const ModelParams& params, const FeatureBatch& batch,
                      const Matrix& cycle_noise, const LossWeights& weights,
                      const GeneratorLossOptions& options = {}, GeneratorGrads* grad = nullptr);

struct GenVsLoss {
    double total = 0.0;
    double adv = 0.0; // -E[D_S(a')]
    double sc = 0.0;  // unweighted
    double vc = 0.0;  // unweighted
};

GenVsLoss gen_vs_loss(const ModelParams& params, const FeatureBatch& batch,
                      const Matrix& cycle_noise, const LossWeights& weights,
                      GeneratorGrads* grad = nullptr);

} // namespace dascn
