#pragma once

#include "dascn/core.hpp"
#include "dascn/networks.hpp"
#include "dascn/optim.hpp"

#include <cstdint>
#include <vector>

namespace dascn {

// Full-batch fitting of a linear softmax classifier: adaptive-moment steps on
// the mean cross-entropy until the gradient norm drops below `grad_tol` or
// `max_steps` is reached.
struct ClassifierFitOptions {
    double learning_rate = 1e-2;
    int max_steps = 1000;
    double grad_tol = 1e-5;
    double weight_decay = 0.0;
    // Std of the Gaussian weight init; 0 starts from all-zero parameters.
    double init_scale = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const ClassifierFitOptions&) const = default;
};

struct ClassifierFit {
    SoftmaxClassifier classifier;
    double train_accuracy = 0.0;
    double final_loss = 0.0;
    int steps = 0;
};

/// `classes` fixes the output column order; every label must be listed.
ClassifierFit fit_softmax_classifier(const Matrix& features, const Labels& labels,
                                     const std::vector<int>& classes,
                                     const ClassifierFitOptions& options);

/// Argmax over score columns mapped to class ids; exact ties go to the lowest id.
Labels argmax_classes(const Matrix& scores, const std::vector<int>& classes);

/// Highest-probability class per row over the classifier's full label set.
Labels predict(const SoftmaxClassifier& cls, const Matrix& visual);

/// Fraction of rows where prediction == truth.
double accuracy(const Labels& predicted, const Labels& truth);

} // namespace dascn
