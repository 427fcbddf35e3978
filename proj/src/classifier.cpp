#include "dascn/classifier.hpp"

#include "dascn/random.hpp"

#include <cmath>
#include <set>

namespace dascn {

void ClassifierFitOptions::validate() const {
    if (!(learning_rate > 0.0)) throw ValidationError("classifier.learning_rate must be > 0");
    if (max_steps < 1) throw ValidationError("classifier.max_steps must be >= 1");
    if (!(grad_tol >= 0.0) || !(weight_decay >= 0.0) || !(init_scale >= 0.0))
        throw ValidationError("classifier tolerances must be >= 0");
}

ClassifierFit fit_softmax_classifier(const Matrix& features, const Labels& labels,
                                     const std::vector<int>& classes,
                                     const ClassifierFitOptions& options) {
    options.validate();
    const auto n = features.rows();
    require(n == static_cast<Eigen::Index>(labels.size()), "classifier fit: row/label count mismatch");
    if (n == 0) throw ValidationError("classifier fit: no training rows");
    if (classes.empty()) throw ValidationError("classifier fit: empty class list");

    ClassifierFit fit;
    fit.classifier = SoftmaxClassifier::zeros(static_cast<int>(features.cols()), classes);
    SoftmaxClassifier& cls = fit.classifier;
    if (options.init_scale > 0.0) {
        Rng rng(options.seed);
        cls.weight = rng.gaussian_matrix(cls.weight.rows(), cls.weight.cols(), options.init_scale);
    }

    std::vector<int> target(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const int j = cls.index_of(labels[static_cast<std::size_t>(i)]);
        if (j < 0)
            throw ValidationError("classifier fit: label " +
                                  std::to_string(labels[static_cast<std::size_t>(i)]) +
                                  " is not in the class list");
        target[static_cast<std::size_t>(i)] = j;
    }

    Adam adam({options.learning_rate, 0.9, 0.999, 1e-8});
    Matrix grad_w, grad_b;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int step = 0; step < options.max_steps; ++step) {
        Matrix probs = classifier_forward(cls, features);
        double loss = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const int j = target[static_cast<std::size_t>(i)];
            loss -= std::log(std::max(probs(i, j), 1e-300));
            probs(i, j) -= 1.0;
        }
        fit.final_loss = loss * inv_n;
        grad_w = inv_n * (features.transpose() * probs);
        grad_b = inv_n * probs.colwise().sum();
        if (options.weight_decay > 0.0) grad_w += options.weight_decay * cls.weight;
        const std::array<const Matrix*, 2> grads{&grad_w, &grad_b};
        if (global_norm(grads) < options.grad_tol) break;
        adam.step(cls.tensors(), grads);
        fit.steps = step + 1;
    }
    fit.train_accuracy = accuracy(predict(cls, features), labels);
    return fit;
}

Labels argmax_classes(const Matrix& scores, const std::vector<int>& classes) {
    require(scores.cols() == static_cast<Eigen::Index>(classes.size()) && !classes.empty(),
            "argmax_classes: one score column per class");
    Labels out(static_cast<std::size_t>(scores.rows()));
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < scores.cols(); ++j) {
            const double s = scores(i, j);
            const double b = scores(i, best);
            if (s > b || (s == b && classes[static_cast<std::size_t>(j)] <
                                        classes[static_cast<std::size_t>(best)]))
                best = j;
        }
        out[static_cast<std::size_t>(i)] = classes[static_cast<std::size_t>(best)];
    }
    return out;
}

Labels predict(const SoftmaxClassifier& cls, const Matrix& visual) {
    return argmax_classes(classifier_forward(cls, visual), cls.classes);
}

double accuracy(const Labels& predicted, const Labels& truth) {
    require(predicted.size() == truth.size(), "accuracy: length mismatch");
    if (truth.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

} // namespace dascn
