#include "dascn/optim.hpp"

#include <cmath>

namespace dascn {

void AdamSettings::validate() const {
    if (!(learning_rate > 0.0)) throw ValidationError("optimizer.learning_rate must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw ValidationError("optimizer betas must lie in [0, 1)");
    if (!(epsilon > 0.0)) throw ValidationError("optimizer.epsilon must be > 0");
}

void Adam::step(std::span<Matrix* const> params, std::span<const Matrix* const> grads) {
    require(params.size() == grads.size(), "Adam: parameter/gradient count mismatch");
    if (m_.empty()) {
        for (const Matrix* p : params) {
            m_.push_back(Matrix::Zero(p->rows(), p->cols()));
            v_.push_back(Matrix::Zero(p->rows(), p->cols()));
        }
    }
    require(m_.size() == params.size(), "Adam: parameter list changed between steps");
    ++t_;
    const double b1 = settings_.beta1;
    const double b2 = settings_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Matrix& g = *grads[i];
        require(g.rows() == params[i]->rows() && g.cols() == params[i]->cols(),
                "Adam: gradient shape mismatch");
        m_[i] = b1 * m_[i] + (1.0 - b1) * g;
        v_[i] = b2 * v_[i] + (1.0 - b2) * g.cwiseProduct(g);
        params[i]->array() -= settings_.learning_rate * (m_[i].array() / c1) /
                              ((v_[i].array() / c2).sqrt() + settings_.epsilon);
    }
}

double global_norm(std::span<const Matrix* const> tensors) {
    double s = 0.0;
    for (const Matrix* t : tensors) s += t->squaredNorm();
    return std::sqrt(s);
}

} // namespace dascn
