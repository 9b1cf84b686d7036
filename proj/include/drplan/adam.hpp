#pragma once

// Bias-corrected Adam over a flat parameter vector.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace drplan {

struct AdamConfig {
    double lr = 1.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    Adam(std::size_t n, AdamConfig cfg) : cfg_(cfg), m_(n, 0.0), u_(n, 0.0) {}

    void step(std::span<double> params, std::span<const double> grads) {
        if (params.size() != m_.size() || grads.size() != m_.size())
            throw std::invalid_argument("Adam::step: size mismatch");
        ++t_;
        const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < m_.size(); ++i) {
            m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grads[i];
            u_[i] = cfg_.beta2 * u_[i] + (1.0 - cfg_.beta2) * grads[i] * grads[i];
            const double mhat = m_[i] / c1;
            const double uhat = u_[i] / c2;
            params[i] -= cfg_.lr * mhat / (std::sqrt(uhat) + cfg_.eps);
        }
    }

    /// True while no gradient signal has been absorbed: with all moments
    /// exactly zero and zero incoming gradients, parameters never move.
    bool cold() const {
        for (std::size_t i = 0; i < m_.size(); ++i)
            if (m_[i] != 0.0 || u_[i] != 0.0) return false;
        return true;
    }

private:
    AdamConfig cfg_;
    std::vector<double> m_, u_;
    long t_ = 0;
};

}  // namespace drplan
