#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "graffin/autodiff.hpp"
#include "graffin/error.hpp"

namespace graffin {

struct AdamConfig {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 5e-4;
};

// Adam with bias correction and decoupled weight decay. Decay is applied as
// theta <- theta - lr * wd * theta before the moment update, and only to
// parameters registered with decay=true (weight matrices, not biases).
// Gradients are zeroed after each step.
class AdamOptimizer {
public:
    explicit AdamOptimizer(AdamConfig cfg = {}) : cfg_(cfg) {}

    void add_param(Tensor p, std::string name, bool decay) {
        Slot s;
        s.p = std::move(p);
        s.name = std::move(name);
        s.decay = decay;
        s.m = Mat::Zero(s.p.rows(), s.p.cols());
        s.v = Mat::Zero(s.p.rows(), s.p.cols());
        slots_.push_back(std::move(s));
    }

    long step_count() const { return step_; }
    const AdamConfig& config() const { return cfg_; }

    void step() {
        ++step_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
        for (Slot& s : slots_) {
            const Mat g = s.p.grad_or_zero();
            if (!g.allFinite())
                throw Error("adam: non-finite gradient in parameter '" + s.name + "'");
            if (s.decay && cfg_.weight_decay != 0.0)
                s.p.value() -= (cfg_.lr * cfg_.weight_decay) * s.p.value();
            s.m = cfg_.beta1 * s.m + (1.0 - cfg_.beta1) * g;
            s.v.array() = cfg_.beta2 * s.v.array() + (1.0 - cfg_.beta2) * g.array().square();
            s.p.value().array() -=
                cfg_.lr * (s.m.array() / bc1) / ((s.v.array() / bc2).sqrt() + cfg_.eps);
            s.p.zero_grad();
        }
    }

private:
    struct Slot {
        Tensor p;
        std::string name;
        bool decay = false;
        Mat m, v;
    };
    AdamConfig cfg_;
    std::vector<Slot> slots_;
    long step_ = 0;
};

}  // namespace graffin
