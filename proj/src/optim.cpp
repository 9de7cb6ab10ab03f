// SPDX-License-Identifier: Apache-2.0
#include "optim.hpp"

#include <cmath>

#include "error.hpp"

namespace rsb {

namespace {

double l2_norm(const double* v, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += v[i] * v[i];
  return std::sqrt(acc);
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

void zero_grads(const std::vector<Param*>& slots) {
  for (Param* p : slots) {
    std::fill(p->grad.begin(), p->grad.end(), 0.0);
  }
}

double lamb_trust_ratio(double weight_norm, double update_norm,
                        const std::optional<double>& clip) {
  double trust = 1.0;
  if (weight_norm > 0.0 && update_norm > 0.0) trust = weight_norm / update_norm;
  if (clip && trust > *clip) trust = *clip;
  return trust;
}

void Optimizer::check_grads_finite() const {
  for (const Param* p : slots_) {
    for (double g : p->grad) {
      if (!std::isfinite(g)) {
        throw NumericError("optimizer: non-finite gradient in '" + p->name +
                           "', step aborted");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// LAMB

LambOptimizer::LambOptimizer(std::vector<Param*> slots, LambConfig cfg)
    : Optimizer(std::move(slots)), cfg_(cfg) {
  for (const Param* p : slots_) {
    m_.emplace_back(p->size(), 0.0);
    v_.emplace_back(p->size(), 0.0);
  }
}

void LambOptimizer::step(double lr) {
  check_grads_finite();
  ++step_count_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, step_count_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, step_count_);
  std::vector<double> update;
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    Param& p = *slots_[s];
    const std::size_t n = p.size();
    update.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double g = p.grad[i];
      m_[s][i] = cfg_.beta1 * m_[s][i] + (1.0 - cfg_.beta1) * g;
      v_[s][i] = cfg_.beta2 * v_[s][i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m_[s][i] / bc1;
      const double vhat = v_[s][i] / bc2;
      update[i] = mhat / (std::sqrt(vhat) + cfg_.eps) +
                  cfg_.weight_decay * p.value[i];
    }
    const double trust = lamb_trust_ratio(l2_norm(p.value.data(), n),
                                          l2_norm(update.data(), n),
                                          cfg_.trust_clip);
    for (std::size_t i = 0; i < n; ++i) p.value[i] -= lr * trust * update[i];
  }
}

// ---------------------------------------------------------------------------
// SGD with Nesterov momentum

SgdNesterovOptimizer::SgdNesterovOptimizer(std::vector<Param*> slots,
                                           SgdConfig cfg)
    : Optimizer(std::move(slots)), cfg_(cfg) {
  for (const Param* p : slots_) buf_.emplace_back(p->size(), 0.0);
}

void SgdNesterovOptimizer::step(double lr) {
  check_grads_finite();
  ++step_count_;
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    Param& p = *slots_[s];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i] + cfg_.weight_decay * p.value[i];
      buf_[s][i] = cfg_.momentum * buf_[s][i] + g;
      p.value[i] -= lr * (g + cfg_.momentum * buf_[s][i]);
    }
  }
}

// ---------------------------------------------------------------------------
// RMSProp (TF semantics)

RmspropTfOptimizer::RmspropTfOptimizer(std::vector<Param*> slots,
                                       RmspropTfConfig cfg)
    : Optimizer(std::move(slots)), cfg_(cfg) {
  for (const Param* p : slots_) {
    v_.emplace_back(p->size(), 1.0);  // one-initialization, not zero
    buf_.emplace_back(p->size(), 0.0);
  }
}

void RmspropTfOptimizer::step(double lr) {
  check_grads_finite();
  ++step_count_;
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    Param& p = *slots_[s];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i] + cfg_.weight_decay * p.value[i];
      v_[s][i] = cfg_.rho * v_[s][i] + (1.0 - cfg_.rho) * g * g;
      const double denom = std::sqrt(v_[s][i] + cfg_.eps);
      buf_[s][i] = cfg_.momentum * buf_[s][i] + lr * g / denom;
      p.value[i] -= buf_[s][i];
    }
  }
}

// ---------------------------------------------------------------------------
// AdamP

AdamPOptimizer::AdamPOptimizer(std::vector<Param*> slots, AdamPConfig cfg)
    : Optimizer(std::move(slots)), cfg_(cfg) {
  for (const Param* p : slots_) {
    m_.emplace_back(p->size(), 0.0);
    v_.emplace_back(p->size(), 0.0);
  }
}

void AdamPOptimizer::step(double lr) {
  check_grads_finite();
  ++step_count_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, step_count_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, step_count_);
  std::vector<double> update;
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    Param& p = *slots_[s];
    const std::size_t n = p.size();
    update.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double g = p.grad[i];
      m_[s][i] = cfg_.beta1 * m_[s][i] + (1.0 - cfg_.beta1) * g;
      v_[s][i] = cfg_.beta2 * v_[s][i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m_[s][i] / bc1;
      const double vhat = v_[s][i] / bc2;
      update[i] = mhat / (std::sqrt(vhat) + cfg_.eps);
    }

    const std::size_t units = p.unit_count();
    const std::size_t usize = p.unit_size();
    const double threshold = cfg_.delta / std::sqrt(static_cast<double>(usize));
    for (std::size_t u = 0; u < units; ++u) {
      double* w = p.value.data() + u * usize;
      const double* g = p.grad.data() + u * usize;
      double* upd = update.data() + u * usize;
      const double wnorm = l2_norm(w, usize);
      const double gnorm = l2_norm(g, usize);
      bool projected = false;
      if (wnorm > 0.0 && gnorm > 0.0) {
        const double cosine = std::abs(dot(w, g, usize)) / (wnorm * gnorm);
        if (cosine < threshold) {
          // Scale-invariant direction: remove the radial component.
          const double coeff = dot(w, upd, usize) / (wnorm * wnorm);
          for (std::size_t i = 0; i < usize; ++i) upd[i] -= coeff * w[i];
          projected = true;
        }
      }
      const double wd_eff =
          projected ? cfg_.weight_decay * cfg_.wd_ratio : cfg_.weight_decay;
      for (std::size_t i = 0; i < usize; ++i) {
        w[i] -= lr * upd[i] + lr * wd_eff * w[i];
      }
    }
  }
}

// ---------------------------------------------------------------------------
// AGC

void agc_clip(const std::vector<Param*>& slots, const AgcConfig& cfg) {
  if (cfg.clip_factor <= 0.0) throw ConfigError("agc: clip factor must be > 0");
  for (Param* p : slots) {
    const std::size_t units = p->unit_count();
    const std::size_t usize = p->unit_size();
    for (std::size_t u = 0; u < units; ++u) {
      const double* w = p->value.data() + u * usize;
      double* g = p->grad.data() + u * usize;
      const double wnorm = std::max(l2_norm(w, usize), cfg.eps);
      const double gnorm = l2_norm(g, usize);
      if (gnorm > 0.0 && gnorm / wnorm > cfg.clip_factor) {
        const double scale = cfg.clip_factor * wnorm / gnorm;
        for (std::size_t i = 0; i < usize; ++i) g[i] *= scale;
      }
    }
  }
}

std::unique_ptr<Optimizer> make_lamb(std::vector<Param*> slots,
                                     LambConfig cfg) {
  return std::make_unique<LambOptimizer>(std::move(slots), cfg);
}
std::unique_ptr<Optimizer> make_sgd_nesterov(std::vector<Param*> slots,
                                             SgdConfig cfg) {
  return std::make_unique<SgdNesterovOptimizer>(std::move(slots), cfg);
}
std::unique_ptr<Optimizer> make_rmsprop_tf(std::vector<Param*> slots,
                                           RmspropTfConfig cfg) {
  return std::make_unique<RmspropTfOptimizer>(std::move(slots), cfg);
}
std::unique_ptr<Optimizer> make_adamp(std::vector<Param*> slots,
                                      AdamPConfig cfg) {
  return std::make_unique<AdamPOptimizer>(std::move(slots), cfg);
}

}  // namespace rsb
