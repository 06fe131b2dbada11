#ifndef UNGSL_UNCERTAINTY_HPP
#define UNGSL_UNCERTAINTY_HPP

#include <cmath>
#include <fstream>

#include "ungsl/dense.hpp"

namespace ungsl {

/// Per-node uncertainty in nats plus the confidence transform e^(-u),
/// frozen once estimated and never updated during re-training.
struct UncertaintyVector {
  std::vector<double> u;  // entropy, >= 0
  std::vector<double> c;  // e^(-u) in (0, 1]
  enum class Source { kEntropy, kContrastive } source = Source::kEntropy;

  std::size_t size() const { return u.size(); }

  static UncertaintyVector from_entropy(std::vector<double> entropy,
                                        Source src = Source::kEntropy) {
    UncertaintyVector v;
    v.u = std::move(entropy);
    v.c.resize(v.u.size());
    for (std::size_t i = 0; i < v.u.size(); ++i) {
      require(v.u[i] >= 0.0 && std::isfinite(v.u[i]),
              "UncertaintyVector: entropy must be finite and >= 0");
      v.c[i] = std::exp(-v.u[i]);
    }
    v.source = src;
    return v;
  }

  void save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) fail("cannot write " + path);
    out.precision(17);
    out << "node_id,entropy,confidence\n";
    for (std::size_t i = 0; i < u.size(); ++i)
      out << i << ',' << u[i] << ',' << c[i] << '\n';
  }
};

inline void validate_prob_rows(const DenseMatrix& p, double tol) {
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < p.cols(); ++k) {
      require(p(i, k) >= 0.0, "ProbMatrix: negative probability");
      s += p(i, k);
    }
    if (std::fabs(s - 1.0) > tol)
      fail("ProbMatrix: row " + std::to_string(i) + " sums to " + std::to_string(s));
  }
}

/// Shannon entropy per row, natural log, with the 0·ln 0 = 0 convention.
inline UncertaintyVector entropy(const DenseMatrix& p) {
  validate_prob_rows(p, 1e-6);
  std::vector<double> u(p.rows());
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double h = 0.0;
    for (std::size_t k = 0; k < p.cols(); ++k)
      if (p(i, k) > 0.0) h -= p(i, k) * std::log(p(i, k));
    u[i] = std::max(0.0, h);
  }
  return UncertaintyVector::from_entropy(std::move(u));
}

/// Linearized class probabilities p_i = (O_i + 1)/Σ_k(O_ik + 1). Requires
/// every logit strictly inside the unit ball.
inline DenseMatrix linearized_probs(const DenseMatrix& logits) {
  DenseMatrix p(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    double z = 0.0;
    for (std::size_t k = 0; k < logits.cols(); ++k) {
      require(std::fabs(logits(i, k)) < 1.0,
              "linearized_probs: |logit| >= 1 at row " + std::to_string(i));
      z += logits(i, k) + 1.0;
    }
    for (std::size_t k = 0; k < logits.cols(); ++k)
      p(i, k) = (logits(i, k) + 1.0) / z;
  }
  return p;
}

/// Softmax probabilities of a trained classifier's logits, reduced to a
/// frozen uncertainty vector.
inline UncertaintyVector uncertainty_from_logits(const DenseMatrix& logits) {
  return entropy(softmax_rows(logits));
}

/// Contrastive-loss uncertainty proxy for the unsupervised mode:
/// u_i = (l(z_i, z~_i) + l(z~_i, z_i)) / 2 with cosine similarity and
/// temperature t; the denominator of each direction runs over all nodes
/// of the opposite view.
inline UncertaintyVector contrastive_uncertainty(const DenseMatrix& z,
                                                 const DenseMatrix& z_aug,
                                                 double t) {
  require(t > 0.0, "contrastive_uncertainty: temperature must be > 0");
  require(z.same_shape(z_aug), "contrastive_uncertainty: shape mismatch");
  const std::size_t n = z.rows();
  auto row_norm = [](const DenseMatrix& m, std::size_t i) {
    double s = 0.0;
    for (std::size_t k = 0; k < m.cols(); ++k) s += m(i, k) * m(i, k);
    return std::sqrt(s);
  };
  std::vector<double> nz(n), nza(n);
  for (std::size_t i = 0; i < n; ++i) {
    nz[i] = row_norm(z, i);
    nza[i] = row_norm(z_aug, i);
    require(nz[i] > 0.0 && nza[i] > 0.0,
            "contrastive_uncertainty: zero-norm embedding row " + std::to_string(i));
  }
  DenseMatrix sim(n, n);  // sim(z_i, z~_j)
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < z.cols(); ++k) dot += z(i, k) * z_aug(j, k);
      sim(i, j) = dot / (nz[i] * nza[j]);
    }
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    // l(z_i, z~_i): denominator over augmented nodes; l(z~_i, z_i): over
    // target nodes
    double za = 0.0, zt = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      za += std::exp(sim(i, k) / t);
      zt += std::exp(sim(k, i) / t);
    }
    const double pos = sim(i, i) / t;
    const double l_fwd = -(pos - std::log(za));
    const double l_bwd = -(pos - std::log(zt));
    u[i] = std::max(0.0, 0.5 * (l_fwd + l_bwd));
  }
  return UncertaintyVector::from_entropy(std::move(u),
                                         UncertaintyVector::Source::kContrastive);
}

}  // namespace ungsl

#endif  // UNGSL_UNCERTAINTY_HPP
