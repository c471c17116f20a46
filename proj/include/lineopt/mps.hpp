#pragma once

// Matrix-product-state Born machine over fixed-length bitstrings.
//
// Site k holds two real matrices A_k[0], A_k[1] of shape (D_k x D_{k+1}) with
// D_0 = D_n = 1. The amplitude of x is A_0[x_0] A_1[x_1] ... A_{n-1}[x_{n-1}]
// and P(x) = amplitude^2 / <psi|psi>.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lineopt/encoding.hpp"
#include "lineopt/rng.hpp"

namespace lineopt {

struct WeightedDataset {
  std::vector<BitString> items;
  std::vector<double> weights;

  /// Throws std::invalid_argument unless non-empty, same length `n_sites`,
  /// positive weights summing to 1 (within 1e-9).
  void validate(std::size_t n_sites) const;
};

struct TrainParams {
  std::size_t sweeps = 10;
  double learning_rate = 0.05;
  std::size_t max_bond = 6;
  double svd_cutoff = 1e-10;
  double init_scale = 0.1;
};

inline constexpr double kProbabilityFloor = 1e-300;

class MpsModel {
 public:
  /// Random tensors with entries uniform in [-scale, scale], right-canonical
  /// and normalized; bond k has dimension min(max_bond, 2^k, 2^(n-k)).
  static MpsModel random(std::size_t n_sites, std::size_t max_bond, Rng& rng, double scale = 0.1);
  /// Bond dimension 1 state concentrated on `bits`.
  static MpsModel product_state(const BitString& bits);

  std::size_t n_sites() const { return tensors_.size(); }
  std::size_t max_bond() const { return max_bond_; }
  /// Dimension of the bond to the left of `site` (0..n).
  std::size_t bond_dim(std::size_t bond) const;
  std::size_t largest_bond() const;
  std::optional<std::size_t> canonical_center() const { return center_; }

  const Eigen::MatrixXd& matrix(std::size_t site, int value) const { return tensors_.at(site)[static_cast<std::size_t>(value)]; }
  /// Replaces a site tensor; clears the canonical center.
  void set_site(std::size_t site, Eigen::MatrixXd zero, Eigen::MatrixXd one);

  double amplitude(const BitString& bits) const;
  double norm_squared() const;
  /// Born probability, amplitude^2 / norm_squared.
  double probability(const BitString& bits) const;

  /// QR sweeps so that sites left of `center` are left-isometric and sites
  /// right of it right-isometric. Bond dimensions never grow.
  void canonicalize(std::size_t center);
  /// Canonicalizes (at the current center, or 0) and scales to norm 1.
  void normalize();
  /// max |sum_s A^T A - I| (left) or |sum_s A A^T - I| (right) at `site`.
  double isometry_residual(std::size_t site, bool left) const;

  /// Exact ancestral sampling; the model is brought to center 0 internally.
  std::vector<BitString> sample(std::size_t count, Rng& rng) const;

  /// Text form: shapes plus row-major values as hexadecimal floats, exact.
  void write(std::ostream& out) const;
  static MpsModel read(std::istream& in);
  std::string dump() const;
  static MpsModel parse(const std::string& text);

  friend bool operator==(const MpsModel& a, const MpsModel& b);

 private:
  friend class MpsTrainer;

  std::vector<std::array<Eigen::MatrixXd, 2>> tensors_;
  std::size_t max_bond_ = 1;
  std::optional<std::size_t> center_;
};

MpsModel init_mps(std::size_t n_sites, const TrainParams& params, Rng& rng);

struct LossValue {
  double loss = 0.0;
  /// Items whose probability fell below kProbabilityFloor and were clamped.
  std::size_t floored = 0;
};

/// -sum_i w_i log P(x_i), each P clamped at kProbabilityFloor.
LossValue loss(const MpsModel& mps, const WeightedDataset& dataset);

struct TrainResult {
  MpsModel model;
  /// Loss of the retained model after each sweep; non-increasing.
  std::vector<double> loss_history;
  std::size_t rejected_sweeps = 0;
  std::size_t floored_items = 0;
  double final_learning_rate = 0.0;
};

/// Two-site gradient sweeps on the weighted negative log-likelihood. A sweep
/// that raises the loss is rolled back and the learning rate halved.
TrainResult train(MpsModel mps, const WeightedDataset& dataset, const TrainParams& params);

/// Merged tensor of sites (site, site+1): block[2*s1 + s2] is (D_site x D_site+2).
struct TwoSiteBlock {
  std::size_t site = 0;
  std::array<Eigen::MatrixXd, 4> block;
};

/// Merged window of a model whose canonical center is `site` or `site + 1`.
TwoSiteBlock merge_sites(const MpsModel& mps, std::size_t site);

/// Analytic gradient of the NLL with respect to the merged window `block`,
/// with the rest of `mps` as environment and Z = |block|^2 (so `mps` must be
/// canonical around the window).
TwoSiteBlock nll_gradient(const MpsModel& mps, const WeightedDataset& dataset, const TwoSiteBlock& block);

}  // namespace lineopt
