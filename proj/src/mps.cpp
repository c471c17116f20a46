#include "lineopt/mps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace lineopt {

using Eigen::MatrixXd;

void WeightedDataset::validate(std::size_t n_sites) const {
  if (items.empty()) throw std::invalid_argument("dataset is empty");
  if (items.size() != weights.size()) throw std::invalid_argument("dataset items and weights differ in size");
  double total = 0.0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].size() != n_sites) throw std::invalid_argument("dataset bitstring length does not match the model");
    if (!(weights[i] > 0.0)) throw std::invalid_argument("dataset weights must be positive");
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("dataset weights must sum to 1");
}

// ---------------------------------------------------------------------------
// Model basics
// ---------------------------------------------------------------------------

MpsModel MpsModel::random(std::size_t n_sites, std::size_t max_bond, Rng& rng, double scale) {
  if (n_sites == 0) throw std::invalid_argument("MPS needs at least one site");
  if (max_bond == 0) throw std::invalid_argument("max bond dimension must be >= 1");
  auto bond = [&](std::size_t k) -> Eigen::Index {
    if (k == 0 || k == n_sites) return 1;
    const std::size_t edge = std::min(k, n_sites - k);
    std::size_t d = 1;
    for (std::size_t i = 0; i < edge && d < max_bond; ++i) d *= 2;
    return static_cast<Eigen::Index>(std::min(d, max_bond));
  };
  std::uniform_real_distribution<double> dist(-scale, scale);
  MpsModel m;
  m.max_bond_ = max_bond;
  m.tensors_.resize(n_sites);
  for (std::size_t k = 0; k < n_sites; ++k) {
    for (auto& a : m.tensors_[k]) {
      a.resize(bond(k), bond(k + 1));
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = dist(rng);
      }
    }
  }
  m.canonicalize(0);
  m.normalize();
  return m;
}

MpsModel MpsModel::product_state(const BitString& bits) {
  if (bits.empty()) throw std::invalid_argument("MPS needs at least one site");
  MpsModel m;
  m.tensors_.resize(bits.size());
  for (std::size_t k = 0; k < bits.size(); ++k) {
    m.tensors_[k][0] = MatrixXd::Constant(1, 1, bits[k] ? 0.0 : 1.0);
    m.tensors_[k][1] = MatrixXd::Constant(1, 1, bits[k] ? 1.0 : 0.0);
  }
  m.center_ = 0;
  return m;
}

std::size_t MpsModel::bond_dim(std::size_t bond) const {
  if (bond == n_sites()) return static_cast<std::size_t>(tensors_.back()[0].cols());
  return static_cast<std::size_t>(tensors_.at(bond)[0].rows());
}

std::size_t MpsModel::largest_bond() const {
  std::size_t d = 1;
  for (std::size_t b = 0; b <= n_sites(); ++b) d = std::max(d, bond_dim(b));
  return d;
}

void MpsModel::set_site(std::size_t site, MatrixXd zero, MatrixXd one) {
  if (zero.rows() != one.rows() || zero.cols() != one.cols()) {
    throw std::invalid_argument("site matrices must share a shape");
  }
  tensors_.at(site) = {std::move(zero), std::move(one)};
  center_.reset();
}

double MpsModel::amplitude(const BitString& bits) const {
  if (bits.size() != n_sites()) throw std::invalid_argument("bitstring length does not match the model");
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
  for (std::size_t k = 0; k < n_sites(); ++k) v = v * tensors_[k][bits[k] ? 1 : 0];
  return v(0);
}

double MpsModel::norm_squared() const {
  MatrixXd env = MatrixXd::Ones(1, 1);
  for (const auto& site : tensors_) {
    env = site[0].transpose() * env * site[0] + site[1].transpose() * env * site[1];
  }
  return env(0, 0);
}

double MpsModel::probability(const BitString& bits) const {
  const double a = amplitude(bits);
  return a * a / norm_squared();
}

namespace {

// Left-orthonormalizes `site` and pushes the remainder into `next`.
void left_orthonormalize(std::array<MatrixXd, 2>& site, std::array<MatrixXd, 2>& next) {
  const Eigen::Index dl = site[0].rows();
  const Eigen::Index dr = site[0].cols();
  MatrixXd m(2 * dl, dr);
  m.topRows(dl) = site[0];
  m.bottomRows(dl) = site[1];
  Eigen::HouseholderQR<MatrixXd> qr(m);
  const Eigen::Index r = std::min(2 * dl, dr);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(2 * dl, r);
  MatrixXd rmat = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  site[0] = q.topRows(dl);
  site[1] = q.bottomRows(dl);
  next[0] = rmat * next[0];
  next[1] = rmat * next[1];
}

// Right-orthonormalizes `site` and pushes the remainder into `prev`.
void right_orthonormalize(std::array<MatrixXd, 2>& site, std::array<MatrixXd, 2>& prev) {
  const Eigen::Index dl = site[0].rows();
  const Eigen::Index dr = site[0].cols();
  MatrixXd mt(2 * dr, dl);
  mt.topRows(dr) = site[0].transpose();
  mt.bottomRows(dr) = site[1].transpose();
  Eigen::HouseholderQR<MatrixXd> qr(mt);
  const Eigen::Index r = std::min(2 * dr, dl);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(2 * dr, r);
  MatrixXd rmat = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  site[0] = q.topRows(dr).transpose();
  site[1] = q.bottomRows(dr).transpose();
  prev[0] = prev[0] * rmat.transpose();
  prev[1] = prev[1] * rmat.transpose();
}

}  // namespace

void MpsModel::canonicalize(std::size_t center) {
  if (center >= n_sites()) throw std::out_of_range("canonical center out of range");
  for (std::size_t k = 0; k < center; ++k) left_orthonormalize(tensors_[k], tensors_[k + 1]);
  for (std::size_t k = n_sites() - 1; k > center; --k) right_orthonormalize(tensors_[k], tensors_[k - 1]);
  center_ = center;
}

void MpsModel::normalize() {
  const std::size_t c = center_.value_or(0);
  canonicalize(c);
  const double z = tensors_[c][0].squaredNorm() + tensors_[c][1].squaredNorm();
  if (!(z > 0.0) || !std::isfinite(z)) throw std::runtime_error("cannot normalize an MPS with zero or non-finite norm");
  const double s = 1.0 / std::sqrt(z);
  tensors_[c][0] *= s;
  tensors_[c][1] *= s;
}

double MpsModel::isometry_residual(std::size_t site, bool left) const {
  const auto& t = tensors_.at(site);
  MatrixXd g = left ? MatrixXd(t[0].transpose() * t[0] + t[1].transpose() * t[1])
                    : MatrixXd(t[0] * t[0].transpose() + t[1] * t[1].transpose());
  g -= MatrixXd::Identity(g.rows(), g.cols());
  return g.cwiseAbs().maxCoeff();
}

std::vector<BitString> MpsModel::sample(std::size_t count, Rng& rng) const {
  MpsModel m = *this;
  if (m.center_ != std::optional<std::size_t>{0}) m.canonicalize(0);
  std::vector<BitString> out;
  out.reserve(count);
  Eigen::RowVectorXd v;
  Eigen::RowVectorXd u[2];
  for (std::size_t c = 0; c < count; ++c) {
    BitString bits(m.n_sites());
    v = Eigen::RowVectorXd::Ones(1);
    for (std::size_t k = 0; k < m.n_sites(); ++k) {
      u[0].noalias() = v * m.tensors_[k][0];
      u[1].noalias() = v * m.tensors_[k][1];
      const double p0 = u[0].squaredNorm();
      const double p1 = u[1].squaredNorm();
      const int s = uniform01(rng) * (p0 + p1) < p0 ? 0 : 1;
      bits[k] = static_cast<std::uint8_t>(s);
      const double ps = s == 0 ? p0 : p1;
      v = u[s] / std::sqrt(ps);
    }
    out.push_back(std::move(bits));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

void MpsModel::write(std::ostream& out) const {
  out << "lineopt-mps 1\n";
  out << "sites " << n_sites() << " max_bond " << max_bond_ << " center ";
  if (center_) {
    out << *center_;
  } else {
    out << "none";
  }
  out << "\n";
  char buf[64];
  for (std::size_t k = 0; k < n_sites(); ++k) {
    const auto& t = tensors_[k];
    out << "site " << k << " " << t[0].rows() << " " << t[0].cols() << "\n";
    for (const auto& a : t) {
      bool first = true;
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
          std::snprintf(buf, sizeof buf, "%a", a(i, j));
          out << (first ? "" : " ") << buf;
          first = false;
        }
      }
      out << "\n";
    }
  }
}

MpsModel MpsModel::read(std::istream& in) {
  auto fail = [](const std::string& what) -> MpsModel { throw std::runtime_error("malformed MPS file: " + what); };
  std::string magic, version, word;
  if (!(in >> magic >> version) || magic != "lineopt-mps" || version != "1") return fail("bad header");
  std::size_t n = 0, max_bond = 0;
  std::string center;
  if (!(in >> word >> n) || word != "sites") return fail("expected 'sites'");
  if (!(in >> word >> max_bond) || word != "max_bond") return fail("expected 'max_bond'");
  if (!(in >> word >> center) || word != "center") return fail("expected 'center'");
  if (n == 0) return fail("zero sites");
  MpsModel m;
  m.max_bond_ = max_bond;
  m.tensors_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t idx = 0;
    Eigen::Index rows = 0, cols = 0;
    if (!(in >> word >> idx >> rows >> cols) || word != "site" || idx != k || rows <= 0 || cols <= 0) {
      return fail("bad site header for site " + std::to_string(k));
    }
    for (auto& a : m.tensors_[k]) {
      a.resize(rows, cols);
      for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
          std::string tok;
          if (!(in >> tok)) return fail("truncated values at site " + std::to_string(k));
          char* end = nullptr;
          a(i, j) = std::strtod(tok.c_str(), &end);
          if (end != tok.c_str() + tok.size()) return fail("bad value '" + tok + "'");
        }
      }
    }
    if (k > 0 && m.tensors_[k - 1][0].cols() != rows) return fail("bond mismatch at site " + std::to_string(k));
  }
  if (m.tensors_.front()[0].rows() != 1 || m.tensors_.back()[0].cols() != 1) return fail("boundary bonds must be 1");
  if (center != "none") {
    try {
      m.center_ = std::stoul(center);
    } catch (const std::exception&) {
      return fail("bad center");
    }
  }
  return m;
}

std::string MpsModel::dump() const {
  std::ostringstream out;
  write(out);
  return out.str();
}

MpsModel MpsModel::parse(const std::string& text) {
  std::istringstream in(text);
  return read(in);
}

bool operator==(const MpsModel& a, const MpsModel& b) {
  if (a.max_bond_ != b.max_bond_ || a.center_ != b.center_ || a.n_sites() != b.n_sites()) return false;
  for (std::size_t k = 0; k < a.n_sites(); ++k) {
    for (int s = 0; s < 2; ++s) {
      const auto& x = a.tensors_[k][static_cast<std::size_t>(s)];
      const auto& y = b.tensors_[k][static_cast<std::size_t>(s)];
      if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
      if (!std::equal(x.data(), x.data() + x.size(), y.data())) return false;
    }
  }
  return true;
}

MpsModel init_mps(std::size_t n_sites, const TrainParams& params, Rng& rng) {
  return MpsModel::random(n_sites, params.max_bond, rng, params.init_scale);
}

LossValue loss(const MpsModel& mps, const WeightedDataset& dataset) {
  LossValue out;
  const double z = mps.norm_squared();
  for (std::size_t i = 0; i < dataset.items.size(); ++i) {
    const double a = mps.amplitude(dataset.items[i]);
    double p = a * a / z;
    if (!(p >= kProbabilityFloor)) {
      p = kProbabilityFloor;
      ++out.floored;
    }
    out.loss -= dataset.weights[i] * std::log(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

struct WindowStats {
  double loss = 0.0;
  std::size_t floored = 0;
};

// Gradient of -sum w log(psi^2 / Z) with Z = |B|^2, where
// psi_i = L_i B[x_site, x_site+1] R_i. Environments are packed per item with
// the given strides.
WindowStats window_gradient(const std::array<MatrixXd, 4>& block, const WeightedDataset& data, std::size_t site,
                            const double* left, std::size_t left_stride, const double* right,
                            std::size_t right_stride, std::array<MatrixXd, 4>& grad) {
  const Eigen::Index dl = block[0].rows();
  const Eigen::Index dr = block[0].cols();
  double z = 0.0;
  for (const auto& b : block) z += b.squaredNorm();
  for (auto& g : grad) g.setZero(dl, dr);

  WindowStats stats;
  double active_weight = 0.0;
  std::vector<double> u(static_cast<std::size_t>(dr));
  for (std::size_t i = 0; i < data.items.size(); ++i) {
    const auto& x = data.items[i];
    const int s = 2 * x[site] + x[site + 1];
    const double* l = left + i * left_stride;
    const double* r = right + i * right_stride;
    const double* b = block[static_cast<std::size_t>(s)].data();
    double psi = 0.0;
    for (Eigen::Index col = 0; col < dr; ++col) {
      double acc = 0.0;
      const double* bc = b + col * dl;
      for (Eigen::Index row = 0; row < dl; ++row) acc += l[row] * bc[row];
      u[static_cast<std::size_t>(col)] = acc;
      psi += acc * r[col];
    }
    const double w = data.weights[i];
    const double p = psi * psi / z;
    if (!(p >= kProbabilityFloor)) {
      ++stats.floored;
      stats.loss -= w * std::log(kProbabilityFloor);
      continue;
    }
    stats.loss -= w * std::log(p);
    active_weight += w;
    const double coef = -2.0 * w / psi;
    double* g = grad[static_cast<std::size_t>(s)].data();
    for (Eigen::Index col = 0; col < dr; ++col) {
      const double cr = coef * r[col];
      double* gc = g + col * dl;
      for (Eigen::Index row = 0; row < dl; ++row) gc[row] += cr * l[row];
    }
  }
  for (std::size_t s = 0; s < 4; ++s) grad[s] += (2.0 * active_weight / z) * block[s];
  return stats;
}

}  // namespace

class MpsTrainer {
 public:
  MpsTrainer(MpsModel& mps, const WeightedDataset& data, const TrainParams& params)
      : mps_(mps), data_(data), params_(params), n_(mps.n_sites()), items_(data.items.size()) {
    stride_ = std::max(params.max_bond, mps.largest_bond());
    left_.assign(n_ + 1, std::vector<double>(items_ * stride_, 0.0));
    right_.assign(n_ + 1, std::vector<double>(items_ * stride_, 0.0));
  }

  // One left-to-right and right-to-left pass with learning rate `lr`. The
  // model must be canonical at site 0 on entry and is again on exit.
  void sweep(double lr) {
    if (n_ == 1) {
      single_site_step(lr);
      return;
    }
    for (std::size_t i = 0; i < items_; ++i) {
      left_[0][i * stride_] = 1.0;
      right_[n_][i * stride_] = 1.0;
    }
    for (std::size_t b = n_ - 1; b >= 2; --b) update_right(b);
    for (std::size_t k = 0; k + 2 < n_; ++k) {
      step(k, lr, /*move_right=*/true);
      update_left(k + 1);
    }
    for (std::size_t k = n_ - 1; k-- > 0;) {
      step(k, lr, /*move_right=*/false);
      if (k > 0) update_right(k + 1);
    }
    mps_.center_ = 0;
  }

 private:
  // left_[b] <- left_[b-1] * A_{b-1}[x]
  void update_left(std::size_t b) {
    const auto& t = mps_.tensors_[b - 1];
    const Eigen::Index dl = t[0].rows();
    const Eigen::Index dr = t[0].cols();
    for (std::size_t i = 0; i < items_; ++i) {
      const double* l = left_[b - 1].data() + i * stride_;
      double* out = left_[b].data() + i * stride_;
      const double* a = t[data_.items[i][b - 1]].data();
      for (Eigen::Index col = 0; col < dr; ++col) {
        double acc = 0.0;
        for (Eigen::Index row = 0; row < dl; ++row) acc += l[row] * a[col * dl + row];
        out[col] = acc;
      }
    }
  }

  // right_[b] <- A_b[x] * right_[b+1]
  void update_right(std::size_t b) {
    const auto& t = mps_.tensors_[b];
    const Eigen::Index dl = t[0].rows();
    const Eigen::Index dr = t[0].cols();
    for (std::size_t i = 0; i < items_; ++i) {
      const double* r = right_[b + 1].data() + i * stride_;
      double* out = right_[b].data() + i * stride_;
      const double* a = t[data_.items[i][b]].data();
      for (Eigen::Index row = 0; row < dl; ++row) out[row] = 0.0;
      for (Eigen::Index col = 0; col < dr; ++col) {
        const double rc = r[col];
        for (Eigen::Index row = 0; row < dl; ++row) out[row] += a[col * dl + row] * rc;
      }
    }
  }

  void step(std::size_t k, double lr, bool move_right) {
    auto& a = mps_.tensors_[k];
    auto& b = mps_.tensors_[k + 1];
    std::array<MatrixXd, 4> block;
    for (int s1 = 0; s1 < 2; ++s1) {
      for (int s2 = 0; s2 < 2; ++s2) block[static_cast<std::size_t>(2 * s1 + s2)] = a[static_cast<std::size_t>(s1)] * b[static_cast<std::size_t>(s2)];
    }
    std::array<MatrixXd, 4> grad;
    window_gradient(block, data_, k, left_[k].data(), stride_, right_[k + 2].data(), stride_, grad);
    double z = 0.0;
    for (std::size_t s = 0; s < 4; ++s) {
      block[s] -= lr * grad[s];
      z += block[s].squaredNorm();
    }
    if (!(z > 0.0) || !std::isfinite(z)) throw std::runtime_error("MPS training produced a non-finite window");

    const Eigen::Index dl = block[0].rows();
    const Eigen::Index dr = block[0].cols();
    MatrixXd m(2 * dl, 2 * dr);
    for (Eigen::Index s1 = 0; s1 < 2; ++s1) {
      for (Eigen::Index s2 = 0; s2 < 2; ++s2) {
        m.block(s1 * dl, s2 * dr, dl, dr) = block[static_cast<std::size_t>(2 * s1 + s2)];
      }
    }
    Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    Eigen::Index keep = 1;
    while (keep < sv.size() && keep < static_cast<Eigen::Index>(params_.max_bond) &&
           sv(keep) > params_.svd_cutoff * sv(0)) {
      ++keep;
    }
    Eigen::VectorXd s = sv.head(keep);
    s /= s.norm();
    MatrixXd u = svd.matrixU().leftCols(keep);
    MatrixXd vt = svd.matrixV().leftCols(keep).transpose();
    if (move_right) {
      vt = s.asDiagonal() * vt;
    } else {
      u = u * s.asDiagonal();
    }
    a[0] = u.topRows(dl);
    a[1] = u.bottomRows(dl);
    b[0] = vt.leftCols(dr);
    b[1] = vt.rightCols(dr);
  }

  void single_site_step(double lr) {
    auto& t = mps_.tensors_[0];
    double w0 = 0.0, w1 = 0.0;
    for (std::size_t i = 0; i < items_; ++i) (data_.items[i][0] ? w1 : w0) += data_.weights[i];
    // With psi = (a0, a1) and Z = a0^2 + a1^2, dL/da_s = 2 W a_s / Z - 2 w_s / a_s.
    const double a0 = t[0](0, 0), a1 = t[1](0, 0);
    const double z = a0 * a0 + a1 * a1;
    auto grad = [&](double a, double w) { return 2.0 * (w0 + w1) * a / z - (w > 0.0 ? 2.0 * w / a : 0.0); };
    double n0 = a0 - lr * grad(a0, w0);
    double n1 = a1 - lr * grad(a1, w1);
    const double norm = std::sqrt(n0 * n0 + n1 * n1);
    if (!(norm > 0.0) || !std::isfinite(norm)) throw std::runtime_error("MPS training produced a non-finite site");
    t[0](0, 0) = n0 / norm;
    t[1](0, 0) = n1 / norm;
    mps_.center_ = 0;
  }

  MpsModel& mps_;
  const WeightedDataset& data_;
  const TrainParams& params_;
  std::size_t n_;
  std::size_t items_;
  std::size_t stride_ = 1;
  std::vector<std::vector<double>> left_;
  std::vector<std::vector<double>> right_;
};

TrainResult train(MpsModel mps, const WeightedDataset& dataset, const TrainParams& params) {
  dataset.validate(mps.n_sites());
  if (params.max_bond == 0) throw std::invalid_argument("max bond dimension must be >= 1");
  if (!(params.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  mps.canonicalize(0);
  mps.normalize();

  TrainResult result{mps, {}, 0, 0, params.learning_rate};
  auto current = loss(result.model, dataset);
  if (!std::isfinite(current.loss)) throw std::runtime_error("initial MPS loss is not finite");
  double lr = params.learning_rate;
  for (std::size_t sweep = 0; sweep < params.sweeps; ++sweep) {
    MpsModel candidate = result.model;
    MpsTrainer(candidate, dataset, params).sweep(lr);
    const auto next = loss(candidate, dataset);
    if (!std::isfinite(next.loss)) {
      throw std::runtime_error("MPS training loss became non-finite at sweep " + std::to_string(sweep));
    }
    if (next.loss <= current.loss) {
      result.model = std::move(candidate);
      current = next;
    } else {
      lr *= 0.5;
      ++result.rejected_sweeps;
    }
    result.loss_history.push_back(current.loss);
  }
  result.floored_items = current.floored;
  result.final_learning_rate = lr;
  return result;
}

TwoSiteBlock merge_sites(const MpsModel& mps, std::size_t site) {
  if (site + 1 >= mps.n_sites()) throw std::out_of_range("two-site window out of range");
  TwoSiteBlock out;
  out.site = site;
  for (int s1 = 0; s1 < 2; ++s1) {
    for (int s2 = 0; s2 < 2; ++s2) {
      out.block[static_cast<std::size_t>(2 * s1 + s2)] = mps.matrix(site, s1) * mps.matrix(site + 1, s2);
    }
  }
  return out;
}

TwoSiteBlock nll_gradient(const MpsModel& mps, const WeightedDataset& dataset, const TwoSiteBlock& block) {
  dataset.validate(mps.n_sites());
  const std::size_t k = block.site;
  const auto dl = static_cast<std::size_t>(block.block[0].rows());
  const auto dr = static_cast<std::size_t>(block.block[0].cols());
  const std::size_t items = dataset.items.size();
  std::vector<double> left(items * dl), right(items * dr);
  for (std::size_t i = 0; i < items; ++i) {
    const auto& x = dataset.items[i];
    Eigen::RowVectorXd l = Eigen::RowVectorXd::Ones(1);
    for (std::size_t j = 0; j < k; ++j) l = l * mps.matrix(j, x[j]);
    Eigen::VectorXd r = Eigen::VectorXd::Ones(1);
    for (std::size_t j = mps.n_sites(); j-- > k + 2;) r = mps.matrix(j, x[j]) * r;
    if (static_cast<std::size_t>(l.size()) != dl || static_cast<std::size_t>(r.size()) != dr) {
      throw std::invalid_argument("window shape does not match the model environment");
    }
    std::copy(l.data(), l.data() + dl, left.data() + i * dl);
    std::copy(r.data(), r.data() + dr, right.data() + i * dr);
  }
  TwoSiteBlock grad;
  grad.site = k;
  window_gradient(block.block, dataset, k, left.data(), dl, right.data(), dr, grad.block);
  return grad;
}

}  // namespace lineopt
