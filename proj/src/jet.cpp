#include "charlap/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>

#include "charlap/errors.hpp"

namespace charlap {

namespace {

void enumerate(int nvars, int degree, int var, std::vector<int>& cur,
               std::vector<std::vector<int>>& out) {
  if (var == nvars - 1) {
    cur[var] = degree;
    out.push_back(cur);
    cur[var] = 0;
    return;
  }
  for (int k = degree; k >= 0; --k) {
    cur[var] = k;
    enumerate(nvars, degree - k, var + 1, cur, out);
  }
  cur[var] = 0;
}

}  // namespace

JetSpace::JetSpace(int nvars, int order) : nvars_(nvars), order_(order) {
  std::vector<int> cur(nvars, 0);
  for (int d = 0; d <= order; ++d) {
    if (nvars == 0) {
      if (d == 0) exponents_.push_back({});
    } else {
      enumerate(nvars, d, 0, cur, exponents_);
    }
    size_upto_.push_back(static_cast<int>(exponents_.size()));
  }
  for (const auto& e : exponents_)
    degrees_.push_back(std::accumulate(e.begin(), e.end(), 0));

  std::map<std::vector<int>, int> index;
  for (int m = 0; m < size(); ++m) index[exponents_[m]] = m;

  products_.resize(size());
  for (int a = 0; a < size(); ++a) {
    for (int b = 0; b < size(); ++b) {
      if (degrees_[a] + degrees_[b] > order) continue;
      std::vector<int> e(nvars);
      for (int v = 0; v < nvars; ++v) e[v] = exponents_[a][v] + exponents_[b][v];
      products_[index.at(e)].push_back({a, b});
    }
  }
  deriv_.resize(nvars);
  for (int v = 0; v < nvars; ++v) {
    for (int m = 0; m < size(); ++m) {
      if (exponents_[m][v] == 0) continue;
      std::vector<int> e = exponents_[m];
      const double factor = e[v];
      e[v] -= 1;
      deriv_[v].push_back({m, index.at(e), factor});
    }
  }
}

std::shared_ptr<const JetSpace> JetSpace::get(int nvars, int order) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetSpace>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{nvars, order}];
  if (!slot) slot = std::make_shared<const JetSpace>(nvars, order);
  return slot;
}

int JetSpace::size_upto(int d) const {
  if (d < 0) return 0;
  return size_upto_[std::min(d, order_)];
}

int JetSpace::index_of(const std::vector<int>& exps) const {
  for (int m = 0; m < size(); ++m)
    if (exponents_[m] == exps) return m;
  return -1;
}

// ---------------------------------------------------------------- Jet

Jet::Jet(JetSpacePtr space, cd constant)
    : space_(std::move(space)), valid_(space_->order()),
      coeffs_(space_->size(), cd(0.0)) {
  coeffs_[0] = constant;
}

Jet Jet::variable(JetSpacePtr space, int var, double at) {
  Jet j(space, cd(at));
  if (space->order() >= 1) j.coeffs_[space->variable_index(var)] = 1.0;
  return j;
}

Jet& Jet::operator+=(const Jet& o) {
  valid_ = std::min(valid_, o.valid_);
  const int n = space_->size_upto(valid_);
  for (int m = 0; m < n; ++m) coeffs_[m] += o.coeffs_[m];
  for (int m = n; m < space_->size(); ++m) coeffs_[m] = 0.0;
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  valid_ = std::min(valid_, o.valid_);
  const int n = space_->size_upto(valid_);
  for (int m = 0; m < n; ++m) coeffs_[m] -= o.coeffs_[m];
  for (int m = n; m < space_->size(); ++m) coeffs_[m] = 0.0;
  return *this;
}

Jet& Jet::operator*=(cd s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  Jet r(a.space_, cd(0.0));
  r.valid_ = std::min(a.valid_, b.valid_);
  const int n = a.space_->size_upto(r.valid_);
  for (int m = 0; m < n; ++m) {
    cd acc = 0.0;
    for (const auto& t : a.space_->products_into(m))
      acc += a.coeffs_[t.left] * b.coeffs_[t.right];
    r.coeffs_[m] = acc;
  }
  return r;
}

Jet Jet::operator-() const {
  Jet r = *this;
  for (auto& c : r.coeffs_) c = -c;
  return r;
}

Jet Jet::conj() const {
  Jet r = *this;
  for (auto& c : r.coeffs_) c = std::conj(c);
  return r;
}

Jet Jet::derivative(int var) const {
  if (valid_ < 1) throw JetOrderExhausted("derivative of an order-0 jet");
  Jet r(space_, cd(0.0));
  r.valid_ = valid_ - 1;
  const int n = space_->size_upto(r.valid_);
  for (const auto& t : space_->derivative(var))
    if (t.target < n) r.coeffs_[t.target] += t.factor * coeffs_[t.source];
  return r;
}

Jet Jet::truncated(int valid) const {
  Jet r = *this;
  r.valid_ = std::min(valid_, valid);
  for (int m = space_->size_upto(r.valid_); m < space_->size(); ++m)
    r.coeffs_[m] = 0.0;
  return r;
}

Jet Jet::compose(const std::vector<cd>& derivs) const {
  Jet h = *this;
  h.coeffs_[0] = 0.0;
  Jet result(space_, derivs[0]);
  result.valid_ = valid_;
  Jet power(space_, cd(1.0));
  double factorial = 1.0;
  for (int k = 1; k <= valid_ && k < static_cast<int>(derivs.size()); ++k) {
    power = power * h;
    factorial *= k;
    Jet term = power * (derivs[k] / factorial);
    result += term;
  }
  return result.truncated(valid_);
}

Jet Jet::inverse() const {
  const cd a = value();
  if (std::abs(a) == 0.0) throw DegenerateMetric("inverse of a jet with zero value");
  std::vector<cd> d(valid_ + 1);
  cd p = 1.0 / a;
  for (int k = 0; k <= valid_; ++k) {
    d[k] = p;
    p *= -static_cast<double>(k + 1) / a;
  }
  return compose(d);
}

Jet Jet::sqrt() const {
  const cd a = value();
  std::vector<cd> d(valid_ + 1);
  // d^k/da^k a^{1/2} = (1/2)(1/2-1)...(1/2-k+1) a^{1/2-k}
  cd coef = 1.0;
  for (int k = 0; k <= valid_; ++k) {
    d[k] = coef * std::pow(a, 0.5 - k);
    coef *= (0.5 - k);
  }
  return compose(d);
}

Jet Jet::exp() const {
  std::vector<cd> d(valid_ + 1, std::exp(value()));
  return compose(d);
}

Jet Jet::sin() const {
  const cd s = std::sin(value()), c = std::cos(value());
  std::vector<cd> d(valid_ + 1);
  const cd cycle[4] = {s, c, -s, -c};
  for (int k = 0; k <= valid_; ++k) d[k] = cycle[k % 4];
  return compose(d);
}

Jet Jet::cos() const {
  const cd s = std::sin(value()), c = std::cos(value());
  std::vector<cd> d(valid_ + 1);
  const cd cycle[4] = {c, -s, -c, s};
  for (int k = 0; k <= valid_; ++k) d[k] = cycle[k % 4];
  return compose(d);
}

Jet Jet::pow(int k) const {
  if (k < 0) return inverse().pow(-k);
  Jet r(space_, cd(1.0));
  r.valid_ = valid_;
  Jet base = *this;
  while (k > 0) {
    if (k & 1) r = r * base;
    k >>= 1;
    if (k) base = base * base;
  }
  return r;
}

double Jet::variation() const {
  double s = 0.0;
  for (int m = 1; m < space_->size_upto(valid_); ++m) s += std::abs(coeffs_[m]);
  return s;
}

// ---------------------------------------------------------------- JetMat

JetMat::JetMat(JetSpacePtr space, int rows, int cols)
    : space_(std::move(space)), rows_(rows), cols_(cols), valid_(space_->order()),
      coeffs_(space_->size(), CMat::Zero(rows, cols)) {}

JetMat::JetMat(JetSpacePtr space, const CMat& constant)
    : JetMat(std::move(space), static_cast<int>(constant.rows()),
             static_cast<int>(constant.cols())) {
  coeffs_[0] = constant;
}

void JetMat::set_valid(int v) {
  valid_ = std::min(valid_, v);
  for (int m = space_->size_upto(valid_); m < space_->size(); ++m)
    coeffs_[m].setZero();
}

Jet JetMat::entry(int r, int c) const {
  Jet j(space_, cd(0.0));
  j.valid_ = valid_;
  for (int m = 0; m < space_->size(); ++m) j.coeffs_[m] = coeffs_[m](r, c);
  return j;
}

void JetMat::set_entry(int r, int c, const Jet& j) {
  for (int m = 0; m < space_->size(); ++m) coeffs_[m](r, c) = j.coeffs_[m];
  set_valid(j.valid());
}

JetMat JetMat::column(int c) const { return block_cols(c, 1); }

JetMat JetMat::block_cols(int start, int count) const {
  JetMat r(space_, rows_, count);
  r.valid_ = valid_;
  for (int m = 0; m < space_->size(); ++m)
    r.coeffs_[m] = coeffs_[m].middleCols(start, count);
  return r;
}

JetMat JetMat::rows_subset(const std::vector<int>& idx) const {
  JetMat r(space_, static_cast<int>(idx.size()), cols_);
  r.valid_ = valid_;
  for (int m = 0; m < space_->size(); ++m)
    for (std::size_t i = 0; i < idx.size(); ++i) r.coeffs_[m].row(i) = coeffs_[m].row(idx[i]);
  return r;
}

JetMat JetMat::cols_subset(const std::vector<int>& idx) const {
  JetMat r(space_, rows_, static_cast<int>(idx.size()));
  r.valid_ = valid_;
  for (int m = 0; m < space_->size(); ++m)
    for (std::size_t i = 0; i < idx.size(); ++i) r.coeffs_[m].col(i) = coeffs_[m].col(idx[i]);
  return r;
}

JetMat JetMat::hcat(const std::vector<JetMat>& parts) {
  int cols = 0;
  int valid = parts.front().valid_;
  for (const auto& p : parts) {
    cols += p.cols_;
    valid = std::min(valid, p.valid_);
  }
  JetMat r(parts.front().space_, parts.front().rows_, cols);
  int at = 0;
  for (const auto& p : parts) {
    for (int m = 0; m < r.space_->size(); ++m) r.coeffs_[m].middleCols(at, p.cols_) = p.coeffs_[m];
    at += p.cols_;
  }
  r.set_valid(valid);
  return r;
}

JetMat& JetMat::operator+=(const JetMat& o) {
  valid_ = std::min(valid_, o.valid_);
  const int n = space_->size_upto(valid_);
  for (int m = 0; m < n; ++m) coeffs_[m] += o.coeffs_[m];
  for (int m = n; m < space_->size(); ++m) coeffs_[m].setZero();
  return *this;
}

JetMat& JetMat::operator-=(const JetMat& o) {
  valid_ = std::min(valid_, o.valid_);
  const int n = space_->size_upto(valid_);
  for (int m = 0; m < n; ++m) coeffs_[m] -= o.coeffs_[m];
  for (int m = n; m < space_->size(); ++m) coeffs_[m].setZero();
  return *this;
}

JetMat& JetMat::operator*=(cd s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

JetMat operator*(const JetMat& a, const JetMat& b) {
  JetMat r(a.space_, a.rows_, b.cols_);
  r.valid_ = std::min(a.valid_, b.valid_);
  const int n = a.space_->size_upto(r.valid_);
  for (int m = 0; m < n; ++m)
    for (const auto& t : a.space_->products_into(m))
      r.coeffs_[m].noalias() += a.coeffs_[t.left] * b.coeffs_[t.right];
  return r;
}

JetMat operator*(const Jet& s, const JetMat& a) {
  JetMat r(a.space_, a.rows_, a.cols_);
  r.valid_ = std::min(a.valid_, s.valid());
  const int n = a.space_->size_upto(r.valid_);
  for (int m = 0; m < n; ++m)
    for (const auto& t : a.space_->products_into(m))
      r.coeffs_[m] += s[t.left] * a.coeffs_[t.right];
  return r;
}

JetMat operator*(const CMat& c, const JetMat& a) {
  JetMat r(a.space_, static_cast<int>(c.rows()), a.cols_);
  r.valid_ = a.valid_;
  for (int m = 0; m < a.space_->size_upto(a.valid_); ++m) r.coeffs_[m].noalias() = c * a.coeffs_[m];
  return r;
}

JetMat operator*(const JetMat& a, const CMat& c) {
  JetMat r(a.space_, a.rows_, static_cast<int>(c.cols()));
  r.valid_ = a.valid_;
  for (int m = 0; m < a.space_->size_upto(a.valid_); ++m) r.coeffs_[m].noalias() = a.coeffs_[m] * c;
  return r;
}

JetMat JetMat::adjoint() const {
  JetMat r(space_, cols_, rows_);
  r.valid_ = valid_;
  for (int m = 0; m < space_->size(); ++m) r.coeffs_[m] = coeffs_[m].adjoint();
  return r;
}

JetMat JetMat::transpose() const {
  JetMat r(space_, cols_, rows_);
  r.valid_ = valid_;
  for (int m = 0; m < space_->size(); ++m) r.coeffs_[m] = coeffs_[m].transpose();
  return r;
}

JetMat JetMat::conj() const {
  JetMat r = *this;
  for (auto& c : r.coeffs_) c = c.conjugate().eval();
  return r;
}

JetMat JetMat::derivative(int var) const {
  if (valid_ < 1) throw JetOrderExhausted("derivative of an order-0 matrix jet");
  JetMat r(space_, rows_, cols_);
  r.valid_ = valid_ - 1;
  const int n = space_->size_upto(r.valid_);
  for (const auto& t : space_->derivative(var))
    if (t.target < n) r.coeffs_[t.target] += t.factor * coeffs_[t.source];
  return r;
}

JetMat JetMat::truncated(int valid) const {
  JetMat r = *this;
  r.set_valid(valid);
  return r;
}

JetMat JetMat::inverse() const {
  if (rows_ != cols_) throw std::invalid_argument("JetMat::inverse of non-square jet");
  Eigen::PartialPivLU<CMat> lu(coeffs_[0]);
  const double det = std::abs(lu.determinant());
  if (!(det > 0.0) || !std::isfinite(det))
    throw DegenerateMetric("inverse of a singular matrix jet");
  JetMat x(space_, rows_, cols_);
  x.valid_ = valid_;
  const CMat a0inv = lu.inverse();
  x.coeffs_[0] = a0inv;
  const int n = space_->size_upto(valid_);
  for (int m = 1; m < n; ++m) {
    CMat acc = CMat::Zero(rows_, cols_);
    for (const auto& t : space_->products_into(m))
      if (t.left != 0) acc.noalias() += coeffs_[t.left] * x.coeffs_[t.right];
    x.coeffs_[m].noalias() = -a0inv * acc;
  }
  return x;
}

double JetMat::max_abs() const {
  double s = 0.0;
  for (int m = 0; m < space_->size_upto(valid_); ++m)
    s = std::max(s, coeffs_[m].cwiseAbs().maxCoeff());
  return s;
}

}  // namespace charlap
