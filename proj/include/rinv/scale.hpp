#pragma once

// Discretized tame Banach scale on periodic spectral modes.
//
// An element is a finite family of complex Fourier coefficients indexed by the
// integer modes |k| <= k_max.  The grading s in [0, s_max] enters through the
// weight w(k) = (1 + k^2)^{1/2}:
//
//   |u|_s = ( sum_k w(k)^{2s} |u_k|^2 )^{1/2}
//
// Smoothing projectors keep the modes with w(k) <= Lambda.  With this sharp
// cutoff the polynomial-growth and approximation estimates hold with constants
// A1 = A2 = 1, which verify_loss / verify_gain measure directly.

#include <rinv/error.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace rinv {

using Complex = std::complex<double>;

inline double mode_weight(long k) noexcept {
  const double kd = static_cast<double>(k);
  return std::sqrt(1.0 + kd * kd);
}

struct ScaleSpec {
  double s_max = 8.0;
  long k_max = 32;

  ScaleSpec() = default;
  ScaleSpec(double s_max_, long k_max_) : s_max(s_max_), k_max(k_max_) {
    if (!(s_max > 0.0)) fail(Errc::domain, "ScaleSpec: s_max must be positive");
    if (k_max < 1) fail(Errc::domain, "ScaleSpec: k_max must be >= 1");
  }

  std::size_t dimension() const noexcept {
    return static_cast<std::size_t>(2 * k_max + 1);
  }
  double weight(long k) const noexcept { return mode_weight(k); }
  double max_weight() const noexcept { return mode_weight(k_max); }
  bool contains(long k) const noexcept { return k >= -k_max && k <= k_max; }

  bool operator==(const ScaleSpec&) const = default;
};

class ScaleVector {
 public:
  ScaleVector() = default;
  explicit ScaleVector(const ScaleSpec& spec)
      : spec_(spec), coeffs_(spec.dimension(), Complex{}) {}

  const ScaleSpec& spec() const noexcept { return spec_; }
  long k_max() const noexcept { return spec_.k_max; }
  std::size_t size() const noexcept { return coeffs_.size(); }

  Complex& operator[](long k) { return coeffs_[index(k)]; }
  const Complex& operator[](long k) const { return coeffs_[index(k)]; }

  Complex& at(long k) {
    check_mode(k);
    return coeffs_[index(k)];
  }
  const Complex& at(long k) const {
    check_mode(k);
    return coeffs_[index(k)];
  }

  // Dense storage ordered from mode -k_max to +k_max.
  std::vector<Complex>& data() noexcept { return coeffs_; }
  const std::vector<Complex>& data() const noexcept { return coeffs_; }

  bool is_zero() const noexcept {
    return std::all_of(coeffs_.begin(), coeffs_.end(),
                       [](const Complex& c) { return c == Complex{}; });
  }

  /// Largest |k| carrying a nonzero coefficient, or -1 for the zero vector.
  long highest_active_mode() const noexcept {
    for (long k = spec_.k_max; k >= 0; --k) {
      if ((*this)[k] != Complex{} || (*this)[-k] != Complex{}) return k;
    }
    return -1;
  }

  ScaleVector& operator+=(const ScaleVector& other) {
    check_same(other);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
    return *this;
  }
  ScaleVector& operator-=(const ScaleVector& other) {
    check_same(other);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
    return *this;
  }
  ScaleVector& operator*=(Complex alpha) {
    for (auto& c : coeffs_) c *= alpha;
    return *this;
  }

  friend ScaleVector operator+(ScaleVector lhs, const ScaleVector& rhs) { return lhs += rhs; }
  friend ScaleVector operator-(ScaleVector lhs, const ScaleVector& rhs) { return lhs -= rhs; }
  friend ScaleVector operator-(ScaleVector v) { return v *= -1.0; }
  friend ScaleVector operator*(Complex alpha, ScaleVector v) { return v *= alpha; }
  friend ScaleVector operator*(double alpha, ScaleVector v) { return v *= alpha; }

  friend bool operator==(const ScaleVector& a, const ScaleVector& b) {
    return a.spec_ == b.spec_ && a.coeffs_ == b.coeffs_;
  }

 private:
  std::size_t index(long k) const noexcept {
    return static_cast<std::size_t>(k + spec_.k_max);
  }
  void check_mode(long k) const {
    if (!spec_.contains(k)) {
      fail(Errc::domain, "mode " + std::to_string(k) + " outside |k| <= " +
                             std::to_string(spec_.k_max));
    }
  }
  void check_same(const ScaleVector& other) const {
    if (!(spec_ == other.spec_)) fail(Errc::domain, "ScaleVector: mismatched scales");
  }

  ScaleSpec spec_;
  std::vector<Complex> coeffs_;
};

inline ScaleVector single_mode(const ScaleSpec& spec, long k, Complex value) {
  ScaleVector u(spec);
  u.at(k) = value;
  return u;
}

inline void check_grading(const ScaleSpec& spec, double s, const char* what) {
  if (!(s >= 0.0 && s <= spec.s_max)) {
    std::ostringstream msg;
    msg << what << ": grading " << s << " outside [0, " << spec.s_max << "]";
    fail(Errc::domain, msg.str());
  }
}

inline double norm(const ScaleVector& u, double s) {
  check_grading(u.spec(), s, "norm");
  double sum = 0.0;
  for (long k = -u.k_max(); k <= u.k_max(); ++k) {
    const double mag = std::abs(u[k]);
    if (mag == 0.0) continue;
    sum += std::pow(mode_weight(k), 2.0 * s) * mag * mag;
  }
  return std::sqrt(sum);
}

inline void check_cutoff(double cutoff) {
  if (!(cutoff >= 1.0)) {
    std::ostringstream msg;
    msg << "projector cutoff " << cutoff << " must be >= 1";
    fail(Errc::domain, msg.str());
  }
}

/// Pi(Lambda): keeps exactly the modes with w(k) <= Lambda.
inline ScaleVector project(const ScaleVector& u, double cutoff) {
  check_cutoff(cutoff);
  ScaleVector out(u.spec());
  for (long k = -u.k_max(); k <= u.k_max(); ++k) {
    if (mode_weight(k) <= cutoff) out[k] = u[k];
  }
  return out;
}

/// (I - Pi(Lambda)) u.
inline ScaleVector project_complement(const ScaleVector& u, double cutoff) {
  check_cutoff(cutoff);
  ScaleVector out(u.spec());
  for (long k = -u.k_max(); k <= u.k_max(); ++k) {
    if (mode_weight(k) > cutoff) out[k] = u[k];
  }
  return out;
}

/// Diagonal multiplier k -> w(k)^power (a smoothing operator for power < 0).
inline ScaleVector apply_weight_power(const ScaleVector& u, double power) {
  ScaleVector out(u.spec());
  for (long k = -u.k_max(); k <= u.k_max(); ++k) {
    if (u[k] != Complex{}) out[k] = std::pow(mode_weight(k), power) * u[k];
  }
  return out;
}

struct ProjectorFamily {
  ScaleSpec spec;
  double a1 = 1.0;
  double a2 = 1.0;

  ScaleVector operator()(const ScaleVector& u, double cutoff) const {
    return project(u, cutoff);
  }
  long highest_kept_mode(double cutoff) const {
    check_cutoff(cutoff);
    long k = 0;
    while (k + 1 <= spec.k_max && mode_weight(k + 1) <= cutoff) ++k;
    return k;
  }
};

/// |Pi(Lambda) u|_t / (Lambda^{(t-s)+} |u|_s); the growth estimate holds iff <= A1.
inline double verify_loss(const ScaleVector& u, double s, double t, double cutoff) {
  check_grading(u.spec(), s, "verify_loss");
  check_grading(u.spec(), t, "verify_loss");
  const double denom_norm = norm(u, s);
  if (denom_norm == 0.0) fail(Errc::domain, "verify_loss: zero vector");
  const double excess = std::max(t - s, 0.0);
  return norm(project(u, cutoff), t) / (std::pow(cutoff, excess) * denom_norm);
}

/// |(I - Pi(Lambda)) u|_t / (Lambda^{-(s-t)} |u|_s); the approximation estimate holds iff <= A2.
inline double verify_gain(const ScaleVector& u, double s, double t, double cutoff) {
  check_grading(u.spec(), s, "verify_gain");
  check_grading(u.spec(), t, "verify_gain");
  if (t > s) fail(Errc::domain, "verify_gain: requires t <= s");
  const double denom_norm = norm(u, s);
  if (denom_norm == 0.0) fail(Errc::domain, "verify_gain: zero vector");
  return norm(project_complement(u, cutoff), t) /
         (std::pow(cutoff, -(s - t)) * denom_norm);
}

/// Random element whose coefficients decay like w(k)^{-decay}, rescaled so
/// that |u|_s == target_norm.  Only modes |k| <= active_k_max are populated.
template <class Rng>
ScaleVector random_scale_vector(const ScaleSpec& spec, Rng& rng, long active_k_max,
                                double decay, double s, double target_norm) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ScaleVector u(spec);
  const long top = std::min(active_k_max, spec.k_max);
  for (long k = -top; k <= top; ++k) {
    const double amp = std::pow(mode_weight(k), -decay);
    const double re = gauss(rng);
    const double im = gauss(rng);
    u[k] = amp * Complex(re, im);
  }
  const double current = norm(u, s);
  if (current > 0.0) u *= target_norm / current;
  return u;
}

struct ProjectorSweep {
  double worst_loss = 0.0;
  double worst_gain = 0.0;
  std::size_t nesting_failures = 0;
  std::size_t samples = 0;
};

/// Randomized check of the smoothing estimates and of the nesting identity
/// Pi(L1) Pi(L2) = Pi(min(L1, L2)) over `trials` draws of (u, s, t, Lambda).
template <class Rng>
ProjectorSweep projector_sweep(const ScaleSpec& spec, int trials, Rng& rng) {
  std::uniform_real_distribution<double> grading(0.0, spec.s_max);
  std::uniform_real_distribution<double> decay(0.5, 4.0);
  std::uniform_real_distribution<double> log_cut(0.0, std::log(1.5 * spec.max_weight()));
  std::uniform_int_distribution<long> active(1, spec.k_max);
  ProjectorFamily family{spec};
  ProjectorSweep out;
  for (int i = 0; i < trials; ++i) {
    const ScaleVector u = random_scale_vector(spec, rng, active(rng), decay(rng), 0.0, 1.0);
    double s = grading(rng);
    double t = grading(rng);
    const double cut = std::exp(log_cut(rng));
    out.worst_loss = std::max(out.worst_loss, verify_loss(u, s, t, cut));
    if (t > s) std::swap(s, t);
    out.worst_gain = std::max(out.worst_gain, verify_gain(u, s, t, cut));
    const double other = std::exp(log_cut(rng));
    if (!(family(family(u, cut), other) == family(u, std::min(cut, other)))) {
      ++out.nesting_failures;
    }
    ++out.samples;
  }
  return out;
}

// Text records "k re im", one mode per line; zero coefficients are omitted on
// output and absent modes read as zero.
inline void write_records(std::ostream& out, const ScaleVector& u) {
  const auto old_precision = out.precision(17);
  for (long k = -u.k_max(); k <= u.k_max(); ++k) {
    if (u[k] == Complex{}) continue;
    out << k << ' ' << u[k].real() << ' ' << u[k].imag() << '\n';
  }
  out.precision(old_precision);
}

inline ScaleVector read_records(std::istream& in, const ScaleSpec& spec) {
  ScaleVector u(spec);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    long k = 0;
    double re = 0.0;
    double im = 0.0;
    if (!(fields >> k >> re >> im)) {
      fail(Errc::config, "malformed mode record on line " + std::to_string(line_no));
    }
    if (!spec.contains(k)) {
      fail(Errc::config, "mode " + std::to_string(k) + " on line " +
                             std::to_string(line_no) + " exceeds k_max");
    }
    u[k] += Complex(re, im);
  }
  return u;
}

}  // namespace rinv
