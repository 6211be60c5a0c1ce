#pragma once

#include "mmx/config.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include <algorithm>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace mmx {

// Closed forms below lose most of their digits to cancellation in double once
// beta ~ 1e-10, so they are evaluated in 113-bit arithmetic.
using quad = boost::multiprecision::cpp_bin_float_quad;
using cquad = boost::multiprecision::cpp_complex_quad;

enum class RecursionMatrix { M1, M2, M3 };
enum class EigenQuantity { Lambda1, Lambda2Full, Lambda2Leading, Lambda3, V1Exact, Omega, EDisc };

inline std::string to_string(RecursionMatrix m) {
  switch (m) {
    case RecursionMatrix::M1: return "M1";
    case RecursionMatrix::M2: return "M2";
    case RecursionMatrix::M3: return "M3";
  }
  return "?";
}

struct SpectralParams {
  static constexpr double unset = std::numeric_limits<double>::quiet_NaN();
  double ell = unset;
  double r_x = unset;
  double r_y = unset;
  double b = unset;
  double c = unset;
  double alpha = unset;
  double beta = unset;
  double gamma = unset;
};

namespace detail {

inline double need(double v, const char* name) {
  if (std::isnan(v)) throw Error(Errc::missing_field, std::string("spectral parameter '") + name + "' is required");
  return v;
}

template <class T>
struct Sym {
  T l, rx, ry, b, c, a, be, g;
};

// Pull the fields a formula needs, converting to T; missing fields raise.
template <class T>
Sym<T> sym(const SpectralParams& p, bool l, bool rx, bool ry, bool b, bool c, bool a, bool be, bool g) {
  Sym<T> s{};
  if (l) s.l = T(need(p.ell, "ell"));
  if (rx) s.rx = T(need(p.r_x, "r_x"));
  if (ry) s.ry = T(need(p.r_y, "r_y"));
  if (b) s.b = T(need(p.b, "b"));
  if (c) s.c = T(need(p.c, "c"));
  if (a) s.a = T(need(p.alpha, "alpha"));
  if (be) s.be = T(need(p.beta, "beta"));
  if (g) s.g = T(need(p.gamma, "gamma"));
  return s;
}

template <class T>
Sym<T> sym_m2(const SpectralParams& p) {
  return sym<T>(p, true, true, true, true, true, true, true, false);
}

}  // namespace detail

inline Mat recursion_matrix(RecursionMatrix which, const SpectralParams& p) {
  using detail::need;
  switch (which) {
    case RecursionMatrix::M1: {
      const double l = need(p.ell, "ell"), ry = need(p.r_y, "r_y"), b = need(p.b, "b"), c = need(p.c, "c"),
                   a = need(p.alpha, "alpha");
      Mat m(2, 2);
      m << l * c, -c * b, a * b * (1.0 + l * c), -a * ry - c * b * b * a;
      return m;
    }
    case RecursionMatrix::M2: {
      const double l = need(p.ell, "ell"), rx = need(p.r_x, "r_x"), ry = need(p.r_y, "r_y"), b = need(p.b, "b"),
                   c = need(p.c, "c"), a = need(p.alpha, "alpha"), be = need(p.beta, "beta");
      const double k = 1.0 + c * l - c * rx;
      Mat m(3, 3);
      m << c * l - c * rx, -c * b, c * rx,
           a * b * k, -ry * a - c * a * b * b, c * rx * a * b,
           be * k, -c * b * be, -be + be * c * rx;
      return m;
    }
    case RecursionMatrix::M3: {
      const double l = need(p.ell, "ell"), rx = need(p.r_x, "r_x"), c = need(p.c, "c"), be = need(p.beta, "beta"),
                   g = need(p.gamma, "gamma");
      const double a3 = l * c * g + c * rx;
      Mat m(2, 2);
      m << -a3, c * rx, be * (1.0 - a3), -be + be * c * rx;
      return m;
    }
  }
  throw Error(Errc::invalid_argument, "unknown recursion matrix");
}

// A_2 exactly as it is printed next to the Cardano form of lambda_2.
template <class T>
T a2_as_printed(const detail::Sym<T>& s) {
  const T &c = s.c, &l = s.l, &rx = s.rx, &b = s.b, &a = s.a, &be = s.be, &ry = s.ry;
  const T c2 = c * c, c3 = c2 * c, b2 = b * b, b4 = b2 * b2, b6 = b4 * b2;
  const T l2 = l * l, l3 = l2 * l, rx2 = rx * rx, rx3 = rx2 * rx;
  const T a2 = a * a, a3 = a2 * a, be2 = be * be, be3 = be2 * be, ry2 = ry * ry, ry3 = ry2 * ry;
  return -2 * c3 * l3 + 6 * c3 * l2 * rx - 6 * c3 * l * rx2 + 2 * c3 * rx3 + 9 * b2 * c2 * l * a
         + 6 * b2 * c3 * l2 * a - 9 * b2 * c2 * rx * a + 12 * b2 * c3 * l * rx * a - 6 * b2 * c3 * rx2 * a
         - 9 * b4 * c2 * a2 - 6 * b4 * c3 * l * a2 + 6 * b4 * c3 * rx * a2 + 2 * b6 * c3 * a3 - 3 * c2 * l2 * be
         - 3 * c2 * l * rx * be - 6 * c3 * l2 * rx * be + 6 * c2 * rx2 * be + 12 * c3 * l * rx2 * be - 6 * c3 * rx3 * be
         + 18 * b2 * c * a * be + 6 * b2 * c2 * l * a * be + 12 * b2 * c2 * rx * a * be + 12 * b2 * c3 * l * rx * a * be
         - 12 * b2 * c3 * rx2 * a * be - 3 * b4 * c2 * a2 * be - 6 * b4 * c3 * rx * a2 * be + 3 * c * l * be2
         + 6 * c * rx * be2 + 3 * c2 * l * rx * be2 - 12 * c2 * rx2 * be2 - 6 * c3 * l * rx2 * be2 + 6 * c3 * rx3 * be2
         - 3 * b2 * c * a * be2 - 3 * b2 * c2 * rx * a * be2 + 6 * b2 * c3 * rx2 * a * be2 + 2 * be3
         - 6 * c * rx * be3 + 6 * c2 * rx2 * be3 - 2 * c3 * rx3 * be3 - 3 * c2 * l2 * a * ry
         + 6 * c2 * l * rx * a * ry - 3 * c2 * rx2 * a * ry - 9 * b2 * c * a2 * ry - 3 * b2 * c2 * l * a2 * ry
         + 3 * b2 * c2 * rx * a2 * ry + 6 * b4 * c2 * a3 * ry - 12 * c * l * a * be * ry - 6 * c * rx * a * be * ry
         - 6 * c2 * l * rx * a * be * ry + 6 * c2 * rx2 * a * be * ry - 6 * b2 * c * a2 * be * ry
         - 3 * b2 * c2 * rx * a2 * be * ry
         - 3 * a * be2 * ry + 6 * c * rx * a * be2 * ry - 3 * c2 * rx2 * a * be2 * ry
         + 3 * c * l * a2 * ry2 - 3 * c * rx * a2 * ry2 + 6 * b2 * c * a3 * ry2 - 3 * a2 * be * ry2
         + 3 * c * rx * a2 * be * ry2 + 2 * a3 * ry3;
}

// A_2 consistent with the characteristic polynomial of M2, i.e. 2p^3 - 9pq + 27r
// for lambda^3 + p lambda^2 + q lambda + r. Differs from the printed form in the
// two b^2 c^3 r_x alpha terms (signs of 12 l r_x and -6 r_x^2 flipped).
template <class T>
T a2_coefficient(const detail::Sym<T>& s) {
  const T b2 = s.b * s.b, c3 = s.c * s.c * s.c;
  return a2_as_printed(s) - 24 * s.a * b2 * c3 * s.l * s.rx + 12 * s.a * b2 * c3 * s.rx * s.rx;
}

template <class T>
T b2_coefficient(const detail::Sym<T>& s) {
  return s.c * s.l - s.c * s.rx - s.b * s.b * s.c * s.a - s.be + s.c * s.rx * s.be - s.a * s.ry;
}

template <class T>
T c2_coefficient(const detail::Sym<T>& s) {
  const T b2 = s.b * s.b;
  return -b2 * s.c * s.a + s.c * s.l * s.be - b2 * s.c * s.a * s.be + s.c * s.l * s.a * s.ry - s.c * s.rx * s.a * s.ry -
         s.a * s.be * s.ry + s.c * s.rx * s.a * s.be * s.ry;
}

// Cardano branch for lambda_2 with the principal cube root of
// D_2 = A + i sqrt(4(B^2+3C)^3 - A^2).
struct CardanoValue {
  quad value;
  quad imag;
  quad discriminant;
};

inline CardanoValue lambda2_cardano(const quad& A, const quad& B, const quad& C) {
  using boost::multiprecision::exp;
  using boost::multiprecision::log;
  using boost::multiprecision::sqrt;
  const quad k = B * B + 3 * C;
  const quad disc = 4 * k * k * k - A * A;
  const quad s3 = sqrt(quad(3));
  const cquad D(A, disc >= 0 ? quad(sqrt(disc)) : quad(0));
  const cquad D13 = exp(log(D) / 3);
  const quad two13 = boost::multiprecision::cbrt(quad(2));
  const cquad lam = cquad(B / 3) + cquad(1, s3) * k / (3 * two13 * two13 * D13) + cquad(1, -s3) * D13 / (6 * two13);
  return {lam.real(), lam.imag(), disc};
}

namespace detail {

inline quad lambda1_q(const SpectralParams& p) {
  auto s = sym<quad>(p, true, false, true, true, true, true, false, false);
  const quad A1 = s.l * s.c - s.a * s.ry - s.c * s.b * s.b * s.a;
  const quad B1 = s.c * s.a * (s.b * s.b - s.l * s.ry);
  // Same root as (A1 + sqrt(A1^2 - 4 B1))/2 without the cancellation.
  return -2 * B1 / (boost::multiprecision::sqrt(A1 * A1 - 4 * B1) - A1);
}

inline quad lambda2_full_q(const SpectralParams& p) {
  auto s = sym_m2<quad>(p);
  const quad A = a2_coefficient(s), B = b2_coefficient(s), C = c2_coefficient(s);
  const CardanoValue v = lambda2_cardano(A, B, C);
  if (v.discriminant < quad(-1e-12))
    throw Error(Errc::outside_regime, "4(B2^2+3C2)^3 - A2^2 < 0, lambda_2 is not real for these parameters");
  if (abs(v.imag) > quad(1e-9) * abs(v.value))
    throw Error(Errc::outside_regime, "imaginary part of lambda_2 exceeds 1e-9 relative");
  return v.value;
}

inline quad e_disc_q(const SpectralParams& p) {
  auto s = sym<quad>(p, true, true, true, false, false, true, true, false);
  const quad &l = s.l, &rx = s.rx, &a = s.a, &be = s.be, &ry = s.ry;
  return l * l * be * be - 10 * rx * l * a * be * ry + 4 * l * l * a * be * ry + rx * rx * a * a * ry * ry +
         4 * rx * l * a * a * ry * ry + 4 * l * l * a * a * ry * ry;
}

inline quad lambda2_leading_q(const SpectralParams& p) {
  auto s = sym<quad>(p, true, true, true, false, false, true, true, false);
  const quad E = e_disc_q(p);
  return -4 * s.l * s.a * s.be * s.ry /
         (boost::multiprecision::sqrt(E) + s.rx * s.a * s.ry + 2 * s.l * s.a * s.ry - s.l * s.be);
}

inline void a3_b3(const SpectralParams& p, quad& A3, quad& B3, Sym<quad>& s) {
  s = sym<quad>(p, true, true, false, false, true, false, true, true);
  A3 = s.l * s.c * s.g + s.c * s.rx;
  B3 = 1 - s.c * s.rx;
}

inline quad lambda3_q(const SpectralParams& p) {
  quad A3, B3;
  Sym<quad> s;
  a3_b3(p, A3, B3, s);
  const quad t = A3 + B3 * s.be;
  const quad d = 4 * s.l * s.c * s.be * s.g;
  // -(t - sqrt(t^2 - d))/2 rewritten as -d/(2(t + sqrt(t^2 - d))).
  return -d / (2 * (t + boost::multiprecision::sqrt(t * t - d)));
}

inline quad v1_q(const SpectralParams& p) {
  quad A3, B3;
  Sym<quad> s;
  a3_b3(p, A3, B3, s);
  const quad u = A3 - B3 * s.be;
  return 2 * s.c * s.rx / (u + boost::multiprecision::sqrt(u * u + 4 * s.c * s.rx * s.be * (1 - A3)));
}

inline quad omega_q(const SpectralParams& p) {
  auto s = sym<quad>(p, true, true, true, false, false, true, false, false);
  const quad m = s.rx - s.l;
  using boost::multiprecision::sqrt;
  return (1 / sqrt(2 * s.ry)) * (m + s.a * s.l * (3 * s.rx - 2 * s.l)) / (s.a * m * sqrt(m));
}

}  // namespace detail

inline double eigen_closed(EigenQuantity q, const SpectralParams& p) {
  switch (q) {
    case EigenQuantity::Lambda1: return static_cast<double>(detail::lambda1_q(p));
    case EigenQuantity::Lambda2Full: return static_cast<double>(detail::lambda2_full_q(p));
    case EigenQuantity::Lambda2Leading: return static_cast<double>(detail::lambda2_leading_q(p));
    case EigenQuantity::Lambda3: return static_cast<double>(detail::lambda3_q(p));
    case EigenQuantity::V1Exact: return static_cast<double>(detail::v1_q(p));
    case EigenQuantity::Omega: return static_cast<double>(detail::omega_q(p));
    case EigenQuantity::EDisc: return static_cast<double>(detail::e_disc_q(p));
  }
  throw Error(Errc::invalid_argument, "unknown eigen quantity");
}

namespace detail {

inline std::vector<std::complex<quad>> quadratic_roots(const quad& tr, const quad& det) {
  // lambda^2 - tr lambda + det = 0
  using boost::multiprecision::sqrt;
  const quad d = tr * tr - 4 * det;
  if (d >= 0) {
    const quad s = tr + (tr >= 0 ? sqrt(d) : -sqrt(d));
    if (s == 0) return {{0, 0}, {0, 0}};
    return {{s / 2, 0}, {2 * det / s, 0}};
  }
  const quad im = sqrt(-d) / 2;
  return {{tr / 2, im}, {tr / 2, -im}};
}

inline quad cubic_newton(const quad& p, const quad& q, const quad& r, quad x) {
  for (int k = 0; k < 8; ++k) {
    const quad f = ((x + p) * x + q) * x + r;
    const quad df = (3 * x + 2 * p) * x + q;
    if (df == 0) break;
    const quad nx = x - f / df;
    if (nx == x) break;
    x = nx;
  }
  return x;
}

// Roots of lambda^3 + p lambda^2 + q lambda + r.
inline std::vector<std::complex<quad>> cubic_roots(const quad& p, const quad& q, const quad& r) {
  using boost::multiprecision::acos;
  using boost::multiprecision::cbrt;
  using boost::multiprecision::cos;
  using boost::multiprecision::sqrt;
  const quad P = q - p * p / 3;
  const quad Q = 2 * p * p * p / 27 - p * q / 3 + r;
  const quad shift = -p / 3;
  const quad disc = Q * Q / 4 + P * P * P / 27;
  std::vector<std::complex<quad>> out;
  if (disc <= 0 && P < 0) {
    const quad m = 2 * sqrt(-P / 3);
    quad arg = 3 * Q / (P * m);
    if (arg > 1) arg = 1;
    if (arg < -1) arg = -1;
    const quad th = acos(arg) / 3;
    const quad two_pi_3 = 2 * boost::math::constants::pi<quad>() / 3;
    for (int k = 0; k < 3; ++k) {
      const quad t = m * cos(th - two_pi_3 * k);
      out.emplace_back(cubic_newton(p, q, r, t + shift), 0);
    }
    return out;
  }
  const quad sd = sqrt(disc > 0 ? disc : quad(0));
  const quad root = cubic_newton(p, q, r, cbrt(-Q / 2 + sd) + cbrt(-Q / 2 - sd) + shift);
  out.emplace_back(root, 0);
  // Deflate: lambda^2 + (p + root) lambda + (q + root (p + root)).
  const quad p2 = p + root;
  const quad q2 = q + root * p2;
  for (auto& z : quadratic_roots(-p2, q2)) {
    if (z.imag() == 0) out.emplace_back(cubic_newton(p, q, r, z.real()), 0);
    else out.push_back(z);
  }
  return out;
}

}  // namespace detail

// Eigenvalues of a 2x2 or 3x3 matrix, sorted by decreasing real part.
// Characteristic polynomial coefficients and roots are formed in quad precision.
inline std::vector<std::complex<double>> eig_numeric(const Mat& m) {
  require(m.rows() == m.cols() && (m.rows() == 2 || m.rows() == 3), Errc::dimension_mismatch,
          "eig_numeric supports 2x2 and 3x3 matrices");
  require(m.allFinite(), Errc::non_finite, "matrix has non-finite entries");
  auto e = [&](int i, int j) { return quad(m(i, j)); };
  std::vector<std::complex<quad>> roots;
  if (m.rows() == 2) {
    roots = detail::quadratic_roots(e(0, 0) + e(1, 1), e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0));
  } else {
    const quad tr = e(0, 0) + e(1, 1) + e(2, 2);
    const quad minors = e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0) + e(0, 0) * e(2, 2) - e(0, 2) * e(2, 0) +
                        e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1);
    const quad det = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) -
                     e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0)) +
                     e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
    roots = detail::cubic_roots(-tr, minors, -det);
  }
  std::vector<std::complex<double>> out;
  for (const auto& z : roots) out.emplace_back(static_cast<double>(z.real()), static_cast<double>(z.imag()));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
  });
  return out;
}

// Parameters of the recursion matrices under the prescribed step sizes.
inline SpectralParams spectral_params(RecursionMatrix which, double ell, double d_y, double epsilon) {
  SpectralParams p;
  p.ell = ell;
  switch (which) {
    case RecursionMatrix::M1: {
      const auto k = select_config(Algorithm::PerturbedGda, ell, d_y, epsilon, Mode::GS);
      p.r_y = k.r_y;
      p.b = std::sqrt(3.0 * ell * k.r_y);
      p.c = k.c;
      p.alpha = k.alpha;
      break;
    }
    case RecursionMatrix::M2: {
      const auto k = select_config(Algorithm::PerturbedSmoothedGda, ell, d_y, epsilon, Mode::GS);
      p.r_x = k.r_x;
      p.r_y = k.r_y;
      p.b = std::sqrt(3.0 * ell * k.r_y);
      p.c = k.c;
      p.alpha = k.alpha;
      p.beta = k.beta;
      break;
    }
    case RecursionMatrix::M3: {
      const auto k = select_config(Algorithm::PerturbedSmoothedGda, ell, d_y, epsilon, Mode::OS);
      p.r_x = k.r_x;
      p.r_y = k.r_y;
      p.c = k.c;
      p.alpha = k.alpha;
      p.beta = k.beta;
      p.gamma = d_y / (d_y + 1.0);
      break;
    }
  }
  return p;
}

inline SpectralParams spectral_params_from(const SolverConfig& k, double b, double gamma) {
  SpectralParams p;
  p.ell = k.ell;
  p.r_x = k.r_x;
  p.r_y = k.r_y;
  p.b = b;
  p.c = k.c;
  p.alpha = k.alpha;
  p.beta = k.beta;
  p.gamma = gamma;
  return p;
}

struct SpectralReport {
  RecursionMatrix which = RecursionMatrix::M1;
  double ell = 0, d_y = 0, epsilon = 0;
  Mat matrix;
  std::vector<std::complex<double>> numeric;
  double closed = 0;
  double nearest = 0;
  double abs_dev = 0;
  double rel_dev = 0;
  bool sign_ok = false;
  double theta_ratio = 0;  // |lambda| divided by the predicted order
  std::string error;       // non-empty when the closed form could not be evaluated
};

inline SpectralReport spectral_report(RecursionMatrix which, double ell, double d_y, double epsilon) {
  SpectralReport r;
  r.which = which;
  r.ell = ell;
  r.d_y = d_y;
  r.epsilon = epsilon;
  const SpectralParams p = spectral_params(which, ell, d_y, epsilon);
  r.matrix = recursion_matrix(which, p);
  r.numeric = eig_numeric(r.matrix);
  const EigenQuantity q = which == RecursionMatrix::M1   ? EigenQuantity::Lambda1
                          : which == RecursionMatrix::M2 ? EigenQuantity::Lambda2Full
                                                         : EigenQuantity::Lambda3;
  try {
    r.closed = eigen_closed(q, p);
  } catch (const Error& e) {
    r.error = e.what();
    return r;
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& z : r.numeric) {
    const double d = std::abs(z - std::complex<double>(r.closed, 0.0));
    if (d < best) {
      best = d;
      r.nearest = z.real();
    }
  }
  r.abs_dev = best;
  r.rel_dev = best / std::abs(r.closed);
  r.sign_ok = r.closed < 0.0;
  const double s = epsilon / (ell * d_y);
  const double predicted = which == RecursionMatrix::M1   ? s * s
                           : which == RecursionMatrix::M2 ? s
                                                          : p.gamma * s * s;
  r.theta_ratio = std::abs(r.closed) / predicted;
  return r;
}

}  // namespace mmx
