#include "specloc/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <sstream>

namespace specloc {
namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;  // 1/sqrt(2 pi)

Eigen::FFT<double>& engine() {
  static Eigen::FFT<double> fft;  // single-threaded toolkit: one shared plan cache
  return fft;
}

void check_same(const Field& a, const Field& b) {
  if (!(a.grid == b.grid) || a.rep != b.rep)
    throw std::invalid_argument("field operands differ in grid or representation");
}

}  // namespace

void dft_unitary_forward(const Grid& g, const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
  static thread_local Eigen::VectorXcd tmp;
  tmp.resize(g.n);
  engine().fwd(tmp, in);
  out.resize(g.n);
  const double scale = g.dx() * kInvSqrt2Pi;
  const int half = g.n / 2;
  for (int j = 0; j < g.n; ++j) {
    const int m = j - half;
    const double sgn = (m % 2 == 0) ? 1.0 : -1.0;
    out[j] = scale * sgn * tmp[(j + half) % g.n];
  }
}

void dft_unitary_inverse(const Grid& g, const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
  static thread_local Eigen::VectorXcd tmp;
  tmp.resize(g.n);
  const int half = g.n / 2;
  for (int j = 0; j < g.n; ++j) {
    const int m = j - half;
    const double sgn = (m % 2 == 0) ? 1.0 : -1.0;
    tmp[(j + half) % g.n] = sgn * in[j];
  }
  static thread_local Eigen::VectorXcd res;
  engine().inv(res, tmp);  // includes the 1/N
  const double scale = g.n * g.dxi() * kInvSqrt2Pi;
  out = scale * res;
}

Field to_frequency(const Field& f) {
  if (f.rep != Rep::position)
    throw std::invalid_argument("to_frequency: field is not in position representation");
  Field out(f.grid, Rep::frequency);
  dft_unitary_forward(f.grid, f.data, out.data);
  return out;
}

Field to_position(const Field& f) {
  if (f.rep != Rep::frequency)
    throw std::invalid_argument("to_position: field is not in frequency representation");
  Field out(f.grid, Rep::position);
  dft_unitary_inverse(f.grid, f.data, out.data);
  return out;
}

Field in_rep(const Field& f, Rep r) {
  if (f.rep == r) return f;
  return r == Rep::frequency ? to_frequency(f) : to_position(f);
}

double norm_l2(const Field& f) {
  const double measure = f.rep == Rep::position ? f.grid.dx() : f.grid.dxi();
  return std::sqrt(measure * f.data.squaredNorm());
}

std::complex<double> inner(const Field& f, const Field& g) {
  check_same(f, g);
  const double measure = f.rep == Rep::position ? f.grid.dx() : f.grid.dxi();
  return measure * g.data.dot(f.data);  // Eigen dot conjugates its receiver
}

double restricted_l2(const Field& f, double radius) {
  const Field p = in_rep(f, Rep::position);
  double s = 0.0;
  for (int i = 0; i < p.grid.n; ++i)
    if (std::abs(p.grid.x(i)) >= radius) s += std::norm(p.data[i]);
  return std::sqrt(p.grid.dx() * s);
}

double boundary_mass(const Field& f, double frac) {
  return restricted_l2(f, frac * f.grid.half_width);
}

Field operator+(const Field& a, const Field& b) {
  check_same(a, b);
  return Field(a.grid, a.rep, a.data + b.data);
}

Field operator-(const Field& a, const Field& b) {
  check_same(a, b);
  return Field(a.grid, a.rep, a.data - b.data);
}

Field operator*(std::complex<double> s, const Field& a) {
  return Field(a.grid, a.rep, s * a.data);
}

std::complex<double> MultiplierSpec::eval(double xi, bool nyquist) const {
  std::complex<double> v = gain;
  for (const auto& c : cutoffs) v *= c.eval(xi, nyquist);
  if (ipow != 0) v *= std::pow(std::complex<double>(0.0, xi), ipow);
  if (abs_power != 0.0) v *= std::pow(std::abs(xi), abs_power);
  if (quad_phase != 0.0) v *= std::polar(1.0, quad_phase * xi * xi);
  if (bessel != 0.0) v *= std::pow(1.0 + xi * xi, 0.5 * bessel);
  if (duhamel != 0.0) {
    // integral_0^tau e^{i s xi^2} ds = (e^{i tau xi^2} - 1) / (i xi^2), = tau at xi = 0
    const double q = xi * xi;
    if (q * duhamel * duhamel < 1e-24) {
      v *= duhamel;
    } else {
      v *= (std::polar(1.0, duhamel * q) - 1.0) / std::complex<double>(0.0, q);
    }
  }
  return v;
}

Field apply_multiplier(const MultiplierSpec& m, const Field& f) {
  Field hat = in_rep(f, Rep::frequency);
  const Grid& g = f.grid;
  for (int j = 0; j < g.n; ++j) {
    const std::complex<double> v = m.eval(g.xi(j), j == g.nyquist_index());
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      std::ostringstream os;
      os << "multiplier symbol is not finite at xi = " << g.xi(j);
      throw std::runtime_error(os.str());
    }
    hat.data[j] *= v;
  }
  return f.rep == Rep::frequency ? hat : to_position(hat);
}

Field lp_project(ShellSelector sel, SignMode sign, const Field& f, bool* empty) {
  CutoffFactor c;
  c.kind = sel.kind;
  c.scale = sel.scale;
  c.axis = sign == SignMode::both
               ? CutoffFactor::Axis::abs
               : (sign == SignMode::plus ? CutoffFactor::Axis::plus : CutoffFactor::Axis::minus);
  const MultiplierSpec m = MultiplierSpec::cutoff(c);
  if (empty) {
    // Empty-shell diagnostic: the symbol vanishes on the whole lattice when the
    // selected scale falls below the resolution pi/L or above the Nyquist band.
    *empty = true;
    for (int j = 0; j < f.grid.n && *empty; ++j)
      if (m.eval(f.grid.xi(j), j == f.grid.nyquist_index()) != 0.0) *empty = false;
  }
  return apply_multiplier(m, f);
}

double weighted_norm(const Field& f, double weight_power, int deriv_order, double sobolev_s) {
  Field g = in_rep(f, Rep::frequency);
  if (deriv_order != 0) g = apply_multiplier(MultiplierSpec::derivative(deriv_order), g);
  if (weight_power != 0.0) {
    Field p = to_position(g);
    for (int i = 0; i < p.grid.n; ++i) {
      const double x = p.grid.x(i);
      p.data[i] *= std::pow(1.0 + x * x, 0.5 * weight_power);
    }
    g = to_frequency(p);
  }
  if (sobolev_s != 0.0) g = apply_multiplier(MultiplierSpec::bessel_power(sobolev_s), g);
  const double v = norm_l2(g);
  if (!std::isfinite(v)) throw std::runtime_error("weighted_norm overflowed");
  return v;
}

}  // namespace specloc
