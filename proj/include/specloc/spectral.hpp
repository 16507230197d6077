#pragma once

/// \file spectral.hpp
/// Periodic grid, unitary discrete Fourier transform, Fourier multipliers and
/// weighted Sobolev norms. Conventions, fixed once for the whole toolkit:
///
///   * box [-L, L), x_i = -L + i*dx, dx = 2L/N, N a power of two (>= 16);
///   * frequency lattice xi_m = (pi/L) m, m in {-N/2, ..., N/2-1}, stored in
///     increasing order of m (index j holds m = j - N/2; Nyquist at index 0);
///   * fhat_m = (dx/sqrt(2pi)) (-1)^m DFT_m, which makes the transform unitary:
///     dx sum|f|^2 = dxi sum|fhat|^2 exactly (Plancherel);
///   * sign-projected cutoffs F(+xi), F(-xi) treat the single Nyquist mode as
///     excluded (value 0 there); |xi| cutoffs evaluate it normally.

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

#include "specloc/cutoffs.hpp"

namespace specloc {

struct Grid {
  int n;
  double half_width;

  Grid(int n_, double half_width_) : n(n_), half_width(half_width_) {
    if (n < 16 || (n & (n - 1)) != 0)
      throw std::domain_error("grid size must be a power of two >= 16");
    if (!(half_width > 0.0)) throw std::domain_error("grid half-width must be positive");
  }

  double dx() const { return 2.0 * half_width / n; }
  double dxi() const { return M_PI / half_width; }
  double x(int i) const { return -half_width + i * dx(); }
  /// Frequency at storage index j (j = 0 is the Nyquist mode m = -N/2).
  double xi(int j) const { return dxi() * (j - n / 2); }
  int nyquist_index() const { return 0; }
  double xi_max() const { return dxi() * (n / 2 - 1); }

  bool operator==(const Grid& o) const {
    return n == o.n && half_width == o.half_width;
  }
};

enum class Rep { position, frequency };

/// Immutable-by-convention value type: N complex amplitudes plus the
/// representation they live in. All operations are free functions.
struct Field {
  Grid grid;
  Rep rep;
  Eigen::VectorXcd data;

  Field(const Grid& g, Rep r) : grid(g), rep(r), data(Eigen::VectorXcd::Zero(g.n)) {}
  Field(const Grid& g, Rep r, Eigen::VectorXcd v) : grid(g), rep(r), data(std::move(v)) {
    if (data.size() != g.n) throw std::invalid_argument("field size != grid size");
  }
};

/// Transform kernels (preallocated-buffer form used by the time stepper).
void dft_unitary_forward(const Grid& g, const Eigen::VectorXcd& in, Eigen::VectorXcd& out);
void dft_unitary_inverse(const Grid& g, const Eigen::VectorXcd& in, Eigen::VectorXcd& out);

Field to_frequency(const Field& f);  // requires position representation
Field to_position(const Field& f);   // requires frequency representation
Field in_rep(const Field& f, Rep r); // converts only when needed

/// L2 norm with the representation's measure (dx or dxi); Plancherel makes the
/// two agree to roundoff.
double norm_l2(const Field& f);
/// <f, g> = integral f conj(g); both fields must share grid and representation.
std::complex<double> inner(const Field& f, const Field& g);
/// L2 norm restricted to |x| >= radius (position-space indicator).
double restricted_l2(const Field& f, double radius);
/// Mass in the outer 20% band |x| > frac*L, the box-wraparound monitor.
double boundary_mass(const Field& f, double frac = 0.8);

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(std::complex<double> s, const Field& a);

/// One scaled-cutoff factor evaluated on a coordinate axis. axis selects
/// F(|v|), F(+v) or F(-v); sign-projected factors vanish at the Nyquist mode.
struct CutoffFactor {
  cutoffs::Variant kind = cutoffs::Variant::at;
  double scale = 1.0;
  int deriv = 0;
  enum class Axis { abs, plus, minus };
  Axis axis = Axis::abs;

  double eval(double v, bool nyquist) const {
    if (nyquist && axis != Axis::abs) return 0.0;
    const double arg = axis == Axis::abs ? std::abs(v) : (axis == Axis::plus ? v : -v);
    return cutoffs::eval(kind, scale, arg, deriv);
  }
};

/// A scalar frequency symbol m(xi): product of cutoff evaluations, (i xi)^k,
/// |xi|^p, a quadratic phase e^{i tau xi^2}, a Bessel power (1+xi^2)^{s/2}, the
/// time-integrated quadratic phase, and a constant gain.
struct MultiplierSpec {
  std::vector<CutoffFactor> cutoffs;
  int ipow = 0;            // (i xi)^k
  double abs_power = 0.0;  // |xi|^p
  double quad_phase = 0.0; // e^{i tau xi^2}  (tau = quad_phase)
  double bessel = 0.0;     // (1+xi^2)^{s/2}  (s = bessel)
  double duhamel = 0.0;    // integral_0^tau e^{i s xi^2} ds  (tau = duhamel)
  std::complex<double> gain = 1.0;

  std::complex<double> eval(double xi, bool nyquist) const;

  static MultiplierSpec identity() { return {}; }
  static MultiplierSpec derivative(int k) {
    MultiplierSpec m;
    m.ipow = k;
    return m;
  }
  /// Symbol of the free flow over time tau (quadratic phase e^{+i tau xi^2}).
  static MultiplierSpec free_flow(double tau) {
    MultiplierSpec m;
    m.quad_phase = tau;
    return m;
  }
  static MultiplierSpec bessel_power(double s) {
    MultiplierSpec m;
    m.bessel = s;
    return m;
  }
  static MultiplierSpec cutoff(CutoffFactor f) {
    MultiplierSpec m;
    m.cutoffs.push_back(f);
    return m;
  }
};

/// Pointwise multiplication of the spectrum by m(xi); output in the input's
/// representation. Throws on a non-finite symbol value (reports the xi).
Field apply_multiplier(const MultiplierSpec& m, const Field& f);

/// Dyadic-shell selector for the standard frequency projectors: profile kind
/// at the given scale (e.g. {at, 2^k} is the shell projector at 2^k).
struct ShellSelector {
  cutoffs::Variant kind = cutoffs::Variant::at;
  double scale = 1.0;
};
enum class SignMode { plus, minus, both };

/// Smooth frequency projector. Returns a zero field and sets *empty (when
/// given) if the selected shell has no support on the frequency lattice.
Field lp_project(ShellSelector sel, SignMode sign, const Field& f, bool* empty = nullptr);

/// || <x>^a d^k f ||_{H^s}: differentiate spectrally, weight in position,
/// evaluate the Bessel H^s norm spectrally (s = 0 gives L2).
double weighted_norm(const Field& f, double weight_power, int deriv_order, double sobolev_s);

/// Position sampler: fn(x) -> complex amplitude.
template <class F>
Field sample_position(const Grid& g, F&& fn) {
  Field f(g, Rep::position);
  for (int i = 0; i < g.n; ++i) f.data[i] = fn(g.x(i));
  return f;
}

/// In-place pointwise scaling of a position-space field by fn(x).
template <class F>
void scale_position(Field& f, F&& fn) {
  if (f.rep != Rep::position)
    throw std::invalid_argument("scale_position needs a position-space field");
  for (int i = 0; i < f.grid.n; ++i) f.data[i] *= fn(f.grid.x(i));
}

}  // namespace specloc
