#pragma once

/// \file cutoffs.hpp
/// Smooth cutoff profiles and their scaled variants. Everything downstream
/// (frequency projectors, phase-space localizers, channel projections) is built
/// from three C^inf profiles on the line:
///
///   transition(x): 1 on (-inf,1], 0 on [2,inf), exponential glue between;
///   bump(x)      = transition(x) - transition(2x), supported on [1/2, 2];
///   highpass(x)  = 1 - transition(2x), 0 on (-inf,1/2], 1 on [1,inf).
///
/// Scaled variants come from one scale table (e.g. "<C" is the transition at
/// scale C/2, ">C" the highpass at scale 2C, "~C" the exact complement of the
/// "<<C" and ">>C" pieces), chosen so the partition identities
///   lt + at + gt = 1  and  ll + sim + gg = 1   (on x > 0)
/// hold exactly, not approximately. Derivatives follow the convention that the
/// profile is differentiated first and then evaluated at the rescaled argument
/// (deriv of the unscaled profile, NOT the chain-rule derivative); eval_chain
/// supplies the chain-rule version when a true d/dx is needed.

#include <stdexcept>

namespace specloc::cutoffs {

inline constexpr int kMaxDeriv = 8;

/// Scaled-variant kinds: at scale C, <=C, <C, <~C, <<C, ~C, >=C, >C, >~C, >>C.
enum class Variant { at, le, lt, lesssim, ll, sim, ge, gt, gtrsim, gg };

/// a-th derivative of the transition profile (a <= kMaxDeriv).
double transition(double x, int deriv = 0);

/// a-th derivative of the bump profile bump = transition(x) - transition(2x).
double bump(double x, int deriv = 0);

/// a-th derivative of the highpass profile 1 - transition(2x).
double highpass(double x, int deriv = 0);

/// The scale the variant's profile is evaluated at (e.g. 2C for Variant::gt).
/// Variant::sim has no single profile scale and is rejected here.
double effective_scale(Variant kind, double scale);

/// Scaled cutoff under the profile-derivative convention:
/// profile^{(deriv)}(x / effective_scale). Requires scale > 0.
double eval(Variant kind, double scale, double x, int deriv = 0);

/// True chain-rule derivative d^deriv/dx^deriv of the scaled cutoff.
double eval_chain(Variant kind, double scale, double x, int deriv);

}  // namespace specloc::cutoffs
