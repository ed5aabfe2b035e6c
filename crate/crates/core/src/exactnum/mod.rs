//! Exact scalars: rationals with per-prime valuations, and real quadratic
//! irrationals `a + b√k` used for window endpoints.

mod prime;
mod quad;
mod rational;

pub use prime::{is_prime, primes_up_to, Prime};
pub use quad::{compare_quad, QuadExtReal};
pub use rational::{p_norm, p_valuation, valuation, Rational, Valuation};
