use super::{Direction, EnvironmentTransform, EnvironmentView, TorusEnvironment};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Geometric mean of the 2d non-hold probabilities of a site; 0 if any is 0.
pub fn site_ellipticity<T: Real>(probs: &[T], d: usize) -> T {
    let moves = &probs[1..=2 * d];
    if moves.iter().any(|&p| p <= T::zero()) {
        return T::zero();
    }
    let product = moves.iter().fold(T::one(), |acc, &p| acc * p);
    let root = T::one() / T::lit((2 * d) as f64);
    if product > T::min_positive_value() {
        product.powf(root)
    } else {
        // product underflowed; fall back to logs
        let mean_log = moves.iter().map(|p| p.ln()).sum::<T>() * root;
        mean_log.exp()
    }
}

/// `sum_v v * p(v)`: component `i` is `p(+e_i) - p(-e_i)`.
pub fn site_drift<T: Real>(probs: &[T], d: usize) -> Vec<T> {
    (0..d).map(|i| probs[i + 1] - probs[i + 1 + d]).collect()
}

fn transformed_probs<T: Real, V: EnvironmentView<T> + ?Sized>(
    env: &V,
    t: &EnvironmentTransform,
    x: &[i64],
) -> Vec<T> {
    let d = env.dim();
    let raw: Vec<T> = Direction::all(d).map(|v| env.prob(x, v)).collect();
    let mut out = vec![T::zero(); raw.len()];
    t.apply_slice(&raw, &mut out, d);
    out
}

/// `c(E, x)`.
pub fn ellipticity_constant<T: Real, V: EnvironmentView<T> + ?Sized>(
    env: &V,
    t: &EnvironmentTransform,
    x: &[i64],
) -> T {
    site_ellipticity(&transformed_probs(env, t, x), env.dim())
}

/// One-step mean displacement of the walk in `E(omega)` at `x`.
pub fn drift<T: Real, V: EnvironmentView<T> + ?Sized>(
    env: &V,
    t: &EnvironmentTransform,
    x: &[i64],
) -> Vec<T> {
    site_drift(&transformed_probs(env, t, x), env.dim())
}

/// True iff `E_i = E_{i+d}` within `1e-12` (scaled for narrow types) at every site.
pub fn is_balanced<T: Real>(env: &TorusEnvironment<T>, t: &EnvironmentTransform) -> bool {
    let d = env.dim();
    let tol = T::simplex_tol();
    let mut buf = vec![T::zero(); env.stride()];
    env.sites().all(|probs| {
        t.apply_slice(probs, &mut buf, d);
        (1..=d).all(|i| (buf[i] - buf[i + d]).abs() <= tol)
    })
}

/// Ellipticity constants of `E(omega)` at every torus site, in index order.
pub fn ellipticity_field<T: Real>(env: &TorusEnvironment<T>, t: &EnvironmentTransform) -> Vec<T> {
    let d = env.dim();
    let mut buf = vec![T::zero(); env.stride()];
    env.sites()
        .map(|probs| {
            t.apply_slice(probs, &mut buf, d);
            site_ellipticity(&buf, d)
        })
        .collect()
}

/// Exponent of an `l_p` norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl From<f64> for Exponent {
    fn from(p: f64) -> Self {
        if p == f64::INFINITY {
            Exponent::Infinity
        } else {
            Exponent::Finite(p)
        }
    }
}

/// `l_p` norm with respect to the normalised counting measure on the sites.
pub fn lp_norm<T: Real>(values: &[T], p: impl Into<Exponent>) -> Result<T> {
    match p.into() {
        Exponent::Infinity => Ok(values.iter().fold(T::zero(), |m, v| m.max(v.abs()))),
        Exponent::Finite(p) => {
            if !(p >= 1.0) || !p.is_finite() {
                return Err(Error::InvalidExponent(p));
            }
            if values.is_empty() {
                return Ok(T::zero());
            }
            // scale by the max to avoid overflow of |g|^p
            let scale = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
            if scale == T::zero() {
                return Ok(T::zero());
            }
            let pt = T::lit(p);
            let mean = values.iter().map(|v| (v.abs() / scale).powf(pt)).sum::<T>()
                / T::lit(values.len() as f64);
            Ok(scale * mean.powf(T::one() / pt))
        }
    }
}
