//! Fixed-step classical Runge–Kutta integration for small autonomous systems.

use crate::scalar::Real;

/// One classical RK4 step of `y' = f(y)`.
///
/// The right-hand side is fallible so that callers can abort as soon as any
/// stage leaves the physical domain (e.g. a trial state inside the plate).
pub fn rk4_step<T, const N: usize, E, F>(y: &[T; N], dt: T, f: &mut F) -> Result<[T; N], E>
where
    T: Real,
    F: FnMut(&[T; N]) -> Result<[T; N], E>,
{
    let half = dt * T::lit(0.5);
    let k1 = f(y)?;
    let k2 = f(&axpy(y, half, &k1))?;
    let k3 = f(&axpy(y, half, &k2))?;
    let k4 = f(&axpy(y, dt, &k3))?;
    let sixth = dt / T::lit(6.0);
    let two = T::lit(2.0);
    Ok(std::array::from_fn(|i| {
        y[i] + sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i])
    }))
}

fn axpy<T: Real, const N: usize>(y: &[T; N], a: T, k: &[T; N]) -> [T; N] {
    std::array::from_fn(|i| y[i] + a * k[i])
}
