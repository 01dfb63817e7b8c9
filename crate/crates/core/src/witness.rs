//! Two-spin states, dephasing, and the entanglement witness.
//!
//! Basis order is {↑↑, ↑↓, ↓↑, ↓↓} with ↑ = |0⟩ the +1 eigenstate of σz, and
//! the first label refers to the first test mass.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::scalar::Real;

type Matrix<T> = [[Complex<T>; 4]; 4];

fn tolerance<T: Real>(target: f64) -> T {
    T::lit(target).max(T::epsilon() * T::lit(64.0))
}

/// Pure two-spin state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinState<T> {
    pub amplitudes: [Complex<T>; 4],
}

impl<T: Real> SpinState<T> {
    pub fn new(amplitudes: [Complex<T>; 4]) -> Result<Self> {
        let state = Self { amplitudes };
        let norm: T = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        ensure((norm - T::one()).abs() <= tolerance(1e-12), || {
            Error::Validation(format!("state norm {} is not 1", norm.to_f64_lossy()))
        })?;
        Ok(state)
    }

    pub fn projector(&self) -> DensityMatrix<T> {
        let a = &self.amplitudes;
        DensityMatrix {
            entries: std::array::from_fn(|i| std::array::from_fn(|j| a[i] * a[j].conj())),
        }
    }
}

/// ½·(1, e^{iΔφ_↑↓}, e^{iΔφ_↓↑}, 1), the global phase e^{iφ} dropped.
pub fn entangled_state<T: Real>(dphi_ud: T, dphi_du: T) -> SpinState<T> {
    let half = T::lit(0.5);
    let one = Complex::new(half, T::zero());
    SpinState {
        amplitudes: [
            one,
            Complex::from_polar(half, dphi_ud),
            Complex::from_polar(half, dphi_du),
            one,
        ],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix<T> {
    pub entries: Matrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn maximally_mixed() -> Self {
        let quarter = Complex::new(T::lit(0.25), T::zero());
        Self {
            entries: std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    if i == j {
                        quarter
                    } else {
                        Complex::new(T::zero(), T::zero())
                    }
                })
            }),
        }
    }

    pub fn trace(&self) -> Complex<T> {
        (0..4)
            .map(|i| self.entries[i][i])
            .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    pub fn is_hermitian(&self) -> bool {
        let tol = tolerance::<T>(1e-12);
        (0..4)
            .all(|i| (0..4).all(|j| (self.entries[i][j] - self.entries[j][i].conj()).norm() <= tol))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [T; 4] {
        // H = A + iB is Hermitian iff [[A, −B], [B, A]] is symmetric; the real
        // embedding carries every eigenvalue of H twice.
        let mut m = [[T::zero(); 8]; 8];
        for i in 0..4 {
            for j in 0..4 {
                let z = self.entries[i][j];
                m[i][j] = z.re;
                m[i + 4][j + 4] = z.re;
                m[i][j + 4] = -z.im;
                m[i + 4][j] = z.im;
            }
        }
        let mut ev = jacobi_eigenvalues(m);
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        std::array::from_fn(|i| (ev[2 * i] + ev[2 * i + 1]) * T::lit(0.5))
    }

    /// Hermitian, unit trace, eigenvalues ≥ −1e-10.
    pub fn validate(&self) -> Result<()> {
        ensure(self.is_hermitian(), || {
            Error::Validation("density matrix is not Hermitian".into())
        })?;
        let tr = self.trace();
        ensure(
            (tr.re - T::one()).abs() <= tolerance(1e-10) && tr.im.abs() <= tolerance(1e-10),
            || Error::Validation(format!("trace {} is not 1", tr.re.to_f64_lossy())),
        )?;
        let min = self.eigenvalues()[0];
        ensure(min >= -tolerance::<T>(1e-10), || {
            Error::Validation(format!("negative eigenvalue {:e}", min.to_f64_lossy()))
        })
    }

    /// Tr(ρ²).
    pub fn purity(&self) -> T {
        let mut acc = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                acc = acc + (self.entries[i][j] * self.entries[j][i]).re;
            }
        }
        acc
    }

    /// State of the first spin after tracing out the second.
    pub fn reduced_first(&self) -> [[Complex<T>; 2]; 2] {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| self.entries[2 * a][2 * b] + self.entries[2 * a + 1][2 * b + 1])
        })
    }

    /// Von Neumann entropy of the reduced first-spin state, in bits.
    pub fn reduced_entropy_bits(&self) -> T {
        let r = self.reduced_first();
        let mean = (r[0][0].re + r[1][1].re) * T::lit(0.5);
        let diff = (r[0][0].re - r[1][1].re) * T::lit(0.5);
        let radius = (diff * diff + r[0][1].norm_sqr()).sqrt();
        [mean + radius, mean - radius]
            .into_iter()
            .filter(|&p| p > T::zero())
            .map(|p| -p * p.log2())
            .sum()
    }
}

fn jacobi_eigenvalues<T: Real, const N: usize>(mut a: [[T; N]; N]) -> [T; N] {
    for _sweep in 0..100 {
        let off: T = (0..N)
            .flat_map(|i| (0..N).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: T = (0..N).map(|i| a[i][i] * a[i][i]).sum();
        if off <= T::epsilon() * T::epsilon() * scale.max(T::min_positive_value()) {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::array::from_fn(|i| a[i][i])
}

/// How the environment suppresses off-diagonal elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DephasingModel {
    /// Every off-diagonal element decays as e^{−γt}.
    #[default]
    Collective,
    /// Each spin dephases independently: e^{−γt·(h₁+h₂)}, hᵢ = 1 when spin i
    /// differs between bra and ket.
    PerParticle,
}

impl DephasingModel {
    fn weight(self, i: usize, j: usize) -> u32 {
        match self {
            DephasingModel::Collective => u32::from(i != j),
            DephasingModel::PerParticle => ((i ^ j) as u32).count_ones(),
        }
    }
}

impl FromStr for DephasingModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "collective" => Ok(Self::Collective),
            "per-particle" => Ok(Self::PerParticle),
            other => Err(Error::Validation(format!(
                "unknown dephasing model `{other}`"
            ))),
        }
    }
}

impl fmt::Display for DephasingModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Collective => "collective",
            Self::PerParticle => "per-particle",
        })
    }
}

/// |Ψ⟩⟨Ψ| with off-diagonal elements damped by the chosen model.
pub fn dephase<T: Real>(
    state: &SpinState<T>,
    gamma_t: T,
    model: DephasingModel,
) -> Result<DensityMatrix<T>> {
    ensure(gamma_t >= T::zero(), || {
        Error::Domain("γt must be non-negative".into())
    })?;
    let mut rho = state.projector();
    for i in 0..4 {
        for j in 0..4 {
            let w = model.weight(i, j);
            if w > 0 {
                let damp = (-gamma_t * T::count(w as usize)).exp();
                rho.entries[i][j] = rho.entries[i][j] * damp;
            }
        }
    }
    Ok(rho)
}

/// Single-spin Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn matrix<T: Real>(self) -> [[Complex<T>; 2]; 2] {
        let o = Complex::new(T::zero(), T::zero());
        let l = Complex::new(T::one(), T::zero());
        let i = Complex::new(T::zero(), T::one());
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }

    fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    fn label(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Real combination of two-spin Pauli products; Hermitian by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessOperator<T> {
    pub terms: Vec<(T, Pauli, Pauli)>,
}

impl<T: Real> Default for WitnessOperator<T> {
    /// I⊗I − σx⊗σx − σy⊗σz − σx⊗σz.
    fn default() -> Self {
        let m = -T::one();
        Self {
            terms: vec![
                (T::one(), Pauli::I, Pauli::I),
                (m, Pauli::X, Pauli::X),
                (m, Pauli::Y, Pauli::Z),
                (m, Pauli::X, Pauli::Z),
            ],
        }
    }
}

impl<T: Real> WitnessOperator<T> {
    /// Parses labels such as `II - XX - YZ - XZ` or `0.5*ZZ + 2 XY`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Validation(format!("witness `{text}`: {msg}"));
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        ensure(!compact.is_empty(), || bad("empty operator"))?;
        let chars: Vec<char> = compact.chars().collect();
        let mut terms = Vec::new();
        let mut pos = 0;
        while pos < chars.len() {
            let mut sign = T::one();
            if chars[pos] == '+' || chars[pos] == '-' {
                if chars[pos] == '-' {
                    sign = -sign;
                }
                pos += 1;
            } else if !terms.is_empty() {
                return Err(bad("expected + or - between terms"));
            }
            let start = pos;
            while pos < chars.len()
                && (chars[pos].is_ascii_digit() || matches!(chars[pos], '.' | 'e' | 'E'))
            {
                // an exponent sign belongs to the number
                pos += 1;
                if pos < chars.len()
                    && matches!(chars[pos - 1], 'e' | 'E')
                    && matches!(chars[pos], '+' | '-')
                {
                    pos += 1;
                }
            }
            let coeff = if pos > start {
                let s: String = chars[start..pos].iter().collect();
                let v: f64 = s.parse().map_err(|_| bad("bad coefficient"))?;
                if pos < chars.len() && chars[pos] == '*' {
                    pos += 1;
                }
                T::lit(v)
            } else {
                T::one()
            };
            ensure(pos + 2 <= chars.len(), || {
                bad("term needs two Pauli labels")
            })?;
            let a = Pauli::from_char(chars[pos]).ok_or_else(|| bad("unknown Pauli label"))?;
            let b = Pauli::from_char(chars[pos + 1]).ok_or_else(|| bad("unknown Pauli label"))?;
            pos += 2;
            terms.push((sign * coeff, a, b));
        }
        Ok(Self { terms })
    }

    pub fn label(&self) -> String {
        let mut out = String::new();
        for (i, (c, a, b)) in self.terms.iter().enumerate() {
            let mag = c.abs();
            let sign = if *c < T::zero() {
                "-"
            } else if i > 0 {
                "+"
            } else {
                ""
            };
            if i > 0 {
                out.push(' ');
            }
            out.push_str(sign);
            if i > 0 {
                out.push(' ');
            }
            if mag != T::one() {
                out.push_str(&format!("{}*", mag.to_f64_lossy()));
            }
            out.push(a.label());
            out.push(b.label());
        }
        out
    }

    /// Dense 4×4 matrix.
    pub fn matrix(&self) -> Matrix<T> {
        let zero = Complex::new(T::zero(), T::zero());
        let mut m = [[zero; 4]; 4];
        for &(c, a, b) in &self.terms {
            let (pa, pb) = (a.matrix::<T>(), b.matrix::<T>());
            for i in 0..4 {
                for j in 0..4 {
                    m[i][j] = m[i][j] + pa[i >> 1][j >> 1] * pb[i & 1][j & 1] * c;
                }
            }
        }
        m
    }
}

/// Tr(Wρ), real for Hermitian inputs.
pub fn expectation<T: Real>(rho: &DensityMatrix<T>, w: &WitnessOperator<T>) -> Result<T> {
    ensure(rho.is_hermitian(), || {
        Error::Validation("density matrix is not Hermitian".into())
    })?;
    let wm = w.matrix();
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..4 {
        for j in 0..4 {
            acc = acc + wm[i][j] * rho.entries[j][i];
        }
    }
    let scale = w.terms.iter().map(|t| t.0.abs()).fold(T::one(), T::max);
    ensure(acc.im.abs() <= tolerance::<T>(1e-12) * scale, || {
        Error::Validation(format!(
            "Tr(Wρ) has imaginary part {:e}",
            acc.im.to_f64_lossy()
        ))
    })?;
    Ok(acc.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detectability<T> {
    pub detectable: bool,
    /// Φ_eff/2 − γ·t_int
    pub margin: T,
    /// Largest allowed γ·t_int, Φ_eff/2.
    pub threshold: T,
}

/// Witnessable iff γ·t_int < Φ_eff/2.
pub fn detectability<T: Real>(phi_eff: T, gamma: T, t_int: T) -> Result<Detectability<T>> {
    ensure(phi_eff >= T::zero(), || {
        Error::Domain("Φ_eff must be non-negative".into())
    })?;
    let threshold = phi_eff * T::lit(0.5);
    let margin = threshold - gamma * t_int;
    Ok(Detectability {
        detectable: margin > T::zero(),
        margin,
        threshold,
    })
}

/// γt at which Tr(Wρ) crosses zero for the state with the given phases.
pub fn witness_root<T: Real>(
    dphi_ud: T,
    dphi_du: T,
    model: DephasingModel,
    w: &WitnessOperator<T>,
) -> Result<T> {
    let state = entangled_state(dphi_ud, dphi_du);
    let f = |gt: T| dephase(&state, gt, model).and_then(|rho| expectation(&rho, w));
    ensure(f(T::zero())? < T::zero(), || {
        Error::NoSolution("the undephased state is not witnessed".into())
    })?;
    let mut lo = T::zero();
    let mut hi = T::lit(1e-3);
    while f(hi)? < T::zero() {
        lo = hi;
        hi = hi * T::lit(2.0);
        ensure(hi < T::lit(1e3), || {
            Error::NoSolution("witness never turns positive".into())
        })?;
    }
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        if !(mid > lo && mid < hi) {
            break;
        }
        if f(mid)? < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * T::lit(0.5))
}

/// Tr(Wρ(γt)) for each γt in order.
pub fn witness_scan<T: Real>(
    state: &SpinState<T>,
    gamma_ts: &[T],
    model: DephasingModel,
    w: &WitnessOperator<T>,
) -> Result<Vec<(T, T)>> {
    gamma_ts
        .iter()
        .map(|&gt| Ok((gt, expectation(&dephase(state, gt, model)?, w)?)))
        .collect()
}

/// `gamma_t,trace_W_rho` with a header row.
pub fn write_scan_csv<T: Real, W: Write>(rows: &[(T, T)], mut out: W) -> io::Result<()> {
    writeln!(out, "gamma_t,trace_W_rho")?;
    for (gt, tr) in rows {
        writeln!(out, "{gt:.16e},{tr:.16e}")?;
    }
    Ok(())
}
