//! Truncated Fock-space model of the Pöschl-Teller ladder algebra.
//!
//! Units: `hbar = 2m = 1` with the `1/a^2` energy scale folded into the
//! spectrum, so `e_n = n (n + kappa + kappa')`. The ladder operators carry the
//! phase convention
//!
//! ```text
//! a+ |n> = sqrt((n+1)(n+1+s)) e^{-i alpha (2n+1+s)} |n+1>
//! a- |n> = sqrt(n (n+s))      e^{+i alpha (2n-1+s)} |n-1>
//! ```
//!
//! with `s = kappa + kappa'`, which makes `a+ a- = H` and `[a-, a+] = G`.

use crate::error::{domain, Error, Result};
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Above this estimated truncated mass a state is flagged as under-truncated.
pub const TAIL_WARN: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    pub kappa: f64,
    pub kappap: f64,
    /// Half-width scale of the well `(0, pi a)`.
    pub a: f64,
    /// Phase parameter of the ladder operators.
    pub alpha: f64,
}

impl PotentialParams {
    pub fn new(kappa: f64, kappap: f64, a: f64, alpha: f64) -> Result<Self> {
        let p = PotentialParams { kappa, kappap, a, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 1.0) || !self.kappa.is_finite() {
            return domain(format!("kappa must be > 1 (got {})", self.kappa));
        }
        if !(self.kappap > 1.0) || !self.kappap.is_finite() {
            return domain(format!("kappap must be > 1 (got {})", self.kappap));
        }
        if !(self.a > 0.0) || !self.a.is_finite() {
            return domain(format!("a must be > 0 (got {})", self.a));
        }
        if !self.alpha.is_finite() {
            return domain(format!("alpha must be finite (got {})", self.alpha));
        }
        Ok(())
    }

    /// `kappa + kappa'`.
    pub fn s(&self) -> f64 {
        self.kappa + self.kappap
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        PotentialParams { alpha, ..*self }
    }
}

/// `e_n = n (n + kappa + kappa')`.
pub fn energy(params: &PotentialParams, n: usize) -> f64 {
    let n = n as f64;
    n * (n + params.s())
}

/// Coefficient of `|n+1>` in `a+ |n>`.
pub fn ladder_up_amplitude(params: &PotentialParams, n: usize) -> C64 {
    let s = params.s();
    let nf = n as f64;
    let modulus = ((nf + 1.0) * (nf + 1.0 + s)).sqrt();
    C64::from_polar(modulus, -params.alpha * ((2 * n + 1) as f64 + s))
}

/// Coefficient of `|n-1>` in `a- |n>`; zero for the ground state.
pub fn ladder_down_amplitude(params: &PotentialParams, n: usize) -> C64 {
    if n == 0 {
        return C64::new(0.0, 0.0);
    }
    let s = params.s();
    let nf = n as f64;
    let modulus = (nf * (nf + s)).sqrt();
    C64::from_polar(modulus, params.alpha * ((2 * n - 1) as f64 + s))
}

/// Eigenvalue of `G = [a-, a+] = 2N + kappa + kappa' + 1` on `|n>`.
pub fn g_value(params: &PotentialParams, n: usize) -> f64 {
    2.0 * n as f64 + params.s() + 1.0
}

/// Truncated Fock-space expansion `sum_n c_n |psi_n>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub coeffs: Vec<C64>,
    pub params: PotentialParams,
    /// Upper estimate of the probability mass beyond the last retained level.
    pub tail_bound: f64,
}

impl StateVector {
    pub fn new(params: PotentialParams, coeffs: Vec<C64>, tail_bound: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return domain("a state needs at least one coefficient");
        }
        Ok(StateVector { coeffs, params, tail_bound })
    }

    /// `|psi_n>` in a `dim`-level space.
    pub fn basis(params: PotentialParams, n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return domain(format!("basis index {n} outside dimension {dim}"));
        }
        let mut coeffs = vec![C64::new(0.0, 0.0); dim];
        coeffs[n] = C64::new(1.0, 0.0);
        StateVector::new(params, coeffs, 0.0)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `1 - sum |c_n|^2`.
    pub fn normalization_deficit(&self) -> f64 {
        1.0 - self.norm_sqr()
    }

    pub fn under_truncated(&self) -> bool {
        !(self.tail_bound <= TAIL_WARN)
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum())
    }

    /// Exact coefficient-level evolution `c_n -> e^{-i e_n t} c_n`.
    pub fn evolved(&self, t: f64) -> StateVector {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c * C64::from_polar(1.0, -energy(&self.params, n) * t))
            .collect();
        StateVector { coeffs, params: self.params, tail_bound: self.tail_bound }
    }

    pub fn as_array(&self) -> Array1<C64> {
        Array1::from(self.coeffs.clone())
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OperatorLabel {
    AMinus,
    APlus,
    H,
    N,
    G,
    W,
    P,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    pub label: OperatorLabel,
    pub entries: Array2<C64>,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn apply(&self, state: &StateVector) -> Result<Array1<C64>> {
        check_dim(self.dim(), state.dim())?;
        Ok(self.entries.dot(&state.as_array()))
    }
}

/// The dense operator matrices of one truncation.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub a_minus: OperatorMatrix,
    pub a_plus: OperatorMatrix,
    pub h: OperatorMatrix,
    pub n: OperatorMatrix,
    pub g: OperatorMatrix,
    pub w: OperatorMatrix,
    pub p: OperatorMatrix,
}

impl OperatorSet {
    pub fn get(&self, label: OperatorLabel) -> &OperatorMatrix {
        match label {
            OperatorLabel::AMinus => &self.a_minus,
            OperatorLabel::APlus => &self.a_plus,
            OperatorLabel::H => &self.h,
            OperatorLabel::N => &self.n,
            OperatorLabel::G => &self.g,
            OperatorLabel::W => &self.w,
            OperatorLabel::P => &self.p,
        }
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }
}

/// Builds `a-`, `a+`, `H`, `N`, `G`, `W`, `P` on the first `dim` levels.
///
/// `a+` is filled from [`ladder_up_amplitude`] independently of `a-`, so the
/// adjoint relation between them is a checkable property, not a construction.
pub fn build_matrices(params: &PotentialParams, dim: usize) -> Result<OperatorSet> {
    if dim < 2 {
        return domain(format!("operator matrices need dim >= 2, got {dim}"));
    }
    let zero = C64::new(0.0, 0.0);
    let mut am = Array2::from_elem((dim, dim), zero);
    let mut ap = Array2::from_elem((dim, dim), zero);
    for n in 1..dim {
        am[[n - 1, n]] = ladder_down_amplitude(params, n);
        ap[[n, n - 1]] = ladder_up_amplitude(params, n - 1);
    }
    let diag = |f: &dyn Fn(usize) -> f64| {
        let mut m = Array2::from_elem((dim, dim), zero);
        for n in 0..dim {
            m[[n, n]] = C64::new(f(n), 0.0);
        }
        m
    };
    let h = diag(&|n| energy(params, n));
    let number = diag(&|n| n as f64);
    let g = diag(&|n| g_value(params, n));
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let w = (&ap + &am).mapv(|v| v * r);
    let p = (&ap - &am).mapv(|v| v * C64::new(0.0, r));
    let op = |label, entries| OperatorMatrix { label, entries };
    Ok(OperatorSet {
        a_minus: op(OperatorLabel::AMinus, am),
        a_plus: op(OperatorLabel::APlus, ap),
        h: op(OperatorLabel::H, h),
        n: op(OperatorLabel::N, number),
        g: op(OperatorLabel::G, g),
        w: op(OperatorLabel::W, w),
        p: op(OperatorLabel::P, p),
    })
}

/// `<state|op|state>`.
pub fn expectation(state: &StateVector, op: &OperatorMatrix) -> Result<C64> {
    let v = state.as_array();
    let mv = op.apply(state)?;
    Ok(v.iter().zip(mv.iter()).map(|(a, b)| a.conj() * b).sum())
}

/// Second moments of the hermitian pair `W`, `P` and the terms of the
/// Robertson-Schrödinger relation `dW2 dP2 >= (<G>^2 + <F>^2) / 4`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Variances {
    pub dw2: f64,
    pub dp2: f64,
    pub mean_g: f64,
    /// `<{W - <W>, P - <P>}>`.
    pub mean_f: f64,
    pub mean_w: f64,
    pub mean_p: f64,
    /// Set when the state's tail bound exceeds [`TAIL_WARN`].
    pub warning: Option<String>,
}

impl Variances {
    /// `dW2 dP2 - (<G>^2 + <F>^2)/4`; non-negative for every state.
    pub fn rs_residual(&self) -> f64 {
        self.dw2 * self.dp2 - 0.25 * (self.mean_g * self.mean_g + self.mean_f * self.mean_f)
    }

    /// `Delta = sqrt(<G>^2 + <F>^2) / 2`.
    pub fn delta(&self) -> f64 {
        0.5 * self.mean_g.hypot(self.mean_f)
    }
}

pub fn variance_pair(state: &StateVector) -> Result<Variances> {
    let ops = build_matrices(&state.params, state.dim())?;
    variance_pair_with(state, &ops)
}

/// Same as [`variance_pair`] with prebuilt matrices. Uses
/// `<W^2> = |W c|^2` and `<WP + PW> = 2 Re <Wc|Pc>`, exact for hermitian `W`, `P`.
pub fn variance_pair_with(state: &StateVector, ops: &OperatorSet) -> Result<Variances> {
    let c = state.as_array();
    let wc = ops.w.apply(state)?;
    let pc = ops.p.apply(state)?;
    let dot = |a: &Array1<C64>, b: &Array1<C64>| -> C64 { a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum() };
    let mean_w = dot(&c, &wc).re;
    let mean_p = dot(&c, &pc).re;
    let w2 = dot(&wc, &wc).re;
    let p2 = dot(&pc, &pc).re;
    let wp = dot(&wc, &pc).re;
    let mean_g = expectation(state, &ops.g)?.re;
    let warning = state
        .under_truncated()
        .then(|| format!("state tail bound {:e} exceeds {:e}", state.tail_bound, TAIL_WARN));
    Ok(Variances {
        dw2: w2 - mean_w * mean_w,
        dp2: p2 - mean_p * mean_p,
        mean_g,
        mean_f: 2.0 * wp - 2.0 * mean_w * mean_p,
        mean_w,
        mean_p,
        warning,
    })
}
