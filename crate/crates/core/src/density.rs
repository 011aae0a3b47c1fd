//! Dense density matrices over the same labeled bases as [`PureState`].

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{Amplitude, BasisLabel, ModeLabel, PureState, StateKind};

/// Hermiticity, trace and positivity tolerance.
pub const DENSITY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityRepr", into = "DensityRepr")]
pub struct DensityMatrix {
    basis: Vec<BasisLabel>,
    matrix: Vec<Vec<Amplitude>>,
}

impl DensityMatrix {
    /// Validates shape, a single basis kind, distinct labels, Hermiticity,
    /// unit trace and positive semidefiniteness. The basis is brought into
    /// canonical order, permuting the matrix with it.
    pub fn new(basis: Vec<BasisLabel>, matrix: Vec<Vec<Amplitude>>) -> Result<Self> {
        let n = basis.len();
        if n == 0 {
            return Err(Error::InvalidDensity("empty basis".into()));
        }
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidDensity(format!("matrix is not {n}x{n}")));
        }
        if basis.iter().any(|l| l.kind() != basis[0].kind()) {
            return Err(Error::InvalidDensity("mixed basis kinds".into()));
        }
        if matrix.iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidDensity("non-finite entry".into()));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| basis[a].cmp(&basis[b]));
        let sorted_basis: Vec<BasisLabel> = order.iter().map(|&k| basis[k].clone()).collect();
        if sorted_basis.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidDensity("duplicate basis label".into()));
        }
        let sorted: Vec<Vec<Amplitude>> = order
            .iter()
            .map(|&r| order.iter().map(|&c| matrix[r][c]).collect())
            .collect();
        let rho = DensityMatrix {
            basis: sorted_basis,
            matrix: sorted,
        };
        rho.validate()?;
        Ok(rho)
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        for r in 0..n {
            for c in 0..n {
                let skew = (self.matrix[r][c] - self.matrix[c][r].conj()).norm();
                if skew > DENSITY_TOLERANCE {
                    return Err(Error::InvalidDensity(format!(
                        "not Hermitian at ({r}, {c}): deviation {skew:e}"
                    )));
                }
            }
        }
        let trace = self.trace();
        if (trace - 1.0).norm() > DENSITY_TOLERANCE {
            return Err(Error::InvalidDensity(format!("trace {trace} != 1")));
        }
        if let Some(low) = self.eigenvalues().into_iter().find(|&e| e < -DENSITY_TOLERANCE) {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {low:e}")));
        }
        Ok(())
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(state: &PureState) -> Self {
        let basis: Vec<BasisLabel> = state.basis().cloned().collect();
        let amps: Vec<Amplitude> = state.entries().iter().map(|(_, a)| *a).collect();
        let matrix = amps
            .iter()
            .map(|a| amps.iter().map(|b| a * b.conj()).collect())
            .collect();
        DensityMatrix { basis, matrix }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisLabel] {
        &self.basis
    }

    pub fn kind(&self) -> StateKind {
        self.basis[0].kind()
    }

    pub fn element(&self, row: &BasisLabel, col: &BasisLabel) -> Option<Amplitude> {
        let r = self.index_of(row)?;
        let c = self.index_of(col)?;
        Some(self.matrix[r][c])
    }

    pub fn matrix(&self) -> &[Vec<Amplitude>] {
        &self.matrix
    }

    fn index_of(&self, label: &BasisLabel) -> Option<usize> {
        self.basis.binary_search(label).ok()
    }

    pub fn trace(&self) -> Amplitude {
        (0..self.dim()).map(|k| self.matrix[k][k]).sum()
    }

    /// Traces out the idler, summing `ρ[(a,m)][(b,m)]` over idler labels `m`
    /// for every pair of signal labels `(a, b)`.
    pub fn partial_trace_idler(&self) -> Result<DensityMatrix> {
        if self.kind() != StateKind::TwoPhoton {
            return Err(Error::NotTwoPhoton);
        }
        let signals: Vec<&ModeLabel> = self
            .basis
            .iter()
            .map(BasisLabel::signal)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let idlers: BTreeSet<&ModeLabel> = self.basis.iter().filter_map(BasisLabel::idler).collect();
        let zero = Amplitude::new(0.0, 0.0);
        let mut reduced = vec![vec![zero; signals.len()]; signals.len()];
        for (r, a) in signals.iter().enumerate() {
            for (c, b) in signals.iter().enumerate() {
                for m in &idlers {
                    let row = BasisLabel::pair((*a).clone(), (*m).clone());
                    let col = BasisLabel::pair((*b).clone(), (*m).clone());
                    if let Some(z) = self.element(&row, &col) {
                        reduced[r][c] += z;
                    }
                }
            }
        }
        Ok(DensityMatrix {
            basis: signals.into_iter().map(|m| BasisLabel::Single(m.clone())).collect(),
            matrix: reduced,
        })
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    /// Probability that a detector on `mode` fires: the sum of diagonal
    /// entries whose label contains `mode`.
    pub fn detection_probability(&self, mode: &ModeLabel) -> Result<f64> {
        let mut hit = false;
        let mut p = 0.0;
        for (k, label) in self.basis.iter().enumerate() {
            if label.contains(mode) {
                hit = true;
                p += self.matrix[k][k].re;
            }
        }
        if hit {
            Ok(p)
        } else {
            Err(Error::UnknownMode(mode.clone()))
        }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }
}

/// `|⟨1_s ⊗ 1_i|ψ⟩|²` for a two-photon state.
pub fn coincidence_probability(
    state: &PureState,
    signal_mode: &ModeLabel,
    idler_mode: &ModeLabel,
) -> Result<f64> {
    if state.kind() != StateKind::TwoPhoton {
        return Err(Error::NotTwoPhoton);
    }
    if !state.signal_modes().contains(signal_mode) {
        return Err(Error::UnknownMode(signal_mode.clone()));
    }
    if !state.idler_modes().contains(idler_mode) {
        return Err(Error::UnknownMode(idler_mode.clone()));
    }
    let label = BasisLabel::pair(signal_mode.clone(), idler_mode.clone());
    Ok(state.amplitude(&label).map_or(0.0, |a| a.norm_sqr()))
}

/// Eigenvalues of a Hermitian matrix `H = A + iB` via cyclic Jacobi on the
/// real symmetric embedding `[[A, −B], [B, A]]`, whose spectrum is that of
/// `H` with every eigenvalue doubled.
fn hermitian_eigenvalues(h: &[Vec<Amplitude>]) -> Vec<f64> {
    let n = h.len();
    let m = 2 * n;
    let mut a = vec![vec![0.0; m]; m];
    for r in 0..n {
        for c in 0..n {
            let z = h[r][c];
            a[r][c] = z.re;
            a[r + n][c + n] = z.re;
            a[r][c + n] = -z.im;
            a[r + n][c] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m)
            .flat_map(|r| (0..m).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[r][c] * a[r][c])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cos = 1.0 / (t * t + 1.0).sqrt();
                let sin = t * cos;
                for k in 0..m {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cos * akp - sin * akq;
                    a[k][q] = sin * akp + cos * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cos * apk - sin * aqk;
                    a[q][k] = sin * apk + cos * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..m).map(|k| a[k][k]).collect();
    eig.sort_by(f64::total_cmp);
    eig.into_iter().step_by(2).collect()
}

#[derive(Serialize, Deserialize)]
struct DensityRepr {
    basis: Vec<String>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl From<DensityMatrix> for DensityRepr {
    fn from(rho: DensityMatrix) -> Self {
        DensityRepr {
            basis: rho.basis.iter().map(ToString::to_string).collect(),
            re: rho.matrix.iter().map(|row| row.iter().map(|z| z.re).collect()).collect(),
            im: rho.matrix.iter().map(|row| row.iter().map(|z| z.im).collect()).collect(),
        }
    }
}

impl TryFrom<DensityRepr> for DensityMatrix {
    type Error = Error;

    fn try_from(repr: DensityRepr) -> Result<Self> {
        let basis = repr
            .basis
            .iter()
            .map(|s| BasisLabel::parse(s))
            .collect::<Result<Vec<_>>>()?;
        if repr.re.len() != repr.im.len()
            || repr.re.iter().zip(&repr.im).any(|(a, b)| a.len() != b.len())
        {
            return Err(Error::Parse("re/im shapes differ".into()));
        }
        let matrix = repr
            .re
            .iter()
            .zip(&repr.im)
            .map(|(r, i)| r.iter().zip(i).map(|(&x, &y)| Amplitude::new(x, y)).collect())
            .collect();
        DensityMatrix::new(basis, matrix)
    }
}
