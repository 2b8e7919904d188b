//! Numerical checks of the interpolation, anisotropic Sobolev and Besov
//! embedding inequalities on generated field families.
//!
//! Each check returns both sides without any constant. Ratios are
//! reported as empirical constants and never compared against a bound.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::littlewood_paley::{besov_norm, BesovParams, Components, DyadicPartition};
use crate::spectral::{lp_norm, partial_derivative, Axis, Grid, LpNorm, SpectralScalarField};

/// Which inequality a report belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Lemma {
    /// `‖f‖_{L^p} ≤ C ‖f‖^{1-θ}_{Ḃ^{-α}_{∞,∞}} ‖f‖^θ_{Ḃ^β_{q,q}}`
    Interpolation,
    /// `‖f‖_{L^μ} ≤ C ‖∂₁f‖^{1/3}_{L^θ} ‖∂₂f‖^{1/3}_{L^λ} ‖∂₃f‖^{1/3}_{L^κ}`
    Anisotropic,
    /// `‖f‖_{Ḃ^{-r}_{∞,∞}} ≤ C ‖f‖_{L^{3/r}}`
    Embedding,
}

impl Lemma {
    pub fn id(self) -> &'static str {
        match self {
            Lemma::Interpolation => "interpolation",
            Lemma::Anisotropic => "anisotropic",
            Lemma::Embedding => "embedding",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LemmaParams {
    Interpolation { alpha: f64, p: f64, q: f64, theta: f64, beta: f64 },
    Anisotropic { mu: f64, theta: f64, lambda: f64, kappa: f64 },
    Embedding { r: f64 },
}

impl fmt::Display for LemmaParams {
    /// `name=value` pairs joined by `;` so the field stays one CSV cell.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LemmaParams::Interpolation { alpha, p, q, theta, beta } => {
                write!(f, "alpha={alpha};p={p};q={q};theta={theta};beta={beta}")
            }
            LemmaParams::Anisotropic { mu, theta, lambda, kappa } => {
                write!(f, "mu={mu};theta={theta};lambda={lambda};kappa={kappa}")
            }
            LemmaParams::Embedding { r } => write!(f, "r={r}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InequalityReport {
    pub lemma: Lemma,
    pub params: LemmaParams,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`; 0 when both vanish and `∞` when only `rhs` does.
    pub ratio: f64,
    /// `rhs == 0`, so the ratio carries no information.
    pub degenerate: bool,
    pub descriptor: String,
    pub seed: Option<u64>,
}

impl InequalityReport {
    fn new(lemma: Lemma, params: LemmaParams, lhs: f64, rhs: f64) -> InequalityReport {
        let degenerate = rhs == 0.0;
        let ratio = if !degenerate {
            lhs / rhs
        } else if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        InequalityReport {
            lemma,
            params,
            lhs,
            rhs,
            ratio,
            degenerate,
            descriptor: String::new(),
            seed: None,
        }
    }

    pub fn describe(mut self, descriptor: impl Into<String>, seed: Option<u64>) -> Self {
        self.descriptor = descriptor.into();
        self.seed = seed;
        self
    }

    pub fn csv_row(&self) -> String {
        let seed = self.seed.map(|s| s.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{:.16e},{:.16e},{:.16e}",
            self.lemma.id(),
            self.params,
            seed,
            self.lhs,
            self.rhs,
            self.ratio
        )
    }
}

/// Anisotropic ratio of `sin x₁ sin x₂ sin x₃` at `θ = λ = κ = 2`:
/// `‖f‖_{L⁶} = (5π/8)^{1/2}` against `π^{3/2}`.
pub const TRIPLE_SINE_ANISOTROPIC_RATIO: f64 = 0.2516460605224352;

pub const REPORT_CSV_HEADER: &str = "lemma,params,seed,lhs,rhs,ratio";

fn positive_finite(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

fn require_mean_free(f: &SpectralScalarField) -> Result<()> {
    let scale = f.max_abs_coeff();
    if f.coeffs()[0].norm() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidParameter(format!(
            "field must be mean-free, mean is {}",
            f.mean()
        )));
    }
    Ok(())
}

/// Interpolation between `Ḃ^{-α}_{∞,∞}` and `Ḃ^β_{q,q}` with `θ = q/p` and
/// `β = α(p/q - 1)`. For `q = 2` the second factor is the `Ḣ^β` norm up to
/// norm equivalence.
pub fn check_interpolation<F>(f: &F, alpha: f64, p: f64, q: f64, partition: &DyadicPartition) -> Result<InequalityReport>
where
    F: LpNorm + Components + ?Sized,
{
    positive_finite("alpha", alpha)?;
    if !(q >= 1.0 && q < p && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("need 1 <= q < p < ∞, got p={p}, q={q}")));
    }
    let theta = q / p;
    let beta = alpha * (p / q - 1.0);
    let lhs = lp_norm(f, p)?;
    let low = besov_norm(f, BesovParams::new(-alpha, f64::INFINITY, f64::INFINITY)?, partition)?;
    let high = besov_norm(f, BesovParams::new(beta, q, q)?, partition)?;
    let rhs = low.powf(1.0 - theta) * high.powf(theta);
    Ok(InequalityReport::new(
        Lemma::Interpolation,
        LemmaParams::Interpolation { alpha, p, q, theta, beta },
        lhs,
        rhs,
    ))
}

/// `μ` from `1 + 3/μ = 1/θ + 1/λ + 1/κ`, after checking the side conditions.
pub fn anisotropic_exponent(theta: f64, lambda: f64, kappa: f64) -> Result<f64> {
    for (name, v) in [("theta", theta), ("lambda", lambda), ("kappa", kappa)] {
        if !(v.is_finite() && v >= 1.0) {
            return Err(Error::InvalidParameter(format!("{name} must lie in [1, ∞), got {v}")));
        }
    }
    let s = 1.0 / theta + 1.0 / lambda + 1.0 / kappa;
    if s <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "need 1/theta + 1/lambda + 1/kappa > 1, got {s}"
        )));
    }
    Ok(3.0 / (s - 1.0))
}

/// Anisotropic Sobolev inequality for a mean-free scalar field; gradient
/// norms cannot see the mean on the torus.
pub fn check_anisotropic(f: &SpectralScalarField, theta: f64, lambda: f64, kappa: f64) -> Result<InequalityReport> {
    let mu = anisotropic_exponent(theta, lambda, kappa)?;
    require_mean_free(f)?;
    let lhs = lp_norm(f, mu)?;
    let mut rhs = 1.0;
    for (axis, e) in Axis::ALL.into_iter().zip([theta, lambda, kappa]) {
        rhs *= lp_norm(&partial_derivative(f, axis), e)?.powf(1.0 / 3.0);
    }
    Ok(InequalityReport::new(
        Lemma::Anisotropic,
        LemmaParams::Anisotropic { mu, theta, lambda, kappa },
        lhs,
        rhs,
    ))
}

/// `‖f‖_{Ḃ^{-r}_{∞,∞}}` against `‖f‖_{L^{3/r}}`.
pub fn check_embedding<F>(f: &F, r: f64, partition: &DyadicPartition) -> Result<InequalityReport>
where
    F: LpNorm + Components + ?Sized,
{
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter(format!("r must satisfy 0<r<1, got {r}")));
    }
    let lhs = besov_norm(f, BesovParams::new(-r, f64::INFINITY, f64::INFINITY)?, partition)?;
    let rhs = lp_norm(f, 3.0 / r)?;
    Ok(InequalityReport::new(Lemma::Embedding, LemmaParams::Embedding { r }, lhs, rhs))
}

/// Mean-free real field with `|f̂(k)| = |k|^slope` for `0 < |k| ≤ kmax` and
/// seeded phases. `slope = -∞` keeps only the shell `kmax - 1 < |k| ≤ kmax`
/// with unit magnitudes.
///
/// Modes are visited in an order that depends only on `kmax`, so the same
/// seed gives the same function on every grid that resolves it.
pub fn random_bandlimited_field(grid: &Arc<Grid>, seed: u64, slope: f64, kmax: usize) -> Result<SpectralScalarField> {
    if kmax == 0 || kmax > grid.dealias_cutoff() {
        return Err(Error::InvalidParameter(format!(
            "kmax must lie in 1..={} on an n={} grid, got {kmax}",
            grid.dealias_cutoff(),
            grid.n()
        )));
    }
    if slope.is_nan() || slope == f64::INFINITY {
        return Err(Error::InvalidParameter(format!("invalid spectrum slope {slope}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::default(); grid.len()];
    let km = kmax as i64;
    let kmax_sq = km * km;
    let shell_sq = (km - 1) * (km - 1);
    for k3 in 0..=km {
        for k2 in -km..=km {
            for k1 in -km..=km {
                let canonical = k3 > 0 || (k3 == 0 && (k2 > 0 || (k2 == 0 && k1 > 0)));
                let ksq = k1 * k1 + k2 * k2 + k3 * k3;
                if !canonical || ksq > kmax_sq {
                    continue;
                }
                let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let amp = if slope == f64::NEG_INFINITY {
                    if ksq > shell_sq {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    (ksq as f64).powf(0.5 * slope)
                };
                let c = Complex64::from_polar(amp, phase);
                let at = |a: i64, b: i64, d: i64| {
                    grid.flat_index(
                        grid.index_of(a).unwrap(),
                        grid.index_of(b).unwrap(),
                        grid.index_of(d).unwrap(),
                    )
                };
                coeffs[at(k1, k2, k3)] = c;
                coeffs[at(-k1, -k2, -k3)] = c.conj();
            }
        }
    }
    SpectralScalarField::from_coeffs(grid, coeffs)
}

/// Distribution of ratios over the non-degenerate reports of one family.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilySummary {
    pub count: usize,
    pub degenerate: usize,
    pub max: f64,
    pub median: f64,
    pub min: f64,
    /// Every non-degenerate ratio is finite.
    pub all_finite: bool,
}

pub fn summarize(reports: &[InequalityReport]) -> FamilySummary {
    let mut ratios: Vec<f64> = reports.iter().filter(|r| !r.degenerate).map(|r| r.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let median = match ratios.len() {
        0 => f64::NAN,
        l if l % 2 == 1 => ratios[l / 2],
        l => 0.5 * (ratios[l / 2 - 1] + ratios[l / 2]),
    };
    FamilySummary {
        count: reports.len(),
        degenerate: reports.len() - ratios.len(),
        max: ratios.last().copied().unwrap_or(f64::NAN),
        median,
        min: ratios.first().copied().unwrap_or(f64::NAN),
        all_finite: ratios.iter().all(|r| r.is_finite()),
    }
}

/// Generation parameters for a seeded family of band-limited fields.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilySpec {
    pub first_seed: u64,
    pub size: usize,
    pub slope: f64,
    pub kmax: usize,
}

impl FamilySpec {
    /// Runs `check` on every member, in parallel, returning reports in seed order.
    pub fn run<C>(&self, grid: &Arc<Grid>, check: C) -> Result<Vec<InequalityReport>>
    where
        C: Fn(&SpectralScalarField) -> Result<InequalityReport> + Sync,
    {
        (0..self.size as u64)
            .into_par_iter()
            .map(|i| {
                let seed = self.first_seed + i;
                let f = random_bandlimited_field(grid, seed, self.slope, self.kmax)?;
                let descriptor = format!("bandlimited(slope={},kmax={},n={})", self.slope, self.kmax, grid.n());
                Ok(check(&f)?.describe(descriptor, Some(seed)))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::littlewood_paley::{build_partition, sobolev_norm};
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn interpolation_parameters_follow_the_side_conditions() {
        let g = make_grid(32).unwrap();
        let part = build_partition(&g);
        let f = random_bandlimited_field(&g, 1, -1.0, 6).unwrap();
        for r in [0.2, 0.5, 0.8] {
            let rep = check_interpolation(&f, r, 4.0, 2.0, &part).unwrap();
            let LemmaParams::Interpolation { theta, beta, .. } = rep.params else { panic!() };
            assert_eq!(theta, 0.5);
            assert!((beta - r).abs() < 1e-15);
            assert!(rep.ratio.is_finite() && rep.ratio > 0.0);
        }
        assert!(check_interpolation(&f, 0.5, 2.0, 2.0, &part).is_err());
        assert!(check_interpolation(&f, 0.0, 4.0, 2.0, &part).is_err());
        assert!(check_interpolation(&f, 0.5, 4.0, 0.5, &part).is_err());
    }

    #[test]
    fn zero_field_reports() {
        let g = make_grid(16).unwrap();
        let part = build_partition(&g);
        let z = SpectralScalarField::zeros(&g);
        let a = check_interpolation(&z, 0.5, 4.0, 2.0, &part).unwrap();
        assert_eq!((a.lhs, a.rhs, a.ratio), (0.0, 0.0, 0.0));
        let e = check_embedding(&z, 0.5, &part).unwrap();
        assert!(e.degenerate && e.ratio == 0.0);
    }

    #[test]
    fn anisotropic_exponent_arithmetic() {
        assert_eq!(anisotropic_exponent(2.0, 2.0, 2.0).unwrap(), 6.0);
        // θ = λ = 2 gives μ = 3κ
        for kappa in [1.0, 1.5, 3.0, 10.0] {
            assert!((anisotropic_exponent(2.0, 2.0, kappa).unwrap() - 3.0 * kappa).abs() < 1e-12);
        }
        assert!(anisotropic_exponent(3.0, 3.0, 3.0).is_err());
        assert!(anisotropic_exponent(0.5, 2.0, 2.0).is_err());
        assert!(anisotropic_exponent(2.0, f64::INFINITY, 2.0).is_err());
    }

    #[test]
    fn triple_sine_anisotropic_sides() {
        let g = make_grid(32).unwrap();
        let f = SpectralScalarField::from_fn(&g, |x, y, z| x.sin() * y.sin() * z.sin());
        let rep = check_anisotropic(&f, 2.0, 2.0, 2.0).unwrap();
        assert!((rep.rhs - PI.powf(1.5)).abs() < 1e-12);
        assert!((rep.lhs - (5.0 * PI / 8.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn anisotropic_rejects_mean_and_flags_x3_independence() {
        let g = make_grid(16).unwrap();
        let shifted = SpectralScalarField::from_fn(&g, |x, _, _| 1.0 + x.sin());
        assert!(check_anisotropic(&shifted, 2.0, 2.0, 2.0).is_err());
        let flat = SpectralScalarField::from_fn(&g, |x, y, _| x.sin() * y.cos());
        let rep = check_anisotropic(&flat, 2.0, 2.0, 2.0).unwrap();
        assert!(rep.degenerate);
        assert!(rep.lhs > 0.0);
    }

    #[test]
    fn embedding_of_single_mode() {
        // cos 4x₁ lives in blocks 1 and 2 with weights φ(2), φ(1); each block is
        // a multiple of cos 4x₁, so its sup norm is the weight.
        use crate::littlewood_paley::{RadialProfile, SmoothBump};
        let g = make_grid(32).unwrap();
        let part = build_partition(&g);
        let f = SpectralScalarField::from_fn(&g, |x, _, _| (4.0 * x).cos());
        let r = 0.5;
        let rep = check_embedding(&f, r, &part).unwrap();
        let p = SmoothBump;
        let lhs = (2f64.powf(-r) * p.phi(2.0)).max(2f64.powf(-2.0 * r) * p.phi(1.0));
        // ∫cos⁶ = 5π/8 per period
        let rhs = ((5.0 * PI / 8.0) * (2.0 * PI).powi(2)).powf(1.0 / 6.0);
        assert!((rep.lhs - lhs).abs() < 1e-12);
        assert!((rep.rhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn ratios_are_scale_invariant() {
        let g = make_grid(16).unwrap();
        let part = build_partition(&g);
        let f = random_bandlimited_field(&g, 4, -1.0, 4).unwrap();
        let c = -3.7;
        let pairs = [
            (check_interpolation(&f, 0.5, 4.0, 2.0, &part).unwrap(), check_interpolation(&f.scaled(c), 0.5, 4.0, 2.0, &part).unwrap()),
            (check_anisotropic(&f, 2.0, 2.0, 2.0).unwrap(), check_anisotropic(&f.scaled(c), 2.0, 2.0, 2.0).unwrap()),
            (check_embedding(&f, 0.5, &part).unwrap(), check_embedding(&f.scaled(c), 0.5, &part).unwrap()),
        ];
        for (a, b) in pairs {
            assert!((a.ratio - b.ratio).abs() < 1e-12 * a.ratio, "{:?}", a.lemma);
        }
    }

    #[test]
    fn bandlimited_fields_are_reproducible_and_grid_independent() {
        let g = make_grid(16).unwrap();
        let a = random_bandlimited_field(&g, 9, -2.0, 5).unwrap();
        let b = random_bandlimited_field(&g, 9, -2.0, 5).unwrap();
        assert_eq!(a.coeffs(), b.coeffs());
        assert_eq!(a.mean(), 0.0);
        assert_eq!(a.hermitian_defect(), 0.0);
        let fine = random_bandlimited_field(&make_grid(32).unwrap(), 9, -2.0, 5).unwrap();
        for k in [[1, 0, 0], [2, -3, 1], [0, 0, 5], [-4, 1, -2]] {
            assert_eq!(a.coeff_at(k), fine.coeff_at(k));
        }
        assert!(random_bandlimited_field(&g, 9, -2.0, 6).is_err());
        assert!(random_bandlimited_field(&g, 9, -2.0, 0).is_err());
    }

    #[test]
    fn shell_limit_keeps_one_shell() {
        let g = make_grid(32).unwrap();
        let f = random_bandlimited_field(&g, 2, f64::NEG_INFINITY, 6).unwrap();
        for (idx, c) in f.coeffs().iter().enumerate() {
            let k = g.k_vector(idx);
            let ksq = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            let inside = ksq > 25.0 && ksq <= 36.0;
            assert_eq!(c.norm() > 0.0, inside, "{k:?}");
        }
    }

    #[test]
    fn spectrum_slope_fit() {
        // least-squares slope of log|f̂| against log|k| over shell averages
        let g = make_grid(64).unwrap();
        let f = random_bandlimited_field(&g, 3, -2.0, 16).unwrap();
        let mut shells = vec![(0.0f64, 0usize); 17];
        for (idx, c) in f.coeffs().iter().enumerate() {
            let k = g.k_vector(idx);
            let kn = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
            if c.norm() > 0.0 {
                let s = &mut shells[kn.round() as usize];
                s.0 += c.norm();
                s.1 += 1;
            }
        }
        let pts: Vec<(f64, f64)> = shells
            .iter()
            .enumerate()
            .filter(|(k, s)| *k >= 1 && s.1 > 0)
            .map(|(k, s)| ((k as f64).ln(), (s.0 / s.1 as f64).ln()))
            .collect();
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mx, my) = (sx / n, sy / n);
        let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let den: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = num / den;
        assert!((slope + 2.0).abs() < 0.2, "{slope}");
    }

    #[test]
    fn besov_two_two_tracks_sobolev() {
        // Ḃ^r_{2,2} and Ḣ^r are equivalent norms; the ratio stays in a band.
        let g = make_grid(32).unwrap();
        let part = build_partition(&g);
        for seed in 0..10 {
            let f = random_bandlimited_field(&g, seed, -1.0, 8).unwrap();
            let b = besov_norm(&f, BesovParams::new(0.5, 2.0, 2.0).unwrap(), &part).unwrap();
            let h = sobolev_norm(&f, 0.5);
            assert!(b / h > 0.5 && b / h < 1.5, "{}", b / h);
        }
    }

    #[test]
    fn family_summary_statistics() {
        let g = make_grid(16).unwrap();
        let part = build_partition(&g);
        let spec = FamilySpec {
            first_seed: 10,
            size: 7,
            slope: -1.0,
            kmax: 4,
        };
        let reps = spec.run(&g, |f| check_embedding(f, 0.5, &part)).unwrap();
        assert_eq!(reps.len(), 7);
        assert_eq!(reps[3].seed, Some(13));
        let s = summarize(&reps);
        assert!(s.all_finite && s.min <= s.median && s.median <= s.max);
        let bigger = FamilySpec { size: 12, ..spec }.run(&g, |f| check_embedding(f, 0.5, &part)).unwrap();
        assert!(summarize(&bigger).max >= s.max);
    }

    #[test]
    fn report_row_format() {
        let rep = InequalityReport::new(Lemma::Embedding, LemmaParams::Embedding { r: 0.5 }, 1.0, 4.0).describe("x", Some(3));
        assert_eq!(rep.csv_row(), "embedding,r=0.5,3,1.0000000000000000e0,4.0000000000000000e0,2.5000000000000000e-1");
    }
}
