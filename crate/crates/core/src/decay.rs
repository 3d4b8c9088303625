//! Decay of iterated transfer operators in `b`-weighted Lipschitz norms,
//! Lasota–Yorke and cone checks, and the lattice diagnostic.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, spectral_radius};
use crate::potential::{seminorm, PairScope, Potential, Roof};
use crate::sft::{common_prefix_len, d_metric_words, primitive_classes, SymbolicMetric, WordTable};
use crate::transfer::{leading_eigendata_complex, normalize, solve_pf, NormalizedPotential, OperatorFamily, TrackOptions};

/// Deterministic test functions on one word table.
#[derive(Clone, Debug)]
pub struct TestBank {
    table: Arc<WordTable>,
    pub functions: Vec<Vec<Complex64>>,
}

impl TestBank {
    /// The constant 1, the first-symbol indicators, then seeded random
    /// tables `h(u) = Σ_j θ^j ξ_j(u_j)`, which are Lipschitz in `d_θ`.
    pub fn new(table: Arc<WordTable>, size: usize, seed: u64, theta: f64) -> Self {
        let n = table.size();
        let k = table.spec().k();
        let mut functions = vec![vec![Complex64::new(1.0, 0.0); n]];
        for i in 0..k {
            functions.push(
                table.words().iter().map(|w| Complex64::new(f64::from(u8::from(w.symbols()[0] as usize == i)), 0.0)).collect(),
            );
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = table.word_len();
        while functions.len() < size {
            let xi: Vec<Vec<Complex64>> = (0..len)
                .map(|_| (0..k).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
                .collect();
            functions.push(
                table
                    .words()
                    .iter()
                    .map(|w| w.symbols().iter().enumerate().map(|(j, &s)| xi[j][s as usize] * theta.powi(j as i32)).sum())
                    .collect(),
            );
        }
        TestBank { table, functions }
    }

    pub fn table(&self) -> &Arc<WordTable> {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
}

/// `‖h‖_{Lip,b} = ‖h‖∞ + Lip(h)/max(|b|, 1)` over same-rectangle pairs.
pub fn lip_b_norm(table: &WordTable, h: &[Complex64], b: f64, metric: &SymbolicMetric) -> f64 {
    let sup = h.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    sup + seminorm(table, h, 1.0, metric, PairScope::SameSymbol, |x, y| (x - y).norm()) / b.abs().max(1.0)
}

/// Which parameter regime a decay grid belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    /// `|w| ≤ B|b|^ν`, `|b| ≥ b₀`.
    BLeading,
    /// `|b| ≤ B|w|`, `|w| ≥ w₀`.
    WLeading,
    LatticeControl,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub kind: RegimeKind,
    pub big_b: f64,
    pub nu: f64,
    pub threshold: f64,
    /// Points `(a, b, c, w)`.
    pub grid: Vec<[f64; 4]>,
}

impl RegimeSpec {
    pub fn validate(&self) -> Result<()> {
        for p in &self.grid {
            let [_, b, _, w] = *p;
            let ok = match self.kind {
                RegimeKind::BLeading => b.abs() >= self.threshold && w.abs() <= self.big_b * b.abs().powf(self.nu),
                RegimeKind::WLeading => w.abs() >= self.threshold && b.abs() <= self.big_b * w.abs(),
                RegimeKind::LatticeControl => true,
            };
            if !ok {
                return Err(Error::InvalidParameter(format!("grid point {p:?} violates the {:?} regime", self.kind)));
            }
        }
        Ok(())
    }
}

/// Norm sequence and log-linear fit at one grid point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointFit {
    pub point: [f64; 4],
    /// `R_m = max_h ‖Lᵐh‖_{Lip,b} / ‖h‖_{Lip,b}` for `m = 1..=m_max`.
    pub norms: Vec<f64>,
    pub rho: f64,
    pub c: f64,
    pub residual: f64,
    /// Leading eigenvalue modulus of the same operator.
    pub spectral_radius: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayFit {
    pub points: Vec<PointFit>,
    pub rho_sup: f64,
    /// Exponent of `C_b ∝ |b|^ε`, when at least two distinct `|b| ≥ 1` occur.
    pub eps: Option<f64>,
}

/// Least-squares line through `(x, y)`: `(slope, intercept, rms residual)`.
pub fn linear_fit(pts: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Some((slope, icpt, rms))
}

/// Fits `R_m ≈ C ρ^m` on `m ≥ 3`, skipping values below `1e-12`.
pub fn fit_decay(norms: &[f64]) -> (f64, f64, f64) {
    let pts: Vec<(f64, f64)> = norms
        .iter()
        .enumerate()
        .map(|(i, &r)| ((i + 1) as f64, r))
        .filter(|&(m, r)| m >= 3.0 && r > 1e-12)
        .map(|(m, r)| (m, r.ln()))
        .collect();
    match linear_fit(&pts) {
        Some((slope, icpt, rms)) => (slope.exp(), icpt.exp(), rms),
        None => (0.0, 0.0, 0.0),
    }
}

/// Normalized operator family `L_{f₀ − sτ + zg}` with `f₀` the normalization
/// of `f − P_f τ`.
#[derive(Clone, Debug)]
pub struct DecaySetup {
    pub normalized: NormalizedPotential,
    pub family: OperatorFamily,
}

impl DecaySetup {
    pub fn new(f: &Potential, tau: &Roof, g: &Potential, depth: usize) -> Result<Self> {
        let p = solve_pf(f, tau, depth)?.p;
        let normalized = normalize(f, tau, p, depth)?;
        let family = OperatorFamily::new(&normalized.f0, tau, g, depth);
        Ok(DecaySetup { normalized, family })
    }

    pub fn operator_at(&self, point: [f64; 4]) -> crate::linalg::Csr<Complex64> {
        let [a, b, c, w] = point;
        self.family.complex(Complex64::new(a, b), Complex64::new(c, w))
    }

    pub fn spectral_radius(&self, point: [f64; 4]) -> f64 {
        spectral_radius(&self.operator_at(point).to_dense())
    }
}

/// Per-point norm sequences and fits over a regime grid.
pub fn measure_decay(setup: &DecaySetup, regime: &RegimeSpec, m_max: usize, bank: &TestBank, metric: &SymbolicMetric) -> Result<DecayFit> {
    regime.validate()?;
    let table = setup.family.graph().states().clone();
    if bank.table().word_len() != table.word_len() {
        return Err(Error::DimensionMismatch { expected: table.size(), got: bank.table().size() });
    }
    let points: Vec<PointFit> = regime
        .grid
        .par_iter()
        .map(|&point| {
            let m = setup.operator_at(point);
            let b = point[1];
            let mut norms = vec![0.0f64; m_max];
            for h in &bank.functions {
                let base = lip_b_norm(&table, h, b, metric);
                if base == 0.0 {
                    continue;
                }
                let mut x = h.clone();
                for r in norms.iter_mut() {
                    x = m.mul_vec(&x);
                    *r = r.max(lip_b_norm(&table, &x, b, metric) / base);
                }
            }
            let (rho, c, residual) = fit_decay(&norms);
            let spectral_radius = if table.size() <= 1024 { spectral_radius(&m.to_dense()) } else { f64::NAN };
            PointFit { point, norms, rho, c, residual, spectral_radius }
        })
        .collect();
    let rho_sup = points.iter().map(|p| p.rho).fold(0.0, f64::max);
    let eps_pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.point[1].abs() >= 1.0 && p.c > 0.0)
        .map(|p| (p.point[1].abs().ln(), p.c.ln()))
        .collect();
    let eps = linear_fit(&eps_pts).map(|(slope, _, _)| slope);
    Ok(DecayFit { points, rho_sup, eps })
}

/// The shift `g′ = g + dτ` making the variation-to-minimum ratio of `g′/τ`
/// at most `μ̂`, with the parameter remap.
#[derive(Clone, Debug)]
pub struct RatioCondition {
    pub a_min: f64,
    pub l_lip: f64,
    pub mu_hat: f64,
    pub d_shift: f64,
    pub g_shifted: Potential,
}

impl RatioCondition {
    /// `(b, w) ↦ (b + d w, w)`: the operator with `g′` at the new point
    /// equals the one with `g` at the old point.
    pub fn remap(&self, b: f64, w: f64) -> (f64, f64) {
        (b + self.d_shift * w, w)
    }

    pub fn ratio(&self) -> f64 {
        self.l_lip / self.a_min
    }
}

pub fn ratio_condition_apply(g: &Potential, tau: &Roof, mu_hat: f64) -> Result<RatioCondition> {
    if !(mu_hat > 0.0) {
        return Err(Error::InvalidParameter(format!("μ̂ = {mu_hat} must be positive")));
    }
    let depth = g.depth().max(tau.depth());
    let (gl, tl) = (g.lift(depth), tau.lift(depth));
    let r = gl.zip_with(&tl, |a, b| a / b);
    let (lo, hi) = (r.min(), r.max());
    let var = hi - lo;
    let d_shift = if var == 0.0 {
        if lo > 0.0 {
            0.0
        } else {
            1.0 - lo
        }
    } else {
        (var / mu_hat - lo).max(0.0)
    };
    let g_shifted = g.plus(&tau.scaled(d_shift));
    Ok(RatioCondition { a_min: lo + d_shift, l_lip: var, mu_hat, d_shift, g_shifted })
}

/// Decay over `w ∈ w_grid` at `b = 0`, after the ratio shift.
pub fn thm6_regime_sweep(
    f: &Potential,
    tau: &Roof,
    g: &Potential,
    big_b: f64,
    mu_hat: f64,
    w_grid: &[f64],
    depth: usize,
    m_max: usize,
    bank_size: usize,
    seed: u64,
    metric: &SymbolicMetric,
) -> Result<(RatioCondition, DecayFit)> {
    if w_grid.iter().any(|w| w.abs() < 1.0) {
        return Err(Error::InvalidParameter("the w-leading regime needs |w| ≥ 1".into()));
    }
    let rc = ratio_condition_apply(g, tau, mu_hat)?;
    let setup = DecaySetup::new(f, tau, &rc.g_shifted, depth)?;
    let grid = w_grid
        .iter()
        .map(|&w| {
            let (b, w) = rc.remap(0.0, w);
            [0.0, b, 0.0, w]
        })
        .collect();
    let regime = RegimeSpec { kind: RegimeKind::WLeading, big_b, nu: 1.0, threshold: 1.0, grid };
    let bank = TestBank::new(setup.family.graph().states().clone(), bank_size, seed, metric.theta());
    let fit = measure_decay(&setup, &regime, m_max, &bank, metric)?;
    Ok((rc, fit))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConeReport {
    pub member: bool,
    /// `max |h(u) − h(u′)| / (h(u′) D(u,u′))` over same-rectangle pairs.
    pub worst_ratio: f64,
    pub worst_pair: Option<(String, String)>,
}

/// Membership of a positive table in the cone `K_A`.
pub fn cone_membership(table: &WordTable, h: &[f64], a: f64, metric: &SymbolicMetric) -> Result<ConeReport> {
    if h.len() != table.size() {
        return Err(Error::DimensionMismatch { expected: table.size(), got: h.len() });
    }
    if let Some(index) = h.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NonPositive { index });
    }
    let (worst_ratio, pair) = cone_ratio(table, h, metric);
    Ok(ConeReport {
        member: worst_ratio <= a * (1.0 + 1e-12),
        worst_ratio,
        worst_pair: pair.map(|(i, j)| (table.words()[i].to_string(), table.words()[j].to_string())),
    })
}

fn cone_ratio(table: &WordTable, h: &[f64], metric: &SymbolicMetric) -> (f64, Option<(usize, usize)>) {
    let spec = table.spec();
    let words = table.words();
    let mut best = (0.0f64, None);
    for i in 0..words.len() {
        for j in 0..words.len() {
            let l = common_prefix_len(words[i].symbols(), words[j].symbols());
            if i == j || l == 0 {
                continue;
            }
            let d = d_metric_words(spec, metric, words[i].symbols(), l);
            let r = (h[i] - h[j]).abs() / (h[j] * d);
            if r > best.0 {
                best = (r, Some((i, j)));
            }
        }
    }
    best
}

/// Settings for [`lasota_yorke_check`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LyOptions {
    pub a: f64,
    pub c: f64,
    pub t: f64,
    pub m_max: usize,
    pub depth: usize,
    /// `γ̂`; defaults to `θ^{−1/2}`.
    pub gamma_hat: Option<f64>,
    /// Amplitude of the random Lipschitz log-table defining `H`.
    pub amplitude: f64,
    /// Number of leading symbols `H` depends on, so that `H` is the same
    /// function at every working depth `≥ h_depth`.
    pub h_depth: usize,
    pub seed: u64,
}

impl Default for LyOptions {
    fn default() -> Self {
        LyOptions { a: 0.0, c: 0.0, t: 1.0, m_max: 6, depth: 4, gamma_hat: None, amplitude: 0.5, h_depth: 4, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LyRow {
    pub m: usize,
    /// Worst normalized variation of `MᵐH`.
    pub ratio: f64,
    /// The same for `H ≡ 1`.
    pub ratio_one: f64,
    /// `ratio − ratio_one`, the part driven by the cone constant.
    pub e_component: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LyReport {
    pub a0: f64,
    pub e: f64,
    pub gamma_hat: f64,
    pub rows: Vec<LyRow>,
    /// Slope of `log e_component` against `m`.
    pub e_slope: Option<f64>,
    pub e_slope_target: f64,
    pub passed: bool,
}

/// Smallest `A₀ ≥ 0` with `lhs ≤ A₀ (E γ̂^{−m} + e^{A₀ t} t)`.
fn minimal_a0(lhs: f64, e_term: f64, t: f64) -> f64 {
    let phi = |a: f64| a * (e_term + (a * t).exp() * t) - lhs;
    if lhs <= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while phi(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Fits the Lasota–Yorke constant for `M = L_{f_at + c g_t}` acting on a
/// cone function `H` built from a fixed depth-3 log-table.
pub fn lasota_yorke_check(f: &Potential, tau: &Roof, g: &Potential, metric: &SymbolicMetric, opts: &LyOptions) -> Result<LyReport> {
    let gamma_hat = opts.gamma_hat.unwrap_or(1.0 / metric.theta().sqrt());
    if !(gamma_hat > 1.0 && gamma_hat < metric.gamma0()) {
        return Err(Error::InvalidParameter(format!("γ̂ = {gamma_hat} must lie in (1, {})", metric.gamma0())));
    }
    let f_t = f.average_to_depth(opts.t, metric)?.potential;
    let g_t = g.average_to_depth(opts.t, metric)?.potential;
    let p = solve_pf(&f_t, tau, opts.depth)?.p;
    let f_at = normalize(&f_t, tau, p + opts.a, opts.depth)?.f0;
    let m = OperatorFamily::new(&f_at, tau, &g_t, opts.depth).real(0.0, opts.c);
    let table = WordTable::new(f.spec(), opts.depth);
    let theta = metric.theta();
    let k = f.spec().k();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let levels = opts.h_depth.min(opts.depth);
    let xi: Vec<f64> = (0..levels * k).map(|_| opts.amplitude * rng.gen_range(-1.0..1.0)).collect();
    // log H = Σ_j θ^j ξ_j(x_j), Lipschitz for d_θ at every level of the table
    let h: Vec<f64> = table
        .words()
        .iter()
        .map(|w| {
            let log_h: f64 = w.symbols()[..levels].iter().enumerate().map(|(j, &s)| theta.powi(j as i32) * xi[j * k + s as usize]).sum();
            log_h.exp()
        })
        .collect();
    let e = cone_membership(&table, &h, f64::INFINITY, metric)?.worst_ratio;
    let ones = vec![1.0; table.size()];
    let (mut x, mut y) = (h, ones);
    let mut rows = Vec::with_capacity(opts.m_max);
    let mut a0 = 0.0f64;
    for mm in 1..=opts.m_max {
        x = m.mul_vec(&x);
        y = m.mul_vec(&y);
        let ratio = cone_ratio(&table, &x, metric).0;
        let ratio_one = cone_ratio(&table, &y, metric).0;
        let e_term = e / gamma_hat.powi(mm as i32);
        a0 = a0.max(minimal_a0(ratio, e_term, opts.t));
        rows.push(LyRow { m: mm, ratio, ratio_one, e_component: ratio - ratio_one, bound: 0.0 });
    }
    for r in &mut rows {
        r.bound = a0 * (e / gamma_hat.powi(r.m as i32) + (a0 * opts.t).exp() * opts.t);
    }
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.e_component > 1e-14).map(|r| (r.m as f64, r.e_component.ln())).collect();
    let e_slope = linear_fit(&pts).map(|(s, _, _)| s);
    let passed = rows.iter().all(|r| r.ratio <= r.bound * (1.0 + 1e-9));
    Ok(LyReport { a0, e, gamma_hat, rows, e_slope, e_slope_target: -gamma_hat.ln(), passed })
}

/// Leading eigenvalue of `L_{f₀ − ibτ}` against the periodic-orbit test for
/// `bτ` being cohomologous to a constant plus a `2πℤ`-valued function.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeReport {
    pub b: f64,
    /// Eigenvalue of largest modulus.
    pub eigenvalue: Complex64,
    /// The branch continued from the real eigenvalue at `b = 0`, when the
    /// continuation succeeds.
    pub continued: Option<Complex64>,
    pub modulus: f64,
    /// Phase `c` read off the first primitive orbit.
    pub phase: f64,
    /// Largest distance of `bτⁿ(x) − n c` to `2πℤ` over orbits up to `n_max`.
    pub orbit_defect: f64,
    pub modulus_one: bool,
    /// Modulus one with phase `c ≡ 0`: `bτ` itself cohomologous to `2πℤ` values.
    pub eigenvalue_one: bool,
    /// The spectral and orbit tests agree.
    pub consistent: bool,
}

fn dist_2pi(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let r = x.rem_euclid(two_pi);
    r.min(two_pi - r)
}

pub fn lattice_test(f: &Potential, tau: &Roof, b: f64, depth: usize, n_max: usize) -> Result<LatticeReport> {
    let zero = Potential::zero(f.spec());
    let setup = DecaySetup::new(f, tau, &zero, depth)?;
    let params = crate::potential::ComplexParams::new(0.0, 0.0, b, 0.0, 0.0);
    let continued = leading_eigendata_complex(&setup.family, params, &TrackOptions::default()).ok().map(|e| e.value);
    let ev = eigenvalues(&setup.operator_at([0.0, b, 0.0, 0.0]).to_dense());
    let eig = ev.into_iter().max_by(|x, y| x.norm().total_cmp(&y.norm())).expect("nonempty spectrum");
    let orbits: Vec<(usize, f64)> = (1..=n_max)
        .flat_map(|n| primitive_classes(f.spec(), n))
        .map(|(p, n)| (n, tau.periodic_sum(p.symbols())))
        .collect();
    let (n0, l0) = orbits[0];
    let phase = (b * l0 / n0 as f64).rem_euclid(2.0 * std::f64::consts::PI);
    // the phase is defined mod 2π/n0; pick the branch that fits all orbits
    let candidates: Vec<f64> = (0..n0).map(|k| phase + 2.0 * std::f64::consts::PI * k as f64 / n0 as f64).collect();
    let (phase, orbit_defect) = candidates
        .into_iter()
        .map(|c| (c, orbits.iter().map(|&(n, l)| dist_2pi(b * l - n as f64 * c)).fold(0.0, f64::max)))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap();
    let modulus = eig.norm();
    let modulus_one = (modulus - 1.0).abs() < 1e-9;
    let eigenvalue_one = modulus_one && dist_2pi(phase) < 1e-9;
    let consistent = modulus_one == (orbit_defect < 1e-9);
    Ok(LatticeReport { b, eigenvalue: eig, continued, modulus, phase, orbit_defect, modulus_one, eigenvalue_one, consistent })
}
