//! Primitive periodic orbits and their counting statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{Potential, Roof};
use crate::sft::{is_lyndon, primitive_class_count, PeriodicWord, SubshiftSpec, Symbol};
use crate::transfer::{equilibrium_integral, rpf, RpfData};

/// Default cap on the number of periodic words a catalog may have to scan.
pub const DEFAULT_ORBIT_BUDGET: u128 = 1 << 28;

#[derive(Clone, Debug, Serialize)]
pub struct OrbitRecord {
    /// Lyndon representative.
    pub rep: PeriodicWord,
    pub n: usize,
    /// `λ(γ) = τⁿ(x)`.
    pub lam: f64,
    /// `λ_F(γ) = fⁿ(x)`.
    pub lam_f: f64,
    /// `λ_G(γ) = gⁿ(x)`.
    pub lam_g: f64,
    /// `λ^u(γ) = −f_uⁿ(x)`.
    pub lam_u: f64,
}

/// Number of primitive classes of one word length found below the horizon
/// against the Möbius count.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LengthCount {
    pub n: usize,
    pub found: usize,
    pub expected: u128,
    /// True when every class of this length has `λ ≤ T`, so the counts must
    /// agree.
    pub saturated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitCatalog {
    pub horizon: f64,
    pub n_cap: usize,
    pub records: Vec<OrbitRecord>,
    pub lengths: Vec<LengthCount>,
}

/// The four potentials carried by each orbit record.
pub struct OrbitWeights<'a> {
    pub tau: &'a Roof,
    pub f: &'a Potential,
    pub g: &'a Potential,
    pub f_u: &'a Potential,
}

struct Search<'a> {
    spec: &'a SubshiftSpec,
    w: &'a OrbitWeights<'a>,
    horizon: f64,
    n_cap: usize,
    tau_min: f64,
}

impl Search<'_> {
    /// Lower bound on `τⁿ` for any cyclic completion of `prefix`.
    fn bound(&self, prefix: &[Symbol]) -> f64 {
        let d = self.w.tau.depth();
        let full = prefix.len().saturating_sub(d - 1);
        let inner: f64 = (0..full).map(|j| self.w.tau.lookup(&prefix[j..j + d]).unwrap()).sum();
        inner + (prefix.len() - full) as f64 * self.tau_min
    }

    fn dfs(&self, prefix: &mut Vec<Symbol>, out: &mut Vec<OrbitRecord>) {
        if self.bound(prefix) > self.horizon {
            return;
        }
        let s = prefix.as_slice();
        if self.spec.allowed(s[s.len() - 1], s[0]) && is_lyndon(s) {
            let lam = self.w.tau.periodic_sum(s);
            if lam <= self.horizon {
                out.push(OrbitRecord {
                    rep: PeriodicWord::new(self.spec, crate::sft::Word::new(self.spec, s.to_vec()).unwrap()).unwrap(),
                    n: s.len(),
                    lam,
                    lam_f: self.w.f.periodic_sum(s),
                    lam_g: self.w.g.periodic_sum(s),
                    lam_u: -self.w.f_u.periodic_sum(s),
                });
            }
        }
        if prefix.len() == self.n_cap {
            return;
        }
        let first = prefix[0];
        for &next in self.spec.successors(prefix[prefix.len() - 1]) {
            // a Lyndon word never contains a symbol below its first one
            if next < first {
                continue;
            }
            prefix.push(next);
            self.dfs(prefix, out);
            prefix.pop();
        }
    }
}

/// All primitive orbits with `λ(γ) ≤ horizon`, sorted by `(λ, word)`.
pub fn build_catalog(w: &OrbitWeights<'_>, horizon: f64, budget: u128) -> Result<OrbitCatalog> {
    let spec = w.tau.spec();
    let tau_min = w.tau.min();
    let n_cap = (horizon / tau_min).floor().max(0.0) as usize;
    let needed: u128 = (1..=n_cap).map(|n| spec.trace_power(n)).fold(0u128, |a, b| a.saturating_add(b));
    if needed > budget {
        return Err(Error::EnumerationBudgetExceeded { needed, budget });
    }
    let search = Search { spec, w, horizon, n_cap, tau_min };
    let mut records: Vec<OrbitRecord> = if n_cap == 0 {
        Vec::new()
    } else {
        let mut seeds: Vec<Vec<Symbol>> = Vec::new();
        for a in 0..spec.k() as Symbol {
            seeds.push(vec![a]);
        }
        seeds
            .into_par_iter()
            .flat_map_iter(|mut prefix| {
                let mut out = Vec::new();
                search.dfs(&mut prefix, &mut out);
                out
            })
            .collect()
    };
    records.sort_by(|a, b| a.lam.total_cmp(&b.lam).then_with(|| a.rep.symbols().cmp(b.rep.symbols())));
    let tau_max = w.tau.max();
    let lengths = (1..=n_cap)
        .map(|n| LengthCount {
            n,
            found: records.iter().filter(|r| r.n == n).count(),
            expected: primitive_class_count(spec, n),
            saturated: n as f64 * tau_max <= horizon,
        })
        .collect();
    Ok(OrbitCatalog { horizon, n_cap, records, lengths })
}

impl OrbitCatalog {
    /// Lengths whose class count disagrees with the Möbius count.
    pub fn completeness_failures(&self) -> Vec<LengthCount> {
        self.lengths
            .iter()
            .filter(|l| (l.found as u128) > l.expected || (l.saturated && l.found as u128 != l.expected))
            .copied()
            .collect()
    }

    pub fn below(&self, t: f64) -> impl Iterator<Item = &OrbitRecord> {
        self.records.iter().take_while(move |r| r.lam <= t)
    }

    fn require(&self, t: f64) -> Result<()> {
        if t > self.horizon {
            return Err(Error::HorizonTooSmall { orbits: self.records.len() });
        }
        Ok(())
    }
}

/// Smallest `c > 0` with every primitive period `τⁿ` up to word length
/// `n_max` in `cℤ`, if there is one.
pub fn lattice_step(tau: &Potential, n_max: usize) -> Option<f64> {
    let spec = tau.spec();
    let sums: Vec<f64> = (1..=n_max)
        .flat_map(|n| crate::sft::primitive_classes(spec, n))
        .map(|(p, _)| tau.periodic_sum(p.symbols()))
        .collect();
    let scale = sums.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale.max(1.0);
    let mut g = 0.0f64;
    for v in sums {
        let (mut a, mut b) = (g.max(v.abs()), g.min(v.abs()));
        while b > tol {
            let r = a % b;
            a = b;
            b = if r > b - tol { 0.0 } else { r };
        }
        g = a;
        if g < 1e-6 {
            return None;
        }
    }
    (g > 1e-6).then_some(g)
}

/// `li(x) = ∫₂ˣ dy / log y`.
pub fn li(x: f64) -> Result<f64> {
    if !(x >= 2.0) || !x.is_finite() {
        return Err(Error::DomainError(x));
    }
    if x == 2.0 {
        return Ok(0.0);
    }
    let (a, b) = (2f64.ln(), x.ln());
    let scale = x / b;
    let out = quadrature::double_exponential::integrate(|u: f64| u.exp() / u, a, b, 1e-14 * scale);
    Ok(out.integral)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PiReport {
    pub t: f64,
    pub orbits: usize,
    pub value: f64,
    pub li_target: f64,
    pub ratio: f64,
    /// Set for lattice roofs, where the comparison is not expected to hold.
    pub lattice: bool,
}

/// `π_F(T) = Σ_{λ(γ) ≤ T} e^{λ_F(γ)}` against `li(e^{Pr_F T})`.
pub fn pi_f(catalog: &OrbitCatalog, pr_f: f64, t: f64, lattice: bool) -> Result<PiReport> {
    catalog.require(t)?;
    let (orbits, value) = catalog.below(t).fold((0, 0.0), |(k, s), r| (k + 1, s + r.lam_f.exp()));
    if orbits < 10 {
        return Err(Error::HorizonTooSmall { orbits });
    }
    let x = (pr_f * t).exp();
    let li_target = if x >= 2.0 { li(x)? } else { 0.0 };
    Ok(PiReport { t, orbits, value, li_target, ratio: value / li_target, lattice })
}

/// Window width as a function of `T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeltaSchedule {
    Constant { c: f64 },
    InverseSqrt { c: f64 },
    Inverse { c: f64 },
    /// `c e^{−εT}`; at reachable `T` these windows are almost always empty.
    Exponential { c: f64, eps: f64 },
}

impl DeltaSchedule {
    pub fn width(&self, t: f64) -> f64 {
        match *self {
            DeltaSchedule::Constant { c } => c,
            DeltaSchedule::InverseSqrt { c } => c / t.sqrt(),
            DeltaSchedule::Inverse { c } => c / t,
            DeltaSchedule::Exponential { c, eps } => c * (-eps * t).exp(),
        }
    }

    pub fn out_of_reach(&self) -> bool {
        matches!(self, DeltaSchedule::Exponential { .. })
    }
}

/// Orbit weight in the windowed sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GWeight {
    /// `λ_G(γ)`.
    Birkhoff,
    /// `λ(γ)`, the case `G ≡ 1`.
    Period,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct WindowReport {
    pub t: f64,
    pub delta: f64,
    pub orbits: usize,
    pub estimate: f64,
    pub target: f64,
    pub error: f64,
}

/// `∫g dm / ∫τ dm` for the Gibbs measure of `f_u`.
pub fn ho_target(f_u: &Potential, tau: &Potential, g: &Potential, depth: usize) -> Result<(f64, RpfData)> {
    let data = rpf(f_u, depth)?;
    let t = equilibrium_integral(&data, g)? / equilibrium_integral(&data, tau)?;
    Ok((t, data))
}

fn weight(r: &OrbitRecord, mode: GWeight) -> f64 {
    let lg = match mode {
        GWeight::Birkhoff => r.lam_g,
        GWeight::Period => r.lam,
    };
    lg * (-r.lam_u).exp()
}

/// `(1/δ) Σ_{|λ(γ) − T| ≤ δ/2} λ_G(γ) e^{−λ^u(γ)}` on a closed window.
pub fn hannay_ozorio_window(catalog: &OrbitCatalog, t: f64, delta: f64, mode: GWeight, target: f64) -> Result<WindowReport> {
    let (lo, hi) = (t - delta / 2.0, t + delta / 2.0);
    catalog.require(hi)?;
    let start = catalog.records.partition_point(|r| r.lam < lo);
    let inside = catalog.records[start..].iter().take_while(|r| r.lam <= hi);
    let (orbits, sum) = inside.fold((0, 0.0), |(k, s), r| (k + 1, s + weight(r, mode)));
    if orbits == 0 {
        return Err(Error::EmptyWindow { lo, hi });
    }
    let estimate = sum / delta;
    let error = if target != 0.0 { (estimate - target) / target.abs() } else { estimate - target };
    Ok(WindowReport { t, delta, orbits, estimate, target, error })
}

/// `(1/T) Σ_{λ(γ) ≤ T} λ_G(γ) e^{−λ^u(γ)}`.
pub fn unwindowed_average(catalog: &OrbitCatalog, t: f64, mode: GWeight) -> Result<f64> {
    catalog.require(t)?;
    Ok(catalog.below(t).map(|r| weight(r, mode)).sum::<f64>() / t)
}

/// `Ψ` and `Ψ₁` at one `x` under the two readings of the power sum.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PsiReport {
    pub x: f64,
    /// `Σ_{e^{m Pr λ} ≤ x} λ e^{Pr λ}`.
    pub psi_literal: f64,
    /// `Σ_{e^{m Pr λ} ≤ x} Pr λ e^{m λ_F}`.
    pub psi_conventional: f64,
    pub psi1_literal: f64,
    pub psi1_conventional: f64,
    /// `Ψ₁(x) / (x²/2)` for the conventional reading.
    pub ratio: f64,
}

/// Ψ and its integral. Each `(γ, m)` with `e^{m Pr λ(γ)} ≤ x` contributes a
/// step at `y = e^{m Pr λ}`, so `Ψ₁` is integrated exactly.
pub fn psi_functions(catalog: &OrbitCatalog, pr_f: f64, x: f64) -> Result<PsiReport> {
    if pr_f <= 0.0 {
        return Err(Error::InvalidParameter(format!("Ψ needs a positive pressure, got {pr_f}")));
    }
    let reach = x.max(1.0).ln() / pr_f;
    catalog.require(reach)?;
    let mut out = PsiReport { x, psi_literal: 0.0, psi_conventional: 0.0, psi1_literal: 0.0, psi1_conventional: 0.0, ratio: 0.0 };
    for r in catalog.below(reach) {
        let mut m = 1;
        while m as f64 * r.lam <= reach {
            let y = (m as f64 * pr_f * r.lam).exp();
            let lit = r.lam * (pr_f * r.lam).exp();
            let conv = pr_f * r.lam * (m as f64 * r.lam_f).exp();
            out.psi_literal += lit;
            out.psi_conventional += conv;
            out.psi1_literal += lit * (x - y);
            out.psi1_conventional += conv * (x - y);
            m += 1;
        }
    }
    out.ratio = out.psi1_conventional / (x * x / 2.0);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalog(spec: &SubshiftSpec, tau: &Roof, t: f64) -> OrbitCatalog {
        let zero = Potential::zero(spec);
        let w = OrbitWeights { tau, f: &zero, g: &zero, f_u: &zero };
        build_catalog(&w, t, DEFAULT_ORBIT_BUDGET).unwrap()
    }

    #[test]
    fn catalog_examples() {
        let g = SubshiftSpec::golden_mean();
        let c = catalog(&g, &Roof::constant(&g, 1.0).unwrap(), 4.0);
        assert_eq!(c.records.len(), 4);
        assert!(c.completeness_failures().is_empty());
        let f2 = SubshiftSpec::full_shift(2);
        let c = catalog(&f2, &Roof::constant(&f2, 1.0).unwrap(), 3.0);
        assert_eq!(c.records.len(), 5);
        let c = catalog(&f2, &Roof::symbolwise(&f2, &[1.0, 2.0]).unwrap(), 2.0);
        let lams: Vec<f64> = c.records.iter().map(|r| r.lam).collect();
        assert_eq!(lams, vec![1.0, 2.0]);
        assert_eq!(c.records[1].rep.symbols(), &[1]);
    }

    #[test]
    fn li_examples() {
        assert_eq!(li(2.0).unwrap(), 0.0);
        assert!(matches!(li(1.5), Err(Error::DomainError(_))));
        let x = 10f64.exp();
        let r = li(x).unwrap() / (x / 10.0);
        assert!((1.0..=1.25).contains(&r));
        assert!(li(100.0).unwrap() > li(10.0).unwrap());
        // li(x) − li(2) against the tabulated li(10) ≈ 6.1655995
        assert!((li(10.0).unwrap() - (6.165_599_504_787_297 - 1.045_163_780_117_492_7)).abs() < 1e-10);
    }

    #[test]
    fn pi_examples() {
        let f2 = SubshiftSpec::full_shift(2);
        let tau = Roof::constant(&f2, 1.0).unwrap();
        let c = catalog(&f2, &tau, 10.0);
        let necklaces: u128 = (1..=10).map(|n| primitive_class_count(&f2, n)).sum();
        let lattice = lattice_step(&tau, 8).is_some();
        let r = pi_f(&c, 2f64.ln(), 10.0, lattice).unwrap();
        assert_eq!(r.value as u128, necklaces);
        assert!(r.lattice);
        let g = SubshiftSpec::golden_mean();
        let tau = Roof::symbolwise(&g, &[1.0, 1.618_033_988_7]).unwrap();
        assert!(lattice_step(&tau, 8).is_none());
        assert!(matches!(pi_f(&catalog(&g, &tau, 3.0), 0.4, 3.0, false), Err(Error::HorizonTooSmall { .. })));
    }

    #[test]
    fn window_examples() {
        let f2 = SubshiftSpec::full_shift(2);
        let tau = Roof::constant(&f2, 1.0).unwrap();
        let f_u = Potential::constant(&f2, -2f64.ln());
        let one = Potential::constant(&f2, 1.0);
        let zero = Potential::zero(&f2);
        let w = OrbitWeights { tau: &tau, f: &zero, g: &one, f_u: &f_u };
        let c = build_catalog(&w, 12.0, DEFAULT_ORBIT_BUDGET).unwrap();
        let (target, _) = ho_target(&f_u, &tau, &one, 1).unwrap();
        assert!((target - 1.0).abs() < 1e-12);
        // each primitive class of length n contributes n 2^{-n}
        let r = hannay_ozorio_window(&c, 10.0, 1.0, GWeight::Birkhoff, target).unwrap();
        let want = primitive_class_count(&f2, 10) as f64 * 10.0 * 2f64.powi(-10);
        assert!((r.estimate - want).abs() < 1e-12);
        let wz = OrbitWeights { tau: &tau, f: &zero, g: &zero, f_u: &f_u };
        let cz = build_catalog(&wz, 12.0, DEFAULT_ORBIT_BUDGET).unwrap();
        assert_eq!(hannay_ozorio_window(&cz, 10.0, 1.0, GWeight::Birkhoff, 0.0).unwrap().estimate, 0.0);
        let whole = hannay_ozorio_window(&c, 6.0, 12.0, GWeight::Birkhoff, target).unwrap();
        assert!((whole.estimate - unwindowed_average(&c, 12.0, GWeight::Birkhoff).unwrap()).abs() < 1e-12);
        assert!(matches!(hannay_ozorio_window(&c, 5.5, 0.2, GWeight::Birkhoff, target), Err(Error::EmptyWindow { .. })));
    }

    #[test]
    fn psi_examples() {
        let f2 = SubshiftSpec::full_shift(2);
        let tau = Roof::symbolwise(&f2, &[1.0, 5.0]).unwrap();
        let c = catalog(&f2, &tau, 1.5);
        let p = psi_functions(&c, 2f64.ln(), 2.0).unwrap();
        assert!((p.psi_literal - 2.0).abs() < 1e-12);
        let empty = psi_functions(&c, 2f64.ln(), 1.5).unwrap();
        assert_eq!(empty.psi_literal, 0.0);
    }
}
