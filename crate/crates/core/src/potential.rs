//! Locally constant potentials, Birkhoff sums, Hölder seminorms and
//! depth averaging.

use std::ops::Deref;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sft::{
    common_prefix_len, enumerate_periodic_words, extend_periodically, PeriodicWord, Point,
    SubshiftSpec, Symbol, SymbolicMetric, Word, WordTable,
};

/// A real function on the shift that depends on the first `depth` symbols.
#[derive(Clone, Debug)]
pub struct Potential {
    table: Arc<WordTable>,
    values: Vec<f64>,
}

impl PartialEq for Potential {
    fn eq(&self, other: &Self) -> bool {
        self.depth() == other.depth() && self.spec() == other.spec() && self.values == other.values
    }
}

impl Potential {
    pub fn from_fn(spec: &SubshiftSpec, depth: usize, f: impl Fn(&[Symbol]) -> f64) -> Self {
        let table = WordTable::new(spec, depth.max(1));
        let values = table.words().iter().map(|w| f(w.symbols())).collect();
        Potential { table, values }
    }

    pub fn from_values(table: Arc<WordTable>, values: Vec<f64>) -> Result<Self> {
        if values.len() != table.size() {
            return Err(Error::TableSize { expected: table.size(), got: values.len() });
        }
        Ok(Potential { table, values })
    }

    pub fn constant(spec: &SubshiftSpec, c: f64) -> Self {
        Potential::from_fn(spec, 1, |_| c)
    }

    pub fn zero(spec: &SubshiftSpec) -> Self {
        Potential::constant(spec, 0.0)
    }

    /// Depth-1 potential with value `values[i]` on symbol `i + 1`.
    pub fn symbolwise(spec: &SubshiftSpec, values: &[f64]) -> Result<Self> {
        if values.len() != spec.k() {
            return Err(Error::TableSize { expected: spec.k(), got: values.len() });
        }
        Ok(Potential::from_fn(spec, 1, |w| values[w[0] as usize]))
    }

    /// Indicator of the cylinder `[word]`.
    pub fn indicator(spec: &SubshiftSpec, word: &[Symbol]) -> Self {
        Potential::from_fn(spec, word.len(), |w| if w == word { 1.0 } else { 0.0 })
    }

    /// Builds a table from `(word, value)` pairs with 1-based word strings.
    /// Every admissible word of length `depth` must appear exactly once.
    pub fn from_pairs(spec: &SubshiftSpec, depth: usize, pairs: &[(String, f64)]) -> Result<Self> {
        let table = WordTable::new(spec, depth);
        let mut values = vec![None; table.size()];
        for (text, v) in pairs {
            let w = Word::parse(spec, text)?;
            if w.len() != depth {
                return Err(Error::InvalidParameter(format!("word {text} has length {}, expected {depth}", w.len())));
            }
            let i = table.index_of(w.symbols()).expect("admissible word is tabulated");
            if values[i].replace(*v).is_some() {
                return Err(Error::InvalidParameter(format!("word {text} listed twice")));
            }
        }
        let values = values
            .into_iter()
            .zip(table.words())
            .map(|(v, w)| v.ok_or_else(|| Error::MissingWord { depth, word: w.to_string() }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Potential { table, values })
    }

    pub fn depth(&self) -> usize {
        self.table.word_len()
    }

    pub fn spec(&self) -> &SubshiftSpec {
        self.table.spec()
    }

    pub fn table(&self) -> &Arc<WordTable> {
        &self.table
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Word, f64)> {
        self.table.words().iter().zip(self.values.iter().copied())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Value on the cylinder of the first `depth` symbols of `w`.
    pub fn lookup(&self, w: &[Symbol]) -> Option<f64> {
        let d = self.depth();
        if w.len() < d {
            return None;
        }
        self.table.index_of(&w[..d]).map(|i| self.values[i])
    }

    /// Value on a finite word, extended periodically when it is shorter than
    /// the depth. The flag is false in that approximate case.
    pub fn eval_word(&self, w: &[Symbol]) -> (f64, bool) {
        if w.len() >= self.depth() {
            (self.lookup(w).expect("admissible word"), true)
        } else {
            let ext = extend_periodically(self.spec(), w, self.depth());
            (self.lookup(&ext).expect("admissible extension"), false)
        }
    }

    pub fn eval(&self, x: &Point) -> Result<f64> {
        let w = x.first(self.depth());
        self.lookup(&w).ok_or(Error::InadmissiblePoint { position: 0 })
    }

    /// `Σ_{j<n} p(σ^j x)`.
    pub fn birkhoff_sum(&self, x: &Point, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let d = self.depth();
        let s = x.first(n + d - 1);
        (0..n).map(|j| self.lookup(&s[j..j + d]).expect("admissible point")).sum()
    }

    /// Birkhoff sum over one period of the periodic point `word^∞`.
    pub fn periodic_sum(&self, word: &[Symbol]) -> f64 {
        let n = word.len();
        let d = self.depth();
        let mut buf = Vec::with_capacity(d);
        (0..n)
            .map(|j| {
                buf.clear();
                buf.extend((0..d).map(|i| word[(j + i) % n]));
                self.lookup(&buf).expect("cyclically admissible word")
            })
            .sum()
    }

    /// The same function tabulated on longer words.
    pub fn lift(&self, depth: usize) -> Potential {
        if depth <= self.depth() {
            return self.clone();
        }
        Potential::from_fn(self.spec(), depth, |w| self.lookup(w).expect("admissible"))
    }

    pub fn zip_with(&self, other: &Potential, f: impl Fn(f64, f64) -> f64) -> Potential {
        let d = self.depth().max(other.depth());
        Potential::from_fn(self.spec(), d, |w| f(self.lookup(w).unwrap(), other.lookup(w).unwrap()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Potential {
        Potential { table: self.table.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn plus(&self, other: &Potential) -> Potential {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn minus(&self, other: &Potential) -> Potential {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scaled(&self, c: f64) -> Potential {
        self.map(|v| v * c)
    }

    /// `p(x) − p(σx)` for a potential `p`, a function of depth `depth + 1`.
    pub fn coboundary(&self) -> Potential {
        let d = self.depth();
        Potential::from_fn(self.spec(), d + 1, |w| self.lookup(&w[..d]).unwrap() - self.lookup(&w[1..]).unwrap())
    }

    /// `|p|_ν` over all pairs of points, the supremum of
    /// `|p(x) − p(y)| / d_θ(x,y)^ν`.
    pub fn holder_seminorm(&self, nu: f64, metric: &SymbolicMetric) -> f64 {
        self.holder_seminorm_scoped(nu, metric, PairScope::All)
    }

    pub fn holder_seminorm_scoped(&self, nu: f64, metric: &SymbolicMetric, scope: PairScope) -> f64 {
        seminorm(&self.table, &self.values, nu, metric, scope, |a, b| (a - b).abs())
    }

    /// Cylinder average onto words of length `m(t) = ⌈log t / log(1/θ)⌉`
    /// (at least 1) with uniform weights over admissible extensions.
    pub fn average_to_depth(&self, t: f64, metric: &SymbolicMetric) -> Result<Averaged> {
        if !(t >= 1.0) {
            return Err(Error::InvalidParameter(format!("t = {t} must be at least 1")));
        }
        let m = averaging_depth(t, metric);
        let potential = if self.depth() <= m {
            self.clone()
        } else {
            let d = self.depth();
            let mut sums = vec![(0.0, 0usize); WordTable::new(self.spec(), m).size()];
            let coarse = WordTable::new(self.spec(), m);
            for (w, v) in self.entries() {
                let i = coarse.index_of(&w.symbols()[..m]).expect("prefix of admissible word");
                sums[i].0 += v;
                sums[i].1 += 1;
            }
            debug_assert!(d > m);
            Potential { table: coarse, values: sums.into_iter().map(|(s, c)| s / c as f64).collect() }
        };
        let bound = self.holder_seminorm(1.0, metric) / t;
        let deviation = self.minus(&potential).sup_norm();
        Ok(Averaged { potential, m, bound, deviation })
    }
}

fn averaging_depth(t: f64, metric: &SymbolicMetric) -> usize {
    let raw = t.ln() / (1.0 / metric.theta()).ln();
    ((raw - 1e-12).ceil().max(1.0)) as usize
}

/// Result of [`Potential::average_to_depth`]: the averaged table, its
/// depth, the certified bound `|f|₁/t` and the attained sup deviation.
#[derive(Clone, Debug)]
pub struct Averaged {
    pub potential: Potential,
    pub m: usize,
    pub bound: f64,
    pub deviation: f64,
}

/// Which pairs of cylinders enter a seminorm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairScope {
    /// Every pair; words with different first symbols are at distance 1.
    All,
    /// Only pairs inside one first-symbol rectangle.
    SameSymbol,
}

/// Exact Hölder seminorm of a cylinder function on `table`.
pub fn seminorm<T>(
    table: &WordTable,
    values: &[T],
    nu: f64,
    metric: &SymbolicMetric,
    scope: PairScope,
    dist: impl Fn(&T, &T) -> f64,
) -> f64 {
    let words = table.words();
    let weights: Vec<f64> = (0..=table.word_len()).map(|l| metric.distance_at(l).powf(-nu)).collect();
    let mut best = 0.0f64;
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            let l = common_prefix_len(words[i].symbols(), words[j].symbols());
            if l == 0 && scope == PairScope::SameSymbol {
                continue;
            }
            best = best.max(dist(&values[i], &values[j]) * weights[l]);
        }
    }
    best
}

/// Roof function: a potential bounded below by a positive constant.
#[derive(Clone, Debug, PartialEq)]
pub struct Roof(Potential);

impl Roof {
    pub fn new(p: Potential) -> Result<Self> {
        if let Some((w, v)) = p.entries().find(|(_, v)| !(*v > 0.0)) {
            return Err(Error::NonPositiveRoof { word: w.to_string(), value: v });
        }
        Ok(Roof(p))
    }

    pub fn constant(spec: &SubshiftSpec, c: f64) -> Result<Self> {
        Roof::new(Potential::constant(spec, c))
    }

    pub fn symbolwise(spec: &SubshiftSpec, values: &[f64]) -> Result<Self> {
        Roof::new(Potential::symbolwise(spec, values)?)
    }

    pub fn potential(&self) -> &Potential {
        &self.0
    }
}

impl Deref for Roof {
    type Target = Potential;
    fn deref(&self) -> &Potential {
        &self.0
    }
}

/// `s = P_f + a + ib`, `z = c + iw` together with the decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexParams {
    pub s: Complex64,
    pub z: Complex64,
    pub p_f: f64,
}

impl ComplexParams {
    pub fn new(p_f: f64, a: f64, b: f64, c: f64, w: f64) -> Self {
        ComplexParams { s: Complex64::new(p_f + a, b), z: Complex64::new(c, w), p_f }
    }

    pub fn from_sz(s: Complex64, z: Complex64, p_f: f64) -> Self {
        ComplexParams { s, z, p_f }
    }

    pub fn zero() -> Self {
        ComplexParams::new(0.0, 0.0, 0.0, 0.0, 0.0)
    }

    pub fn a(&self) -> f64 {
        self.s.re - self.p_f
    }

    pub fn b(&self) -> f64 {
        self.s.im
    }

    pub fn c(&self) -> f64 {
        self.z.re
    }

    pub fn w(&self) -> f64 {
        self.z.im
    }

    pub fn conj(&self) -> Self {
        ComplexParams { s: self.s.conj(), z: self.z.conj(), p_f: self.p_f }
    }

    /// The real parts only.
    pub fn real_part(&self) -> Self {
        ComplexParams { s: Complex64::new(self.s.re, 0.0), z: Complex64::new(self.z.re, 0.0), p_f: self.p_f }
    }
}

/// Sup norm, Hölder and Lipschitz seminorms and the two `b`-weighted norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub sup_norm: f64,
    pub holder_seminorm: f64,
    pub lip_seminorm: f64,
    pub composite_beta_b: f64,
    pub composite_lip_b: f64,
}

/// `‖h‖_{β,b} = ‖h‖∞ + |h|_β/|b|` and `‖h‖_{Lip,b} = ‖h‖∞ + Lip(h)/|b|`
/// for a cylinder function on `table`.
pub fn composite_norms(
    table: &WordTable,
    values: &[Complex64],
    b: f64,
    beta: f64,
    metric: &SymbolicMetric,
    scope: PairScope,
) -> Result<NormReport> {
    if values.len() != table.size() {
        return Err(Error::DimensionMismatch { expected: table.size(), got: values.len() });
    }
    if b.abs() < 1.0 {
        return Err(Error::InvalidParameter(format!("|b| = {} must be at least 1", b.abs())));
    }
    let sup_norm = values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let holder = seminorm(table, values, beta, metric, scope, |x, y| (x - y).norm());
    let lip = seminorm(table, values, 1.0, metric, scope, |x, y| (x - y).norm());
    Ok(NormReport {
        sup_norm,
        holder_seminorm: holder,
        lip_seminorm: lip,
        composite_beta_b: sup_norm + holder / b.abs(),
        composite_lip_b: sup_norm + lip / b.abs(),
    })
}

pub fn potential_norms(p: &Potential, b: f64, beta: f64, metric: &SymbolicMetric) -> Result<NormReport> {
    let values: Vec<Complex64> = p.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    composite_norms(p.table(), &values, b, beta, metric, PairScope::All)
}

/// Largest `|pⁿ(x) − qⁿ(x)|` over periodic points of period at most
/// `n_max`, with a witnessing orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct Obstruction {
    pub deviation: f64,
    pub witness: Option<PeriodicWord>,
}

pub fn cohomology_obstruction(p: &Potential, q: &Potential, n_max: usize) -> Obstruction {
    let mut out = Obstruction { deviation: 0.0, witness: None };
    for n in 1..=n_max {
        for w in enumerate_periodic_words(p.spec(), n) {
            let dev = (p.periodic_sum(w.symbols()) - q.periodic_sum(w.symbols())).abs();
            if dev > out.deviation {
                out = Obstruction { deviation: dev, witness: Some(w) };
            }
        }
    }
    out
}

/// Distortion constant `B = |p|_ν θ^ν / (1 − θ^ν)` bounding
/// `|p^m(x) − p^m(y)| ≤ B d(σ^m x, σ^m y)^ν` inside a length-`m` cylinder.
pub fn distortion_constant(p: &Potential, nu: f64, metric: &SymbolicMetric) -> f64 {
    let t = metric.theta().powf(nu);
    p.holder_seminorm(nu, metric) * t / (1.0 - t)
}

impl std::fmt::Display for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.entries().map(|(w, v)| format!("{w}:{v}")).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> SubshiftSpec {
        SubshiftSpec::golden_mean()
    }

    #[test]
    fn eval_examples() {
        let g = golden();
        let p = Potential::symbolwise(&g, &[1.0, 2.0]).unwrap();
        let x = Point::periodic(&g, &[0, 1]).unwrap();
        assert_eq!(p.eval(&x).unwrap(), 1.0);
        let q = Potential::from_fn(&g, 2, |w| if w == [0, 0] { 7.0 } else { 3.0 });
        let y = Point::new(&g, vec![0, 0, 1], vec![0]).unwrap();
        assert_eq!(q.eval(&y).unwrap(), 7.0);
        assert_eq!(Potential::zero(&g).eval(&y).unwrap(), 0.0);
    }

    #[test]
    fn birkhoff_examples() {
        let g = golden();
        let p = Potential::symbolwise(&g, &[1.0, 2.0]).unwrap();
        let x = Point::periodic(&g, &[0, 1]).unwrap();
        assert_eq!(p.birkhoff_sum(&x, 2), 3.0);
        assert_eq!(p.birkhoff_sum(&x, 0), 0.0);
        let y = Point::periodic(&g, &[0, 0, 1]).unwrap();
        assert_eq!(p.birkhoff_sum(&y, 6), 8.0);
        assert_eq!(p.periodic_sum(&[0, 0, 1]), 4.0);
    }

    #[test]
    fn holder_examples() {
        let half = SymbolicMetric::new(0.5).unwrap();
        let g = golden();
        assert_eq!(Potential::constant(&g, 3.0).holder_seminorm(1.0, &half), 0.0);
        let p = Potential::symbolwise(&g, &[0.0, 1.0]).unwrap();
        assert_eq!(p.holder_seminorm(1.0, &half), 1.0);
        let f2 = SubshiftSpec::full_shift(2);
        let q = Potential::from_fn(&f2, 2, |w| if w == [0, 1] { 1.0 } else { 0.0 });
        assert_eq!(q.holder_seminorm(1.0, &half), 2.0);
    }

    #[test]
    fn composite_examples() {
        let half = SymbolicMetric::new(0.5).unwrap();
        let g = golden();
        let one = Potential::constant(&g, 1.0);
        assert_eq!(potential_norms(&one, 5.0, 0.5, &half).unwrap().composite_lip_b, 1.0);
        // sup 2 and Lip 4 on the full 2-shift: values differ by 2 at distance 1/2.
        let f2 = SubshiftSpec::full_shift(2);
        let h = Potential::from_fn(&f2, 2, |w| if w == [0, 1] { 2.0 } else { 0.0 });
        let r = potential_norms(&h, 2.0, 0.5, &half).unwrap();
        assert_eq!(r.sup_norm, 2.0);
        assert_eq!(r.lip_seminorm, 4.0);
        assert_eq!(r.composite_lip_b, 4.0);
        assert!(potential_norms(&h, 0.5, 0.5, &half).is_err());
    }

    #[test]
    fn indicator_lipschitz_bound() {
        let half = SymbolicMetric::new(0.5).unwrap();
        let g = golden();
        for w in crate::sft::enumerate_words(&g, 3) {
            let chi = Potential::indicator(&g, w.symbols());
            let lip = chi.holder_seminorm(1.0, &half);
            let diam = crate::sft::cylinder_diameter(&g, &half, w.symbols());
            assert!(lip <= 1.0 / diam + 1e-12);
        }
    }

    #[test]
    fn averaging_examples() {
        let half = SymbolicMetric::new(0.5).unwrap();
        let g = golden();
        let p = Potential::symbolwise(&g, &[0.3, -1.0]).unwrap();
        assert_eq!(p.average_to_depth(4.0, &half).unwrap().potential, p);
        let c = Potential::constant(&g, 2.5);
        assert_eq!(c.average_to_depth(100.0, &half).unwrap().potential.values(), c.values());
        let q = Potential::from_fn(&g, 3, |w| w.iter().enumerate().map(|(i, &s)| (i + 1) as f64 * s as f64).sum());
        let avg = q.average_to_depth(4.0, &half).unwrap();
        assert_eq!(avg.m, 2);
        assert_eq!(avg.potential.depth(), 2);
        // word 11 extends to 111 and 112 in the golden mean shift
        let v11 = avg.potential.lookup(&[0, 0]).unwrap();
        assert!((v11 - 1.5).abs() < 1e-15);
        assert!(avg.deviation <= q.holder_seminorm(1.0, &half) * 0.25 + 1e-12);
        assert!(avg.deviation <= avg.bound + 1e-12);
    }

    #[test]
    fn cohomology_examples() {
        let g = golden();
        let p = Potential::symbolwise(&g, &[0.2, 0.9]).unwrap();
        let u = Potential::symbolwise(&g, &[1.5, -0.4]).unwrap();
        let q = p.plus(&u.coboundary());
        assert!(cohomology_obstruction(&p, &q, 8).deviation < 1e-12);
        let shifted = p.map(|v| v + 1.0);
        let obs = cohomology_obstruction(&p, &shifted, 5);
        assert!((obs.deviation - 5.0).abs() < 1e-12);
        assert_eq!(obs.witness.unwrap().len(), 5);
        let r = Potential::symbolwise(&g, &[0.7, 0.1]).unwrap();
        assert!(cohomology_obstruction(&p, &r, 1).deviation > 0.0);
    }

    #[test]
    fn from_pairs_validates() {
        let g = golden();
        let pairs = vec![("11".to_string(), 1.0), ("12".to_string(), 2.0), ("21".to_string(), 3.0)];
        let p = Potential::from_pairs(&g, 2, &pairs).unwrap();
        assert_eq!(p.lookup(&[1, 0]), Some(3.0));
        assert!(matches!(Potential::from_pairs(&g, 2, &pairs[..2]), Err(Error::MissingWord { .. })));
        let bad = vec![("22".to_string(), 1.0)];
        assert!(matches!(Potential::from_pairs(&g, 2, &bad), Err(Error::InadmissibleWord { .. })));
    }

    #[test]
    fn roof_positivity() {
        let g = golden();
        assert!(Roof::symbolwise(&g, &[1.0, 0.0]).is_err());
        assert!(Roof::symbolwise(&g, &[1.0, 0.5]).is_ok());
    }

    #[test]
    fn params_decomposition() {
        let p = ComplexParams::new(0.4, 0.1, 5.0, -0.2, 3.0);
        assert!((p.a() - 0.1).abs() < 1e-15);
        assert_eq!((p.b(), p.c(), p.w()), (5.0, -0.2, 3.0));
    }
}
