//! Finite-matrix transfer operators `L_{f − sτ + zg}` on cylinder functions,
//! RPF eigendata, pressure and the pressure equations.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, inverse_iteration, Csr};
use crate::potential::{ComplexParams, Potential, Roof};
use crate::roots::{bracket_decreasing, secant_bisect};
use crate::sft::{SubshiftSpec, Symbol, WordTable};

const POWER_CAP: usize = 100_000;
const POWER_TOL: f64 = 1e-13;
const DENSE_LIMIT: usize = 1024;

/// The word graph at depth `n`: states are admissible `n`-words and the
/// edge `v → u` carries the `(n+1)`-word `v_0 · u`.
#[derive(Debug)]
pub struct WordGraph {
    states: Arc<WordTable>,
    edges: Arc<WordTable>,
    row_ptr: Vec<usize>,
    src: Vec<usize>,
    edge_word: Vec<usize>,
}

impl WordGraph {
    pub fn new(spec: &SubshiftSpec, depth: usize) -> Arc<Self> {
        let depth = depth.max(1);
        let states = WordTable::new(spec, depth);
        let edges = WordTable::new(spec, depth + 1);
        let mut row_ptr = vec![0];
        let mut src = Vec::new();
        let mut edge_word = Vec::new();
        let mut buf: Vec<Symbol> = Vec::with_capacity(depth + 1);
        for u in states.words() {
            let u = u.symbols();
            for j in 0..spec.k() as Symbol {
                if !spec.allowed(j, u[0]) {
                    continue;
                }
                buf.clear();
                buf.push(j);
                buf.extend_from_slice(u);
                src.push(states.index_of(&buf[..depth]).expect("source word is admissible"));
                edge_word.push(edges.index_of(&buf).expect("edge word is admissible"));
            }
            row_ptr.push(src.len());
        }
        Arc::new(WordGraph { states, edges, row_ptr, src, edge_word })
    }

    pub fn depth(&self) -> usize {
        self.states.word_len()
    }

    pub fn states(&self) -> &Arc<WordTable> {
        &self.states
    }

    pub fn edges(&self) -> &Arc<WordTable> {
        &self.edges
    }

    pub fn dim(&self) -> usize {
        self.states.size()
    }

    pub fn spec(&self) -> &SubshiftSpec {
        self.states.spec()
    }

    fn csr<T>(&self, val: Vec<T>) -> Csr<T> {
        Csr { row_ptr: self.row_ptr.clone(), col: self.src.clone(), val }
    }

    /// Evaluates `p` on every edge word, in CSR order.
    fn edge_values(&self, p: &Potential) -> (Vec<f64>, bool) {
        let mut exact = true;
        let vals = self
            .edge_word
            .iter()
            .map(|&e| {
                let (v, ok) = p.eval_word(self.edges.words()[e].symbols());
                exact &= ok;
                v
            })
            .collect();
        (vals, exact)
    }

    /// Per-row edge ranges, for callers that walk rows directly.
    pub fn row(&self, u: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        (self.row_ptr[u]..self.row_ptr[u + 1]).map(move |e| (self.src[e], self.edge_word[e]))
    }
}

/// Edge values of `f`, `τ` and `g` at one depth; the operator for any
/// `(s, z)` is obtained without re-evaluating the potentials.
#[derive(Clone, Debug)]
pub struct OperatorFamily {
    graph: Arc<WordGraph>,
    f: Vec<f64>,
    tau: Vec<f64>,
    g: Vec<f64>,
    exact: bool,
}

impl OperatorFamily {
    pub fn new(f: &Potential, tau: &Potential, g: &Potential, depth: usize) -> Self {
        let graph = WordGraph::new(f.spec(), depth);
        Self::on_graph(graph, f, tau, g)
    }

    pub fn on_graph(graph: Arc<WordGraph>, f: &Potential, tau: &Potential, g: &Potential) -> Self {
        let (f, e1) = graph.edge_values(f);
        let (tau, e2) = graph.edge_values(tau);
        let (g, e3) = graph.edge_values(g);
        OperatorFamily { graph, f, tau, g, exact: e1 && e2 && e3 }
    }

    /// Family for a single real potential `q` (with `τ = g = 0`).
    pub fn single(q: &Potential, depth: usize) -> Self {
        let zero = Potential::zero(q.spec());
        Self::new(q, &zero, &zero, depth)
    }

    pub fn graph(&self) -> &Arc<WordGraph> {
        &self.graph
    }

    pub fn dim(&self) -> usize {
        self.graph.dim()
    }

    /// False when some potential is deeper than `depth + 1` and was
    /// evaluated on periodically extended words.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn complex(&self, s: Complex64, z: Complex64) -> Csr<Complex64> {
        let val = (0..self.f.len())
            .map(|e| (Complex64::new(self.f[e], 0.0) - s * self.tau[e] + z * self.g[e]).exp())
            .collect();
        self.graph.csr(val)
    }

    pub fn real(&self, s: f64, z: f64) -> Csr<f64> {
        let val = (0..self.f.len()).map(|e| (self.f[e] - s * self.tau[e] + z * self.g[e]).exp()).collect();
        self.graph.csr(val)
    }

    pub fn dense(&self, s: Complex64, z: Complex64) -> DMatrix<Complex64> {
        self.complex(s, z).to_dense()
    }

    /// `M` with each entry multiplied by the edge value of `τ` (or `g`).
    fn weighted_dense(&self, s: Complex64, z: Complex64, by_tau: bool) -> DMatrix<Complex64> {
        let w = if by_tau { &self.tau } else { &self.g };
        let m = self.complex(s, z);
        m.to_dense_weighted(w)
    }

    pub fn at(&self, params: ComplexParams) -> TransferMatrix {
        TransferMatrix { graph: self.graph.clone(), csr: self.complex(params.s, params.z), params, exact: self.exact }
    }

    pub fn rpf(&self, s: f64, z: f64) -> Result<RpfData> {
        rpf_of(&self.graph, &self.real(s, z))
    }

    pub fn pressure(&self, s: f64, z: f64) -> Result<f64> {
        Ok(self.rpf(s, z)?.lambda.ln())
    }

    /// Edge values of `(f, τ, g)` in CSR order.
    pub fn edge_tables(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.f, &self.tau, &self.g)
    }
}

trait WeightedDense {
    fn to_dense_weighted(&self, w: &[f64]) -> DMatrix<Complex64>;
}

impl WeightedDense for Csr<Complex64> {
    fn to_dense_weighted(&self, w: &[f64]) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for u in 0..n {
            for e in self.row_ptr[u]..self.row_ptr[u + 1] {
                m[(u, self.col[e])] += self.val[e] * w[e];
            }
        }
        m
    }
}

/// Default matrix depth making every potential exact.
pub fn exact_depth(potentials: &[&Potential]) -> usize {
    potentials.iter().map(|p| p.depth()).max().unwrap_or(1).saturating_sub(1).max(1)
}

/// `L_{f − sτ + zg}` restricted to depth-`n` cylinder functions.
#[derive(Clone, Debug)]
pub struct TransferMatrix {
    graph: Arc<WordGraph>,
    csr: Csr<Complex64>,
    params: ComplexParams,
    exact: bool,
}

impl TransferMatrix {
    pub fn params(&self) -> ComplexParams {
        self.params
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn dim(&self) -> usize {
        self.graph.dim()
    }

    pub fn graph(&self) -> &Arc<WordGraph> {
        &self.graph
    }

    pub fn csr(&self) -> &Csr<Complex64> {
        &self.csr
    }

    pub fn apply(&self, h: &[Complex64]) -> Result<Vec<Complex64>> {
        if h.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: h.len() });
        }
        Ok(self.csr.mul_vec(h))
    }

    pub fn apply_n(&self, h: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
        let mut x = self.apply(h)?;
        for _ in 1..n {
            x = self.csr.mul_vec(&x);
        }
        if n == 0 {
            x = h.to_vec();
        }
        Ok(x)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        self.csr.to_dense()
    }

    /// Coordinate triplets `(row, col, re, im)` with 1-based state words.
    pub fn triplets(&self) -> Vec<(String, String, f64, f64)> {
        let words = self.graph.states.words();
        let mut out = Vec::with_capacity(self.csr.val.len());
        for u in 0..self.dim() {
            for e in self.csr.row_ptr[u]..self.csr.row_ptr[u + 1] {
                let v = self.csr.val[e];
                out.push((words[u].to_string(), words[self.csr.col[e]].to_string(), v.re, v.im));
            }
        }
        out
    }
}

/// Builds the matrix of `L_{f − sτ + zg}` at `depth`. The result reports
/// whether it is exact or uses periodic word extension.
pub fn build_matrix(
    f: &Potential,
    tau: &Potential,
    g: &Potential,
    params: ComplexParams,
    depth: usize,
) -> TransferMatrix {
    OperatorFamily::new(f, tau, g, depth).at(params)
}

/// Leading eigenvalue, eigenfunction, eigenmeasure and Gibbs measure of a
/// nonnegative transfer matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RpfData {
    pub lambda: f64,
    pub h: Vec<f64>,
    pub nu: Vec<f64>,
    pub gibbs: Vec<f64>,
    /// Gibbs mass of each `(n+1)`-cylinder.
    pub edge_measure: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    #[serde(skip)]
    states: Option<Arc<WordTable>>,
}

impl RpfData {
    pub fn depth(&self) -> usize {
        self.states().word_len()
    }

    pub fn states(&self) -> &Arc<WordTable> {
        self.states.as_ref().expect("eigendata carries its word table")
    }

    /// Largest discrepancy between the two marginals of the Gibbs measure on
    /// `(n−1)`-words, zero for a shift-invariant measure.
    pub fn invariance_defect(&self) -> f64 {
        let n = self.depth();
        if n == 1 {
            // depth-1 marginals: compare the state measure with the edge
            // measure projected to the second symbol
            let k = self.states().spec().k();
            let mut first = vec![0.0; k];
            let mut second = vec![0.0; k];
            let edges = WordTable::new(self.states().spec(), 2);
            for (w, &m) in edges.words().iter().zip(&self.edge_measure) {
                first[w.symbols()[0] as usize] += m;
                second[w.symbols()[1] as usize] += m;
            }
            return first.iter().zip(&second).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        }
        let short = WordTable::new(self.states().spec(), n - 1);
        let mut head = vec![0.0; short.size()];
        let mut tail = vec![0.0; short.size()];
        for (w, &m) in self.states().words().iter().zip(&self.gibbs) {
            let s = w.symbols();
            head[short.index_of(&s[..n - 1]).unwrap()] += m;
            tail[short.index_of(&s[1..]).unwrap()] += m;
        }
        head.iter().zip(&tail).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

fn power_iteration(mul: impl Fn(&[f64]) -> Vec<f64>, n: usize) -> Result<(f64, Vec<f64>, f64, usize)> {
    let mut x = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for it in 1..=POWER_CAP {
        let y = mul(&x);
        let sy: f64 = y.iter().sum();
        if !(sy > 0.0) || !sy.is_finite() {
            return Err(Error::NonPrimitive);
        }
        let lambda = sy;
        let xmax = x.iter().fold(0.0f64, |m, v| m.max(*v));
        residual = y.iter().zip(&x).map(|(a, b)| (a - lambda * b).abs()).fold(0.0, f64::max) / (lambda * xmax);
        x = y.into_iter().map(|v| v / sy).collect();
        if residual < POWER_TOL {
            return Ok((lambda, x, residual, it));
        }
    }
    Err(Error::NoConvergence { iterations: POWER_CAP, residual })
}

pub(crate) fn rpf_of(graph: &Arc<WordGraph>, m: &Csr<f64>) -> Result<RpfData> {
    let n = graph.dim();
    let (lambda, mut h, r1, i1) = power_iteration(|x| m.mul_vec(x), n)?;
    let (_, mut nu, r2, i2) = power_iteration(|y| m.vec_mul(y), n)?;
    if h.iter().chain(&nu).any(|&v| !(v > 0.0)) {
        return Err(Error::NonPrimitive);
    }
    let snu: f64 = nu.iter().sum();
    nu.iter_mut().for_each(|v| *v /= snu);
    let pairing: f64 = h.iter().zip(&nu).map(|(a, b)| a * b).sum();
    h.iter_mut().for_each(|v| *v /= pairing);
    let gibbs: Vec<f64> = h.iter().zip(&nu).map(|(a, b)| a * b).collect();
    let mut edge_measure = vec![0.0; graph.edges.size()];
    for u in 0..n {
        for e in m.row_ptr[u]..m.row_ptr[u + 1] {
            edge_measure[graph.edge_word[e]] = nu[u] * m.val[e] * h[m.col[e]] / lambda;
        }
    }
    Ok(RpfData {
        lambda,
        h,
        nu,
        gibbs,
        edge_measure,
        residual: r1.max(r2),
        iterations: i1.max(i2),
        states: Some(graph.states.clone()),
    })
}

/// RPF eigendata of `L_q` at `depth`.
pub fn rpf(q: &Potential, depth: usize) -> Result<RpfData> {
    OperatorFamily::single(q, depth).rpf(0.0, 0.0)
}

/// Topological pressure `log λ` of `q`.
pub fn pressure(q: &Potential, depth: usize) -> Result<f64> {
    Ok(rpf(q, depth)?.lambda.ln())
}

/// `∫ p dm` for the Gibbs measure of `rpf`.
pub fn equilibrium_integral(rpf: &RpfData, p: &Potential) -> Result<f64> {
    let n = rpf.depth();
    if p.depth() <= n {
        Ok(rpf.states().words().iter().zip(&rpf.gibbs).map(|(w, m)| m * p.lookup(w.symbols()).unwrap()).sum())
    } else if p.depth() == n + 1 {
        let edges = WordTable::new(rpf.states().spec(), n + 1);
        Ok(edges.words().iter().zip(&rpf.edge_measure).map(|(w, m)| m * p.lookup(w.symbols()).unwrap()).sum())
    } else {
        Err(Error::DepthMismatch { depth: p.depth(), max: n + 1 })
    }
}

/// Root `P_f` of `a ↦ Pr(f − aτ)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PfSolution {
    pub p: f64,
    pub residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

pub fn solve_pf(f: &Potential, tau: &Roof, depth: usize) -> Result<PfSolution> {
    let zero = Potential::zero(f.spec());
    let family = OperatorFamily::new(f, tau, &zero, depth);
    solve_pf_family(&family)
}

pub(crate) fn solve_pf_family(family: &OperatorFamily) -> Result<PfSolution> {
    let mut pr = |a: f64| family.pressure(a, 0.0);
    let (lo, hi, flo, fhi) = bracket_decreasing(&mut pr, 0.0, 1.0)?;
    let (p, iterations) = secant_bisect(&mut pr, lo, hi, flo, fhi, 1e-14)?;
    let residual = pr(p)?;
    Ok(PfSolution { p, residual, bracket: (lo, hi), iterations })
}

/// `f₀ = f − Pτ + ln h − ln h∘σ − ln λ` as a table on `(n+1)`-words.
#[derive(Clone, Debug)]
pub struct NormalizedPotential {
    pub f0: Potential,
    pub p: f64,
    pub log_lambda: f64,
    pub rpf: RpfData,
    pub depth: usize,
}

pub fn normalize(f: &Potential, tau: &Potential, p: f64, depth: usize) -> Result<NormalizedPotential> {
    let zero = Potential::zero(f.spec());
    let family = OperatorFamily::new(f, tau, &zero, depth);
    let m = family.real(p, 0.0);
    let data = rpf_of(&family.graph, &m)?;
    let graph = &family.graph;
    let mut values = vec![0.0; graph.edges.size()];
    for u in 0..graph.dim() {
        for e in graph.row_ptr[u]..graph.row_ptr[u + 1] {
            let v = graph.src[e];
            values[graph.edge_word[e]] =
                family.f[e] - p * family.tau[e] + data.h[v].ln() - data.h[u].ln() - data.lambda.ln();
        }
    }
    let f0 = Potential::from_values(graph.edges.clone(), values)?;
    Ok(NormalizedPotential { f0, p, log_lambda: data.lambda.ln(), rpf: data, depth: graph.depth() })
}

impl NormalizedPotential {
    /// Gibbs measure of `f − Pτ`, the invariant measure of `L_{f₀}^*`.
    pub fn measure(&self) -> &[f64] {
        &self.rpf.gibbs
    }

    pub fn operator(&self) -> Csr<f64> {
        OperatorFamily::single(&self.f0, self.depth).real(0.0, 0.0)
    }

    /// `‖L_{f₀} 1 − 1‖∞`.
    pub fn row_sum_defect(&self) -> f64 {
        let m = self.operator();
        let ones = vec![1.0; m.dim()];
        m.mul_vec(&ones).iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `|∫ L_{f₀}H dμ − ∫ H dμ|` for a cylinder function `H`.
    pub fn adjoint_residual(&self, h: &[f64]) -> f64 {
        let m = self.operator();
        let lh = m.mul_vec(h);
        let mu = self.measure();
        let a: f64 = lh.iter().zip(mu).map(|(x, w)| x * w).sum();
        let b: f64 = h.iter().zip(mu).map(|(x, w)| x * w).sum();
        (a - b).abs()
    }
}

/// Options for following an eigenvalue branch.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TrackOptions {
    pub initial_step: f64,
    pub min_step: f64,
    pub min_separation: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        TrackOptions { initial_step: 0.02, min_step: 1e-7, min_separation: 1e-8 }
    }
}

/// The continued leading eigenvalue and its diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexEigen {
    pub value: Complex64,
    pub modulus: f64,
    pub phase: f64,
    /// `|λ|` minus the largest modulus among the other eigenvalues.
    pub gap: f64,
    /// Distance from `λ` to the nearest other eigenvalue.
    pub separation: f64,
    pub steps: usize,
    #[serde(skip)]
    pub right: Vec<Complex64>,
    #[serde(skip)]
    pub left: Vec<Complex64>,
}

fn nearest_two(ev: &[Complex64], target: Complex64) -> (usize, f64, f64) {
    let mut best = (usize::MAX, f64::INFINITY, f64::INFINITY);
    for (i, l) in ev.iter().enumerate() {
        let d = (l - target).norm();
        if d < best.1 {
            best = (i, d, best.1);
        } else if d < best.2 {
            best.2 = d;
        }
    }
    best
}

fn check_dense(dim: usize) -> Result<()> {
    if dim > DENSE_LIMIT {
        return Err(Error::InvalidParameter(format!("dense eigensolve limited to dimension {DENSE_LIMIT}, got {dim}")));
    }
    Ok(())
}

/// Follows the real RPF eigenvalue at `(Re s, Re z)` along the straight path
/// to `(s, z)`, choosing at each step the eigenvalue nearest the linear
/// predictor, and polishes the endpoint by inverse iteration.
pub fn leading_eigendata_complex(
    family: &OperatorFamily,
    params: ComplexParams,
    opts: &TrackOptions,
) -> Result<ComplexEigen> {
    check_dense(family.dim())?;
    let seed = family.rpf(params.s.re, params.z.re)?;
    let at = |t: f64| {
        let s = Complex64::new(params.s.re, t * params.s.im);
        let z = Complex64::new(params.z.re, t * params.z.im);
        family.dense(s, z)
    };
    let mut lam = Complex64::new(seed.lambda, 0.0);
    let mut prev: Option<(f64, Complex64)> = None;
    let (mut t, mut h, mut steps) = (0.0f64, opts.initial_step, 0usize);
    let moving = params.s.im != 0.0 || params.z.im != 0.0;
    while moving && t < 1.0 {
        let tn = (t + h).min(1.0);
        let pred = match prev {
            Some((tp, lp)) => lam + (lam - lp) * ((tn - t) / (t - tp)),
            None => lam,
        };
        let ev = eigenvalues(&at(tn));
        let (i, d1, d2) = nearest_two(&ev, pred);
        let scale = 1e-3 * (1.0 + lam.norm());
        if d1 <= 0.25 * d2 && d1 <= 0.1 * (1.0 + lam.norm()) || d1 < scale * 1e-6 {
            prev = Some((t, lam));
            lam = ev[i];
            t = tn;
            steps += 1;
            h = (h * 1.5).min(0.1);
        } else {
            h *= 0.5;
            if h < opts.min_step {
                return Err(Error::EigenvalueCollision { separation: d2 });
            }
        }
    }
    let m = at(1.0);
    let ev = eigenvalues(&m);
    let (i, _, _) = nearest_two(&ev, lam);
    let lam = ev[i];
    let separation = ev.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, l)| (l - lam).norm()).fold(f64::INFINITY, f64::min);
    if separation < opts.min_separation {
        return Err(Error::EigenvalueCollision { separation });
    }
    let others = ev.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, l)| l.norm()).fold(0.0, f64::max);
    let pair = inverse_iteration(&m, lam)?;
    Ok(ComplexEigen {
        value: pair.value,
        modulus: pair.value.norm(),
        phase: pair.value.arg(),
        gap: pair.value.norm() - others,
        separation,
        steps,
        right: pair.right.iter().copied().collect(),
        left: pair.left.iter().copied().collect(),
    })
}

/// The root `s(z)` of `Pr(f − sτ + zg) = 0` continued from `s(0) = P_f`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SzSolution {
    pub s: Complex64,
    pub eigenvalue: Complex64,
    /// `ds/dz` at the solution.
    pub derivative: Complex64,
    pub separation: f64,
    pub steps: usize,
}

struct NewtonPoint {
    s: Complex64,
    lambda: Complex64,
    ds_dz: Complex64,
    separation: f64,
}

fn newton_s(family: &OperatorFamily, s0: Complex64, z: Complex64, opts: &TrackOptions) -> Result<NewtonPoint> {
    let mut s = s0;
    for _ in 0..60 {
        let m = family.dense(s, z);
        let ev = eigenvalues(&m);
        let one = Complex64::new(1.0, 0.0);
        let (i, d1, d2) = nearest_two(&ev, one);
        if d2 < opts.min_separation || d2 < 2.0 * d1 {
            return Err(Error::EigenvalueCollision { separation: d2 });
        }
        let pair = inverse_iteration(&m, ev[i])?;
        let denom = pair.left.dot(&pair.right);
        let mt = family.weighted_dense(s, z, true);
        let mg = family.weighted_dense(s, z, false);
        let dl_ds = -pair.left.dot(&(&mt * &pair.right)) / denom;
        let dl_dz = pair.left.dot(&(&mg * &pair.right)) / denom;
        let err = pair.value - one;
        if err.norm() < 1e-14 {
            let separation = ev.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, l)| (l - pair.value).norm()).fold(f64::INFINITY, f64::min);
            return Ok(NewtonPoint { s, lambda: pair.value, ds_dz: -dl_dz / dl_ds, separation });
        }
        s -= err / dl_ds;
    }
    Err(Error::NoConvergence { iterations: 60, residual: f64::NAN })
}

pub fn solve_s_of_z(family: &OperatorFamily, z: Complex64, opts: &TrackOptions) -> Result<SzSolution> {
    check_dense(family.dim())?;
    let pf = solve_pf_family(family)?;
    let mut cur = newton_s(family, Complex64::new(pf.p, 0.0), Complex64::new(0.0, 0.0), opts)?;
    let (mut t, mut h, mut steps) = (0.0f64, (0.05 / z.norm().max(1e-300)).min(1.0), 0usize);
    while t < 1.0 {
        let tn = (t + h).min(1.0);
        let pred = cur.s + cur.ds_dz * z * (tn - t);
        match newton_s(family, pred, z * tn, opts) {
            Ok(next) if (next.s - pred).norm() < 0.1 * (1.0 + pred.norm()) => {
                cur = next;
                t = tn;
                steps += 1;
                h = (h * 1.5).min(1.0);
            }
            _ => {
                h *= 0.5;
                if h < opts.min_step {
                    return Err(Error::EigenvalueCollision { separation: cur.separation });
                }
            }
        }
    }
    if cur.separation < opts.min_separation {
        return Err(Error::EigenvalueCollision { separation: cur.separation });
    }
    Ok(SzSolution { s: cur.s, eigenvalue: cur.lambda, derivative: cur.ds_dz, separation: cur.separation, steps })
}

/// `(1/n) log Z_n(q)` for `n = 1..n_max` against the pressure.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PressureSequence {
    pub terms: Vec<f64>,
    pub pressure: f64,
    pub final_gap: f64,
}

pub fn pressure_via_zn(q: &Potential, n_max: usize) -> Result<PressureSequence> {
    let zero = Potential::zero(q.spec());
    let sums = crate::zeta::PeriodicSums::enumerate(q, &zero, &zero, n_max, crate::zeta::DEFAULT_BUDGET)?;
    let terms: Vec<f64> = (1..=n_max)
        .map(|n| sums.zn(n, ComplexParams::zero()).re.ln() / n as f64)
        .collect();
    let p = pressure(q, exact_depth(&[q]))?;
    let final_gap = terms.last().map(|t| (t - p).abs()).unwrap_or(f64::NAN);
    Ok(PressureSequence { terms, pressure: p, final_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sft::SubshiftSpec;

    const PHI: f64 = 1.618_033_988_749_895;

    #[test]
    fn matrix_examples() {
        let f2 = SubshiftSpec::full_shift(2);
        let zero = Potential::zero(&f2);
        let one = Potential::constant(&f2, 1.0);
        let m = build_matrix(&zero, &one, &zero, ComplexParams::zero(), 1);
        let d = m.to_dense();
        assert!(d.iter().all(|v| (*v - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        let g = SubshiftSpec::golden_mean();
        let gz = Potential::zero(&g);
        let mg = build_matrix(&gz, &gz, &gz, ComplexParams::zero(), 1);
        let dg = mg.to_dense();
        assert_eq!(dg[(1, 1)], Complex64::new(0.0, 0.0));
        assert_eq!(dg[(0, 1)], Complex64::new(1.0, 0.0));
        let mpi = build_matrix(&zero, &one, &zero, ComplexParams::from_sz(Complex64::new(0.0, std::f64::consts::PI), Complex64::new(0.0, 0.0), 0.0), 1);
        let ev = eigenvalues(&mpi.to_dense());
        let lead = ev.iter().max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap()).unwrap();
        assert!((lead - Complex64::new(-2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn apply_examples() {
        let g = SubshiftSpec::golden_mean();
        let z = Potential::zero(&g);
        let m = build_matrix(&z, &z, &z, ComplexParams::zero(), 1);
        let out = m.apply(&[Complex64::new(1.0, 0.0); 2]).unwrap();
        assert_eq!(out, vec![Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert!(m.apply(&[Complex64::new(1.0, 0.0)]).is_err());
        assert!(m.apply(&[Complex64::new(0.0, 0.0); 2]).unwrap().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn rpf_examples() {
        let f2 = SubshiftSpec::full_shift(2);
        let r = rpf(&Potential::zero(&f2), 1).unwrap();
        assert!((r.lambda - 2.0).abs() < 1e-13);
        assert!(r.h.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(r.nu.iter().all(|v| (v - 0.5).abs() < 1e-12));

        let g = SubshiftSpec::golden_mean();
        let r = rpf(&Potential::zero(&g), 1).unwrap();
        assert!((r.lambda - PHI).abs() < 1e-12);
        assert!((r.h[0] / r.h[1] - PHI).abs() < 1e-11);
        assert!((r.nu[0] / r.nu[1] - PHI).abs() < 1e-11);
        let pairing: f64 = r.h.iter().zip(&r.nu).map(|(a, b)| a * b).sum();
        assert!((pairing - 1.0).abs() < 1e-14);

        let p = 0.3f64;
        let q = Potential::symbolwise(&f2, &[p.ln(), (1.0 - p).ln()]).unwrap();
        let r = rpf(&q, 1).unwrap();
        assert!((r.lambda - 1.0).abs() < 1e-13);
        assert!((r.gibbs[0] - p).abs() < 1e-12);
    }

    #[test]
    fn pressure_examples() {
        let f2 = SubshiftSpec::full_shift(2);
        assert!((pressure(&Potential::zero(&f2), 1).unwrap() - 2f64.ln()).abs() < 1e-13);
        let g = SubshiftSpec::golden_mean();
        assert!((pressure(&Potential::zero(&g), 1).unwrap() - PHI.ln()).abs() < 1e-13);
        let c = Potential::constant(&f2, 0.7);
        assert!((pressure(&c, 1).unwrap() - 2f64.ln() - 0.7).abs() < 1e-13);
    }

    #[test]
    fn pf_examples() {
        let f2 = SubshiftSpec::full_shift(2);
        let zero = Potential::zero(&f2);
        let one = Roof::constant(&f2, 1.0).unwrap();
        assert!((solve_pf(&zero, &one, 1).unwrap().p - 2f64.ln()).abs() < 1e-12);
        let tau = Roof::symbolwise(&f2, &[1.0, 2.0]).unwrap();
        assert!((solve_pf(&zero, &tau, 1).unwrap().p - PHI.ln()).abs() < 1e-12);
        let g = SubshiftSpec::golden_mean();
        let sol = solve_pf(&Potential::zero(&g), &Roof::constant(&g, 1.0).unwrap(), 1).unwrap();
        assert!((sol.p - PHI.ln()).abs() < 1e-12);
        assert!(sol.residual.abs() < 1e-12);
    }

    #[test]
    fn normalization_examples() {
        let f2 = SubshiftSpec::full_shift(2);
        let n = normalize(&Potential::zero(&f2), &Potential::constant(&f2, 1.0), 2f64.ln(), 1).unwrap();
        assert!(n.f0.values().iter().all(|v| (v + 2f64.ln()).abs() < 1e-13));
        assert!(n.row_sum_defect() < 1e-13);
        let g = SubshiftSpec::golden_mean();
        let n = normalize(&Potential::zero(&g), &Potential::constant(&g, 1.0), PHI.ln(), 1).unwrap();
        assert!(n.row_sum_defect() < 1e-13);
    }

    #[test]
    fn equilibrium_examples() {
        let f2 = SubshiftSpec::full_shift(2);
        let r = rpf(&Potential::zero(&f2), 1).unwrap();
        let p = Potential::symbolwise(&f2, &[0.4, 1.8]).unwrap();
        assert!((equilibrium_integral(&r, &p).unwrap() - 1.1).abs() < 1e-12);
        assert!((equilibrium_integral(&r, &Potential::constant(&f2, 1.0)).unwrap() - 1.0).abs() < 1e-12);
        let g = SubshiftSpec::golden_mean();
        let r = rpf(&Potential::zero(&g), 1).unwrap();
        let chi = Potential::indicator(&g, &[0]);
        let want = PHI * PHI / (PHI * PHI + 1.0);
        assert!((equilibrium_integral(&r, &chi).unwrap() - want).abs() < 1e-12);
        assert!(r.invariance_defect() < 1e-13);
        let deep = Potential::indicator(&g, &[0, 0, 0]);
        assert!(matches!(equilibrium_integral(&r, &deep), Err(Error::DepthMismatch { .. })));
    }

    #[test]
    fn complex_eigen_examples() {
        let f2 = SubshiftSpec::full_shift(2);
        let tau = Potential::constant(&f2, 1.0);
        let n = normalize(&Potential::zero(&f2), &tau, 2f64.ln(), 1).unwrap();
        let zero = Potential::zero(&f2);
        let fam = OperatorFamily::new(&n.f0, &tau, &zero, 1);
        let two_pi = 2.0 * std::f64::consts::PI;
        let e = leading_eigendata_complex(&fam, ComplexParams::new(0.0, 0.0, two_pi, 0.0, 0.0), &TrackOptions::default()).unwrap();
        assert!((e.value - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let e0 = leading_eigendata_complex(&fam, ComplexParams::zero(), &TrackOptions::default()).unwrap();
        assert!((e0.value - Complex64::new(1.0, 0.0)).norm() < 1e-12);

        let g = SubshiftSpec::golden_mean();
        let tau = Potential::symbolwise(&g, &[1.0, PHI]).unwrap();
        let roof = Roof::new(tau.clone()).unwrap();
        let gz = Potential::zero(&g);
        let p = solve_pf(&gz, &roof, 1).unwrap().p;
        let n = normalize(&gz, &tau, p, 6).unwrap();
        let fam = OperatorFamily::new(&n.f0, &tau, &gz, 6);
        let e = leading_eigendata_complex(&fam, ComplexParams::new(0.0, 0.0, 3.0, 0.0, 0.0), &TrackOptions::default()).unwrap();
        assert!(e.modulus < 1.0);
    }

    #[test]
    fn s_of_z_examples() {
        let f2 = SubshiftSpec::full_shift(2);
        let zero = Potential::zero(&f2);
        let one = Potential::constant(&f2, 1.0);
        let fam = OperatorFamily::new(&zero, &one, &one, 1);
        let sol = solve_s_of_z(&fam, Complex64::new(0.3, 0.0), &TrackOptions::default()).unwrap();
        assert!((sol.s - Complex64::new(2f64.ln() + 0.3, 0.0)).norm() < 1e-12);
        let sol0 = solve_s_of_z(&fam, Complex64::new(0.0, 0.0), &TrackOptions::default()).unwrap();
        assert!((sol0.s.re - 2f64.ln()).abs() < 1e-12);
        let solc = solve_s_of_z(&fam, Complex64::new(0.1, 0.2), &TrackOptions::default()).unwrap();
        assert!((solc.s - Complex64::new(2f64.ln() + 0.1, 0.2)).norm() < 1e-12);
    }

    #[test]
    fn pressure_sequence_examples() {
        let f2 = SubshiftSpec::full_shift(2);
        let seq = pressure_via_zn(&Potential::zero(&f2), 8).unwrap();
        assert!(seq.terms.iter().all(|t| (t - 2f64.ln()).abs() < 1e-14));
        let g = SubshiftSpec::golden_mean();
        let seq = pressure_via_zn(&Potential::zero(&g), 10).unwrap();
        assert!((seq.terms[9] - PHI.ln()).abs() < 0.01);
        let c = Potential::constant(&g, 0.25);
        let shifted = pressure_via_zn(&c, 10).unwrap();
        for (a, b) in shifted.terms.iter().zip(&seq.terms) {
            assert!((a - b - 0.25).abs() < 1e-13);
        }
    }
}
