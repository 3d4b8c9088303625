//! Subshifts of finite type: transition matrices, admissible words, periodic
//! points and the symbolic metrics `d_θ` and `D`.
//!
//! Symbols are stored 0-based and displayed 1-based.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Axis, Error, Result};

pub type Symbol = u8;

/// A primitive 0/1 transition matrix on `k` symbols.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub struct SubshiftSpec {
    k: usize,
    allowed: Vec<bool>,
    successors: Vec<Vec<Symbol>>,
    exponent: usize,
}

#[derive(Serialize, Deserialize)]
struct SpecRepr {
    k: usize,
    a: Vec<Vec<i64>>,
}

impl TryFrom<SpecRepr> for SubshiftSpec {
    type Error = Error;
    fn try_from(r: SpecRepr) -> Result<Self> {
        validate_subshift(r.k, &r.a)
    }
}

impl From<SubshiftSpec> for SpecRepr {
    fn from(s: SubshiftSpec) -> Self {
        SpecRepr { k: s.k, a: s.rows() }
    }
}

/// Checks shape, binarity, irreducibility and aperiodicity of `a` and returns
/// the validated subshift together with its primitivity exponent.
pub fn validate_subshift(k: usize, a: &[Vec<i64>]) -> Result<SubshiftSpec> {
    if k == 0 || k > Symbol::MAX as usize {
        return Err(Error::Shape { k, detail: "alphabet size out of range".into() });
    }
    if a.len() != k {
        return Err(Error::Shape { k, detail: format!("{} rows", a.len()) });
    }
    let mut allowed = vec![false; k * k];
    for (i, row) in a.iter().enumerate() {
        if row.len() != k {
            return Err(Error::Shape { k, detail: format!("row {} has {} entries", i + 1, row.len()) });
        }
        for (j, &v) in row.iter().enumerate() {
            match v {
                0 => {}
                1 => allowed[i * k + j] = true,
                _ => return Err(Error::NonBinary { row: i + 1, col: j + 1, value: v }),
            }
        }
    }
    for i in 0..k {
        if !(0..k).any(|j| allowed[i * k + j]) {
            return Err(Error::ZeroRowOrColumn { axis: Axis::Row, index: i + 1 });
        }
        if !(0..k).any(|j| allowed[j * k + i]) {
            return Err(Error::ZeroRowOrColumn { axis: Axis::Column, index: i + 1 });
        }
    }
    let forward = reachable(k, |i, j| allowed[i * k + j]);
    if let Some(j) = forward.iter().position(|r| !r) {
        return Err(Error::ReducibleMatrix { from: 1, to: j + 1 });
    }
    let backward = reachable(k, |i, j| allowed[j * k + i]);
    if let Some(j) = backward.iter().position(|r| !r) {
        return Err(Error::ReducibleMatrix { from: j + 1, to: 1 });
    }
    let period = period(k, &allowed);
    if period > 1 {
        return Err(Error::PeriodicMatrix { period });
    }
    let exponent = primitivity_exponent(k, &allowed);
    let successors = (0..k)
        .map(|i| (0..k).filter(|&j| allowed[i * k + j]).map(|j| j as Symbol).collect())
        .collect();
    Ok(SubshiftSpec { k, allowed, successors, exponent })
}

fn reachable(k: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<bool> {
    let mut seen = vec![false; k];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..k {
            if edge(i, j) && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn period(k: usize, allowed: &[bool]) -> usize {
    let mut level = vec![usize::MAX; k];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for j in 0..k {
            if allowed[i * k + j] && level[j] == usize::MAX {
                level[j] = level[i] + 1;
                queue.push_back(j);
            }
        }
    }
    let mut p = 0;
    for i in 0..k {
        for j in 0..k {
            if allowed[i * k + j] {
                let diff = (level[i] + 1).abs_diff(level[j]);
                p = gcd(p, diff);
            }
        }
    }
    p
}

fn primitivity_exponent(k: usize, allowed: &[bool]) -> usize {
    let mut power = allowed.to_vec();
    let mut n = 1;
    while !power.iter().all(|&b| b) {
        let mut next = vec![false; k * k];
        for i in 0..k {
            for l in 0..k {
                if power[i * k + l] {
                    for j in 0..k {
                        next[i * k + j] |= allowed[l * k + j];
                    }
                }
            }
        }
        power = next;
        n += 1;
    }
    n
}

impl SubshiftSpec {
    /// The golden mean shift, `A = [[1,1],[1,0]]`.
    pub fn golden_mean() -> Self {
        validate_subshift(2, &[vec![1, 1], vec![1, 0]]).expect("golden mean is primitive")
    }

    /// The full shift on `k` symbols.
    pub fn full_shift(k: usize) -> Self {
        validate_subshift(k, &vec![vec![1; k]; k]).expect("full shift is primitive")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn allowed(&self, i: Symbol, j: Symbol) -> bool {
        self.allowed[i as usize * self.k + j as usize]
    }

    pub fn successors(&self, i: Symbol) -> &[Symbol] {
        &self.successors[i as usize]
    }

    /// Smallest `p` with `A^p` entrywise positive.
    pub fn primitivity_exponent(&self) -> usize {
        self.exponent
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        (0..self.k)
            .map(|i| (0..self.k).map(|j| self.allowed[i * self.k + j] as i64).collect())
            .collect()
    }

    /// `trace(A^n)` in exact integer arithmetic.
    pub fn trace_power(&self, n: usize) -> u128 {
        let k = self.k;
        let a: Vec<u128> = self.allowed.iter().map(|&b| b as u128).collect();
        let mut p = a.clone();
        for _ in 1..n {
            let mut next = vec![0u128; k * k];
            for i in 0..k {
                for l in 0..k {
                    let v = p[i * k + l];
                    if v != 0 {
                        for j in 0..k {
                            next[i * k + j] += v * a[l * k + j];
                        }
                    }
                }
            }
            p = next;
        }
        (0..k).map(|i| p[i * k + i]).sum()
    }

    pub fn is_admissible(&self, w: &[Symbol]) -> bool {
        w.iter().all(|&s| (s as usize) < self.k) && w.windows(2).all(|p| self.allowed(p[0], p[1]))
    }

    pub fn is_cyclically_admissible(&self, w: &[Symbol]) -> bool {
        !w.is_empty() && self.is_admissible(w) && self.allowed(w[w.len() - 1], w[0])
    }
}

/// An admissible finite word.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(spec: &SubshiftSpec, symbols: Vec<Symbol>) -> Result<Self> {
        if symbols.is_empty() || !spec.is_admissible(&symbols) {
            return Err(Error::InadmissibleWord { word: format_symbols(&symbols) });
        }
        Ok(Word(symbols))
    }

    /// Parses a 1-based word such as `"121"` or `"1.10.2"`.
    pub fn parse(spec: &SubshiftSpec, text: &str) -> Result<Self> {
        let symbols = parse_symbols(text, spec.k())
            .ok_or_else(|| Error::InadmissibleWord { word: text.to_string() })?;
        Word::new(spec, symbols)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Symbol {
        self.0[self.0.len() - 1]
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Serialize for PeriodicWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_symbols(&self.0))
    }
}

pub(crate) fn format_symbols(symbols: &[Symbol]) -> String {
    if symbols.iter().all(|&s| s < 9) {
        symbols.iter().map(|&s| char::from(b'1' + s)).collect()
    } else {
        symbols.iter().map(|&s| (s as usize + 1).to_string()).collect::<Vec<_>>().join(".")
    }
}

fn parse_symbols(text: &str, k: usize) -> Option<Vec<Symbol>> {
    let text = text.trim();
    let parts: Vec<usize> = if text.contains('.') {
        text.split('.').map(|p| p.trim().parse().ok()).collect::<Option<_>>()?
    } else {
        text.chars().map(|c| c.to_digit(10).map(|d| d as usize)).collect::<Option<_>>()?
    };
    parts.into_iter().map(|s| (1..=k).contains(&s).then(|| (s - 1) as Symbol)).collect()
}

/// A cyclically admissible word, i.e. a point of `Fix(σⁿ)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PeriodicWord(Word);

impl PeriodicWord {
    pub fn new(spec: &SubshiftSpec, word: Word) -> Result<Self> {
        if !spec.is_cyclically_admissible(word.symbols()) {
            return Err(Error::InadmissibleWord { word: word.to_string() });
        }
        Ok(PeriodicWord(word))
    }

    pub fn word(&self) -> &Word {
        &self.0
    }

    pub fn symbols(&self) -> &[Symbol] {
        self.0.symbols()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lexicographically minimal rotation.
    pub fn canonical(&self) -> PeriodicWord {
        let s = self.symbols();
        let best = (0..s.len())
            .map(|r| rotate(s, r))
            .min()
            .expect("non-empty word");
        PeriodicWord(Word(best))
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical() == *self
    }

    pub fn least_period(&self) -> usize {
        least_period(self.symbols())
    }

    pub fn point(&self) -> Point {
        Point::periodic_raw(self.symbols().to_vec())
    }
}

impl fmt::Display for PeriodicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn rotate(s: &[Symbol], r: usize) -> Vec<Symbol> {
    s[r..].iter().chain(&s[..r]).copied().collect()
}

fn least_period(s: &[Symbol]) -> usize {
    let n = s.len();
    (1..=n)
        .find(|&d| n % d == 0 && (0..n).all(|i| s[i] == s[i % d]))
        .unwrap_or(n)
}

/// True when `s` is strictly smaller than each of its proper rotations, i.e.
/// the canonical representative of a primitive cyclic class.
pub fn is_lyndon(s: &[Symbol]) -> bool {
    let n = s.len();
    let (mut j, mut k) = (1, 0);
    while j < n {
        match s[k].cmp(&s[j]) {
            std::cmp::Ordering::Less => {
                k = 0;
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                k += 1;
                j += 1;
            }
            std::cmp::Ordering::Greater => return false,
        }
    }
    k == 0
}

/// Admissible words of length `n` in lexicographic order.
pub fn enumerate_words(spec: &SubshiftSpec, n: usize) -> Vec<Word> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut stack: Vec<Vec<Symbol>> = (0..spec.k() as Symbol).rev().map(|s| vec![s]).collect();
    while let Some(w) = stack.pop() {
        if w.len() == n {
            out.push(Word(w));
            continue;
        }
        for &s in spec.successors(w[w.len() - 1]).iter().rev() {
            let mut next = w.clone();
            next.push(s);
            stack.push(next);
        }
    }
    out
}

/// All cyclically admissible words of length `n`; their number is `trace(Aⁿ)`.
pub fn enumerate_periodic_words(spec: &SubshiftSpec, n: usize) -> Vec<PeriodicWord> {
    enumerate_words(spec, n)
        .into_iter()
        .filter(|w| spec.allowed(w.last(), w.symbols()[0]))
        .map(PeriodicWord)
        .collect()
}

/// One canonical representative per cyclic class of least period exactly `n`.
pub fn primitive_classes(spec: &SubshiftSpec, n: usize) -> Vec<(PeriodicWord, usize)> {
    enumerate_periodic_words(spec, n)
        .into_iter()
        .filter(|p| is_lyndon(p.symbols()))
        .map(|p| (p, n))
        .collect()
}

/// Number of primitive classes of least period `n`, by Möbius inversion of
/// the traces.
pub fn primitive_class_count(spec: &SubshiftSpec, n: usize) -> u128 {
    let mut total: i128 = 0;
    for d in (1..=n).filter(|d| n % d == 0) {
        total += mobius(n / d) as i128 * spec.trace_power(d) as i128;
    }
    (total / n as i128) as u128
}

pub fn mobius(mut n: usize) -> i32 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// All admissible words of one length with index lookup.
#[derive(Debug)]
pub struct WordTable {
    spec: SubshiftSpec,
    words: Vec<Word>,
    len: usize,
}

impl WordTable {
    pub fn new(spec: &SubshiftSpec, len: usize) -> Arc<Self> {
        Arc::new(WordTable { spec: spec.clone(), words: enumerate_words(spec, len), len })
    }

    pub fn spec(&self) -> &SubshiftSpec {
        &self.spec
    }

    pub fn word_len(&self) -> usize {
        self.len
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn index_of(&self, w: &[Symbol]) -> Option<usize> {
        self.words.binary_search_by(|x| x.symbols().cmp(w)).ok()
    }
}

/// How a finite word is continued to an infinite admissible sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Continuation {
    Smallest,
    Largest,
}

/// An eventually periodic point `prefix · tail^∞`, stored in reduced form so
/// that equality of points is equality of the structs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Point {
    prefix: Vec<Symbol>,
    tail: Vec<Symbol>,
}

impl Point {
    pub fn new(spec: &SubshiftSpec, prefix: Vec<Symbol>, tail: Vec<Symbol>) -> Result<Self> {
        if tail.is_empty() || !spec.is_cyclically_admissible(&tail) {
            return Err(Error::InadmissiblePoint { position: prefix.len() });
        }
        if !spec.is_admissible(&prefix) {
            return Err(Error::InadmissiblePoint { position: 0 });
        }
        if let Some(&last) = prefix.last() {
            if !spec.allowed(last, tail[0]) {
                return Err(Error::InadmissiblePoint { position: prefix.len() });
            }
        }
        Ok(Point::reduced(prefix, tail))
    }

    pub fn periodic(spec: &SubshiftSpec, word: &[Symbol]) -> Result<Self> {
        Point::new(spec, Vec::new(), word.to_vec())
    }

    pub(crate) fn periodic_raw(tail: Vec<Symbol>) -> Self {
        Point::reduced(Vec::new(), tail)
    }

    fn reduced(mut prefix: Vec<Symbol>, tail: Vec<Symbol>) -> Self {
        let q = least_period(&tail);
        let mut tail = tail[..q].to_vec();
        while let Some(&last) = prefix.last() {
            if last != tail[q - 1] {
                break;
            }
            prefix.pop();
            tail.rotate_right(1);
        }
        Point { prefix, tail }
    }

    /// `word` followed by the deterministic successor chain picked by `rule`.
    pub fn greedy(spec: &SubshiftSpec, word: &[Symbol], rule: Continuation) -> Result<Self> {
        if word.is_empty() || !spec.is_admissible(word) {
            return Err(Error::InadmissibleWord { word: format_symbols(word) });
        }
        let pick = |s: Symbol| {
            let succ = spec.successors(s);
            match rule {
                Continuation::Smallest => succ[0],
                Continuation::Largest => succ[succ.len() - 1],
            }
        };
        let mut chain = Vec::new();
        let mut cur = pick(word[word.len() - 1]);
        while !chain.contains(&cur) {
            chain.push(cur);
            cur = pick(cur);
        }
        let start = chain.iter().position(|&c| c == cur).expect("cycle start");
        let mut prefix = word.to_vec();
        prefix.extend_from_slice(&chain[..start]);
        Ok(Point::reduced(prefix, chain[start..].to_vec()))
    }

    /// The periodic point `w^∞` when `w` is cyclically admissible, otherwise
    /// the smallest-successor continuation of `w`.
    pub fn representative(spec: &SubshiftSpec, w: &[Symbol]) -> Result<Self> {
        if spec.is_cyclically_admissible(w) {
            Ok(Point::periodic_raw(w.to_vec()))
        } else {
            Point::greedy(spec, w, Continuation::Smallest)
        }
    }

    pub fn prefix(&self) -> &[Symbol] {
        &self.prefix
    }

    pub fn tail(&self) -> &[Symbol] {
        &self.tail
    }

    pub fn symbol(&self, i: usize) -> Symbol {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.tail[(i - self.prefix.len()) % self.tail.len()]
        }
    }

    pub fn first(&self, n: usize) -> Vec<Symbol> {
        (0..n).map(|i| self.symbol(i)).collect()
    }

    pub fn shift(&self, m: usize) -> Point {
        if m <= self.prefix.len() {
            Point { prefix: self.prefix[m..].to_vec(), tail: self.tail.clone() }
        } else {
            let r = (m - self.prefix.len()) % self.tail.len();
            Point { prefix: Vec::new(), tail: rotate(&self.tail, r) }
        }
    }

    /// `word · self`, checked at the junction.
    pub fn prepend(&self, spec: &SubshiftSpec, word: &[Symbol]) -> Result<Point> {
        let mut prefix = word.to_vec();
        prefix.extend_from_slice(&self.prefix);
        Point::new(spec, prefix, self.tail.clone())
    }

    /// Length of the longest common prefix, `None` when the points coincide.
    pub fn common_prefix(&self, other: &Point) -> Option<usize> {
        let bound = self.prefix.len().max(other.prefix.len())
            + self.tail.len() / gcd(self.tail.len(), other.tail.len()) * other.tail.len();
        (0..bound).find(|&i| self.symbol(i) != other.symbol(i))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})^", format_symbols(&self.prefix), format_symbols(&self.tail))
    }
}

/// The metric `d_θ(x,y) = θ^m`, `m` the length of the common prefix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolicMetric {
    theta: f64,
}

impl SymbolicMetric {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidParameter(format!("theta = {theta} must lie in (0,1)")));
        }
        Ok(SymbolicMetric { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Expansion constant `c₀` of the shift in this metric.
    pub fn c0(&self) -> f64 {
        1.0
    }

    /// Expansion rate `γ₀ = 1/θ`.
    pub fn gamma0(&self) -> f64 {
        1.0 / self.theta
    }

    pub fn gamma1(&self) -> f64 {
        1.0 / self.theta
    }

    pub fn distance_at(&self, common_prefix: usize) -> f64 {
        self.theta.powi(common_prefix as i32)
    }
}

impl Default for SymbolicMetric {
    fn default() -> Self {
        SymbolicMetric { theta: 0.5 }
    }
}

pub fn d_theta(metric: &SymbolicMetric, x: &Point, y: &Point) -> f64 {
    match x.common_prefix(y) {
        None => 0.0,
        Some(m) => metric.distance_at(m),
    }
}

/// Diameter of the cylinder `[w]` in `d_θ`: `θ^ℓ` where `ℓ ≥ |w|` is the
/// first position at which two points of `[w]` can differ, 0 when the
/// cylinder is a single point.
pub fn cylinder_diameter(spec: &SubshiftSpec, metric: &SymbolicMetric, w: &[Symbol]) -> f64 {
    if w.is_empty() {
        return if spec.k() > 1 { 1.0 } else { 0.0 };
    }
    let mut last = w[w.len() - 1];
    let mut pos = w.len();
    for _ in 0..=spec.k() {
        let succ = spec.successors(last);
        if succ.len() > 1 {
            return metric.distance_at(pos);
        }
        last = succ[0];
        pos += 1;
    }
    0.0
}

/// Diameter of the smallest cylinder containing both points, 1 when they
/// start with different symbols.
pub fn d_metric(spec: &SubshiftSpec, metric: &SymbolicMetric, x: &Point, y: &Point) -> f64 {
    match x.common_prefix(y) {
        None => 0.0,
        Some(0) => 1.0,
        Some(m) => cylinder_diameter(spec, metric, &x.first(m)),
    }
}

/// The same quantity for two distinct cylinder words sharing `lcp` symbols.
pub(crate) fn d_metric_words(spec: &SubshiftSpec, metric: &SymbolicMetric, u: &[Symbol], lcp: usize) -> f64 {
    if lcp == 0 {
        1.0
    } else {
        cylinder_diameter(spec, metric, &u[..lcp])
    }
}

pub(crate) fn common_prefix_len(a: &[Symbol], b: &[Symbol]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// Extends `word` to `len` symbols by repeating it, falling back to the
/// smallest allowed successor where the repetition is inadmissible.
pub(crate) fn extend_periodically(spec: &SubshiftSpec, word: &[Symbol], len: usize) -> Vec<Symbol> {
    let mut out = word.to_vec();
    let mut i = 0;
    while out.len() < len {
        let last = out[out.len() - 1];
        let cand = word[i % word.len()];
        out.push(if spec.allowed(last, cand) { cand } else { spec.successors(last)[0] });
        i += 1;
    }
    out
}
