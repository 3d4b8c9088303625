use clap::ValueEnum;
use num_complex::Complex64;
use serde::Serialize;

use ruelle_core::decay::{
    lasota_yorke_check, lattice_test, measure_decay, thm6_regime_sweep, DecaySetup, LyOptions, RegimeKind, RegimeSpec, TestBank,
};
use ruelle_core::orbits::{build_catalog, hannay_ozorio_window, ho_target, lattice_step, pi_f, OrbitCatalog, OrbitWeights};
use ruelle_core::transfer::{normalize, pressure_via_zn, rpf, solve_pf, solve_s_of_z, OperatorFamily, TrackOptions};
use ruelle_core::zeta::{
    compute_zn, eta_g, residue_check, ruelle_bound_check, zeta_exact, zeta_partial, zeta_pole_bracket, BoundOptions, ResidueOptions,
    ZetaRoute,
};
use ruelle_core::{ComplexParams, Error, Potential};

use crate::config::{Model, RunConfig};
use crate::error::CliError;
use crate::output::Artifact;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Task {
    Pressure,
    Rpf,
    SolvePf,
    SolveSz,
    Zn,
    Zeta,
    RuelleCheck,
    EtaG,
    Residue,
    Orbits,
    PiF,
    HannayOzorio,
    Decay,
    LyCheck,
    LatticeTest,
}

impl Task {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }

    pub fn from_name(name: &str) -> Option<Task> {
        Task::from_str(name, false).ok()
    }
}

/// Text for stdout plus the files to write.
pub struct Outcome {
    pub summary: String,
    pub artifacts: Vec<Artifact>,
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn cplx(v: Complex64) -> [String; 2] {
    [num(v.re), num(v.im)]
}

pub fn run(task: Task, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let m = cfg.model()?;
    match task {
        Task::Pressure => pressure(cfg, &m),
        Task::Rpf => rpf_cmd(cfg, &m),
        Task::SolvePf => solve_pf_cmd(cfg, &m),
        Task::SolveSz => solve_sz(cfg, &m),
        Task::Zn => zn(cfg, &m),
        Task::Zeta => zeta(cfg, &m),
        Task::RuelleCheck => ruelle_check(cfg, &m),
        Task::EtaG => eta(cfg, &m),
        Task::Residue => residue(cfg, &m),
        Task::Orbits => orbits(cfg, &m),
        Task::PiF => pi(cfg, &m),
        Task::HannayOzorio => hannay_ozorio(cfg, &m),
        Task::Decay => decay(cfg, &m),
        Task::LyCheck => ly_check(cfg, &m),
        Task::LatticeTest => lattice(cfg, &m),
    }
}

/// `f − Re(s) τ + Re(z) g`.
fn real_potential(cfg: &RunConfig, m: &Model) -> Potential {
    m.f.minus(&m.tau.scaled(cfg.params.s[0])).plus(&m.g.scaled(cfg.params.z[0]))
}

fn grid(cfg: &RunConfig, p_f: f64) -> Vec<ComplexParams> {
    let p = &cfg.params;
    let mut out = Vec::new();
    for &a in &p.a {
        for &b in &p.b {
            for &c in &p.c {
                for &w in &p.w {
                    out.push(ComplexParams::new(p_f, a, b, c, w));
                }
            }
        }
    }
    out
}

fn family(cfg: &RunConfig, m: &Model) -> OperatorFamily {
    OperatorFamily::new(&m.f, &m.tau, &m.g, cfg.params.depth)
}

fn p_f(cfg: &RunConfig, m: &Model) -> Result<f64, CliError> {
    Ok(solve_pf(&m.f, &m.tau, cfg.params.depth)?.p)
}

#[derive(Serialize)]
struct PressureReport {
    pressure: f64,
    depth: usize,
    s: [f64; 2],
    z: [f64; 2],
    /// `(1/n) log Z_n` for `n = 1..=n_max`.
    zn_estimates: Vec<f64>,
}

fn pressure(cfg: &RunConfig, m: &Model) -> Result<Outcome, CliError> {
    let q = real_potential(cfg, m);
    let data = rpf(&q, cfg.params.depth)?;
    let value = data.lambda.ln();
    let seq = pressure_via_zn(&q, cfg.params.n_max)?;
    let report = PressureReport { pressure: value, depth: cfg.params.depth, s: cfg.params.s, z: cfg.params.z, zn_estimates: seq.terms };
    Ok(Outcome { summary: format!("{value:.10}"), artifacts: vec![Artifact::json("pressure.json", &report)] })
}

fn rpf_cmd(cfg: &RunConfig, m: &Model) -> Result<Outcome, CliError> {
    let q = real_potential(cfg, m);
    let data = rpf(&q, cfg.params.depth)?;
    let rows = data
        .states()
        .words()
        .iter()
        .enumerate()
        .map(|(i, w)| [w.to_string(), num(data.h[i]), num(data.nu[i]), num(data.gibbs[i])])
        .collect::<Vec<_>>();
    Ok(Outcome {
        summary: format!("lambda = {:.12}, pressure = {:.12}, residual {:.1e}", data.lambda, data.lambda.ln(), data.residual),
        artifacts: vec![Artifact::csv("rpf.csv", &["word", "h", "nu", "gibbs"], rows), Artifact::json("rpf.json", &data)],
    })
}

fn solve_pf_cmd(cfg: &RunConfig, m: &Model) -> Result<Outcome, CliError> {
    let sol = solve_pf(&m.f, &m.tau, cfg.params.depth)?;
    Ok(Outcome { summary: format!("{:.12}", sol.p), artifacts: vec![Artifact::json("pf.json", &sol)] })
}

fn solve_sz(cfg: &RunConfig, m: &Model) -> Result<Outcome, CliError> {
    let fam = family(cfg, m);
    let opts = TrackOptions::default();
    let mut rows = Vec::new();
    for &c in &cfg.params.c {
        for &w in &cfg.params.w {
            let sol = solve_s_of_z(&fam, Complex64::new(c, w), &opts)?;
            let [sr, si] = cplx(sol.s);
            let [dr, di] = cplx(sol.derivative);
            rows.push([num(c), num(w), sr, si, dr, di, num(sol.separation)]);
        }
    }
    let n = rows.len();
    Ok(Outcome {
        summary: format!("s(z) at {n} points"),
        artifacts: vec![Artifact::csv("sz.csv", &["c", "w", "s_re", "s_im", "ds_dz_re", "ds_dz_im", "separation"], rows)],
    })
}

fn zn(cfg: &RunConfig, m: &Model) -> Result<Outcome, CliError> {
    let params = ComplexParams::from_sz(cfg.params.s(), cfg.params.z(), 0.0);
    let table = compute_zn(&m.f, &m.tau, &m.g, params, cfg.params.n_max, cfg.params.orbits.budget as u128)?;
    let rows: Vec<[String; 3]> = (1..=cfg.params.n_max).map(|n| {
        let [re, im] = cplx(table.get(n));
        [n.to_string(), re, im]
    }).collect();
    Ok(Outcome { summary: format!("Z_1..Z_{}", cfg.params.n_max), artifacts: vec![Artifact::csv("zn.csv", &["n", "re", "im"], rows)] })
}

#[derive(Serialize)]
struct ZetaReport {
    s: [f64; 2],
    z: [f64; 2],
    n_terms: usize,
    partial: ruelle_core::zeta::ZetaPartial,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pole_bracket: Option<(f64, f64)>,
}

fn zeta(cfg: &RunConfig, m: &Model) -> Result<Outcome, CliError> {
    let fam = family(cfg, m);
    let p = &cfg.params;
    let params = ComplexParams::from_sz(p.s(), p.z(), 0.0);
    let partial = zeta_partial(&fam, params, p.zeta.n_terms);
    let exact = fam.is_exact().then(|| zeta_exact(&fam, params));
    let pole_bracket = p.zeta.pole_step.map(|step| zeta_pole_bracket(&fam, p.z[0], p.zeta.pole_start, step, p.zeta.n_terms)).transpose()?;
    let summary = if partial.divergent {
        format!("series diverges at s = {} + {}i (term ratio modulus {:.4})", p.s[0], p.s[1], partial.ratio.norm())
    } else {
        format!("zeta = {} + {}i", partial.value.re, partial.value.im)
    };
    let report = ZetaReport { s: p.s, z: p.z, n_terms: p.zeta.n_terms, partial, exact, pole_bracket };
    Ok(Outcome { summary, artifacts: vec![Artifact::json("zeta.json", &report)] })
}

fn ruelle_check(cfg: &RunConfig, m: &Model) -> Result<Outcome, CliError> {
    let p_f = p_f(cfg, m)?;
    let b = &cfg.params.bound;
    let opts = BoundOptions {
        n_max: cfg.params.n_max,
        eps: b.eps,
        nu: b.nu,
        depth: b.depth,
        theta: cfg.params.theta,
        bank_size: b.bank_size,
        seed: cfg.seed,
    };
    let sweep = ruelle_bound_check(&m.f, &m.tau, &m.g, &grid(cfg, p_f), &opts)?;
    let mut rows = Vec::new();
    for r in &sweep.reports {
        let q = r.params;
        for row in &r.rows {
            rows.push([q.a(), q.b(), q.c(), q.w(), row.n as f64, row.lhs, row.structural].map(num));
        }
    }
    let summary = format!("C_eps = {:e} (least squares {:e}), passed = {}", sweep.c_max, sweep.c_least_squares, sweep.passed);
    Ok(Outcome {
        summary,
        artifacts: vec![
            Artifact::csv("bound.csv", &["a", "b", "c", "w", "n", "lhs", "structural"], rows),
            Artifact::json("bound.json", &sweep),
        ],
    })
}

fn eta(cfg: &RunConfig, m: &Model) -> Result<Outcome, CliError> {
    let fam = family(cfg, m);
    let z = &cfg.params.zeta;
    let route = z.series_terms.map_or(ZetaRoute::Determinant, ZetaRoute::Series);
    let est = eta_g(&fam, cfg.params.s(), z.delta, z.nodes, route)?;
    Ok(Outcome {
        summary: format!("eta_g = {} + {}i (richardson {:.1e})", est.value.re, est.value.im, est.richardson),
        artifacts: vec![Artifact::json("eta_g.json", &est)],
    })
}

fn residue(cfg: &RunConfig, m: &Model) -> Result<Outcome, CliError> {
    let r = &cfg.params.residue;
    let opts = ResidueOptions { radius: r.radius, s_nodes: r.s_nodes, delta: r.delta, xi_nodes: r.xi_nodes };
    let rep = residue_check(&m.f, &m.tau, &m.g, cfg.params.depth, &opts)?;
    Ok(Outcome {
        summary: format!("residue {:.10}, target {:.10}, relative error {:.2e}", rep.residue.re, rep.target, rep.relative_error),
        artifacts: vec![Artifact::json("residue.json", &rep)],
    })
}

fn expansion(cfg: &RunConfig, m: &Model) -> Result<Potential, CliError> {
    match &m.f_u {
        Some(p) => Ok(p.clone()),
        None => {
            let p = p_f(cfg, m)?;
            Ok(normalize(&m.f, &m.tau, p, cfg.params.depth)?.f0)
        }
    }
}

fn catalog(cfg: &RunConfig, m: &Model, f_u: &Potential, horizon: f64) -> Result<OrbitCatalog, CliError> {
    let w = OrbitWeights { tau: &m.tau, f: &m.f, g: &m.g, f_u };
    Ok(build_catalog(&w, horizon, cfg.params.orbits.budget as u128)?)
}

fn orbits(cfg: &RunConfig, m: &Model) -> Result<Outcome, CliError> {
    let f_u = expansion(cfg, m)?;
    let cat = catalog(cfg, m, &f_u, cfg.params.orbits.horizon)?;
    let rows: Vec<[String; 6]> = cat
        .records
        .iter()
        .map(|r| [r.rep.to_string(), r.n.to_string(), num(r.lam), num(r.lam_f), num(r.lam_g), num(r.lam_u)])
        .collect();
    #[derive(Serialize)]
    struct Summary<'a> {
        horizon: f64,
        n_cap: usize,
        orbits: usize,
        lengths: &'a [ruelle_core::orbits::LengthCount],
    }
    let summary = Summary { horizon: cat.horizon, n_cap: cat.n_cap, orbits: cat.records.len(), lengths: &cat.lengths };
    Ok(Outcome {
        summary: format!("{} primitive orbits with lambda <= {}", cat.records.len(), cat.horizon),
        artifacts: vec![
            Artifact::csv("catalog.csv", &["word", "n", "lambda", "lamF", "lamG", "lamU"], rows),
            Artifact::json("orbits.json", &summary),
        ],
    })
}

fn t_horizon(cfg: &RunConfig, slack: f64) -> Result<f64, CliError> {
    let t = &cfg.params.orbits.t;
    let max = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if t.is_empty() || !max.is_finite() {
        return Err(Error::InvalidParameter("params.orbits.t must list at least one finite time".into()).into());
    }
    Ok(max + slack)
}

fn pi(cfg: &RunConfig, m: &Model) -> Result<Outcome, CliError> {
    let p_f = p_f(cfg, m)?;
    let f_u = expansion(cfg, m)?;
    let cat = catalog(cfg, m, &f_u, t_horizon(cfg, 0.0)?)?;
    let lattice = lattice_step(&m.tau, cfg.params.n_max).is_some();
    let reports = cfg.params.orbits.t.iter().map(|&t| pi_f(&cat, p_f, t, lattice)).collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<[String; 5]> =
        reports.iter().map(|r| [num(r.t), r.orbits.to_string(), num(r.value), num(r.li_target), num(r.ratio)]).collect();
    let last = reports.last().expect("nonempty grid");
    Ok(Outcome {
        summary: format!("pi_F({}) / li = {:.6}{}", last.t, last.ratio, if lattice { " (lattice roof)" } else { "" }),
        artifacts: vec![
            Artifact::csv("pi_f.csv", &["T", "orbits", "value", "target", "ratio"], rows),
            Artifact::json("pi_f.json", &reports),
        ],
    })
}

#[derive(Serialize)]
struct WindowRow {
    t: f64,
    delta: f64,
    orbits: usize,
    value: Option<f64>,
    target: f64,
    ratio: Option<f64>,
}

fn hannay_ozorio(cfg: &RunConfig, m: &Model) -> Result<Outcome, CliError> {
    let o = &cfg.params.orbits;
    let f_u = expansion(cfg, m)?;
    let (target, _) = ho_target(&f_u, &m.tau, &m.g, cfg.params.depth)?;
    let slack = o.t.iter().map(|&t| o.window.width(t) / 2.0).fold(0.0, f64::max);
    let cat = catalog(cfg, m, &f_u, t_horizon(cfg, slack)?)?;
    let mut rows = Vec::new();
    for &t in &o.t {
        let delta = o.window.width(t);
        match hannay_ozorio_window(&cat, t, delta, o.weight, target) {
            Ok(r) => rows.push(WindowRow { t, delta, orbits: r.orbits, value: Some(r.estimate), target, ratio: Some(r.estimate / target) }),
            Err(Error::EmptyWindow { .. }) if o.window.out_of_reach() => {
                rows.push(WindowRow { t, delta, orbits: 0, value: None, target, ratio: None })
            }
            Err(e) => return Err(e.into()),
        }
    }
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    let csv_rows: Vec<[String; 6]> =
        rows.iter().map(|r| [num(r.t), num(r.delta), r.orbits.to_string(), opt(r.value), num(r.target), opt(r.ratio)]).collect();
    let last = rows.last().expect("nonempty grid");
    let summary = match last.ratio {
        Some(r) => format!("window estimate / target at T = {}: {:.6}", last.t, r),
        None => format!("window at T = {} holds no orbit; exponential windows are out of statistical reach", last.t),
    };
    #[derive(Serialize)]
    struct Report<'a> {
        target: f64,
        out_of_reach: bool,
        rows: &'a [WindowRow],
    }
    let report = Report { target, out_of_reach: o.window.out_of_reach(), rows: &rows };
    Ok(Outcome {
        summary,
        artifacts: vec![
            Artifact::csv("hannay_ozorio.csv", &["T", "delta", "orbits", "value", "target", "ratio"], csv_rows),
            Artifact::json("hannay_ozorio.json", &report),
        ],
    })
}

fn decay(cfg: &RunConfig, m: &Model) -> Result<Outcome, CliError> {
    let p = &cfg.params;
    let d = &p.decay;
    let (fit, shift) = if d.regime == RegimeKind::WLeading {
        let (rc, fit) =
            thm6_regime_sweep(&m.f, &m.tau, &m.g, d.big_b, d.mu_hat, &p.w, p.depth, d.m_max, d.bank_size, cfg.seed, &m.metric)?;
        (fit, Some(rc.d_shift))
    } else {
        let setup = DecaySetup::new(&m.f, &m.tau, &m.g, p.depth)?;
        let bank = TestBank::new(setup.family.graph().states().clone(), d.bank_size, cfg.seed, m.metric.theta());
        let points = grid(cfg, 0.0).iter().map(|q| [q.a(), q.b(), q.c(), q.w()]).collect();
        let regime = RegimeSpec { kind: d.regime, big_b: d.big_b, nu: d.nu, threshold: d.threshold, grid: points };
        (measure_decay(&setup, &regime, d.m_max, &bank, &m.metric)?, None)
    };
    let mut rows = Vec::new();
    for pt in &fit.points {
        for (i, norm) in pt.norms.iter().enumerate() {
            let [a, b, c, w] = pt.point.map(num);
            rows.push([a, b, c, w, (i + 1).to_string(), num(*norm)]);
        }
    }
    #[derive(Serialize)]
    struct Report<'a> {
        #[serde(skip_serializing_if = "Option::is_none")]
        d_shift: Option<f64>,
        fit: &'a ruelle_core::decay::DecayFit,
    }
    Ok(Outcome {
        summary: format!("sup rho = {:.6} over {} points", fit.rho_sup, fit.points.len()),
        artifacts: vec![
            Artifact::csv("decay.csv", &["a", "b", "c", "w", "m", "norm"], rows),
            Artifact::json("decay.json", &Report { d_shift: shift, fit: &fit }),
        ],
    })
}

fn ly_check(cfg: &RunConfig, m: &Model) -> Result<Outcome, CliError> {
    let p = &cfg.params;
    let opts = LyOptions {
        a: p.a.first().copied().unwrap_or(0.0),
        c: p.c.first().copied().unwrap_or(0.0),
        t: p.ly.t,
        m_max: p.ly.m_max,
        depth: p.depth,
        gamma_hat: p.ly.gamma_hat,
        amplitude: p.ly.amplitude,
        h_depth: p.ly.h_depth,
        seed: cfg.seed,
    };
    let rep = lasota_yorke_check(&m.f, &m.tau, &m.g, &m.metric, &opts)?;
    let rows: Vec<[String; 5]> =
        rep.rows.iter().map(|r| [r.m.to_string(), num(r.ratio), num(r.ratio_one), num(r.e_component), num(r.bound)]).collect();
    Ok(Outcome {
        summary: format!("A0 = {:.6}, passed = {}", rep.a0, rep.passed),
        artifacts: vec![
            Artifact::csv("ly.csv", &["m", "ratio", "ratio_one", "e_component", "bound"], rows),
            Artifact::json("ly.json", &rep),
        ],
    })
}

fn lattice(cfg: &RunConfig, m: &Model) -> Result<Outcome, CliError> {
    let p = &cfg.params;
    let reports = p.b.iter().map(|&b| lattice_test(&m.f, &m.tau, b, p.depth, p.n_max)).collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<[String; 8]> = reports
        .iter()
        .map(|r| {
            let [re, im] = cplx(r.eigenvalue);
            [num(r.b), re, im, num(r.modulus), num(r.phase), num(r.orbit_defect), r.modulus_one.to_string(), r.consistent.to_string()]
        })
        .collect();
    let ones = reports.iter().filter(|r| r.modulus_one).count();
    Ok(Outcome {
        summary: format!("{ones} of {} values of b give a unimodular leading eigenvalue", reports.len()),
        artifacts: vec![
            Artifact::csv("lattice.csv", &["b", "eig_re", "eig_im", "modulus", "phase", "orbit_defect", "modulus_one", "consistent"], rows),
            Artifact::json("lattice.json", &reports),
        ],
    })
}
