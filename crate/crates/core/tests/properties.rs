use num_complex::Complex64;
use proptest::prelude::*;

use ruelle_core::decay::{ratio_condition_apply, RegimeKind, RegimeSpec};
use ruelle_core::orbits::{build_catalog, hannay_ozorio_window, pi_f, unwindowed_average, GWeight, OrbitWeights};
use ruelle_core::sft::{d_theta, enumerate_periodic_words, WordTable};
use ruelle_core::transfer::{normalize, pressure, solve_pf, OperatorFamily};
use ruelle_core::zeta::{compute_zn, zeta_exact, zeta_partial, zn_by_trace};
use ruelle_core::{ComplexParams, PeriodicWord, Point, Potential, Roof, SubshiftSpec, SymbolicMetric, Word};

fn spec_for(full: bool) -> SubshiftSpec {
    if full {
        SubshiftSpec::full_shift(2)
    } else {
        SubshiftSpec::golden_mean()
    }
}

fn table_potential(spec: &SubshiftSpec, depth: usize, raw: &[f64]) -> Potential {
    let table = WordTable::new(spec, depth);
    let values = (0..table.size()).map(|i| raw[i % raw.len()]).collect();
    Potential::from_values(table, values).unwrap()
}

fn roof(spec: &SubshiftSpec, raw: &[f64]) -> Roof {
    Roof::new(table_potential(spec, 2, raw)).unwrap()
}

fn values(lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, 4)
}

fn cyclic_word(spec: &SubshiftSpec, n: usize, pick: usize) -> Vec<u8> {
    let words = enumerate_periodic_words(spec, n);
    words[pick % words.len()].symbols().to_vec()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ultrametric(full in any::<bool>(), n in 1usize..7, picks in prop::array::uniform3(0usize..1000), theta in 0.1f64..0.9) {
        let spec = spec_for(full);
        let metric = SymbolicMetric::new(theta).unwrap();
        let pts: Vec<Point> = picks.iter().map(|&p| Point::periodic(&spec, &cyclic_word(&spec, n, p)).unwrap()).collect();
        prop_assert_eq!(d_theta(&metric, &pts[0], &pts[0]), 0.0);
        let (xy, yz, xz) = (d_theta(&metric, &pts[0], &pts[1]), d_theta(&metric, &pts[1], &pts[2]), d_theta(&metric, &pts[0], &pts[2]));
        prop_assert!(xz <= xy.max(yz) + 1e-15);
    }

    #[test]
    fn rotations_share_canonical_form_and_sums(full in any::<bool>(), n in 1usize..9, pick in 0usize..1000, r in 0usize..9, f in values(-1.0, 1.0)) {
        let spec = spec_for(full);
        let w = cyclic_word(&spec, n, pick);
        let mut rotated = w.clone();
        rotated.rotate_left(r % n);
        let a = PeriodicWord::new(&spec, Word::new(&spec, w.clone()).unwrap()).unwrap();
        let b = PeriodicWord::new(&spec, Word::new(&spec, rotated.clone()).unwrap()).unwrap();
        prop_assert_eq!(a.canonical().symbols().to_vec(), b.canonical().symbols().to_vec());
        let p = table_potential(&spec, 3, &f);
        prop_assert!((p.periodic_sum(&w) - p.periodic_sum(&rotated)).abs() < 1e-12);
    }

    #[test]
    fn coboundaries_vanish_on_orbits(full in any::<bool>(), n in 1usize..9, pick in 0usize..1000, u in values(-2.0, 2.0)) {
        let spec = spec_for(full);
        let w = cyclic_word(&spec, n, pick);
        let c = table_potential(&spec, 2, &u).coboundary();
        prop_assert!(c.periodic_sum(&w).abs() < 1e-12);
    }

    #[test]
    fn pressure_is_stable_under_lifting(full in any::<bool>(), f in values(-1.0, 1.0)) {
        let spec = spec_for(full);
        let q = table_potential(&spec, 2, &f);
        let base = pressure(&q, 1).unwrap();
        for depth in 2..=4 {
            prop_assert!((pressure(&q.lift(depth + 1), depth).unwrap() - base).abs() < 1e-11);
        }
    }

    #[test]
    fn pf_root_has_zero_pressure(full in any::<bool>(), f in values(-1.0, 1.0), t in values(0.5, 2.0)) {
        let spec = spec_for(full);
        let (f, tau) = (table_potential(&spec, 2, &f), roof(&spec, &t));
        let p = solve_pf(&f, &tau, 1).unwrap().p;
        let q = f.minus(&tau.scaled(p));
        prop_assert!(pressure(&q, 1).unwrap().abs() < 1e-10);
    }

    #[test]
    fn normalization_is_stochastic_and_invariant(full in any::<bool>(), f in values(-1.0, 1.0), t in values(0.5, 2.0), h in values(-1.0, 1.0)) {
        let spec = spec_for(full);
        let (f, tau) = (table_potential(&spec, 2, &f), roof(&spec, &t));
        let p = solve_pf(&f, &tau, 2).unwrap().p;
        let n = normalize(&f, &tau, p, 2).unwrap();
        prop_assert!(n.row_sum_defect() < 1e-12);
        let test: Vec<f64> = (0..n.measure().len()).map(|i| h[i % h.len()]).collect();
        prop_assert!(n.adjoint_residual(&test) < 1e-10);
        prop_assert!((n.measure().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zn_routes_agree_and_conjugate(full in any::<bool>(), f in values(-1.0, 1.0), t in values(0.5, 2.0), g in values(-1.0, 1.0),
                                    b in -20.0f64..20.0, c in -0.5f64..0.5, w in -0.5f64..0.5) {
        let spec = spec_for(full);
        let (f, tau, g) = (table_potential(&spec, 2, &f), roof(&spec, &t), table_potential(&spec, 2, &g));
        let fam = OperatorFamily::new(&f, &tau, &g, 1);
        let params = ComplexParams::new(0.7, 0.0, b, c, w);
        let trace = zn_by_trace(&fam, params, 8);
        let direct = compute_zn(&f, &tau, &g, params, 8, 1 << 20).unwrap();
        let mirrored = zn_by_trace(&fam, params.conj(), 8);
        let real = zn_by_trace(&fam, params.real_part(), 8);
        for n in 1..=8 {
            let scale = real.get(n).re.max(1.0);
            prop_assert!((trace.get(n) - direct.get(n)).norm() < 1e-10 * scale);
            prop_assert!((mirrored.get(n) - trace.get(n).conj()).norm() < 1e-10 * scale);
            prop_assert!(trace.get(n).norm() <= real.get(n).re * (1.0 + 1e-12));
            prop_assert!(real.get(n).re > 0.0);
        }
    }

    #[test]
    fn operator_modulus_bound(full in any::<bool>(), t in values(0.5, 2.0), b in -30.0f64..30.0, h in values(-1.0, 1.0), k in values(-1.0, 1.0)) {
        let spec = spec_for(full);
        let zero = Potential::zero(&spec);
        let tau = roof(&spec, &t);
        let p = solve_pf(&zero, &tau, 2).unwrap().p;
        let f0 = normalize(&zero, &tau, p, 2).unwrap().f0;
        let fam = OperatorFamily::new(&f0, &tau, &zero, 2);
        let twisted = fam.complex(Complex64::new(0.0, b), Complex64::new(0.0, 0.0));
        let plain = fam.real(0.0, 0.0);
        let x: Vec<Complex64> = (0..fam.dim()).map(|i| Complex64::new(h[i % 4], k[i % 4])).collect();
        let abs: Vec<f64> = x.iter().map(|v| v.norm()).collect();
        let lhs = twisted.mul_vec(&x);
        let rhs = plain.mul_vec(&abs);
        let sup = abs.iter().cloned().fold(0.0, f64::max);
        for (l, r) in lhs.iter().zip(&rhs) {
            prop_assert!(l.norm() <= r + 1e-12);
            prop_assert!(*r <= sup + 1e-12);
        }
    }

    #[test]
    fn zeta_series_approaches_determinant(t in values(0.5, 2.0), s in 1.5f64..3.0) {
        let spec = SubshiftSpec::full_shift(2);
        let zero = Potential::zero(&spec);
        let tau = roof(&spec, &t);
        let fam = OperatorFamily::new(&zero, &tau, &zero, 1);
        let params = ComplexParams::new(0.0, s, 0.0, 0.0, 0.0);
        let exact = zeta_exact(&fam, params);
        let coarse = zeta_partial(&fam, params, 10);
        let fine = zeta_partial(&fam, params, 30);
        prop_assert!((fine.raw - exact).norm() <= (coarse.raw - exact).norm() + 1e-14);
        prop_assert!((fine.value - exact).norm() < 1e-8 * exact.norm());
    }

    #[test]
    fn ratio_shift_meets_condition(g in values(-3.0, 3.0), t in values(0.5, 2.0), mu in 0.05f64..2.0, b in -10.0f64..10.0, w in -10.0f64..10.0) {
        let spec = SubshiftSpec::golden_mean();
        let (g, tau) = (table_potential(&spec, 2, &g), roof(&spec, &t));
        let rc = ratio_condition_apply(&g, &tau, mu).unwrap();
        prop_assert!(rc.a_min > 0.0);
        prop_assert!(rc.ratio() <= mu * (1.0 + 1e-9));
        // L_{f − (a+ib)τ + (c+iw)g} = L_{f − (a+ib′)τ + (c+iw)g′} with g′ = g + dτ
        let zero = Potential::zero(&spec);
        let s = Complex64::new(0.3, b);
        let (b2, w2) = rc.remap(b, w);
        let left = OperatorFamily::new(&zero, &tau, &g, 1).dense(s, Complex64::new(0.1, w));
        let right = OperatorFamily::new(&zero, &tau, &rc.g_shifted, 1).dense(Complex64::new(0.3 + 0.1 * rc.d_shift, b2), Complex64::new(0.1, w2));
        prop_assert!((left - right).norm() < 1e-9 * (1.0 + b.abs() + w.abs()));
    }

    #[test]
    fn regime_grids_obey_their_inequalities(big_b in 0.5f64..3.0, pts in prop::collection::vec((1.0f64..50.0, 0.0f64..1.0), 1..6)) {
        let grid: Vec<[f64; 4]> = pts.iter().map(|&(b, frac)| [0.0, b, 0.0, frac * big_b * b]).collect();
        let ok = RegimeSpec { kind: RegimeKind::BLeading, big_b, nu: 1.0, threshold: 1.0, grid: grid.clone() };
        prop_assert!(ok.validate().is_ok());
        let mut bad = grid;
        bad[0][3] = 2.0 * big_b * bad[0][1] + 1.0;
        let broken = RegimeSpec { kind: RegimeKind::BLeading, big_b, nu: 1.0, threshold: 1.0, grid: bad };
        prop_assert!(broken.validate().is_err());
    }

    #[test]
    fn averaging_respects_its_bound(full in any::<bool>(), f in prop::collection::vec(-1.0f64..1.0, 16), t in 1.0f64..40.0) {
        let spec = spec_for(full);
        let p = table_potential(&spec, 4, &f);
        let metric = SymbolicMetric::default();
        let avg = p.average_to_depth(t, &metric).unwrap();
        prop_assert!(avg.deviation <= avg.bound + 1e-12);
        prop_assert!(avg.potential.depth() <= avg.m.max(p.depth()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn counting_is_monotone_and_windows_recover_averages(t in values(0.8, 2.0), t1 in 4.0f64..9.0, t2 in 4.0f64..9.0) {
        let spec = SubshiftSpec::golden_mean();
        let zero = Potential::zero(&spec);
        let chi = Potential::indicator(&spec, &[0]);
        let tau = roof(&spec, &t);
        let p = solve_pf(&zero, &tau, 1).unwrap().p;
        let f0 = normalize(&zero, &tau, p, 1).unwrap().f0;
        let w = OrbitWeights { tau: &tau, f: &zero, g: &chi, f_u: &f0 };
        let cat = build_catalog(&w, 10.0, 1 << 20).unwrap();
        prop_assert!(cat.completeness_failures().is_empty());
        for r in &cat.records {
            prop_assert!(r.lam >= r.n as f64 * tau.min() - 1e-12);
        }
        let (lo, hi) = (t1.min(t2), t1.max(t2));
        if let (Ok(a), Ok(b)) = (pi_f(&cat, p, lo, false), pi_f(&cat, p, hi, false)) {
            prop_assert!(a.value <= b.value);
            prop_assert!(a.orbits <= b.orbits);
        }
        let whole = hannay_ozorio_window(&cat, hi / 2.0, hi, GWeight::Birkhoff, 1.0).unwrap();
        let plain = unwindowed_average(&cat, hi, GWeight::Birkhoff).unwrap();
        prop_assert!((whole.estimate - plain).abs() < 1e-12);
    }
}
