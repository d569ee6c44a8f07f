//! The ten acceptance criteria, one PASS/FAIL line each. Library results
//! are checked against a dense Kronecker-product oracle defined here.
//! Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use adiabat_cli::config::Step2a;
use adiabat_cli::records::{ComparisonRow, Record, Timing};
use adiabat_cli::run::default_exec;
use adiabat_cli::suites::{acceptance_config, acceptance_run, cost_trend, log_log_slope};
use adiabat_core::driver::{compute_schedule, verify_overlap_lemma, AdiabaticSchedule, RunResult};
use adiabat_core::filter::{
    gaussian_filter, make_filter_plan_with, trotter_evolve, EnergyEstimate, FilterOptions,
};
use adiabat_core::model::{build_path, HamiltonianPath, ModelSpec};
use adiabat_core::mps::{
    add_states, apply_two_site_gate, expect_product_observable, expect_two_site, inner_product,
    schmidt_spectrum, truncate_to_bond, MatrixProductState, ObservableProduct,
};
use adiabat_core::oracle::OracleLimits;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn pauli(letter: char) -> DMatrix<C64> {
    let (o, i) = (c(0., 0.), c(1., 0.));
    match letter {
        'X' => DMatrix::from_row_slice(2, 2, &[o, i, i, o]),
        'Y' => DMatrix::from_row_slice(2, 2, &[o, c(0., -1.), c(0., 1.), o]),
        'Z' => DMatrix::from_row_slice(2, 2, &[i, o, o, -i]),
        _ => DMatrix::identity(2, 2),
    }
}

/// `ops` at their sites, identity elsewhere; site 0 most significant.
fn embed(n: usize, ops: &[(usize, DMatrix<C64>)]) -> DMatrix<C64> {
    let mut out = DMatrix::from_element(1, 1, c(1., 0.));
    for site in 0..n {
        let f = ops
            .iter()
            .find(|(k, _)| *k == site)
            .map_or_else(|| pauli('I'), |(_, m)| m.clone());
        out = out.kronecker(&f);
    }
    out
}

/// `-Σ X_i - s Σ Z_i Z_{i+1}`.
fn tfim(n: usize, s: f64) -> DMatrix<C64> {
    let mut h = DMatrix::zeros(1 << n, 1 << n);
    for i in 0..n {
        h -= embed(n, &[(i, pauli('X'))]);
    }
    for i in 0..n - 1 {
        h -= embed(n, &[(i, pauli('Z')), (i + 1, pauli('Z'))]) * c(s, 0.);
    }
    h
}

struct Eigen {
    values: Vec<f64>,
    vectors: Vec<DVector<C64>>,
}

/// Ascending eigenpairs of a real symmetric matrix stored as complex.
fn eigh(h: &DMatrix<C64>) -> Eigen {
    let re = h.map(|v| v.re);
    let dim = re.nrows();
    let eig = re.symmetric_eigen();
    let mut idx: Vec<usize> = (0..dim).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    Eigen {
        values: idx.iter().map(|&k| eig.eigenvalues[k]).collect(),
        vectors: idx
            .iter()
            .map(|&k| eig.eigenvectors.column(k).map(|v| c(v, 0.)))
            .collect(),
    }
}

fn fidelity(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    a.dotc(b).norm_sqr() / (a.norm_squared() * b.norm_squared())
}

fn expect(v: &DVector<C64>, op: &DMatrix<C64>) -> C64 {
    v.dotc(&(op * v)) / c(v.norm_squared(), 0.)
}

fn aligned_distance_sqr(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    let ov = b.dotc(a);
    let phase = if ov.norm() > 0.0 {
        ov / ov.norm()
    } else {
        c(1., 0.)
    };
    (a - b * phase).norm_squared()
}

fn random_c(rng: &mut ChaCha8Rng) -> C64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

struct Outcome {
    pass: bool,
    summary: String,
}

fn outcome(pass: bool, summary: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        summary: summary.into(),
    }
}

/// Results shared by criteria 1, 2, 3 and 8.
struct Tracking {
    path: HamiltonianPath,
    schedule: AdiabaticSchedule,
    gaussian: (RunResult, f64),
    ground: DVector<C64>,
}

fn tracking() -> Tracking {
    let cfg = acceptance_config();
    let path = build_path(&cfg.model).expect("acceptance model");
    let schedule =
        compute_schedule(&path, cfg.schedule.k_max, cfg.schedule.eps_final).expect("schedule");
    let (res, _, _, secs) = acceptance_run(&cfg).expect("acceptance run");
    let ground = eigh(&tfim(8, path.s_max())).vectors.swap_remove(0);
    Tracking {
        path,
        schedule,
        gaussian: (res, secs),
        ground,
    }
}

fn criterion_1(t: &Tracking) -> Outcome {
    let n = t.path.n_sites();
    let (res, secs) = &t.gaussian;
    let min_gap = (0..=10)
        .map(|k| {
            let v = eigh(&tfim(n, 0.05 * k as f64)).values;
            v[1] - v[0]
        })
        .fold(f64::INFINITY, f64::min);
    let fid = fidelity(&res.final_state.to_dense(), &t.ground);
    let tol = 2.0 * 1e-3f64.sqrt();
    let mut worst: f64 = 0.0;
    for (k, letter) in ['Z', 'X'].into_iter().enumerate() {
        for i in 0..n {
            let want = expect(&t.ground, &embed(n, &[(i, pauli(letter))])).re;
            worst = worst.max((res.observables[k * n + i].re - want).abs());
        }
    }
    let pass = min_gap >= 1.0 && fid >= 1.0 - 1e-3 && worst <= tol && *secs <= 600.0;
    outcome(
        pass,
        format!(
            "min gap {min_gap:.4} >= 1, fidelity 1 - {:.2e} >= 1 - 1e-3, max <Z>/<X> error {worst:.2e} <= {tol:.3e}, {secs:.1} s <= 600 s",
            1.0 - fid
        ),
    )
}

fn criterion_2(t: &Tracking) -> Outcome {
    let bound = t.schedule.tracking_bound();
    let res = &t.gaussian.0;
    let measured: Vec<f64> = res.steps.iter().filter_map(|d| d.eps).collect();
    let violations = measured.iter().filter(|&&e| !(e <= bound)).count();
    let worst = measured.iter().copied().fold(0.0, f64::max);
    // the last step's eps is the final infidelity, which the dense oracle fixes independently
    let last = measured.last().copied().unwrap_or(f64::NAN);
    let local = 1.0 - fidelity(&res.final_state.to_dense(), &t.ground);
    let pass = measured.len() == t.schedule.a_max && violations == 0 && (last - local).abs() < 1e-9;
    outcome(
        pass,
        format!(
            "{} steps measured, {violations} violations, max eps {worst:.2e} <= {bound:.3e}; last-step eps matches dense oracle to {:.1e}",
            measured.len(),
            (last - local).abs()
        ),
    )
}

fn criterion_3(t: &Tracking) -> Outcome {
    let n = t.path.n_sites();
    let rep = match verify_overlap_lemma(
        &t.path,
        &t.schedule,
        &OracleLimits::default(),
        default_exec(),
    ) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let grid = t.schedule.grid();
    let ground: Vec<DVector<C64>> = grid
        .iter()
        .map(|&s| eigh(&tfim(n, s)).vectors.swap_remove(0))
        .collect();
    let mut min_overlap: f64 = 1.0;
    let mut max_step: f64 = 0.0;
    let mut agree = true;
    for p in &rep.pairs {
        let overlap = ground[p.a].dotc(&ground[p.a - 1]).norm_sqr();
        let diff = tfim(n, grid[p.a]) - tfim(n, grid[p.a - 1]);
        let step = diff.map(|v| v.re).symmetric_eigen().eigenvalues.amax();
        agree &= (overlap - p.overlap).abs() < 1e-9 && (step - p.hamiltonian_step).abs() < 1e-9;
        min_overlap = min_overlap.min(overlap);
        max_step = max_step.max(step);
    }
    let pre = t
        .gaussian
        .0
        .steps
        .iter()
        .filter_map(|d| d.pre_filter_overlap)
        .fold(1.0, f64::min);
    let bound = t.path.gap() / 4.0;
    let pass = agree && rep.pass() && min_overlap >= 0.5 && max_step <= bound + 1e-9 && pre >= 0.25;
    outcome(
        pass,
        format!(
            "{} pairs: min overlap {min_overlap:.4} >= 1/2, max ||dH|| {max_step:.4} <= {bound:.4}, min pre-filter overlap {pre:.4} >= 1/4, library agrees with dense: {agree}",
            rep.pairs.len()
        ),
    )
}

fn criterion_4() -> Outcome {
    let (n, s) = (6, 0.3);
    let path = build_path(&ModelSpec::tfim_para(n, 0.5, 1.0)).expect("model");
    let gap = path.gap();
    let eig = eigh(&tfim(n, s));
    let target = 1e-6;
    let opts = FilterOptions {
        substeps_per_unit: 100,
        ..FilterOptions::default()
    };
    let excited_sets = [
        (1..eig.values.len()).collect::<Vec<_>>(),
        vec![1],
        vec![5, 17],
    ];
    let (mut cases, mut failures) = (0, 0);
    let mut worst_a: f64 = f64::INFINITY;
    let mut worst_b: f64 = f64::NEG_INFINITY;
    for q in [9.0, 18.0, 36.0] {
        let plan = match make_filter_plan_with(q, gap, n, path.coupling(), target, &opts) {
            Ok(p) => p,
            Err(e) => return outcome(false, e.to_string()),
        };
        for excited in &excited_sets {
            let mut e = DVector::zeros(eig.vectors[0].len());
            for &k in excited {
                e += &eig.vectors[k];
            }
            e /= c(e.norm(), 0.);
            let psi = &eig.vectors[0] * c(0.6f64.sqrt(), 0.) + e * c(0.4f64.sqrt(), 0.);
            let mps = MatrixProductState::from_dense(&psi, n, 2).expect("dense input");
            for offset in [0.0, -gap / 3.0, gap / 3.0] {
                let shift = EnergyEstimate {
                    value: eig.values[0] + offset,
                    claimed_accuracy: gap / 3.0,
                };
                let out = match gaussian_filter(&mps, &path, s, &plan, &shift) {
                    Ok(o) => o,
                    Err(e) => return outcome(false, e.to_string()),
                };
                let phi = out.state.to_dense() * c(out.raw_norm, 0.);
                let ground = eig.vectors[0].dotc(&phi).norm();
                let excited_amp = (phi.norm_squared() - ground * ground).max(0.0).sqrt();
                let a_bound = 0.25 * (-q / 18.0).exp();
                let b_bound = (-2.0 * q / 9.0).exp() + target;
                worst_a = worst_a.min(ground / a_bound);
                worst_b = worst_b.max(excited_amp / b_bound);
                cases += 1;
                if !(ground >= a_bound && excited_amp <= b_bound) {
                    failures += 1;
                }
            }
        }
    }
    outcome(
        failures == 0,
        format!(
            "{cases} cases over q in {{9, 18, 36}}, {failures} failures; min ground/bound {worst_a:.3}, max excited/bound {worst_b:.3}"
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 6;
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let psi = MatrixProductState::random(n, 2, 8, &mut rng)
            .normalized()
            .expect("nonzero");
        let (out, rep) = truncate_to_bond(&psi, 4).expect("truncation");
        let realized = aligned_distance_sqr(&out.to_dense(), &psi.to_dense());
        let bound = 8.0 * (n - 1) as f64 * rep.max_discarded();
        worst = worst.max(realized / bound);
        if !(realized <= bound) || out.max_bond() > 4 {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("50 states, {failures} violations; max realized/bound {worst:.3}"),
    )
}

fn criterion_6() -> Outcome {
    const CASES: usize = 120;
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = [0.0f64; 6];
    let draw = |rng: &mut ChaCha8Rng, n: usize| {
        MatrixProductState::random(n, 2, rng.random_range(1..=5), rng)
    };
    for _ in 0..CASES {
        let n = rng.random_range(2..=8);
        let a = draw(&mut rng, n);
        let b = draw(&mut rng, n);
        let (va, vb) = (a.to_dense(), b.to_dense());

        worst[0] = worst[0].max((inner_product(&a, &b).unwrap() - va.dotc(&vb)).norm());

        let mut sites = Vec::new();
        for site in 0..n {
            if rng.random_bool(0.5) {
                sites.push((site, pauli(['X', 'Y', 'Z'][rng.random_range(0..3)])));
            }
        }
        let obs = ObservableProduct::from_sites(n, 2, &sites).unwrap();
        worst[1] = worst[1].max(
            (expect_product_observable(&a, &obs).unwrap() - expect(&va, &embed(n, &sites))).norm(),
        );

        let i = rng.random_range(0..n - 1);
        let op = pauli(['X', 'Y', 'Z'][rng.random_range(0..3)])
            .kronecker(&pauli(['X', 'Y', 'Z'][rng.random_range(0..3)]));
        let full = DMatrix::<C64>::identity(1 << i, 1 << i)
            .kronecker(&op)
            .kronecker(&DMatrix::identity(1 << (n - i - 2), 1 << (n - i - 2)));
        worst[2] = worst[2].max((expect_two_site(&a, &op, i).unwrap() - expect(&va, &full)).norm());

        let bond = rng.random_range(1..n);
        let cols = 1usize << (n - bond);
        let m = DMatrix::from_fn(1 << bond, cols, |r, k| va[r * cols + k]);
        let mut sv: Vec<f64> = m
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect();
        sv.sort_by(|x, y| y.total_cmp(x));
        let norm = sv.iter().map(|x| x * x).sum::<f64>().sqrt();
        let got = schmidt_spectrum(&a, bond).unwrap().coefficients;
        for (k, w) in sv.iter().enumerate() {
            worst[3] = worst[3].max((got.get(k).copied().unwrap_or(0.0) - w / norm).abs());
        }

        let gate = DMatrix::from_fn(4, 4, |_, _| random_c(&mut rng));
        let full = DMatrix::<C64>::identity(1 << i, 1 << i)
            .kronecker(&gate)
            .kronecker(&DMatrix::identity(1 << (n - i - 2), 1 << (n - i - 2)));
        let want = full * &va;
        let (out, _) = apply_two_site_gate(&a, &gate, (i, i + 1), None).unwrap();
        worst[4] = worst[4].max((out.to_dense() - &want).camax() / want.camax().max(1.0));

        let (x, y) = (random_c(&mut rng), random_c(&mut rng));
        let sum = add_states(&[(x, &a), (y, &b)]).unwrap();
        worst[5] = worst[5].max((sum.to_dense() - (va * x + vb * y)).camax());
    }
    let names = [
        "inner",
        "product observable",
        "two-site expectation",
        "Schmidt",
        "gate",
        "sum",
    ];
    let pass = worst.iter().all(|w| *w <= TOL);
    let detail: Vec<String> = names
        .iter()
        .zip(worst)
        .map(|(n, w)| format!("{n} {w:.1e}"))
        .collect();
    outcome(
        pass,
        format!(
            "{CASES} cases each, max deviation: {} (tol {TOL:.0e})",
            detail.join(", ")
        ),
    )
}

fn criterion_7() -> Outcome {
    let (n, s, t) = (6, 0.5, 1.0);
    let path = build_path(&ModelSpec::tfim_para(n, 0.5, 1.0)).expect("model");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let psi = MatrixProductState::random(n, 2, 4, &mut rng);
    let v = psi.to_dense();
    let eig = eigh(&tfim(n, s));
    let mut exact = DVector::zeros(v.len());
    for (e, u) in eig.values.iter().zip(&eig.vectors) {
        exact += u * (u.dotc(&v) * C64::from_polar(1.0, e * t));
    }
    let errs: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&k| {
            aligned_distance_sqr(
                &exact,
                &trotter_evolve(&psi, &path, s, t, k, None)
                    .unwrap()
                    .0
                    .to_dense(),
            )
            .sqrt()
        })
        .collect();
    let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
    let pass = ratios.iter().all(|r| (3.0..=5.0).contains(r));
    outcome(
        pass,
        format!(
            "errors {:.3e}, {:.3e}, {:.3e}; ratios {:.3}, {:.3} in [3, 5]",
            errs[0], errs[1], errs[2], ratios[0], ratios[1]
        ),
    )
}

fn criterion_8(t: &Tracking) -> Outcome {
    let row = |mode: &str, res: &RunResult, secs: f64| ComparisonRow {
        mode: mode.into(),
        steps: res.steps.len(),
        final_fidelity: Some(fidelity(&res.final_state.to_dense(), &t.ground)),
        final_energy: res.final_energy,
        max_eps: res.steps.iter().filter_map(|d| d.eps).reduce(f64::max),
        flagged_steps: res.steps.iter().filter(|d| d.flagged).count(),
        timing: Timing { wall_seconds: secs },
    };
    let mut rows = vec![row("gaussian", &t.gaussian.0, t.gaussian.1)];
    for (mode, step2a) in [("power", Step2a::Power), ("even-odd", Step2a::EvenOdd)] {
        let mut cfg = acceptance_config();
        cfg.schedule.step2a = step2a;
        cfg.schedule.fine_schedule_factor = 4;
        match acceptance_run(&cfg) {
            Ok((res, _, _, secs)) => rows.push(row(mode, &res, secs)),
            Err(e) => return outcome(false, format!("{mode}: {e}")),
        }
    }
    println!(
        "{}",
        serde_json::to_string(&Record::Comparison { rows: rows.clone() }).unwrap()
    );
    let variants_ok = rows[1..]
        .iter()
        .all(|r| r.final_fidelity.unwrap() >= 1.0 - 1e-2);
    let summary: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{} 1 - {:.2e} ({} steps)",
                r.mode,
                1.0 - r.final_fidelity.unwrap(),
                r.steps
            )
        })
        .collect();
    outcome(
        variants_ok && rows.len() == 3,
        format!("final fidelity: {}", summary.join(", ")),
    )
}

fn criterion_9() -> Outcome {
    let s = AdiabaticSchedule::from_parameters(10, 1.0, 1.0, 1.0, 16, 1e-3).unwrap();
    let exact = s.a_max == 41 && (s.delta - 1.0 / 41.0).abs() < 1e-15;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=64);
        let (j, gap, s_max) = (
            rng.random_range(0.1..5.0),
            rng.random_range(0.05..5.0),
            rng.random_range(0.0..3.0),
        );
        let sch = AdiabaticSchedule::from_parameters(n, j, gap, s_max, 8, 1e-3).unwrap();
        worst = worst.max(sch.delta * 4.0 * n as f64 * j / gap);
    }
    outcome(
        exact && worst <= 1.0 + 1e-12,
        format!(
            "a_max {} delta {:.6} (1/41 = {:.6}); max delta*4NJ/gap over 100 draws {worst:.6}",
            s.a_max,
            s.delta,
            1.0 / 41.0
        ),
    )
}

fn criterion_10() -> Outcome {
    let caps = [8usize, 16, 32];
    let times = match cost_trend(0, &caps, default_exec()) {
        Ok(t) => t,
        Err(e) => return outcome(false, e.to_string()),
    };
    let xs: Vec<f64> = caps.iter().map(|&k| k as f64).collect();
    let slope = log_log_slope(&xs, &times);
    let monotone = times.windows(2).all(|w| w[1] > w[0]);
    let seg: Vec<f64> = (0..2).map(|i| (times[i + 1] / times[i]).log2()).collect();
    let polynomial = slope > 0.0 && slope <= 6.0 && seg[1] <= 2.0 * seg[0].max(1.0);
    let band = if (2.0..=4.0).contains(&slope) {
        "inside"
    } else {
        "outside"
    };
    outcome(
        monotone && polynomial,
        format!(
            "seconds per step {:.3}, {:.3}, {:.3} for k_max 8, 16, 32 on N=10; log-log slope {slope:.2} ({band} the expected 2-4 band; at N=10 only the central bonds can grow past 8)",
            times[0], times[1], times[2]
        ),
    )
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() -> ExitCode {
    let start = Instant::now();
    let shared = tracking();
    let criteria: Vec<Criterion<'_>> = vec![
        ("ground-state tracking", Box::new(|| criterion_1(&shared))),
        ("inductive invariant", Box::new(|| criterion_2(&shared))),
        ("overlap lemma", Box::new(|| criterion_3(&shared))),
        ("filter bounds", Box::new(criterion_4)),
        ("truncation bound", Box::new(criterion_5)),
        ("mps oracle equivalence", Box::new(criterion_6)),
        ("trotter order", Box::new(criterion_7)),
        ("variant adequacy", Box::new(|| criterion_8(&shared))),
        ("schedule arithmetic", Box::new(criterion_9)),
        ("cost trend", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            o.summary
        );
    }
    println!(
        "acceptance: {}/{} passed in {:.1} s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
