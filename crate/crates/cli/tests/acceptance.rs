//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p bellspace-cli --test acceptance -- --nocapture`.

#[path = "../../core/tests/support/fock.rs"]
mod fock;

use std::f64::consts::{SQRT_2, TAU};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use bellspace::context::{covariance_check, make_context, translation_context, ContextError, TranslationSystem};
use bellspace::epr::{
    construct_processes_general, construct_processes_paper, process_correlation, rotated_correlation, sample_processes,
    tmsv_moments, verify_moments, CanonicalRotation, NoiseDistribution,
};
use bellspace::hilbert::Operator;
use bellspace::lhv::{
    chsh_bound_check, model_correlation, random_bounded_model, random_settings, random_unit_vector, sqrt3_model,
    ChshBoundReport,
};
use bellspace::spatial::{
    box_probability, disentanglement_scan, localization_factor, localized_correlation, projector_consistency_check,
    theorem4_model, DetectorRegion, LocalizedCorrelation, ScanSetup, Wavepacket,
};
use bellspace::spin::{chsh_optimize, spin_correlation, SingletCorrelation};
use bellspace::UnitVector3;
use bellspace_cli::runner::random_moments;
use bellspace_cli::{catalog, run};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: f64, what: &str) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, || format!("{what} took {elapsed:?}, limit {limit_s} s"))
}

fn singlet_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (a, b) = (random_unit_vector(&mut rng), random_unit_vector(&mut rng));
        worst = worst.max((spin_correlation(&a, &b) + a.dot(&b)).abs());
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-12, || format!("max |E + a.b| = {worst:e}"))?;
    within(elapsed, 1.0, "1000 singlet correlations")?;
    Ok(format!("max residual {worst:e} over 1000 pairs in {elapsed:?}"))
}

fn three_point_model() -> Outcome {
    let model = sqrt3_model();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst = 0.0f64;
    let mut measured = 0.0f64;
    for _ in 0..1000 {
        let (a, b) = (random_unit_vector(&mut rng), random_unit_vector(&mut rng));
        worst = worst.max((model_correlation(&model, &a, &b) - a.dot(&b)).abs());
        measured = measured.max(model.max_abs_xi(&a)).max(model.max_abs_eta(&b));
    }
    for axis in [UnitVector3::X, UnitVector3::Y, UnitVector3::Z] {
        measured = measured.max(model.max_abs_xi(&axis)).max(model.max_abs_eta(&axis));
    }
    let sqrt3 = 3f64.sqrt();
    ensure(worst <= 1e-14, || format!("max |E xi eta - a.b| = {worst:e}"))?;
    ensure((measured - sqrt3).abs() <= 1e-15, || format!("measured sup-norm {measured:.17e}"))?;
    ensure((model.sup_norm_xi() - sqrt3).abs() <= 1e-15 && (model.sup_norm_eta() - sqrt3).abs() <= 1e-15, || {
        "declared sup-norms differ from sqrt 3".into()
    })?;
    let report = chsh_bound_check(&model, &random_settings(&mut rng));
    ensure(matches!(report, ChshBoundReport::NotApplicable { .. }), || {
        format!("bound claimed applicable: {report:?}")
    })?;
    Ok(format!("max residual {worst:e}; measured sup-norm {measured:.17e}; CHSH bound not applicable"))
}

fn chsh_theorem() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut largest = f64::NEG_INFINITY;
    for _ in 0..100 {
        let model = random_bounded_model(&mut rng);
        ensure(model.sup_norm_xi() * model.sup_norm_eta() <= 1.0, || "generated model exceeds the bound".into())?;
        for _ in 0..100 {
            match chsh_bound_check(&model, &random_settings(&mut rng)) {
                ChshBoundReport::Checked { value, .. } => largest = largest.max(value),
                other => return Err(format!("bounded model judged {other:?}")),
            }
        }
    }
    ensure(largest <= 2.0 + 1e-12, || format!("CHSH value {largest:.17e} exceeds 2"))?;
    let optimum = chsh_optimize(&SingletCorrelation);
    let gap = (optimum.value - 2.0 * SQRT_2).abs();
    ensure(gap <= 1e-9, || format!("quantum optimum {:.17e}", optimum.value))?;
    let elapsed = start.elapsed();
    within(elapsed, 10.0, "CHSH sweep and optimization")?;
    Ok(format!("largest bounded-model value {largest:.17e}; quantum optimum off 2 sqrt 2 by {gap:e}; {elapsed:?}"))
}

fn epr_construction() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let matrices = random_moments(&mut rng, 1000);
    let zero_a = matrices.iter().filter(|m| m.a == 0.0).count();
    ensure(zero_a > 0, || "no A = 0 cases generated".into())?;
    let grid: Vec<CanonicalRotation> = (0..20).map(|k| CanonicalRotation::new(TAU * k as f64 / 20.0)).collect();
    let (mut general_worst, mut paper_worst, mut corr_worst) = (0.0f64, 0.0f64, 0.0f64);
    for m in &matrices {
        let general = construct_processes_general(m);
        general_worst = general_worst.max(verify_moments(&general, m));
        let paper = (m.a.abs() > 1e-12).then(|| construct_processes_paper(m).unwrap());
        if let Some(p) = &paper {
            paper_worst = paper_worst.max(verify_moments(p, m));
        }
        for &a1 in &grid {
            for &a2 in &grid {
                let target = rotated_correlation(m, a1, a2);
                corr_worst = corr_worst.max((process_correlation(&general, a1, a2) - target).abs());
                if let Some(p) = &paper {
                    corr_worst = corr_worst.max((process_correlation(p, a1, a2) - target).abs());
                }
            }
        }
    }
    ensure(general_worst == 0.0, || format!("general construction residual {general_worst:e}"))?;
    ensure(paper_worst <= 1e-12, || format!("A != 0 construction residual {paper_worst:e}"))?;
    ensure(corr_worst <= 1e-12, || format!("process vs rotated correlation gap {corr_worst:e}"))?;

    // one random matrix and angle pair per trial
    let trials = 200;
    let mut hits = 0;
    for m in matrices.iter().take(trials) {
        let (a1, a2) =
            (CanonicalRotation::new(rng.random_range(0.0..TAU)), CanonicalRotation::new(rng.random_range(0.0..TAU)));
        let seed = rng.random::<u64>();
        let est =
            sample_processes(&construct_processes_general(m), a1, a2, NoiseDistribution::Rademacher, 1_000_000, seed)
                .unwrap();
        if est.z_score(rotated_correlation(m, a1, a2)) <= 4.0 {
            hits += 1;
        }
    }
    ensure(hits * 100 >= 99 * trials, || format!("only {hits}/{trials} trials within 4 standard errors"))?;
    let elapsed = start.elapsed();
    within(elapsed, 30.0, "EPR construction checks")?;
    Ok(format!(
        "residuals general {general_worst:e}, A != 0 {paper_worst:e}; grid gap {corr_worst:e}; {zero_a} A = 0 cases; \
         {hits}/{trials} trials within 4 sigma; {elapsed:?}"
    ))
}

fn tmsv_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for r in [0.1, 0.5, 1.0] {
        let oracle = fock::tmsv_moments_oracle(r, 40);
        let m = tmsv_moments(r).map_err(|e| e.to_string())?;
        for (x, y) in [(m.a, oracle.a), (m.b, oracle.b), (m.c, oracle.c), (m.d, oracle.d)] {
            worst = worst.max((x - y).abs());
        }
    }
    ensure(worst <= 1e-6, || format!("closed form off the 40-level oracle by {worst:e}"))?;
    Ok(format!("max gap to the 40-level Fock oracle {worst:e}"))
}

fn spatial_factor() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let random_box = |rng: &mut ChaCha8Rng| {
        let center: [f64; 3] = std::array::from_fn(|_| rng.random_range(-3.0..3.0));
        let lo: [f64; 3] = std::array::from_fn(|i| center[i] - rng.random_range(0.01..3.0));
        let hi: [f64; 3] = std::array::from_fn(|i| center[i] + rng.random_range(0.01..3.0));
        DetectorRegion::new(lo, hi).unwrap()
    };
    let random_packet = |rng: &mut ChaCha8Rng| {
        Wavepacket::new(std::array::from_fn(|_| rng.random_range(-3.0..3.0)), rng.random_range(0.2..2.0)).unwrap()
    };
    for _ in 0..10_000 {
        let (p1, p2) = (random_packet(&mut rng), random_packet(&mut rng));
        let (o1, o2) = (random_box(&mut rng), random_box(&mut rng));
        let g = localization_factor(&p1, &p2, &o1, &o2);
        ensure((0.0..=1.0).contains(&g), || format!("g = {g} outside [0, 1]"))?;
    }
    let mut worst_quadrature = 0.0f64;
    for _ in 0..4 {
        let (p, o) = (random_packet(&mut rng), random_box(&mut rng));
        worst_quadrature = worst_quadrature.max(projector_consistency_check(&p, &o, 64).map_err(|e| e.to_string())?);
    }
    let p = Wavepacket::new([0.5, -1.0, 2.0], 0.8).unwrap();
    let half = DetectorRegion::half_space_above(1, -1.0).unwrap();
    worst_quadrature = worst_quadrature
        .max(projector_consistency_check(&p, &DetectorRegion::whole_space(), 64).unwrap())
        .max(projector_consistency_check(&p, &half, 64).unwrap());
    ensure(worst_quadrature <= 1e-4, || format!("quadrature residual {worst_quadrature:e}"))?;
    let full = localization_factor(&p, &p, &DetectorRegion::whole_space(), &DetectorRegion::whole_space());
    ensure((full - 1.0).abs() <= 1e-10, || format!("full-space g = {full}"))?;
    let halved = box_probability(&p, &half);
    ensure((halved - 0.5).abs() <= 1e-10, || format!("symmetric half-space g = {halved}"))?;
    Ok(format!(
        "g in [0, 1] on 10000 draws; quadrature residual {worst_quadrature:e} at 64^3; full {full}, half {halved}"
    ))
}

fn disentanglement() -> Outcome {
    let start = Instant::now();
    let sigma = 0.7;
    let setup = ScanSetup {
        p1: Wavepacket::new([0.0, 0.0, 0.0], sigma).unwrap(),
        p2: Wavepacket::new([6.0, 0.0, 0.0], sigma).unwrap(),
        o1: DetectorRegion::cube([-0.5, 0.0, 0.0], 1.0).unwrap(),
        o2: DetectorRegion::half_space_above(0, 5.0).unwrap(),
        a: UnitVector3::Z,
        b: UnitVector3::new(0.6, 0.0, 0.8).unwrap(),
    };
    let direction = [1.0 / SQRT_2, 1.0 / SQRT_2, 0.0];
    let shifts: Vec<[f64; 3]> = (0..=60).map(|k| direction.map(|d| d * 15.0 * sigma * k as f64 / 60.0)).collect();
    let rows = disentanglement_scan(&setup, &shifts).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    let peak = (0..rows.len()).max_by(|&i, &j| rows[i].g.total_cmp(&rows[j].g)).unwrap();
    for w in rows[peak..].windows(2) {
        ensure(w[1].g <= w[0].g, || format!("g rises from {} to {} at |l| = {}", w[0].g, w[1].g, w[1].shift_norm))?;
    }
    let last = rows.last().unwrap();
    ensure(last.g < 1e-6 && last.residual < 1e-6, || format!("final g {}, residual {}", last.g, last.residual))?;
    let dot = setup.a.dot(&setup.b).abs();
    let mut worst = 0.0f64;
    for row in &rows {
        // independent recomputation of g from the two marginals
        let g = box_probability(&setup.p1, &setup.o1.shifted(row.shift)) * box_probability(&setup.p2, &setup.o2);
        worst = worst.max((row.residual - g.abs() * dot).abs()).max((row.omega.abs() - row.residual).abs());
    }
    ensure(worst <= 1e-12, || format!("residual differs from |g| |a.b| by {worst:e}"))?;
    within(elapsed, 5.0, "disentanglement scan")?;
    Ok(format!(
        "peak at |l| = {:.3}, final g {:e}; residual vs |g||a.b| gap {worst:e}; {elapsed:?}",
        rows[peak].shift_norm, last.g
    ))
}

fn bounded_localized_model() -> Outcome {
    let p1 = Wavepacket::new([0.0, 0.0, 0.0], 1.0).unwrap();
    let p2 = Wavepacket::new([10.0, 0.0, 0.0], 1.0).unwrap();
    let o1 = DetectorRegion::cube([0.0, 0.0, 0.0], 1.0).unwrap();
    let o2 = DetectorRegion::half_space_above(0, 10.0).unwrap();
    let (a, b) = (UnitVector3::Z, UnitVector3::new(0.6, 0.0, 0.8).unwrap());
    let g2 = box_probability(&p2, &o2);
    let mut scanned = 0;
    let mut worst_gap = 0.0f64;
    for k in 0..=30 {
        let g1 = box_probability(&p1, &o1.shifted([0.5 * k as f64, 0.0, 0.0]));
        if g1 * g2 > 1.0 / 3.0 {
            continue;
        }
        scanned += 1;
        let (model, cert) = theorem4_model(g1, g2).map_err(|e| e.to_string())?;
        let gap = (model_correlation(&model, &a, &b) - localized_correlation(g1 * g2, &a, &b).unwrap()).abs();
        worst_gap = worst_gap.max(gap);
        ensure(cert.product_ok && cert.sup_norm_xi <= 1.0 && cert.sup_norm_eta <= 1.0, || {
            format!("certificate {cert:?}")
        })?;
    }
    ensure(scanned > 0, || "no separation with g1 g2 <= 1/3".into())?;
    ensure(worst_gap <= 1e-14, || format!("model misses omega by {worst_gap:e}"))?;

    let mut worst_chsh = 0.0f64;
    for k in 0..=20 {
        let g = k as f64 / 20.0;
        let value = chsh_optimize(&LocalizedCorrelation { g }).value;
        worst_chsh = worst_chsh.max((value - g * 2.0 * SQRT_2).abs());
        if g <= 1.0 / SQRT_2 {
            ensure(value <= 2.0, || format!("CHSH {value} > 2 at g = {g}"))?;
        }
    }
    ensure(worst_chsh <= 1e-9, || format!("localized CHSH off g 2 sqrt 2 by {worst_chsh:e}"))?;
    Ok(format!(
        "{scanned} separations certified, gap {worst_gap:e}; localized CHSH gap {worst_chsh:e} over 21 values of g"
    ))
}

fn contexts() -> Outcome {
    let norm = match make_context(vec![Operator::pauli_x(), Operator::pauli_z()], 1e-10) {
        Err(ContextError::NonCommuting { norm, .. }) => norm,
        other => return Err(format!("pauli pair gave {other:?}")),
    };
    ensure((norm - 2.0).abs() <= 1e-12, || format!("pauli commutator norm {norm}"))?;
    for n in 2..=16 {
        let ctx = translation_context(n).map_err(|e| format!("{n} sites: {e}"))?;
        ensure(ctx.tolerance() == 1e-10, || "unexpected tolerance".into())?;
    }
    let mut worst = 0.0f64;
    let mut checks = 0u64;
    for n in 2..=16 {
        let t = TranslationSystem::new(n).unwrap();
        for mask in 1u32..(1 << n) {
            let subset: Vec<usize> = (0..n).filter(|&s| mask >> s & 1 == 1).collect();
            for d in 0..n {
                worst = worst.max(covariance_check(&t, &subset, d).unwrap());
                checks += 1;
            }
        }
    }
    ensure(worst <= 1e-12, || format!("covariance residual {worst:e}"))?;
    Ok(format!(
        "pauli norm {norm}; circulant families accepted for 2..=16 sites; {checks} covariance checks, max {worst:e}"
    ))
}

fn reproducibility() -> Outcome {
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let parallel = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut files = 0;
    for scenario in catalog::all() {
        let first = serial.install(|| run(&scenario));
        let second = parallel.install(|| run(&scenario));
        ensure(first.passed && second.passed, || format!("{} failed its own assertions", scenario.name))?;
        first.write(dirs[0].path()).map_err(|e| e.to_string())?;
        second.write(dirs[1].path()).map_err(|e| e.to_string())?;
        for table in &first.table_data {
            let name = format!("{}.{}.csv", scenario.output, table.name);
            let x = std::fs::read(dirs[0].path().join(&name)).map_err(|e| e.to_string())?;
            let y = std::fs::read(dirs[1].path().join(&name)).map_err(|e| e.to_string())?;
            ensure(x == y, || format!("{name} differs between runs"))?;
            files += 1;
        }
    }
    Ok(format!("{files} CSV files byte-identical across reruns with 1 and 4 threads"))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("singlet correlation from operator algebra", singlet_identity),
        ("three-point model and its unbounded variables", three_point_model),
        ("CHSH bound for bounded models, quantum optimum", chsh_theorem),
        ("classical processes for position/momentum correlations", epr_construction),
        ("squeezed-vacuum moments against a Fock oracle", tmsv_oracle),
        ("spatial localization factor", spatial_factor),
        ("disentanglement at large distances", disentanglement),
        ("bounded classical model for localized correlations", bounded_localized_model),
        ("contexts and translation covariance", contexts),
        ("reproducible scenario output", reproducibility),
    ];
    let mut failed = Vec::new();
    for (i, (title, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or(e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {title}: {detail}", i + 1),
            Err(detail) => {
                println!("criterion {:>2} FAIL  {title}: {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
