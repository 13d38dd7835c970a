//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs as part of `cargo test` (no libtest harness).

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use franel::asymptotics::{ln_rtilde_closed, ln_rtilde_quadrature, ratio_scan};
use franel::fitting::hull_exp_fit;
use franel::profile::compute_profiles_both;
use franel::{
    brute_force_farey, compute_profile, compute_profile_with, detect_bumps, farey_interior_count, fit_table_row,
    power_law_fit, prime_set, stream_farey, totient_sieve, two_point_exp_fit, AsymptoticParams, DenominatorProfile,
    FareyFraction, IndexConvention,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(x: f64, y: f64) -> f64 {
    if x == y {
        0.0
    } else {
        (x - y).abs() / y.abs()
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        (
            "1 farey stream equals brute force, unimodular neighbours",
            stream_vs_brute_force,
        ),
        ("2 interior count n(m) = sum of phi", count_identity),
        ("3 hand-computed small orders", small_orders),
        ("4 profile sums to R(m), term counts equal phi", decomposition),
        ("5 exact rational oracle for m <= 30", exact_oracle),
        ("6 two-point exponential fit", two_point_fit),
        ("7 power-law regression recovers synthetic laws", power_law_recovery),
        ("8 parameter table for M(101,200)", table_row),
        ("9 closed form of the bound vs quadrature", closed_vs_quadrature),
        ("10 ratio decreasing on [1e5, 1e6]", ratio_decreasing),
        ("11 bumps at m = 1000 near m/j", bumps_at_1000),
        ("12 deterministic CLI output, fresh and cached", cli_determinism),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{name}] {detail} ({secs:.2}s)"),
            Err(detail) => {
                failures += 1;
                println!("FAIL [{name}] {detail} ({secs:.2}s)");
            }
        }
    }
    println!("{} of 12 criteria passed", 12 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn stream_vs_brute_force() -> Outcome {
    let mut bad = Vec::new();
    for m in 2..=200u64 {
        let streamed: Vec<FareyFraction> = stream_farey(m)
            .and_then(|s| s.collect())
            .map_err(|e| format!("m = {m}: {e}"))?;
        let brute = brute_force_farey(m).map_err(|e| format!("m = {m}: {e}"))?;
        let unimodular = streamed
            .windows(2)
            .all(|w| w[0].den * w[1].num - w[0].num * w[1].den == 1);
        if streamed != brute || !unimodular {
            bad.push(m);
        }
    }
    ensure(bad.is_empty(), format!("m = 2..=200, failing orders {bad:?}"))
}

fn count_identity() -> Outcome {
    let table = totient_sieve(6133).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for m in [5u64, 50, 1000, 6133] {
        let n = farey_interior_count(m, &table).map_err(|e| e.to_string())?;
        let streamed = stream_farey(m).map_err(|e| e.to_string())?.count() as u64;
        let direct: u64 = (2..=m).map(|k| table.phi(k)).sum();
        ok &= n == direct && streamed == n + 2;
        parts.push(format!("n({m})={n}"));
    }
    let n5 = farey_interior_count(5, &table).map_err(|e| e.to_string())?;
    ok &= n5 == 9;
    ensure(ok, parts.join(", "))
}

fn small_orders() -> Outcome {
    let tol = 1e-15;
    let r3 = compute_profile(3, IndexConvention::Interior).map_err(|e| e.to_string())?;
    let r2i = compute_profile(2, IndexConvention::Interior).map_err(|e| e.to_string())?;
    let r2p = compute_profile(2, IndexConvention::PaperLiteral).map_err(|e| e.to_string())?;
    let p2 = r3.p_value(2).unwrap_or(f64::NAN);
    let p3 = r3.p_value(3).unwrap_or(f64::NAN);
    let errs = [
        (r3.r_total() - 5.0 / 36.0).abs(),
        (p2 - 1.0 / 36.0).abs(),
        (p3 - 1.0 / 9.0).abs(),
        (r2i.r_total() - 0.25).abs(),
        r2p.r_total().abs(),
    ];
    let worst = errs.iter().copied().fold(0.0, f64::max);
    ensure(
        worst <= tol,
        format!(
            "R(3)={}, P_3(2)={p2}, P_3(3)={p3}, R(2)={} interior / {} paper-literal, worst error {worst:e}",
            r3.r_total(),
            r2i.r_total(),
            r2p.r_total()
        ),
    )
}

fn decomposition() -> Outcome {
    let table = totient_sieve(1009).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut count_ok = true;
    for m in [50u64, 500, 1000, 1009] {
        let (interior, literal) = compute_profiles_both(&table, m).map_err(|e| e.to_string())?;
        for p in [&interior, &literal] {
            worst = worst.max(rel(p.sum_of_parts(), p.r_total()));
        }
        count_ok &= interior.entries().all(|(k, _, c)| c == table.phi(k));
    }
    ensure(
        worst <= 1e-12 && count_ok,
        format!("worst relative gap {worst:e}, term counts match phi: {count_ok}"),
    )
}

/// R(m) and P_m(k) computed in exact rational arithmetic.
fn exact_profile(m: u64, convention: IndexConvention) -> (BigRational, BTreeMap<u64, BigRational>) {
    let interior: Vec<FareyFraction> = brute_force_farey(m)
        .expect("small order")
        .into_iter()
        .filter(FareyFraction::is_interior)
        .collect();
    let n = interior.len() as u64;
    let mut total = BigRational::zero();
    let mut parts: BTreeMap<u64, BigRational> = (2..=m).map(|k| (k, BigRational::zero())).collect();
    for (j, f) in (1..).zip(&interior) {
        let i = match convention {
            IndexConvention::Interior => j,
            IndexConvention::PaperLiteral if j < n => j + 1,
            IndexConvention::PaperLiteral => continue,
        };
        let x = BigRational::new(BigInt::from(f.num), BigInt::from(f.den));
        let e = BigRational::new(BigInt::from(i), BigInt::from(n));
        let d = &x - &e;
        let sq = &d * &d;
        total += &sq;
        *parts.get_mut(&f.den).expect("denominator in range") += sq;
    }
    (total, parts)
}

fn exact_oracle() -> Outcome {
    let table = totient_sieve(30).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for m in 2..=30u64 {
        for convention in IndexConvention::ALL {
            let (total, parts) = exact_profile(m, convention);
            let got = compute_profile_with(&table, m, convention).map_err(|e| e.to_string())?;
            let pairs = std::iter::once((got.r_total(), total))
                .chain(parts.into_iter().map(|(k, v)| (got.p_value(k).unwrap_or(f64::NAN), v)));
            for (x, exact) in pairs {
                let y = exact.to_f64().unwrap_or(f64::NAN);
                let err = if y == 0.0 { x.abs() } else { rel(x, y) };
                worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
            }
        }
    }
    ensure(
        worst <= 1e-12,
        format!("both conventions, R and every P_m(k), worst relative error {worst:e}"),
    )
}

fn synthetic_profile(m: u64, a: f64, b: f64) -> DenominatorProfile {
    let values: Vec<f64> = (2..=m).map(|k| (a + b * k as f64).exp()).collect();
    let counts = vec![1; values.len()];
    DenominatorProfile::from_parts(m, IndexConvention::Interior, values.len() as u64, values, counts)
        .expect("valid synthetic profile")
}

fn two_point_fit() -> Outcome {
    let profile = compute_profile(1009, IndexConvention::Interior).map_err(|e| e.to_string())?;
    let fit = two_point_exp_fit(&profile).map_err(|e| e.to_string())?;
    let anchor_err = [fit.anchor_hi, fit.anchor_lo]
        .iter()
        .map(|&(k, p)| rel(fit.eval(k as f64), p))
        .fold(0.0, f64::max);

    let mut synth_err: f64 = 0.0;
    for (m, a, b) in [(211u64, -7.0, -0.01), (1009, -9.5, -0.0042), (97, -3.0, 0.002)] {
        let s = synthetic_profile(m, a, b);
        for fit in [two_point_exp_fit(&s), hull_exp_fit(&s)] {
            let fit = fit.map_err(|e| e.to_string())?;
            synth_err = synth_err
                .max((fit.a - a).abs() / a.abs())
                .max((fit.b - b).abs() / b.abs());
        }
    }
    ensure(
        anchor_err <= 1e-9 && synth_err <= 1e-12,
        format!(
            "m=1009: a={:.6}, b={:.6e}, k*={}, anchor error {anchor_err:e}; synthetic recovery error {synth_err:e}",
            fit.a,
            fit.b,
            fit.k_star()
        ),
    )
}

fn power_law_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f00d);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let c: f64 = rng.gen_range(0.5..10.0) * if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
        let e: f64 = rng.gen_range(-1.5..0.5);
        let points: Vec<(f64, f64)> = (0..30)
            .map(|_| {
                let m: f64 = rng.gen_range(500.0..7000.0_f64).round();
                (m, c * m.powf(e))
            })
            .collect();
        let fit = power_law_fit(&points).map_err(|err| err.to_string())?;
        worst = worst.max(rel(fit.coefficient, c)).max((fit.exponent - e).abs());
    }
    ensure(worst <= 1e-10, format!("20 seeded draws, worst error {worst:e}"))
}

fn table_row() -> Outcome {
    let set = prime_set(101, 200).map_err(|e| e.to_string())?;
    let table = totient_sieve(*set.primes.last().expect("non-empty set")).map_err(|e| e.to_string())?;
    let profiles: BTreeMap<u64, DenominatorProfile> = set
        .primes
        .iter()
        .map(|&m| compute_profile_with(&table, m, IndexConvention::Interior).map(|p| (m, p)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let row = fit_table_row(&set, IndexConvention::Interior, &profiles).map_err(|e| e.to_string())?;
    let (s, t, u, v) = row.params();
    let reference = (-7.58, 0.112, 5.28, -1.037);
    let distance =
        ((s - reference.0).powi(2) + (t - reference.1).powi(2) + (u - reference.2).powi(2) + (v - reference.3).powi(2))
            .sqrt();
    let ok = s < 0.0 && t > 0.0 && u > 0.0 && v < 0.0 && (0.05..=0.2).contains(&t) && (-1.3..=-0.7).contains(&v);
    ensure(
        ok,
        format!("s={s:.4}, t={t:.4}, u={u:.4}, v={v:.4}; distance to the published row {distance:.3}"),
    )
}

fn closed_vs_quadrature() -> Outcome {
    let ms = [1e2, 1e3, 1e4, 1e5, 1e6];
    let ln_rel = |m: f64, p: &AsymptoticParams| -> Result<f64, String> {
        let c = ln_rtilde_closed(m, p).map_err(|e| e.to_string())?;
        let q = ln_rtilde_quadrature(m, p).map_err(|e| e.to_string())?;
        Ok((c - q).exp_m1().abs())
    };
    let published = AsymptoticParams::published();
    let mut worst_published: f64 = 0.0;
    for m in ms {
        let closed = franel::rtilde_closed(m, &published).map_err(|e| e.to_string())?;
        let quad = franel::rtilde_quadrature(m, &published).map_err(|e| e.to_string())?;
        worst_published = worst_published.max(rel(closed, quad));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_random: f64 = 0.0;
    for _ in 0..20 {
        let p = AsymptoticParams::new(
            rng.gen_range(-10.0..=-1.0),
            rng.gen_range(0.0..=0.3),
            rng.gen_range(1.0..=10.0),
            rng.gen_range(-1.5..=-0.5),
            1e-6,
        )
        .map_err(|e| e.to_string())?;
        for m in ms {
            worst_random = worst_random.max(ln_rel(m, &p)?);
        }
    }
    ensure(
        worst_published <= 1e-8 && worst_random <= 1e-8,
        format!("published parameters {worst_published:e}, 20 random draws {worst_random:e} (tolerance 1e-8)"),
    )
}

fn ratio_decreasing() -> Outcome {
    let series = ratio_scan(1e5, 1e6, 100, &AsymptoticParams::published()).map_err(|e| e.to_string())?;
    let violations = series.windows(2).filter(|w| w[1].1 >= w[0].1).count();
    let (first, last) = (series[0].1, series[series.len() - 1].1);
    ensure(
        violations == 0 && series.len() == 100,
        format!(
            "{} points, ratio {first:.4e} -> {last:.4e}, {violations} non-decreasing steps",
            series.len()
        ),
    )
}

fn bumps_at_1000() -> Outcome {
    let profile = compute_profile(1000, IndexConvention::Interior).map_err(|e| e.to_string())?;
    let bumps = detect_bumps(&profile);
    let mut found = Vec::new();
    let mut ok = true;
    for j in [2u64, 3, 4] {
        match bumps
            .iter()
            .filter(|b| b.j == j)
            .min_by(|x, y| x.distance.total_cmp(&y.distance))
        {
            Some(b) if b.distance <= 3.0 => found.push(format!("j={j}: k={} (d={:.2})", b.k_peak, b.distance)),
            _ => {
                ok = false;
                found.push(format!("j={j}: none within 3"));
            }
        }
    }
    ensure(ok, found.join(", "))
}

fn run_profile(work: &Path, out: &str) -> Result<Vec<(String, Vec<u8>)>, String> {
    let out_dir = work.join(out);
    std::fs::create_dir_all(&out_dir).map_err(|e| e.to_string())?;
    let output = Command::new(env!("CARGO_BIN_EXE_franel"))
        .args(["profile", "--m", "1000", "--terms", "--cache-dir"])
        .arg(work.join("cache"))
        .arg("--output")
        .arg(&out_dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !output.status.success() {
        return Err(format!(
            "franel profile exited with {}: {}",
            output.status,
            String::from_utf8_lossy(&output.stderr)
        ));
    }
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out_dir)
        .map_err(|e| e.to_string())?
        .map(|entry| {
            let path = entry.map_err(|e| e.to_string())?.path();
            let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
            Ok((
                path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
                bytes,
            ))
        })
        .collect::<Result<_, String>>()?;
    files.sort();
    Ok(files)
}

fn cli_determinism() -> Outcome {
    let fresh_a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fresh_b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = run_profile(fresh_a.path(), "out")?;
    let second = run_profile(fresh_b.path(), "out")?;
    // same cache as the first run, now warm
    let cached = run_profile(fresh_a.path(), "again")?;
    let cache_file = fresh_a.path().join("cache");
    let csv_count = first.iter().filter(|(name, _)| name.ends_with(".csv")).count();
    ensure(
        first == second && first == cached && csv_count >= 2 && cache_file.is_dir(),
        format!(
            "{} output files ({csv_count} csv), fresh runs identical: {}, cached run identical: {}",
            first.len(),
            first == second,
            first == cached
        ),
    )
}
