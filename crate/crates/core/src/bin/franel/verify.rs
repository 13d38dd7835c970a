//! Desk-scale oracle checks behind `franel verify`.

use franel::asymptotics::{ln_rtilde_closed, ln_rtilde_quadrature, rtilde_closed, rtilde_quadrature, AsymptoticParams};
use franel::farey::{brute_force_farey, rank_of, stream_farey, FareyFraction};
use franel::profile::{compute_profile_with, compute_profiles_both, IndexConvention};
use franel::totient::totient_sieve;

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures += 1;
        }
    }
}

fn rel(x: f64, y: f64) -> f64 {
    if x == y {
        0.0
    } else {
        (x - y).abs() / y.abs()
    }
}

/// Runs every check and returns the number of failures.
pub fn run(max_m: u64, quadrature: bool) -> usize {
    let mut report = Report { failures: 0 };
    farey_checks(&mut report, max_m);
    profile_checks(&mut report, max_m);
    if quadrature {
        quadrature_checks(&mut report);
    }
    report.failures
}

fn farey_checks(report: &mut Report, max_m: u64) {
    let table = totient_sieve(max_m).expect("max_m >= 2");
    let mut mismatched = Vec::new();
    let mut non_unimodular = Vec::new();
    let mut bad_count = Vec::new();
    for m in 2..=max_m {
        let streamed: Result<Vec<FareyFraction>, _> = stream_farey(m).and_then(|s| s.collect());
        let (Ok(streamed), Ok(brute)) = (streamed, brute_force_farey(m)) else {
            mismatched.push(m);
            continue;
        };
        if streamed != brute {
            mismatched.push(m);
        }
        if streamed
            .windows(2)
            .any(|w| w[0].den * w[1].num - w[0].num * w[1].den != 1)
        {
            non_unimodular.push(m);
        }
        if streamed.len() as u64 != 2 + table.prefix(m) {
            bad_count.push(m);
        }
    }
    report.check(
        "stream equals brute force",
        mismatched.is_empty(),
        format!("m = 2..={max_m}, mismatches at {mismatched:?}"),
    );
    report.check(
        "adjacent terms unimodular",
        non_unimodular.is_empty(),
        format!("violations at {non_unimodular:?}"),
    );
    report.check(
        "length = 2 + sum phi",
        bad_count.is_empty(),
        format!("violations at {bad_count:?}"),
    );

    let m = max_m.min(60);
    let bad_rank = stream_farey(m)
        .expect("m >= 2")
        .filter_map(Result::ok)
        .filter(|f| rank_of(f.num, f.den, m).ok() != Some(f.index))
        .count();
    report.check(
        "rank matches stream index",
        bad_rank == 0,
        format!("m = {m}, {bad_rank} mismatches"),
    );
}

fn profile_checks(report: &mut Report, max_m: u64) {
    let table = totient_sieve(max_m).expect("max_m >= 2");
    let mut worst_rel: f64 = 0.0;
    let mut count_violations = Vec::new();
    let mut pass_violations = Vec::new();
    for m in 2..=max_m {
        let Ok((interior, literal)) = compute_profiles_both(&table, m) else {
            pass_violations.push(m);
            continue;
        };
        worst_rel = worst_rel.max(rel(interior.sum_of_parts(), interior.r_total()));
        worst_rel = worst_rel.max(rel(literal.sum_of_parts(), literal.r_total()));
        if interior.entries().any(|(k, _, c)| c != table.phi(k)) {
            count_violations.push(m);
        }
        let separate = (
            compute_profile_with(&table, m, IndexConvention::Interior),
            compute_profile_with(&table, m, IndexConvention::PaperLiteral),
        );
        if !matches!(separate, (Ok(i), Ok(l)) if i == interior && l == literal) {
            pass_violations.push(m);
        }
    }
    report.check(
        "sum of P_m(k) equals R(m)",
        worst_rel <= 1e-12,
        format!("worst relative difference {worst_rel:e} (tolerance 1e-12)"),
    );
    report.check(
        "term count per k equals phi(k)",
        count_violations.is_empty(),
        format!("violations at {count_violations:?}"),
    );
    report.check(
        "one-pass conventions equal separate passes",
        pass_violations.is_empty(),
        format!("violations at {pass_violations:?}"),
    );
}

fn quadrature_checks(report: &mut Report) {
    let published = AsymptoticParams::published();
    let mut worst: f64 = 0.0;
    let mut errors = 0;
    for m in [1e2, 1e3, 1e4, 1e5, 1e6] {
        match (rtilde_closed(m, &published), rtilde_quadrature(m, &published)) {
            (Ok(c), Ok(q)) => worst = worst.max(rel(c, q)),
            _ => errors += 1,
        }
    }
    report.check(
        "closed form vs quadrature, published parameters",
        errors == 0 && worst <= 1e-8,
        format!("worst relative difference {worst:e} (tolerance 1e-8), {errors} errors"),
    );

    // deterministic low-discrepancy draws over s∈[-10,-1], t∈[0,0.3], u∈[1,10], v∈[-1.5,-0.5]
    let frac = |i: usize, g: f64| (i as f64 * g).fract();
    let mut worst: f64 = 0.0;
    let mut errors = 0;
    for i in 1..=20 {
        let p = AsymptoticParams::new(
            -10.0 + 9.0 * frac(i, 0.618_033_988_749_895),
            0.3 * frac(i, 0.754_877_666_246_693),
            1.0 + 9.0 * frac(i, 0.569_840_290_998_053),
            -1.5 + frac(i, 0.535_491_655_524_764),
            1e-6,
        )
        .expect("finite parameters");
        for m in [1e2, 1e3, 1e4, 1e5, 1e6] {
            match (ln_rtilde_closed(m, &p), ln_rtilde_quadrature(m, &p)) {
                (Ok(c), Ok(q)) => worst = worst.max((c - q).exp_m1().abs()),
                _ => errors += 1,
            }
        }
    }
    report.check(
        "closed form vs quadrature, 20 parameter draws",
        errors == 0 && worst <= 1e-8,
        format!("worst relative difference {worst:e} (tolerance 1e-8), {errors} errors"),
    );
}
