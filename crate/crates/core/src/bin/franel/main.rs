//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 computation error, 3 verification failure.

mod verify;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use franel::asymptotics::{check_bound, envelope, ratio_scan, AsymptoticParams};
use franel::bumps::{detect_bumps_with, BumpConfig};
use franel::fitting::{fit_table_row, prime_set, TableRow};
use franel::io::{self, CacheOutcome, ProfileCache};
use franel::profile::{compute_profile_with, deviation_terms, prime_hull, DenominatorProfile, IndexConvention};
use franel::totient::totient_sieve;
use franel::{plot, sweep};

#[derive(Debug, Parser)]
#[command(
    name = "franel",
    version,
    about = "Farey deviation sums, envelope fits and asymptotic bounds"
)]
struct Cli {
    /// Index convention for the deviation sum.
    #[arg(long, global = true, default_value = "interior", value_parser = parse_convention)]
    convention: IndexConvention,

    /// Directory holding cached profiles.
    #[arg(long, global = true, default_value = ".franel-cache")]
    cache_dir: PathBuf,

    /// Worker threads for multi-order sweeps (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory that receives CSV files and plot scripts.
    #[arg(long, global = true, default_value = ".")]
    output: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// P_m(k) per denominator, optionally every deviation term.
    Profile {
        #[arg(long)]
        m: u64,
        /// Also write the per-term CSV `i,num,den,deviation,squared`.
        #[arg(long)]
        terms: bool,
    },
    /// P_m(k) restricted to prime k.
    Hull {
        #[arg(long)]
        m: u64,
        /// Add an envelope column exp(a(m) + b(m)·k) from these parameters.
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Local excursions of P_m(k) above its exponential trend.
    Bumps {
        #[arg(long)]
        m: u64,
        #[arg(long, default_value_t = BumpConfig::default().min_log_prominence)]
        min_prominence: f64,
    },
    /// Two-point envelope fits and power laws over prime sets M(p,q).
    Fit {
        /// 1-based prime indices p q; repeat for several table rows.
        #[arg(long = "prime-set", num_args = 2, value_names = ["P", "Q"], required = true, action = clap::ArgAction::Append)]
        prime_set: Vec<usize>,
        /// Fail instead of computing profiles missing from the cache.
        #[arg(long)]
        no_compute: bool,
        /// Report residuals in direct space instead of log space.
        #[arg(long)]
        direct_residuals: bool,
    },
    /// R̃(x)/x^(−1+ε) over a geometric grid.
    Ratio {
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Compare R(m) with R̃(m).
    Bound {
        #[arg(long = "m", required = true)]
        ms: Vec<u64>,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Run the built-in oracle checks.
    Verify {
        #[arg(long, default_value_t = 200)]
        max_m: u64,
        /// Also compare the closed-form R̃ against quadrature.
        #[arg(long)]
        quadrature: bool,
    },
}

#[derive(Debug, Args)]
struct ParamArgs {
    /// Table CSV (`set,s,t,u,v`) to read parameters from.
    #[arg(long)]
    params_from: Option<PathBuf>,
    /// Row label in the table CSV, e.g. "M(101,800)".
    #[arg(long)]
    row: Option<String>,
    /// Use the published parameters s=-7.87, t=0.11, u=4.73, v=-1.02.
    #[arg(long)]
    published: bool,
    #[arg(long, allow_hyphen_values = true)]
    s: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    u: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    v: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
}

fn parse_convention(s: &str) -> Result<IndexConvention, String> {
    s.parse().map_err(|e: franel::Error| e.to_string())
}

enum CliError {
    Usage(String),
    Compute(franel::Error),
    Verification(usize),
}

impl From<franel::Error> for CliError {
    fn from(e: franel::Error) -> Self {
        CliError::Compute(e)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl ParamArgs {
    fn given(&self) -> bool {
        self.params_from.is_some()
            || self.row.is_some()
            || self.published
            || [self.s, self.t, self.u, self.v].iter().any(Option::is_some)
    }

    fn resolve(&self) -> CliResult<AsymptoticParams> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(usage(format!("--epsilon must be positive, got {}", self.epsilon)));
        }
        let explicit = [self.s, self.t, self.u, self.v];
        let sources = [
            self.params_from.is_some() || self.row.is_some(),
            self.published,
            explicit.iter().any(Option::is_some),
        ];
        match sources.iter().filter(|&&b| b).count() {
            0 => {
                return Err(usage(
                    "parameters required: use --params-from/--row, --published or --s --t --u --v",
                ))
            }
            1 => {}
            _ => {
                return Err(usage(
                    "contradictory parameter sources; give exactly one of --params-from, --published, --s/--t/--u/--v",
                ))
            }
        }
        if self.published {
            return Ok(AsymptoticParams::published().with_epsilon(self.epsilon)?);
        }
        if let [Some(s), Some(t), Some(u), Some(v)] = explicit {
            return AsymptoticParams::new(s, t, u, v, self.epsilon).map_err(|e| usage(e.to_string()));
        }
        if explicit.iter().any(Option::is_some) {
            return Err(usage("--s, --t, --u and --v must be given together"));
        }
        match (&self.params_from, &self.row) {
            (Some(path), Some(row)) => Ok(io::read_table_params(path, row, self.epsilon)?),
            _ => Err(usage("--params-from and --row must be given together")),
        }
    }
}

fn check_order(m: u64) -> CliResult {
    if m < 2 {
        Err(usage(format!("--m must be at least 2, got {m}")))
    } else {
        Ok(())
    }
}

struct Context {
    convention: IndexConvention,
    cache: ProfileCache,
    output: PathBuf,
}

impl Context {
    fn write(&self, name: &str, text: &str) -> CliResult<PathBuf> {
        let path = self.output.join(name);
        io::write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }

    fn tag(&self, m: u64) -> String {
        format!("m{m}_{}", self.convention)
    }

    fn profile(&self, m: u64) -> CliResult<DenominatorProfile> {
        let (profile, outcome) = self.cache.load_or_compute(m, self.convention, || {
            let table = totient_sieve(m)?;
            compute_profile_with(&table, m, self.convention)
        })?;
        if outcome == CacheOutcome::Repaired {
            eprintln!("warning: cached profile for m = {m} failed its checksum; recomputed");
        }
        Ok(profile)
    }
}

fn run(cli: Cli) -> CliResult {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| usage(format!("cannot configure thread pool: {e}")))?;
    }
    let ctx = Context {
        convention: cli.convention,
        cache: ProfileCache::new(&cli.cache_dir),
        output: cli.output,
    };

    match cli.command {
        Command::Profile { m, terms } => cmd_profile(&ctx, m, terms),
        Command::Hull { m, params } => cmd_hull(&ctx, m, &params),
        Command::Bumps { m, min_prominence } => cmd_bumps(&ctx, m, min_prominence),
        Command::Fit {
            prime_set,
            no_compute,
            direct_residuals,
        } => cmd_fit(&ctx, &prime_set, no_compute, direct_residuals),
        Command::Ratio {
            from,
            to,
            steps,
            params,
        } => cmd_ratio(&ctx, from, to, steps, &params),
        Command::Bound { ms, params } => cmd_bound(&ctx, &ms, &params),
        Command::Verify { max_m, quadrature } => {
            if max_m < 2 {
                return Err(usage(format!("--max-m must be at least 2, got {max_m}")));
            }
            if max_m > franel::farey::BRUTE_FORCE_MAX_ORDER {
                return Err(usage(format!(
                    "--max-m is limited to {} by the brute-force oracle",
                    franel::farey::BRUTE_FORCE_MAX_ORDER
                )));
            }
            match verify::run(max_m, quadrature) {
                0 => Ok(()),
                failures => Err(CliError::Verification(failures)),
            }
        }
    }
}

fn cmd_profile(ctx: &Context, m: u64, terms: bool) -> CliResult {
    check_order(m)?;
    let profile = ctx.profile(m)?;
    let tag = ctx.tag(m);
    let csv_name = format!("profile_{tag}.csv");
    ctx.write(&csv_name, &io::profile_csv(&profile))?;
    ctx.write(&format!("profile_{tag}.gp"), &plot::profile_script(&csv_name, m, None))?;
    if terms {
        let table = totient_sieve(m)?;
        let text = io::terms_csv(m, ctx.convention, deviation_terms(m, ctx.convention, &table)?)?;
        let terms_name = format!("terms_{tag}.csv");
        ctx.write(&terms_name, &text)?;
        ctx.write(&format!("terms_{tag}.gp"), &plot::terms_script(&terms_name, m))?;
    }
    println!(
        "m = {m}  n = {}  R(m) = {}  convention = {}",
        profile.n(),
        io::fmt_f64(profile.r_total()),
        ctx.convention
    );
    Ok(())
}

fn cmd_hull(ctx: &Context, m: u64, params: &ParamArgs) -> CliResult {
    check_order(m)?;
    let params = params.given().then(|| params.resolve()).transpose()?;
    let profile = ctx.profile(m)?;
    let table = totient_sieve(m)?;
    let hull = prime_hull(&profile, &table);
    let env = params
        .map(|p| {
            hull.iter()
                .map(|&(k, _)| envelope(k as f64, m as f64, &p))
                .collect::<franel::Result<Vec<f64>>>()
        })
        .transpose()?;
    let tag = ctx.tag(m);
    let name = format!("hull_{tag}.csv");
    ctx.write(&name, &io::hull_csv(m, ctx.convention, &hull, env.as_deref()))?;
    ctx.write(&format!("hull_{tag}.gp"), &plot::hull_script(&name, m, env.is_some()))?;
    println!("m = {m}: {} prime denominators", hull.len());
    Ok(())
}

fn cmd_bumps(ctx: &Context, m: u64, min_prominence: f64) -> CliResult {
    check_order(m)?;
    if min_prominence.is_nan() || min_prominence < 0.0 {
        return Err(usage("--min-prominence must be non-negative"));
    }
    let profile = ctx.profile(m)?;
    let bumps = detect_bumps_with(
        &profile,
        &BumpConfig {
            min_log_prominence: min_prominence,
        },
    );
    ctx.write(
        &format!("bumps_{}.csv", ctx.tag(m)),
        &io::bumps_csv(m, ctx.convention, &bumps),
    )?;
    println!("{:>8} {:>6} {:>10} {:>10}", "k_peak", "j", "|k-m/j|", "prominence");
    for b in &bumps {
        println!("{:>8} {:>6} {:>10.3} {:>10.3}", b.k_peak, b.j, b.distance, b.prominence);
    }
    Ok(())
}

fn cmd_fit(ctx: &Context, bounds: &[usize], no_compute: bool, direct_residuals: bool) -> CliResult {
    let sets = bounds
        .chunks(2)
        .map(|pq| {
            if pq[0] == 0 || pq[0] > pq[1] {
                Err(usage(format!("--prime-set needs 1 <= P <= Q, got {} {}", pq[0], pq[1])))
            } else {
                Ok(prime_set(pq[0], pq[1])?)
            }
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut wanted: Vec<u64> = sets.iter().flat_map(|s| s.primes.iter().copied()).collect();
    wanted.sort_unstable();
    wanted.dedup();

    let mut profiles = BTreeMap::new();
    let mut missing = Vec::new();
    for &m in &wanted {
        match ctx.cache.load(m, ctx.convention) {
            Ok(Some(p)) => {
                profiles.insert(m, p);
            }
            Ok(None) => missing.push(m),
            Err(franel::Error::Checksum(path)) => {
                eprintln!("warning: {} failed its checksum; recomputing", path.display());
                missing.push(m);
            }
            Err(e) => return Err(e.into()),
        }
    }
    if !missing.is_empty() {
        if no_compute {
            return Err(franel::Error::MissingData(missing).into());
        }
        eprintln!("computing {} profiles", missing.len());
        for profile in sweep::profiles(&missing, ctx.convention)? {
            ctx.cache.store(&profile)?;
            profiles.insert(profile.m(), profile);
        }
    }

    let rows = sets
        .iter()
        .map(|set| fit_table_row(set, ctx.convention, &profiles))
        .collect::<franel::Result<Vec<TableRow>>>()?;

    for (set, row) in sets.iter().zip(&rows) {
        let stem = format!("p{}_q{}_{}", set.p, set.q, ctx.convention);
        ctx.write(&format!("fit_{stem}.csv"), &io::fit_csv(row))?;
        let resid = format!("residuals_{stem}.csv");
        ctx.write(&resid, &io::residuals_csv(row, direct_residuals))?;
        ctx.write(&format!("fit_{stem}.gp"), &plot::fit_script(&resid, &row.label))?;
    }
    let table_name = match sets.as_slice() {
        [one] => format!("table_p{}_q{}_{}.csv", one.p, one.q, ctx.convention),
        _ => format!("table_{}.csv", ctx.convention),
    };
    ctx.write(&table_name, &io::table_csv(&rows))?;

    println!("{:<14} {:>10} {:>10} {:>10} {:>10}", "set", "s", "t", "u", "v");
    for row in &rows {
        let (s, t, u, v) = row.params();
        println!("{:<14} {s:>10.4} {t:>10.4} {u:>10.4} {v:>10.4}", row.label);
    }
    Ok(())
}

fn cmd_ratio(ctx: &Context, from: f64, to: f64, steps: usize, params: &ParamArgs) -> CliResult {
    if !(from > 2.0 && from < to && to.is_finite()) {
        return Err(usage(format!(
            "ratio range needs 2 < --from < --to, got {from} .. {to}"
        )));
    }
    if steps < 2 {
        return Err(usage("--steps must be at least 2"));
    }
    let params = params.resolve()?;
    let series = ratio_scan(from, to, steps, &params)?;
    ctx.write("ratio.csv", &io::ratio_csv(&params, &series))?;
    ctx.write("ratio.gp", &plot::ratio_script("ratio.csv", params.epsilon))?;
    let decreasing = series.windows(2).all(|w| w[1].1 < w[0].1);
    println!(
        "{} points, ratio {} -> {}, strictly decreasing: {decreasing}",
        series.len(),
        io::fmt_f64(series[0].1),
        io::fmt_f64(series[series.len() - 1].1)
    );
    Ok(())
}

fn cmd_bound(ctx: &Context, ms: &[u64], params: &ParamArgs) -> CliResult {
    for &m in ms {
        check_order(m)?;
    }
    let params = params.resolve()?;
    let checks = sweep::map_ordered(ms, |&m| check_bound(m, ctx.convention, &params))
        .into_iter()
        .collect::<franel::Result<Vec<_>>>()?;
    ctx.write(
        &format!("bound_{}.csv", ctx.convention),
        &io::bound_csv(ctx.convention, &checks),
    )?;
    for c in &checks {
        println!(
            "m = {}  R(m) = {}  R~(m) = {}  R <= R~: {}",
            c.m,
            io::fmt_f64(c.r),
            io::fmt_f64(c.rtilde),
            c.satisfied
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Verification(n)) => {
            eprintln!("verification failed: {n} check(s)");
            ExitCode::from(3)
        }
    }
}
