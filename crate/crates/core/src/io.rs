//! CSV interchange, the on-disk profile cache and atomic file writes.
//!
//! Floats are written with Rust's shortest round-trip formatting, so any
//! value read back with `str::parse::<f64>` is bit-identical to the one
//! written. Lines starting with `#` are provenance comments and are skipped
//! by every reader.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::asymptotics::{AsymptoticParams, BoundCheck};
use crate::bumps::Bump;
use crate::error::{Error, Result};
use crate::fitting::TableRow;
use crate::profile::{DenominatorProfile, DeviationTerm, IndexConvention};

/// Code version recorded in file headers and used to key the cache.
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest round-trip decimal; exponent form outside [1e-4, 1e16).
pub fn fmt_f64(x: f64) -> String {
    let mag = x.abs();
    if x == 0.0 || (1e-4..1e16).contains(&mag) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn parse_f64(path: &Path, field: &str) -> Result<f64> {
    field
        .parse()
        .map_err(|_| Error::parse(path, format!("{field:?} is not a number")))
}

fn parse_u64(path: &Path, field: &str) -> Result<u64> {
    field
        .parse()
        .map_err(|_| Error::parse(path, format!("{field:?} is not a non-negative integer")))
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn csv_text(comments: &[String], header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    let body = w.into_inner().expect("flushing to memory");
    out.push_str(std::str::from_utf8(&body).expect("csv output is utf-8"));
    out
}

fn read_records(path: &Path, text: &str, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let found = reader.headers().map_err(|e| Error::parse(path, e.to_string()))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::parse(
            path,
            format!(
                "expected header {:?}, found {:?}",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    reader
        .records()
        .map(|r| r.map_err(|e| Error::parse(path, e.to_string())))
        .collect()
}

fn provenance(kind: &str, fields: &[(&str, String)]) -> String {
    let mut line = format!("franel {kind}");
    for (k, v) in fields {
        let _ = write!(line, " {k}={v}");
    }
    let _ = write!(line, " version={CODE_VERSION}");
    line
}

// ---------------------------------------------------------------- profiles

pub const PROFILE_HEADER: [&str; 3] = ["k", "p_value", "term_count"];
pub const PROFILE_META_HEADER: [&str; 4] = ["m", "n", "r_total", "convention"];

/// `k,p_value,term_count` with a provenance comment.
pub fn profile_csv(profile: &DenominatorProfile) -> String {
    csv_text(
        &[provenance(
            "profile",
            &[
                ("m", profile.m().to_string()),
                ("convention", profile.convention().to_string()),
            ],
        )],
        &PROFILE_HEADER,
        profile
            .entries()
            .map(|(k, p, c)| vec![k.to_string(), fmt_f64(p), c.to_string()]),
    )
}

/// Sidecar `m,n,r_total,convention` line.
pub fn profile_meta_csv(profile: &DenominatorProfile) -> String {
    csv_text(
        &[],
        &PROFILE_META_HEADER,
        [vec![
            profile.m().to_string(),
            profile.n().to_string(),
            fmt_f64(profile.r_total()),
            profile.convention().to_string(),
        ]],
    )
}

/// Rebuilds a profile from its CSV and sidecar texts.
pub fn parse_profile(path: &Path, csv_body: &str, meta: &str) -> Result<DenominatorProfile> {
    let meta_rows = read_records(path, meta, &PROFILE_META_HEADER)?;
    let [row] = meta_rows.as_slice() else {
        return Err(Error::parse(path, "metadata must hold exactly one row"));
    };
    let m = parse_u64(path, &row[0])?;
    let n = parse_u64(path, &row[1])?;
    let r_total = parse_f64(path, &row[2])?;
    let convention: IndexConvention = row[3].parse()?;

    let rows = read_records(path, csv_body, &PROFILE_HEADER)?;
    let mut values = Vec::with_capacity(rows.len());
    let mut counts = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let k = parse_u64(path, &r[0])?;
        if k != i as u64 + 2 {
            return Err(Error::parse(
                path,
                format!("row {} has k = {k}, expected {}", i + 1, i + 2),
            ));
        }
        values.push(parse_f64(path, &r[1])?);
        counts.push(parse_u64(path, &r[2])?);
    }
    DenominatorProfile::from_parts_with_total(m, convention, n, values, counts, r_total)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheOutcome {
    Hit,
    Computed,
    /// The cached entry failed its checksum and was recomputed.
    Repaired,
}

/// Profiles on disk under `root/<version>/<convention>/m<m>.{csv,meta}`.
#[derive(Debug, Clone)]
pub struct ProfileCache {
    root: PathBuf,
}

impl ProfileCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, convention: IndexConvention) -> PathBuf {
        self.root.join(format!("v{CODE_VERSION}")).join(convention.name())
    }

    pub fn csv_path(&self, m: u64, convention: IndexConvention) -> PathBuf {
        self.dir(convention).join(format!("m{m}.csv"))
    }

    pub fn meta_path(&self, m: u64, convention: IndexConvention) -> PathBuf {
        self.dir(convention).join(format!("m{m}.meta"))
    }

    pub fn store(&self, profile: &DenominatorProfile) -> Result<()> {
        let body = profile_csv(profile);
        let mut meta = profile_meta_csv(profile);
        let _ = writeln!(meta, "# sha256={}", sha256_hex(body.as_bytes()));
        // csv first: a meta file is only ever present next to its complete csv
        write_atomic(&self.csv_path(profile.m(), profile.convention()), body.as_bytes())?;
        write_atomic(&self.meta_path(profile.m(), profile.convention()), meta.as_bytes())
    }

    /// `Ok(None)` when no entry exists; [`Error::Checksum`] when the stored
    /// csv does not match its recorded digest.
    pub fn load(&self, m: u64, convention: IndexConvention) -> Result<Option<DenominatorProfile>> {
        let csv_path = self.csv_path(m, convention);
        let meta_path = self.meta_path(m, convention);
        if !meta_path.exists() || !csv_path.exists() {
            return Ok(None);
        }
        let meta = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let body = fs::read(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
        let recorded = meta
            .lines()
            .find_map(|l| l.strip_prefix("# sha256="))
            .ok_or_else(|| Error::Checksum(meta_path.clone()))?;
        if recorded.trim() != sha256_hex(&body) {
            return Err(Error::Checksum(csv_path));
        }
        let body = String::from_utf8(body).map_err(|_| Error::Checksum(csv_path.clone()))?;
        let profile = parse_profile(&csv_path, &body, &meta)?;
        if profile.m() != m || profile.convention() != convention {
            return Err(Error::parse(&meta_path, "metadata does not match the cache key"));
        }
        Ok(Some(profile))
    }

    /// Loads a cached profile, or computes and stores it. A corrupted entry
    /// is recomputed and overwritten.
    pub fn load_or_compute<F>(
        &self,
        m: u64,
        convention: IndexConvention,
        compute: F,
    ) -> Result<(DenominatorProfile, CacheOutcome)>
    where
        F: FnOnce() -> Result<DenominatorProfile>,
    {
        let outcome = match self.load(m, convention) {
            Ok(Some(p)) => return Ok((p, CacheOutcome::Hit)),
            Ok(None) => CacheOutcome::Computed,
            Err(Error::Checksum(_) | Error::Parse { .. }) => CacheOutcome::Repaired,
            Err(e) => return Err(e),
        };
        let profile = compute()?;
        self.store(&profile)?;
        Ok((profile, outcome))
    }
}

// ------------------------------------------------------------------- terms

pub const TERMS_HEADER: [&str; 5] = ["i", "num", "den", "deviation", "squared"];

pub fn terms_csv<I>(m: u64, convention: IndexConvention, terms: I) -> Result<String>
where
    I: IntoIterator<Item = Result<DeviationTerm>>,
{
    let rows = terms
        .into_iter()
        .map(|t| {
            t.map(|t| {
                vec![
                    t.index.to_string(),
                    t.fraction.num.to_string(),
                    t.fraction.den.to_string(),
                    fmt_f64(t.deviation),
                    fmt_f64(t.squared),
                ]
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(csv_text(
        &[provenance(
            "terms",
            &[("m", m.to_string()), ("convention", convention.to_string())],
        )],
        &TERMS_HEADER,
        rows,
    ))
}

// -------------------------------------------------------------------- hull

pub fn hull_csv(m: u64, convention: IndexConvention, hull: &[(u64, f64)], envelope: Option<&[f64]>) -> String {
    let header: &[&str] = if envelope.is_some() {
        &["k", "p_value", "envelope"]
    } else {
        &["k", "p_value"]
    };
    let rows = hull.iter().enumerate().map(|(i, &(k, p))| {
        let mut row = vec![k.to_string(), fmt_f64(p)];
        if let Some(env) = envelope {
            row.push(fmt_f64(env[i]));
        }
        row
    });
    csv_text(
        &[provenance(
            "hull",
            &[("m", m.to_string()), ("convention", convention.to_string())],
        )],
        header,
        rows,
    )
}

pub const BUMPS_HEADER: [&str; 4] = ["k_peak", "j", "distance", "prominence"];

pub fn bumps_csv(m: u64, convention: IndexConvention, bumps: &[Bump]) -> String {
    csv_text(
        &[provenance(
            "bumps",
            &[("m", m.to_string()), ("convention", convention.to_string())],
        )],
        &BUMPS_HEADER,
        bumps.iter().map(|b| {
            vec![
                b.k_peak.to_string(),
                b.j.to_string(),
                fmt_f64(b.distance),
                fmt_f64(b.prominence),
            ]
        }),
    )
}

// -------------------------------------------------------------------- fits

pub const FIT_HEADER: [&str; 6] = ["m", "a", "b", "k_star", "p_at_m", "p_at_kstar"];
pub const TABLE_HEADER: [&str; 5] = ["set", "s", "t", "u", "v"];
pub const RESIDUALS_HEADER: [&str; 7] = ["m", "a", "a_model", "a_residual", "b", "b_model", "b_residual"];

pub fn fit_csv(row: &TableRow) -> String {
    csv_text(
        &[provenance(
            "fit",
            &[("set", row.label.clone()), ("convention", row.convention.to_string())],
        )],
        &FIT_HEADER,
        row.fits.iter().map(|f| {
            vec![
                f.m.to_string(),
                fmt_f64(f.a),
                fmt_f64(f.b),
                f.k_star().to_string(),
                fmt_f64(f.anchor_hi.1),
                fmt_f64(f.anchor_lo.1),
            ]
        }),
    )
}

/// Residuals of both power laws; log space unless `direct` is set.
pub fn residuals_csv(row: &TableRow, direct: bool) -> String {
    let (ra, rb) = if direct {
        (row.a_model.direct_residuals(), row.b_model.direct_residuals())
    } else {
        (row.a_model.residuals.clone(), row.b_model.residuals.clone())
    };
    let space = if direct { "direct" } else { "log" };
    csv_text(
        &[provenance(
            "residuals",
            &[
                ("set", row.label.clone()),
                ("convention", row.convention.to_string()),
                ("space", space.to_string()),
            ],
        )],
        &RESIDUALS_HEADER,
        row.fits.iter().enumerate().map(|(i, f)| {
            let m = f.m as f64;
            vec![
                f.m.to_string(),
                fmt_f64(f.a),
                fmt_f64(row.a_model.eval(m)),
                fmt_f64(ra[i]),
                fmt_f64(f.b),
                fmt_f64(row.b_model.eval(m)),
                fmt_f64(rb[i]),
            ]
        }),
    )
}

/// Table rows `set,s,t,u,v`.
pub fn table_csv(rows: &[TableRow]) -> String {
    let mut conventions: Vec<String> = rows.iter().map(|r| r.convention.to_string()).collect();
    conventions.dedup();
    csv_text(
        &[provenance("table", &[("convention", conventions.join("+"))])],
        &TABLE_HEADER,
        rows.iter().map(|r| {
            let label = match r.convention {
                IndexConvention::Interior => r.label.clone(),
                other => format!("{} [{other}]", r.label),
            };
            vec![label, fmt_f64(r.s()), fmt_f64(r.t()), fmt_f64(r.u()), fmt_f64(r.v())]
        }),
    )
}

/// Reads `(s, t, u, v)` for the row labelled `label` from a table CSV.
pub fn read_table_params(path: &Path, label: &str, epsilon: f64) -> Result<AsymptoticParams> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rows = read_records(path, &text, &TABLE_HEADER)?;
    let row = rows
        .iter()
        .find(|r| &r[0] == label)
        .ok_or_else(|| Error::parse(path, format!("no row labelled {label:?}")))?;
    AsymptoticParams::new(
        parse_f64(path, &row[1])?,
        parse_f64(path, &row[2])?,
        parse_f64(path, &row[3])?,
        parse_f64(path, &row[4])?,
        epsilon,
    )
}

// -------------------------------------------------------------- asymptotics

pub fn ratio_csv(params: &AsymptoticParams, series: &[(f64, f64)]) -> String {
    csv_text(
        &[provenance(
            "ratio",
            &[
                ("s", fmt_f64(params.s)),
                ("t", fmt_f64(params.t)),
                ("u", fmt_f64(params.u)),
                ("v", fmt_f64(params.v)),
                ("epsilon", fmt_f64(params.epsilon)),
            ],
        )],
        &["x", "ratio"],
        series.iter().map(|&(x, r)| vec![fmt_f64(x), fmt_f64(r)]),
    )
}

pub fn bound_csv(convention: IndexConvention, checks: &[BoundCheck]) -> String {
    csv_text(
        &[provenance("bound", &[("convention", convention.to_string())])],
        &["m", "r", "rtilde", "satisfied"],
        checks.iter().map(|c| {
            vec![
                c.m.to_string(),
                fmt_f64(c.r),
                fmt_f64(c.rtilde),
                c.satisfied.to_string(),
            ]
        }),
    )
}
