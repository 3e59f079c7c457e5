use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::{OnceLock, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use rug::Float;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::moments::{phi_moments, MomentJob};
use crate::numerics::{factorial, float_to_decimal, HPReal, PrecCtx, ERR_PREC};
use crate::{Error, Result};

/// One cached coefficient: `beta_n = b_n / (2n)!` with `b_n = ∫_0^∞ Phi(u) u^{2n} du`.
#[derive(Clone, Debug)]
pub struct BetaEntry {
    pub n: usize,
    pub digits: u32,
    pub value: HPReal,
    pub b_n: HPReal,
    pub truncation_u: f64,
    pub timestamp: u64,
}

/// Cache of `beta_n`, one entry per `n`, keeping the most precise value.
#[derive(Debug, Default)]
pub struct BetaTable {
    entries: RwLock<BTreeMap<usize, BetaEntry>>,
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
struct StoredEntry {
    n: usize,
    digits: u32,
    bits: u32,
    value_decimal_string: String,
    value_err: String,
    b_n_decimal_string: String,
    b_n_err: String,
    #[serde(rename = "truncation_U")]
    truncation_u: f64,
    timestamp: u64,
}

#[derive(Serialize, Deserialize)]
struct StoredFile {
    format: String,
    sha256: String,
    entries: Vec<StoredEntry>,
}

const FORMAT: &str = "beta-table/1";

fn exact_digits(bits: u32) -> usize {
    (f64::from(bits) * std::f64::consts::LOG10_2).ceil() as usize + 2
}

fn parse_float(s: &str, bits: u32) -> Result<Float> {
    let p = Float::parse(s).map_err(|e| Error::CorruptCache(format!("bad number {s:?}: {e}")))?;
    Ok(Float::with_val(bits, p))
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn store(e: &BetaEntry) -> StoredEntry {
    let bits = e.value.prec();
    StoredEntry {
        n: e.n,
        digits: e.digits,
        bits,
        value_decimal_string: float_to_decimal(e.value.value(), exact_digits(bits)),
        value_err: float_to_decimal(e.value.err(), exact_digits(ERR_PREC)),
        b_n_decimal_string: float_to_decimal(e.b_n.value(), exact_digits(bits)),
        b_n_err: float_to_decimal(e.b_n.err(), exact_digits(ERR_PREC)),
        truncation_u: e.truncation_u,
        timestamp: e.timestamp,
    }
}

fn restore(s: &StoredEntry) -> Result<BetaEntry> {
    let value = HPReal::new(parse_float(&s.value_decimal_string, s.bits)?, parse_float(&s.value_err, ERR_PREC)?);
    let b_n = HPReal::new(parse_float(&s.b_n_decimal_string, s.bits)?, parse_float(&s.b_n_err, ERR_PREC)?);
    Ok(BetaEntry {
        n: s.n,
        digits: s.digits,
        value,
        b_n,
        truncation_u: s.truncation_u,
        timestamp: s.timestamp,
    })
}

fn checksum(entries: &[StoredEntry]) -> Result<String> {
    let body = serde_json::to_string(entries)?;
    Ok(hex::encode(Sha256::digest(body.as_bytes())))
}

impl BetaTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide table used by [`beta`].
    pub fn global() -> &'static BetaTable {
        static G: OnceLock<BetaTable> = OnceLock::new();
        G.get_or_init(BetaTable::new)
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entry for `n` computed with at least `digits` digits.
    pub fn get(&self, n: usize, digits: u32) -> Option<BetaEntry> {
        self.entries.read().unwrap().get(&n).filter(|e| e.digits >= digits).cloned()
    }

    /// Insert, keeping whichever entry for `n` has more digits.
    pub fn insert(&self, e: BetaEntry) {
        let mut map = self.entries.write().unwrap();
        match map.get(&e.n) {
            Some(old) if old.digits >= e.digits => {}
            _ => {
                map.insert(e.n, e);
            }
        }
    }

    pub fn merge(&self, other: &BetaTable) {
        for e in other.entries() {
            self.insert(e);
        }
    }

    pub fn entries(&self) -> Vec<BetaEntry> {
        self.entries.read().unwrap().values().cloned().collect()
    }

    /// Make sure `beta_0..=beta_{n_max}` exist at `ctx` precision; all missing
    /// orders share one vector quadrature.
    pub fn ensure(&self, n_max: usize, ctx: &PrecCtx) -> Result<()> {
        let missing: Vec<usize> = (0..=n_max).filter(|&n| self.get(n, ctx.digits()).is_none()).collect();
        if missing.is_empty() {
            return Ok(());
        }
        let jobs: Vec<MomentJob> = missing
            .iter()
            .map(|&n| MomentJob {
                power: 2 * n as u32,
                eta: 0,
            })
            .collect();
        let bits = ctx.bits();
        let (vals, upper) = phi_moments(&jobs, &Float::new(bits), ctx)?;
        let stamp = now();
        for (n, b) in missing.into_iter().zip(vals) {
            let f = HPReal::rounded(Float::with_val(bits, factorial(2 * n as u32)));
            let value = b.div(&f);
            self.insert(BetaEntry {
                n,
                digits: ctx.digits(),
                value,
                b_n: b,
                truncation_u: upper,
                timestamp: stamp,
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let entries: Vec<StoredEntry> = self.entries().iter().map(store).collect();
        let file = StoredFile {
            format: FORMAT.to_string(),
            sha256: checksum(&entries)?,
            entries,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: StoredFile = serde_json::from_str(text).map_err(|e| Error::CorruptCache(e.to_string()))?;
        if file.format != FORMAT {
            return Err(Error::CorruptCache(format!("unknown format {:?}", file.format)));
        }
        if checksum(&file.entries)? != file.sha256 {
            return Err(Error::CorruptCache("checksum mismatch".into()));
        }
        let table = BetaTable::new();
        for s in &file.entries {
            table.insert(restore(s)?);
        }
        Ok(table)
    }

    /// Write atomically (temporary file in the same directory, then rename).
    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::write(&tmp, self.to_json()?)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Load if present, otherwise an empty table.
    pub fn load_or_empty(path: &Path) -> Result<Self> {
        if path.exists() {
            Self::load(path)
        } else {
            Ok(Self::new())
        }
    }
}

fn at_ctx(v: &HPReal, ctx: &PrecCtx) -> HPReal {
    let bits = ctx.bits();
    if v.prec() == bits {
        return v.clone();
    }
    let r = HPReal::rounded(Float::with_val(bits, v.value()));
    let (val, e) = r.into_parts();
    HPReal::new(val, e).widen(v.err())
}

/// `beta_n` from the given table, computing missing orders.
pub fn beta_with_table(n: usize, ctx: &PrecCtx, table: &BetaTable) -> Result<HPReal> {
    table.ensure(n, ctx)?;
    let e = table.get(n, ctx.digits()).expect("entry present after ensure");
    Ok(at_ctx(&e.value, ctx))
}

/// `beta_n = (1/(2n)!) ∫_0^∞ Phi(u) u^{2n} du`, cached in the global table.
pub fn beta(n: usize, ctx: &PrecCtx) -> Result<HPReal> {
    beta_with_table(n, ctx, BetaTable::global())
}

/// Raw moment `b_n = ∫_0^∞ Phi(u) u^{2n} du`.
pub fn b_moment(n: usize, ctx: &PrecCtx) -> Result<HPReal> {
    let t = BetaTable::global();
    t.ensure(n, ctx)?;
    Ok(at_ctx(&t.get(n, ctx.digits()).unwrap().b_n, ctx))
}
