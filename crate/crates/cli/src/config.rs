//! Flat `key=value` configuration.

use std::path::Path;

use dimone::dimension::Constants;
use dimone::modelmap::ModelMap;
use dimone::numerics::NumCtx;
use dimone::params::ParamTable;
use dimone::{Error, Result};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Config {
    #[serde(rename = "N")]
    pub n: u32,
    pub kmax: u32,
    #[serde(rename = "P_sig")]
    pub p_sig: u32,
    #[serde(rename = "P_ang")]
    pub p_ang: u64,
    pub guard: u64,
    #[serde(rename = "Cprime")]
    pub cprime: f64,
    pub p: f64,
    #[serde(rename = "Lpp")]
    pub lpp: f64,
    #[serde(rename = "Pp")]
    pub pp: f64,
    pub lambda: f64,
    pub delta: f64,
    pub tol: f64,
    pub seed: u64,
    pub output_dir: Option<String>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            n: 10,
            kmax: 64,
            p_sig: 128,
            p_ang: 4096,
            guard: 256,
            cprime: 1.0,
            p: 2.0 * 2f64.sqrt(),
            lpp: 10.0,
            pp: 10.0,
            lambda: 0.05,
            delta: 0.25,
            tol: (-64f64).exp2(),
            seed: 0,
            output_dir: None,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("bad value {v:?} for {key}")))
}

/// A real, also accepted as `2^x`.
fn real(key: &str, v: &str) -> Result<f64> {
    match v.strip_prefix("2^") {
        Some(e) => Ok(num::<f64>(key, e)?.exp2()),
        None => num(key, v),
    }
}

impl Config {
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "N" => self.n = num(key, v)?,
            "kmax" => self.kmax = num(key, v)?,
            "P_sig" => self.p_sig = num(key, v)?,
            "P_ang" => self.p_ang = num(key, v)?,
            "guard" => self.guard = num(key, v)?,
            "Cprime" => self.cprime = real(key, v)?,
            "p" => self.p = real(key, v)?,
            "Lpp" => self.lpp = real(key, v)?,
            "Pp" => self.pp = real(key, v)?,
            "lambda" => self.lambda = real(key, v)?,
            "delta" => self.delta = real(key, v)?,
            "tol" => self.tol = real(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "output_dir" => self.output_dir = Some(v.to_string()),
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Parse `key=value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Config> {
        let mut c = Config::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            c.set(k.trim(), v.trim())?;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Config::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 5 {
            return Err(Error::Config(format!("N must be >= 5, got {}", self.n)));
        }
        if self.kmax < 1 {
            return Err(Error::Config("kmax must be >= 1".into()));
        }
        if self.p_sig < 64 || self.p_ang < 64 {
            return Err(Error::Config("P_sig and P_ang must be >= 64".into()));
        }
        if self.p <= 2.0 {
            return Err(Error::Config(format!("p must be > 2, got {}", self.p)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config("tol must be positive".into()));
        }
        Ok(())
    }

    pub fn ctx(&self) -> NumCtx {
        NumCtx { p_sig: self.p_sig, p_ang: self.p_ang, guard: self.guard }
    }

    pub fn table(&self) -> Result<ParamTable> {
        ParamTable::build(self.n, self.kmax, self.cprime)
    }

    pub fn model(&self) -> Result<ModelMap> {
        Ok(ModelMap::new(self.table()?, self.ctx()).with_petal_constants(self.lambda, self.delta))
    }

    pub fn constants(&self) -> Constants {
        Constants { lpp: self.lpp, pp: self.pp, delta: self.delta, lambda: self.lambda }
    }
}
