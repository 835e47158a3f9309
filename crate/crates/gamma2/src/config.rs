//! Flat key-value run configuration.
//!
//! The format is plain text, one `section.key = value` per line, `#` comments.
//! No nesting: diff-friendly and trivially portable.
//!
//! ```text
//! potential.kind = quartic
//! weight.kind = affine
//! weight.a0 = 1.0
//! weight.a1 = 1.0
//! weight.t_lo = -1.0
//! weight.t_hi = 1.0
//! run.mass = 1.0
//! run.mode = recovery
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use crate::asymptotics::SweepMode;
use crate::error::{Error, Result};
use crate::isoperimetry::{
    build_modified_profile, levelset_weight, rearranged_weight, solve_volume_function,
    square_iso_profile, CanonicalSet, Weight,
};
use crate::potential::{Potential, WellData};

/// Parsed key-value map with typed accessors.
#[derive(Debug, Clone, Default)]
pub struct Config {
    map: BTreeMap<String, String>,
    /// Directory resolved against for relative file references.
    pub base_dir: std::path::PathBuf,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Config { map, base_dir: std::path::PathBuf::from(".") })
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Config::parse(&text)?;
        cfg.base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.map.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Config(format!("missing key '{key}'")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.require(key)?
            .parse()
            .map_err(|e| Error::Config(format!("key '{key}': {e}")))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(_) => self.f64(key),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|e| Error::Config(format!("key '{key}': {e}"))),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s.parse().map_err(|e| Error::Config(format!("key '{key}': {e}"))),
        }
    }

    /// Build the potential named by `potential.kind`.
    pub fn potential(&self) -> Result<Potential> {
        match self.require("potential.kind")? {
            "quartic" => Ok(Potential::quartic()),
            "subquadratic" => Potential::subquadratic(self.f64("potential.q")?),
            "skewed" => Potential::skewed(self.f64("potential.p")?),
            "table" => {
                let file = self.base_dir.join(self.require("potential.file")?);
                let text = std::fs::read_to_string(&file).map_err(|e| {
                    Error::Config(format!("potential.file {}: {e}", file.display()))
                })?;
                let mut s = Vec::new();
                let mut w = Vec::new();
                let mut wp = Vec::new();
                for line in text.lines().skip(1) {
                    let cols: Vec<&str> = line.trim().split(',').collect();
                    if cols.len() != 3 || line.trim().is_empty() {
                        continue;
                    }
                    s.push(cols[0].parse().map_err(|e| Error::Config(format!("{e}")))?);
                    w.push(cols[1].parse().map_err(|e| Error::Config(format!("{e}")))?);
                    wp.push(cols[2].parse().map_err(|e| Error::Config(format!("{e}")))?);
                }
                let wells = WellData {
                    a: self.f64("potential.a")?,
                    b: self.f64("potential.b")?,
                    c: self.f64("potential.c")?,
                    q: self.f64_or("potential.q", 1.0)?,
                    ell: self.f64_or("potential.ell", f64::NAN)?,
                };
                Potential::from_table(s, w, wp, wells)
            }
            other => Err(Error::Config(format!("unknown potential.kind '{other}'"))),
        }
    }

    /// Build the weight named by `weight.kind`.
    pub fn weight(&self) -> Result<Weight> {
        match self.require("weight.kind")? {
            "uniform" => Ok(Weight::uniform(
                self.f64_or("weight.value", 1.0)?,
                self.f64("weight.t_lo")?,
                self.f64("weight.t_hi")?,
            )),
            "affine" => Weight::affine(
                self.f64("weight.a0")?,
                self.f64("weight.a1")?,
                self.f64("weight.t_lo")?,
                self.f64("weight.t_hi")?,
            ),
            "levelset" => levelset_weight(self.canonical_set()?),
            "rearranged" => {
                // square domain pinned at weight.v_m
                let iso = square_iso_profile();
                let istar = Arc::new(build_modified_profile(
                    &iso,
                    self.f64_or("weight.v_m", 0.4)?,
                    self.f64_or("weight.beta", 1.0)?,
                    self.get("weight.c0").map(|_| self.f64("weight.c0")).transpose()?,
                    self.get("weight.delta").map(|_| self.f64("weight.delta")).transpose()?,
                )?);
                let dom = Arc::new(solve_volume_function(istar.as_ref(), 1e-12)?);
                rearranged_weight(dom, istar)
            }
            "table" => {
                let file = self.base_dir.join(self.require("weight.file")?);
                let text = std::fs::read_to_string(&file)
                    .map_err(|e| Error::Config(format!("weight.file {}: {e}", file.display())))?;
                let mut t = Vec::new();
                let mut eta = Vec::new();
                for line in text.lines().skip(1) {
                    let cols: Vec<&str> = line.trim().split(',').collect();
                    if cols.len() < 2 || line.trim().is_empty() {
                        continue;
                    }
                    t.push(cols[0].parse().map_err(|e| Error::Config(format!("{e}")))?);
                    eta.push(cols[1].parse().map_err(|e| Error::Config(format!("{e}")))?);
                }
                Weight::from_table(t, eta)
            }
            other => Err(Error::Config(format!("unknown weight.kind '{other}'"))),
        }
    }

    pub fn canonical_set(&self) -> Result<CanonicalSet> {
        match self.require("weight.set")? {
            "strip" => Ok(CanonicalSet::VerticalStrip { s: self.f64_or("weight.s", 0.5)? }),
            "quarter_disk" => Ok(CanonicalSet::QuarterDisk { r: self.f64_or("weight.r", 0.5)? }),
            "centered_disk" => Ok(CanonicalSet::CenteredDisk { r: self.f64_or("weight.r", 0.25)? }),
            "centered_ball" => Ok(CanonicalSet::CenteredBall {
                r: self.f64_or("weight.r", 0.5)?,
                n: self.usize_or("weight.n", 3)? as u32,
            }),
            other => Err(Error::Config(format!("unknown weight.set '{other}'"))),
        }
    }

    /// Strictly decreasing positive eps sweep from `run.eps_hi/lo/count` or an
    /// explicit `run.eps_list`.
    pub fn eps_list(&self) -> Result<Vec<f64>> {
        if let Some(spec) = self.get("run.eps_list") {
            let eps: std::result::Result<Vec<f64>, _> =
                spec.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let eps = eps.map_err(|e| Error::Config(format!("run.eps_list: {e}")))?;
            if eps.is_empty() || eps.windows(2).any(|w| w[1] >= w[0]) || eps.iter().any(|&e| e <= 0.0)
            {
                return Err(Error::Config(
                    "run.eps_list must be positive and strictly decreasing".into(),
                ));
            }
            return Ok(eps);
        }
        let hi = self.f64_or("run.eps_hi", 1e-1)?;
        let lo = self.f64_or("run.eps_lo", 1e-3)?;
        let count = self.usize_or("run.eps_count", 7)?;
        if !(hi > lo && lo > 0.0 && count >= 2) {
            return Err(Error::Config("need run.eps_hi > run.eps_lo > 0, count >= 2".into()));
        }
        Ok(crate::asymptotics::geometric_eps(hi, lo, count))
    }

    pub fn sweep_mode(&self) -> Result<SweepMode> {
        match self.get("run.mode").unwrap_or("recovery") {
            "recovery" => Ok(SweepMode::Recovery),
            "minimize" => Ok(SweepMode::Minimize),
            other => Err(Error::Config(format!("unknown run.mode '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_build() {
        let cfg = Config::parse(
            "# demo\npotential.kind = quartic\nweight.kind = affine\nweight.a0 = 1.0\n\
             weight.a1 = 1\nweight.t_lo = -1\nweight.t_hi = 1\nrun.mass = 1.0\n",
        )
        .unwrap();
        let p = cfg.potential().unwrap();
        assert_eq!(p.wells().ell, 4.0);
        let w = cfg.weight().unwrap();
        assert!((w.total() - 2.0).abs() < 1e-14);
        assert_eq!(cfg.f64("run.mass").unwrap(), 1.0);
    }

    #[test]
    fn missing_key_is_an_error() {
        let cfg = Config::parse("weight.kind = uniform\n").unwrap();
        let err = cfg.potential().unwrap_err();
        assert!(err.to_string().contains("potential.kind"), "{err}");
    }

    #[test]
    fn eps_list_validation() {
        let cfg = Config::parse("run.eps_list = 0.1, 0.2\n").unwrap();
        assert!(cfg.eps_list().is_err());
        let cfg = Config::parse("run.eps_list = 0.1, 0.05, 0.01\n").unwrap();
        assert_eq!(cfg.eps_list().unwrap().len(), 3);
        let cfg = Config::parse("run.eps_hi = 0.1\nrun.eps_lo = 0.001\nrun.eps_count = 7\n").unwrap();
        let eps = cfg.eps_list().unwrap();
        assert_eq!(eps.len(), 7);
        assert!((eps[0] - 0.1).abs() < 1e-15 && (eps[6] - 0.001).abs() < 1e-15);
    }
}
