use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linsolve::{Method, SolverConfig};
use crate::manufactured::example;

/// Output formats of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Csv,
    Markdown,
    PlotData,
    Vtk,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Self::Csv),
            "markdown" | "md" => Ok(Self::Markdown),
            "plotdata" => Ok(Self::PlotData),
            "vtk" => Ok(Self::Vtk),
            other => Err(Error::InvalidArgument(format!("unknown format '{other}'"))),
        }
    }
}

fn parse_formats(s: &str) -> Result<Vec<Format>> {
    let mut out: Vec<Format> = Vec::new();
    for f in s.split(',').filter(|f| !f.trim().is_empty()) {
        let f = f.parse()?;
        if !out.contains(&f) {
            out.push(f);
        }
    }
    Ok(out)
}

/// Parses `lo..hi` (inclusive level exponents, `N = 2^l`).
pub fn parse_levels(s: &str) -> Result<(u32, u32)> {
    let bad = || Error::InvalidArgument(format!("levels must look like 2..8, got '{s}'"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let hi = hi.strip_prefix('=').unwrap_or(hi);
    Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub example: u32,
    pub l_min: u32,
    pub l_max: u32,
    pub solver: SolverConfig,
    pub include_hnorm: bool,
    pub out_dir: Option<PathBuf>,
    pub formats: Vec<Format>,
    /// Writes each system matrix in MatrixMarket format next to the tables.
    pub dump_matrices: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            example: 1,
            l_min: 2,
            l_max: 6,
            solver: SolverConfig::with_method(Method::Auto),
            include_hnorm: false,
            out_dir: None,
            formats: vec![Format::Csv],
            dump_matrices: false,
        }
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::InvalidArgument(format!("{key}: expected a boolean, got '{v}'"))),
    }
}

fn parse_number<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::InvalidArgument(format!("{key}: cannot parse '{v}'")))
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let sol = example(self.example)?;
        if self.l_min < 1 {
            return Err(Error::InvalidArgument("the coarsest level must be at least 1".into()));
        }
        if self.l_max < self.l_min {
            return Err(Error::InvalidArgument(format!("level range {}..{} is empty", self.l_min, self.l_max)));
        }
        let cap = if sol.geometry.spatial_dim() == 1 { 9 } else { 6 };
        if self.l_max > cap {
            return Err(Error::InvalidArgument(format!(
                "level {} exceeds the limit {cap} for example {}",
                self.l_max, self.example
            )));
        }
        self.solver.validate()
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "example" => self.example = parse_number(key, v)?,
            "levels" => (self.l_min, self.l_max) = parse_levels(v)?,
            "hnorm" => self.include_hnorm = parse_bool(key, v)?,
            "solver" => self.solver.method = v.parse()?,
            "format" => self.formats = parse_formats(v)?,
            "out" => self.out_dir = Some(PathBuf::from(v)),
            "tolerance" => self.solver.tolerance = parse_number(key, v)?,
            "max_iterations" => self.solver.max_iterations = parse_number(key, v)?,
            "restart" => self.solver.restart = parse_number(key, v)?,
            "memory_budget_mib" => self.solver.memory_budget = parse_number::<usize>(key, v)? << 20,
            "dump_matrices" => self.dump_matrices = parse_bool(key, v)?,
            other => return Err(Error::InvalidArgument(format!("unknown configuration key '{other}'"))),
        }
        Ok(())
    }

    /// Applies the settings of a flat `key = value` text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (k, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("line {}: expected key = value", k + 1)))?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        self.apply_text(&std::fs::read_to_string(path)?)
    }
}
