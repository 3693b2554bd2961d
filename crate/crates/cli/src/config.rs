use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hdg_core::problems::{example1_with_gamma, example2_with_gamma, poly_debug, ProblemData};

use crate::CliError;

const MAX_DEGREE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Example1,
    Example2,
    PolyDebug,
}

impl ProblemKind {
    pub fn build(self, gamma: f64) -> ProblemData {
        match self {
            ProblemKind::Example1 => example1_with_gamma(gamma),
            ProblemKind::Example2 => example2_with_gamma(gamma),
            ProblemKind::PolyDebug => ProblemData {
                gamma,
                ..poly_debug()
            },
        }
    }
}

impl FromStr for ProblemKind {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "example1" => Ok(ProblemKind::Example1),
            "example2" => Ok(ProblemKind::Example2),
            "poly_debug" => Ok(ProblemKind::PolyDebug),
            other => Err(CliError::Config(format!("unknown problem `{other}`"))),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Example1 => "example1",
            ProblemKind::Example2 => "example2",
            ProblemKind::PolyDebug => "poly_debug",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Markdown,
}

impl FromStr for OutputFormat {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            other => Err(CliError::Config(format!("unknown output format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub problem: ProblemKind,
    pub k: usize,
    pub levels: Vec<usize>,
    pub gamma: f64,
    pub tau2: f64,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
    pub seed: u64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            problem: ProblemKind::Example1,
            k: 1,
            levels: vec![8, 16, 32, 64],
            gamma: 1.0,
            tau2: 1.0,
            output_format: OutputFormat::Csv,
            output_path: None,
            seed: 0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("bad value `{value}` for `{key}`")))
}

pub fn parse_levels(value: &str) -> Result<Vec<usize>, CliError> {
    value
        .split(',')
        .map(|s| parse::<usize>("levels", s.trim()))
        .collect()
}

impl StudyConfig {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "problem" => self.problem = value.parse()?,
            "k" => self.k = parse(key, value)?,
            "levels" => self.levels = parse_levels(value)?,
            "gamma" => self.gamma = parse(key, value)?,
            "tau2" => self.tau2 = parse(key, value)?,
            "output_format" => self.output_format = value.parse()?,
            "output_path" => self.output_path = Some(PathBuf::from(value)),
            "seed" => self.seed = parse(key, value)?,
            other => return Err(CliError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file on top of `self`. Blank lines and
    /// `#` comments are ignored.
    pub fn merge_str(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key=value", i + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        self.merge_str(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.k > MAX_DEGREE {
            return Err(CliError::Config(format!(
                "k = {} exceeds the maximum degree {MAX_DEGREE}",
                self.k
            )));
        }
        let first = match self.levels.first() {
            Some(&n) if n > 0 => n,
            _ => return Err(CliError::Config("levels must be non-empty and positive".into())),
        };
        for pair in self.levels.windows(2) {
            if pair[1] <= pair[0] {
                return Err(CliError::Config("levels must be strictly increasing".into()));
            }
        }
        for &n in &self.levels {
            let ratio = n / first;
            if n % first != 0 || !ratio.is_power_of_two() {
                return Err(CliError::Config(format!(
                    "level {n} is not a power-of-two multiple of {first}"
                )));
            }
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(CliError::Config("gamma must be positive".into()));
        }
        if !self.tau2.is_finite() {
            return Err(CliError::Config("tau2 must be finite".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_defaults() {
        let mut c = StudyConfig::default();
        c.merge_str("# study\nproblem = example2\nk=0\nlevels = 16, 32,64\n\ngamma=0.5 # trailing\n")
            .unwrap();
        assert_eq!(c.problem, ProblemKind::Example2);
        assert_eq!(c.k, 0);
        assert_eq!(c.levels, vec![16, 32, 64]);
        assert_eq!(c.gamma, 0.5);
        c.validate().unwrap();
    }

    #[test]
    fn bad_lines_are_config_errors() {
        let mut c = StudyConfig::default();
        for text in ["k", "colour=red", "k=two", "problem=example3", "output_format=xml"] {
            assert!(matches!(c.merge_str(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn level_rules() {
        let check = |levels: Vec<usize>| StudyConfig { levels, ..StudyConfig::default() }.validate();
        assert!(check(vec![4, 8, 32]).is_ok());
        assert!(check(vec![8]).is_ok());
        assert!(check(vec![8, 8]).is_err());
        assert!(check(vec![16, 8]).is_err());
        assert!(check(vec![4, 12]).is_err());
        assert!(check(vec![]).is_err());
        assert!(check(vec![0, 2]).is_err());
    }

    #[test]
    fn degree_and_gamma_limits() {
        assert!(StudyConfig { k: 5, ..StudyConfig::default() }.validate().is_err());
        assert!(StudyConfig { k: 4, ..StudyConfig::default() }.validate().is_ok());
        assert!(StudyConfig { gamma: 0.0, ..StudyConfig::default() }.validate().is_err());
    }
}
