//! CSV formatting and atomic artifact writing.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use tempfile::NamedTempFile;

/// `%.12g`: 12 significant digits, trailing zeros removed, exponent form
/// outside `[1e-4, 1e12)`.
pub fn fmt_g(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (DIGITS - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { header: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, values: &[f64]) {
        self.rows.push(values.iter().map(|&v| fmt_g(v)).collect::<Vec<_>>().join(","));
    }

    pub fn push_raw(&mut self, cells: &[String]) {
        self.rows.push(cells.join(","));
    }

    /// Comment header, column line and rows, LF terminated.
    pub fn render(&self, comment: &str) -> String {
        let mut out = String::new();
        for line in comment.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(row);
            out.push('\n');
        }
        out
    }
}

/// A destination reserved before any computation: the temporary file is
/// created next to the target so the final rename stays on one filesystem.
pub struct Artifact {
    target: PathBuf,
    temp: NamedTempFile,
}

impl Artifact {
    pub fn reserve(dir: &Path, name: &str) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        let target = dir.join(name);
        if target.is_dir() {
            anyhow::bail!("output path {} is a directory", target.display());
        }
        let temp = NamedTempFile::new_in(dir)
            .with_context(|| format!("output directory {} is not writable", dir.display()))?;
        Ok(Artifact { target, temp })
    }

    pub fn path(&self) -> &Path {
        &self.target
    }

    pub fn commit(mut self, contents: &str) -> Result<PathBuf> {
        self.temp.write_all(contents.as_bytes())?;
        self.temp.as_file().sync_all()?;
        self.temp.persist(&self.target).with_context(|| format!("cannot write {}", self.target.display()))?;
        Ok(self.target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(0.1), "0.1");
        assert_eq!(fmt_g(-2.5), "-2.5");
        assert_eq!(fmt_g(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_g(123456.789), "123456.789");
        assert_eq!(fmt_g(1e-5), "1e-05");
        assert_eq!(fmt_g(1.5e-7), "1.5e-07");
        assert_eq!(fmt_g(0.0001), "0.0001");
        assert_eq!(fmt_g(1e12), "1e+12");
        assert_eq!(fmt_g(999999999999.5), "1e+12");
        assert_eq!(fmt_g(0.999999999999951), "1");
        assert_eq!(fmt_g(2.0f64.sqrt()), "1.41421356237");
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new(&["a", "b"]);
        t.push(&[1.0, 0.5]);
        assert_eq!(t.render("x = 1\ny = 2"), "# x = 1\n# y = 2\na,b\n1,0.5\n");
    }

    #[test]
    fn artifact_is_atomic() {
        let dir = tempfile::tempdir().unwrap();
        let a = Artifact::reserve(dir.path(), "out.csv").unwrap();
        assert!(!a.path().exists());
        let path = a.commit("x\n").unwrap();
        assert_eq!(std::fs::read_to_string(path).unwrap(), "x\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
