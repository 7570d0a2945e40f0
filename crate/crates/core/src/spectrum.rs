//! Finite, ascending Dirichlet spectra with provenance.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumSource {
    Analytic,
    Fem,
    File,
}

impl fmt::Display for SpectrumSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpectrumSource::Analytic => "analytic",
            SpectrumSource::Fem => "fem",
            SpectrumSource::File => "file",
        })
    }
}

impl std::str::FromStr for SpectrumSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Self::Analytic),
            "fem" => Ok(Self::Fem),
            "file" => Ok(Self::File),
            other => Err(Error::parse("spectrum source", format!("unknown source {other:?}"))),
        }
    }
}

/// Ascending eigenvalues, complete (no eigenvalue missing) up to `cutoff`.
///
/// Entries above the cutoff may be present but are not trusted for sums.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<T> {
    eigenvalues: Vec<T>,
    cutoff: T,
    source: SpectrumSource,
    domain_label: String,
    area_hint: Option<T>,
    /// Free-form provenance such as mesh size or grading (`key=value`).
    pub annotations: Vec<(String, String)>,
}

impl<T: Real> Spectrum<T> {
    pub fn new(
        eigenvalues: Vec<T>,
        cutoff: T,
        source: SpectrumSource,
        domain_label: impl Into<String>,
    ) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::EmptySpectrum("no eigenvalues".into()));
        }
        if !(eigenvalues[0] > T::zero()) {
            return Err(Error::Domain(format!("eigenvalues must be positive, got {}", eigenvalues[0])));
        }
        if let Some(i) = eigenvalues.windows(2).position(|w| !(w[1] >= w[0])) {
            return Err(Error::Domain(format!("eigenvalues not ascending at index {}", i + 1)));
        }
        if !(cutoff >= eigenvalues[0]) {
            return Err(Error::EmptySpectrum(format!("cutoff {cutoff} is below the first eigenvalue")));
        }
        Ok(Self {
            eigenvalues,
            cutoff,
            source,
            domain_label: domain_label.into(),
            area_hint: None,
            annotations: Vec::new(),
        })
    }

    pub fn with_area_hint(mut self, area: T) -> Self {
        self.area_hint = Some(area);
        self
    }

    /// Adds `key`, or replaces its value if already present.
    pub fn with_annotation(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        let (key, value) = (key.into(), value.to_string());
        match self.annotations.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.annotations.push((key, value)),
        }
        self
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    /// Eigenvalues up to and including the completeness cutoff.
    pub fn complete_part(&self) -> &[T] {
        let n = self.eigenvalues.partition_point(|&l| l <= self.cutoff);
        &self.eigenvalues[..n]
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn cutoff(&self) -> T {
        self.cutoff
    }

    pub fn first(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn source(&self) -> SpectrumSource {
        self.source
    }

    pub fn domain_label(&self) -> &str {
        &self.domain_label
    }

    pub fn area_hint(&self) -> Option<T> {
        self.area_hint
    }

    pub fn annotation(&self, key: &str) -> Option<&str> {
        self.annotations.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Spectrum of the domain dilated by `s`: every eigenvalue divided by `s²`.
    pub fn dilated(&self, s: T) -> Self {
        let f = (s * s).recip();
        Self {
            eigenvalues: self.eigenvalues.iter().map(|&l| l * f).collect(),
            cutoff: self.cutoff * f,
            source: self.source,
            domain_label: format!("{} dilated by {s}", self.domain_label),
            area_hint: self.area_hint.map(|a| a * s * s),
            annotations: self.annotations.clone(),
        }
    }

    /// Copy restricted to eigenvalues `≤ cutoff`.
    pub fn truncated(&self, cutoff: T) -> Result<Self> {
        let n = self.eigenvalues.partition_point(|&l| l <= cutoff.min(self.cutoff));
        let mut s = Self::new(self.eigenvalues[..n].to_vec(), cutoff.min(self.cutoff), self.source, self.domain_label.clone())?;
        s.area_hint = self.area_hint;
        s.annotations = self.annotations.clone();
        Ok(s)
    }

    /// Copy keeping only the first `count` eigenvalues; the cutoff drops to the last kept value.
    pub fn first_n(&self, count: usize) -> Result<Self> {
        let n = count.min(self.eigenvalues.len());
        let cutoff = self.eigenvalues[n.max(1) - 1].min(self.cutoff);
        let mut s = Self::new(self.eigenvalues[..n].to_vec(), cutoff, self.source, self.domain_label.clone())?;
        s.area_hint = self.area_hint;
        s.annotations = self.annotations.clone();
        Ok(s)
    }

    /// Size of the cluster each eigenvalue belongs to (equal within `rel_tol`).
    pub fn multiplicity_hints(&self, rel_tol: T) -> Vec<usize> {
        let mut hints = vec![1; self.eigenvalues.len()];
        let mut start = 0;
        for i in 1..=self.eigenvalues.len() {
            let split = i == self.eigenvalues.len()
                || self.eigenvalues[i] - self.eigenvalues[start] > rel_tol * self.eigenvalues[start];
            if split {
                for h in &mut hints[start..i] {
                    *h = i - start;
                }
                start = i;
            }
        }
        hints
    }
}
