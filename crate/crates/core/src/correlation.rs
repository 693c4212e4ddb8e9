//! Sample correlation matrices from time-series panels.
//!
//! Every pair is correlated over its own observation window. Windows that
//! differ between pairs (missing data handled pairwise, or explicit
//! [`PairOverride`]s) break the Gram structure of the result, which is how
//! indefinite "correlation" matrices arise in practice.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrix;

/// Smallest window over which a correlation is computed.
pub const MIN_OBSERVATIONS: usize = 3;

/// Instruments × dates grid of optional observations.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesPanel {
    instruments: Vec<String>,
    dates: Vec<String>,
    /// `values[instrument][date]`
    values: Vec<Vec<Option<f64>>>,
}

impl TimeSeriesPanel {
    pub fn new(instruments: Vec<String>, dates: Vec<String>, values: Vec<Vec<Option<f64>>>) -> Result<Self> {
        if instruments.is_empty() {
            return Err(Error::InvalidPanel("at least one instrument required".into()));
        }
        if dates.len() < 2 {
            return Err(Error::InvalidPanel(format!(
                "at least 2 dates required, found {}",
                dates.len()
            )));
        }
        if let Some(dup) = first_duplicate(&instruments) {
            return Err(Error::InvalidPanel(format!("duplicate instrument label '{dup}'")));
        }
        if instruments.iter().any(|l| l.trim().is_empty()) {
            return Err(Error::InvalidPanel("empty instrument label".into()));
        }
        if let Some(dup) = first_duplicate(&dates) {
            return Err(Error::InvalidPanel(format!("duplicate date '{dup}'")));
        }
        if values.len() != instruments.len() {
            return Err(Error::InvalidPanel(format!(
                "{} value rows for {} instruments",
                values.len(),
                instruments.len()
            )));
        }
        for (label, row) in instruments.iter().zip(&values) {
            if row.len() != dates.len() {
                return Err(Error::InvalidPanel(format!(
                    "'{label}' has {} values for {} dates",
                    row.len(),
                    dates.len()
                )));
            }
            if let Some(k) = row.iter().position(|v| v.is_some_and(|x| !x.is_finite())) {
                return Err(Error::InvalidPanel(format!(
                    "non-finite value for '{label}' on {}",
                    dates[k]
                )));
            }
        }
        Ok(TimeSeriesPanel {
            instruments,
            dates,
            values,
        })
    }

    pub fn instruments(&self) -> &[String] {
        &self.instruments
    }

    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn series(&self, instrument: usize) -> &[Option<f64>] {
        &self.values[instrument]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.instruments.iter().position(|l| l == label)
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().flatten().filter(|v| v.is_none()).count()
    }
}

fn first_duplicate(items: &[String]) -> Option<&str> {
    let mut seen = BTreeSet::new();
    items.iter().find(|s| !seen.insert(s.as_str())).map(String::as_str)
}

/// Restricts the correlation window of one instrument pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairOverride {
    pub instrument_a: String,
    pub instrument_b: String,
    /// Inclusive, zero-based date index.
    pub start: usize,
    /// Inclusive, zero-based date index.
    pub end: usize,
}

impl PairOverride {
    pub fn new(instrument_a: impl Into<String>, instrument_b: impl Into<String>, start: usize, end: usize) -> Self {
        PairOverride {
            instrument_a: instrument_a.into(),
            instrument_b: instrument_b.into(),
            start,
            end,
        }
    }

    /// Resolves labels against `panel` and checks the window.
    fn resolve(&self, panel: &TimeSeriesPanel) -> Result<(usize, usize)> {
        let a = panel
            .index_of(&self.instrument_a)
            .ok_or_else(|| Error::UnknownInstrument(self.instrument_a.clone()))?;
        let b = panel
            .index_of(&self.instrument_b)
            .ok_or_else(|| Error::UnknownInstrument(self.instrument_b.clone()))?;
        if a == b {
            return Err(Error::InvalidOverride(format!(
                "'{}' paired with itself",
                self.instrument_a
            )));
        }
        if self.start > self.end || self.end >= panel.dates.len() {
            return Err(Error::InvalidOverride(format!(
                "window {}..={} outside {} dates",
                self.start,
                self.end,
                panel.dates.len()
            )));
        }
        if self.end - self.start + 1 < MIN_OBSERVATIONS {
            return Err(Error::InvalidOverride(format!(
                "window of {} dates is shorter than {MIN_OBSERVATIONS}",
                self.end - self.start + 1
            )));
        }
        Ok((a.min(b), a.max(b)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    /// Any missing cell is an error.
    #[default]
    Fail,
    /// Use only dates on which every instrument has a value.
    DropIncompleteDates,
    /// Each pair uses the dates on which both instruments have a value.
    PairwiseComplete,
}

/// Sample Pearson correlation, clamped to `[-1, 1]`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < MIN_OBSERVATIONS {
        return Err(Error::TooFewObservations {
            a: "x".into(),
            b: "y".into(),
            found: x.len(),
        });
    }
    pearson_unchecked(x, y).map_err(|which| Error::DegenerateSeries {
        instrument: which.to_string(),
    })
}

/// Err carries which argument was constant.
fn pearson_unchecked(x: &[f64], y: &[f64]) -> core::result::Result<f64, &'static str> {
    if is_constant(x) {
        return Err("x");
    }
    if is_constant(y) {
        return Err("y");
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err("x");
    }
    if syy == 0.0 {
        return Err("y");
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

fn is_constant(xs: &[f64]) -> bool {
    xs.iter().all(|v| *v == xs[0])
}

/// Pearson correlation matrix of a panel.
///
/// Each off-diagonal entry uses the pair's window: its override if one names
/// the pair, else the dates admitted by `policy`. Override windows are further
/// restricted to dates where both values are present (and, under
/// `DropIncompleteDates`, to complete dates). The diagonal is exactly 1.
pub fn sample_correlation(
    panel: &TimeSeriesPanel,
    policy: MissingPolicy,
    overrides: &[PairOverride],
) -> Result<SymmetricMatrix> {
    let n = panel.instruments.len();
    let dates = panel.dates.len();

    let mut windows: Vec<Option<(usize, usize)>> = alloc::vec![None; n * n];
    for o in overrides {
        let (a, b) = o.resolve(panel)?;
        if windows[a * n + b].is_some() {
            return Err(Error::InvalidOverride(format!(
                "pair ('{}', '{}') overridden more than once",
                o.instrument_a, o.instrument_b
            )));
        }
        windows[a * n + b] = Some((o.start, o.end));
    }

    let complete: Vec<bool> = (0..dates)
        .map(|t| panel.values.iter().all(|row| row[t].is_some()))
        .collect();
    if policy == MissingPolicy::Fail {
        for (label, row) in panel.instruments.iter().zip(&panel.values) {
            if let Some(t) = row.iter().position(Option::is_none) {
                return Err(Error::MissingData {
                    instrument: label.clone(),
                    date: panel.dates[t].clone(),
                });
            }
        }
    }

    let mut out = SymmetricMatrix::identity(n)?;
    let (mut xs, mut ys) = (Vec::with_capacity(dates), Vec::with_capacity(dates));
    for i in 0..n {
        for j in (i + 1)..n {
            let (start, end) = windows[i * n + j].unwrap_or((0, dates - 1));
            xs.clear();
            ys.clear();
            for (t, &ok) in complete.iter().enumerate().take(end + 1).skip(start) {
                if policy == MissingPolicy::DropIncompleteDates && !ok {
                    continue;
                }
                if let (Some(x), Some(y)) = (panel.values[i][t], panel.values[j][t]) {
                    xs.push(x);
                    ys.push(y);
                }
            }
            if xs.len() < MIN_OBSERVATIONS {
                return Err(Error::TooFewObservations {
                    a: panel.instruments[i].clone(),
                    b: panel.instruments[j].clone(),
                    found: xs.len(),
                });
            }
            let r = pearson_unchecked(&xs, &ys).map_err(|which| Error::DegenerateSeries {
                instrument: panel.instruments[if which == "x" { i } else { j }].clone(),
            })?;
            out.set(i, j, r)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn labels(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn complete_panel(rows: &[&[f64]]) -> TimeSeriesPanel {
        let names: Vec<String> = (0..rows.len()).map(|i| format!("s{i}")).collect();
        let dates: Vec<String> = (0..rows[0].len()).map(|t| format!("d{t:02}")).collect();
        let values = rows.iter().map(|r| r.iter().map(|v| Some(*v)).collect()).collect();
        TimeSeriesPanel::new(names, dates, values).unwrap()
    }

    #[test]
    fn pearson_self_and_negation() {
        let x = [1.0, 2.5, 2.0, 7.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(pearson(&x, &x).unwrap(), 1.0);
        assert_eq!(pearson(&x, &neg).unwrap(), -1.0);
    }

    #[test]
    fn pearson_errors() {
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::TooFewObservations { found: 2, .. })
        ));
        assert!(matches!(
            pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert_eq!(
            pearson(&[1.0, 2.0, 3.0], &[4.0, 4.0, 4.0]),
            Err(Error::DegenerateSeries { instrument: "y".into() })
        );
    }

    #[test]
    fn panel_validation() {
        let two = labels(&["d1", "d2"]);
        let dup = TimeSeriesPanel::new(labels(&["a", "a"]), two.clone(), vec![vec![None; 2]; 2]);
        assert!(matches!(dup, Err(Error::InvalidPanel(_))));
        let dup_dates = TimeSeriesPanel::new(labels(&["a"]), labels(&["d", "d"]), vec![vec![None; 2]]);
        assert!(matches!(dup_dates, Err(Error::InvalidPanel(_))));
        let short = TimeSeriesPanel::new(labels(&["a"]), labels(&["d"]), vec![vec![Some(1.0)]]);
        assert!(matches!(short, Err(Error::InvalidPanel(_))));
        let nan = TimeSeriesPanel::new(labels(&["a"]), two, vec![vec![Some(f64::NAN), None]]);
        assert!(matches!(nan, Err(Error::InvalidPanel(_))));
    }

    #[test]
    fn two_instruments_match_pearson() {
        let x = [1.0, 3.0, 2.0, 5.0, 4.0];
        let y = [2.0, 2.5, 2.0, 4.5, 5.0];
        let c = sample_correlation(&complete_panel(&[&x, &y]), MissingPolicy::Fail, &[]).unwrap();
        assert_eq!(c.get(0, 1), pearson(&x, &y).unwrap());
        assert_eq!(c.diagonal(), vec![1.0, 1.0]);
    }

    #[test]
    fn single_instrument_is_one_by_one() {
        let c = sample_correlation(&complete_panel(&[&[1.0, 2.0]]), MissingPolicy::Fail, &[]).unwrap();
        assert_eq!(c.as_slice(), &[1.0]);
    }

    fn gappy() -> TimeSeriesPanel {
        TimeSeriesPanel::new(
            labels(&["a", "b", "c"]),
            labels(&["1", "2", "3", "4", "5"]),
            vec![
                vec![Some(1.0), Some(2.0), Some(4.0), Some(3.0), Some(5.0)],
                vec![Some(2.0), None, Some(1.0), Some(3.0), Some(2.5)],
                vec![Some(0.5), Some(0.7), Some(0.1), None, Some(0.9)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn fail_policy_names_missing_cell() {
        let err = sample_correlation(&gappy(), MissingPolicy::Fail, &[]).unwrap_err();
        assert_eq!(
            err,
            Error::MissingData {
                instrument: "b".into(),
                date: "2".into()
            }
        );
    }

    #[test]
    fn drop_policy_uses_complete_dates() {
        let c = sample_correlation(&gappy(), MissingPolicy::DropIncompleteDates, &[]).unwrap();
        // complete dates: 1, 3, 5
        let expected = pearson(&[1.0, 4.0, 5.0], &[2.0, 1.0, 2.5]).unwrap();
        assert_eq!(c.get(0, 1), expected);
    }

    #[test]
    fn pairwise_policy_uses_pair_dates() {
        let c = sample_correlation(&gappy(), MissingPolicy::PairwiseComplete, &[]).unwrap();
        assert_eq!(
            c.get(0, 1),
            pearson(&[1.0, 4.0, 3.0, 5.0], &[2.0, 1.0, 3.0, 2.5]).unwrap()
        );
        assert_eq!(
            c.get(0, 2),
            pearson(&[1.0, 2.0, 4.0, 5.0], &[0.5, 0.7, 0.1, 0.9]).unwrap()
        );
        assert_eq!(c.get(1, 2), pearson(&[2.0, 1.0, 2.5], &[0.5, 0.1, 0.9]).unwrap());
    }

    #[test]
    fn too_few_common_observations() {
        let panel = TimeSeriesPanel::new(
            labels(&["a", "b"]),
            labels(&["1", "2", "3", "4"]),
            vec![
                vec![Some(1.0), Some(2.0), None, Some(3.0)],
                vec![None, Some(2.0), Some(1.0), Some(3.5)],
            ],
        )
        .unwrap();
        let err = sample_correlation(&panel, MissingPolicy::PairwiseComplete, &[]).unwrap_err();
        assert!(matches!(err, Error::TooFewObservations { found: 2, .. }));
    }

    #[test]
    fn degenerate_window_names_instrument() {
        let p = complete_panel(&[&[1.0, 2.0, 3.0, 4.0], &[5.0, 5.0, 5.0, 6.0]]);
        let err = sample_correlation(&p, MissingPolicy::Fail, &[PairOverride::new("s0", "s1", 0, 2)]).unwrap_err();
        assert_eq!(
            err,
            Error::DegenerateSeries {
                instrument: "s1".into()
            }
        );
    }

    #[test]
    fn override_changes_only_its_pair() {
        let p = complete_panel(&[
            &[1.0, 3.0, 2.0, 5.0, 4.0, 6.0],
            &[2.0, 2.5, 2.0, 4.5, 5.0, 4.0],
            &[9.0, 7.0, 8.0, 6.0, 6.5, 5.0],
        ]);
        let base = sample_correlation(&p, MissingPolicy::Fail, &[]).unwrap();
        let ov = sample_correlation(&p, MissingPolicy::Fail, &[PairOverride::new("s2", "s0", 0, 4)]).unwrap();
        assert_eq!(
            ov.get(0, 2),
            pearson(&[1.0, 3.0, 2.0, 5.0, 4.0], &[9.0, 7.0, 8.0, 6.0, 6.5]).unwrap()
        );
        assert_eq!(ov.get(0, 1).to_bits(), base.get(0, 1).to_bits());
        assert_eq!(ov.get(1, 2).to_bits(), base.get(1, 2).to_bits());
    }

    #[test]
    fn override_validation() {
        let p = complete_panel(&[&[1.0, 3.0, 2.0, 5.0], &[2.0, 2.5, 2.0, 4.5]]);
        let run = |o: PairOverride| sample_correlation(&p, MissingPolicy::Fail, &[o]).unwrap_err();
        assert_eq!(
            run(PairOverride::new("zz", "s0", 0, 3)),
            Error::UnknownInstrument("zz".into())
        );
        assert!(matches!(
            run(PairOverride::new("s0", "s0", 0, 3)),
            Error::InvalidOverride(_)
        ));
        assert!(matches!(
            run(PairOverride::new("s0", "s1", 0, 1)),
            Error::InvalidOverride(_)
        ));
        assert!(matches!(
            run(PairOverride::new("s0", "s1", 2, 4)),
            Error::InvalidOverride(_)
        ));
        let twice = [PairOverride::new("s0", "s1", 0, 2), PairOverride::new("s1", "s0", 1, 3)];
        assert!(matches!(
            sample_correlation(&p, MissingPolicy::Fail, &twice),
            Err(Error::InvalidOverride(_))
        ));
    }
}
