//! Accuracy evaluation of reputation output against ground truth, and the
//! similarity-threshold sweep that drives parameter studies.
//!
//! The sweep is generic over a runner closure: it calls the runner once per
//! (entity, threshold) pair and collects reputation and absolute error into
//! a [`SweepResult`], which knows how to average itself per entity, per
//! threshold, and overall, and how to serialize the whole study as CSV.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error("the threshold grid is empty")]
    EmptyGrid,
    #[error("no entities to sweep")]
    NoEntities,
    #[error("similarity threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("entity '{0}' appears twice in the sweep input")]
    DuplicateEntity(String),
    #[error("entity '{entity_id}' failed at t0={t0}: {message}")]
    PipelineFailed {
        entity_id: String,
        t0: f64,
        message: String,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: csv::Error,
    },
}

/// Absolute difference between the ground-truth reputation and the
/// computed one.
pub fn absolute_error(ground_truth: f64, reputation: f64) -> f64 {
    (ground_truth - reputation).abs()
}

/// Squared difference — always `absolute_error²`.
pub fn squared_error(ground_truth: f64, reputation: f64) -> f64 {
    let d = absolute_error(ground_truth, reputation);
    d * d
}

/// The default sweep grid: 19 thresholds 0.05, 0.10, …, 0.95. Dividing
/// instead of multiplying keeps each value correctly rounded, so the
/// thresholds print cleanly in sweep tables.
pub fn default_t0_grid() -> Vec<f64> {
    (1..=19).map(|i| i as f64 / 20.0).collect()
}

/// One (entity, threshold) cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub entity_id: String,
    pub t0: f64,
    pub reputation: f64,
    pub abs_error: f64,
}

/// A full sweep: every entity evaluated at every grid threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub grid: Vec<f64>,
    pub entity_ids: Vec<String>,
    /// Row-major: all grid points of one entity, then the next entity.
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    /// Mean absolute error per entity, across the whole grid.
    pub fn maer_per_entity(&self) -> Vec<(String, f64)> {
        self.entity_ids
            .iter()
            .map(|id| {
                let errors: Vec<f64> = self
                    .cells
                    .iter()
                    .filter(|c| &c.entity_id == id)
                    .map(|c| c.abs_error)
                    .collect();
                (id.clone(), mean(&errors))
            })
            .collect()
    }

    /// Mean absolute error per threshold, across all entities.
    pub fn maer_per_threshold(&self) -> Vec<(f64, f64)> {
        self.grid
            .iter()
            .map(|&t0| {
                let errors: Vec<f64> = self
                    .cells
                    .iter()
                    .filter(|c| c.t0 == t0)
                    .map(|c| c.abs_error)
                    .collect();
                (t0, mean(&errors))
            })
            .collect()
    }

    /// Mean absolute error over every cell.
    pub fn grand_mean(&self) -> f64 {
        let errors: Vec<f64> = self.cells.iter().map(|c| c.abs_error).collect();
        mean(&errors)
    }
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Runs `runner(entity_id, t0)` for every entity at every grid point.
/// `entities` pairs each entity id with its ground-truth reputation; the
/// runner returns the computed reputation, or a message that is propagated
/// annotated with the offending entity and threshold.
pub fn t0_sweep<F>(
    grid: &[f64],
    entities: &[(String, f64)],
    mut runner: F,
) -> Result<SweepResult, EvaluationError>
where
    F: FnMut(&str, f64) -> Result<f64, String>,
{
    if grid.is_empty() {
        return Err(EvaluationError::EmptyGrid);
    }
    if entities.is_empty() {
        return Err(EvaluationError::NoEntities);
    }
    for &t0 in grid {
        if !t0.is_finite() || !(0.0..=1.0).contains(&t0) {
            return Err(EvaluationError::InvalidThreshold(t0));
        }
    }
    let mut entity_ids = Vec::with_capacity(entities.len());
    for (id, _) in entities {
        if entity_ids.contains(id) {
            return Err(EvaluationError::DuplicateEntity(id.clone()));
        }
        entity_ids.push(id.clone());
    }

    let mut cells = Vec::with_capacity(grid.len() * entities.len());
    for (entity_id, ground_truth) in entities {
        for &t0 in grid {
            let reputation =
                runner(entity_id, t0).map_err(|message| EvaluationError::PipelineFailed {
                    entity_id: entity_id.clone(),
                    t0,
                    message,
                })?;
            cells.push(SweepCell {
                entity_id: entity_id.clone(),
                t0,
                reputation,
                abs_error: absolute_error(*ground_truth, reputation),
            });
        }
    }
    Ok(SweepResult {
        grid: grid.to_vec(),
        entity_ids,
        cells,
    })
}

/// Writes a sweep as CSV: header `entity,t0,reputation,abs_error`, one row
/// per cell, then summary rows — per entity (t0 column `all`), per
/// threshold (entity column `all`), and one grand-mean row (`all,all`).
/// Summary rows carry the mean absolute error in the `abs_error` column
/// and leave `reputation` empty.
pub fn write_sweep_csv(result: &SweepResult, path: &Path) -> Result<(), EvaluationError> {
    let to_err = |source: csv::Error| EvaluationError::Write {
        path: path.display().to_string(),
        source,
    };
    let mut writer = csv::Writer::from_path(path).map_err(to_err)?;
    writer
        .write_record(["entity", "t0", "reputation", "abs_error"])
        .map_err(to_err)?;
    for cell in &result.cells {
        writer
            .write_record([
                cell.entity_id.clone(),
                format!("{}", cell.t0),
                format!("{}", cell.reputation),
                format!("{}", cell.abs_error),
            ])
            .map_err(to_err)?;
    }
    for (entity_id, maer) in result.maer_per_entity() {
        writer
            .write_record([entity_id, "all".to_string(), String::new(), format!("{maer}")])
            .map_err(to_err)?;
    }
    for (t0, maer) in result.maer_per_threshold() {
        writer
            .write_record([
                "all".to_string(),
                format!("{t0}"),
                String::new(),
                format!("{maer}"),
            ])
            .map_err(to_err)?;
    }
    writer
        .write_record([
            "all".to_string(),
            "all".to_string(),
            String::new(),
            format!("{}", result.grand_mean()),
        ])
        .map_err(to_err)?;
    writer.flush().map_err(|e| EvaluationError::Write {
        path: path.display().to_string(),
        source: csv::Error::from(e),
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use tempfile::tempdir;

    #[test]
    fn absolute_and_squared_errors_on_a_worked_pair() {
        assert_abs_diff_eq!(absolute_error(9.2, 8.915), 0.285, epsilon = 1e-9);
        assert_abs_diff_eq!(squared_error(9.2, 8.915), 0.081225, epsilon = 1e-9);
        assert_eq!(absolute_error(5.0, 5.0), 0.0);
    }

    #[test]
    fn default_grid_spans_the_open_unit_interval() {
        let grid = default_t0_grid();
        assert_eq!(grid.len(), 19);
        assert_abs_diff_eq!(grid[0], 0.05, epsilon = 1e-12);
        assert_abs_diff_eq!(grid[18], 0.95, epsilon = 1e-12);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
        assert!(grid.iter().all(|&t| 0.0 < t && t < 1.0));
    }

    #[test]
    fn single_point_grid_degenerates_to_one_run_per_entity() {
        let entities = vec![("A".to_string(), 9.0), ("B".to_string(), 4.0)];
        let mut calls = Vec::new();
        let result = t0_sweep(&[0.5], &entities, |id, t0| {
            calls.push((id.to_string(), t0));
            Ok(8.0)
        })
        .unwrap();
        assert_eq!(calls, vec![("A".to_string(), 0.5), ("B".to_string(), 0.5)]);
        assert_eq!(result.cells.len(), 2);
        assert_abs_diff_eq!(result.cells[0].abs_error, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(result.cells[1].abs_error, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn identical_runs_produce_identical_sweeps() {
        let entities = vec![("A".to_string(), 7.0)];
        let runner = |_: &str, t0: f64| Ok(7.0 - t0);
        let first = t0_sweep(&default_t0_grid(), &entities, runner).unwrap();
        let second = t0_sweep(&default_t0_grid(), &entities, runner).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn runner_failures_name_the_entity_and_threshold() {
        let entities = vec![("A".to_string(), 7.0)];
        let err = t0_sweep(&[0.25, 0.75], &entities, |_, t0| {
            if t0 > 0.5 {
                Err("no vector for review 'r9'".to_string())
            } else {
                Ok(6.0)
            }
        })
        .unwrap_err();
        let message = err.to_string();
        assert!(message.contains('A') && message.contains("0.75"), "{message}");
        assert!(message.contains("r9"), "{message}");
    }

    #[test]
    fn sweep_rejects_bad_inputs() {
        let entities = vec![("A".to_string(), 7.0)];
        assert!(matches!(
            t0_sweep(&[], &entities, |_, _| Ok(0.0)),
            Err(EvaluationError::EmptyGrid)
        ));
        assert!(matches!(
            t0_sweep(&[0.5], &[], |_, _| Ok(0.0)),
            Err(EvaluationError::NoEntities)
        ));
        assert!(matches!(
            t0_sweep(&[1.5], &entities, |_, _| Ok(0.0)),
            Err(EvaluationError::InvalidThreshold(_))
        ));
        let duplicated = vec![("A".to_string(), 7.0), ("A".to_string(), 3.0)];
        assert!(matches!(
            t0_sweep(&[0.5], &duplicated, |_, _| Ok(0.0)),
            Err(EvaluationError::DuplicateEntity(_))
        ));
    }

    #[test]
    fn group_counts_stay_nondecreasing_when_swept() {
        // End-to-end across the sweep machinery: a runner that counts
        // opinion groups over hierarchically clustered vectors must report
        // nondecreasing counts along the grid.
        use crate::grouping::{fuse_and_group, GroupingConfig};
        use std::collections::HashMap;

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut ids = Vec::new();
        let mut vectors = HashMap::new();
        let mut ratings = HashMap::new();
        for i in 0..12 {
            let id = format!("r{i}");
            let mut vector = vec![0.0; 30];
            let mut prefix = 0usize;
            let mut offset = 0usize;
            for level in 0..4 {
                prefix = prefix * 2 + usize::from(rng.gen_bool(0.5));
                vector[offset + prefix] = 0.5;
                offset += 2 << level;
            }
            ids.push(id.clone());
            vectors.insert(id.clone(), vector);
            ratings.insert(id, 7.0);
        }
        let entities = vec![("A".to_string(), 0.0)];
        let result = t0_sweep(&default_t0_grid(), &entities, |_, t0| {
            let config = GroupingConfig::new(t0).map_err(|e| e.to_string())?;
            let groups =
                fuse_and_group(&ids, &vectors, &ratings, &config).map_err(|e| e.to_string())?;
            Ok(groups.len() as f64)
        })
        .unwrap();
        let counts: Vec<f64> = result.cells.iter().map(|c| c.reputation).collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
    }

    #[test]
    fn csv_holds_cells_and_summary_rows() {
        let entities = vec![("A".to_string(), 9.0), ("B".to_string(), 4.0)];
        let result = t0_sweep(&[0.25, 0.75], &entities, |id, t0| {
            Ok(if id == "A" { 8.0 + t0 } else { 4.0 - t0 })
        })
        .unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        write_sweep_csv(&result, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "entity,t0,reputation,abs_error");
        // 4 cells + 2 per-entity + 2 per-threshold + 1 grand row.
        assert_eq!(lines.len(), 10);
        assert_eq!(lines[1], "A,0.25,8.25,0.75");
        assert!(lines.iter().any(|l| l.starts_with("A,all,,")));
        assert!(lines.iter().any(|l| l.starts_with("all,0.75,,")));
        assert!(lines.last().unwrap().starts_with("all,all,,"));
    }

    proptest! {
        #[test]
        fn squared_error_is_the_square_of_absolute_error(
            gt in -100.0f64..100.0,
            rep in -100.0f64..100.0,
        ) {
            let abs = absolute_error(gt, rep);
            prop_assert!(abs >= 0.0);
            prop_assert_eq!(squared_error(gt, rep), abs * abs);
        }

        #[test]
        fn maer_views_share_one_grand_mean(seed in 0u64..40) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let entities: Vec<(String, f64)> = (0..10)
                .map(|i| (format!("e{i}"), rng.gen_range(0.0..10.0)))
                .collect();
            let mut lookup = std::collections::HashMap::new();
            for (id, _) in &entities {
                for &t0 in &default_t0_grid() {
                    lookup.insert(
                        (id.clone(), (t0 * 100.0).round() as i64),
                        rng.gen_range(0.0..10.0),
                    );
                }
            }
            let result = t0_sweep(&default_t0_grid(), &entities, |id, t0| {
                Ok(lookup[&(id.to_string(), (t0 * 100.0).round() as i64)])
            })
            .unwrap();

            let grand = result.grand_mean();
            let per_entity = result.maer_per_entity();
            let via_entities =
                per_entity.iter().map(|(_, m)| m).sum::<f64>() / per_entity.len() as f64;
            prop_assert!((grand - via_entities).abs() < 1e-12);
            let per_threshold = result.maer_per_threshold();
            let via_thresholds =
                per_threshold.iter().map(|(_, m)| m).sum::<f64>() / per_threshold.len() as f64;
            prop_assert!((grand - via_thresholds).abs() < 1e-12);
        }
    }
}
