//! Design-space exploration: adders × SNR × Monte-Carlo runs, aggregated
//! accuracy joined with proxy gate costs, Pareto flags and quality
//! constraints.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adders::{AdderError, AdderFamily, AdderModel};
use crate::cordic::{CordicConfig, CordicError, CordicSettings};
use crate::music::MusicConfig;
use crate::ofdm::{run_pipeline, run_seed, OfdmConfig, RadarScene, RngSpec};

pub const RUNS_CSV_HEADER: &str = "adder,snr_db,run,seed,estimated_range_m,abs_error_pct,converged";
pub const AGGREGATES_CSV_HEADER: &str =
    "adder,snr_db,runs,converged,mean_abs_error_pct,std_abs_error_pct";
pub const DSE_CSV_HEADER: &str =
    "adder,mean_error_pct,area_proxy,power_proxy,area_saving_pct,power_saving_pct,dominated";

pub const RUNS_CSV: &str = "runs.csv";
pub const AGGREGATES_CSV: &str = "aggregates.csv";
pub const DSE_CSV: &str = "dse.csv";
pub const NOTES_FILE: &str = "dse_notes.txt";

#[derive(Debug, Error)]
pub enum DseError {
    #[error("invalid sweep plan: {0}")]
    Plan(String),
    #[error("adder `{spec}`: {source}")]
    Adder { spec: String, source: AdderError },
    #[error("adder `{adder}`: {source}")]
    Cordic { adder: String, source: CordicError },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid quality constraints: {0}")]
    Constraints(String),
    #[error("no CLA baseline among the design points (add `cla:W` to the adder list)")]
    MissingBaseline,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepPlan {
    /// Adder specs such as `exact:16` or `acla:16:4`.
    pub adders: Vec<String>,
    pub snr_db: Vec<f64>,
    pub runs: u64,
    pub seed: u64,
}

impl Default for SweepPlan {
    fn default() -> Self {
        SweepPlan {
            adders: vec!["cla:16".into(), "acla:16:4".into()],
            snr_db: vec![-5.0, 0.0, 5.0, 10.0, 15.0],
            runs: 100,
            seed: 0,
        }
    }
}

impl SweepPlan {
    pub fn validate(&self) -> Result<(), DseError> {
        if self.runs < 1 {
            return Err(DseError::Plan("runs must be at least 1".into()));
        }
        if self.snr_db.is_empty() {
            return Err(DseError::Plan("snr_db list is empty".into()));
        }
        if let Some(s) = self.snr_db.iter().find(|s| !s.is_finite()) {
            return Err(DseError::Plan(format!("snr_db {s} is not finite")));
        }
        if self.adders.is_empty() {
            return Err(DseError::Plan("adder list is empty".into()));
        }
        Ok(())
    }

    /// Parses every adder spec, rejecting duplicates by canonical name.
    pub fn adder_models(&self) -> Result<Vec<AdderModel>, DseError> {
        let mut out: Vec<AdderModel> = Vec::with_capacity(self.adders.len());
        for spec in &self.adders {
            let m = AdderModel::from_spec(spec).map_err(|source| DseError::Adder {
                spec: spec.clone(),
                source,
            })?;
            if out.iter().any(|o| o.name() == m.name()) {
                return Err(DseError::Plan(format!("adder `{}` listed twice", m.name())));
            }
            out.push(m);
        }
        Ok(out)
    }
}

/// Everything except the adder and SNR that a pipeline run needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub ofdm: OfdmConfig,
    pub scene: RadarScene,
    pub music: MusicConfig,
    pub cordic: CordicSettings,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), DseError> {
        let err = |e: &dyn std::fmt::Display| DseError::Config(e.to_string());
        self.ofdm.validate().map_err(|e| err(&e))?;
        self.scene.validate(&self.ofdm).map_err(|e| err(&e))?;
        self.music
            .validate(self.ofdm.n_subcarriers)
            .map_err(|e| err(&e))?;
        self.cordic.format().map_err(|e| err(&e))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRow {
    pub adder: String,
    pub snr_db: f64,
    pub run: u64,
    pub seed: u64,
    /// `NaN` for failed runs.
    pub estimated_range_m: f64,
    pub abs_error_pct: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub adder: String,
    pub snr_db: f64,
    pub runs: u64,
    pub converged: u64,
    /// Over converged runs; `NaN` when none converged.
    pub mean_abs_error_pct: f64,
    /// Sample standard deviation over converged runs; 0 for a single run.
    pub std_abs_error_pct: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepTable {
    /// Sorted by adder, SNR, run.
    pub runs: Vec<RunRow>,
    /// Sorted by adder, SNR.
    pub aggregates: Vec<AggregateRow>,
}

/// Runs every (adder, SNR, run) cell. `jobs` bounds the worker count; the
/// table does not depend on it. A run that fails for any reason is recorded
/// as not converged.
pub fn run_sweep(
    plan: &SweepPlan,
    cfg: &PipelineConfig,
    jobs: Option<usize>,
) -> Result<SweepTable, DseError> {
    plan.validate()?;
    cfg.validate()?;
    let cordics: Vec<CordicConfig> = plan
        .adder_models()?
        .into_iter()
        .map(|m| {
            let adder = m.name().to_string();
            cfg.cordic
                .build(m)
                .map_err(|source| DseError::Cordic { adder, source })
        })
        .collect::<Result<_, _>>()?;

    let mut cells = Vec::new();
    for (a, _) in cordics.iter().enumerate() {
        for &snr in &plan.snr_db {
            for run in 0..plan.runs {
                cells.push((a, snr, run));
            }
        }
    }
    let exec = |&(a, snr, run): &(usize, f64, u64)| {
        let cordic = &cordics[a];
        let seed = run_seed(plan.seed, Some(snr), run);
        let scene = RadarScene {
            snr_db: Some(snr),
            ..cfg.scene.clone()
        };
        let res = run_pipeline(
            &cfg.ofdm,
            &scene,
            &cfg.music,
            cordic,
            RngSpec::new(seed, 0),
            false,
        );
        let (est, err, ok) = match res {
            Ok(r) if r.converged && r.estimated_range_m.is_finite() => {
                (r.estimated_range_m, r.abs_error_pct, true)
            }
            _ => (f64::NAN, f64::NAN, false),
        };
        RunRow {
            adder: cordic.adder().name().to_string(),
            snr_db: snr,
            run,
            seed,
            estimated_range_m: est,
            abs_error_pct: err,
            converged: ok,
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().map_err(|e| DseError::Pool(e.to_string()))?;
    let mut runs: Vec<RunRow> = pool.install(|| cells.par_iter().map(exec).collect());
    runs.sort_by(|a, b| {
        a.adder
            .cmp(&b.adder)
            .then(a.snr_db.total_cmp(&b.snr_db))
            .then(a.run.cmp(&b.run))
    });
    let aggregates = aggregate(&runs);
    Ok(SweepTable { runs, aggregates })
}

/// Groups consecutive rows with equal (adder, SNR); `runs` must be sorted.
pub fn aggregate(runs: &[RunRow]) -> Vec<AggregateRow> {
    runs.chunk_by(|a, b| a.adder == b.adder && a.snr_db == b.snr_db)
        .map(|g| {
            let errs: Vec<f64> = g
                .iter()
                .filter(|r| r.converged)
                .map(|r| r.abs_error_pct)
                .collect();
            let (mean, std) = mean_std(&errs);
            AggregateRow {
                adder: g[0].adder.clone(),
                snr_db: g[0].snr_db,
                runs: g.len() as u64,
                converged: errs.len() as u64,
                mean_abs_error_pct: mean,
                std_abs_error_pct: std,
            }
        })
        .collect()
}

fn mean_std(x: &[f64]) -> (f64, f64) {
    if x.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (mean, 0.0);
    }
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DsePoint {
    pub adder: String,
    pub family: AdderFamily,
    /// Mean over converged runs at positive SNR; `NaN` when none converged.
    pub mean_error_pct: f64,
    pub area_proxy: f64,
    pub power_proxy: f64,
    /// Converged share of the runs behind `mean_error_pct`.
    pub converged_fraction: f64,
    pub dominated: bool,
}

impl DsePoint {
    /// Objectives to minimize. A point with no converged run ranks last on
    /// accuracy.
    fn objectives(&self) -> [f64; 3] {
        let e = if self.mean_error_pct.is_nan() {
            f64::INFINITY
        } else {
            self.mean_error_pct
        };
        [e, self.area_proxy, self.power_proxy]
    }
}

/// One point per adder in `adders`, from the positive-SNR runs of `table`
/// (all runs when the sweep has no positive SNR).
pub fn design_points(table: &SweepTable, adders: &[AdderModel]) -> Vec<DsePoint> {
    let any_positive = table.runs.iter().any(|r| r.snr_db > 0.0);
    adders
        .iter()
        .map(|m| {
            let rows: Vec<&RunRow> = table
                .runs
                .iter()
                .filter(|r| r.adder == m.name() && (!any_positive || r.snr_db > 0.0))
                .collect();
            let errs: Vec<f64> = rows
                .iter()
                .filter(|r| r.converged)
                .map(|r| r.abs_error_pct)
                .collect();
            let cost = m.cost();
            DsePoint {
                adder: m.name().to_string(),
                family: m.family(),
                mean_error_pct: mean_std(&errs).0,
                area_proxy: cost.area_units,
                power_proxy: cost.energy_units,
                converged_fraction: if rows.is_empty() {
                    0.0
                } else {
                    errs.len() as f64 / rows.len() as f64
                },
                dominated: false,
            }
        })
        .collect()
}

/// `a` dominates `b`: no worse on every objective and better on one.
pub fn dominates(a: &DsePoint, b: &DsePoint) -> bool {
    let (x, y) = (a.objectives(), b.objectives());
    x.iter().zip(&y).all(|(p, q)| p <= q) && x.iter().zip(&y).any(|(p, q)| p < q)
}

/// Sets `dominated` on every point; order is preserved.
pub fn pareto_filter(mut points: Vec<DsePoint>) -> Vec<DsePoint> {
    let flags: Vec<bool> = (0..points.len())
        .map(|i| points.iter().any(|p| dominates(p, &points[i])))
        .collect();
    for (p, d) in points.iter_mut().zip(flags) {
        p.dominated = d;
    }
    points
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QualityConstraints {
    pub max_error_pct: Option<f64>,
    pub min_area_saving_pct: Option<f64>,
    pub min_power_saving_pct: Option<f64>,
}

impl QualityConstraints {
    pub fn is_unbounded(&self) -> bool {
        self.max_error_pct.is_none()
            && self.min_area_saving_pct.is_none()
            && self.min_power_saving_pct.is_none()
    }

    pub fn validate(&self) -> Result<(), DseError> {
        if self.is_unbounded() {
            return Err(DseError::Constraints("set at least one bound".into()));
        }
        for (name, v) in [
            ("max_error_pct", self.max_error_pct),
            ("min_area_saving_pct", self.min_area_saving_pct),
            ("min_power_saving_pct", self.min_power_saving_pct),
        ] {
            if matches!(v, Some(x) if !x.is_finite()) {
                return Err(DseError::Constraints(format!("{name} is not finite")));
            }
        }
        Ok(())
    }

    /// Parses `key=value` pairs such as `max_error_pct=1.0`.
    pub fn parse_pairs<S: AsRef<str>>(pairs: &[S]) -> Result<Self, DseError> {
        let mut qc = QualityConstraints::default();
        for p in pairs {
            for item in p.as_ref().split(',').filter(|s| !s.is_empty()) {
                let (k, v) = item.split_once('=').ok_or_else(|| {
                    DseError::Constraints(format!("expected key=value, got `{item}`"))
                })?;
                let v: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| DseError::Constraints(format!("`{v}` is not a number")))?;
                let slot = match k.trim() {
                    "max_error_pct" => &mut qc.max_error_pct,
                    "min_area_saving_pct" => &mut qc.min_area_saving_pct,
                    "min_power_saving_pct" => &mut qc.min_power_saving_pct,
                    other => return Err(DseError::Constraints(format!("unknown key `{other}`"))),
                };
                *slot = Some(v);
            }
        }
        Ok(qc)
    }
}

/// The exact carry-lookahead point that savings are measured against.
pub fn baseline(points: &[DsePoint]) -> Option<&DsePoint> {
    points
        .iter()
        .find(|p| p.family == AdderFamily::CarryLookaheadExact)
}

/// `100 · (baseline - value) / baseline`.
pub fn saving_pct(baseline: f64, value: f64) -> f64 {
    if baseline == 0.0 {
        0.0
    } else {
        100.0 * (baseline - value) / baseline
    }
}

/// Points meeting every set bound, in input order.
pub fn apply_constraints(
    points: &[DsePoint],
    qc: &QualityConstraints,
) -> Result<Vec<DsePoint>, DseError> {
    qc.validate()?;
    let base = baseline(points).ok_or(DseError::MissingBaseline)?;
    Ok(points
        .iter()
        .filter(|p| {
            qc.max_error_pct.is_none_or(|m| p.mean_error_pct <= m)
                && qc
                    .min_area_saving_pct
                    .is_none_or(|m| saving_pct(base.area_proxy, p.area_proxy) >= m)
                && qc
                    .min_power_saving_pct
                    .is_none_or(|m| saving_pct(base.power_proxy, p.power_proxy) >= m)
        })
        .cloned()
        .collect())
}

/// Written report files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportPaths {
    pub runs: PathBuf,
    pub aggregates: PathBuf,
    pub dse: PathBuf,
    pub notes: PathBuf,
}

/// Shortest round-trip decimal; `NaN` becomes an empty field.
fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

pub fn runs_csv(runs: &[RunRow]) -> String {
    let mut s = format!("{RUNS_CSV_HEADER}\n");
    for r in runs {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.adder,
            num(r.snr_db),
            r.run,
            r.seed,
            num(r.estimated_range_m),
            num(r.abs_error_pct),
            r.converged
        );
    }
    s
}

pub fn aggregates_csv(rows: &[AggregateRow]) -> String {
    let mut s = format!("{AGGREGATES_CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.adder,
            num(r.snr_db),
            r.runs,
            r.converged,
            num(r.mean_abs_error_pct),
            num(r.std_abs_error_pct)
        );
    }
    s
}

/// Savings columns are empty when `baseline` is `None`.
pub fn dse_csv(points: &[DsePoint], baseline: Option<&DsePoint>) -> String {
    let mut s = format!("{DSE_CSV_HEADER}\n");
    for p in points {
        let (area, power) = match baseline {
            Some(b) => (
                num(saving_pct(b.area_proxy, p.area_proxy)),
                num(saving_pct(b.power_proxy, p.power_proxy)),
            ),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            p.adder,
            num(p.mean_error_pct),
            num(p.area_proxy),
            num(p.power_proxy),
            area,
            power,
            p.dominated
        );
    }
    s
}

fn notes(all: &[DsePoint], qc: Option<&QualityConstraints>) -> String {
    let mut s = String::new();
    s.push_str("Accuracy: mean absolute range error (%) over converged runs at positive SNR.\n");
    s.push_str(
        "Costs: unit-gate area and switching-energy proxies; only their ordering is meaningful.\n",
    );
    s.push_str(
        "Savings thresholds quoted for synthesized adders are illustrative under proxy costs.\n",
    );
    if let Some(qc) = qc {
        let _ = writeln!(
            s,
            "Constraints: {}",
            serde_json::to_string(qc).unwrap_or_default()
        );
    }
    s.push_str("\nadder,converged_fraction\n");
    for p in all {
        let _ = writeln!(s, "{},{}", p.adder, p.converged_fraction);
    }
    s
}

fn write(path: PathBuf, body: &str) -> Result<PathBuf, DseError> {
    fs::write(&path, body).map_err(|source| DseError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes the runs, aggregates and DSE CSVs plus a notes file into `dir`.
/// `points` go into the DSE CSV as given; `all` (typically the unfiltered
/// points) provides the baseline and the notes.
pub fn emit_report(
    table: &SweepTable,
    points: &[DsePoint],
    all: &[DsePoint],
    qc: Option<&QualityConstraints>,
    dir: &Path,
) -> Result<ReportPaths, DseError> {
    fs::create_dir_all(dir).map_err(|source| DseError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    Ok(ReportPaths {
        runs: write(dir.join(RUNS_CSV), &runs_csv(&table.runs))?,
        aggregates: write(dir.join(AGGREGATES_CSV), &aggregates_csv(&table.aggregates))?,
        dse: write(dir.join(DSE_CSV), &dse_csv(points, baseline(all)))?,
        notes: write(dir.join(NOTES_FILE), &notes(all, qc))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(name: &str, family: AdderFamily, e: f64, a: f64, p: f64) -> DsePoint {
        DsePoint {
            adder: name.into(),
            family,
            mean_error_pct: e,
            area_proxy: a,
            power_proxy: p,
            converged_fraction: 1.0,
            dominated: false,
        }
    }

    #[test]
    fn dominance_examples() {
        let one = pareto_filter(vec![pt("a", AdderFamily::Acla, 1.0, 1.0, 1.0)]);
        assert!(!one[0].dominated);
        let two = pareto_filter(vec![
            pt("a", AdderFamily::Acla, 1.0, 1.0, 1.0),
            pt("b", AdderFamily::Acla, 2.0, 2.0, 2.0),
            pt("c", AdderFamily::Acla, 1.0, 1.0, 1.0),
        ]);
        assert_eq!(
            two.iter().map(|p| p.dominated).collect::<Vec<_>>(),
            [false, true, false]
        );
        let nan = pareto_filter(vec![
            pt("a", AdderFamily::Acla, f64::NAN, 1.0, 1.0),
            pt("b", AdderFamily::Acla, 5.0, 1.0, 1.0),
        ]);
        assert!(nan[0].dominated && !nan[1].dominated);
    }

    #[test]
    fn constraints() {
        let pts = vec![
            pt(
                "cla:16",
                AdderFamily::CarryLookaheadExact,
                0.05,
                100.0,
                50.0,
            ),
            pt("x", AdderFamily::Acla, 0.5, 80.0, 40.0),
            pt("y", AdderFamily::LowerOr, 3.0, 60.0, 30.0),
        ];
        let qc = QualityConstraints {
            max_error_pct: Some(1.0),
            ..Default::default()
        };
        let sel = apply_constraints(&pts, &qc).unwrap();
        assert_eq!(
            sel.iter().map(|p| p.adder.as_str()).collect::<Vec<_>>(),
            ["cla:16", "x"]
        );
        let qc = QualityConstraints {
            min_area_saving_pct: Some(25.0),
            ..Default::default()
        };
        assert_eq!(apply_constraints(&pts, &qc).unwrap().len(), 1);
        let none = QualityConstraints {
            max_error_pct: Some(0.0),
            ..Default::default()
        };
        assert!(apply_constraints(&pts, &none).unwrap().is_empty());
        assert!(matches!(
            apply_constraints(&pts, &QualityConstraints::default()),
            Err(DseError::Constraints(_))
        ));
        assert!(matches!(
            apply_constraints(&pts[1..], &qc),
            Err(DseError::MissingBaseline)
        ));
        let csv = dse_csv(&pts[..1], baseline(&pts));
        assert!(csv.ends_with("cla:16,0.05,100,50,0,0,false\n"), "{csv}");
    }

    #[test]
    fn parse_constraint_pairs() {
        let qc =
            QualityConstraints::parse_pairs(&["max_error_pct=1.5,min_area_saving_pct=10"]).unwrap();
        assert_eq!(qc.max_error_pct, Some(1.5));
        assert_eq!(qc.min_area_saving_pct, Some(10.0));
        assert!(QualityConstraints::parse_pairs(&["bogus=1"]).is_err());
        assert!(QualityConstraints::parse_pairs(&["max_error_pct"]).is_err());
    }

    #[test]
    fn empty_table_gives_headers() {
        let t = SweepTable::default();
        assert_eq!(runs_csv(&t.runs), format!("{RUNS_CSV_HEADER}\n"));
        assert_eq!(
            aggregates_csv(&t.aggregates),
            format!("{AGGREGATES_CSV_HEADER}\n")
        );
        assert_eq!(dse_csv(&[], None), format!("{DSE_CSV_HEADER}\n"));
    }

    #[test]
    fn aggregate_statistics() {
        let row = |run, e: f64, ok| RunRow {
            adder: "a".into(),
            snr_db: 5.0,
            run,
            seed: 0,
            estimated_range_m: 50.0,
            abs_error_pct: e,
            converged: ok,
        };
        let agg = aggregate(&[
            row(0, 1.0, true),
            row(1, 3.0, true),
            row(2, f64::NAN, false),
        ]);
        assert_eq!(agg.len(), 1);
        assert_eq!((agg[0].runs, agg[0].converged), (3, 2));
        assert_eq!(agg[0].mean_abs_error_pct, 2.0);
        assert!((agg[0].std_abs_error_pct - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn plan_validation() {
        assert!(SweepPlan::default().validate().is_ok());
        let bad = SweepPlan {
            runs: 0,
            ..SweepPlan::default()
        };
        assert!(bad.validate().is_err());
        let bad = SweepPlan {
            snr_db: vec![],
            ..SweepPlan::default()
        };
        assert!(bad.validate().is_err());
        let dup = SweepPlan {
            adders: vec!["exact:16".into(), "ripple:16".into()],
            ..SweepPlan::default()
        };
        assert!(dup.adder_models().is_err());
    }
}
