//! Experiment configuration and the report files written by the runner.
//!
//! `run` writes `run.log`, `metrics.json`, `metrics.csv` and `trust.json` to
//! its output directory; `compare` writes `compare.json`; `gen-catalog`
//! writes a catalog file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::adaptation::ActionCatalog;
use crate::cloudenv::{generate_catalog, Catalog};
use crate::detection::{load_rules, ServiceMonitor};
use crate::engine::{
    normalize, run_batch, BatchConfig, BatchResult, EngineConfig, NormalizedMetrics, NORMALIZATION_NOTE,
};
use crate::error::{Error, Result};
use crate::model::{SizeCategory, WeightVector};
use crate::rng::{substream, Stream};

pub const DEFAULT_PROVIDERS: usize = 5;
pub const DEFAULT_SERVICES_PER_PROVIDER: usize = 3;

/// Every knob of one batch experiment. Also the schema of `--config` files,
/// where every field is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub category: SizeCategory,
    pub runs: usize,
    pub attack_rate: f64,
    pub weights: WeightVector,
    pub seed: u64,
    pub p_detect: f64,
    pub catalog: Option<PathBuf>,
    pub actions: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub out: PathBuf,
    pub tenants: usize,
    pub max_readapt: u32,
    pub sequential: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            category: SizeCategory::Small,
            runs: 100,
            attack_rate: 0.3,
            weights: WeightVector::new(0.1, 0.1, 0.8),
            seed: 42,
            p_detect: 1.0,
            catalog: None,
            actions: None,
            rules: None,
            out: PathBuf::from("out"),
            tenants: 2,
            max_readapt: 3,
            sequential: false,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.runs < 1 {
            return bad("runs must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.attack_rate) {
            return bad(format!("attack rate {} outside [0,1]", self.attack_rate));
        }
        if !(0.0..=1.0).contains(&self.p_detect) {
            return bad(format!("detection probability {} outside [0,1]", self.p_detect));
        }
        if !self.weights.is_valid() {
            return bad(format!(
                "weights {} must be non-negative with a positive sum",
                self.weights
            ));
        }
        if self.tenants < 1 {
            return bad("at least one tenant is required".into());
        }
        Ok(())
    }

    /// The configured catalog file, or the default catalog drawn from `seed`.
    pub fn catalog(&self) -> Result<Catalog> {
        match &self.catalog {
            Some(path) => Catalog::load(path),
            None => Ok(default_catalog(self.seed)),
        }
    }

    pub fn batch(&self) -> Result<BatchConfig> {
        self.validate()?;
        let actions = match &self.actions {
            Some(path) => ActionCatalog::load(path)?,
            None => ActionCatalog::default(),
        };
        let rules = match &self.rules {
            Some(path) => load_rules(path)?,
            None => Vec::new(),
        };
        Ok(BatchConfig {
            category: self.category,
            runs: self.runs,
            seed: self.seed,
            weights: self.weights,
            tenants: self.tenants,
            engine: EngineConfig {
                attack_rate: self.attack_rate,
                monitor: ServiceMonitor::new(self.p_detect),
                max_readapt: self.max_readapt,
                actions,
                ..EngineConfig::default()
            },
            rules,
            parallel: !self.sequential,
        })
    }

    /// Whether two configs draw the same workflow population.
    pub fn same_population(&self, other: &Self) -> bool {
        self.seed == other.seed
            && self.category == other.category
            && self.runs == other.runs
            && self.tenants == other.tenants
    }

    /// The fields that determine results. Output location and threading mode
    /// are left out so that they cannot change file contents.
    fn echo(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = v.as_object_mut() {
            map.remove("out");
            map.remove("sequential");
        }
        v
    }
}

/// Catalog used when no catalog file is given.
pub fn default_catalog(seed: u64) -> Catalog {
    generate_catalog(
        DEFAULT_PROVIDERS,
        DEFAULT_SERVICES_PER_PROVIDER,
        &mut substream(seed, Stream::Catalog, 0),
    )
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn number(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v).map_or(serde_json::Value::Null, Into::into)
}

pub fn metrics_csv(result: &BatchResult) -> String {
    let mut out = String::from("run_id,time,price,mitigation\n");
    for r in &result.records {
        writeln!(
            out,
            "{},{},{},{}",
            r.run_id, r.totals.time, r.totals.price, r.totals.mitigation
        )
        .unwrap();
    }
    out
}

pub fn metrics_json(config: &ExperimentConfig, result: &BatchResult) -> String {
    let metrics = result.metrics();
    let runs: Vec<_> = result
        .records
        .iter()
        .map(|r| {
            json!({
                "run_id": r.run_id,
                "tenant_id": r.tenant_id,
                "tasks": r.tasks,
                "attacks_detected": r.attacks_detected,
                "admission": r.admission,
                "time": number(r.totals.time),
                "price": number(r.totals.price),
                "mitigation": number(r.totals.mitigation),
            })
        })
        .collect();
    let doc = json!({
        "normalization": metrics.normalization,
        "config": config.echo(),
        "batch_size": metrics.batch_size,
        "runs": runs,
        "normalized": metrics.normalized,
    });
    serde_json::to_string_pretty(&doc).expect("metrics serialize") + "\n"
}

/// Paths of the files written by [`cmd_run`].
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub log: PathBuf,
    pub metrics_json: PathBuf,
    pub metrics_csv: PathBuf,
    pub trust: PathBuf,
    pub result: BatchResult,
}

pub fn cmd_run(config: &ExperimentConfig) -> Result<RunArtifacts> {
    let batch = config.batch()?;
    let catalog = config.catalog()?;
    let result = run_batch(&batch, &catalog)?;

    fs::create_dir_all(&config.out).map_err(|e| Error::io(&config.out, e))?;
    let artifacts = RunArtifacts {
        log: config.out.join("run.log"),
        metrics_json: config.out.join("metrics.json"),
        metrics_csv: config.out.join("metrics.csv"),
        trust: config.out.join("trust.json"),
        result,
    };
    write(&artifacts.log, artifacts.result.log_text())?;
    write(&artifacts.metrics_json, metrics_json(config, &artifacts.result))?;
    write(&artifacts.metrics_csv, metrics_csv(&artifacts.result))?;
    artifacts.result.trust.export(&artifacts.trust)?;
    Ok(artifacts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub normalization: &'static str,
    pub comparable: bool,
    pub warnings: Vec<String>,
    pub a: ArmReport,
    pub b: ArmReport,
    /// `b − a` for each normalized metric.
    pub delta: NormalizedMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmReport {
    pub config: ExperimentConfig,
    pub normalized: NormalizedMetrics,
}

/// Runs both arms and normalizes them against their union.
pub fn compare(a: &ExperimentConfig, b: &ExperimentConfig) -> Result<ComparisonReport> {
    let (batch_a, batch_b) = (a.batch()?, b.batch()?);
    let result_a = run_batch(&batch_a, &a.catalog()?)?;
    let result_b = run_batch(&batch_b, &b.catalog()?)?;
    let (ta, tb) = (result_a.admitted_totals(), result_b.admitted_totals());
    let n = normalize(&[&ta, &tb]);

    let mut warnings = Vec::new();
    if !a.same_population(b) {
        warnings.push(
            "arms differ in seed, category, runs or tenants: workflow populations are not comparable".to_string(),
        );
    }
    if a.catalog != b.catalog {
        warnings.push("arms use different catalogs".to_string());
    }
    Ok(ComparisonReport {
        normalization: NORMALIZATION_NOTE,
        comparable: warnings.is_empty(),
        warnings,
        a: ArmReport {
            config: a.clone(),
            normalized: n[0],
        },
        b: ArmReport {
            config: b.clone(),
            normalized: n[1],
        },
        delta: NormalizedMetrics {
            avg_time: n[1].avg_time - n[0].avg_time,
            avg_price: n[1].avg_price - n[0].avg_price,
            avg_mitigation: n[1].avg_mitigation - n[0].avg_mitigation,
        },
    })
}

/// Runs [`compare`] and writes `compare.json` into `out`.
pub fn cmd_compare(a: &ExperimentConfig, b: &ExperimentConfig, out: &Path) -> Result<(PathBuf, ComparisonReport)> {
    let report = compare(a, b)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let path = out.join("compare.json");
    write(
        &path,
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
    )?;
    Ok((path, report))
}

pub fn cmd_gen_catalog(seed: u64, providers: usize, services_per_provider: usize, path: &Path) -> Result<Catalog> {
    if providers < 1 || services_per_provider < 1 {
        return Err(Error::InvalidConfig(
            "catalog needs at least one provider and one service".into(),
        ));
    }
    let catalog = generate_catalog(
        providers,
        services_per_provider,
        &mut substream(seed, Stream::Catalog, 0),
    );
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    write(path, catalog.to_json() + "\n")?;
    Ok(catalog)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn out_of_range_values_rejected() {
        for config in [
            ExperimentConfig {
                attack_rate: 1.5,
                ..Default::default()
            },
            ExperimentConfig {
                p_detect: -0.1,
                ..Default::default()
            },
            ExperimentConfig {
                runs: 0,
                ..Default::default()
            },
            ExperimentConfig {
                weights: WeightVector::new(0.0, 0.0, 0.0),
                ..Default::default()
            },
        ] {
            assert!(matches!(config.validate(), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn partial_config_file_keeps_defaults() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"runs": 7, "category": "large"}"#).unwrap();
        assert_eq!(c.runs, 7);
        assert_eq!(c.category, SizeCategory::Large);
        assert_eq!(c.seed, ExperimentConfig::default().seed);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"rnus": 7}"#).is_err());
    }

    #[test]
    fn identical_arms_have_zero_delta() {
        let c = ExperimentConfig {
            runs: 10,
            ..Default::default()
        };
        let r = compare(&c, &c).unwrap();
        assert!(r.comparable);
        assert_eq!(r.delta.avg_time, 0.0);
        assert_eq!(r.delta.avg_price, 0.0);
        assert_eq!(r.delta.avg_mitigation, 0.0);
    }

    #[test]
    fn different_seeds_are_flagged() {
        let a = ExperimentConfig {
            runs: 5,
            ..Default::default()
        };
        let b = ExperimentConfig { seed: 7, ..a.clone() };
        let r = compare(&a, &b).unwrap();
        assert!(!r.comparable);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn csv_has_one_row_per_run() {
        let c = ExperimentConfig {
            runs: 12,
            ..Default::default()
        };
        let result = run_batch(&c.batch().unwrap(), &c.catalog().unwrap()).unwrap();
        let csv = metrics_csv(&result);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("run_id,time,price,mitigation"));
        assert_eq!(lines.count(), 12);
    }
}
