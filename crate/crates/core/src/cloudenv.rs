//! Simulated multi-cloud environment.
//!
//! Providers offer services with fixed response time, price and CIA strength.
//! Executing a service task on a service takes exactly its response time and
//! price; an attack injector decides whether the execution is compromised.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{SecurityRequirement, Task};
use crate::scheduler::{score, SchedulingRequest, TrustView};

pub const RESPONSE_TIME_RANGE: (f64, f64) = (1.0, 50.0);
pub const PRICE_RANGE: (f64, f64) = (0.1, 10.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Service {
    pub id: String,
    pub provider_id: String,
    pub response_time: f64,
    pub price: f64,
    pub strength: SecurityRequirement,
}

impl Service {
    pub fn is_valid(&self) -> bool {
        (RESPONSE_TIME_RANGE.0..=RESPONSE_TIME_RANGE.1).contains(&self.response_time)
            && (PRICE_RANGE.0..=PRICE_RANGE.1).contains(&self.price)
            && self.strength.is_valid()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provider {
    pub id: String,
    pub services: Vec<String>,
}

/// All providers and their services, in id order.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    providers: Vec<Provider>,
    services: Vec<Service>,
}

#[derive(Serialize, Deserialize)]
struct CatalogFile {
    providers: Vec<ProviderEntry>,
}

#[derive(Serialize, Deserialize)]
struct ProviderEntry {
    id: String,
    services: Vec<ServiceEntry>,
}

#[derive(Serialize, Deserialize)]
struct ServiceEntry {
    id: String,
    response_time: f64,
    price: f64,
    strength: SecurityRequirement,
}

impl Catalog {
    /// Builds a catalog from services, grouping them by provider in order of
    /// first appearance.
    pub fn from_services(services: Vec<Service>) -> Result<Self> {
        let mut ids = BTreeSet::new();
        let mut providers: Vec<Provider> = Vec::new();
        for s in &services {
            if !ids.insert(s.id.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate service id {}", s.id)));
            }
            if !s.is_valid() {
                return Err(Error::InvalidConfig(format!(
                    "service {} has attributes out of range",
                    s.id
                )));
            }
            match providers.iter_mut().find(|p| p.id == s.provider_id) {
                Some(p) => p.services.push(s.id.clone()),
                None => providers.push(Provider {
                    id: s.provider_id.clone(),
                    services: vec![s.id.clone()],
                }),
            }
        }
        Ok(Self { providers, services })
    }

    pub fn providers(&self) -> &[Provider] {
        &self.providers
    }

    pub fn services(&self) -> &[Service] {
        &self.services
    }

    pub fn service(&self, id: &str) -> Option<&Service> {
        self.services.iter().find(|s| s.id == id)
    }

    pub fn len(&self) -> usize {
        self.services.len()
    }

    pub fn is_empty(&self) -> bool {
        self.services.is_empty()
    }

    pub fn to_json(&self) -> String {
        let file = CatalogFile {
            providers: self
                .providers
                .iter()
                .map(|p| ProviderEntry {
                    id: p.id.clone(),
                    services: p
                        .services
                        .iter()
                        .map(|sid| {
                            let s = self.service(sid).expect("provider lists its own services");
                            ServiceEntry {
                                id: s.id.clone(),
                                response_time: s.response_time,
                                price: s.price,
                                strength: s.strength,
                            }
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("catalog serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::parse(text, Path::new("<catalog>"))
    }

    fn parse(text: &str, origin: &Path) -> Result<Self> {
        let file: CatalogFile = serde_json::from_str(text).map_err(|e| Error::parse(origin, e))?;
        let services = file
            .providers
            .into_iter()
            .flat_map(|p| {
                let provider_id = p.id;
                p.services.into_iter().map(move |s| Service {
                    id: s.id,
                    provider_id: provider_id.clone(),
                    response_time: s.response_time,
                    price: s.price,
                    strength: s.strength,
                })
            })
            .collect();
        Self::from_services(services)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let catalog = Self::parse(&text, path)?;
        if catalog.is_empty() {
            return Err(Error::EmptyCatalog);
        }
        Ok(catalog)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

/// Draws a catalog with attributes uniform over the documented ranges.
/// Services are numbered consecutively across providers.
pub fn generate_catalog<R: Rng + ?Sized>(n_providers: usize, services_per_provider: usize, rng: &mut R) -> Catalog {
    let mut services = Vec::with_capacity(n_providers * services_per_provider);
    for p in 0..n_providers {
        for s in 0..services_per_provider {
            services.push(Service {
                id: format!("service{}", p * services_per_provider + s),
                provider_id: format!("provider{p}"),
                response_time: rng.gen_range(RESPONSE_TIME_RANGE.0..=RESPONSE_TIME_RANGE.1),
                price: rng.gen_range(PRICE_RANGE.0..=PRICE_RANGE.1),
                strength: SecurityRequirement::sample(rng),
            });
        }
    }
    let providers = (0..n_providers)
        .map(|p| Provider {
            id: format!("provider{p}"),
            services: (0..services_per_provider)
                .map(|s| format!("service{}", p * services_per_provider + s))
                .collect(),
        })
        .collect();
    Catalog { providers, services }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AttackType {
    DoS,
    Probe,
    U2R,
    R2L,
}

impl AttackType {
    pub const ALL: [AttackType; 4] = [AttackType::DoS, AttackType::Probe, AttackType::U2R, AttackType::R2L];

    /// CIA impact of a successful attack of this type.
    pub const fn impact(self) -> SecurityRequirement {
        match self {
            AttackType::DoS => SecurityRequirement::new(0.56, 0.56, 0.56),
            AttackType::Probe => SecurityRequirement::new(0.22, 0.22, 0.0),
            AttackType::U2R => SecurityRequirement::new(0.56, 0.22, 0.22),
            AttackType::R2L => SecurityRequirement::new(0.56, 0.56, 0.22),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AttackType::DoS => "DoS",
            AttackType::Probe => "Probe",
            AttackType::U2R => "U2R",
            AttackType::R2L => "R2L",
        }
    }

    pub(crate) fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::ALL[rng.gen_range(0..Self::ALL.len())]
    }
}

impl fmt::Display for AttackType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackEvent {
    pub attack_type: AttackType,
    pub task_id: String,
    pub service_id: String,
    pub instance_id: String,
    pub sim_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExecutionOutcome {
    pub task_id: String,
    pub service_id: String,
    pub instance_id: String,
    pub started_at: f64,
    pub elapsed: f64,
    pub charged: f64,
    pub attack: Option<AttackEvent>,
}

impl ExecutionOutcome {
    pub fn completed_at(&self) -> f64 {
        self.started_at + self.elapsed
    }
}

/// Where and when an execution happens.
#[derive(Debug, Clone, Copy)]
pub struct ExecutionSlot<'a> {
    pub instance_id: &'a str,
    pub start: f64,
    /// 0 for the first run of a task, incremented per adaptation re-run.
    pub attempt: u32,
}

impl<'a> ExecutionSlot<'a> {
    pub fn new(instance_id: &'a str, start: f64) -> Self {
        Self {
            instance_id,
            start,
            attempt: 0,
        }
    }
}

/// Decides whether an execution is attacked, and by what.
pub trait AttackInjector {
    fn inject(&mut self, task: &Task, service: &Service, slot: &ExecutionSlot<'_>) -> Option<AttackType>;
}

/// Bernoulli(`rate`) attack per execution, type uniform over the four kinds.
#[derive(Debug, Clone)]
pub struct RandomInjector<R> {
    pub rate: f64,
    pub rng: R,
}

impl<R: Rng> AttackInjector for RandomInjector<R> {
    fn inject(&mut self, _task: &Task, _service: &Service, _slot: &ExecutionSlot<'_>) -> Option<AttackType> {
        sample_attack(self.rate, &mut self.rng)
    }
}

fn sample_attack<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> Option<AttackType> {
    rng.gen_bool(rate).then(|| AttackType::sample(rng))
}

/// Attacks exactly the listed `(task_id, attempt)` executions.
#[derive(Debug, Clone, Default)]
pub struct ScriptedInjector {
    script: BTreeMap<(String, u32), AttackType>,
}

impl ScriptedInjector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn attack(mut self, task_id: impl Into<String>, attempt: u32, attack: AttackType) -> Self {
        self.script.insert((task_id.into(), attempt), attack);
        self
    }
}

impl AttackInjector for ScriptedInjector {
    fn inject(&mut self, task: &Task, _service: &Service, slot: &ExecutionSlot<'_>) -> Option<AttackType> {
        self.script.get(&(task.id.clone(), slot.attempt)).copied()
    }
}

/// Runs a service task on `service` with a Bernoulli(`attack_rate`) attack.
pub fn execute<R: Rng + ?Sized>(
    task: &Task,
    service: &Service,
    attack_rate: f64,
    rng: &mut R,
    slot: ExecutionSlot<'_>,
) -> Result<ExecutionOutcome> {
    ensure_service_task(task)?;
    let attack = sample_attack(attack_rate, rng);
    Ok(outcome(task, service, slot, attack))
}

/// Like [`execute`], with the attack decided by `injector`.
pub fn execute_with(
    task: &Task,
    service: &Service,
    injector: &mut dyn AttackInjector,
    slot: ExecutionSlot<'_>,
) -> Result<ExecutionOutcome> {
    ensure_service_task(task)?;
    let attack = injector.inject(task, service, &slot);
    Ok(outcome(task, service, slot, attack))
}

fn ensure_service_task(task: &Task) -> Result<()> {
    if task.is_service() {
        Ok(())
    } else {
        Err(Error::Contract(format!(
            "user task {} cannot run on a cloud service",
            task.id
        )))
    }
}

fn outcome(task: &Task, service: &Service, slot: ExecutionSlot<'_>, attack: Option<AttackType>) -> ExecutionOutcome {
    ExecutionOutcome {
        task_id: task.id.clone(),
        service_id: service.id.clone(),
        instance_id: slot.instance_id.to_owned(),
        started_at: slot.start,
        elapsed: service.response_time,
        charged: service.price,
        attack: attack.map(|attack_type| AttackEvent {
            attack_type,
            task_id: task.id.clone(),
            service_id: service.id.clone(),
            instance_id: slot.instance_id.to_owned(),
            sim_time: slot.start,
        }),
    }
}

/// Best-scoring replacement for `failed`, preferring other providers.
///
/// Ties resolve to the lexicographically smallest service id.
pub fn backup_service<'c>(
    failed: &Service,
    request: &SchedulingRequest,
    catalog: &'c Catalog,
    trust: &dyn TrustView,
) -> Result<&'c Service> {
    let best = |filter: &dyn Fn(&Service) -> bool| {
        catalog
            .services()
            .iter()
            .filter(|s| filter(s))
            .map(|s| (score(s, request, trust.trust_of(s)), s))
            .min_by(|(a, sa), (b, sb)| a.total_cmp(b).then_with(|| sa.id.cmp(&sb.id)))
            .map(|(_, s)| s)
    };
    best(&|s| s.id != failed.id && s.provider_id != failed.provider_id)
        .or_else(|| best(&|s| s.id != failed.id))
        .ok_or_else(|| Error::NoBackup(failed.id.clone()))
}
