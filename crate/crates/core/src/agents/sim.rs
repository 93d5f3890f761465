//! Deterministic synchronous-round simulation of the five agents.
//!
//! Each tick delivers the previous tick's messages through the IDS gate of
//! the destination agent, then steps every agent in a fixed order. After the
//! last tick the still-queued messages are flushed through the gate so every
//! emitted message ends up exactly once as delivered or blocked.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{SimConfig, SimError};
use super::message::{
    AgentId, AgentKind, AgentMessage, AlertCause, AttachedRecord, MessageKind, Payload, PoolRef,
};
use super::vitals::{generate_ambient, generate_vitals, PatientProfile};
use crate::ids::{anomaly_classify, hybrid_classify, misuse_classify, IdsLayer, Verdict};
use crate::nslkdd::{AttackCatalog, EncodedVector, FeatureSchema, TrafficRecord, NORMAL_LABEL};
use crate::svm::{BinaryModel, MulticlassModel};

/// The two trained models the three layers are built from.
#[derive(Debug, Clone)]
pub struct LayerModels {
    pub anomaly: BinaryModel,
    pub misuse: MulticlassModel,
}

/// Pre-encoded traffic records the simulation attaches to messages, split
/// into the normal pool and one pool per attack class.
#[derive(Debug, Clone)]
pub struct TrafficPools {
    normal: Vec<(TrafficRecord, EncodedVector)>,
    attacks: BTreeMap<String, Vec<(TrafficRecord, EncodedVector)>>,
}

impl TrafficPools {
    /// Partitions a test split by label and encodes every record once.
    /// Labels outside the catalog and the normal class are dropped.
    pub fn from_test_split(
        records: &[TrafficRecord],
        schema: &FeatureSchema,
        catalog: &AttackCatalog,
    ) -> Self {
        let mut normal = Vec::new();
        let mut attacks: BTreeMap<String, Vec<(TrafficRecord, EncodedVector)>> = catalog
            .names()
            .map(|n| (n.to_string(), Vec::new()))
            .collect();
        for rec in records {
            let encoded = schema.encode(rec);
            if rec.label() == NORMAL_LABEL {
                normal.push((rec.clone(), encoded));
            } else if let Some(bucket) = attacks.get_mut(rec.label()) {
                bucket.push((rec.clone(), encoded));
            }
        }
        TrafficPools { normal, attacks }
    }

    pub fn normal_len(&self) -> usize {
        self.normal.len()
    }

    pub fn attack_len(&self, class: &str) -> usize {
        self.attacks.get(class).map_or(0, Vec::len)
    }

    /// Resolves a record reference back to its encoded form.
    pub fn lookup(&self, record: &AttachedRecord) -> Option<&EncodedVector> {
        match &record.pool {
            PoolRef::Normal => self.normal.get(record.index).map(|(_, e)| e),
            PoolRef::Attack(class) => self
                .attacks
                .get(class)
                .and_then(|p| p.get(record.index))
                .map(|(_, e)| e),
        }
    }

    /// The raw record behind a reference, for replay and inspection.
    pub fn lookup_record(&self, record: &AttachedRecord) -> Option<&TrafficRecord> {
        match &record.pool {
            PoolRef::Normal => self.normal.get(record.index).map(|(r, _)| r),
            PoolRef::Attack(class) => self
                .attacks
                .get(class)
                .and_then(|p| p.get(record.index))
                .map(|(r, _)| r),
        }
    }
}

/// Result of screening one message; both arms carry the layer's verdict.
#[derive(Debug, Clone)]
pub enum GateOutcome {
    Delivered(AgentMessage, Verdict),
    Blocked(AgentMessage, Verdict),
}

/// Screens a message with the IDS layer assigned to its destination agent:
/// the attached record is classified, and an attack verdict drops the
/// message.
pub fn ids_gate(
    msg: AgentMessage,
    assignment: &crate::ids::LayerAssignment,
    models: &LayerModels,
    pools: &TrafficPools,
) -> Result<GateOutcome, SimError> {
    let layer = assignment
        .layer_for(msg.to.kind)
        .ok_or(SimError::InvalidConfig(format!(
            "no layer assigned to {}",
            msg.to.kind
        )))?;
    let x = pools
        .lookup(&msg.record)
        .ok_or_else(|| SimError::InvalidConfig("message references a missing record".into()))?;
    let verdict = match layer {
        IdsLayer::Anomaly => anomaly_classify(&models.anomaly, x)?,
        IdsLayer::Misuse => misuse_classify(&models.misuse, x)?,
        IdsLayer::Hybrid => hybrid_classify(&models.anomaly, &models.misuse, x)?,
    };
    Ok(if verdict.outcome.is_attack() {
        GateOutcome::Blocked(msg, verdict)
    } else {
        GateOutcome::Delivered(msg, verdict)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Emitted,
    Delivered,
    Blocked,
}

/// One line of the run trace.
#[derive(Debug, Clone, Serialize)]
pub struct TraceEvent {
    pub seq: u64,
    pub tick: u64,
    pub event: EventKind,
    pub msg_id: u64,
    pub from: AgentId,
    pub to: AgentId,
    pub kind: MessageKind,
    pub record: AttachedRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct LayerCounts {
    pub screened: u64,
    pub delivered: u64,
    pub blocked: u64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SimSummary {
    pub emitted: u64,
    pub delivered: u64,
    pub blocked: u64,
    /// Hybrid deliveries where the decision unit overturned the anomaly layer.
    pub corrected: u64,
    pub per_layer: BTreeMap<String, LayerCounts>,
    pub emitted_by_kind: BTreeMap<String, u64>,
}

/// Full record of one simulation run.
#[derive(Debug, Clone)]
pub struct SimTrace {
    pub events: Vec<TraceEvent>,
    pub summary: SimSummary,
}

impl SimTrace {
    /// Newline-delimited JSON, one event per line.
    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        for event in &self.events {
            out.push_str(&serde_json::to_string(event).expect("event serializes"));
            out.push('\n');
        }
        out
    }

    /// SHA-256 of the NDJSON trace.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_ndjson().as_bytes()))
    }

    /// Flat `metric,value` CSV of the summary.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("metric,value\n");
        out.push_str(&format!("emitted,{}\n", self.summary.emitted));
        out.push_str(&format!("delivered,{}\n", self.summary.delivered));
        out.push_str(&format!("blocked,{}\n", self.summary.blocked));
        out.push_str(&format!("corrected,{}\n", self.summary.corrected));
        for (layer, counts) in &self.summary.per_layer {
            out.push_str(&format!("{layer}_screened,{}\n", counts.screened));
            out.push_str(&format!("{layer}_delivered,{}\n", counts.delivered));
            out.push_str(&format!("{layer}_blocked,{}\n", counts.blocked));
        }
        for (kind, count) in &self.summary.emitted_by_kind {
            out.push_str(&format!("emitted_{kind},{count}\n"));
        }
        out
    }
}

struct PatientState {
    profile: PatientProfile,
    admitted: bool,
    inbox: Vec<AgentMessage>,
}

struct Engine<'a> {
    config: &'a SimConfig,
    models: &'a LayerModels,
    pools: &'a TrafficPools,
    rng: ChaCha8Rng,
    mix: Vec<(String, f64)>,
    mix_total: f64,
    patients: Vec<PatientState>,
    nurse_inbox: Vec<AgentMessage>,
    physician_inbox: Vec<AgentMessage>,
    database_inbox: Vec<AgentMessage>,
    /// Messages emitted during the current tick, delivered next tick.
    outbox: Vec<AgentMessage>,
    next_msg_id: u64,
    next_seq: u64,
    events: Vec<TraceEvent>,
    summary: SimSummary,
}

/// Runs the simulation to completion and returns its trace.
pub fn run_simulation(
    config: &SimConfig,
    models: &LayerModels,
    pools: &TrafficPools,
) -> Result<SimTrace, SimError> {
    config.validate()?;
    if config.injection_rate > 0.0 {
        for (class, weight) in &config.attack_mix {
            if *weight > 0.0 && pools.attack_len(class) == 0 {
                return Err(SimError::EmptyPool(class.clone()));
            }
        }
    }
    if pools.normal_len() == 0 {
        return Err(SimError::EmptyPool(NORMAL_LABEL.into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(0);
    let mut profile_rng = ChaCha8Rng::seed_from_u64(config.seed);
    profile_rng.set_stream(1);

    let patients = (0..config.patient_count)
        .map(|id| PatientState {
            profile: PatientProfile::draw(id, &mut profile_rng),
            admitted: false,
            inbox: Vec::new(),
        })
        .collect();

    let mix: Vec<(String, f64)> = config
        .attack_mix
        .iter()
        .filter(|(_, w)| **w > 0.0)
        .map(|(c, w)| (c.clone(), *w))
        .collect();
    let mix_total = mix.iter().map(|(_, w)| w).sum();

    let mut engine = Engine {
        config,
        models,
        pools,
        rng,
        mix,
        mix_total,
        patients,
        nurse_inbox: Vec::new(),
        physician_inbox: Vec::new(),
        database_inbox: Vec::new(),
        outbox: Vec::new(),
        next_msg_id: 0,
        next_seq: 0,
        events: Vec::new(),
        summary: SimSummary::default(),
    };

    for tick in 0..config.tick_count as u64 {
        let queue = std::mem::take(&mut engine.outbox);
        engine.deliver(queue, tick)?;
        engine.step_patients(tick);
        engine.step_ambient(tick);
        engine.step_nurse(tick);
        engine.step_physician(tick);
        engine.step_database();
    }
    // Flush messages still in flight after the last tick.
    let queue = std::mem::take(&mut engine.outbox);
    engine.deliver(queue, config.tick_count as u64)?;

    Ok(SimTrace {
        events: engine.events,
        summary: engine.summary,
    })
}

impl Engine<'_> {
    fn sample_record(&mut self) -> AttachedRecord {
        let inject = self.config.injection_rate > 0.0
            && self.rng.random::<f64>() < self.config.injection_rate;
        if inject {
            let mut ticket = self.rng.random::<f64>() * self.mix_total;
            let mut chosen = self.mix.last().expect("validated non-empty mix").0.as_str();
            for (class, weight) in &self.mix {
                if ticket < *weight {
                    chosen = class;
                    break;
                }
                ticket -= weight;
            }
            let pool = &self.pools.attacks[chosen];
            let index = self.rng.random_range(0..pool.len());
            AttachedRecord {
                pool: PoolRef::Attack(chosen.to_string()),
                index,
                label: pool[index].0.label().to_string(),
            }
        } else {
            let index = self.rng.random_range(0..self.pools.normal.len());
            AttachedRecord {
                pool: PoolRef::Normal,
                index,
                label: NORMAL_LABEL.to_string(),
            }
        }
    }

    fn emit(&mut self, tick: u64, from: AgentId, to: AgentId, kind: MessageKind, payload: Payload) {
        let record = self.sample_record();
        let msg = AgentMessage {
            msg_id: self.next_msg_id,
            from,
            to,
            kind,
            payload,
            record,
            timestamp: tick,
        };
        debug_assert!(msg.route_ok(), "{kind:?} emitted on a wrong route");
        self.next_msg_id += 1;
        self.summary.emitted += 1;
        *self
            .summary
            .emitted_by_kind
            .entry(kind_name(kind))
            .or_default() += 1;
        self.push_event(tick, EventKind::Emitted, &msg, None);
        self.outbox.push(msg);
    }

    fn push_event(
        &mut self,
        tick: u64,
        event: EventKind,
        msg: &AgentMessage,
        verdict: Option<Verdict>,
    ) {
        self.events.push(TraceEvent {
            seq: self.next_seq,
            tick,
            event,
            msg_id: msg.msg_id,
            from: msg.from,
            to: msg.to,
            kind: msg.kind,
            record: msg.record.clone(),
            verdict,
        });
        self.next_seq += 1;
    }

    fn deliver(&mut self, queue: Vec<AgentMessage>, tick: u64) -> Result<(), SimError> {
        for msg in queue {
            let layer =
                self.config
                    .assignment
                    .layer_for(msg.to.kind)
                    .ok_or(SimError::InvalidConfig(format!(
                        "no layer assigned to {}",
                        msg.to.kind
                    )))?;
            let layer_counts = self
                .summary
                .per_layer
                .entry(layer.name().to_string())
                .or_default();
            layer_counts.screened += 1;
            match ids_gate(msg, &self.config.assignment, self.models, self.pools)? {
                GateOutcome::Delivered(msg, verdict) => {
                    self.summary.delivered += 1;
                    self.summary
                        .per_layer
                        .get_mut(layer.name())
                        .expect("entry")
                        .delivered += 1;
                    if verdict.corrected {
                        self.summary.corrected += 1;
                    }
                    self.push_event(tick, EventKind::Delivered, &msg, Some(verdict));
                    match msg.to.kind {
                        AgentKind::Patient => self.patients[msg.to.index as usize].inbox.push(msg),
                        AgentKind::Nurse => self.nurse_inbox.push(msg),
                        AgentKind::Physician => self.physician_inbox.push(msg),
                        AgentKind::Database => self.database_inbox.push(msg),
                        AgentKind::Ambient => {}
                    }
                }
                GateOutcome::Blocked(msg, verdict) => {
                    self.summary.blocked += 1;
                    let counts = self.summary.per_layer.get_mut(layer.name()).expect("entry");
                    counts.blocked += 1;
                    self.push_event(tick, EventKind::Blocked, &msg, Some(verdict));
                }
            }
        }
        Ok(())
    }

    fn step_patients(&mut self, tick: u64) {
        let nurse = AgentId::new(AgentKind::Nurse, 0);
        let database = AgentId::new(AgentKind::Database, 0);
        for idx in 0..self.patients.len() {
            let me = AgentId::new(AgentKind::Patient, idx as u32);
            let profile = self.patients[idx].profile.clone();
            let vitals = generate_vitals(
                &mut self.rng,
                &profile,
                &self.config.vitals_noise,
                self.config.abnormal_vitals_prob,
                &self.config.thresholds,
                &self.config.hard_limits,
                tick,
            );

            // Answer the physician's status requests with current vitals.
            let inbox = std::mem::take(&mut self.patients[idx].inbox);
            for request in inbox {
                if request.kind == MessageKind::StatusRequest {
                    self.emit(
                        tick,
                        me,
                        request.from,
                        MessageKind::StatusResponse,
                        Payload::Vitals(vitals.clone()),
                    );
                }
            }

            if !self.patients[idx].admitted {
                self.patients[idx].admitted = true;
                self.emit(
                    tick,
                    me,
                    database,
                    MessageKind::IdentityStore,
                    Payload::Identity {
                        patient: profile.id,
                    },
                );
            }
            if self.config.thresholds.is_abnormal(&vitals) {
                self.emit(
                    tick,
                    me,
                    nurse,
                    MessageKind::HealthAlert,
                    Payload::Vitals(vitals.clone()),
                );
            }
            if self.rng.random::<f64>() < self.config.patient_request_prob {
                self.emit(
                    tick,
                    me,
                    nurse,
                    MessageKind::PatientRequest,
                    Payload::Request {
                        patient: profile.id,
                    },
                );
            }
        }
    }

    fn step_ambient(&mut self, tick: u64) {
        let nurse = AgentId::new(AgentKind::Nurse, 0);
        for zone in 0..self.config.ambient_zone_count {
            let reading = generate_ambient(
                &mut self.rng,
                zone,
                self.config.smoke_prob,
                self.config.heat_spike_prob,
                tick,
            );
            if reading.smoke_detected || reading.ambient_temp > self.config.ambient_temp_high {
                self.emit(
                    tick,
                    AgentId::new(AgentKind::Ambient, zone as u32),
                    nurse,
                    MessageKind::AmbientAlert,
                    Payload::Ambient(reading),
                );
            }
        }
    }

    fn step_nurse(&mut self, tick: u64) {
        let me = AgentId::new(AgentKind::Nurse, 0);
        let physician = AgentId::new(AgentKind::Physician, 0);
        let database = AgentId::new(AgentKind::Database, 0);
        let inbox = std::mem::take(&mut self.nurse_inbox);
        for msg in inbox {
            let cause = match msg.kind {
                MessageKind::HealthAlert => Some(AlertCause::Health),
                MessageKind::AmbientAlert => Some(AlertCause::Ambient),
                MessageKind::TreatRequest => Some(AlertCause::Treat),
                // Plain requests are served without a reportable activity.
                _ => None,
            };
            if let Some(cause) = cause {
                let subject = msg.from.index;
                self.emit(
                    tick,
                    me,
                    physician,
                    MessageKind::ActivityReport,
                    Payload::Report { subject, cause },
                );
                self.emit(
                    tick,
                    me,
                    database,
                    MessageKind::ReportStore,
                    Payload::Report { subject, cause },
                );
            }
        }
    }

    fn step_physician(&mut self, tick: u64) {
        let me = AgentId::new(AgentKind::Physician, 0);
        let nurse = AgentId::new(AgentKind::Nurse, 0);
        self.physician_inbox.clear();
        if self.rng.random::<f64>() < self.config.treat_request_prob {
            let patient = self.rng.random_range(0..self.config.patient_count);
            self.emit(
                tick,
                me,
                nurse,
                MessageKind::TreatRequest,
                Payload::Treat { patient },
            );
        }
        if self.rng.random::<f64>() < self.config.status_request_prob {
            let patient = self.rng.random_range(0..self.config.patient_count);
            self.emit(
                tick,
                me,
                AgentId::new(AgentKind::Patient, patient),
                MessageKind::StatusRequest,
                Payload::StatusQuery { patient },
            );
        }
    }

    fn step_database(&mut self) {
        // Stored messages need no further action; the inbox only feeds counts.
        self.database_inbox.clear();
    }
}

fn kind_name(kind: MessageKind) -> String {
    serde_json::to_string(&kind)
        .expect("kind serializes")
        .trim_matches('"')
        .to_string()
}
