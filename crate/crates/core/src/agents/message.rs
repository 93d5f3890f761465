use std::fmt;

use serde::{Deserialize, Serialize};

use super::vitals::{AmbientReading, VitalSigns};

/// The five agent kinds of the framework.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Patient,
    Nurse,
    Physician,
    Ambient,
    Database,
}

impl AgentKind {
    pub const ALL: [AgentKind; 5] = [
        AgentKind::Patient,
        AgentKind::Nurse,
        AgentKind::Physician,
        AgentKind::Ambient,
        AgentKind::Database,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Patient => "patient",
            AgentKind::Nurse => "nurse",
            AgentKind::Physician => "physician",
            AgentKind::Ambient => "ambient",
            AgentKind::Database => "database",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One concrete agent instance, e.g. `patient-412`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId {
    pub kind: AgentKind,
    pub index: u32,
}

impl AgentId {
    pub fn new(kind: AgentKind, index: u32) -> Self {
        AgentId { kind, index }
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.kind, self.index)
    }
}

impl Serialize for AgentId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Message kinds exchanged between the agents, one per interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    /// Patient -> Database: identity data stored on admission.
    IdentityStore,
    /// Patient -> Nurse: vitals crossed an alarm threshold.
    HealthAlert,
    /// Patient -> Nurse: an explicit request from the patient.
    PatientRequest,
    /// Ambient -> Nurse: smoke or over-temperature in a zone.
    AmbientAlert,
    /// Nurse -> Physician: report on a handled alert.
    ActivityReport,
    /// Nurse -> Database: the same report, stored.
    ReportStore,
    /// Physician -> Nurse: request to perform a treatment.
    TreatRequest,
    /// Physician -> Patient: request for current vitals.
    StatusRequest,
    /// Patient -> Physician: vitals sent in reply.
    StatusResponse,
}

impl MessageKind {
    pub const ALL: [MessageKind; 9] = [
        MessageKind::IdentityStore,
        MessageKind::HealthAlert,
        MessageKind::PatientRequest,
        MessageKind::AmbientAlert,
        MessageKind::ActivityReport,
        MessageKind::ReportStore,
        MessageKind::TreatRequest,
        MessageKind::StatusRequest,
        MessageKind::StatusResponse,
    ];

    /// The only (sender kind, receiver kind) pair this message may travel on.
    pub fn route(self) -> (AgentKind, AgentKind) {
        use AgentKind::*;
        match self {
            MessageKind::IdentityStore => (Patient, Database),
            MessageKind::HealthAlert => (Patient, Nurse),
            MessageKind::PatientRequest => (Patient, Nurse),
            MessageKind::AmbientAlert => (Ambient, Nurse),
            MessageKind::ActivityReport => (Nurse, Physician),
            MessageKind::ReportStore => (Nurse, Database),
            MessageKind::TreatRequest => (Physician, Nurse),
            MessageKind::StatusRequest => (Physician, Patient),
            MessageKind::StatusResponse => (Patient, Physician),
        }
    }
}

/// What triggered a nurse activity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlertCause {
    Health,
    Ambient,
    Treat,
}

/// Application payloads; the network-level record screened by the IDS rides
/// separately on the message.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    Identity { patient: u32 },
    Vitals(VitalSigns),
    Ambient(AmbientReading),
    Request { patient: u32 },
    Report { subject: u32, cause: AlertCause },
    Treat { patient: u32 },
    StatusQuery { patient: u32 },
    Empty,
}

/// Which traffic pool the attached network record was sampled from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolRef {
    Normal,
    Attack(String),
}

/// Reference to the NSL-KDD record modeling this message's network footprint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttachedRecord {
    pub pool: PoolRef,
    pub index: usize,
    pub label: String,
}

/// A typed message between two agents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentMessage {
    pub msg_id: u64,
    pub from: AgentId,
    pub to: AgentId,
    pub kind: MessageKind,
    pub payload: Payload,
    pub record: AttachedRecord,
    /// Tick the message was emitted on.
    pub timestamp: u64,
}

impl AgentMessage {
    /// Whether (from, to) agree with the kind's route.
    pub fn route_ok(&self) -> bool {
        self.kind.route() == (self.from.kind, self.to.kind)
    }
}
