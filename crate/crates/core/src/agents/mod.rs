//! Discrete-event simulation of the healthcare agents and the IDS gate that
//! screens their traffic.

mod config;
mod message;
mod sim;
mod vitals;

pub use config::{SimConfig, SimError};
pub use message::{
    AgentId, AgentKind, AgentMessage, AlertCause, AttachedRecord, MessageKind, Payload, PoolRef,
};
pub use sim::{
    ids_gate, run_simulation, EventKind, GateOutcome, LayerCounts, LayerModels, SimSummary,
    SimTrace, TraceEvent, TrafficPools,
};
pub use vitals::{
    generate_ambient, generate_vitals, AmbientReading, BedLocation, HardLimits, NoiseScales,
    PatientProfile, VitalSigns, VitalThresholds,
};
