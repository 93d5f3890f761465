//! The three detection layers and the rule table combining the first two.
//!
//! The anomaly layer answers "normal or not" from a two-class model; the
//! misuse layer names the attack class from a one-vs-one stack; the hybrid
//! layer runs the anomaly layer first and lets the misuse layer confirm or
//! overturn its positives:
//!
//! 1. anomaly says normal -> normal;
//! 2. anomaly says attack, misuse says normal -> normal, flagged corrected;
//! 3. both say attack -> attack, with the misuse layer's class.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::AgentKind;
use crate::nslkdd::{EncodedVector, NORMAL_LABEL};
use crate::svm::{predict_binary, predict_multiclass, BinaryModel, MulticlassModel, SvmError};

/// Attack name used by the anomaly layer, which cannot name classes.
pub const GENERIC_ATTACK: &str = "attack";

#[derive(Debug, Error)]
pub enum IdsError {
    #[error("expected a {expected} verdict, got a {found} verdict")]
    WrongLayer { expected: IdsLayer, found: IdsLayer },
    #[error(transparent)]
    Svm(#[from] SvmError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdsLayer {
    Anomaly,
    Misuse,
    Hybrid,
}

impl IdsLayer {
    pub fn name(self) -> &'static str {
        match self {
            IdsLayer::Anomaly => "anomaly",
            IdsLayer::Misuse => "misuse",
            IdsLayer::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for IdsLayer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Normal,
    Attack(String),
}

impl Outcome {
    pub fn is_attack(&self) -> bool {
        matches!(self, Outcome::Attack(_))
    }

    pub fn attack_class(&self) -> Option<&str> {
        match self {
            Outcome::Normal => None,
            Outcome::Attack(name) => Some(name),
        }
    }
}

/// A layer's answer for one record.
///
/// Serializes flat for traces and reports: `layer`, `outcome`
/// ("normal"/"attack"), `attack_class` (attack verdicts only), `corrected`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub layer: IdsLayer,
    /// True only on hybrid verdicts where the misuse layer overturned an
    /// anomaly-layer positive (rule 2).
    pub corrected: bool,
}

impl Serialize for Verdict {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let attack = self.outcome.attack_class();
        let mut s = serializer.serialize_struct("Verdict", 3 + usize::from(attack.is_some()))?;
        s.serialize_field("layer", self.layer.name())?;
        s.serialize_field("outcome", if attack.is_some() { "attack" } else { "normal" })?;
        if let Some(class) = attack {
            s.serialize_field("attack_class", class)?;
        }
        s.serialize_field("corrected", &self.corrected)?;
        s.end()
    }
}

impl Verdict {
    pub fn normal(layer: IdsLayer) -> Self {
        Verdict {
            outcome: Outcome::Normal,
            layer,
            corrected: false,
        }
    }

    pub fn attack(layer: IdsLayer, class: impl Into<String>) -> Self {
        Verdict {
            outcome: Outcome::Attack(class.into()),
            layer,
            corrected: false,
        }
    }

    /// Record label this verdict predicts: "normal" or the attack class.
    pub fn predicted_label(&self) -> &str {
        match &self.outcome {
            Outcome::Normal => NORMAL_LABEL,
            Outcome::Attack(name) => name,
        }
    }
}

/// Classifies with the two-class model; any non-normal answer becomes the
/// generic attack verdict.
pub fn anomaly_classify(model: &BinaryModel, x: &EncodedVector) -> Result<Verdict, IdsError> {
    let label = predict_binary(model, x)?;
    Ok(if label == NORMAL_LABEL {
        Verdict::normal(IdsLayer::Anomaly)
    } else {
        Verdict::attack(IdsLayer::Anomaly, GENERIC_ATTACK)
    })
}

/// Classifies with the one-vs-one stack; a "normal" prediction is a normal
/// verdict, anything else names the attack class.
pub fn misuse_classify(model: &MulticlassModel, x: &EncodedVector) -> Result<Verdict, IdsError> {
    let label = predict_multiclass(model, x)?;
    Ok(if label == NORMAL_LABEL {
        Verdict::normal(IdsLayer::Misuse)
    } else {
        Verdict::attack(IdsLayer::Misuse, label)
    })
}

/// Combines an anomaly verdict and a misuse verdict into the hybrid verdict.
pub fn decision_unit(anomaly: &Verdict, misuse: &Verdict) -> Result<Verdict, IdsError> {
    if anomaly.layer != IdsLayer::Anomaly {
        return Err(IdsError::WrongLayer {
            expected: IdsLayer::Anomaly,
            found: anomaly.layer,
        });
    }
    if misuse.layer != IdsLayer::Misuse {
        return Err(IdsError::WrongLayer {
            expected: IdsLayer::Misuse,
            found: misuse.layer,
        });
    }
    Ok(match (&anomaly.outcome, &misuse.outcome) {
        // Rule 1: the anomaly layer's normal always stands.
        (Outcome::Normal, _) => Verdict::normal(IdsLayer::Hybrid),
        // Rule 2: an unconfirmed positive is an incorrect classification.
        (Outcome::Attack(_), Outcome::Normal) => Verdict {
            outcome: Outcome::Normal,
            layer: IdsLayer::Hybrid,
            corrected: true,
        },
        // Rule 3: a confirmed positive takes the misuse layer's class.
        (Outcome::Attack(_), Outcome::Attack(class)) => {
            Verdict::attack(IdsLayer::Hybrid, class.clone())
        }
    })
}

/// The hybrid layer over one record. The misuse model is only consulted when
/// the anomaly layer flags the record; rule 1 makes its answer irrelevant
/// otherwise, so the short-circuit is observationally identical.
pub fn hybrid_classify(
    anomaly_model: &BinaryModel,
    misuse_model: &MulticlassModel,
    x: &EncodedVector,
) -> Result<Verdict, IdsError> {
    let first = anomaly_classify(anomaly_model, x)?;
    if !first.outcome.is_attack() {
        return Ok(Verdict::normal(IdsLayer::Hybrid));
    }
    let second = misuse_classify(misuse_model, x)?;
    decision_unit(&first, &second)
}

/// Which detection layer screens traffic bound for each agent kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LayerAssignment {
    map: BTreeMap<AgentKind, IdsLayer>,
}

impl LayerAssignment {
    /// The framework's assignment: sensor-side agents get the cheap anomaly
    /// layer, staff agents the misuse layer, the database the hybrid stack.
    pub fn standard() -> Self {
        use AgentKind::*;
        LayerAssignment {
            map: [
                (Patient, IdsLayer::Anomaly),
                (Ambient, IdsLayer::Anomaly),
                (Nurse, IdsLayer::Misuse),
                (Physician, IdsLayer::Misuse),
                (Database, IdsLayer::Hybrid),
            ]
            .into(),
        }
    }

    pub fn layer_for(&self, kind: AgentKind) -> Option<IdsLayer> {
        self.map.get(&kind).copied()
    }

    /// Every agent kind must have a layer.
    pub fn is_total(&self) -> bool {
        AgentKind::ALL.iter().all(|k| self.map.contains_key(k))
    }
}

impl Default for LayerAssignment {
    fn default() -> Self {
        Self::standard()
    }
}
